//! Equilibrium calibration of the interaction coefficients.
//!
//! Mortality equals growth for every fish group. Each inhibiting term of an
//! equation is then sized against the reference state so that, summed, the
//! inhibitors cancel the growth rate and the facilitators cancel the
//! mortality, which makes the reference state a fixed point.

use serde::{Deserialize, Serialize};

use super::{CellState, LVParams, TrophicGroup, DEFAULT_COTS_DESTRUCTION};
use crate::error::{Error, Result};
use crate::world::WorldGrid;

/// Intrinsic growth rates, day⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub coral: f64,
    pub turf: f64,
    pub herbivores: f64,
    pub corallivores: f64,
    pub carnivores: f64,
}

impl Default for Alphas {
    fn default() -> Self {
        Alphas {
            coral: 3.0e-5,
            turf: 1.0e-2,
            herbivores: 9.4e-4,
            corallivores: 4.2e-4,
            carnivores: 4.4e-4,
        }
    }
}

impl Alphas {
    pub fn as_array(&self) -> [f64; 5] {
        [
            self.coral,
            self.turf,
            self.herbivores,
            self.corallivores,
            self.carnivores,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationMode {
    /// Growth (resp. mortality) is split evenly across the inhibiting
    /// (resp. facilitating) terms; the reference state is an exact fixed point.
    #[default]
    BalancedPartition,
    /// Every term gets the full `alpha / y0` or `gamma / z0`.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationScope {
    /// Reference state = spatial means over fishable cells.
    #[default]
    GlobalMean,
    /// Each fishable cell is calibrated against its own initial state.
    PerCell,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Calibration {
    Global(LVParams),
    /// One entry per cell; non-fishable cells carry the global-mean set.
    PerCell(Vec<LVParams>),
}

impl Calibration {
    pub fn params(&self, cell: usize) -> &LVParams {
        match self {
            Calibration::Global(p) => p,
            Calibration::PerCell(v) => &v[cell],
        }
    }

    /// The global-mean set, or the first fishable cell's in per-cell mode.
    pub fn global(&self) -> Option<&LVParams> {
        match self {
            Calibration::Global(p) => Some(p),
            Calibration::PerCell(_) => None,
        }
    }
}

pub fn calibrate(
    world: &WorldGrid,
    alphas: &Alphas,
    mode: CalibrationMode,
    scope: CalibrationScope,
    mean_fishers_per_cell: f64,
    cots_destruction: f64,
) -> Result<Calibration> {
    for (g, a) in TrophicGroup::ALL.iter().zip(alphas.as_array()) {
        if !(a > 0.0) {
            return Err(Error::param(
                &format!("alpha.{}", g.name()),
                format!("{a} must be > 0"),
            ));
        }
    }
    if !(mean_fishers_per_cell >= 0.0) {
        return Err(Error::param(
            "mean_fishers_per_cell",
            format!("{mean_fishers_per_cell} must be >= 0"),
        ));
    }
    if !(cots_destruction >= 0.0) {
        return Err(Error::param("cots_destruction", "must be >= 0"));
    }
    let mean = mean_fishable_state(world);
    let global = calibrate_reference(&mean, alphas, mode, mean_fishers_per_cell, cots_destruction)?;
    match scope {
        CalibrationScope::GlobalMean => Ok(Calibration::Global(global)),
        CalibrationScope::PerCell => {
            let cells = world
                .cells
                .iter()
                .map(|c| {
                    if c.habitat.is_fishable() {
                        calibrate_reference(
                            &c.state,
                            alphas,
                            mode,
                            mean_fishers_per_cell,
                            cots_destruction,
                        )
                    } else {
                        Ok(global.clone())
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Calibration::PerCell(cells))
        }
    }
}

pub(crate) fn mean_fishable_state(world: &WorldGrid) -> CellState {
    let mut sum = [0.0; 5];
    let mut n = 0usize;
    for cell in world.cells.iter().filter(|c| c.habitat.is_fishable()) {
        for (s, v) in sum.iter_mut().zip(cell.state.0) {
            *s += v;
        }
        n += 1;
    }
    CellState(sum.map(|s| s / n.max(1) as f64))
}

struct Term {
    name: &'static str,
    reference: f64,
}

fn term(name: &'static str, reference: f64) -> Term {
    Term { name, reference }
}

/// Coefficients for one equation: `(inhibitor betas, facilitator deltas)`.
fn partition(
    group: TrophicGroup,
    growth: f64,
    mortality: f64,
    inhibitors: &[Term],
    facilitators: &[Term],
    mode: CalibrationMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for t in inhibitors.iter().chain(facilitators) {
        if !(t.reference > 0.0) {
            return Err(Error::Calibration {
                group: group.name().to_string(),
                term: t.name.to_string(),
                value: t.reference,
            });
        }
    }
    let (n_inh, n_fac) = (inhibitors.len() as f64, facilitators.len() as f64);
    Ok(match mode {
        CalibrationMode::BalancedPartition => {
            let betas = inhibitors
                .iter()
                .map(|t| growth / (n_inh * t.reference))
                .collect();
            // With no inhibitor left to absorb it, any facilitation would
            // push the group off its fixed point.
            let deltas = if inhibitors.is_empty() {
                vec![0.0; facilitators.len()]
            } else {
                facilitators
                    .iter()
                    .map(|t| mortality / (n_fac * t.reference))
                    .collect()
            };
            (betas, deltas)
        }
        CalibrationMode::PaperLiteral => (
            inhibitors.iter().map(|t| growth / t.reference).collect(),
            facilitators
                .iter()
                .map(|t| mortality / t.reference)
                .collect(),
        ),
    })
}

fn calibrate_reference(
    r: &CellState,
    alphas: &Alphas,
    mode: CalibrationMode,
    fishers: f64,
    cots_destruction: f64,
) -> Result<LVParams> {
    use TrophicGroup::*;
    let alpha = alphas.as_array();
    let gamma = [
        0.0,
        0.0,
        alphas.herbivores,
        alphas.corallivores,
        alphas.carnivores,
    ];
    let fished = fishers > 0.0;

    let mut p = LVParams {
        alpha,
        gamma,
        cots_destruction,
        ..Default::default()
    };

    let (b, _) = partition(
        Coral,
        alphas.coral,
        0.0,
        &[
            term("turf", r.turf()),
            term("corallivores", r.corallivores()),
        ],
        &[],
        mode,
    )?;
    p.coral_by_turf = b[0];
    p.coral_by_corallivores = b[1];

    let (b, _) = partition(
        Turf,
        alphas.turf,
        0.0,
        &[term("herbivores", r.herbivores()), term("coral", r.coral())],
        &[],
        mode,
    )?;
    p.turf_by_herbivores = b[0];
    p.turf_by_coral = b[1];

    let mut inh = vec![term("carnivores", r.carnivores())];
    if fished {
        inh.push(term("fishers", fishers));
    }
    let (b, d) = partition(
        Herbivore,
        alphas.herbivores,
        gamma[2],
        &inh,
        &[term("turf", r.turf())],
        mode,
    )?;
    p.herbivores_by_carnivores = b[0];
    p.herbivores_by_fishers = if fished { b[1] } else { 0.0 };
    p.herbivores_by_turf = d[0];

    let (b, d) = partition(
        Corallivore,
        alphas.corallivores,
        gamma[3],
        &[term("carnivores", r.carnivores())],
        &[term("coral", r.coral())],
        mode,
    )?;
    p.corallivores_by_carnivores = b[0];
    p.corallivores_by_coral = d[0];

    let inh: Vec<Term> = if fished {
        vec![term("fishers", fishers)]
    } else {
        vec![]
    };
    let (b, d) = partition(
        Carnivore,
        alphas.carnivores,
        gamma[4],
        &inh,
        &[term(
            "herbivores+corallivores",
            r.herbivores() + r.corallivores(),
        )],
        mode,
    )?;
    p.carnivores_by_fishers = if fished { b[0] } else { 0.0 };
    p.carnivores_by_prey = d[0];

    Ok(p)
}

impl LVParams {
    /// Table defaults calibrated against an explicit reference state.
    pub fn calibrated_for(
        reference: &CellState,
        mode: CalibrationMode,
        fishers: f64,
    ) -> Result<LVParams> {
        calibrate_reference(
            reference,
            &Alphas::default(),
            mode,
            fishers,
            DEFAULT_COTS_DESTRUCTION,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecology::{lv_derivative, Forcing};
    use crate::world::testing::from_ascii;

    fn reference() -> CellState {
        CellState::new(0.26, 0.20, 305.0, 25.3, 78.5)
    }

    #[test]
    fn mean_fishers_per_cell_matches_reported_ratio() {
        let n0: f64 = 2244.0 / 5320.0;
        assert!((n0 - 0.42).abs() < 0.005);
        let p = LVParams::calibrated_for(&reference(), CalibrationMode::PaperLiteral, n0).unwrap();
        // 9.4e-4 / 0.42 ~ 2.24e-3
        assert!((p.herbivores_by_fishers - 2.24e-3).abs() / 2.24e-3 < 0.01);
        assert_eq!(p.herbivores_by_fishers, 9.4e-4 / n0);
        assert_eq!(p.carnivores_by_fishers, 4.4e-4 / n0);
    }

    #[test]
    fn default_cots_coefficient() {
        let p = LVParams::calibrated_for(&reference(), CalibrationMode::BalancedPartition, 0.0)
            .unwrap();
        assert_eq!(p.cots_destruction, 9.2e-4);
    }

    #[test]
    fn mortality_equals_growth_for_fish() {
        let p = LVParams::calibrated_for(&reference(), CalibrationMode::BalancedPartition, 0.4)
            .unwrap();
        for g in TrophicGroup::FISH {
            assert_eq!(p.alpha(g), p.gamma(g));
        }
        assert_eq!(p.gamma(TrophicGroup::Coral), 0.0);
        assert_eq!(p.gamma(TrophicGroup::Turf), 0.0);
    }

    #[test]
    fn balanced_reference_is_fixed_point_without_fishers() {
        let p = LVParams::calibrated_for(&reference(), CalibrationMode::BalancedPartition, 0.0)
            .unwrap();
        let r = lv_derivative(&reference(), &p, &Forcing::default());
        for g in TrophicGroup::ALL {
            let scale = reference()[g] * p.alpha(g);
            assert!(r[g].abs() <= 1e-15 * scale.max(1e-300), "{g:?}: {}", r[g]);
        }
    }

    #[test]
    fn balanced_reference_is_fixed_point_with_mean_fishers() {
        let n0 = 0.42;
        let p =
            LVParams::calibrated_for(&reference(), CalibrationMode::BalancedPartition, n0).unwrap();
        // with the fisher term evaluated at its mean the balance still holds
        let herb_rate = p.alpha[2]
            - p.gamma[2]
            - p.herbivores_by_carnivores * 78.5
            - p.herbivores_by_fishers * n0
            + p.herbivores_by_turf * 0.20;
        assert!(herb_rate.abs() < 1e-18);
        let carn_rate = p.alpha[4] - p.gamma[4] - p.carnivores_by_fishers * n0
            + p.carnivores_by_prey * (305.0 + 25.3);
        assert!(carn_rate.abs() < 1e-18);
    }

    #[test]
    fn paper_literal_does_not_balance_multi_term_equations() {
        let p = LVParams::calibrated_for(&reference(), CalibrationMode::PaperLiteral, 0.0).unwrap();
        let r = lv_derivative(&reference(), &p, &Forcing::default());
        // coral: alpha - alpha - alpha = -alpha
        assert!((r.coral() - 0.26 * -3.0e-5).abs() < 1e-18);
        assert!(r.turf() < 0.0);
    }

    #[test]
    fn zero_reference_is_rejected_with_term() {
        let mut st = reference();
        st[TrophicGroup::Corallivore] = 0.0;
        let err =
            LVParams::calibrated_for(&st, CalibrationMode::BalancedPartition, 0.0).unwrap_err();
        match err {
            Error::Calibration { group, term, .. } => {
                assert_eq!(group, "coral");
                assert_eq!(term, "corallivores");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn global_mean_uses_fishable_cells() {
        let w = from_ascii("#..\n#..", reference());
        let c = calibrate(
            &w,
            &Alphas::default(),
            CalibrationMode::BalancedPartition,
            CalibrationScope::GlobalMean,
            0.0,
            DEFAULT_COTS_DESTRUCTION,
        )
        .unwrap();
        let p = c.global().unwrap();
        assert_eq!(p.coral_by_turf, 3.0e-5 / (2.0 * 0.20));
        assert_eq!(p.turf_by_herbivores, 1.0e-2 / (2.0 * 305.0));
    }

    #[test]
    fn per_cell_scope_gives_one_set_per_cell() {
        let w = from_ascii("#..\n#..", reference());
        let c = calibrate(
            &w,
            &Alphas::default(),
            CalibrationMode::BalancedPartition,
            CalibrationScope::PerCell,
            0.0,
            DEFAULT_COTS_DESTRUCTION,
        )
        .unwrap();
        match &c {
            Calibration::PerCell(v) => assert_eq!(v.len(), 6),
            _ => panic!(),
        }
        assert_eq!(c.params(1), c.params(2));
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        let w = from_ascii("..", reference());
        let a = Alphas {
            turf: 0.0,
            ..Default::default()
        };
        assert!(calibrate(
            &w,
            &a,
            CalibrationMode::BalancedPartition,
            CalibrationScope::GlobalMean,
            0.0,
            9.2e-4
        )
        .is_err());
    }
}
