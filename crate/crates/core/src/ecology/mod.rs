//! Generalised Lotka-Volterra dynamics of the reef food web, per cell.
//!
//! Coral and turf are benthic covers (surface fractions); herbivores,
//! corallivores and carnivores are fish biomasses in kg per cell.

mod calibrate;
mod params_io;
mod spillover;

pub use calibrate::{calibrate, Alphas, Calibration, CalibrationMode, CalibrationScope};
pub use params_io::{dump_params, parse_params};
pub(crate) use spillover::spillover_with;
pub use spillover::{apply_spillover, SpilloverReport};

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::world::{Cell, HabitatClass};

/// Cover lost per day to the crown-of-thorns / cyclone disturbance.
pub const DEFAULT_COTS_DESTRUCTION: f64 = 9.2e-4;
pub const DEFAULT_SPILLOVER_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrophicGroup {
    Coral,
    Turf,
    Herbivore,
    Corallivore,
    Carnivore,
}

impl TrophicGroup {
    pub const ALL: [TrophicGroup; 5] = [
        TrophicGroup::Coral,
        TrophicGroup::Turf,
        TrophicGroup::Herbivore,
        TrophicGroup::Corallivore,
        TrophicGroup::Carnivore,
    ];
    pub const FISH: [TrophicGroup; 3] = [
        TrophicGroup::Herbivore,
        TrophicGroup::Corallivore,
        TrophicGroup::Carnivore,
    ];

    pub fn is_benthic(self) -> bool {
        matches!(self, TrophicGroup::Coral | TrophicGroup::Turf)
    }

    pub fn fish_index(self) -> Option<usize> {
        match self {
            TrophicGroup::Herbivore => Some(0),
            TrophicGroup::Corallivore => Some(1),
            TrophicGroup::Carnivore => Some(2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrophicGroup::Coral => "coral",
            TrophicGroup::Turf => "turf",
            TrophicGroup::Herbivore => "herbivores",
            TrophicGroup::Corallivore => "corallivores",
            TrophicGroup::Carnivore => "carnivores",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// The five dynamic variables of one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellState(pub [f64; 5]);

impl CellState {
    pub fn new(coral: f64, turf: f64, herbivores: f64, corallivores: f64, carnivores: f64) -> Self {
        CellState([coral, turf, herbivores, corallivores, carnivores])
    }

    pub fn coral(&self) -> f64 {
        self.0[0]
    }
    pub fn turf(&self) -> f64 {
        self.0[1]
    }
    pub fn herbivores(&self) -> f64 {
        self.0[2]
    }
    pub fn corallivores(&self) -> f64 {
        self.0[3]
    }
    pub fn carnivores(&self) -> f64 {
        self.0[4]
    }
}

impl Index<TrophicGroup> for CellState {
    type Output = f64;
    fn index(&self, g: TrophicGroup) -> &f64 {
        &self.0[g.slot()]
    }
}

impl IndexMut<TrophicGroup> for CellState {
    fn index_mut(&mut self, g: TrophicGroup) -> &mut f64 {
        &mut self.0[g.slot()]
    }
}

/// Interaction coefficients. Every value is nonnegative; the sign of each
/// term is fixed by the equations in [`lv_derivative`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LVParams {
    /// Intrinsic growth rate per group, day⁻¹.
    pub alpha: [f64; 5],
    /// Intrinsic mortality per group, day⁻¹ (zero for coral and turf).
    pub gamma: [f64; 5],
    /// Coral inhibited by turf.
    pub coral_by_turf: f64,
    /// Coral inhibited by corallivores.
    pub coral_by_corallivores: f64,
    /// Turf inhibited by herbivores (grazing).
    pub turf_by_herbivores: f64,
    /// Turf inhibited by coral (space competition).
    pub turf_by_coral: f64,
    /// Herbivores inhibited by carnivores.
    pub herbivores_by_carnivores: f64,
    /// Corallivores inhibited by carnivores.
    pub corallivores_by_carnivores: f64,
    /// Herbivores facilitated by turf.
    pub herbivores_by_turf: f64,
    /// Corallivores facilitated by coral.
    pub corallivores_by_coral: f64,
    /// Carnivores facilitated by herbivores + corallivores.
    pub carnivores_by_prey: f64,
    /// Fishing mortality per fisher present, for herbivores and carnivores.
    pub herbivores_by_fishers: f64,
    pub carnivores_by_fishers: f64,
    /// Extra coral mortality while the disturbance is active.
    pub cots_destruction: f64,
}

impl LVParams {
    pub fn alpha(&self, g: TrophicGroup) -> f64 {
        self.alpha[g.slot()]
    }
    pub fn gamma(&self, g: TrophicGroup) -> f64 {
        self.gamma[g.slot()]
    }
}

/// How fishing mortality enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FishingMortalityMode {
    /// Only the biomass removed by individual catches.
    #[default]
    DiscreteCapture,
    /// Only the `beta_fisher * n_fishers` term of the equations.
    LvTerm,
    Both,
}

impl FishingMortalityMode {
    pub fn uses_lv_term(self) -> bool {
        matches!(
            self,
            FishingMortalityMode::LvTerm | FishingMortalityMode::Both
        )
    }
    pub fn uses_capture(self) -> bool {
        matches!(
            self,
            FishingMortalityMode::DiscreteCapture | FishingMortalityMode::Both
        )
    }
}

/// External drivers of one cell during one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Forcing {
    pub fishers_in_cell: u32,
    pub cots_active: bool,
    /// Whether the fisher term of the equations is applied.
    pub fisher_term: bool,
}

/// Rates of change per day for every group.
pub fn lv_derivative(s: &CellState, p: &LVParams, f: &Forcing) -> CellState {
    debug_assert!(s.0.iter().all(|&v| v >= 0.0), "negative state {s:?}");
    use TrophicGroup::*;
    let (c, t, h, co, pr) = (
        s.coral(),
        s.turf(),
        s.herbivores(),
        s.corallivores(),
        s.carnivores(),
    );
    let cots = if f.cots_active {
        p.cots_destruction
    } else {
        0.0
    };
    let fishers = if f.fisher_term {
        f64::from(f.fishers_in_cell)
    } else {
        0.0
    };

    let dc = c * (p.alpha(Coral) - p.coral_by_turf * t - p.coral_by_corallivores * co - cots);
    let dt = t * (p.alpha(Turf) - p.turf_by_herbivores * h - p.turf_by_coral * c);
    let dh = h
        * (p.alpha(Herbivore)
            - p.gamma(Herbivore)
            - p.herbivores_by_carnivores * pr
            - p.herbivores_by_fishers * fishers
            + p.herbivores_by_turf * t);
    let dco = co
        * (p.alpha(Corallivore) - p.gamma(Corallivore) - p.corallivores_by_carnivores * pr
            + p.corallivores_by_coral * c);
    let dp = pr
        * (p.alpha(Carnivore) - p.gamma(Carnivore) - p.carnivores_by_fishers * fishers
            + p.carnivores_by_prey * (h + co));
    CellState([dc, dt, dh, dco, dp])
}

/// One explicit Euler step of `dt_days`, followed by the substrate and
/// carrying-capacity clamps.
pub fn step_cell(cell: &mut Cell, p: &LVParams, dt_days: f64, f: &Forcing) {
    debug_assert!(dt_days > 0.0);
    let rates = lv_derivative(&cell.state, p, f);
    for g in TrophicGroup::ALL {
        let v = cell.state[g] + dt_days * rates[g];
        cell.state[g] = v.max(0.0);
    }
    clamp_substrate(cell);
    for (i, g) in TrophicGroup::FISH.into_iter().enumerate() {
        cell.state[g] = cell.state[g].min(cell.carrying_capacity[i]);
    }
}

/// Enforces coral + turf <= cap; coral keeps its cover first.
pub fn clamp_substrate(cell: &mut Cell) {
    let cap = cell.substrate_cap;
    let s = &mut cell.state;
    if s.coral() + s.turf() > cap {
        if s.coral() >= cap {
            s[TrophicGroup::Coral] = cap;
            s[TrophicGroup::Turf] = 0.0;
        } else {
            let mut turf = cap - s.coral();
            // the subtraction can round up by an ulp
            while s.coral() + turf > cap {
                turf = turf.next_down();
            }
            s[TrophicGroup::Turf] = turf.max(0.0);
        }
    }
}

/// Window during which the outer-slope coral suffers the extra mortality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSchedule {
    pub enabled: bool,
    pub start_day: f64,
    pub duration_days: f64,
}

impl Default for DisturbanceSchedule {
    fn default() -> Self {
        DisturbanceSchedule {
            enabled: false,
            start_day: 730.0,
            duration_days: 1825.0,
        }
    }
}

impl DisturbanceSchedule {
    pub const AFFECTED: HabitatClass = HabitatClass::OuterSlope;

    pub fn on() -> Self {
        DisturbanceSchedule {
            enabled: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.start_day >= 0.0) {
            return Err(crate::Error::param("disturbance start_day", "must be >= 0"));
        }
        if !(self.duration_days > 0.0) {
            return Err(crate::Error::param(
                "disturbance duration_days",
                "must be > 0",
            ));
        }
        Ok(())
    }

    /// Active for ticks in `[2 * start_day, 2 * (start_day + duration_days))`.
    pub fn active_at_tick(&self, tick: u64, ticks_per_day: u64) -> bool {
        if !self.enabled {
            return false;
        }
        let t = tick as f64;
        let tpd = ticks_per_day as f64;
        t >= tpd * self.start_day && t < tpd * (self.start_day + self.duration_days)
    }

    pub fn is_active(&self, tick: u64, ticks_per_day: u64, habitat: HabitatClass) -> bool {
        habitat == Self::AFFECTED && self.active_at_tick(tick, ticks_per_day)
    }
}
