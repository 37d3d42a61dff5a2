//! Fishers: population, trip decisions, cell choice, capture and conflicts.

mod population;

pub(crate) use population::write_rows;

pub use population::{
    default_fisher_count, generate_population, load_population, save_population, DistrictRow,
    DistrictTable, Household, Population, DEFAULT_FISHER_DENSITY, PRO_SHARE,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ecology::TrophicGroup;
use crate::world::{Cell, WorldGrid};

pub const DEFAULT_SURVEILLANCE: f64 = 0.2;
/// Capture rate per hour of fishing on day ticks; doubled at night.
pub const DEFAULT_CAPTURE_RATE: f64 = 0.002;
pub const NIGHT_CAPTURE_FACTOR: f64 = 2.0;
pub const FISHER_CRITERION_FREE: f64 = 0.4;
pub const FISHER_CRITERION_OCCUPIED: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherKind {
    Pro,
    Annex,
}

impl FisherKind {
    pub fn trip_duration_h(self) -> f64 {
        match self {
            FisherKind::Pro => 8.0,
            FisherKind::Annex => 4.0,
        }
    }

    /// Range of the per-day trip probability.
    pub fn trip_probability_range(self) -> (f64, f64) {
        match self {
            FisherKind::Pro => (2.0 / 7.0, 5.0 / 7.0),
            FisherKind::Annex => (1.0 / 7.0, 3.0 / 7.0),
        }
    }
}

/// Half-day tick kind, also a fisher's preferred fishing period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Day,
    Night,
}

/// Probability that a new fisher works at night.
pub const NIGHT_SHARE: f64 = 0.7;

/// Fishing radius from household equipment.
pub fn radius_for_equipment(has_boat: bool, has_pirogue: bool) -> f64 {
    if has_boat {
        10_000.0
    } else if has_pirogue {
        3_000.0
    } else {
        1_000.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fisher {
    pub id: usize,
    pub household: usize,
    pub district: i32,
    pub kind: FisherKind,
    pub departure_cell: usize,
    /// Radius given by equipment, before any scenario multiplier.
    pub base_radius_m: f64,
    pub fishing_radius_m: f64,
    pub trip_probability: f64,
    pub trip_duration_h: f64,
    pub selectivity: f64,
    pub period: Period,
    pub resource_dependence: f64,
}

/// Goes fishing this tick? Draws only on ticks matching the fisher's period.
pub fn decide_trip<R: Rng>(fisher: &Fisher, tick: Period, rng: &mut R) -> bool {
    fisher.period == tick && rng.gen::<f64>() < fisher.trip_probability
}

/// Probability that MPA cells are admitted to this trip's candidate set.
pub fn poaching_probability(fisher: &Fisher, tick: Period, surveillance: f64) -> f64 {
    match tick {
        Period::Night => 1.0 / (1.0 + surveillance),
        Period::Day => fisher.resource_dependence / (1.0 + surveillance),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerMaxima {
    pub preference: f64,
    /// Largest herbivore + carnivore biomass of a fishable cell.
    pub biomass: f64,
    pub tourism: f64,
}

impl LayerMaxima {
    pub fn of(world: &WorldGrid) -> Self {
        let mut m = LayerMaxima::default();
        for c in world.cells.iter().filter(|c| c.habitat.is_fishable()) {
            m.preference = m.preference.max(c.preference);
            m.biomass = m.biomass.max(c.catchable_biomass());
            m.tourism = m.tourism.max(c.tourism);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub preference: f64,
    pub biomass: f64,
    pub tourism: f64,
    pub distance: f64,
    pub fisher: f64,
}

impl ScoreBreakdown {
    pub fn total(&self) -> f64 {
        self.preference + self.biomass + self.tourism + self.distance + self.fisher
    }
}

/// `log2(value / max + 1)`, with the ratio held in [0, 1]. `None` when the
/// maximum is zero.
fn log_criterion(value: f64, max: f64) -> Option<f64> {
    (max > 0.0).then(|| ((value / max).clamp(0.0, 1.0) + 1.0).log2())
}

pub fn score_cell(
    cell: &Cell,
    dist_m: f64,
    radius_m: f64,
    maxima: &LayerMaxima,
    occupied: bool,
    tick: Period,
) -> ScoreBreakdown {
    let tourism = match tick {
        Period::Night => 1.0,
        Period::Day => 1.0 - log_criterion(cell.tourism, maxima.tourism).unwrap_or(0.0),
    };
    ScoreBreakdown {
        preference: log_criterion(cell.preference, maxima.preference).unwrap_or(0.0),
        biomass: log_criterion(cell.catchable_biomass(), maxima.biomass).unwrap_or(0.0),
        tourism,
        distance: distance_criterion(dist_m, radius_m),
        fisher: if occupied {
            FISHER_CRITERION_OCCUPIED
        } else {
            FISHER_CRITERION_FREE
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiceRule {
    #[default]
    Roulette,
    Argmax,
}

/// Index into `weights` drawn with probability proportional to the weight.
pub fn roulette<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Some(i);
        }
    }
    // rounding left target at the very top: last positive weight
    weights.iter().rposition(|&w| w > 0.0)
}

/// Index of the largest weight, ties broken uniformly at random.
pub fn argmax<R: Rng>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let best = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] == best).collect();
    match ties.len() {
        0 => None,
        1 => Some(ties[0]),
        n => Some(ties[rng.gen_range(0..n)]),
    }
}

/// Where a fisher ends up after arriving at `chosen`: a free fishable
/// neighbour if the cell is taken, else any allowed neighbour, else stay.
/// `allowed` restricts moves (the trip's candidate set).
pub fn relocate<R: Rng>(
    world: &WorldGrid,
    chosen: usize,
    occupancy: &[u32],
    allowed: impl Fn(usize) -> bool,
    rng: &mut R,
) -> (usize, bool) {
    if occupancy[chosen] == 0 {
        return (chosen, false);
    }
    let options: Vec<usize> = world
        .fishable_neighbors(chosen)
        .filter(|&j| allowed(j))
        .collect();
    let free: Vec<usize> = options
        .iter()
        .copied()
        .filter(|&j| occupancy[j] == 0)
        .collect();
    let pool = if free.is_empty() { &options } else { &free };
    if pool.is_empty() {
        return (chosen, false);
    }
    (pool[rng.gen_range(0..pool.len())], true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    /// Cell drawn from the candidates, before relocation.
    pub drawn: usize,
    pub cell: usize,
    pub relocated: bool,
}

/// Draws a fishing cell from `candidates` (cell, path distance) and applies
/// relocation. `None` when there is no candidate.
#[allow(clippy::too_many_arguments)]
pub fn choose_fishing_cell<R: Rng>(
    fisher: &Fisher,
    world: &WorldGrid,
    candidates: &[(usize, f64)],
    occupancy: &[u32],
    maxima: &LayerMaxima,
    rule: ChoiceRule,
    tick: Period,
    rng: &mut R,
) -> Option<Choice> {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&(i, d)| {
            score_cell(
                &world.cells[i],
                d,
                fisher.fishing_radius_m,
                maxima,
                occupancy[i] > 0,
                tick,
            )
            .total()
        })
        .collect();
    choose_from_scores(world, candidates, &scores, occupancy, rule, rng)
}

/// Draws a cell from precomputed scores, then applies the crowding move.
pub fn choose_from_scores<R: Rng>(
    world: &WorldGrid,
    candidates: &[(usize, f64)],
    scores: &[f64],
    occupancy: &[u32],
    rule: ChoiceRule,
    rng: &mut R,
) -> Option<Choice> {
    debug_assert_eq!(candidates.len(), scores.len());
    let k = match rule {
        ChoiceRule::Roulette => roulette(scores, rng)?,
        ChoiceRule::Argmax => argmax(scores, rng)?,
    };
    let drawn = candidates[k].0;
    let allowed = |j: usize| candidates.binary_search_by_key(&j, |c| c.0).is_ok();
    let (cell, relocated) = relocate(world, drawn, occupancy, allowed, rng);
    Some(Choice {
        drawn,
        cell,
        relocated,
    })
}

/// Distance criterion of a cell `dist_m` away from the departure point.
pub fn distance_criterion(dist_m: f64, radius_m: f64) -> f64 {
    1.0 - log_criterion(dist_m, radius_m).unwrap_or(0.0)
}

/// Per-cell criteria held for one fisher phase, so scoring a candidate
/// costs no logarithm. Only the biomass term moves within a phase, and
/// only where a catch was taken; [`ScoreCache::refresh`] recomputes it.
/// Scores equal [`score_cell`] totals bit for bit.
#[derive(Debug, Clone)]
pub struct ScoreCache {
    maxima: LayerMaxima,
    preference: Vec<f64>,
    biomass: Vec<f64>,
    tourism_day: Vec<f64>,
}

impl ScoreCache {
    pub fn new(world: &WorldGrid) -> Self {
        let maxima = LayerMaxima::of(world);
        let per_cell = |f: &dyn Fn(&Cell) -> f64| world.cells.iter().map(f).collect::<Vec<f64>>();
        ScoreCache {
            preference: per_cell(&|c| {
                log_criterion(c.preference, maxima.preference).unwrap_or(0.0)
            }),
            biomass: per_cell(&|c| {
                log_criterion(c.catchable_biomass(), maxima.biomass).unwrap_or(0.0)
            }),
            tourism_day: per_cell(&|c| {
                1.0 - log_criterion(c.tourism, maxima.tourism).unwrap_or(0.0)
            }),
            maxima,
        }
    }

    pub fn maxima(&self) -> &LayerMaxima {
        &self.maxima
    }

    pub fn refresh(&mut self, world: &WorldGrid, cell: usize) {
        self.biomass[cell] =
            log_criterion(world.cells[cell].catchable_biomass(), self.maxima.biomass)
                .unwrap_or(0.0);
    }

    /// Total score of `cell`, given its distance criterion.
    pub fn score(&self, cell: usize, distance: f64, occupied: bool, tick: Period) -> f64 {
        let tourism = match tick {
            Period::Night => 1.0,
            Period::Day => self.tourism_day[cell],
        };
        let fisher = if occupied {
            FISHER_CRITERION_OCCUPIED
        } else {
            FISHER_CRITERION_FREE
        };
        self.preference[cell] + self.biomass[cell] + tourism + distance + fisher
    }
}

/// Biomass a trip would take from `cell` (kg): the capture formula, held
/// to the stock of herbivores + carnivores and to the quota.
pub fn catch_amount(
    fisher: &Fisher,
    cell: &Cell,
    tick: Period,
    capture_rate: f64,
    quota_kg: Option<f64>,
) -> f64 {
    let available = cell.catchable_biomass();
    if !(available > 0.0) {
        return 0.0;
    }
    let rate = match tick {
        Period::Day => capture_rate,
        Period::Night => NIGHT_CAPTURE_FACTOR * capture_rate,
    };
    let raw = available * fisher.trip_duration_h * (1.0 - fisher.selectivity) * rate;
    let catch = raw.min(available);
    quota_kg.map_or(catch, |q| catch.min(q))
}

/// Takes `amount` kg from herbivores and carnivores, pro rata to their
/// biomass. Corallivores are never touched.
pub fn remove_catch(cell: &mut Cell, amount: f64) {
    let h = cell.state.herbivores();
    let p = cell.state.carnivores();
    let available = h + p;
    if !(available > 0.0) || amount <= 0.0 {
        return;
    }
    let take_h = amount * h / available;
    let take_p = amount - take_h;
    cell.state[TrophicGroup::Herbivore] = (h - take_h).max(0.0);
    cell.state[TrophicGroup::Carnivore] = (p - take_p).max(0.0);
}

/// One trip's capture: removes the catch from the cell and returns it (kg).
pub fn fish(
    fisher: &Fisher,
    cell: &mut Cell,
    tick: Period,
    capture_rate: f64,
    quota_kg: Option<f64>,
) -> f64 {
    let catch = catch_amount(fisher, cell, tick, capture_rate, quota_kg);
    remove_catch(cell, catch);
    catch
}

/// (fisher conflict, tourism conflict) at arrival, before relocation.
pub fn record_conflicts(
    occupancy_at_arrival: u32,
    tourism: f64,
    tick: Period,
    tourism_threshold: f64,
) -> (u32, u32) {
    let fisher = u32::from(occupancy_at_arrival > 0);
    let tour = u32::from(tick == Period::Day && tourism > tourism_threshold);
    (fisher, tour)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripOutcome {
    pub fisher_id: usize,
    pub tick: u64,
    pub chosen_cell: usize,
    pub relocated: bool,
    pub catch_kg: f64,
    pub poached: bool,
    pub conflicts_fisher: u32,
    pub conflicts_tourism: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecology::CellState;
    use crate::world::testing::from_ascii;
    use crate::world::HabitatClass;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fisher() -> Fisher {
        Fisher {
            id: 0,
            household: 0,
            district: 0,
            kind: FisherKind::Pro,
            departure_cell: 0,
            base_radius_m: 1000.0,
            fishing_radius_m: 1000.0,
            trip_probability: 0.5,
            trip_duration_h: 8.0,
            selectivity: 0.5,
            period: Period::Day,
            resource_dependence: 0.6,
        }
    }

    fn lagoon_cell(h: f64, co: f64, p: f64) -> Cell {
        Cell::new(
            HabitatClass::Lagoon,
            false,
            0,
            CellState::new(0.2, 0.2, h, co, p),
            0.0,
            1.0,
            0.0,
        )
    }

    #[test]
    fn poaching_formulas() {
        let f = fisher();
        assert!((poaching_probability(&f, Period::Night, 0.2) - 1.0 / 1.2).abs() < 1e-12);
        assert!((poaching_probability(&f, Period::Day, 0.2) - 0.5).abs() < 1e-12);
        let f0 = Fisher {
            resource_dependence: 0.0,
            ..fisher()
        };
        assert_eq!(poaching_probability(&f0, Period::Day, 0.2), 0.0);
    }

    #[test]
    fn trip_gate_and_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = fisher();
        assert!((0..100).all(|_| !decide_trip(&f, Period::Night, &mut rng)));
        let sure = Fisher {
            trip_probability: 1.0,
            ..fisher()
        };
        assert!((0..100).all(|_| decide_trip(&sure, Period::Day, &mut rng)));
        let p = 0.4;
        let f = Fisher {
            trip_probability: p,
            ..fisher()
        };
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| decide_trip(&f, Period::Day, &mut rng))
            .count() as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn score_boundaries() {
        let maxima = LayerMaxima {
            preference: 1.0,
            biomass: 400.0,
            tourism: 3.2,
        };
        let mut c = lagoon_cell(300.0, 10.0, 100.0);
        c.tourism = 3.2;
        let s = score_cell(&c, 0.0, 1000.0, &maxima, false, Period::Day);
        assert!((s.preference - 1.0).abs() < 1e-12);
        assert!((s.biomass - 1.0).abs() < 1e-12);
        assert!(s.tourism.abs() < 1e-12);
        assert!((s.distance - 1.0).abs() < 1e-12);
        assert_eq!(s.fisher, 0.4);
        let s = score_cell(&c, 1000.0, 1000.0, &maxima, true, Period::Night);
        assert!(s.distance.abs() < 1e-12);
        assert_eq!(s.tourism, 1.0);
        assert_eq!(s.fisher, 0.2);
        let zero = LayerMaxima::default();
        let s = score_cell(&c, 0.0, 1000.0, &zero, false, Period::Day);
        assert_eq!((s.preference, s.biomass, s.tourism), (0.0, 0.0, 1.0));
    }

    #[test]
    fn catch_formula_and_quota() {
        let f = fisher();
        let mut c = lagoon_cell(300.0, 25.0, 100.0);
        let got = fish(&f, &mut c, Period::Day, 0.002, None);
        assert!((got - 3.2).abs() < 1e-12);
        assert!((c.state.herbivores() - (300.0 - 2.4)).abs() < 1e-12);
        assert!((c.state.carnivores() - (100.0 - 0.8)).abs() < 1e-12);
        assert_eq!(c.state.corallivores(), 25.0);

        let mut c = lagoon_cell(300.0, 25.0, 100.0);
        assert!((fish(&f, &mut c, Period::Night, 0.002, None) - 6.4).abs() < 1e-12);

        let mut c = lagoon_cell(300.0, 25.0, 100.0);
        let got = fish(&f, &mut c, Period::Night, 0.002, Some(5.0));
        assert_eq!(got, 5.0);
        assert!((c.state.herbivores() - (300.0 - 3.75)).abs() < 1e-12);
        assert!((c.state.carnivores() - (100.0 - 1.25)).abs() < 1e-12);
    }

    #[test]
    fn catch_never_exceeds_stock() {
        let f = Fisher {
            selectivity: 0.0,
            trip_duration_h: 1000.0,
            ..fisher()
        };
        let mut c = lagoon_cell(3.0, 1.0, 1.0);
        let got = fish(&f, &mut c, Period::Night, 0.002, None);
        assert_eq!(got, 4.0);
        assert_eq!(c.catchable_biomass(), 0.0);
        assert_eq!(c.state[TrophicGroup::Corallivore], 1.0);
    }

    #[test]
    fn conflict_rules() {
        assert_eq!(record_conflicts(0, 5.0, Period::Night, 0.0), (0, 0));
        assert_eq!(record_conflicts(2, 0.0, Period::Day, 0.0), (1, 0));
        assert_eq!(record_conflicts(0, 3.2, Period::Day, 0.0), (0, 1));
    }

    #[test]
    fn roulette_follows_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(roulette(&[2.5], &mut rng), Some(0));
        assert_eq!(roulette(&[], &mut rng), None);
        let n = 10_000;
        let first = (0..n)
            .filter(|_| roulette(&[3.0, 1.0], &mut rng) == Some(0))
            .count() as f64;
        // expected share 0.75, binomial standard error ~0.0043
        assert!((first / n as f64 - 0.75).abs() < 0.02, "{first}");
    }

    #[test]
    fn argmax_breaks_ties_randomly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(argmax(&[1.0, 3.0, 2.0], &mut rng), Some(1));
        let picks: std::collections::BTreeSet<_> = (0..200)
            .filter_map(|_| argmax(&[2.0, 1.0, 2.0], &mut rng))
            .collect();
        assert_eq!(picks.into_iter().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn relocation_prefers_free_neighbours() {
        let w = from_ascii("...\n...\n...", CellState::new(0.2, 0.2, 100.0, 10.0, 40.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut occ = vec![1u32; 9];
        occ[8] = 0;
        assert_eq!(relocate(&w, 4, &occ, |_| true, &mut rng), (8, true));
        let free = vec![0u32; 9];
        assert_eq!(relocate(&w, 4, &free, |_| true, &mut rng), (4, false));
        // all neighbours taken: any neighbour
        let full = vec![1u32; 9];
        let (cell, moved) = relocate(&w, 4, &full, |_| true, &mut rng);
        assert!(moved && cell != 4);
        // nowhere allowed: stay
        assert_eq!(relocate(&w, 4, &full, |_| false, &mut rng), (4, false));
    }

    #[test]
    fn single_candidate_is_always_chosen() {
        let w = from_ascii("...", CellState::new(0.2, 0.2, 100.0, 10.0, 40.0));
        let maxima = LayerMaxima::of(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = choose_fishing_cell(
                &fisher(),
                &w,
                &[(1, 100.0)],
                &[0, 0, 0],
                &maxima,
                ChoiceRule::Roulette,
                Period::Day,
                &mut rng,
            )
            .unwrap();
            assert_eq!(
                c,
                Choice {
                    drawn: 1,
                    cell: 1,
                    relocated: false
                }
            );
        }
        assert!(choose_fishing_cell(
            &fisher(),
            &w,
            &[],
            &[0; 3],
            &maxima,
            ChoiceRule::Roulette,
            Period::Day,
            &mut rng
        )
        .is_none());
    }

    proptest! {
        #[test]
        fn criteria_stay_in_unit_interval(
            pref in 0.0f64..10.0, pref_max in 0.0f64..10.0,
            h in 0.0f64..1000.0, p in 0.0f64..1000.0, bmax in 0.0f64..3000.0,
            tour in 0.0f64..20.0, tmax in 0.0f64..20.0,
            frac in 0.0f64..=1.0, radius in 1.0f64..20000.0,
            night in any::<bool>(), occupied in any::<bool>(),
        ) {
            let mut c = lagoon_cell(h, 0.0, p);
            c.preference = pref;
            c.tourism = tour;
            let maxima = LayerMaxima {
                preference: pref_max.max(pref),
                biomass: bmax.max(h + p),
                tourism: tmax.max(tour),
            };
            let tick = if night { Period::Night } else { Period::Day };
            let s = score_cell(&c, frac * radius, radius, &maxima, occupied, tick);
            for v in [s.preference, s.biomass, s.tourism, s.distance] {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn cached_scores_match_direct_scores() {
        let mut w = from_ascii(
            "#...\n#.ss\n#pss\n",
            CellState::new(0.2, 0.2, 40.0, 5.0, 20.0),
        );
        for (k, c) in w.cells.iter_mut().enumerate() {
            c.preference = (k % 5) as f64;
            c.tourism = (k % 3) as f64 * 2.5;
            c.state[TrophicGroup::Herbivore] += k as f64;
        }
        let mut cache = ScoreCache::new(&w);
        let target = w.index(1, 2);
        w.cells[target].state[TrophicGroup::Carnivore] = 3.0;
        cache.refresh(&w, target);
        let maxima = *cache.maxima();
        for i in w.fishable_indices() {
            for tick in [Period::Day, Period::Night] {
                for occupied in [false, true] {
                    let d = 37.0 * i as f64;
                    let direct =
                        score_cell(&w.cells[i], d, 1000.0, &maxima, occupied, tick).total();
                    let cached = cache.score(i, distance_criterion(d, 1000.0), occupied, tick);
                    assert_eq!(direct.to_bits(), cached.to_bits());
                }
            }
        }
    }
}
