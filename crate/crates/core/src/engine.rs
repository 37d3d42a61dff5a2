//! Simulation clock, tick protocol and run orchestration.
//!
//! Each tick runs: disturbance flags, ecology (data-parallel over cells),
//! spillover, the fisher phase (sequential, shuffled order), accounting.
//! One ChaCha stream seeded from the run seed feeds, in order: the fisher
//! shuffle, then per acting fisher the trip draw, poaching draw, cell draw
//! and relocation draw.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    catch_amount, choose_from_scores, decide_trip, distance_criterion, poaching_probability,
    record_conflicts, remove_catch, Period, Population, ScoreCache, TripOutcome,
};
use crate::ecology::{
    calibrate, spillover_with, step_cell, Alphas, Calibration, CalibrationMode, CalibrationScope,
    Forcing, LVParams, TrophicGroup, DEFAULT_COTS_DESTRUCTION,
};
use crate::error::{Error, Result};
use crate::metrics::{CellAccumulators, TimeSeriesRow};
use crate::par::{for_each_mut, Execution};
use crate::scenario::{apply_scenario, RuntimeParams, ScenarioConfig};
use crate::world::{DistanceCache, WorldGrid};

pub const TICKS_PER_DAY: u64 = 2;
pub const DAYS_PER_YEAR: u64 = 365;
pub const TICKS_PER_YEAR: u64 = TICKS_PER_DAY * DAYS_PER_YEAR;
pub const DT_DAYS: f64 = 0.5;
pub const DEFAULT_HORIZON_TICKS: u64 = 20 * TICKS_PER_YEAR;

/// Catches are held on a grid of 2^-24 kg so every catch total is exact
/// whatever the summation order.
const CATCH_QUANTUM: f64 = 1.0 / 16_777_216.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    pub tick: u64,
    pub horizon_ticks: u64,
}

impl Clock {
    pub fn new(horizon_ticks: u64) -> Self {
        Clock {
            tick: 0,
            horizon_ticks,
        }
    }

    /// Even ticks are day ticks.
    pub fn kind(tick: u64) -> Period {
        if tick.is_multiple_of(2) {
            Period::Day
        } else {
            Period::Night
        }
    }

    pub fn day(tick: u64) -> u64 {
        tick / TICKS_PER_DAY
    }

    pub fn years(horizon_ticks: u64) -> f64 {
        horizon_ticks as f64 / TICKS_PER_YEAR as f64
    }

    pub fn done(&self) -> bool {
        self.tick >= self.horizon_ticks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub seed: u64,
    pub horizon_ticks: u64,
    pub params: RuntimeParams,
    pub alphas: Alphas,
    pub calibration_mode: CalibrationMode,
    pub calibration_scope: CalibrationScope,
    pub cots_destruction: f64,
    /// Use these coefficients instead of calibrating.
    #[serde(skip)]
    pub lv_params: Option<LVParams>,
    #[serde(skip)]
    pub execution: Execution,
    /// Keep every trip outcome in the result.
    pub log_trips: bool,
    /// Record the phase order of every tick.
    pub trace: bool,
    /// Emit a progress line every this many ticks (0 = never).
    pub progress_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            horizon_ticks: DEFAULT_HORIZON_TICKS,
            params: RuntimeParams::default(),
            alphas: Alphas::default(),
            calibration_mode: CalibrationMode::default(),
            calibration_scope: CalibrationScope::default(),
            cots_destruction: DEFAULT_COTS_DESTRUCTION,
            lv_params: None,
            execution: Execution::default(),
            log_trips: false,
            trace: false,
            progress_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Disturbance,
    Ecology,
    Spillover,
    Fishers,
    Accounting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub horizon_ticks: u64,
    pub scenario: ScenarioConfig,
    /// Fishers present after the scenario was applied.
    pub n_fishers: usize,
    /// Coefficients used (global, or the first fishable cell's when
    /// calibrated per cell).
    pub lv_params: LVParams,
    pub timeseries: Vec<TimeSeriesRow>,
    pub cells: CellAccumulators,
    pub final_world: WorldGrid,
    pub trips: Vec<TripOutcome>,
    pub trace: Vec<(u64, Phase)>,
    /// Largest relative change of total fish biomass across one spillover
    /// pass.
    pub max_spillover_imbalance: f64,
}

impl RunResult {
    pub fn years(&self) -> f64 {
        Clock::years(self.horizon_ticks)
    }
}

/// Cells within reach of one (departure, radius) pair, with their
/// distance criteria.
struct Candidates {
    all: Vec<(usize, f64)>,
    all_distance: Vec<f64>,
    /// MPA cells removed.
    open: Vec<(usize, f64)>,
    open_distance: Vec<f64>,
}

fn check_cells(world: &WorldGrid, tick: u64) -> Result<()> {
    for (i, c) in world.cells.iter().enumerate() {
        let s = &c.state;
        if s.0.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invariant {
                tick,
                msg: format!("cell {i} has a negative or non-finite state {:?}", s.0),
            });
        }
        if s.coral() + s.turf() > c.substrate_cap {
            return Err(Error::Invariant {
                tick,
                msg: format!(
                    "cell {i} cover {} exceeds cap {}",
                    s.coral() + s.turf(),
                    c.substrate_cap
                ),
            });
        }
        for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
            if s[g] > c.carrying_capacity[slot] {
                return Err(Error::Invariant {
                    tick,
                    msg: format!("cell {i} {} above carrying capacity", g.name()),
                });
            }
        }
    }
    Ok(())
}

pub fn run(
    world: &WorldGrid,
    population: &Population,
    scenario: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    scenario.validate()?;
    let calibration = match &opts.lv_params {
        Some(p) => Calibration::Global(p.clone()),
        None => {
            // biology is calibrated on the generated population so every
            // scenario shares it
            let mean_fishers = population.len() as f64 / world.fishable_count() as f64;
            calibrate(
                world,
                &opts.alphas,
                opts.calibration_mode,
                opts.calibration_scope,
                mean_fishers,
                opts.cots_destruction,
            )?
        }
    };
    let (pop, params) = apply_scenario(scenario, population, &opts.params)?;
    let mut w = world.clone();
    let n = w.len();

    let mut cache = DistanceCache::new();
    let mut sets: HashMap<(usize, u64), Arc<Candidates>> = HashMap::new();
    let mut candidates = Vec::with_capacity(pop.fishers.len());
    for f in &pop.fishers {
        let key = (f.departure_cell, f.fishing_radius_m.to_bits());
        let set = match sets.get(&key) {
            Some(s) => Arc::clone(s),
            None => {
                let field = cache.get(&w, f.departure_cell)?;
                let all = field.fishable_within(&w, f.fishing_radius_m);
                let open: Vec<(usize, f64)> = all
                    .iter()
                    .copied()
                    .filter(|&(i, _)| !w.cells[i].mpa)
                    .collect();
                let crit = |v: &[(usize, f64)]| {
                    v.iter()
                        .map(|&(_, d)| distance_criterion(d, f.fishing_radius_m))
                        .collect::<Vec<f64>>()
                };
                let s = Arc::new(Candidates {
                    all_distance: crit(&all),
                    open_distance: crit(&open),
                    all,
                    open,
                });
                sets.insert(key, Arc::clone(&s));
                s
            }
        };
        candidates.push(set);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut acc = CellAccumulators::new(&w);
    let mut timeseries = Vec::with_capacity(opts.horizon_ticks as usize + 1);
    timeseries.push(TimeSeriesRow::snapshot(&w, 0));
    let mut trips = Vec::new();
    let mut trace = Vec::new();
    let mut occupancy = vec![0u32; n];
    let mut previous_occupancy = vec![0u32; n];
    let mut order: Vec<usize> = Vec::with_capacity(pop.fishers.len());
    let mut weights: Vec<f64> = Vec::new();
    let fisher_term = params.fishing_mortality.uses_lv_term();
    let capture = params.fishing_mortality.uses_capture();
    let mut max_imbalance: f64 = 0.0;
    let mut clock = Clock::new(opts.horizon_ticks);

    while !clock.done() {
        let tick = clock.tick;
        let kind = Clock::kind(tick);
        let mut note = |p: Phase| {
            if opts.trace {
                trace.push((tick, p));
            }
        };

        note(Phase::Disturbance);
        let disturbance = scenario.disturbance;
        let cots_on = disturbance.active_at_tick(tick, TICKS_PER_DAY);

        note(Phase::Ecology);
        {
            let cal = &calibration;
            let occ = &previous_occupancy;
            for_each_mut(opts.execution, &mut w.cells, |i, cell| {
                if !cell.habitat.is_fishable() {
                    return;
                }
                let forcing = Forcing {
                    fishers_in_cell: occ[i],
                    cots_active: cots_on
                        && cell.habitat == crate::ecology::DisturbanceSchedule::AFFECTED,
                    fisher_term,
                };
                step_cell(cell, cal.params(i), DT_DAYS, &forcing);
            });
        }

        note(Phase::Spillover);
        let before = w.total_fish_biomass();
        let spill = spillover_with(&mut w, params.spillover_threshold, opts.execution);
        let after = w.total_fish_biomass();
        if before > 0.0 {
            max_imbalance = max_imbalance.max((after - before).abs() / before);
        }

        note(Phase::Fishers);
        let mut scores = ScoreCache::new(&w);
        occupancy.iter_mut().for_each(|o| *o = 0);
        order.clear();
        order.extend(0..pop.fishers.len());
        order.shuffle(&mut rng);
        let mut tick_catch = 0.0;
        let mut tick_trips = 0u64;
        let mut tick_conflicts = 0u64;
        for &k in &order {
            let f = &pop.fishers[k];
            if !decide_trip(f, kind, &mut rng) {
                continue;
            }
            let p = params
                .poaching_override
                .unwrap_or_else(|| poaching_probability(f, kind, params.surveillance));
            let may_poach = rng.gen::<f64>() < p;
            let set = &candidates[k];
            let (cands, dist) = if may_poach {
                (&set.all, &set.all_distance)
            } else {
                (&set.open, &set.open_distance)
            };
            weights.clear();
            weights.extend(
                cands
                    .iter()
                    .zip(dist)
                    .map(|(&(i, _), &d)| scores.score(i, d, occupancy[i] > 0, kind)),
            );
            let Some(choice) = choose_from_scores(
                &w,
                cands,
                &weights,
                &occupancy,
                params.choice_rule,
                &mut rng,
            ) else {
                continue;
            };
            let (c_fisher, c_tourism) = record_conflicts(
                occupancy[choice.drawn],
                w.cells[choice.drawn].tourism,
                kind,
                params.tourism_threshold,
            );
            occupancy[choice.cell] += 1;
            let cell = &mut w.cells[choice.cell];
            let catch = if capture {
                let amount = catch_amount(f, cell, kind, params.capture_rate, params.quota_kg);
                let amount = (amount / CATCH_QUANTUM).floor() * CATCH_QUANTUM;
                remove_catch(cell, amount);
                scores.refresh(&w, choice.cell);
                amount
            } else {
                0.0
            };
            let conflicts = u64::from(c_fisher + c_tourism);
            acc.record(choice.cell, choice.drawn, kind, catch, conflicts);
            tick_catch += catch;
            tick_trips += 1;
            tick_conflicts += conflicts;
            if opts.log_trips {
                trips.push(TripOutcome {
                    fisher_id: f.id,
                    tick,
                    chosen_cell: choice.cell,
                    relocated: choice.relocated,
                    catch_kg: catch,
                    poached: w.cells[choice.cell].mpa,
                    conflicts_fisher: c_fisher,
                    conflicts_tourism: c_tourism,
                });
            }
        }

        note(Phase::Accounting);
        check_cells(&w, tick)?;
        let mut row = TimeSeriesRow::snapshot(&w, tick + 1);
        row.catch_kg = tick_catch;
        row.trips = tick_trips;
        match kind {
            Period::Day => row.conflicts_day = tick_conflicts,
            Period::Night => row.conflicts_night = tick_conflicts,
        }
        row.spillover_kg = spill.total_moved();
        timeseries.push(row);
        std::mem::swap(&mut occupancy, &mut previous_occupancy);

        clock.tick += 1;
        if opts.progress_every > 0 && clock.tick.is_multiple_of(opts.progress_every) {
            let last = timeseries.last().expect("row pushed");
            log::info!(
                "tick {}/{} (year {:.2}): herbivores {:.2} corallivores {:.2} carnivores {:.2} kg/cell, catch {:.2} kg",
                clock.tick,
                opts.horizon_ticks,
                Clock::years(clock.tick),
                last.herbivores,
                last.corallivores,
                last.carnivores,
                last.catch_kg
            );
        }
    }

    acc.finish(&w);
    let lv_params = match &calibration {
        Calibration::Global(p) => p.clone(),
        Calibration::PerCell(v) => v[w.fishable_indices()[0]].clone(),
    };
    Ok(RunResult {
        seed: opts.seed,
        horizon_ticks: opts.horizon_ticks,
        scenario: scenario.clone(),
        n_fishers: pop.fishers.len(),
        lv_params,
        timeseries,
        cells: acc,
        final_world: w,
        trips,
        trace,
        max_spillover_imbalance: max_imbalance,
    })
}

/// Runs base and variant from the same world, population and seed.
pub fn run_pair(
    world: &WorldGrid,
    population: &Population,
    base: &ScenarioConfig,
    variant: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<(RunResult, RunResult)> {
    if base.disturbance != variant.disturbance {
        return Err(Error::DisturbanceMismatch);
    }
    Ok((
        run(world, population, base, opts)?,
        run(world, population, variant, opts)?,
    ))
}
