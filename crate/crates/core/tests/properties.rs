use proptest::prelude::*;

use reefsim::agents::{generate_population, DistrictTable, Period, Population};
use reefsim::ecology::{
    apply_spillover, step_cell, CalibrationMode, CellState, DisturbanceSchedule, Forcing, LVParams,
    TrophicGroup,
};
use reefsim::engine::{run, Clock, RunOptions, RunResult, TICKS_PER_DAY};
use reefsim::metrics::compare;
use reefsim::scenario::{apply_scenario, RuntimeParams, ScenarioConfig, ScenarioName};
use reefsim::world::{generate_synthetic_island, Cell, HabitatClass, IslandSpec, WorldGrid};

const PRESETS: [ScenarioName; 6] = [
    ScenarioName::StatuQuo,
    ScenarioName::NoFishing,
    ScenarioName::NoPoaching,
    ScenarioName::Quota,
    ScenarioName::NightBan,
    ScenarioName::FinancialAid,
];

fn small_world() -> (WorldGrid, Population) {
    let w = generate_synthetic_island(&IslandSpec::square(50), 5).unwrap();
    let pop = generate_population(&w, &DistrictTable::synthetic(&w, 120, 5), 5).unwrap();
    (w, pop)
}

fn short(w: &WorldGrid, pop: &Population, name: ScenarioName, seed: u64, ticks: u64) -> RunResult {
    let opts = RunOptions {
        seed,
        horizon_ticks: ticks,
        log_trips: true,
        ..RunOptions::default()
    };
    run(w, pop, &ScenarioConfig::preset(name), &opts).unwrap()
}

proptest! {
    #[test]
    fn euler_step_respects_every_bound(
        state in (0.0f64..0.5, 0.0f64..0.5, 0.0f64..600.0, 0.0f64..60.0, 0.0f64..160.0),
        reference in (0.05f64..0.5, 0.05f64..0.5, 50.0f64..600.0, 5.0f64..60.0, 10.0f64..160.0),
        fishers in 0u32..6,
        cots in any::<bool>(),
        literal in any::<bool>(),
    ) {
        let r = CellState::new(reference.0, reference.1, reference.2, reference.3, reference.4);
        let mode = if literal { CalibrationMode::PaperLiteral } else { CalibrationMode::BalancedPartition };
        let p = LVParams::calibrated_for(&r, mode, 0.4).unwrap();
        let mut cell = Cell::new(HabitatClass::OuterSlope, false, 0, r, 0.0, 0.0, 0.0);
        cell.state = CellState::new(state.0.min(r.coral()), state.1, state.2, state.3, state.4);
        reefsim::ecology::clamp_substrate(&mut cell);
        for (k, g) in TrophicGroup::FISH.into_iter().enumerate() {
            cell.state[g] = cell.state[g].min(cell.carrying_capacity[k]);
        }
        let forcing = Forcing { fishers_in_cell: fishers, cots_active: cots, fisher_term: true };
        for _ in 0..50 {
            step_cell(&mut cell, &p, 0.5, &forcing);
            prop_assert!(cell.state.0.iter().all(|v| *v >= 0.0 && v.is_finite()));
            prop_assert!(cell.state.coral() + cell.state.turf() <= cell.substrate_cap);
            for (k, g) in TrophicGroup::FISH.into_iter().enumerate() {
                prop_assert!(cell.state[g] <= cell.carrying_capacity[k]);
            }
        }
    }

    #[test]
    fn spillover_conserves_fish(fill in proptest::collection::vec(0.0f64..1.0, 25), threshold in 0.1f64..1.0) {
        let cells = fill
            .iter()
            .map(|&f| {
                let mut c = Cell::new(
                    HabitatClass::Lagoon,
                    false,
                    0,
                    CellState::new(0.2, 0.2, 100.0, 10.0, 40.0),
                    0.0,
                    0.0,
                    0.0,
                );
                for (k, g) in TrophicGroup::FISH.into_iter().enumerate() {
                    c.state[g] = f * c.carrying_capacity[k];
                }
                c
            })
            .collect();
        let mut w = WorldGrid::new(5, 5, 100.0, cells).unwrap();
        let before = w.total_fish_biomass();
        apply_spillover(&mut w, threshold);
        let after = w.total_fish_biomass();
        prop_assert!((after - before).abs() <= 1e-9 * before.max(1.0));
        for c in &w.cells {
            for (k, g) in TrophicGroup::FISH.into_iter().enumerate() {
                prop_assert!(c.state[g] <= c.carrying_capacity[k] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn disturbance_window_is_half_open(start in 0u32..400, duration in 0u32..400, tick in 0u64..2000) {
        let d = DisturbanceSchedule { enabled: true, start_day: start as f64, duration_days: duration as f64 };
        let lo = TICKS_PER_DAY * start as u64;
        let hi = TICKS_PER_DAY * (start + duration) as u64;
        prop_assert_eq!(d.active_at_tick(tick, TICKS_PER_DAY), tick >= lo && tick < hi);
        let off = DisturbanceSchedule { enabled: false, ..d };
        prop_assert!(!off.active_at_tick(tick, TICKS_PER_DAY));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn scenarios_apply_idempotently(k in 0usize..6) {
        let (_, pop) = small_world();
        let c = ScenarioConfig::preset(PRESETS[k]);
        let params = RuntimeParams::default();
        let (p1, r1) = apply_scenario(&c, &pop, &params).unwrap();
        let (p2, r2) = apply_scenario(&c, &p1, &r1).unwrap();
        prop_assert_eq!(p1.fishers, p2.fishers);
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn runs_keep_their_accounts(seed in 0u64..1000, k in 0usize..6) {
        let (w, pop) = small_world();
        let name = PRESETS[k];
        let r = short(&w, &pop, name, seed, 24);
        prop_assert_eq!(r.timeseries.len(), 25);
        for row in &r.timeseries {
            let vals = [row.herbivores, row.corallivores, row.carnivores, row.lagoon_coral, row.slope_turf, row.catch_kg];
            prop_assert!(vals.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
        let by_cell = r.cells.total_catch();
        let by_tick: f64 = r.timeseries.iter().map(|t| t.catch_kg).sum();
        let by_trip: f64 = r.trips.iter().map(|t| t.catch_kg).sum();
        prop_assert_eq!(by_cell, by_tick);
        prop_assert_eq!(by_cell, by_trip);

        for t in &r.trips {
            let f = &pop.fishers[t.fisher_id];
            let period = Clock::kind(t.tick);
            // night-ban moves night fishers to day ticks
            if name != ScenarioName::NightBan {
                prop_assert_eq!(f.period, period);
            } else {
                prop_assert_eq!(period, Period::Day);
            }
            if name == ScenarioName::NoPoaching {
                prop_assert!(!t.poached);
            }
            if name == ScenarioName::Quota {
                prop_assert!(t.catch_kg <= 5.0);
            }
        }

        // a longer run with the same seed replays this one first
        let longer = short(&w, &pop, name, seed, 36);
        prop_assert_eq!(&longer.timeseries[..25], &r.timeseries[..]);
        for i in 0..w.len() {
            prop_assert!(longer.cells.catch_day[i] >= r.cells.catch_day[i]);
            prop_assert!(longer.cells.catch_night[i] >= r.cells.catch_night[i]);
            prop_assert!(longer.cells.conflicts_day[i] >= r.cells.conflicts_day[i]);
            prop_assert!(longer.cells.conflicts_night[i] >= r.cells.conflicts_night[i]);
        }

        let cmp = compare(&r, &r).unwrap();
        prop_assert!(cmp.ratios.biomass_variation == Some(1.0));
        for ras in &cmp.rasters {
            prop_assert!(ras.defined().all(|(_, v)| v == 1.0));
        }
    }
}
