use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use reefsim::agents::{generate_population, DistrictTable, Population};
use reefsim::engine::{run, RunOptions};
use reefsim::par::Execution;
use reefsim::scenario::{ScenarioConfig, ScenarioName};
use reefsim::world::{generate_synthetic_island, IslandSpec};

fn ecology_phase(c: &mut Criterion) {
    let mut group = c.benchmark_group("ecology_60_ticks");
    group.sample_size(10);
    for size in [60, 120] {
        let world = generate_synthetic_island(&IslandSpec::square(size), 1).unwrap();
        let scenario = ScenarioConfig::preset(ScenarioName::NoFishing);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let opts = RunOptions {
                horizon_ticks: 60,
                execution: exec,
                ..RunOptions::default()
            };
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), size),
                &world,
                |b, w| {
                    b.iter(|| run(black_box(w), &Population::empty(), &scenario, &opts).unwrap())
                },
            );
        }
    }
    group.finish();
}

fn full_tick(c: &mut Criterion) {
    let mut group = c.benchmark_group("statu_quo_60_ticks");
    group.sample_size(10);
    let world = generate_synthetic_island(&IslandSpec::default(), 1).unwrap();
    let pop = generate_population(&world, &DistrictTable::synthetic(&world, 350, 1), 1).unwrap();
    let scenario = ScenarioConfig::preset(ScenarioName::StatuQuo);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let opts = RunOptions {
            horizon_ticks: 60,
            execution: exec,
            ..RunOptions::default()
        };
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| run(black_box(&world), &pop, &scenario, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ecology_phase, full_tick);
criterion_main!(benches);
