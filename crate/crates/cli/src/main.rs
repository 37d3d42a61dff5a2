//! `reefsim` command-line front end.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::value::{Error as DeError, StrDeserializer};
use serde::de::{DeserializeOwned, IntoDeserializer};

use reefsim::config::RunConfig;
use reefsim::ecology::{calibrate, dump_params, Calibration};
use reefsim::engine::{run, run_pair, TICKS_PER_YEAR};
use reefsim::metrics::{
    compare, export_comparison, export_run, indicators, write_aggregate, Manifest,
};
use reefsim::par::Execution;
use reefsim::scenario::{ScenarioConfig, ScenarioName};
use reefsim::world::{save_world, IslandSpec};

#[derive(Parser)]
#[command(
    name = "reefsim",
    version,
    about = "Agent-based simulator of a coral-reef fishery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic island and write it as a map bundle.
    GenIsland(GenIslandArgs),
    /// Run one scenario (or a batch of seeds) and export the results.
    Simulate(SimulateArgs),
    /// Run a base and a variant scenario and export their ratios.
    Compare(CompareArgs),
    /// Print the calibrated interaction coefficients of a world.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct GenIslandArgs {
    /// Output bundle directory.
    #[arg(long)]
    out: PathBuf,
    /// Grid side in cells.
    #[arg(long, default_value_t = 60)]
    size: usize,
    /// Number of passes through the barrier reef.
    #[arg(long, default_value_t = 3)]
    passes: usize,
    /// Number of marine protected areas.
    #[arg(long, default_value_t = 8)]
    mpas: usize,
    /// Number of districts.
    #[arg(long, default_value_t = 8)]
    districts: usize,
    /// Cell side in metres.
    #[arg(long, default_value_t = 100.0)]
    cell_size: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// TOML island spec; the flags above override it.
    #[arg(long)]
    spec: Option<PathBuf>,
}

/// Run settings shared by `simulate`, `compare` and `calibrate`. Each flag
/// overrides the matching key of `--config`.
#[derive(Args, Clone)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Map bundle directory [default: synthetic 60x60 island].
    #[arg(long)]
    world: Option<PathBuf>,
    /// Directory with households.csv, fishers.csv and districts.csv.
    #[arg(long)]
    population: Option<PathBuf>,
    /// District table CSV used to generate the population.
    #[arg(long)]
    districts: Option<PathBuf>,
    /// Number of fishers of the synthetic population [default: 2244 per 5320 fishable cells].
    #[arg(long)]
    fishers: Option<u32>,
    /// Simulation seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Horizon in years [default: 20].
    #[arg(long, conflicts_with = "ticks")]
    years: Option<f64>,
    /// Horizon in half-day ticks [default: 14600].
    #[arg(long)]
    ticks: Option<u64>,
    /// balanced-partition or paper-literal [default: balanced-partition].
    #[arg(long, value_parser = kebab::<reefsim::ecology::CalibrationMode>)]
    calibration: Option<reefsim::ecology::CalibrationMode>,
    /// global-mean or per-cell [default: global-mean].
    #[arg(long, value_parser = kebab::<reefsim::ecology::CalibrationScope>)]
    calibration_scope: Option<reefsim::ecology::CalibrationScope>,
    /// discrete-capture, lv-term or both [default: discrete-capture].
    #[arg(long, value_parser = kebab::<reefsim::ecology::FishingMortalityMode>)]
    fishing_mortality: Option<reefsim::ecology::FishingMortalityMode>,
    /// roulette or argmax [default: roulette].
    #[arg(long, value_parser = kebab::<reefsim::agents::ChoiceRule>)]
    choice_rule: Option<reefsim::agents::ChoiceRule>,
    /// Surveillance level in the poaching formula [default: 0.2].
    #[arg(long)]
    surveillance: Option<f64>,
    /// Capture rate per fishing hour, doubled at night [default: 0.002].
    #[arg(long)]
    capture_rate: Option<f64>,
    /// Outer-slope disturbance: on or off [default: off].
    #[arg(long, value_parser = on_off)]
    disturbance: Option<bool>,
    /// First day of the disturbance [default: 730].
    #[arg(long)]
    disturbance_start: Option<f64>,
    /// Length of the disturbance in days [default: 1825].
    #[arg(long)]
    disturbance_days: Option<f64>,
    /// Quota in kg per trip for the quota scenario [default: 5].
    #[arg(long)]
    quota: Option<f64>,
    /// Extra radius share for the financial-aid scenario [default: 0.5].
    #[arg(long)]
    aid: Option<f64>,
    /// Log a progress line every N ticks to standard error [default: 0, never].
    #[arg(long)]
    progress: Option<u64>,
    /// Also write trips.csv with every trip.
    #[arg(long)]
    log_trips: bool,
    /// Run the ecology phase on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// statu-quo, no-fishing, no-poaching, quota, night-ban, financial-aid [default: statu-quo].
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<ScenarioName>,
    /// Custom scenario TOML (preset `base` plus overrides).
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Batch of seeds `a..b` (both included); one subdirectory per seed.
    #[arg(long, value_parser = parse_seeds, conflicts_with = "seed")]
    seeds: Option<(u64, u64)>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Baseline scenario.
    #[arg(long, value_parser = parse_scenario, default_value = "statu-quo")]
    base: ScenarioName,
    /// Scenario compared against the baseline.
    #[arg(long, value_parser = parse_scenario)]
    variant: ScenarioName,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Write the coefficients here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A bad command line discovered after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    let de: StrDeserializer<DeError> = s.into_deserializer();
    T::deserialize(de).map_err(|e| e.to_string())
}

fn on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

fn parse_scenario(s: &str) -> Result<ScenarioName, String> {
    s.parse().map_err(|e: reefsim::Error| e.to_string())
}

fn parse_seeds(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad seed `{b}`"))?;
    if b < a {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok((a, b))
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(w) = &self.world {
            c.world.bundle = Some(w.clone());
        }
        if let Some(p) = &self.population {
            c.population.dir = Some(p.clone());
        }
        if let Some(d) = &self.districts {
            c.population.districts = Some(d.clone());
        }
        if self.fishers.is_some() {
            c.population.fishers = self.fishers;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(y) = self.years {
            if !(y >= 0.0) {
                return Err(Usage(format!("--years {y} must be >= 0")).into());
            }
            c.horizon_ticks = (y * TICKS_PER_YEAR as f64).round() as u64;
        }
        if let Some(t) = self.ticks {
            c.horizon_ticks = t;
        }
        if let Some(m) = self.calibration {
            c.calibration_mode = m;
        }
        if let Some(s) = self.calibration_scope {
            c.calibration_scope = s;
        }
        if let Some(m) = self.fishing_mortality {
            c.params.fishing_mortality = m;
        }
        if let Some(r) = self.choice_rule {
            c.params.choice_rule = r;
        }
        if let Some(s) = self.surveillance {
            c.params.surveillance = s;
        }
        if let Some(r) = self.capture_rate {
            c.params.capture_rate = r;
        }
        if let Some(on) = self.disturbance {
            c.scenario.disturbance.enabled = on;
        }
        if let Some(d) = self.disturbance_start {
            c.scenario.disturbance.start_day = d;
        }
        if let Some(d) = self.disturbance_days {
            c.scenario.disturbance.duration_days = d;
        }
        if self.quota.is_some() {
            c.scenario.quota_kg_per_day = self.quota;
        }
        if self.aid.is_some() {
            c.scenario.financial_aid = self.aid;
        }
        if let Some(p) = self.progress {
            c.progress_every = p;
        }
        if self.log_trips {
            c.log_trips = true;
        }
        Ok(c)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn output_dir(flag: &Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| config.output.clone())
        .ok_or_else(|| {
            Usage("an output directory is required (--out or `output` in --config)".into()).into()
        })
}

fn cmd_gen_island(args: &GenIslandArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<IslandSpec>(&text)
                .map_err(|e| reefsim::Error::IslandSpec(format!("{}: {e}", path.display())))?
        }
        None => IslandSpec::default(),
    };
    spec.n_rows = args.size;
    spec.n_cols = args.size;
    spec.n_passes = args.passes;
    spec.n_mpas = args.mpas;
    spec.n_districts = args.districts;
    spec.cell_size_m = args.cell_size;
    let world = reefsim::world::generate_synthetic_island(&spec, args.seed)?;
    save_world(&world, &args.out)?;
    log::info!(
        "wrote {}x{} island ({} fishable cells, {} in MPAs) to {}",
        world.n_rows,
        world.n_cols,
        world.fishable_count(),
        world.mpa_count(),
        args.out.display()
    );
    Ok(())
}

fn scenario_source(args: &SimulateArgs, config: &mut RunConfig) {
    if let Some(name) = args.scenario {
        config.scenario.name = name;
    }
    if let Some(f) = &args.scenario_file {
        config.scenario.file = Some(f.clone());
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = args.run.resolve()?;
    scenario_source(args, &mut config);
    let out = output_dir(&args.out, &config)?;
    let scenario = config.scenario.resolve()?;
    let world = config.load_world()?;
    let population = config.load_population(&world)?;
    let exec = args.run.execution();

    let Some((first, last)) = args.seeds else {
        let result = run(&world, &population, &scenario, &config.run_options(exec))?;
        export_run(&result, &out, &manifest(&config))?;
        log::info!("wrote {}", out.display());
        return Ok(());
    };

    let one = |seed: u64| -> reefsim::Result<_> {
        let mut c = config.clone();
        c.seed = seed;
        let dir = out.join(format!("seed_{seed}"));
        let result = run(&world, &population, &scenario, &c.run_options(exec))?;
        export_run(&result, &dir, &manifest(&c))?;
        Ok(indicators(&result).global)
    };
    let seeds: Vec<u64> = (first..=last).collect();
    #[cfg(feature = "parallel")]
    let globals = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&s| one(s))
            .collect::<reefsim::Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let globals = seeds
        .iter()
        .map(|&s| one(s))
        .collect::<reefsim::Result<Vec<_>>>()?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_aggregate(&out.join("aggregate.csv"), &globals)?;
    log::info!("wrote {} runs to {}", globals.len(), out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let config = args.run.resolve()?;
    let out = output_dir(&args.out, &config)?;
    let scenario_of = |name: ScenarioName| -> reefsim::Result<ScenarioConfig> {
        let mut s = config.scenario.clone();
        s.name = name;
        s.file = None;
        s.resolve()
    };
    let base = scenario_of(args.base)?;
    let variant = scenario_of(args.variant)?;
    let world = config.load_world()?;
    let population = config.load_population(&world)?;
    let opts = config.run_options(args.run.execution());
    let (r0, r1) = run_pair(&world, &population, &base, &variant, &opts)?;
    let cmp = compare(&r0, &r1)?;
    export_comparison(&cmp, &r0, &r1, &out, &manifest(&config))?;
    for (name, v) in [
        ("biomass variation", cmp.ratios.biomass_variation),
        ("catch", cmp.ratios.catch),
        ("conflicts", cmp.ratios.conflicts),
    ] {
        if v.is_none() {
            eprintln!("note: {name} ratio is not applicable (baseline value is zero or missing)");
        }
    }
    Ok(())
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<()> {
    let config = args.run.resolve()?;
    let world = config.load_world()?;
    let population = config.load_population(&world)?;
    let mean_fishers = population.len() as f64 / world.fishable_count() as f64;
    let cal = calibrate(
        &world,
        &config.alphas,
        config.calibration_mode,
        config.calibration_scope,
        mean_fishers,
        config.cots_destruction,
    )?;
    let params = match &cal {
        Calibration::Global(p) => p.clone(),
        Calibration::PerCell(v) => v[world.fishable_indices()[0]].clone(),
    };
    let text = dump_params(&params);
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// The resolved config minus the output path, so a replay into another
/// directory writes an identical tree.
fn manifest(config: &RunConfig) -> Manifest {
    let mut c = config.clone();
    c.output = None;
    Manifest::new(c.to_toml())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// The error chain, skipping causes whose text the previous message
/// already includes.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<reefsim::Error>() {
        Some(e) if !e.is_input() => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenIsland(a) => cmd_gen_island(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Calibrate(a) => cmd_calibrate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if exit_code(&e) == 2 {
                eprintln!("run `reefsim --help` for usage");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(exit_code(&Usage("x".into()).into()), 2);
        assert_eq!(exit_code(&reefsim::Error::NoFishableCells.into()), 3);
        let inv = reefsim::Error::Invariant {
            tick: 3,
            msg: "x".into(),
        };
        assert_eq!(exit_code(&inv.into()), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 3);
    }

    #[test]
    fn seed_ranges_include_both_ends() {
        assert_eq!(parse_seeds("1..5"), Ok((1, 5)));
        assert!(parse_seeds("5..1").is_err());
        assert!(parse_seeds("3").is_err());
    }
}
