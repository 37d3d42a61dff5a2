use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn reefsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reefsim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = reefsim(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn island(dir: &Path) -> String {
    let out = dir.join("demo");
    ok(&[
        "gen-island",
        "--size",
        "50",
        "--passes",
        "2",
        "--seed",
        "7",
        "--out",
        s(&out),
    ]);
    out.to_str().unwrap().to_string()
}

#[test]
fn gen_island_is_loadable_and_repeatable() {
    let t = tempfile::tempdir().unwrap();
    let a = island(t.path());
    let b = t.path().join("again");
    ok(&[
        "gen-island",
        "--size",
        "50",
        "--passes",
        "2",
        "--seed",
        "7",
        "--out",
        s(&b),
    ]);
    for name in ["world.toml", "habitat.asc", "herbivores.asc", "mpa.asc"] {
        assert_eq!(
            fs::read(Path::new(&a).join(name)).unwrap(),
            fs::read(b.join(name)).unwrap()
        );
    }
    ok(&["calibrate", "--world", &a]);
}

#[test]
fn missing_out_is_a_usage_error() {
    assert_eq!(
        reefsim(&["gen-island", "--size", "50"]).status.code(),
        Some(2)
    );
    assert_eq!(
        reefsim(&["simulate", "--ticks", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        reefsim(&["simulate", "--scenario", "bogus", "--out", "x"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_inputs_exit_with_code_3() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("o");
    let missing = t.path().join("nowhere");
    let r = reefsim(&[
        "simulate",
        "--world",
        s(&missing),
        "--ticks",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("nowhere"));

    let cfg = t.path().join("bad.toml");
    fs::write(&cfg, "seed = \"x\"\n").unwrap();
    let r = reefsim(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(3));

    let r = reefsim(&[
        "simulate",
        "--surveillance=-1",
        "--ticks",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn simulate_writes_the_output_tree() {
    let t = tempfile::tempdir().unwrap();
    let world = island(t.path());
    let out = t.path().join("run");
    ok(&[
        "simulate",
        "--world",
        &world,
        "--scenario",
        "statu-quo",
        "--seed",
        "1",
        "--ticks",
        "40",
        "--out",
        s(&out),
    ]);
    for name in [
        "timeseries.csv",
        "global.csv",
        "districts.csv",
        "manifest.txt",
        "raster_biomass_variation_all.asc",
        "raster_catch_day.asc",
        "raster_conflicts_night.asc",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(read(&out.join("timeseries.csv")).lines().count(), 42);
    let manifest = read(&out.join("manifest.txt"));
    assert!(manifest.contains("seed = 1\n"));
    assert!(manifest.contains("horizon_ticks = 40\n"));
}

#[test]
fn quota_caps_every_trip() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("q");
    ok(&[
        "simulate",
        "--scenario",
        "quota",
        "--quota",
        "0.5",
        "--ticks",
        "20",
        "--log-trips",
        "--out",
        s(&out),
    ]);
    let trips = read(&out.join("trips.csv"));
    let mut lines = trips.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "catch_kg").unwrap();
    let catches: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert!(!catches.is_empty());
    assert!(catches.iter().all(|&c| c <= 0.5));
    assert!(catches.contains(&0.5));
}

#[test]
fn no_fishing_reports_catch_as_not_applicable() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("nf");
    ok(&[
        "simulate",
        "--scenario",
        "no-fishing",
        "--ticks",
        "10",
        "--out",
        s(&out),
    ]);
    assert!(read(&out.join("global.csv")).contains("annual_catch_per_fisher,NA\n"));
}

#[test]
fn seed_batches_write_one_directory_per_seed() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("batch");
    ok(&[
        "simulate",
        "--seeds",
        "1..3",
        "--ticks",
        "10",
        "--out",
        s(&out),
    ]);
    for seed in 1..=3 {
        assert!(out.join(format!("seed_{seed}")).join("global.csv").exists());
    }
    let agg = read(&out.join("aggregate.csv"));
    assert!(agg.starts_with("indicator,n,mean,min,max\n"));
    assert!(agg.contains("\nyears,3,"));
}

#[test]
fn replays_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let a = t.path().join("a");
    let b = t.path().join("b");
    ok(&["simulate", "--seed", "4", "--ticks", "30", "--out", s(&a)]);
    ok(&[
        "simulate",
        "--seed",
        "4",
        "--ticks",
        "30",
        "--sequential",
        "--out",
        s(&b),
    ]);
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() > 5);
    for n in names {
        assert_eq!(
            fs::read(a.join(&n)).unwrap(),
            fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("run.toml");
    let out = t.path().join("cfg");
    fs::write(
        &cfg,
        format!(
            "seed = 9\nhorizon_ticks = 6\noutput = \"{}\"\n[scenario]\nname = \"night-ban\"\n",
            out.display()
        ),
    )
    .unwrap();
    ok(&["simulate", "--config", s(&cfg), "--seed", "2"]);
    let manifest = read(&out.join("manifest.txt"));
    assert!(manifest.contains("seed = 2\n"));
    assert!(manifest.contains("horizon_ticks = 6\n"));
    assert!(manifest.contains("scenario = night-ban\n"));
}

#[test]
fn comparing_a_scenario_with_itself_gives_unit_ratios() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("cmp");
    ok(&[
        "compare",
        "--base",
        "statu-quo",
        "--variant",
        "statu-quo",
        "--disturbance",
        "on",
        "--ticks",
        "20",
        "--out",
        s(&out),
    ]);
    let ratios = read(&out.join("ratios.csv"));
    assert_eq!(ratios.lines().count(), 4);
    for line in ratios.lines().skip(1) {
        assert!(line.ends_with(",1"), "{line}");
    }
    assert!(out.join("base").join("timeseries.csv").exists());
}

#[test]
fn zero_catch_baseline_gives_missing_ratio() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("cmp");
    let r = ok(&[
        "compare",
        "--base",
        "no-fishing",
        "--variant",
        "quota",
        "--ticks",
        "10",
        "--out",
        s(&out),
    ]);
    assert!(read(&out.join("ratios.csv")).contains("\ncatch,NA,"));
    assert!(String::from_utf8_lossy(&r.stderr).contains("not applicable"));
}

#[test]
fn calibrate_prints_coefficients() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(&["calibrate", "--fishers", "0"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.trim().is_empty());
    let file = t.path().join("params.txt");
    ok(&[
        "calibrate",
        "--calibration",
        "paper-literal",
        "--out",
        s(&file),
    ]);
    assert!(!read(&file).is_empty());
}

#[test]
fn help_lists_flags_and_defaults() {
    for (cmd, flags) in [
        (
            "gen-island",
            &["--size", "--passes", "--seed", "--out", "[default: 60]"][..],
        ),
        (
            "simulate",
            &[
                "--config",
                "--scenario",
                "--seeds",
                "--quota",
                "[default: 20]",
            ][..],
        ),
        (
            "compare",
            &[
                "--base",
                "--variant",
                "--disturbance",
                "[default: statu-quo]",
            ][..],
        ),
        (
            "calibrate",
            &["--world", "--calibration", "[default: balanced-partition]"][..],
        ),
    ] {
        let out = ok(&[cmd, "--help"]);
        let text = String::from_utf8(out.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}
