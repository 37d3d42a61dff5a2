//! Output tree of a run or a comparison.
//!
//! CSVs use `,`, `.` decimals, a header row and LF endings. Missing
//! values are written as `NA` in CSVs and as the raster nodata value in
//! grids.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{
    aggregate, district_summaries, indicators, AggregateRow, Comparison, GlobalIndicators,
    TimeSeriesRow,
};
use crate::agents::write_rows;
use crate::engine::RunResult;
use crate::error::{Error, Result};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const GLOBAL_FILE: &str = "global.csv";
pub const RATIOS_FILE: &str = "ratios.csv";
pub const DISTRICTS_FILE: &str = "districts.csv";
pub const TRIPS_FILE: &str = "trips.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// What `manifest.txt` records besides the seed and horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    /// The resolved run configuration, as TOML.
    pub config: String,
}

impl Manifest {
    pub fn new(config: impl Into<String>) -> Self {
        Manifest {
            config: config.into(),
        }
    }

    fn render(&self, seed: u64, horizon_ticks: u64, scenario: &str) -> String {
        let mut out = format!(
            "reefsim {}\nseed = {seed}\nhorizon_ticks = {horizon_ticks}\nscenario = {scenario}\n\n[config]\n",
            env!("CARGO_PKG_VERSION")
        );
        out.push_str(&self.config);
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn global_csv(g: &GlobalIndicators) -> String {
    let mut out = String::from("indicator,value\n");
    for (name, v) in g.entries() {
        out.push_str(&format!("{name},{}\n", na(v)));
    }
    out
}

#[derive(Serialize)]
struct DistrictLine {
    district: i32,
    fishable_cells: usize,
    biomass_initial_kg: f64,
    biomass_final_kg: f64,
    biomass_variation: String,
    annual_catch_kg: f64,
    annual_conflicts_day: f64,
    annual_conflicts_night: f64,
}

/// Writes the full output tree of one run into `dir`.
pub fn export_run(result: &RunResult, dir: &Path, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_rows(&dir.join(TIMESERIES_FILE), &result.timeseries)?;
    let ind = indicators(result);
    for r in &ind.rasters {
        r.grid.write(&dir.join(r.file_name()))?;
    }
    write_text(&dir.join(GLOBAL_FILE), &global_csv(&ind.global))?;
    let districts: Vec<DistrictLine> = district_summaries(result)
        .into_iter()
        .map(|d| DistrictLine {
            district: d.district,
            fishable_cells: d.fishable_cells,
            biomass_initial_kg: d.biomass_initial_kg,
            biomass_final_kg: d.biomass_final_kg,
            biomass_variation: na(d.biomass_variation),
            annual_catch_kg: d.annual_catch_kg,
            annual_conflicts_day: d.annual_conflicts_day,
            annual_conflicts_night: d.annual_conflicts_night,
        })
        .collect();
    write_rows(&dir.join(DISTRICTS_FILE), &districts)?;
    if !result.trips.is_empty() {
        write_rows(&dir.join(TRIPS_FILE), &result.trips)?;
    }
    write_text(
        &dir.join(MANIFEST_FILE),
        &manifest.render(
            result.seed,
            result.horizon_ticks,
            result.scenario.name.as_str(),
        ),
    )
}

/// Writes `base/` and `variant/` run trees, then `ratios.csv` and the ratio
/// rasters at the top of `dir`.
pub fn export_comparison(
    cmp: &Comparison,
    base: &RunResult,
    variant: &RunResult,
    dir: &Path,
    manifest: &Manifest,
) -> Result<()> {
    export_run(base, &dir.join("base"), manifest)?;
    export_run(variant, &dir.join("variant"), manifest)?;
    let g0 = &cmp.base.global;
    let g1 = &cmp.variant.global;
    let mut out = String::from("indicator,base,variant,ratio\n");
    for (name, b, v, r) in [
        (
            "biomass_variation",
            g0.biomass_variation,
            g1.biomass_variation,
            cmp.ratios.biomass_variation,
        ),
        (
            "catch",
            g0.annual_catch_per_fisher,
            g1.annual_catch_per_fisher,
            cmp.ratios.catch,
        ),
        (
            "conflicts",
            g0.annual_conflicts_per_fisher,
            g1.annual_conflicts_per_fisher,
            cmp.ratios.conflicts,
        ),
    ] {
        out.push_str(&format!("{name},{},{},{}\n", na(b), na(v), na(r)));
    }
    write_text(&dir.join(RATIOS_FILE), &out)?;
    for r in &cmp.rasters {
        r.grid.write(&dir.join(r.file_name()))?;
    }
    write_text(
        &dir.join(MANIFEST_FILE),
        &manifest.render(
            base.seed,
            base.horizon_ticks,
            &format!(
                "{} vs {}",
                variant.scenario.name.as_str(),
                base.scenario.name.as_str()
            ),
        ),
    )
}

#[derive(Serialize)]
struct AggregateLine<'a> {
    indicator: &'a str,
    n: usize,
    mean: String,
    min: String,
    max: String,
}

/// Mean, min and max of every global indicator across runs.
pub fn write_aggregate(path: &Path, runs: &[GlobalIndicators]) -> Result<Vec<AggregateRow>> {
    let rows = aggregate(runs);
    let lines: Vec<AggregateLine> = rows
        .iter()
        .map(|r| AggregateLine {
            indicator: &r.indicator,
            n: r.n,
            mean: na(r.mean),
            min: na(r.min),
            max: na(r.max),
        })
        .collect();
    write_rows(path, &lines)?;
    Ok(rows)
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRow>> {
    let csv_err = |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)
}
