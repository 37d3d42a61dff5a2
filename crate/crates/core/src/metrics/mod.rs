//! Indicators computed from a run: time series, per-cell accumulators,
//! global values, and ratios between a scenario and its baseline.

mod export;

pub use export::{
    export_comparison, export_run, read_timeseries, write_aggregate, Manifest, GLOBAL_FILE,
    MANIFEST_FILE, RATIOS_FILE, TIMESERIES_FILE,
};

use serde::{Deserialize, Serialize};

use crate::agents::Period;
use crate::ecology::TrophicGroup;
use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::raster::{AsciiGrid, NODATA};
use crate::world::{HabitatClass, WorldGrid};

/// One row per tick; row 0 is the initial state. Fish values are mean kg
/// per cell over the fishable cells of each subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub tick: u64,
    pub time_days: f64,
    pub lagoon_coral: f64,
    pub lagoon_turf: f64,
    pub slope_coral: f64,
    pub slope_turf: f64,
    pub herbivores: f64,
    pub corallivores: f64,
    pub carnivores: f64,
    pub mpa_herbivores: f64,
    pub mpa_corallivores: f64,
    pub mpa_carnivores: f64,
    pub open_herbivores: f64,
    pub open_corallivores: f64,
    pub open_carnivores: f64,
    pub lagoon_herbivores: f64,
    pub lagoon_corallivores: f64,
    pub lagoon_carnivores: f64,
    pub slope_herbivores: f64,
    pub slope_corallivores: f64,
    pub slope_carnivores: f64,
    /// Landed this tick, kg.
    pub catch_kg: f64,
    pub trips: u64,
    pub conflicts_day: u64,
    pub conflicts_night: u64,
    /// Biomass moved between cells by spillover this tick, kg.
    pub spillover_kg: f64,
}

#[derive(Clone, Copy, Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.n += 1;
    }
    fn get(self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }
}

impl TimeSeriesRow {
    /// State means at `tick`; the flow columns are left at zero.
    pub fn snapshot(world: &WorldGrid, tick: u64) -> Self {
        let mut cover = [[Mean::default(); 2]; 2]; // [lagoon, slope][coral, turf]
        let mut fish = [[Mean::default(); 3]; 5]; // [all, mpa, open, lagoon, slope][group]
        for c in world.cells.iter().filter(|c| c.habitat.is_fishable()) {
            let zone = match c.habitat {
                HabitatClass::Lagoon => Some(3),
                HabitatClass::OuterSlope => Some(4),
                _ => None,
            };
            if let Some(z) = zone {
                cover[z - 3][0].add(c.state.coral());
                cover[z - 3][1].add(c.state.turf());
            }
            for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
                let v = c.state[g];
                fish[0][slot].add(v);
                fish[if c.mpa { 1 } else { 2 }][slot].add(v);
                if let Some(z) = zone {
                    fish[z][slot].add(v);
                }
            }
        }
        let f = |set: usize, slot: usize| fish[set][slot].get();
        TimeSeriesRow {
            tick,
            time_days: tick as f64 * crate::engine::DT_DAYS,
            lagoon_coral: cover[0][0].get(),
            lagoon_turf: cover[0][1].get(),
            slope_coral: cover[1][0].get(),
            slope_turf: cover[1][1].get(),
            herbivores: f(0, 0),
            corallivores: f(0, 1),
            carnivores: f(0, 2),
            mpa_herbivores: f(1, 0),
            mpa_corallivores: f(1, 1),
            mpa_carnivores: f(1, 2),
            open_herbivores: f(2, 0),
            open_corallivores: f(2, 1),
            open_carnivores: f(2, 2),
            lagoon_herbivores: f(3, 0),
            lagoon_corallivores: f(3, 1),
            lagoon_carnivores: f(3, 2),
            slope_herbivores: f(4, 0),
            slope_corallivores: f(4, 1),
            slope_carnivores: f(4, 2),
            ..Default::default()
        }
    }

    pub fn mpa_fish(&self) -> f64 {
        self.mpa_herbivores + self.mpa_corallivores + self.mpa_carnivores
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts_day + self.conflicts_night
    }
}

/// Running totals per cell, indexed like the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAccumulators {
    pub catch_day: Vec<f64>,
    pub catch_night: Vec<f64>,
    pub conflicts_day: Vec<u64>,
    pub conflicts_night: Vec<u64>,
    pub initial_biomass: Vec<[f64; 3]>,
    pub final_biomass: Vec<[f64; 3]>,
}

fn fish_of(world: &WorldGrid) -> Vec<[f64; 3]> {
    world
        .cells
        .iter()
        .map(|c| TrophicGroup::FISH.map(|g| c.state[g]))
        .collect()
}

impl CellAccumulators {
    pub fn new(world: &WorldGrid) -> Self {
        let n = world.len();
        let initial = fish_of(world);
        CellAccumulators {
            catch_day: vec![0.0; n],
            catch_night: vec![0.0; n],
            conflicts_day: vec![0; n],
            conflicts_night: vec![0; n],
            final_biomass: initial.clone(),
            initial_biomass: initial,
        }
    }

    /// Books a trip: the catch where it was landed, the conflicts where
    /// the fisher first arrived.
    pub fn record(
        &mut self,
        cell: usize,
        drawn: usize,
        period: Period,
        catch_kg: f64,
        conflicts: u64,
    ) {
        match period {
            Period::Day => {
                self.catch_day[cell] += catch_kg;
                self.conflicts_day[drawn] += conflicts;
            }
            Period::Night => {
                self.catch_night[cell] += catch_kg;
                self.conflicts_night[drawn] += conflicts;
            }
        }
    }

    pub fn finish(&mut self, world: &WorldGrid) {
        self.final_biomass = fish_of(world);
    }

    pub fn len(&self) -> usize {
        self.catch_day.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catch_day.is_empty()
    }

    pub fn total_catch(&self) -> f64 {
        self.catch_day.iter().chain(&self.catch_night).sum()
    }

    pub fn total_conflicts(&self) -> u64 {
        self.conflicts_day.iter().chain(&self.conflicts_night).sum()
    }
}

/// Run-wide indicators. `None` marks a value that is not applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalIndicators {
    pub years: f64,
    pub n_fishers: usize,
    pub biomass_initial_kg: f64,
    pub biomass_final_kg: f64,
    pub biomass_variation: Option<f64>,
    pub total_catch_kg: f64,
    pub conflicts_day: u64,
    pub conflicts_night: u64,
    pub annual_catch_per_fisher: Option<f64>,
    pub annual_conflicts_per_fisher: Option<f64>,
}

impl GlobalIndicators {
    pub fn total_conflicts(&self) -> u64 {
        self.conflicts_day + self.conflicts_night
    }

    /// (name, value) pairs in export order.
    pub fn entries(&self) -> Vec<(&'static str, Option<f64>)> {
        vec![
            ("years", Some(self.years)),
            ("n_fishers", Some(self.n_fishers as f64)),
            ("biomass_initial_kg", Some(self.biomass_initial_kg)),
            ("biomass_final_kg", Some(self.biomass_final_kg)),
            ("biomass_variation", self.biomass_variation),
            ("total_catch_kg", Some(self.total_catch_kg)),
            ("conflicts_day", Some(self.conflicts_day as f64)),
            ("conflicts_night", Some(self.conflicts_night as f64)),
            ("annual_catch_per_fisher", self.annual_catch_per_fisher),
            (
                "annual_conflicts_per_fisher",
                self.annual_conflicts_per_fisher,
            ),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Indicator {
    BiomassVariation,
    Catch,
    Conflicts,
}

impl Indicator {
    pub fn name(self) -> &'static str {
        match self {
            Indicator::BiomassVariation => "biomass_variation",
            Indicator::Catch => "catch",
            Indicator::Conflicts => "conflicts",
        }
    }
}

/// Which ticks a raster covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayNight {
    Day,
    Night,
    All,
}

impl DayNight {
    pub fn name(self) -> &'static str {
        match self {
            DayNight::Day => "day",
            DayNight::Night => "night",
            DayNight::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorRaster {
    pub indicator: Indicator,
    pub period: DayNight,
    pub grid: AsciiGrid,
}

impl IndicatorRaster {
    pub fn file_name(&self) -> String {
        format!(
            "raster_{}_{}.asc",
            self.indicator.name(),
            self.period.name()
        )
    }

    /// Values other than the missing sentinel.
    pub fn defined(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.grid
            .values
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, v)| v != NODATA)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Indicators {
    pub global: GlobalIndicators,
    pub rasters: Vec<IndicatorRaster>,
}

impl Indicators {
    pub fn raster(&self, indicator: Indicator, period: DayNight) -> Option<&IndicatorRaster> {
        self.rasters
            .iter()
            .find(|r| r.indicator == indicator && r.period == period)
    }
}

fn per_fisher(total: f64, years: f64, n_fishers: usize) -> Option<f64> {
    (n_fishers > 0 && years > 0.0).then(|| total / years / n_fishers as f64)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0 && num.is_finite()).then(|| num / den)
}

pub fn indicators(result: &RunResult) -> Indicators {
    let w = &result.final_world;
    let acc = &result.cells;
    let years = result.years();
    let fishable: Vec<bool> = w.cells.iter().map(|c| c.habitat.is_fishable()).collect();

    let mut b0 = 0.0;
    let mut b1 = 0.0;
    for i in (0..w.len()).filter(|&i| fishable[i]) {
        b0 += acc.initial_biomass[i].iter().sum::<f64>();
        b1 += acc.final_biomass[i].iter().sum::<f64>();
    }
    let total_catch = acc.total_catch();
    let conflicts_day: u64 = acc.conflicts_day.iter().sum();
    let conflicts_night: u64 = acc.conflicts_night.iter().sum();
    let global = GlobalIndicators {
        years,
        n_fishers: result.n_fishers,
        biomass_initial_kg: b0,
        biomass_final_kg: b1,
        biomass_variation: ratio(b1, b0),
        total_catch_kg: total_catch,
        conflicts_day,
        conflicts_night,
        annual_catch_per_fisher: per_fisher(total_catch, years, result.n_fishers),
        annual_conflicts_per_fisher: per_fisher(
            (conflicts_day + conflicts_night) as f64,
            years,
            result.n_fishers,
        ),
    };

    let annual = |v: f64| if years > 0.0 { v / years } else { NODATA };
    let layer = |f: &dyn Fn(usize) -> f64| {
        let values = (0..w.len())
            .map(|i| if fishable[i] { f(i) } else { NODATA })
            .collect();
        AsciiGrid::new(w.n_rows, w.n_cols, values)
    };
    let mut rasters = vec![IndicatorRaster {
        indicator: Indicator::BiomassVariation,
        period: DayNight::All,
        grid: layer(&|i| {
            let b0: f64 = acc.initial_biomass[i].iter().sum();
            let b1: f64 = acc.final_biomass[i].iter().sum();
            ratio(b1, b0).unwrap_or(NODATA)
        }),
    }];
    let catch = |i: usize, p: DayNight| match p {
        DayNight::Day => acc.catch_day[i],
        DayNight::Night => acc.catch_night[i],
        DayNight::All => acc.catch_day[i] + acc.catch_night[i],
    };
    let conflicts = |i: usize, p: DayNight| match p {
        DayNight::Day => acc.conflicts_day[i],
        DayNight::Night => acc.conflicts_night[i],
        DayNight::All => acc.conflicts_day[i] + acc.conflicts_night[i],
    };
    for p in [DayNight::Day, DayNight::Night, DayNight::All] {
        rasters.push(IndicatorRaster {
            indicator: Indicator::Catch,
            period: p,
            grid: layer(&|i| annual(catch(i, p))),
        });
    }
    for p in [DayNight::Day, DayNight::Night, DayNight::All] {
        rasters.push(IndicatorRaster {
            indicator: Indicator::Conflicts,
            period: p,
            grid: layer(&|i| annual(conflicts(i, p) as f64)),
        });
    }
    Indicators { global, rasters }
}

/// Variant over base for the three headline indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub biomass_variation: Option<f64>,
    pub catch: Option<f64>,
    pub conflicts: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub base: Indicators,
    pub variant: Indicators,
    pub ratios: RatioTable,
    /// Per-cell variant / base, missing where the base is 0 or missing.
    pub rasters: Vec<IndicatorRaster>,
}

fn opt_ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    ratio(num?, den?)
}

pub fn compare(base: &RunResult, variant: &RunResult) -> Result<Comparison> {
    let (a, b) = (&base.final_world, &variant.final_world);
    if a.n_rows != b.n_rows || a.n_cols != b.n_cols {
        return Err(Error::GridMismatch);
    }
    let base_ind = indicators(base);
    let var_ind = indicators(variant);
    let g0 = &base_ind.global;
    let g1 = &var_ind.global;
    let ratios = RatioTable {
        biomass_variation: opt_ratio(g1.biomass_variation, g0.biomass_variation),
        catch: opt_ratio(g1.annual_catch_per_fisher, g0.annual_catch_per_fisher),
        conflicts: opt_ratio(
            g1.annual_conflicts_per_fisher,
            g0.annual_conflicts_per_fisher,
        ),
    };
    let rasters = base_ind
        .rasters
        .iter()
        .zip(&var_ind.rasters)
        .map(|(r0, r1)| {
            let values = r0
                .grid
                .values
                .iter()
                .zip(&r1.grid.values)
                .map(|(&v0, &v1)| {
                    if v0 == NODATA || v1 == NODATA {
                        NODATA
                    } else {
                        ratio(v1, v0).unwrap_or(NODATA)
                    }
                })
                .collect();
            IndicatorRaster {
                indicator: r0.indicator,
                period: r0.period,
                grid: AsciiGrid::new(r0.grid.n_rows, r0.grid.n_cols, values),
            }
        })
        .collect();
    Ok(Comparison {
        base: base_ind,
        variant: var_ind,
        ratios,
        rasters,
    })
}

/// Totals over the fishable cells of one district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictSummary {
    pub district: i32,
    pub fishable_cells: usize,
    pub biomass_initial_kg: f64,
    pub biomass_final_kg: f64,
    /// Empty when the district holds no initial biomass.
    pub biomass_variation: Option<f64>,
    pub annual_catch_kg: f64,
    pub annual_conflicts_day: f64,
    pub annual_conflicts_night: f64,
}

pub fn district_summaries(result: &RunResult) -> Vec<DistrictSummary> {
    let w = &result.final_world;
    let acc = &result.cells;
    let years = result.years();
    let per_year = |v: f64| if years > 0.0 { v / years } else { 0.0 };
    w.districts()
        .into_iter()
        .filter_map(|d| {
            let cells: Vec<usize> = (0..w.len())
                .filter(|&i| w.cells[i].district == d && w.cells[i].habitat.is_fishable())
                .collect();
            if cells.is_empty() {
                return None;
            }
            let b0: f64 = cells
                .iter()
                .map(|&i| acc.initial_biomass[i].iter().sum::<f64>())
                .sum();
            let b1: f64 = cells
                .iter()
                .map(|&i| acc.final_biomass[i].iter().sum::<f64>())
                .sum();
            let catch: f64 = cells
                .iter()
                .map(|&i| acc.catch_day[i] + acc.catch_night[i])
                .sum();
            let cd: u64 = cells.iter().map(|&i| acc.conflicts_day[i]).sum();
            let cn: u64 = cells.iter().map(|&i| acc.conflicts_night[i]).sum();
            Some(DistrictSummary {
                district: d,
                fishable_cells: cells.len(),
                biomass_initial_kg: b0,
                biomass_final_kg: b1,
                biomass_variation: ratio(b1, b0),
                annual_catch_kg: per_year(catch),
                annual_conflicts_day: per_year(cd as f64),
                annual_conflicts_night: per_year(cn as f64),
            })
        })
        .collect()
}

/// Mean, min and max of one indicator across runs; `n` counts the runs
/// where it was applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub indicator: String,
    pub n: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

pub fn aggregate(runs: &[GlobalIndicators]) -> Vec<AggregateRow> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    first
        .entries()
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let vals: Vec<f64> = runs.iter().filter_map(|g| g.entries()[k].1).collect();
            let n = vals.len();
            AggregateRow {
                indicator: name.to_string(),
                n,
                mean: (n > 0).then(|| vals.iter().sum::<f64>() / n as f64),
                min: vals.iter().copied().reduce(f64::min),
                max: vals.iter().copied().reduce(f64::max),
            }
        })
        .collect()
}
