//! Households and fishers built from per-district counts, plus CSV I/O.
//!
//! Draw order: districts in ascending id; within a district, household
//! locations (creation order), boat owners, pirogue owners, the household of
//! each pro fisher, then of each annex fisher. After all districts, each
//! fisher in creation order draws trip probability, selectivity, period.

use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{radius_for_equipment, Fisher, FisherKind, Period, NIGHT_SHARE};
use crate::error::{Error, Result};
use crate::world::{HabitatClass, WorldGrid};

/// Fishers per fishable cell on the reference island (2244 / 5320).
pub const DEFAULT_FISHER_DENSITY: f64 = 2244.0 / 5320.0;
/// Share of professional fishers (440 / 2244).
pub const PRO_SHARE: f64 = 440.0 / 2244.0;
const FISHERS_PER_HOUSEHOLD: f64 = 1.6;
const BOAT_SHARE: f64 = 0.3;
const PIROGUE_SHARE: f64 = 0.4;

pub fn default_fisher_count(world: &WorldGrid) -> u32 {
    (DEFAULT_FISHER_DENSITY * world.fishable_count() as f64).round() as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictRow {
    pub district: i32,
    pub households: u32,
    pub pro: u32,
    pub annex: u32,
    pub boats: u32,
    pub pirogues: u32,
    pub resource_dependence: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistrictTable {
    pub rows: Vec<DistrictRow>,
}

/// Splits `total` over `weights` by largest remainder (ties to lower index).
fn apportion(total: u32, weights: &[f64]) -> Vec<u32> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<u32> = exact.iter().map(|e| e.floor() as u32).collect();
    let mut left = total - out.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

impl DistrictTable {
    /// A table for `n_fishers` spread over the world's districts in
    /// proportion to their coastline, with dependence drawn U[0.2, 0.8].
    pub fn synthetic(world: &WorldGrid, n_fishers: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = world.districts();
        let coast: Vec<f64> = ids
            .iter()
            .map(|&d| {
                (0..world.len())
                    .filter(|&i| world.cells[i].district == d && world.is_coastal_land(i))
                    .count() as f64
            })
            .collect();
        let n_pro = (n_fishers as f64 * PRO_SHARE).round() as u32;
        let pro = apportion(n_pro, &coast);
        let annex = apportion(n_fishers - n_pro, &coast);
        let rows = ids
            .iter()
            .enumerate()
            .map(|(k, &district)| {
                let fishers = pro[k] + annex[k];
                let households = if fishers == 0 {
                    0
                } else {
                    ((fishers as f64 / FISHERS_PER_HOUSEHOLD).ceil() as u32).max(1)
                };
                DistrictRow {
                    district,
                    households,
                    pro: pro[k],
                    annex: annex[k],
                    boats: (BOAT_SHARE * households as f64).round() as u32,
                    pirogues: (PIROGUE_SHARE * households as f64).round() as u32,
                    resource_dependence: rng.gen_range(0.2..=0.8),
                }
            })
            .collect();
        DistrictTable { rows }
    }

    pub fn total_fishers(&self) -> u32 {
        self.rows.iter().map(|r| r.pro + r.annex).sum()
    }

    pub fn validate(&self, world: &WorldGrid) -> Result<()> {
        let ids = world.districts();
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rows {
            let err = |m: String| Err(Error::Population(format!("district {}: {m}", r.district)));
            if !seen.insert(r.district) {
                return err("listed twice".into());
            }
            if !ids.contains(&r.district) {
                return err("not present in the world".into());
            }
            if r.pro + r.annex > 0 && r.households == 0 {
                return err("has fishers but no household".into());
            }
            if r.boats > r.households || r.pirogues > r.households {
                return err("more boats or pirogues than households".into());
            }
            if !(0.0..=1.0).contains(&r.resource_dependence) {
                return err(format!(
                    "resource dependence {} outside [0, 1]",
                    r.resource_dependence
                ));
            }
        }
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rows: Vec<DistrictRow> = read_rows(path)?;
        rows.sort_by_key(|r| r.district);
        Ok(DistrictTable { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_rows(path, &self.rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub id: usize,
    pub district: i32,
    pub location: usize,
    pub n_pro: u32,
    pub n_annex: u32,
    pub has_boat: bool,
    pub has_pirogue: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub districts: DistrictTable,
    pub households: Vec<Household>,
    pub fishers: Vec<Fisher>,
}

impl Population {
    pub fn empty() -> Self {
        Population::default()
    }

    pub fn len(&self) -> usize {
        self.fishers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fishers.is_empty()
    }
}

/// Fishable neighbour of a coastal land cell closest by step cost;
/// orthogonal before diagonal, then lowest index.
fn departure_cell(world: &WorldGrid, home: usize) -> Option<usize> {
    world
        .neighbors(home)
        .filter(|&(j, _)| world.cells[j].habitat.is_fishable())
        .min_by_key(|&(j, diag)| (diag, j))
        .map(|(j, _)| j)
}

pub fn generate_population(
    world: &WorldGrid,
    table: &DistrictTable,
    seed: u64,
) -> Result<Population> {
    table.validate(world)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = table.rows.clone();
    rows.sort_by_key(|r| r.district);

    let mut households: Vec<Household> = Vec::new();
    // (household, kind) per fisher, creation order
    let mut members: Vec<(usize, FisherKind)> = Vec::new();
    for r in &rows {
        let coast: Vec<usize> = (0..world.len())
            .filter(|&i| world.cells[i].district == r.district && world.is_coastal_land(i))
            .collect();
        if r.households == 0 {
            continue;
        }
        if coast.is_empty() {
            return Err(Error::Population(format!(
                "district {} has households but no coastal land cell",
                r.district
            )));
        }
        let first = households.len();
        let n = r.households as usize;
        for _ in 0..n {
            let location = coast[rng.gen_range(0..coast.len())];
            households.push(Household {
                id: households.len(),
                district: r.district,
                location,
                n_pro: 0,
                n_annex: 0,
                has_boat: false,
                has_pirogue: false,
            });
        }
        for k in sample(&mut rng, n, r.boats as usize).into_vec() {
            households[first + k].has_boat = true;
        }
        for k in sample(&mut rng, n, r.pirogues as usize).into_vec() {
            households[first + k].has_pirogue = true;
        }
        for (kind, count) in [(FisherKind::Pro, r.pro), (FisherKind::Annex, r.annex)] {
            for _ in 0..count {
                let h = first + rng.gen_range(0..n);
                match kind {
                    FisherKind::Pro => households[h].n_pro += 1,
                    FisherKind::Annex => households[h].n_annex += 1,
                }
                members.push((h, kind));
            }
        }
    }

    let dependence = |d: i32| {
        rows.iter()
            .find(|r| r.district == d)
            .map_or(0.0, |r| r.resource_dependence)
    };
    let mut fishers = Vec::with_capacity(members.len());
    for (id, (h, kind)) in members.into_iter().enumerate() {
        let home = &households[h];
        let (lo, hi) = kind.trip_probability_range();
        let trip_probability = rng.gen_range(lo..=hi);
        let selectivity = rng.gen::<f64>();
        let period = if rng.gen::<f64>() < NIGHT_SHARE {
            Period::Night
        } else {
            Period::Day
        };
        let radius = radius_for_equipment(home.has_boat, home.has_pirogue);
        fishers.push(Fisher {
            id,
            household: h,
            district: home.district,
            kind,
            departure_cell: departure_cell(world, home.location).expect("coastal land has water"),
            base_radius_m: radius,
            fishing_radius_m: radius,
            trip_probability,
            trip_duration_h: kind.trip_duration_h(),
            selectivity,
            period,
            resource_dependence: dependence(home.district),
        });
    }
    Ok(Population {
        districts: DistrictTable { rows },
        households,
        fishers,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct HouseholdRow {
    id: usize,
    district: i32,
    row: usize,
    col: usize,
    n_pro: u32,
    n_annex: u32,
    boat: u8,
    pirogue: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct FisherRow {
    id: usize,
    household: usize,
    kind: FisherKind,
    radius_m: f64,
    trip_prob: f64,
    duration_h: f64,
    selectivity: f64,
    period: Period,
    district: i32,
    departure_row: usize,
    departure_col: usize,
    resource_dependence: f64,
}

pub const HOUSEHOLDS_FILE: &str = "households.csv";
pub const FISHERS_FILE: &str = "fishers.csv";
pub const DISTRICTS_FILE: &str = "districts.csv";

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
}

pub(crate) fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let csv_err = |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `households.csv`, `fishers.csv` and `districts.csv` into `dir`.
pub fn save_population(pop: &Population, world: &WorldGrid, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let households: Vec<HouseholdRow> = pop
        .households
        .iter()
        .map(|h| {
            let (row, col) = world.coords(h.location);
            HouseholdRow {
                id: h.id,
                district: h.district,
                row,
                col,
                n_pro: h.n_pro,
                n_annex: h.n_annex,
                boat: u8::from(h.has_boat),
                pirogue: u8::from(h.has_pirogue),
            }
        })
        .collect();
    let fishers: Vec<FisherRow> = pop
        .fishers
        .iter()
        .map(|f| {
            let (departure_row, departure_col) = world.coords(f.departure_cell);
            FisherRow {
                id: f.id,
                household: f.household,
                kind: f.kind,
                radius_m: f.base_radius_m,
                trip_prob: f.trip_probability,
                duration_h: f.trip_duration_h,
                selectivity: f.selectivity,
                period: f.period,
                district: f.district,
                departure_row,
                departure_col,
                resource_dependence: f.resource_dependence,
            }
        })
        .collect();
    write_rows(&dir.join(HOUSEHOLDS_FILE), &households)?;
    write_rows(&dir.join(FISHERS_FILE), &fishers)?;
    pop.districts.write_csv(&dir.join(DISTRICTS_FILE))
}

pub fn load_population(dir: &Path, world: &WorldGrid) -> Result<Population> {
    let districts = DistrictTable::read_csv(&dir.join(DISTRICTS_FILE))?;
    districts.validate(world)?;
    let cell = |row: usize, col: usize, what: &str| {
        if row >= world.n_rows || col >= world.n_cols {
            return Err(Error::Population(format!(
                "{what} at ({row}, {col}) lies outside the grid"
            )));
        }
        Ok(world.index(row, col))
    };
    let households = read_rows::<HouseholdRow>(&dir.join(HOUSEHOLDS_FILE))?
        .into_iter()
        .enumerate()
        .map(|(k, h)| {
            let location = cell(h.row, h.col, "household")?;
            let c = &world.cells[location];
            if h.id != k || c.habitat != HabitatClass::Land || c.district != h.district {
                return Err(Error::Population(format!(
                    "household {} must sit on land of district {} and be listed in id order",
                    h.id, h.district
                )));
            }
            Ok(Household {
                id: h.id,
                district: h.district,
                location,
                n_pro: h.n_pro,
                n_annex: h.n_annex,
                has_boat: h.boat != 0,
                has_pirogue: h.pirogue != 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fishers = read_rows::<FisherRow>(&dir.join(FISHERS_FILE))?
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let departure_cell = cell(f.departure_row, f.departure_col, "departure cell")?;
            let bad = |m: &str| Err(Error::Population(format!("fisher {}: {m}", f.id)));
            if f.id != k || f.household >= households.len() {
                return bad("unknown household or id out of order");
            }
            if !world.cells[departure_cell].habitat.is_fishable() {
                return bad("departure cell is not fishable");
            }
            if !(f.radius_m > 0.0)
                || !(0.0..=1.0).contains(&f.trip_prob)
                || !(0.0..=1.0).contains(&f.selectivity)
            {
                return bad("radius must be > 0, probabilities in [0, 1]");
            }
            Ok(Fisher {
                id: f.id,
                household: f.household,
                district: f.district,
                kind: f.kind,
                departure_cell,
                base_radius_m: f.radius_m,
                fishing_radius_m: f.radius_m,
                trip_probability: f.trip_prob,
                trip_duration_h: f.duration_h,
                selectivity: f.selectivity,
                period: f.period,
                resource_dependence: f.resource_dependence,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Population {
        districts,
        households,
        fishers,
    })
}
