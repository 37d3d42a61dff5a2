//! Synthetic ring islands: a land core, lagoon, barrier crest cut by passes,
//! outer slope and open ocean, with smooth random layers.
//!
//! Random draws happen in a fixed order: land-edge harmonics, lagoon-width
//! harmonics, slope-width harmonics, pass rotation and jitters, MPA rotation,
//! district rotation, then one value-noise lattice per layer (coral, turf,
//! macroalgae, herbivores, corallivores, carnivores, preference, tourism).

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Cell, HabitatClass, WorldGrid, NO_DISTRICT};
use crate::ecology::CellState;
use crate::error::{Error, Result};
use crate::raster::round_sig6;

/// Target spatial means of the generated layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerMeans {
    pub lagoon_coral: f64,
    pub lagoon_turf: f64,
    pub slope_coral: f64,
    pub slope_turf: f64,
    pub macroalgae: f64,
    pub herbivores: f64,
    pub corallivores: f64,
    pub carnivores: f64,
}

impl Default for LayerMeans {
    fn default() -> Self {
        LayerMeans {
            lagoon_coral: 0.26,
            lagoon_turf: 0.20,
            slope_coral: 0.44,
            slope_turf: 0.33,
            macroalgae: 0.03,
            herbivores: 305.0,
            corallivores: 25.3,
            carnivores: 78.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IslandSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    /// Mean land radius as a fraction of the half-extent of the grid.
    pub land_radius_fraction: f64,
    pub lagoon_width_min: f64,
    pub lagoon_width_max: f64,
    pub crest_width: f64,
    pub slope_width_min: f64,
    pub slope_width_max: f64,
    pub n_passes: usize,
    pub pass_width: f64,
    pub n_mpas: usize,
    /// Target share of lagoon cells inside MPAs.
    pub mpa_lagoon_fraction: f64,
    pub n_districts: usize,
    pub means: LayerMeans,
    /// Relative amplitude of the smooth fields around their means.
    pub variability: f64,
    /// Lattice spacing of the value noise, in cells.
    pub field_scale: f64,
    /// Share of lagoon and pass cells with tourist traffic.
    pub tourism_coverage: f64,
    pub tourism_max: f64,
}

impl Default for IslandSpec {
    fn default() -> Self {
        IslandSpec {
            n_rows: 60,
            n_cols: 60,
            cell_size_m: 100.0,
            land_radius_fraction: 0.3,
            lagoon_width_min: 3.0,
            lagoon_width_max: 7.0,
            crest_width: 2.0,
            slope_width_min: 3.0,
            slope_width_max: 5.0,
            n_passes: 3,
            pass_width: 2.0,
            n_mpas: 8,
            mpa_lagoon_fraction: 0.2,
            n_districts: 8,
            means: LayerMeans::default(),
            variability: 0.25,
            field_scale: 8.0,
            tourism_coverage: 0.15,
            tourism_max: 10.0,
        }
    }
}

impl IslandSpec {
    pub fn square(size: usize) -> Self {
        IslandSpec {
            n_rows: size,
            n_cols: size,
            ..Default::default()
        }
    }

    fn half_extent(&self) -> f64 {
        (self.n_rows.min(self.n_cols) as f64 - 1.0) / 2.0
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::IslandSpec(m));
        if self.n_rows < 8 || self.n_cols < 8 {
            return bad(format!(
                "grid {}x{} is too small for an island",
                self.n_rows, self.n_cols
            ));
        }
        if !(self.cell_size_m > 0.0) {
            return bad("cell_size_m must be > 0".into());
        }
        if self.n_passes == 0 {
            return bad("at least one pass is required".into());
        }
        if self.n_districts == 0 {
            return bad("at least one district is required".into());
        }
        let widths = [
            self.land_radius_fraction,
            self.lagoon_width_min,
            self.crest_width,
            self.slope_width_min,
            self.pass_width,
        ];
        if widths.iter().any(|w| !(*w > 0.0)) {
            return bad("radii and widths must be > 0".into());
        }
        if self.lagoon_width_max < self.lagoon_width_min
            || self.slope_width_max < self.slope_width_min
        {
            return bad("width ranges need min <= max".into());
        }
        if self.crest_width < 1.5 {
            return bad("crest_width below 1.5 cells would leak between lagoon and slope".into());
        }
        if !(0.0..=1.0).contains(&self.mpa_lagoon_fraction)
            || !(0.0..=1.0).contains(&self.tourism_coverage)
        {
            return bad("fractions must lie in [0, 1]".into());
        }
        if !(0.0..1.0).contains(&self.variability) {
            return bad("variability must lie in [0, 1)".into());
        }
        if !(self.field_scale >= 1.0) || !(self.tourism_max >= 0.0) {
            return bad("field_scale must be >= 1 and tourism_max >= 0".into());
        }
        let m = &self.means;
        let all = [
            m.lagoon_coral,
            m.lagoon_turf,
            m.slope_coral,
            m.slope_turf,
            m.macroalgae,
            m.herbivores,
            m.corallivores,
            m.carnivores,
        ];
        if all.iter().any(|v| !(*v >= 0.0)) {
            return bad("layer means must be >= 0".into());
        }
        let outer = self.land_radius_fraction * self.half_extent() * (1.0 + LAND_WOBBLE)
            + self.lagoon_width_max
            + self.crest_width
            + self.slope_width_max;
        if outer > self.half_extent() - 1.0 {
            return bad(format!(
                "reef extends to {outer:.1} cells but the grid half-extent is {:.1}",
                self.half_extent()
            ));
        }
        Ok(())
    }
}

/// Total relative amplitude of the land-edge harmonics.
const LAND_WOBBLE: f64 = 0.12;

/// A smooth periodic function of the angle with values in [-1, 1].
struct Profile {
    terms: Vec<(f64, f64, f64)>,
}

impl Profile {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let mut terms: Vec<(f64, f64, f64)> = (2..=4)
            .map(|k| (k as f64, rng.gen_range(0.2..1.0), rng.gen_range(0.0..TAU)))
            .collect();
        let total: f64 = terms.iter().map(|t| t.1).sum();
        for t in &mut terms {
            t.1 /= total;
        }
        Profile { terms }
    }

    fn eval(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, ph)| a * (k * theta + ph).sin())
            .sum()
    }
}

/// Bilinear value noise over a coarse random lattice, values in [0, 1].
struct ValueNoise {
    rows: usize,
    cols: usize,
    scale: f64,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn draw(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize, scale: f64) -> Self {
        let rows = (n_rows as f64 / scale).ceil() as usize + 2;
        let cols = (n_cols as f64 / scale).ceil() as usize + 2;
        let lattice = (0..rows * cols).map(|_| rng.gen::<f64>()).collect();
        ValueNoise {
            rows,
            cols,
            scale,
            lattice,
        }
    }

    fn at(&self, row: usize, col: usize) -> f64 {
        let y = row as f64 / self.scale;
        let x = col as f64 / self.scale;
        let (y0, x0) = (y.floor() as usize, x.floor() as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (ty, tx) = (smooth(y.fract()), smooth(x.fract()));
        let v = |r: usize, c: usize| {
            self.lattice[r.min(self.rows - 1) * self.cols + c.min(self.cols - 1)]
        };
        let top = v(y0, x0) * (1.0 - tx) + v(y0, x0 + 1) * tx;
        let bottom = v(y0 + 1, x0) * (1.0 - tx) + v(y0 + 1, x0 + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

fn angular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Index of the equal-angle sector containing `theta`, sectors starting at
/// `offset`.
fn sector(theta: f64, offset: f64, n: usize) -> usize {
    let t = (theta - offset).rem_euclid(TAU);
    ((t / TAU * n as f64) as usize).min(n - 1)
}

pub fn generate_synthetic_island(spec: &IslandSpec, seed: u64) -> Result<WorldGrid> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_rows, n_cols) = (spec.n_rows, spec.n_cols);
    let n = n_rows * n_cols;
    let cy = (n_rows as f64 - 1.0) / 2.0;
    let cx = (n_cols as f64 - 1.0) / 2.0;
    let polar: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let dy = (i / n_cols) as f64 - cy;
            let dx = (i % n_cols) as f64 - cx;
            (dy.hypot(dx), dy.atan2(dx).rem_euclid(TAU))
        })
        .collect();

    let land_profile = Profile::draw(&mut rng);
    let lagoon_profile = Profile::draw(&mut rng);
    let slope_profile = Profile::draw(&mut rng);
    let land_base = spec.land_radius_fraction * spec.half_extent();
    let lerp = |lo: f64, hi: f64, p: f64| lo + (hi - lo) * 0.5 * (1.0 + p);
    // (land edge, lagoon edge, crest edge, slope edge) at angle theta
    let edges = |theta: f64| {
        let land = land_base * (1.0 + LAND_WOBBLE * land_profile.eval(theta));
        let lagoon = land
            + lerp(
                spec.lagoon_width_min,
                spec.lagoon_width_max,
                lagoon_profile.eval(theta),
            );
        let crest = lagoon + spec.crest_width;
        let slope = crest
            + lerp(
                spec.slope_width_min,
                spec.slope_width_max,
                slope_profile.eval(theta),
            );
        (land, lagoon, crest, slope)
    };

    let mut habitat: Vec<HabitatClass> = polar
        .iter()
        .map(|&(r, theta)| {
            let (land, lagoon, crest, slope) = edges(theta);
            if r < land {
                HabitatClass::Land
            } else if r < lagoon {
                HabitatClass::Lagoon
            } else if r < crest {
                HabitatClass::ReefCrest
            } else if r < slope {
                HabitatClass::OuterSlope
            } else {
                HabitatClass::OpenOcean
            }
        })
        .collect();

    let neighbours = |i: usize| {
        let (r, c) = ((i / n_cols) as isize, (i % n_cols) as isize);
        (-1..=1)
            .flat_map(move |dr| (-1..=1).map(move |dc| (r + dr, c + dc)))
            .filter(move |&(rr, cc)| {
                (rr, cc) != (r, c)
                    && rr >= 0
                    && cc >= 0
                    && rr < n_rows as isize
                    && cc < n_cols as isize
            })
            .map(move |(rr, cc)| rr as usize * n_cols + cc as usize)
    };

    // seal any lagoon cell touching the slope so the crest is a true barrier
    let leaks: Vec<usize> = (0..n)
        .filter(|&i| {
            habitat[i] == HabitatClass::Lagoon
                && neighbours(i).any(|j| habitat[j] == HabitatClass::OuterSlope)
        })
        .collect();
    for i in leaks {
        habitat[i] = HabitatClass::ReefCrest;
    }

    // passes
    let crest_inner_min = (0..720)
        .map(|k| edges(k as f64 * TAU / 720.0).1)
        .fold(f64::INFINITY, f64::min);
    if spec.n_passes as f64 * (spec.pass_width + 2.0) > TAU * crest_inner_min / 2.0 {
        return Err(Error::IslandSpec(format!(
            "{} passes of width {} do not fit on the crest",
            spec.n_passes, spec.pass_width
        )));
    }
    let rotation = rng.gen_range(0.0..TAU);
    let spacing = TAU / spec.n_passes as f64;
    let pass_angles: Vec<f64> = (0..spec.n_passes)
        .map(|k| rotation + spacing * (k as f64 + rng.gen_range(-0.2..0.2)))
        .collect();
    for i in 0..n {
        if habitat[i] != HabitatClass::ReefCrest {
            continue;
        }
        let (r, theta) = polar[i];
        if pass_angles
            .iter()
            .any(|&a| r * angular_gap(theta, a) <= spec.pass_width / 2.0 + 0.5)
        {
            habitat[i] = HabitatClass::Pass;
        }
    }

    // MPAs: equal contiguous sectors, half-width tuned to the lagoon target
    let mpa_rotation = rng.gen_range(0.0..TAU);
    let mpa_centres: Vec<f64> = (0..spec.n_mpas)
        .map(|k| mpa_rotation + TAU * (k as f64 + 0.5) / spec.n_mpas as f64)
        .collect();
    let lagoon_cells: Vec<usize> = (0..n)
        .filter(|&i| habitat[i] == HabitatClass::Lagoon)
        .collect();
    let in_sector = |i: usize, half: f64| {
        mpa_centres
            .iter()
            .position(|&c| angular_gap(polar[i].1, c) <= half)
    };
    let mut mpa = vec![false; n];
    if spec.n_mpas > 0 && spec.mpa_lagoon_fraction > 0.0 {
        let covered = |half: f64| {
            lagoon_cells
                .iter()
                .filter(|&&i| in_sector(i, half).is_some())
                .count()
        };
        let target = spec.mpa_lagoon_fraction * lagoon_cells.len() as f64;
        let (mut lo, mut hi) = (0.0, PI / spec.n_mpas as f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (covered(mid) as f64) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let half = if (covered(hi) as f64 - target).abs() <= (target - covered(lo) as f64).abs() {
            hi
        } else {
            lo
        };
        let mut per_sector = vec![0usize; spec.n_mpas];
        for i in 0..n {
            if habitat[i].is_fishable() {
                if let Some(s) = in_sector(i, half) {
                    mpa[i] = true;
                    if habitat[i] == HabitatClass::Lagoon {
                        per_sector[s] += 1;
                    }
                }
            }
        }
        if per_sector.contains(&0) {
            return Err(Error::IslandSpec(format!(
                "{} MPAs do not fit: some sector holds no lagoon cell",
                spec.n_mpas
            )));
        }
    }

    // districts: angular sectors over every non-ocean cell
    let district_rotation = rng.gen_range(0.0..TAU);
    let district: Vec<i32> = (0..n)
        .map(|i| match habitat[i] {
            HabitatClass::OpenOcean => NO_DISTRICT,
            _ => sector(polar[i].1, district_rotation, spec.n_districts) as i32,
        })
        .collect();
    let mut coastal = vec![0usize; spec.n_districts];
    for i in 0..n {
        if habitat[i] == HabitatClass::Land && neighbours(i).any(|j| habitat[j].is_fishable()) {
            coastal[district[i] as usize] += 1;
        }
    }
    if let Some(d) = coastal.iter().position(|&c| c == 0) {
        return Err(Error::IslandSpec(format!(
            "{} districts do not fit: district {d} has no coastline",
            spec.n_districts
        )));
    }

    // smooth layers
    let fishable: Vec<usize> = (0..n).filter(|&i| habitat[i].is_fishable()).collect();
    let is_lagoonish = |h: HabitatClass| h == HabitatClass::Lagoon;
    let field = |rng: &mut ChaCha8Rng| {
        let noise = ValueNoise::draw(rng, n_rows, n_cols, spec.field_scale);
        (0..n)
            .map(|i| 1.0 + spec.variability * (2.0 * noise.at(i / n_cols, i % n_cols) - 1.0))
            .collect::<Vec<f64>>()
    };
    // scales `raw` so its mean over `cells` equals `mean`
    let fit = |raw: &[f64], cells: &[usize], mean: f64| -> Vec<f64> {
        let mut out = vec![0.0; n];
        if cells.is_empty() {
            return out;
        }
        let m = cells.iter().map(|&i| raw[i]).sum::<f64>() / cells.len() as f64;
        for &i in cells {
            out[i] = raw[i] * mean / m;
        }
        out
    };
    let lagoon_set: Vec<usize> = fishable
        .iter()
        .copied()
        .filter(|&i| is_lagoonish(habitat[i]))
        .collect();
    let seaward_set: Vec<usize> = fishable
        .iter()
        .copied()
        .filter(|&i| !is_lagoonish(habitat[i]))
        .collect();
    let m = &spec.means;
    let cover = |raw: &[f64], lagoon_mean: f64, slope_mean: f64| {
        let a = fit(raw, &lagoon_set, lagoon_mean);
        let b = fit(raw, &seaward_set, slope_mean);
        a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<f64>>()
    };
    let coral_raw = field(&mut rng);
    let turf_raw = field(&mut rng);
    let macro_raw = field(&mut rng);
    let mut coral = cover(&coral_raw, m.lagoon_coral, m.slope_coral);
    let mut turf = cover(&turf_raw, m.lagoon_turf, m.slope_turf);
    let macroalgae = fit(&macro_raw, &fishable, m.macroalgae);
    for i in 0..n {
        let sum = coral[i] + turf[i];
        if sum > 1.0 {
            coral[i] /= sum;
            turf[i] /= sum;
        }
    }
    let herb_raw = field(&mut rng);
    let corallivore_raw = field(&mut rng);
    let carn_raw = field(&mut rng);
    let herbivores = fit(&herb_raw, &fishable, m.herbivores);
    let corallivores = fit(&corallivore_raw, &fishable, m.corallivores);
    let carnivores = fit(&carn_raw, &fishable, m.carnivores);

    // preference: smooth field, boosted near passes
    let pref_raw = field(&mut rng);
    let pass_cells: Vec<usize> = (0..n)
        .filter(|&i| habitat[i] == HabitatClass::Pass)
        .collect();
    let preference: Vec<f64> = (0..n)
        .map(|i| {
            if !habitat[i].is_fishable() {
                return 0.0;
            }
            let (r, c) = ((i / n_cols) as f64, (i % n_cols) as f64);
            let near = pass_cells
                .iter()
                .map(|&p| ((p / n_cols) as f64 - r).hypot((p % n_cols) as f64 - c))
                .fold(f64::INFINITY, f64::min);
            pref_raw[i] / (1.0 + spec.variability) * (1.0 + (-near / 3.0).exp())
        })
        .collect();

    // tourism: the top share of a smooth field over lagoon and pass cells
    let tour_raw = field(&mut rng);
    let lagoon_and_pass: Vec<usize> = (0..n)
        .filter(|&i| matches!(habitat[i], HabitatClass::Lagoon | HabitatClass::Pass))
        .collect();
    let mut tourism = vec![0.0; n];
    let k = (spec.tourism_coverage * lagoon_and_pass.len() as f64).round() as usize;
    if k > 0 && spec.tourism_max > 0.0 {
        let mut sorted: Vec<f64> = lagoon_and_pass.iter().map(|&i| tour_raw[i]).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let top = sorted[0];
        let floor = sorted.get(k).copied().unwrap_or(f64::NEG_INFINITY);
        let floor = if floor.is_finite() {
            floor
        } else {
            sorted[sorted.len() - 1] - 1e-9
        };
        for &i in &lagoon_and_pass {
            if tour_raw[i] > floor {
                tourism[i] = spec.tourism_max * (tour_raw[i] - floor) / (top - floor);
            }
        }
    }

    let cells = (0..n)
        .map(|i| {
            let h = habitat[i];
            let q = |v: &[f64]| {
                if h.is_fishable() {
                    round_sig6(v[i])
                } else {
                    0.0
                }
            };
            let state = CellState::new(
                q(&coral),
                q(&turf),
                q(&herbivores),
                q(&corallivores),
                q(&carnivores),
            );
            Cell::new(
                h,
                mpa[i],
                district[i],
                state,
                q(&macroalgae),
                q(&preference),
                q(&tourism),
            )
        })
        .collect();
    WorldGrid::new(n_rows, n_cols, spec.cell_size_m, cells)
}
