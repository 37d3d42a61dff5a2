//! Map bundles: a `world.toml` header plus one ASCII grid per layer.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, HabitatClass, WorldGrid};
use crate::ecology::CellState;
use crate::error::{Error, Result};
use crate::raster::AsciiGrid;

pub const HEADER_FILE: &str = "world.toml";

pub const LAYER_NAMES: [&str; 11] = [
    "habitat",
    "mpa",
    "district",
    "coral",
    "turf",
    "macroalgae",
    "herbivores",
    "corallivores",
    "carnivores",
    "preference",
    "tourism",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFiles {
    pub habitat: String,
    pub mpa: String,
    pub district: String,
    pub coral: String,
    pub turf: String,
    pub macroalgae: String,
    pub herbivores: String,
    pub corallivores: String,
    pub carnivores: String,
    pub preference: String,
    pub tourism: String,
}

impl Default for LayerFiles {
    fn default() -> Self {
        let f = |name: &str| format!("{name}.asc");
        LayerFiles {
            habitat: f("habitat"),
            mpa: f("mpa"),
            district: f("district"),
            coral: f("coral"),
            turf: f("turf"),
            macroalgae: f("macroalgae"),
            herbivores: f("herbivores"),
            corallivores: f("corallivores"),
            carnivores: f("carnivores"),
            preference: f("preference"),
            tourism: f("tourism"),
        }
    }
}

impl LayerFiles {
    fn get(&self, name: &str) -> &str {
        match name {
            "habitat" => &self.habitat,
            "mpa" => &self.mpa,
            "district" => &self.district,
            "coral" => &self.coral,
            "turf" => &self.turf,
            "macroalgae" => &self.macroalgae,
            "herbivores" => &self.herbivores,
            "corallivores" => &self.corallivores,
            "carnivores" => &self.carnivores,
            "preference" => &self.preference,
            "tourism" => &self.tourism,
            _ => unreachable!("unknown layer {name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldHeader {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    pub layers: LayerFiles,
}

fn layer_values(world: &WorldGrid, name: &str) -> Vec<f64> {
    world
        .cells
        .iter()
        .map(|c| match name {
            "habitat" => c.habitat.code() as f64,
            "mpa" => f64::from(u8::from(c.mpa)),
            "district" => f64::from(c.district),
            "coral" => c.state.coral(),
            "turf" => c.state.turf(),
            "macroalgae" => c.macroalgae,
            "herbivores" => c.state.herbivores(),
            "corallivores" => c.state.corallivores(),
            "carnivores" => c.state.carnivores(),
            "preference" => c.preference,
            "tourism" => c.tourism,
            _ => unreachable!(),
        })
        .collect()
}

pub fn save_world(world: &WorldGrid, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = WorldHeader {
        n_rows: world.n_rows,
        n_cols: world.n_cols,
        cell_size_m: world.cell_size_m,
        layers: LayerFiles::default(),
    };
    let text = toml::to_string(&header).expect("header serializes");
    let path = dir.join(HEADER_FILE);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    for name in LAYER_NAMES {
        let grid = AsciiGrid::new(world.n_rows, world.n_cols, layer_values(world, name));
        grid.write(&dir.join(header.layers.get(name)))?;
    }
    Ok(())
}

fn integer(v: f64, layer: &str, row: usize, col: usize, path: &Path) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::parse(
            path,
            row + 2,
            format!("layer `{layer}` needs integers, found {v} at column {col}"),
        ));
    }
    Ok(v as i64)
}

pub fn load_world(dir: &Path) -> Result<WorldGrid> {
    let header_path = dir.join(HEADER_FILE);
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: WorldHeader =
        toml::from_str(&text).map_err(|e| Error::parse(&header_path, 0, e.to_string()))?;

    let mut layers = Vec::with_capacity(LAYER_NAMES.len());
    for name in LAYER_NAMES {
        let grid = AsciiGrid::read(&dir.join(header.layers.get(name)))?;
        if grid.n_rows != header.n_rows || grid.n_cols != header.n_cols {
            return Err(Error::DimensionMismatch {
                layer: name.to_string(),
                rows: header.n_rows,
                cols: header.n_cols,
                found_rows: grid.n_rows,
                found_cols: grid.n_cols,
            });
        }
        layers.push(grid.values);
    }

    let n_cols = header.n_cols;
    let mut cells = Vec::with_capacity(header.n_rows * n_cols);
    #[allow(clippy::needless_range_loop)]
    for i in 0..header.n_rows * n_cols {
        let (row, col) = (i / n_cols, i % n_cols);
        let at = |k: usize| layers[k][i];
        let path_of = |k: usize| dir.join(header.layers.get(LAYER_NAMES[k]));

        let code = integer(at(0), "habitat", row, col, &path_of(0))?;
        let habitat = HabitatClass::from_code(code).ok_or(Error::HabitatCode { code, row, col })?;
        let mpa = match integer(at(1), "mpa", row, col, &path_of(1))? {
            0 => false,
            1 => true,
            other => {
                return Err(Error::parse(
                    path_of(1),
                    row + 2,
                    format!("mpa must be 0 or 1, found {other}"),
                ))
            }
        };
        let district = integer(at(2), "district", row, col, &path_of(2))?;
        let district = i32::try_from(district)
            .map_err(|_| Error::parse(path_of(2), row + 2, "district id out of range"))?;
        let state = CellState::new(at(3), at(4), at(6), at(7), at(8));
        cells.push(Cell::new(
            habitat,
            mpa,
            district,
            state,
            at(5),
            at(9),
            at(10),
        ));
    }
    WorldGrid::new(header.n_rows, header.n_cols, header.cell_size_m, cells)
}
