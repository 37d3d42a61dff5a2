//! The raster world: habitat classes, static layers and the dynamic
//! ecological state of every cell.

mod bundle;
mod distance;
mod synth;

pub use bundle::{load_world, save_world, WorldHeader, LAYER_NAMES};
pub use distance::{distance_field, reachable_fishable_cells, DistanceCache, DistanceField};
pub use synth::{generate_synthetic_island, IslandSpec, LayerMeans};

use serde::{Deserialize, Serialize};

use crate::ecology::{CellState, TrophicGroup};
use crate::error::{Error, Result};

/// Sentinel district for cells that belong to no district.
pub const NO_DISTRICT: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HabitatClass {
    Land,
    Lagoon,
    ReefCrest,
    Pass,
    OuterSlope,
    OpenOcean,
}

impl HabitatClass {
    pub const ALL: [HabitatClass; 6] = [
        HabitatClass::Land,
        HabitatClass::Lagoon,
        HabitatClass::ReefCrest,
        HabitatClass::Pass,
        HabitatClass::OuterSlope,
        HabitatClass::OpenOcean,
    ];

    pub fn code(self) -> i64 {
        match self {
            HabitatClass::Land => 0,
            HabitatClass::Lagoon => 1,
            HabitatClass::ReefCrest => 2,
            HabitatClass::Pass => 3,
            HabitatClass::OuterSlope => 4,
            HabitatClass::OpenOcean => 5,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        Self::ALL.into_iter().find(|h| h.code() == code)
    }

    pub fn is_navigable(self) -> bool {
        matches!(
            self,
            HabitatClass::Lagoon
                | HabitatClass::Pass
                | HabitatClass::OuterSlope
                | HabitatClass::OpenOcean
        )
    }

    pub fn is_fishable(self) -> bool {
        matches!(
            self,
            HabitatClass::Lagoon | HabitatClass::Pass | HabitatClass::OuterSlope
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub habitat: HabitatClass,
    pub mpa: bool,
    pub district: i32,
    /// Coral, turf and the three fish groups.
    pub state: CellState,
    /// Held at its initial value.
    pub macroalgae: f64,
    pub preference: f64,
    pub tourism: f64,
    /// Initial coral + initial turf.
    pub substrate_cap: f64,
    /// Per fish group, twice the initial biomass.
    pub carrying_capacity: [f64; 3],
}

impl Cell {
    /// Builds a cell from its initial layers; the caps are derived from the
    /// initial state.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        habitat: HabitatClass,
        mpa: bool,
        district: i32,
        state: CellState,
        macroalgae: f64,
        preference: f64,
        tourism: f64,
    ) -> Self {
        let substrate_cap = state.coral() + state.turf();
        let carrying_capacity = TrophicGroup::FISH.map(|g| 2.0 * state[g]);
        Cell {
            habitat,
            mpa,
            district,
            state,
            macroalgae,
            preference,
            tourism,
            substrate_cap,
            carrying_capacity,
        }
    }

    pub fn capacity(&self, group: TrophicGroup) -> f64 {
        match group.fish_index() {
            Some(i) => self.carrying_capacity[i],
            None => self.substrate_cap,
        }
    }

    /// Herbivores + carnivores: the biomass fishers target.
    pub fn catchable_biomass(&self) -> f64 {
        self.state.herbivores() + self.state.carnivores()
    }

    pub fn fish_biomass(&self) -> f64 {
        TrophicGroup::FISH.iter().map(|&g| self.state[g]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldGrid {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    pub cells: Vec<Cell>,
}

const OFFSETS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (0, 1),
    (1, 0),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

impl WorldGrid {
    /// Assembles a grid and checks every cell invariant.
    pub fn new(n_rows: usize, n_cols: usize, cell_size_m: f64, cells: Vec<Cell>) -> Result<Self> {
        let world = WorldGrid {
            n_rows,
            n_cols,
            cell_size_m,
            cells,
        };
        world.validate()?;
        Ok(world)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size_m > 0.0 && self.cell_size_m.is_finite()) {
            return Err(Error::InvalidWorld(format!(
                "cell size {} must be positive",
                self.cell_size_m
            )));
        }
        if self.cells.len() != self.n_rows * self.n_cols {
            return Err(Error::InvalidWorld(format!(
                "{} cells for a {}x{} grid",
                self.cells.len(),
                self.n_rows,
                self.n_cols
            )));
        }
        for (idx, cell) in self.cells.iter().enumerate() {
            let (row, col) = self.coords(idx);
            let named = [
                ("coral", cell.state.coral()),
                ("turf", cell.state.turf()),
                ("macroalgae", cell.macroalgae),
                ("herbivores", cell.state.herbivores()),
                ("corallivores", cell.state.corallivores()),
                ("carnivores", cell.state.carnivores()),
                ("preference", cell.preference),
                ("tourism", cell.tourism),
            ];
            for (layer, value) in named {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::NegativeValue {
                        layer: layer.into(),
                        value,
                        row,
                        col,
                    });
                }
                if cell.habitat == HabitatClass::Land && value != 0.0 {
                    return Err(Error::LandNotEmpty {
                        layer: layer.into(),
                        row,
                        col,
                    });
                }
            }
            let sum = cell.state.coral() + cell.state.turf();
            if sum > 1.0 {
                return Err(Error::CoverOverflow { sum, row, col });
            }
        }
        if self.fishable_count() == 0 {
            return Err(Error::NoFishableCells);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        row * self.n_cols + col
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_cols, idx % self.n_cols)
    }

    /// 8-neighbours as `(index, is_diagonal)`, orthogonal ones first.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        let (row, col) = self.coords(idx);
        OFFSETS
            .iter()
            .enumerate()
            .filter_map(move |(k, &(dr, dc))| {
                let r = row as isize + dr;
                let c = col as isize + dc;
                if r < 0 || c < 0 || r >= self.n_rows as isize || c >= self.n_cols as isize {
                    None
                } else {
                    Some((r as usize * self.n_cols + c as usize, k >= 4))
                }
            })
    }

    pub fn fishable_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors(idx)
            .map(|(n, _)| n)
            .filter(|&n| self.cells[n].habitat.is_fishable())
    }

    pub fn fishable_indices(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].habitat.is_fishable())
            .collect()
    }

    pub fn fishable_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.habitat.is_fishable())
            .count()
    }

    pub fn mpa_count(&self) -> usize {
        self.cells.iter().filter(|c| c.mpa).count()
    }

    pub fn count_habitat(&self, habitat: HabitatClass) -> usize {
        self.cells.iter().filter(|c| c.habitat == habitat).count()
    }

    /// Land cells with at least one fishable 8-neighbour.
    pub fn is_coastal_land(&self, idx: usize) -> bool {
        self.cells[idx].habitat == HabitatClass::Land
            && self.fishable_neighbors(idx).next().is_some()
    }

    /// Distinct district ids (excluding the sentinel), ascending.
    pub fn districts(&self) -> Vec<i32> {
        let mut ids: Vec<i32> = self
            .cells
            .iter()
            .map(|c| c.district)
            .filter(|&d| d != NO_DISTRICT)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Total fish biomass over fishable cells.
    pub fn total_fish_biomass(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.habitat.is_fishable())
            .map(Cell::fish_biomass)
            .sum()
    }
}
