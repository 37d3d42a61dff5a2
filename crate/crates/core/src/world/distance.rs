use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use super::WorldGrid;
use crate::error::{Error, Result};

/// Shortest navigable path length from one origin to every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub origin: usize,
    /// Metres; `f64::INFINITY` where unreachable.
    pub dist_m: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    idx: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties on index for a stable expansion order
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over navigable cells, 8-connected. Diagonal steps cost
/// `cell_size_m * sqrt(2)` and may not cut a corner: both orthogonal cells
/// they pass between must be navigable too.
pub fn distance_field(world: &WorldGrid, origin: usize) -> Result<DistanceField> {
    let navigable = |i: usize| world.cells[i].habitat.is_navigable();
    if origin >= world.len() || !navigable(origin) {
        let (row, col) = world.coords(origin.min(world.len().saturating_sub(1)));
        return Err(Error::NotNavigable { row, col });
    }
    let step = world.cell_size_m;
    let diag = world.cell_size_m * std::f64::consts::SQRT_2;

    let mut dist = vec![f64::INFINITY; world.len()];
    let mut heap = BinaryHeap::new();
    dist[origin] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        idx: origin,
    });

    while let Some(Frontier { dist: d, idx }) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let (row, col) = world.coords(idx);
        for (n, is_diag) in world.neighbors(idx) {
            if !navigable(n) {
                continue;
            }
            let cost = if is_diag {
                let (nr, nc) = world.coords(n);
                if !navigable(world.index(row, nc)) || !navigable(world.index(nr, col)) {
                    continue;
                }
                diag
            } else {
                step
            };
            let nd = d + cost;
            if nd < dist[n] {
                dist[n] = nd;
                heap.push(Frontier { dist: nd, idx: n });
            }
        }
    }
    Ok(DistanceField {
        origin,
        dist_m: dist,
    })
}

// Absorbs rounding in sums of diagonal steps.
const RADIUS_SLACK: f64 = 1e-9;

impl DistanceField {
    pub fn within(&self, idx: usize, radius_m: f64) -> bool {
        self.dist_m[idx] <= radius_m * (1.0 + RADIUS_SLACK)
    }

    /// Fishable cells within `radius_m`, ascending index, with distances.
    pub fn fishable_within(&self, world: &WorldGrid, radius_m: f64) -> Vec<(usize, f64)> {
        (0..world.len())
            .filter(|&i| world.cells[i].habitat.is_fishable() && self.within(i, radius_m))
            .map(|i| (i, self.dist_m[i]))
            .collect()
    }
}

/// All fishable cells within `radius_m` path distance of `origin`.
pub fn reachable_fishable_cells(
    world: &WorldGrid,
    origin: usize,
    radius_m: f64,
) -> Result<Vec<usize>> {
    if !(radius_m > 0.0) {
        return Err(Error::param("radius_m", format!("{radius_m} must be > 0")));
    }
    let field = distance_field(world, origin)?;
    Ok(field
        .fishable_within(world, radius_m)
        .into_iter()
        .map(|(i, _)| i)
        .collect())
}

/// Distance fields computed on first request per origin.
#[derive(Debug, Default)]
pub struct DistanceCache {
    fields: HashMap<usize, Arc<DistanceField>>,
}

impl DistanceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, world: &WorldGrid, origin: usize) -> Result<Arc<DistanceField>> {
        if let Some(f) = self.fields.get(&origin) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(distance_field(world, origin)?);
        self.fields.insert(origin, Arc::clone(&f));
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecology::CellState;
    use crate::world::testing::from_ascii;
    use proptest::prelude::*;

    fn st() -> CellState {
        CellState::new(0.2, 0.2, 100.0, 10.0, 30.0)
    }

    /// Independent oracle: Bellman-Ford style relaxation to a fixed point
    /// over every admissible move, no priority queue.
    fn relax_oracle(world: &WorldGrid, origin: usize) -> Vec<f64> {
        let nav = |i: usize| world.cells[i].habitat.is_navigable();
        let mut d = vec![f64::INFINITY; world.len()];
        d[origin] = 0.0;
        loop {
            let mut changed = false;
            for r in 0..world.n_rows as isize {
                for c in 0..world.n_cols as isize {
                    let a = (r as usize) * world.n_cols + c as usize;
                    if !nav(a) || d[a].is_infinite() {
                        continue;
                    }
                    for dr in -1isize..=1 {
                        for dc in -1isize..=1 {
                            if dr == 0 && dc == 0 {
                                continue;
                            }
                            let (nr, nc) = (r + dr, c + dc);
                            if nr < 0
                                || nc < 0
                                || nr >= world.n_rows as isize
                                || nc >= world.n_cols as isize
                            {
                                continue;
                            }
                            let b = nr as usize * world.n_cols + nc as usize;
                            if !nav(b) {
                                continue;
                            }
                            let cost = if dr != 0 && dc != 0 {
                                let s1 = r as usize * world.n_cols + nc as usize;
                                let s2 = nr as usize * world.n_cols + c as usize;
                                if !nav(s1) || !nav(s2) {
                                    continue;
                                }
                                100.0 * 2f64.sqrt()
                            } else {
                                100.0
                            };
                            if d[a] + cost < d[b] - 1e-12 {
                                d[b] = d[a] + cost;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return d;
            }
        }
    }

    // One-cell-wide lagoon and slope corridors split by a crest with a pass
    // at column 9: each lagoon cell above column 0 is ten orthogonal steps
    // from the pass.
    const CREST_MAP: &str = "
        ############
        ............
        =========p==
        ssssssssssss
        ############";

    #[test]
    fn origin_is_zero() {
        let w = from_ascii(CREST_MAP, st());
        let f = distance_field(&w, w.index(1, 3)).unwrap();
        assert_eq!(f.dist_m[w.index(1, 3)], 0.0);
    }

    #[test]
    fn crest_forces_detour_through_pass() {
        let w = from_ascii(CREST_MAP, st());
        let a = w.index(1, 0);
        let b = w.index(3, 0);
        let oracle = relax_oracle(&w, a);
        assert_eq!(oracle[b], 2000.0);
        let f = distance_field(&w, a).unwrap();
        assert_eq!(f.dist_m[b], 2000.0);
        assert_ne!(f.dist_m[b], 100.0);
    }

    #[test]
    fn enclosed_lagoon_is_unreachable() {
        let w = from_ascii(
            "
            ~~~~~~
            ~###~~
            ~#.#~~
            ~###~~
            ~~~~~~",
            st(),
        );
        let f = distance_field(&w, 0).unwrap();
        assert!(f.dist_m[w.index(2, 2)].is_infinite());
        assert!(f.dist_m[w.index(4, 5)].is_finite());
    }

    #[test]
    fn non_navigable_origin_is_an_error() {
        let w = from_ascii(CREST_MAP, st());
        assert!(matches!(
            distance_field(&w, w.index(0, 0)),
            Err(Error::NotNavigable { row: 0, col: 0 })
        ));
        assert!(matches!(
            distance_field(&w, w.index(2, 0)),
            Err(Error::NotNavigable { .. })
        ));
    }

    #[test]
    fn tiny_radius_yields_origin_only() {
        let w = from_ascii(CREST_MAP, st());
        let o = w.index(1, 4);
        assert_eq!(reachable_fishable_cells(&w, o, 50.0).unwrap(), vec![o]);
        assert!(reachable_fishable_cells(&w, o, 0.0).is_err());
    }

    #[test]
    fn large_radius_yields_connected_component() {
        let w = from_ascii(CREST_MAP, st());
        let o = w.index(1, 4);
        let oracle = relax_oracle(&w, o);
        let expected: Vec<usize> = (0..w.len())
            .filter(|&i| w.cells[i].habitat.is_fishable() && oracle[i].is_finite())
            .collect();
        assert_eq!(reachable_fishable_cells(&w, o, 10_000.0).unwrap(), expected);
    }

    #[test]
    fn matches_oracle_on_generated_island() {
        let spec = crate::world::IslandSpec {
            n_rows: 50,
            n_cols: 50,
            ..Default::default()
        };
        let w = crate::world::generate_synthetic_island(&spec, 3).unwrap();
        let origin = (0..w.len())
            .find(|&i| w.cells[i].habitat == crate::world::HabitatClass::Lagoon)
            .unwrap();
        let oracle = relax_oracle(&w, origin);
        let f = distance_field(&w, origin).unwrap();
        for (i, &o) in oracle.iter().enumerate() {
            if o.is_infinite() {
                assert!(f.dist_m[i].is_infinite());
            } else {
                assert!((o - f.dist_m[i]).abs() < 1e-6, "cell {i}");
            }
        }
        let reach_1km = reachable_fishable_cells(&w, origin, 1000.0).unwrap();
        let expected: Vec<usize> = (0..w.len())
            .filter(|&i| w.cells[i].habitat.is_fishable() && oracle[i] <= 1000.0 + 1e-6)
            .collect();
        assert_eq!(reach_1km, expected);
    }

    #[test]
    fn cache_reuses_fields() {
        let w = from_ascii(CREST_MAP, st());
        let mut cache = DistanceCache::new();
        let a = cache.get(&w, w.index(1, 1)).unwrap();
        let b = cache.get(&w, w.index(1, 1)).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.len(), 1);
    }

    fn open_map() -> WorldGrid {
        from_ascii(
            "
            ..#.....
            ..#..=..
            ........
            .##.ss..
            ....s...
            ~~~~~~~~",
            st(),
        )
    }

    proptest! {
        #[test]
        fn path_symmetry(a in 0usize..48, b in 0usize..48) {
            let w = open_map();
            prop_assume!(w.cells[a].habitat.is_navigable() && w.cells[b].habitat.is_navigable());
            let fa = distance_field(&w, a).unwrap();
            let fb = distance_field(&w, b).unwrap();
            prop_assert!((fa.dist_m[b] - fb.dist_m[a]).abs() < 1e-9);
        }

        #[test]
        fn reachable_set_grows_with_radius(o in 0usize..48, r1 in 1.0f64..800.0, extra in 0.0f64..800.0) {
            let w = open_map();
            prop_assume!(w.cells[o].habitat.is_navigable());
            let small = reachable_fishable_cells(&w, o, r1).unwrap();
            let big = reachable_fishable_cells(&w, o, r1 + extra).unwrap();
            prop_assert!(small.iter().all(|c| big.contains(c)));
        }
    }
}
