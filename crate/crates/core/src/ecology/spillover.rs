//! Export of fish biomass from cells near carrying capacity.
//!
//! Above `threshold * K`, the excess leaves the cell and is split equally
//! among its fishable 8-neighbours. All flows are computed from the state
//! at the start of the pass, so the result does not depend on cell order.
//! A receiver accepts at most `K - B` (its room before the pass); whatever
//! it rejects goes back to the sender, so no mass is created or destroyed
//! and no cell ends above `K`.

use super::TrophicGroup;
use crate::par::{map_indices, Execution};
use crate::world::WorldGrid;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpilloverReport {
    /// Biomass that left its source, per fish group.
    pub exported: [f64; 3],
    /// Biomass that was accepted by a neighbour, per fish group.
    pub moved: [f64; 3],
    /// Biomass sent back because receivers were full, per fish group.
    pub returned: [f64; 3],
}

impl SpilloverReport {
    pub fn total_moved(&self) -> f64 {
        self.moved.iter().sum()
    }
}

/// Per-cell update for the three fish groups.
type GroupTriple = ([f64; 3], [f64; 3], [f64; 3]);

pub fn apply_spillover(world: &mut WorldGrid, threshold: f64) -> SpilloverReport {
    spillover_with(world, threshold, Execution::Sequential)
}

pub(crate) fn spillover_with(
    world: &mut WorldGrid,
    threshold: f64,
    exec: Execution,
) -> SpilloverReport {
    let n = world.len();
    let w: &WorldGrid = world;

    // share sent to each fishable neighbour, per group
    let shares: Vec<[f64; 3]> = map_indices(exec, n, |i| {
        let cell = &w.cells[i];
        if !cell.habitat.is_fishable() {
            return [0.0; 3];
        }
        let k = w.fishable_neighbors(i).count();
        if k == 0 {
            return [0.0; 3];
        }
        let mut out = [0.0; 3];
        for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
            let limit = threshold * cell.carrying_capacity[slot];
            let b = cell.state[g];
            if b > limit {
                out[slot] = (b - limit) / k as f64;
            }
        }
        out
    });

    // fraction of its inflow each receiver accepts, and the accepted amount
    let intake: Vec<([f64; 3], [f64; 3])> = map_indices(exec, n, |j| {
        let cell = &w.cells[j];
        if !cell.habitat.is_fishable() {
            return ([1.0; 3], [0.0; 3]);
        }
        let mut inflow = [0.0; 3];
        for i in w.fishable_neighbors(j) {
            for (slot, v) in inflow.iter_mut().enumerate() {
                *v += shares[i][slot];
            }
        }
        let mut frac = [1.0; 3];
        let mut accepted = [0.0; 3];
        for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
            let room = (cell.carrying_capacity[slot] - cell.state[g]).max(0.0);
            if inflow[slot] > room {
                frac[slot] = room / inflow[slot];
                accepted[slot] = room;
            } else {
                accepted[slot] = inflow[slot];
            }
        }
        (frac, accepted)
    });

    // new state: own biomass - export + accepted inflow + rejected returns
    let updates: Vec<Option<GroupTriple>> = map_indices(exec, n, |i| {
        let cell = &w.cells[i];
        if !cell.habitat.is_fishable() {
            return None;
        }
        let k = w.fishable_neighbors(i).count() as f64;
        let mut exported = [0.0; 3];
        let mut returned = [0.0; 3];
        for (slot, e) in exported.iter_mut().enumerate() {
            *e = shares[i][slot] * k;
        }
        for j in w.fishable_neighbors(i) {
            for (slot, r) in returned.iter_mut().enumerate() {
                *r += shares[i][slot] * (1.0 - intake[j].0[slot]);
            }
        }
        let mut next = [0.0; 3];
        for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
            let kept = cell.state[g] - exported[slot];
            // bounded by K up to rounding; a cell already above K is left alone
            let cap = cell.carrying_capacity[slot].max(cell.state[g]);
            next[slot] = (kept + intake[i].1[slot] + returned[slot]).min(cap);
        }
        Some((next, exported, returned))
    });

    let mut report = SpilloverReport::default();
    for (cell, upd) in world.cells.iter_mut().zip(updates) {
        if let Some((next, exported, returned)) = upd {
            for (slot, g) in TrophicGroup::FISH.into_iter().enumerate() {
                cell.state[g] = next[slot];
                report.exported[slot] += exported[slot];
                report.returned[slot] += returned[slot];
            }
        }
    }
    for slot in 0..3 {
        report.moved[slot] = report.exported[slot] - report.returned[slot];
    }
    report
}
