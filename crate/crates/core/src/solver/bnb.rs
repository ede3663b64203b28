//! Depth-first branch and bound over the exact-cover formulation.
//!
//! Cells with the fewest still-available placements are branched on first.
//! Two admissible bounds prune the tree: every open cell must be paid for
//! at least at the best cost-per-cell ratio among placements still able to
//! cover it, and the open area as a whole needs at least the cheapest
//! multiset of tile areas reaching it (unbounded knapsack). A third bound
//! prices cells with the dual of the linear relaxation, solved once at the
//! root; it is usually the tightest by far.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::solver::dual::{dual_prices, DualPrices};
use crate::solver::{Placement, TilingProblem};

/// Entries kept in the table of visited partial covers.
const MEMO_CAPACITY: usize = 6_000_000;

/// Longest the root relaxation may run before the search goes on without it.
const DUAL_TIME_CAP: Duration = Duration::from_secs(20);

/// Multiply-rotate hasher for the fixed-size cover keys.
#[derive(Default)]
struct FxHasher(u64);

impl Hasher for FxHasher {
    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut w = [0u8; 8];
            w[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(w));
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0.rotate_left(5) ^ v).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

pub struct SearchOutcome {
    pub chosen: Vec<usize>,
    pub cost_units: u32,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CellState {
    Open,
    Covered,
    Skipped,
}

struct Search<'a> {
    cells: Vec<Vec<u32>>, // cells of each placement
    cost: Vec<u32>,
    single_cost: Vec<u32>,
    ratio: Vec<f64>,
    by_cell: Vec<Vec<u32>>, // placements per cell, best ratio first
    optional: Vec<bool>,
    weight: Vec<u128>,
    budget: u128,
    knap: Vec<u32>,
    dual: DualPrices,
    reduced: Vec<f64>,

    blocked: Vec<u32>,
    avail: Vec<u32>,
    state: Vec<CellState>,
    skipped_weight: u128,
    chosen: Vec<u32>,
    so_far: u32,

    occupied: [u64; 4],
    skipped: [u64; 4],
    seen: Option<HashMap<([u64; 4], [u64; 4]), u32, BuildHasherDefault<FxHasher>>>,

    best: Option<(u32, Vec<u32>)>,
    nodes: u64,
    aborted: bool,
    limits: &'a crate::solver::Limits,
    started: Instant,
}

impl Search<'_> {
    fn occupy(&mut self, c: usize, st: CellState) {
        debug_assert!(self.state[c] == CellState::Open);
        self.state[c] = st;
        if c < 256 {
            self.occupied[c / 64] ^= 1 << (c % 64);
            if st == CellState::Skipped {
                self.skipped[c / 64] ^= 1 << (c % 64);
            }
        }
        for k in 0..self.by_cell[c].len() {
            let q = self.by_cell[c][k] as usize;
            self.blocked[q] += 1;
            if self.blocked[q] == 1 {
                for &c2 in &self.cells[q] {
                    self.avail[c2 as usize] -= 1;
                }
            }
        }
    }

    fn release(&mut self, c: usize) {
        for k in 0..self.by_cell[c].len() {
            let q = self.by_cell[c][k] as usize;
            self.blocked[q] -= 1;
            if self.blocked[q] == 0 {
                for &c2 in &self.cells[q] {
                    self.avail[c2 as usize] += 1;
                }
            }
        }
        if c < 256 {
            self.occupied[c / 64] ^= 1 << (c % 64);
            if self.state[c] == CellState::Skipped {
                self.skipped[c / 64] ^= 1 << (c % 64);
            }
        }
        self.state[c] = CellState::Open;
    }

    fn place(&mut self, p: usize) {
        for k in 0..self.cells[p].len() {
            let c = self.cells[p][k] as usize;
            self.occupy(c, CellState::Covered);
        }
        self.chosen.push(p as u32);
        self.so_far += self.cost[p];
    }

    fn unplace(&mut self, p: usize) {
        self.so_far -= self.cost[p];
        self.chosen.pop();
        for k in (0..self.cells[p].len()).rev() {
            let c = self.cells[p][k] as usize;
            self.release(c);
        }
    }

    fn budget_left(&self) -> u128 {
        self.budget - self.skipped_weight
    }

    /// An open cell that must still be covered: required, or optional but
    /// too heavy to leave out.
    fn must_cover(&self, c: usize) -> bool {
        self.state[c] == CellState::Open && (!self.optional[c] || self.weight[c] > self.budget_left())
    }

    fn first_available(&self, c: usize) -> Option<usize> {
        self.by_cell[c]
            .iter()
            .map(|&q| q as usize)
            .find(|&q| self.blocked[q] == 0)
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if let Some(n) = self.limits.max_nodes {
            if self.nodes >= n {
                self.aborted = true;
            }
        }
        if self.nodes % 1024 == 0 {
            if let Some(t) = self.limits.timeout {
                if self.started.elapsed() >= t {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    fn record_leaf(&mut self) {
        let value = match self.chosen.as_slice() {
            [only] => self.single_cost[*only as usize],
            _ => self.so_far,
        };
        if self.best.as_ref().map_or(true, |(b, _)| value < *b) {
            self.best = Some((value, self.chosen.clone()));
        }
    }

    fn dfs(&mut self) {
        if self.out_of_budget() {
            return;
        }
        self.nodes += 1;

        // bound, and the must-cover cell with the fewest options
        let mut ratio_sum = 0.0;
        let mut must_area = 0usize;
        let mut pick: Option<(u32, usize)> = None;
        let mut open_price = 0.0;
        let mut open_optional = 0u128;
        for c in 0..self.state.len() {
            if self.state[c] == CellState::Open {
                open_price += self.dual.cell[c];
                if self.optional[c] {
                    open_optional = open_optional.saturating_add(self.weight[c]);
                }
            }
            if !self.must_cover(c) {
                continue;
            }
            if self.avail[c] == 0 {
                return;
            }
            must_area += 1;
            let q = self.first_available(c).expect("available count is positive");
            ratio_sum += self.ratio[q];
            if pick.map_or(true, |(n, _)| self.avail[c] < n) {
                pick = Some((self.avail[c], c));
            }
        }
        if let Some((best, _)) = &self.best {
            // an improvement must cost at least one unit less than the incumbent
            let lb = (ratio_sum - 1e-6).ceil().max(0.0) as u32;
            let lb = lb.max(self.knap[must_area]);
            let shortfall = open_optional.saturating_sub(self.budget_left()) as f64;
            let dual = open_price + self.dual.trunc * shortfall;
            let lb = lb.max((dual - 1e-6).ceil().max(0.0) as u32);
            // lone tiles are priced below their multi-tile cost; such covers
            // are seeded into the incumbent before the search starts
            if self.so_far + lb >= *best {
                return;
            }
        }
        // a partial cover seen before carries a proven bound on the cost
        // still needed to complete it
        let key = (self.occupied, self.skipped);
        let memo_lb = self.seen.as_ref().and_then(|m| m.get(&key)).copied().unwrap_or(0);
        if let Some((best, _)) = &self.best {
            if self.so_far + memo_lb >= *best {
                return;
            }
        }
        self.expand(pick.map(|p| p.1));
        if !self.aborted && self.chosen.len() >= 2 {
            if let (Some(seen), Some((best, _))) = (&mut self.seen, &self.best) {
                // nothing cheaper than the incumbent completes this cover
                let lb = best.saturating_sub(self.so_far);
                let full = seen.len() >= MEMO_CAPACITY;
                match seen.get_mut(&key) {
                    Some(g) => *g = (*g).max(lb),
                    None if !full => {
                        seen.insert(key, lb);
                    }
                    None => {}
                }
            }
        }
    }

    /// Unblocked placements through `c`, smallest reduced cost first.
    fn options(&self, c: usize) -> Vec<usize> {
        let mut options: Vec<usize> = self.by_cell[c]
            .iter()
            .map(|&q| q as usize)
            .filter(|&q| self.blocked[q] == 0)
            .collect();
        options.sort_by(|&a, &b| self.reduced[a].total_cmp(&self.reduced[b]).then(a.cmp(&b)));
        options
    }

    fn expand(&mut self, pick: Option<usize>) {
        if let Some(c) = pick {
            let options = self.options(c);
            for q in options {
                self.place(q);
                self.dfs();
                self.unplace(q);
                if self.aborted {
                    return;
                }
            }
            return;
        }

        // only optional cells are open; leave them if the budget allows
        let open_weight: u128 = (0..self.state.len())
            .filter(|&c| self.state[c] == CellState::Open)
            .map(|c| self.weight[c])
            .fold(0u128, u128::saturating_add);
        if open_weight <= self.budget_left() {
            self.record_leaf();
            return;
        }
        let c = (0..self.state.len())
            .filter(|&c| self.state[c] == CellState::Open)
            .max_by(|&a, &b| self.weight[a].cmp(&self.weight[b]).then(b.cmp(&a)))
            .expect("open weight is positive");
        self.occupy(c, CellState::Skipped);
        self.skipped_weight += self.weight[c];
        self.dfs();
        self.skipped_weight -= self.weight[c];
        self.release(c);
        if self.aborted {
            return;
        }
        for q in self.options(c) {
            self.place(q);
            self.dfs();
            self.unplace(q);
            if self.aborted {
                return;
            }
        }
    }
}

/// Minimum cost over areas `>= r` of tile multisets, for every `r <= n`.
fn knapsack(areas_costs: &[(u32, u32)], n: usize) -> Vec<u32> {
    let mut f = vec![u32::MAX; n + 1];
    f[0] = 0;
    for r in 1..=n {
        for &(a, c) in areas_costs {
            let rest = r.saturating_sub(a as usize);
            if f[rest] != u32::MAX {
                f[r] = f[r].min(f[rest] + c);
            }
        }
    }
    f
}

/// Searches over an explicit placement list. `start` optionally seeds the
/// incumbent with a valid cover.
pub fn solve_placements(problem: &TilingProblem, placements: &[Placement], start: Option<&[usize]>) -> Result<SearchOutcome> {
    let board = &problem.board;
    let n = board.cell_count() as usize;
    let cells: Vec<Vec<u32>> = placements
        .iter()
        .map(|p| p.cells().map(|c| board.index(c) as u32).collect())
        .collect();
    let cost: Vec<u32> = placements.iter().map(|p| problem.placement_cost(p).units()).collect();
    let single_cost: Vec<u32> = placements
        .iter()
        .map(|p| crate::logic::Cost::luts(problem.tiles[p.tile].tile.cost_mult).units())
        .collect();
    let ratio: Vec<f64> = (0..placements.len())
        .map(|i| cost[i] as f64 / cells[i].len() as f64)
        .collect();
    let mut by_cell: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, cs) in cells.iter().enumerate() {
        for &c in cs {
            by_cell[c as usize].push(i as u32);
        }
    }
    for list in &mut by_cell {
        list.sort_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            // exact comparison of cost/area
            (cost[a] as u64 * cells[b].len() as u64)
                .cmp(&(cost[b] as u64 * cells[a].len() as u64))
                .then(a.cmp(&b))
        });
    }
    let optional: Vec<bool> = board.cells().map(|c| board.is_optional(c)).collect();
    let weight: Vec<u128> = board.cells().map(|c| 1u128 << c.rank()).collect();
    for c in 0..n {
        if !optional[c] && by_cell[c].is_empty() {
            return Err(Error::Infeasible(format!("no tile can cover cell {}", board.cell(c))));
        }
    }
    let mut tile_shapes: Vec<(u32, u32)> = cells.iter().zip(&cost).map(|(c, &k)| (c.len() as u32, k)).collect();
    tile_shapes.sort_unstable();
    tile_shapes.dedup();
    let knap = knapsack(&tile_shapes, n);
    let avail: Vec<u32> = by_cell.iter().map(|l| l.len() as u32).collect();

    let optional_weight: Vec<f64> = cells
        .iter()
        .map(|cs| cs.iter().filter(|&&c| optional[c as usize]).map(|&c| weight[c as usize] as f64).sum())
        .collect();
    let total_optional: u128 = (0..n).filter(|&c| optional[c]).map(|c| weight[c]).sum();
    let need = total_optional.saturating_sub(board.truncation_budget()) as f64;
    let cap = problem
        .limits
        .timeout
        .map_or(DUAL_TIME_CAP, |t| DUAL_TIME_CAP.min(t / 4));
    let dual = dual_prices(n, &cells, &cost, &optional, &optional_weight, need, cap).unwrap_or_else(|| DualPrices::zero(n));
    let reduced: Vec<f64> = (0..cells.len())
        .map(|p| {
            let priced: f64 = cells[p].iter().map(|&c| dual.cell[c as usize]).sum();
            cost[p] as f64 - priced - dual.trunc * optional_weight[p]
        })
        .collect();

    let mut s = Search {
        cells,
        cost,
        single_cost,
        ratio,
        by_cell,
        optional,
        weight,
        budget: board.truncation_budget(),
        knap,
        dual,
        reduced,
        blocked: vec![0; placements.len()],
        avail,
        state: vec![CellState::Open; n],
        skipped_weight: 0,
        chosen: Vec::new(),
        so_far: 0,
        occupied: [0; 4],
        skipped: [0; 4],
        seen: (n <= 256).then(HashMap::default),
        best: None,
        nodes: 0,
        aborted: false,
        limits: &problem.limits,
        started: Instant::now(),
    };

    // lone tiles covering every required cell pay no compression
    for p in 0..placements.len() {
        let covered: std::collections::HashSet<u32> = s.cells[p].iter().copied().collect();
        let left: u128 = (0..n)
            .filter(|&c| !covered.contains(&(c as u32)))
            .map(|c| if s.optional[c] { s.weight[c] } else { u128::MAX })
            .fold(0u128, u128::saturating_add);
        if left <= s.budget && s.best.as_ref().map_or(true, |(b, _)| s.single_cost[p] < *b) {
            s.best = Some((s.single_cost[p], vec![p as u32]));
        }
    }
    if let Some(start) = start {
        if valid_cover(&s, start) {
            let value = match start {
                [only] => s.single_cost[*only],
                _ => start.iter().map(|&p| s.cost[p]).sum(),
            };
            if s.best.as_ref().map_or(true, |(b, _)| value < *b) {
                let mut ids: Vec<u32> = start.iter().map(|&p| p as u32).collect();
                ids.sort_unstable();
                s.best = Some((value, ids));
            }
        }
    }

    s.dfs();
    let optimal = !s.aborted;
    match s.best {
        Some((cost_units, mut chosen)) => {
            chosen.sort_unstable();
            Ok(SearchOutcome {
                chosen: chosen.into_iter().map(|p| p as usize).collect(),
                cost_units,
                optimal,
                nodes: s.nodes,
            })
        }
        None if optimal => Err(Error::Infeasible(format!("no exact cover of {board} exists"))),
        None => Err(Error::Infeasible(format!("no cover of {board} found within the search limits"))),
    }
}

fn valid_cover(s: &Search<'_>, ids: &[usize]) -> bool {
    let n = s.state.len();
    let mut hits = vec![0u8; n];
    for &p in ids {
        if p >= s.cells.len() {
            return false;
        }
        for &c in &s.cells[p] {
            hits[c as usize] += 1;
        }
    }
    let mut left = 0u128;
    for c in 0..n {
        match hits[c] {
            0 if s.optional[c] => left += s.weight[c],
            0 => return false,
            1 => {}
            _ => return false,
        }
    }
    left <= s.budget
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knapsack_reaches_at_least_r() {
        let f = knapsack(&[(2, 3), (3, 4)], 7);
        assert_eq!(f, [0, 3, 3, 4, 6, 7, 8, 10]);
    }
}
