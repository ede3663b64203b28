//! Exhaustive enumeration of small product patterns and their grouping into
//! efficiency classes.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::library::{rectangular_base, CarryFamily, Provenance, TileLibrary};
use crate::logic::tile::{best_logic_variant, describe_tile, efficiency, Cost, Efficiency};
use crate::shape::{canonicalize, Board, Cell, GridPattern, Signedness};
use crate::solver::{solve_with_start, Limits, Placement, TilingProblem};

/// Largest window the search accepts. Above 4×4 the sweep gets expensive
/// and patterns with more than eight operand bits are skipped.
pub const MAX_SEARCH_SIDE: u32 = 5;

/// Metrics of one canonical pattern from the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternEval {
    /// Tight canonical pattern.
    pub pattern: GridPattern,
    pub cost_mult: u32,
    pub w_out: u32,
    pub separate: Option<Cell>,
}

impl PatternEval {
    pub fn cost(&self) -> Cost {
        Cost::tile(self.cost_mult, self.w_out)
    }

    pub fn efficiency(&self) -> Efficiency {
        efficiency(self.pattern.area(), self.cost())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfficiencyClass {
    pub efficiency: Efficiency,
    /// Tight canonical patterns, ordered by window index.
    pub members: Vec<GridPattern>,
}

/// Result of a sweep: every realisable canonical pattern plus the number
/// rejected because some output needs more than seven LUT inputs.
#[derive(Clone, Debug)]
pub struct Census {
    pub bound_x: u32,
    pub bound_y: u32,
    pub signedness: Signedness,
    pub evals: Vec<PatternEval>,
    pub unrealisable: usize,
}

impl Census {
    pub fn classes(&self) -> Vec<EfficiencyClass> {
        classify(&self.evals)
    }

    pub fn canonical_count(&self) -> usize {
        self.evals.len() + self.unrealisable
    }
}

fn canonical_in_window(mask: u128, bx: u32, by: u32) -> bool {
    let row0 = (1u128 << bx) - 1;
    let col0: u128 = (0..by).map(|y| 1u128 << (y * bx)).sum();
    mask & row0 != 0 && mask & col0 != 0
}

/// Evaluates every canonical non-empty pattern of the `bx × by` window.
/// Output order follows the window mask and does not depend on the number
/// of worker threads.
pub fn sweep(bx: u32, by: u32, s: Signedness) -> Result<Census> {
    if bx == 0 || by == 0 || bx > MAX_SEARCH_SIDE || by > MAX_SEARCH_SIDE {
        return Err(Error::InvalidPattern(format!(
            "search window {bx}x{by} outside 1..={MAX_SEARCH_SIDE}"
        )));
    }
    let total = 1u64 << (bx * by);
    let results: Vec<Option<PatternEval>> = (1..total)
        .into_par_iter()
        .filter(|&m| canonical_in_window(m as u128, bx, by))
        .map(|m| {
            let p = GridPattern::new(bx, by, m as u128).expect("mask inside window").tight();
            match best_logic_variant(&p, s) {
                Ok(v) => Some(PatternEval {
                    pattern: p,
                    cost_mult: v.cost_mult,
                    w_out: v.w_out,
                    separate: v.separate,
                }),
                Err(Error::SupportTooLarge(_)) | Err(Error::TooManyInputs { .. }) => None,
                Err(e) => panic!("unexpected evaluation failure on {p:?}: {e}"),
            }
        })
        .collect();
    let unrealisable = results.iter().filter(|r| r.is_none()).count();
    Ok(Census {
        bound_x: bx,
        bound_y: by,
        signedness: s,
        evals: results.into_iter().flatten().collect(),
        unrealisable,
    })
}

/// Groups evaluated patterns by exact efficiency, best class first.
pub fn classify(evals: &[PatternEval]) -> Vec<EfficiencyClass> {
    let mut by_e: BTreeMap<std::cmp::Reverse<Efficiency>, Vec<GridPattern>> = BTreeMap::new();
    for e in evals {
        by_e.entry(std::cmp::Reverse(e.efficiency())).or_default().push(e.pattern);
    }
    by_e.into_iter()
        .map(|(std::cmp::Reverse(efficiency), members)| EfficiencyClass { efficiency, members })
        .collect()
}

pub fn enumerate_and_classify(bx: u32, by: u32, s: Signedness) -> Result<Vec<EfficiencyClass>> {
    Ok(sweep(bx, by, s)?.classes())
}

/// Classes strictly above `threshold`.
pub fn classes_above(classes: &[EfficiencyClass], threshold: Efficiency) -> Vec<EfficiencyClass> {
    classes.iter().filter(|c| c.efficiency > threshold).cloned().collect()
}

pub fn one() -> Efficiency {
    Ratio::from_integer(1)
}

/// Looks for a split of `cells` into two non-empty parts that are both
/// known patterns and together cost no more than `budget`.
fn decomposes(cells: &[Cell], budget: Cost, parts: &HashMap<GridPattern, Cost>) -> bool {
    let n = cells.len();
    if n < 2 || n > 24 {
        return false;
    }
    let cost_of = |sel: u32| -> Option<Cost> {
        let part: Vec<Cell> = (0..n).filter(|&i| sel >> i & 1 == 1).map(|i| cells[i]).collect();
        let p = GridPattern::from_cells(&part).ok()?;
        parts.get(&canonicalize(&p).ok()?.tight()).copied()
    };
    let full = (1u32 << n) - 1;
    // the part holding cell 0 is enumerated; its complement is the other
    (1..full).filter(|a| a & 1 == 1).any(|a| match cost_of(a) {
        Some(ca) if ca <= budget => cost_of(full & !a).is_some_and(|cb| ca + cb <= budget),
        _ => false,
    })
}

/// Removes searched patterns whose cells split into two known patterns with
/// combined cost at most their own, repeating until nothing changes. Parts
/// are the surviving patterns together with `base`.
pub fn prune_redundant(classes: &[EfficiencyClass], base: &TileLibrary) -> Result<TileLibrary> {
    let mut alive: Vec<(GridPattern, Cost)> = Vec::new();
    for class in classes {
        for p in &class.members {
            let d = describe_tile(p, Signedness::UNSIGNED)?;
            alive.push((d.pattern, d.cost_tile()));
        }
    }
    let base_costs = base.cost_map();
    loop {
        let mut parts = base_costs.clone();
        for (p, c) in &alive {
            parts.entry(*p).and_modify(|o| *o = (*o).min(*c)).or_insert(*c);
        }
        let redundant: Vec<bool> = alive
            .par_iter()
            .map(|(p, c)| {
                let cells: Vec<Cell> = p.cells().collect();
                decomposes(&cells, *c, &parts)
            })
            .collect();
        if !redundant.contains(&true) {
            break;
        }
        let mut r = redundant.into_iter();
        alive.retain(|_| !r.next().expect("one flag per tile"));
    }
    let mut lib = TileLibrary::new("searched");
    for (p, _) in alive {
        lib.insert(describe_tile(&p, Signedness::UNSIGNED)?, Provenance::Searched);
    }
    Ok(lib)
}

/// Adds the 1×1 tile and every two-cell pattern of the 4×4 window.
pub fn augment_helpers(lib: &mut TileLibrary) -> Result<usize> {
    let mut added = 0;
    let mut helpers = vec![GridPattern::rect(1, 1)?];
    for a in 0..16u32 {
        for b in a + 1..16 {
            let m = 1u128 << a | 1u128 << b;
            if canonical_in_window(m, 4, 4) {
                helpers.push(GridPattern::new(4, 4, m)?.tight());
            }
        }
    }
    for p in helpers {
        if lib.insert(describe_tile(&p, Signedness::UNSIGNED)?, Provenance::Helper) {
            added += 1;
        }
    }
    Ok(added)
}

/// One round of [`prune_unused`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneRound {
    /// Library size entering the round.
    pub entries: usize,
    /// Entries used by at least one benchmark solution.
    pub used: usize,
    /// Boards whose search hit the limits.
    pub unproven: Vec<Board>,
}

#[derive(Clone, Debug)]
pub struct PruneOutcome {
    pub library: TileLibrary,
    pub rounds: Vec<PruneRound>,
}

impl PruneOutcome {
    /// Library sizes: the input, then after every round.
    pub fn census(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.rounds.iter().map(|r| r.entries).collect();
        out.push(self.library.len());
        out
    }
}

/// Solves every benchmark board and drops the entries no solution uses,
/// repeating until every remaining entry is used. Rectangular base tiles
/// are never dropped. A board whose search hits `limits` vetoes pruning for
/// that round: its optimum is unknown, so any entry could be needed.
pub fn prune_unused(lib: &TileLibrary, boards: &[Board], limits: Limits) -> Result<PruneOutcome> {
    let mut lib = lib.clone();
    let mut rounds = Vec::new();
    let mut starts: HashMap<Board, Vec<Placement>> = HashMap::new();
    loop {
        let mut used: std::collections::HashSet<GridPattern> = std::collections::HashSet::new();
        let mut unproven = Vec::new();
        for b in boards {
            let problem = TilingProblem::new(*b, &lib)?.with_limits(limits);
            let sol = solve_with_start(&problem, starts.get(b).map(|v| v.as_slice()))?;
            if !sol.optimal {
                unproven.push(*b);
            }
            used.extend(sol.placements.iter().map(|p| problem.tiles[p.tile].tile.pattern));
            starts.insert(*b, sol.placements);
        }
        let keep = |e: &crate::library::LibraryEntry| {
            e.provenance == Provenance::RectangularBase || used.contains(&e.tile.pattern)
        };
        let n_used = lib.entries().iter().filter(|e| keep(e)).count();
        rounds.push(PruneRound {
            entries: lib.len(),
            used: n_used,
            unproven: unproven.clone(),
        });
        if !unproven.is_empty() || n_used == lib.len() {
            break;
        }
        lib.retain(keep);
    }
    Ok(PruneOutcome { library: lib, rounds })
}

/// The rectangular base with the carry-chain family: the reference tile set.
pub fn rectangular_library() -> TileLibrary {
    let mut lib = TileLibrary::new("rectangular");
    for t in rectangular_base() {
        lib.insert(t, Provenance::RectangularBase);
    }
    lib.family = Some(CarryFamily { min_k: 2 });
    lib
}

/// Searched tiles above unit efficiency with redundant ones removed, plus
/// helpers, the rectangular base and the carry-chain family.
pub fn candidate_library() -> Result<TileLibrary> {
    let classes = classes_above(&enumerate_and_classify(4, 4, Signedness::UNSIGNED)?, one());
    let mut lib = rectangular_library();
    // base shapes keep their provenance even when the search finds them too
    for e in prune_redundant(&classes, &lib)?.entries() {
        lib.insert(e.tile.clone(), e.provenance);
    }
    augment_helpers(&mut lib)?;
    lib.version = "candidates".into();
    Ok(lib)
}

/// Every board from 1×1 to `n`×`n`.
pub fn benchmark_boards(n: u32) -> Vec<Board> {
    (1..=n)
        .flat_map(|w_y| (1..=n).map(move |w_x| Board::new(w_x, w_y).expect("positive dimensions")))
        .collect()
}

/// The full pipeline behind the shipped library: candidates pruned against
/// all boards up to `n`×`n`.
pub fn build_default_library(n: u32, limits: Limits) -> Result<PruneOutcome> {
    let mut out = prune_unused(&candidate_library()?, &benchmark_boards(n), limits)?;
    out.library.version = format!("default-n{n}");
    out.library.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::rectangular_base;

    #[test]
    fn one_by_one_window() {
        let classes = enumerate_and_classify(1, 1, Signedness::UNSIGNED).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].efficiency, Ratio::new(20, 33));
    }

    #[test]
    fn two_by_two_census() {
        let c = sweep(2, 2, Signedness::UNSIGNED).unwrap();
        // canonical masks of a 2x2 window: all non-empty masks touching
        // row 0 and column 0
        let brute = (1u32..16).filter(|m| m & 3 != 0 && m & 5 != 0).count();
        assert_eq!(c.canonical_count(), brute);
        let best = &c.classes()[0];
        assert_eq!(best.efficiency, Ratio::new(20, 23));
        // 2x2, both dominoes and both diagonals all reach 2/2.3
        assert_eq!(best.members.len(), 5);
        assert!(best.members.contains(&GridPattern::rect(2, 2).unwrap()));
    }

    #[test]
    fn distant_pair_versus_two_singles() {
        // two cells three columns apart pack into one LUT: 2.3 < 3.3
        let mut base = TileLibrary::new("b");
        for t in rectangular_base() {
            base.insert(t, Provenance::RectangularBase);
        }
        let pair = GridPattern::parse_rows(&["#..#"]).unwrap();
        let e = best_logic_variant(&pair, Signedness::UNSIGNED).unwrap();
        assert_eq!(e.cost(), Cost::tile(1, 2));
        let class = EfficiencyClass {
            efficiency: efficiency(2, e.cost()),
            members: vec![pair],
        };
        assert_eq!(prune_redundant(&[class.clone()], &base).unwrap().len(), 1);
        // with a free-standing cheaper single the pair does decompose
        let parts = HashMap::from([(GridPattern::rect(1, 1).unwrap(), Cost(23))]);
        assert!(decomposes(&pair.cells().collect::<Vec<_>>(), e.cost(), &parts));
    }

    #[test]
    fn motivational_tile_survives_base() {
        let mut base = TileLibrary::new("b");
        for t in rectangular_base() {
            base.insert(t, Provenance::RectangularBase);
        }
        let p = GridPattern::parse_rows(&["###", "##."]).unwrap();
        let class = EfficiencyClass {
            efficiency: Ratio::new(25, 23),
            members: vec![p],
        };
        assert_eq!(prune_redundant(&[class], &base).unwrap().len(), 1);
    }

    #[test]
    fn helpers() {
        let mut lib = TileLibrary::new("h");
        let n = augment_helpers(&mut lib).unwrap();
        // 1x1 plus the distinct canonical two-cell shapes of a 4x4 window
        assert_eq!(n, lib.len());
        let diag = lib.find(&GridPattern::parse_rows(&["#.", ".#"]).unwrap(), Signedness::UNSIGNED).unwrap();
        assert_eq!((diag.tile.cost_mult, diag.tile.w_out), (1, 2));
        assert_eq!(diag.tile.efficiency(), Ratio::new(40, 46));
        assert_eq!(augment_helpers(&mut lib).unwrap(), 0);
    }
}
