use proptest::prelude::*;

use tilemul::bitheap::{compress, default_compressors, heap_from_tiling};
use tilemul::library::Provenance;
use tilemul::netlist::build_netlist;
use tilemul::search::rectangular_library;
use tilemul::solver::{
    enumerate_placements, export_lp, solve, solve_truncated, Limits, Objective, Placement, TilingProblem,
};
use tilemul::{describe_tile, Board, Cell, Cost, GridPattern, Signedness, TileLibrary};

fn library_of(patterns: &[GridPattern]) -> TileLibrary {
    let mut lib = TileLibrary::new("test");
    for p in patterns {
        lib.insert(describe_tile(p, Signedness::UNSIGNED).unwrap(), Provenance::Searched);
    }
    lib
}

fn rect(w: u32, h: u32) -> GridPattern {
    GridPattern::rect(w, h).unwrap()
}

fn l_shape() -> GridPattern {
    rect(3, 2).without(Cell::new(2, 1))
}

#[test]
fn placement_counts() {
    let count = |w, h, lib: &TileLibrary| {
        let b = Board::new(w, h).unwrap();
        enumerate_placements(&b, &lib.tiles_for_board(&b)).len()
    };
    assert_eq!(count(3, 3, &library_of(&[rect(3, 3)])), 1);
    assert_eq!(count(4, 4, &library_of(&[rect(3, 3)])), 4);
    // (6-3+1)(4-2+1) + (6-2+1)(4-3+1) = 12 + 10
    assert_eq!(count(6, 4, &library_of(&[rect(3, 2), rect(2, 3)])), 22);
}

#[test]
fn single_cell_board() {
    let p = TilingProblem::new(Board::new(1, 1).unwrap(), &TileLibrary::builtin().unwrap()).unwrap();
    let s = solve(&p).unwrap();
    assert_eq!(s.placements.len(), 1);
    assert_eq!(s.tile_lut_cost, 1);
    assert!(s.optimal);
}

#[test]
fn three_by_three_is_one_tile() {
    let p = TilingProblem::new(Board::new(3, 3).unwrap(), &TileLibrary::builtin().unwrap()).unwrap();
    let s = solve(&p).unwrap();
    assert_eq!(s.placements.len(), 1);
    assert_eq!(s.tile_lut_cost, 5);
    assert_eq!(s.comp_estimate, Cost(0));
    assert_eq!(s.objective, Cost::luts(5));
}

#[test]
fn one_by_seven_strip() {
    let p = TilingProblem::new(Board::new(1, 7).unwrap(), &TileLibrary::builtin().unwrap()).unwrap();
    let s = solve(&p).unwrap();
    assert_eq!(s.placements.len(), 4);
    for pl in &s.placements {
        assert!(pl.pattern.area() <= 2);
    }
    let plan = compress(&heap_from_tiling(&p, &s).unwrap(), &default_compressors()).unwrap();
    let nl = build_netlist(&p, &s, &plan).unwrap();
    assert_eq!(nl.lut_count(), 4);
}

#[test]
fn truncated_three_by_three() {
    let b = Board::truncated(3, 3, 1).unwrap();
    let p = TilingProblem::new(b, &TileLibrary::builtin().unwrap()).unwrap();
    let s = solve_truncated(&p).unwrap();
    s.validate(&p).unwrap();
    assert!(s.uncovered.iter().all(|c| *c == Cell::new(0, 0)));
    assert_eq!(s.compensation, s.uncovered.len() as u128);
    // t = 0 is not a truncated board
    let full = TilingProblem::new(Board::new(3, 3).unwrap(), &TileLibrary::builtin().unwrap()).unwrap();
    assert!(solve_truncated(&full).is_err());
}

#[test]
fn infeasible_board() {
    // a 2x2 tile alone cannot cover a 3x3 board
    let p = TilingProblem::new(Board::new(3, 3).unwrap(), &library_of(&[rect(2, 2)])).unwrap();
    assert!(solve(&p).is_err());
}

#[test]
fn lp_for_single_cells() {
    let p = TilingProblem::new(Board::new(2, 2).unwrap(), &library_of(&[rect(1, 1)])).unwrap();
    let lp = export_lp(&p).unwrap();
    let binaries = lp.split("Binary").nth(1).unwrap();
    assert_eq!(binaries.split_whitespace().filter(|t| t.starts_with('p')).count(), 4);
    assert_eq!(lp.lines().filter(|l| l.starts_with(" c_") && l.ends_with(" = 1")).count(), 4);
    let obj = lp.lines().find(|l| l.starts_with(" obj:")).unwrap();
    assert_eq!(obj.matches("+ 1.65 p").count(), 4);
}

#[test]
fn lp_truncation_row() {
    let b = Board::truncated(4, 4, 2).unwrap();
    let p = TilingProblem::new(b, &rectangular_library()).unwrap();
    let lp = export_lp(&p).unwrap();
    assert_eq!(lp.lines().filter(|l| l.starts_with(" trunc:")).count(), 1);
    assert!(lp.contains("uncovered optional weight <= 3"));
    // the row may wrap; it ends before the next unindented keyword
    let row: String = lp
        .lines()
        .skip_while(|l| !l.starts_with(" trunc:"))
        .take_while(|l| l.starts_with(' '))
        .collect();
    // optional cells (0,0), (1,0), (0,1) carry weight 1 + 2 + 2, so at
    // least 5 - 3 of it must be covered
    assert!(row.ends_with(">= 2"), "{row}");
}

/// Cheapest exact cover found by listing every cover, without bounds.
/// Optional cells may stay uncovered while their weight fits the budget.
fn brute_force(p: &TilingProblem) -> Option<Cost> {
    struct Walk<'a> {
        p: &'a TilingProblem,
        placements: Vec<Placement>,
        cells: Vec<Vec<usize>>,
        covered: Vec<bool>,
        chosen: Vec<Placement>,
        best: Option<Cost>,
    }

    impl Walk<'_> {
        fn rec(&mut self, skipped: u128) {
            let b = self.p.board;
            let Some(k) = (0..self.covered.len()).find(|&k| !self.covered[k]) else {
                let c = self.p.objective_of(&self.chosen);
                if self.best.is_none_or(|x| c < x) {
                    self.best = Some(c);
                }
                return;
            };
            for i in 0..self.placements.len() {
                let cs = self.cells[i].clone();
                if !cs.contains(&k) || cs.iter().any(|&c| self.covered[c]) {
                    continue;
                }
                cs.iter().for_each(|&c| self.covered[c] = true);
                self.chosen.push(self.placements[i].clone());
                self.rec(skipped);
                self.chosen.pop();
                cs.iter().for_each(|&c| self.covered[c] = false);
            }
            let cell = b.cell(k);
            let weight = skipped + (1u128 << cell.rank());
            if b.is_optional(cell) && weight <= b.truncation_budget() {
                self.covered[k] = true;
                self.rec(weight);
                self.covered[k] = false;
            }
        }
    }

    let b = p.board;
    let placements = enumerate_placements(&b, &p.tiles);
    let cells = placements.iter().map(|q| q.cells().map(|c| b.index(c)).collect()).collect();
    let mut walk = Walk {
        p,
        placements,
        cells,
        covered: vec![false; b.cell_count() as usize],
        chosen: Vec::new(),
        best: None,
    };
    walk.rec(0);
    walk.best
}

fn small_patterns() -> Vec<GridPattern> {
    vec![
        rect(2, 1),
        rect(1, 2),
        rect(2, 2),
        rect(3, 1),
        l_shape(),
        l_shape().transpose(),
        rect(2, 2).without(Cell::new(1, 1)),
        rect(3, 2),
        rect(2, 3),
        GridPattern::parse_rows(&["##.", ".##"]).unwrap(),
    ]
}

#[test]
fn matches_brute_force_on_small_boards() {
    let lib = library_of(&[rect(1, 1), rect(2, 1), l_shape()]);
    for w in 1..=4 {
        for h in 1..=4 {
            for t in [0, 1, 2] {
                if t >= w + h {
                    continue;
                }
                let b = Board::truncated(w, h, t).unwrap();
                let p = TilingProblem::new(b, &lib).unwrap();
                let s = solve(&p).unwrap();
                s.validate(&p).unwrap();
                assert!(s.optimal);
                assert_eq!(Some(s.objective), brute_force(&p), "{b}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_three_tile_libraries(a in 0usize..10, b in 0usize..10, w in 1u32..=4, h in 1u32..=4, tiles_only in any::<bool>()) {
        let pats = small_patterns();
        // the single cell keeps every board coverable
        let lib = library_of(&[rect(1, 1), pats[a], pats[b]]);
        let objective = if tiles_only { Objective::TilesOnly } else { Objective::PaperModel };
        let p = TilingProblem::new(Board::new(w, h).unwrap(), &lib).unwrap().with_objective(objective);
        let s = solve(&p).unwrap();
        s.validate(&p).unwrap();
        prop_assert_eq!(Some(s.objective), brute_force(&p));
    }

    #[test]
    fn every_solution_is_an_exact_cover(w in 1u32..=7, h in 1u32..=7, t in 0u32..6) {
        prop_assume!(t < w + h);
        let b = Board::truncated(w, h, t).unwrap();
        let p = TilingProblem::new(b, &TileLibrary::builtin().unwrap())
            .unwrap()
            .with_limits(Limits::nodes(20_000));
        let s = solve(&p).unwrap();
        let mut hits = vec![0u32; b.cell_count() as usize];
        for pl in &s.placements {
            for c in pl.cells() {
                hits[b.index(c)] += 1;
            }
        }
        for c in b.cells() {
            let k = hits[b.index(c)];
            if b.is_optional(c) {
                prop_assert!(k <= 1);
                prop_assert_eq!(k == 0, s.uncovered.contains(&c));
            } else {
                prop_assert_eq!(k, 1, "cell {} of {}", c, b);
            }
        }
        let uncovered: u128 = s.uncovered.iter().map(|c| 1u128 << c.rank()).sum();
        prop_assert!(uncovered <= b.truncation_budget());
        prop_assert_eq!(uncovered, s.compensation);
        prop_assert_eq!(s.objective, p.objective_of(&s.placements));
    }

    #[test]
    fn area_bound_is_admissible(w in 1u32..=6, h in 1u32..=6) {
        // covered area divided by the best efficiency never exceeds the optimum
        let lib = TileLibrary::builtin().unwrap();
        let b = Board::new(w, h).unwrap();
        let p = TilingProblem::new(b, &lib).unwrap();
        let s = solve(&p).unwrap();
        prop_assert!(s.optimal);
        let best = p.tiles.iter().map(|e| e.tile.efficiency()).max().unwrap();
        let area = b.cell_count() as u64;
        let bound = num_rational::Ratio::from_integer(area) / best.reduced();
        let single = s.placements.len() == 1;
        if !single {
            prop_assert!(bound <= s.objective.as_ratio());
        }
    }
}

#[test]
fn dominance_up_to_six() {
    let inc = TileLibrary::builtin().unwrap();
    let rect_lib = rectangular_library();
    for w in 1..=6 {
        for h in 1..=w {
            let b = Board::new(w, h).unwrap();
            let a = solve(&TilingProblem::new(b, &inc).unwrap()).unwrap();
            let r = solve(&TilingProblem::new(b, &rect_lib).unwrap()).unwrap();
            assert!(a.optimal && r.optimal);
            assert!(a.objective <= r.objective, "{b}: {} > {}", a.objective, r.objective);
        }
    }
}

#[test]
fn deterministic() {
    let lib = TileLibrary::builtin().unwrap();
    let p = TilingProblem::new(Board::new(7, 5).unwrap(), &lib).unwrap();
    let a = solve(&p).unwrap().to_json().unwrap();
    let b = solve(&p).unwrap().to_json().unwrap();
    assert_eq!(a, b);
}
