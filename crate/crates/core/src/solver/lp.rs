//! Export of a tiling problem as an integer program in LP file format.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::logic::tile::Cost;
use crate::solver::{enumerate_placements, Objective, TilingProblem};

const LINE_BREAK_AT: usize = 200;

fn push_term(line: &mut String, out: &mut String, term: &str) {
    if line.len() + term.len() > LINE_BREAK_AT {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push_str("   ");
    }
    line.push_str(term);
}

/// Writes one binary per placement, one row per board cell (equality for
/// required cells, at most one cover for optional ones), the truncation
/// budget row, and the objective. A tile covering the whole board alone is
/// charged its LUTs only; a big-M row forbids it from sharing the board.
pub fn export_lp(problem: &TilingProblem) -> Result<String> {
    let board = &problem.board;
    let placements = enumerate_placements(board, &problem.tiles);
    let cells: Vec<Vec<usize>> = placements
        .iter()
        .map(|p| p.cells().map(|c| board.index(c)).collect())
        .collect();
    let n = board.cell_count() as usize;
    let mut by_cell = vec![Vec::new(); n];
    for (i, cs) in cells.iter().enumerate() {
        for &c in cs {
            by_cell[c].push(i);
        }
    }
    for c in board.cells() {
        if !board.is_optional(c) && by_cell[board.index(c)].is_empty() {
            return Err(Error::Infeasible(format!("no tile can cover cell {c}")));
        }
    }
    let lone: Vec<bool> = cells
        .iter()
        .map(|cs| {
            let mut covers = vec![false; n];
            cs.iter().for_each(|&c| covers[c] = true);
            let left: u128 = board
                .cells()
                .filter(|c| !covers[board.index(*c)])
                .map(|c| if board.is_optional(c) { 1u128 << c.rank() } else { u128::MAX })
                .fold(0, u128::saturating_add);
            left <= board.truncation_budget()
        })
        .collect();
    let special = |i: usize| lone[i] && problem.objective == Objective::PaperModel;

    let mut out = String::new();
    writeln!(out, "\\ tiling of a {} board, {} placements", board, placements.len()).unwrap();
    writeln!(out, "\\ library {}", problem.library_version).unwrap();
    out.push_str("Minimize\n");
    let mut line = String::from(" obj:");
    for (i, p) in placements.iter().enumerate() {
        let cost = if special(i) {
            Cost::luts(problem.tiles[p.tile].tile.cost_mult)
        } else {
            problem.placement_cost(p)
        };
        push_term(&mut line, &mut out, &format!(" + {cost} p{i}"));
    }
    out.push_str(&line);
    out.push_str("\nSubject To\n");
    for c in board.cells() {
        let k = board.index(c);
        if by_cell[k].is_empty() {
            continue;
        }
        let mut line = format!(" c_{}_{}:", c.x, c.y);
        for &i in &by_cell[k] {
            push_term(&mut line, &mut out, &format!(" + p{i}"));
        }
        out.push_str(&line);
        out.push_str(if board.is_optional(c) { " <= 1\n" } else { " = 1\n" });
    }
    if board.trunc > 0 {
        // sum of weight * (1 - covered) over optional cells <= budget,
        // with the constant moved to the right-hand side
        let total: u128 = board.optional().iter().map(|c| 1u128 << c.rank()).sum();
        let budget = board.truncation_budget();
        writeln!(out, "\\ uncovered optional weight <= {budget}").unwrap();
        let mut line = String::from(" trunc:");
        for (i, cs) in cells.iter().enumerate() {
            let w: u128 = cs
                .iter()
                .map(|&k| board.cell(k))
                .filter(|c| board.is_optional(*c))
                .map(|c| 1u128 << c.rank())
                .sum();
            if w > 0 {
                push_term(&mut line, &mut out, &format!(" + {w} p{i}"));
            }
        }
        out.push_str(&line);
        writeln!(out, " >= {}", total.saturating_sub(budget)).unwrap();
    }
    let m = placements.len();
    for i in (0..m).filter(|&i| special(i)) {
        let mut line = format!(" alone_{i}: {m} p{i}");
        for j in (0..m).filter(|&j| j != i) {
            push_term(&mut line, &mut out, &format!(" + p{j}"));
        }
        out.push_str(&line);
        writeln!(out, " <= {m}").unwrap();
    }
    out.push_str("Binary\n");
    let mut line = String::new();
    for i in 0..m {
        push_term(&mut line, &mut out, &format!(" p{i}"));
    }
    out.push_str(&line);
    out.push_str("\nEnd\n");
    Ok(out)
}
