//! End-to-end generation of one multiplier, and side-by-side comparisons of
//! tile libraries over ranges of board sizes.

use serde::{Deserialize, Serialize};

use crate::bitheap::{compress, compression_cost_report, heap_from_tiling, CompressionPlan, CompressorDef};
use crate::error::Result;
use crate::library::TileLibrary;
use crate::netlist::{build_netlist, Netlist};
use crate::shape::Board;
use crate::solver::{solve_with_start, Limits, Objective, TilingProblem, TilingSolution};

/// Everything generated for one board.
#[derive(Clone, Debug)]
pub struct Design {
    pub problem: TilingProblem,
    pub solution: TilingSolution,
    pub plan: CompressionPlan,
    pub netlist: Netlist,
}

impl Design {
    pub fn total_luts(&self) -> u32 {
        self.netlist.lut_count() as u32
    }
}

pub fn design(
    board: Board,
    library: &TileLibrary,
    objective: Objective,
    limits: Limits,
    compressors: &[CompressorDef],
) -> Result<Design> {
    let problem = TilingProblem::new(board, library)?
        .with_objective(objective)
        .with_limits(limits);
    let solution = solve_with_start(&problem, None)?;
    let heap = heap_from_tiling(&problem, &solution)?;
    let plan = compress(&heap, compressors)?;
    let netlist = build_netlist(&problem, &solution, &plan)?;
    Ok(Design {
        problem,
        solution,
        plan,
        netlist,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryResult {
    pub library_version: String,
    pub objective: f64,
    pub tile_luts: u32,
    pub compression_luts: u32,
    pub total_luts: u32,
    pub optimal: bool,
}

impl LibraryResult {
    fn of(d: &Design) -> Self {
        LibraryResult {
            library_version: d.solution.library_version.clone(),
            objective: d.solution.objective.as_f64(),
            tile_luts: d.solution.tile_lut_cost,
            compression_luts: compression_cost_report(&d.plan).lut_cost,
            total_luts: d.total_luts(),
            optimal: d.solution.optimal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub board: Board,
    pub a: LibraryResult,
    pub b: LibraryResult,
    /// `(b - a) / b` on the objective: positive when library A is cheaper.
    pub objective_gain: f64,
    /// The same on netlist LUTs.
    pub lut_gain: f64,
}

fn gain(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        (b - a) / b
    }
}

pub fn compare_tilesets(
    board: Board,
    lib_a: &TileLibrary,
    lib_b: &TileLibrary,
    limits: Limits,
    compressors: &[CompressorDef],
) -> Result<Comparison> {
    let da = design(board, lib_a, Objective::PaperModel, limits, compressors)?;
    let db = design(board, lib_b, Objective::PaperModel, limits, compressors)?;
    let (a, b) = (LibraryResult::of(&da), LibraryResult::of(&db));
    Ok(Comparison {
        board,
        objective_gain: gain(a.objective, b.objective),
        lut_gain: gain(a.total_luts as f64, b.total_luts as f64),
        a,
        b,
    })
}

/// Comparisons for every board `w_x × w_y` with `1 <= w_y <= w_x <= max`
/// (the products are symmetric), optionally truncated at `t = w_x` when
/// `truncate` is set.
pub fn table(
    max: u32,
    truncate: bool,
    lib_a: &TileLibrary,
    lib_b: &TileLibrary,
    limits: Limits,
    compressors: &[CompressorDef],
) -> Result<Vec<Comparison>> {
    let mut rows = Vec::new();
    for w_x in 1..=max {
        for w_y in 1..=w_x {
            let t = if truncate && w_y == w_x { w_x } else { 0 };
            if truncate && t == 0 {
                continue;
            }
            let board = Board::truncated(w_x, w_y, t)?;
            rows.push(compare_tilesets(board, lib_a, lib_b, limits, compressors)?);
        }
    }
    Ok(rows)
}

/// Plain-text grid of a table: one line per board.
pub fn render_table(rows: &[Comparison]) -> String {
    let mut s = format!(
        "{:<10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8}\n",
        "board", "obj A", "obj B", "gain", "LUT A", "LUT B", "gain"
    );
    for r in rows {
        let star = |opt: bool| if opt { "" } else { "*" };
        s.push_str(&format!(
            "{:<10} {:>9.2}{} {:>9.2}{} {:>7.1}% {:>8} {:>8} {:>7.1}%\n",
            r.board.to_string(),
            r.a.objective,
            star(r.a.optimal),
            r.b.objective,
            star(r.b.optimal),
            100.0 * r.objective_gain,
            r.a.total_luts,
            r.b.total_luts,
            100.0 * r.lut_gain
        ));
    }
    s
}
