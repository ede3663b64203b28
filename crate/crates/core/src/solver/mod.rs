//! Cost-minimal exact covers of a multiplier board by library tiles.

mod bnb;
mod dual;
mod lp;

use std::time::Duration;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::{LibraryEntry, TileLibrary};
use crate::logic::tile::Cost;
use crate::shape::{Board, Cell, GridPattern};

pub use bnb::solve_placements;
pub use lp::export_lp;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Tile LUTs plus 0.65 LUT per output bit; a lone tile pays no
    /// compression.
    #[default]
    PaperModel,
    /// Tile LUTs only.
    TilesOnly,
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-model" | "paper" => Ok(Objective::PaperModel),
            "tiles-only" | "tiles" => Ok(Objective::TilesOnly),
            _ => Err(Error::Format(format!("unknown objective {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_nodes: Option<u64>,
    pub timeout: Option<Duration>,
}

impl Limits {
    pub fn nodes(n: u64) -> Self {
        Limits {
            max_nodes: Some(n),
            timeout: None,
        }
    }
}

/// One tile translated onto the board.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// Index into [`TilingProblem::tiles`].
    pub tile: usize,
    pub dx: u32,
    pub dy: u32,
    pub pattern: GridPattern,
}

impl Placement {
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.pattern.cells().map(|c| Cell::new(c.x + self.dx, c.y + self.dy))
    }
}

#[derive(Clone, Debug)]
pub struct TilingProblem {
    pub board: Board,
    /// Tiles usable on this board (library entries plus instantiated
    /// carry-chain rectangles).
    pub tiles: Vec<LibraryEntry>,
    pub objective: Objective,
    pub limits: Limits,
    pub library_version: String,
}

impl TilingProblem {
    pub fn new(board: Board, library: &TileLibrary) -> Result<Self> {
        let tiles = library.tiles_for_board(&board);
        if tiles.is_empty() {
            return Err(Error::Infeasible(format!("no library tile fits on {board}")));
        }
        Ok(TilingProblem {
            board,
            tiles,
            objective: Objective::PaperModel,
            limits: Limits::default(),
            library_version: library.version.clone(),
        })
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    /// Cost a placement contributes when it is not the only one.
    pub fn placement_cost(&self, p: &Placement) -> Cost {
        let t = &self.tiles[p.tile].tile;
        match self.objective {
            Objective::PaperModel => t.cost_tile(),
            Objective::TilesOnly => Cost::luts(t.cost_mult),
        }
    }

    /// Objective of a set of placements.
    pub fn objective_of(&self, placements: &[Placement]) -> Cost {
        match placements {
            [only] => Cost::luts(self.tiles[only.tile].tile.cost_mult),
            _ => placements.iter().map(|p| self.placement_cost(p)).sum(),
        }
    }
}

/// All in-bounds translations of every tile, ordered by tile, then row
/// offset, then column offset.
pub fn enumerate_placements(board: &Board, tiles: &[LibraryEntry]) -> Vec<Placement> {
    let mut out = Vec::new();
    for (i, e) in tiles.iter().enumerate() {
        let p = e.tile.pattern;
        if p.bound_x() > board.w_x || p.bound_y() > board.w_y {
            continue;
        }
        for dy in 0..=board.w_y - p.bound_y() {
            for dx in 0..=board.w_x - p.bound_x() {
                out.push(Placement {
                    tile: i,
                    dx,
                    dy,
                    pattern: p,
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSolution {
    pub board: Board,
    pub objective_mode: Objective,
    pub placements: Vec<Placement>,
    /// Objective value in LUTs.
    pub objective: Cost,
    /// Sum of the tiles' own LUT counts.
    pub tile_lut_cost: u32,
    /// 0.65 LUT per tile output bit, or zero for a single tile.
    pub comp_estimate: Cost,
    pub optimal: bool,
    pub uncovered: Vec<Cell>,
    /// Sum of the weights of the uncovered cells.
    pub compensation: u128,
    pub nodes: u64,
    pub library_version: String,
}

impl TilingSolution {
    pub fn objective_ratio(&self) -> Ratio<u64> {
        self.objective.as_ratio()
    }

    /// Checks exact coverage and the truncation budget.
    pub fn validate(&self, problem: &TilingProblem) -> Result<()> {
        let b = &problem.board;
        let mut hits = vec![0u32; b.cell_count() as usize];
        for p in &self.placements {
            for c in p.cells() {
                if c.x >= b.w_x || c.y >= b.w_y {
                    return Err(Error::Inconsistent(format!("placement leaves the board at {c}")));
                }
                hits[b.index(c)] += 1;
            }
        }
        let mut uncovered_weight = 0u128;
        for c in b.cells() {
            match hits[b.index(c)] {
                0 if !b.is_optional(c) => return Err(Error::Inconsistent(format!("cell {c} not covered"))),
                0 => uncovered_weight += 1u128 << c.rank(),
                1 => {}
                _ => return Err(Error::Inconsistent(format!("cell {c} covered twice"))),
            }
        }
        if uncovered_weight > b.truncation_budget() || uncovered_weight != self.compensation {
            return Err(Error::Inconsistent("truncation budget exceeded".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Exact cover of a full board.
pub fn solve(problem: &TilingProblem) -> Result<TilingSolution> {
    solve_with_start(problem, None)
}

/// Like [`solve`], on a board with truncated low-weight cells.
pub fn solve_truncated(problem: &TilingProblem) -> Result<TilingSolution> {
    if problem.board.trunc == 0 {
        return Err(Error::InvalidBoard("board is not truncated".into()));
    }
    solve_with_start(problem, None)
}

/// Solves starting from a known cover (cells of each placement given as
/// pattern + offset). The result is never worse than the start.
pub fn solve_with_start(problem: &TilingProblem, start: Option<&[Placement]>) -> Result<TilingSolution> {
    let placements = enumerate_placements(&problem.board, &problem.tiles);
    let start_ids = start.map(|s| {
        s.iter()
            .filter_map(|q| {
                placements
                    .iter()
                    .position(|p| p.pattern == q.pattern && p.dx == q.dx && p.dy == q.dy)
            })
            .collect::<Vec<_>>()
    });
    let out = solve_placements(problem, &placements, start_ids.as_deref())?;
    let chosen: Vec<Placement> = out.chosen.iter().map(|&i| placements[i].clone()).collect();
    let b = &problem.board;
    let mut covered = vec![false; b.cell_count() as usize];
    for p in &chosen {
        for c in p.cells() {
            covered[b.index(c)] = true;
        }
    }
    let uncovered: Vec<Cell> = b.cells().filter(|c| !covered[b.index(*c)]).collect();
    let compensation = uncovered.iter().map(|c| 1u128 << c.rank()).sum();
    let tile_lut_cost = chosen.iter().map(|p| problem.tiles[p.tile].tile.cost_mult).sum();
    let comp_estimate = if chosen.len() > 1 {
        chosen
            .iter()
            .map(|p| Cost::compression(problem.tiles[p.tile].tile.w_out))
            .sum()
    } else {
        Cost(0)
    };
    let sol = TilingSolution {
        board: *b,
        objective_mode: problem.objective,
        objective: problem.objective_of(&chosen),
        placements: chosen,
        tile_lut_cost,
        comp_estimate,
        optimal: out.optimal,
        uncovered,
        compensation,
        nodes: out.nodes,
        library_version: problem.library_version.clone(),
    };
    sol.validate(problem)?;
    Ok(sol)
}
