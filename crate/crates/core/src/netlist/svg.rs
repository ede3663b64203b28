//! Drawing of a tiling. The board is drawn the way multiplier dot diagrams
//! usually are: `x0` in the rightmost column, `y0` in the top row.

use std::collections::HashSet;
use std::fmt::Write;

use crate::shape::Cell;
use crate::solver::{TilingProblem, TilingSolution};

const CELL: u32 = 24;
const MARGIN: u32 = 16;

const PALETTE: [&str; 10] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#ccebc5",
];

pub fn emit_svg(problem: &TilingProblem, solution: &TilingSolution) -> String {
    let b = solution.board;
    let w = b.w_x * CELL + 2 * MARGIN;
    let h = b.w_y * CELL + 2 * MARGIN;
    let left = |c: Cell| MARGIN + (b.w_x - 1 - c.x) * CELL;
    let top = |c: Cell| MARGIN + c.y * CELL;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        s,
        "<title>{b}: {} tiles, {} tile LUTs</title>",
        solution.placements.len(),
        solution.tile_lut_cost
    );
    s.push_str(
        "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" \
         patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#999\" \
         stroke-width=\"2\"/></pattern></defs>\n",
    );
    let _ = writeln!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#ccc\"/>",
        b.w_x * CELL,
        b.w_y * CELL
    );
    for c in &solution.uncovered {
        let _ = writeln!(
            s,
            "<rect class=\"uncovered\" x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"url(#hatch)\"/>",
            left(*c),
            top(*c)
        );
    }
    for (i, p) in solution.placements.iter().enumerate() {
        let cells: HashSet<(u32, u32)> = p.cells().map(|c| (c.x, c.y)).collect();
        let mut d = String::new();
        for c in p.cells() {
            let (x0, y0) = (left(c), top(c));
            let (x1, y1) = (x0 + CELL, y0 + CELL);
            // drawn edges are the cell sides without a neighbour in the tile;
            // x grows to the left on screen
            let sides = [
                ((c.x, c.y.wrapping_sub(1)), (x0, y0, x1, y0)),
                ((c.x, c.y + 1), (x0, y1, x1, y1)),
                ((c.x + 1, c.y), (x0, y0, x0, y1)),
                ((c.x.wrapping_sub(1), c.y), (x1, y0, x1, y1)),
            ];
            for (n, (ax, ay, bx, by)) in sides {
                if !cells.contains(&n) {
                    let _ = write!(d, "M{ax} {ay}L{bx} {by}");
                }
            }
        }
        let tile = problem.tiles.get(p.tile).map(|e| &e.tile);
        let label = tile.map_or_else(String::new, |t| format!("{} cells, {} LUTs", t.area, t.cost_mult));
        let fill = PALETTE[i % PALETTE.len()];
        for c in p.cells() {
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\"/>",
                left(c),
                top(c)
            );
        }
        let _ = writeln!(
            s,
            "<path class=\"tile\" data-placement=\"{i}\" d=\"{d}\" fill=\"none\" stroke=\"#000\" stroke-width=\"2\" stroke-linecap=\"square\"><title>{label}</title></path>"
        );
    }
    for x in 0..b.w_x {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">x{x}</text>",
            MARGIN + (b.w_x - 1 - x) * CELL + CELL / 2,
            MARGIN - 4
        );
    }
    for y in 0..b.w_y {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"9\">y{y}</text>",
            MARGIN + b.w_x * CELL + 2,
            MARGIN + y * CELL + CELL / 2 + 3
        );
    }
    s.push_str("</svg>\n");
    s
}
