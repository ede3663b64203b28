//! Partial-product geometry: cells, patterns, boards.
//!
//! Cell `(x, y)` is the AND of operand bits `x_x` and `y_y` and carries weight
//! `2^(x+y)`. Patterns are stored as a row-major bitmask over a
//! `bound_x × bound_y` window (bit index `y * bound_x + x`), which is also the
//! enumeration index used by the tile search.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of cells a single pattern window may hold.
pub const MAX_PATTERN_CELLS: u32 = 128;

/// Largest supported board side.
pub const MAX_BOARD_SIDE: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Weight index `x + y`.
    pub const fn rank(self) -> u32 {
        self.x + self.y
    }

    pub fn weight(self) -> CellWeight {
        CellWeight {
            x: self.x,
            y: self.y,
            weight: 1u128 << self.rank(),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellWeight {
    pub x: u32,
    pub y: u32,
    pub weight: u128,
}

/// Signedness of the two operand vectors of a tile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signedness {
    pub x_signed: bool,
    pub y_signed: bool,
}

impl Signedness {
    pub const UNSIGNED: Signedness = Signedness {
        x_signed: false,
        y_signed: false,
    };

    pub const fn new(x_signed: bool, y_signed: bool) -> Self {
        Self { x_signed, y_signed }
    }

    pub const fn is_unsigned(self) -> bool {
        !self.x_signed && !self.y_signed
    }

    pub const ALL: [Signedness; 4] = [
        Signedness::new(false, false),
        Signedness::new(true, false),
        Signedness::new(false, true),
        Signedness::new(true, true),
    ];
}

impl fmt::Display for Signedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s| if s { 's' } else { 'u' };
        write!(f, "{}{}", c(self.x_signed), c(self.y_signed))
    }
}

/// Set of active partial-product cells inside a bounded window.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPattern {
    bound_x: u32,
    bound_y: u32,
    mask: u128,
}

impl GridPattern {
    pub fn new(bound_x: u32, bound_y: u32, mask: u128) -> Result<Self> {
        if bound_x == 0 || bound_y == 0 || bound_x * bound_y > MAX_PATTERN_CELLS {
            return Err(Error::InvalidPattern(format!(
                "window {bound_x}x{bound_y} outside 1..={MAX_PATTERN_CELLS} cells"
            )));
        }
        let n = bound_x * bound_y;
        if n < 128 && mask >> n != 0 {
            return Err(Error::InvalidPattern(format!(
                "mask {mask:#x} has cells outside the {bound_x}x{bound_y} window"
            )));
        }
        Ok(Self {
            bound_x,
            bound_y,
            mask,
        })
    }

    /// Pattern with the given cells and the tightest window anchored at the origin.
    pub fn from_cells(cells: &[Cell]) -> Result<Self> {
        let bx = cells.iter().map(|c| c.x + 1).max().unwrap_or(1);
        let by = cells.iter().map(|c| c.y + 1).max().unwrap_or(1);
        Self::from_cells_in(bx, by, cells)
    }

    pub fn from_cells_in(bound_x: u32, bound_y: u32, cells: &[Cell]) -> Result<Self> {
        let mut mask = 0u128;
        for c in cells {
            if c.x >= bound_x || c.y >= bound_y {
                return Err(Error::InvalidPattern(format!(
                    "cell {c} outside the {bound_x}x{bound_y} window"
                )));
            }
            mask |= 1u128 << (c.y * bound_x + c.x);
        }
        Self::new(bound_x, bound_y, mask)
    }

    /// Full `w × h` rectangle (`w` X bits, `h` Y bits).
    pub fn rect(w: u32, h: u32) -> Result<Self> {
        let cells: Vec<Cell> = (0..h).flat_map(|y| (0..w).map(move |x| Cell::new(x, y))).collect();
        Self::from_cells_in(w, h, &cells)
    }

    /// Parses rows of `#`/`.` characters, row `y` first, column `x` left to right.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let mut cells = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '#' => cells.push(Cell::new(x as u32, y as u32)),
                    '.' => {}
                    other => {
                        return Err(Error::InvalidPattern(format!("unexpected character {other:?}")))
                    }
                }
            }
        }
        Self::from_cells(&cells)
    }

    pub const fn bound_x(&self) -> u32 {
        self.bound_x
    }

    pub const fn bound_y(&self) -> u32 {
        self.bound_y
    }

    pub const fn mask(&self) -> u128 {
        self.mask
    }

    pub const fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.bound_x && c.y < self.bound_y && self.mask >> (c.y * self.bound_x + c.x) & 1 == 1
    }

    /// Active cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let bx = self.bound_x;
        let mut m = self.mask;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let i = m.trailing_zeros();
            m &= m - 1;
            Some(Cell::new(i % bx, i / bx))
        })
    }

    /// Distinct X bit indices used by active cells, ascending.
    pub fn x_bits(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.cells().map(|c| c.x).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct Y bit indices used by active cells, ascending.
    pub fn y_bits(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.cells().map(|c| c.y).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Width and height of the bounding box of the active cells, measured from the origin.
    pub fn extent(&self) -> (u32, u32) {
        let w = self.cells().map(|c| c.x + 1).max().unwrap_or(0);
        let h = self.cells().map(|c| c.y + 1).max().unwrap_or(0);
        (w, h)
    }

    pub fn is_canonical(&self) -> bool {
        !self.is_empty() && self.cells().any(|c| c.x == 0) && self.cells().any(|c| c.y == 0)
    }

    /// Same cells with the window shrunk to the bounding box.
    pub fn tight(&self) -> GridPattern {
        let (w, h) = self.extent();
        let cells: Vec<Cell> = self.cells().collect();
        GridPattern::from_cells_in(w.max(1), h.max(1), &cells).expect("tight window holds its cells")
    }

    pub fn transpose(&self) -> GridPattern {
        let cells: Vec<Cell> = self.cells().map(|c| Cell::new(c.y, c.x)).collect();
        GridPattern::from_cells_in(self.bound_y, self.bound_x, &cells).expect("transposed window")
    }

    /// Pattern with cell `c` removed.
    pub fn without(&self, c: Cell) -> GridPattern {
        let mut p = *self;
        if self.contains(c) {
            p.mask &= !(1u128 << (c.y * self.bound_x + c.x));
        }
        p
    }

    /// True when every active cell lies on a full `w × h` rectangle starting at the origin.
    pub fn is_rectangle(&self) -> bool {
        let (w, h) = self.extent();
        self.area() == w * h && self.is_canonical()
    }

    pub fn area(&self) -> u32 {
        self.mask.count_ones()
    }
}

impl fmt::Debug for GridPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridPattern({}x{} ", self.bound_x, self.bound_y)?;
        for y in 0..self.bound_y {
            if y > 0 {
                f.write_str("/")?;
            }
            for x in 0..self.bound_x {
                f.write_str(if self.contains(Cell::new(x, y)) { "#" } else { "." })?;
            }
        }
        f.write_str(")")
    }
}

impl fmt::Display for GridPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Number of active cells.
pub fn area(pattern: &GridPattern) -> u32 {
    pattern.area()
}

/// Translates the pattern so that its lowest active X and Y indices are zero.
/// The window is kept.
pub fn canonicalize(pattern: &GridPattern) -> Result<GridPattern> {
    if pattern.is_empty() {
        return Err(Error::InvalidPattern("cannot canonicalize an empty pattern".into()));
    }
    let dx = pattern.cells().map(|c| c.x).min().unwrap_or(0);
    let dy = pattern.cells().map(|c| c.y).min().unwrap_or(0);
    let cells: Vec<Cell> = pattern.cells().map(|c| Cell::new(c.x - dx, c.y - dy)).collect();
    GridPattern::from_cells_in(pattern.bound_x, pattern.bound_y, &cells)
}

/// Sign applied to the product at `c`: the top X bit (resp. Y bit) of a
/// signed operand has negative weight.
fn cell_sign(c: Cell, top_x: u32, top_y: u32, s: Signedness) -> i128 {
    let mut sign = 1;
    if s.x_signed && c.x == top_x {
        sign = -sign;
    }
    if s.y_signed && c.y == top_y {
        sign = -sign;
    }
    sign
}

/// Tight minimum and maximum of the tile value over all operand assignments.
///
/// Unsigned ranges are closed form. Signed ranges enumerate the operand side
/// with fewer distinct bits; for a fixed assignment of that side the value is
/// linear in the other side, so its extremes are found bit by bit.
pub fn value_range(pattern: &GridPattern, s: Signedness) -> (i128, i128) {
    if pattern.is_empty() {
        return (0, 0);
    }
    if s.is_unsigned() {
        let max: u128 = pattern.cells().map(|c| c.weight().weight).sum();
        return (0, max as i128);
    }
    let (w, h) = pattern.extent();
    let (top_x, top_y) = (w - 1, h - 1);
    let cells: Vec<Cell> = pattern.cells().collect();
    let xs = pattern.x_bits();
    let ys = pattern.y_bits();
    // enumerate the shorter side ("outer"), optimise the longer side bit by bit
    let transpose = xs.len() < ys.len();
    let (outer, inner) = if transpose { (&xs, &ys) } else { (&ys, &xs) };
    let mut lo = i128::MAX;
    let mut hi = i128::MIN;
    for a in 0u64..(1u64 << outer.len()) {
        let mut coef = vec![0i128; inner.len()];
        for c in &cells {
            let (o, i) = if transpose { (c.x, c.y) } else { (c.y, c.x) };
            let oi = outer.binary_search(&o).expect("outer bit");
            if a >> oi & 1 == 1 {
                let ii = inner.binary_search(&i).expect("inner bit");
                coef[ii] += cell_sign(*c, top_x, top_y, s) * (1i128 << c.rank());
            }
        }
        let max: i128 = coef.iter().filter(|&&v| v > 0).sum();
        let min: i128 = coef.iter().filter(|&&v| v < 0).sum();
        lo = lo.min(min);
        hi = hi.max(max);
    }
    (lo, hi)
}

/// Value of the tile for concrete operand assignments (`x` and `y` hold the
/// operand bits at their own indices).
pub fn evaluate(pattern: &GridPattern, s: Signedness, x: u128, y: u128) -> i128 {
    let (w, h) = pattern.extent();
    pattern
        .cells()
        .filter(|c| x >> c.x & 1 == 1 && y >> c.y & 1 == 1)
        .map(|c| cell_sign(c, w.saturating_sub(1), h.saturating_sub(1), s) * (1i128 << c.rank()))
        .sum()
}

/// Bits needed to hold every value in `[lo, hi]`; two's complement when `lo < 0`.
pub fn range_bits(lo: i128, hi: i128) -> u32 {
    if lo >= 0 {
        128 - (hi as u128).leading_zeros()
    } else {
        let mag = hi.max(-lo - 1) as u128;
        129 - mag.leading_zeros()
    }
}

/// Number of output bits the tile has to emit: bits of the (two's complement)
/// value that are not constant over all operand assignments.
///
/// Exhaustive up to 20 distinct operand bits; full rectangles use the closed
/// form; any other larger pattern falls back to the span between its lowest
/// weight and its range width.
pub fn output_width(pattern: &GridPattern, s: Signedness) -> u32 {
    if pattern.is_empty() {
        return 0;
    }
    let xs = pattern.x_bits();
    let ys = pattern.y_bits();
    let (lo, hi) = value_range(pattern, s);
    let width = range_bits(lo, hi);
    let n = xs.len() + ys.len();
    if n <= 20 {
        let modmask: u128 = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
        let mut seen_one = 0u128;
        let mut seen_zero = 0u128;
        for a in 0u64..(1u64 << n) {
            let mut xv = 0u128;
            for (i, b) in xs.iter().enumerate() {
                xv |= ((a >> i) as u128 & 1) << b;
            }
            let mut yv = 0u128;
            for (j, b) in ys.iter().enumerate() {
                yv |= ((a >> (xs.len() + j)) as u128 & 1) << b;
            }
            let v = evaluate(pattern, s, xv, yv) as u128 & modmask;
            seen_one |= v;
            seen_zero |= !v & modmask;
        }
        return (seen_one & seen_zero).count_ones();
    }
    if pattern.is_rectangle() || s.is_unsigned() {
        let low = pattern.cells().map(Cell::rank).min().unwrap_or(0);
        return width - low.min(width);
    }
    width
}

/// Multiplier board: a `w_x × w_y` grid of partial products, optionally
/// truncated below weight index `trunc`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Board {
    pub w_x: u32,
    pub w_y: u32,
    /// Output bits with weight below `2^trunc` are dropped; 0 for full multipliers.
    pub trunc: u32,
}

impl Board {
    pub fn new(w_x: u32, w_y: u32) -> Result<Self> {
        Self::truncated(w_x, w_y, 0)
    }

    pub fn truncated(w_x: u32, w_y: u32, trunc: u32) -> Result<Self> {
        if !(1..=MAX_BOARD_SIDE).contains(&w_x) || !(1..=MAX_BOARD_SIDE).contains(&w_y) {
            return Err(Error::InvalidBoard(format!(
                "{w_x}x{w_y} outside 1..={MAX_BOARD_SIDE}"
            )));
        }
        if trunc > 0 && trunc >= w_x + w_y {
            return Err(Error::InvalidBoard(format!(
                "truncation {trunc} must be below the product width {}",
                w_x + w_y
            )));
        }
        Ok(Self { w_x, w_y, trunc })
    }

    pub const fn cell_count(&self) -> u32 {
        self.w_x * self.w_y
    }

    pub const fn index(&self, c: Cell) -> usize {
        (c.y * self.w_x + c.x) as usize
    }

    pub const fn cell(&self, index: usize) -> Cell {
        Cell::new(index as u32 % self.w_x, index as u32 / self.w_x)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count() as usize).map(|i| self.cell(i))
    }

    /// Cells that may be left uncovered, subject to the truncation budget.
    pub fn is_optional(&self, c: Cell) -> bool {
        c.rank() < self.trunc
    }

    pub fn required(&self) -> Vec<Cell> {
        self.cells().filter(|c| !self.is_optional(*c)).collect()
    }

    pub fn optional(&self) -> Vec<Cell> {
        self.cells().filter(|c| self.is_optional(*c)).collect()
    }

    /// Largest total weight of uncovered cells: `2^trunc - 1`.
    pub fn truncation_budget(&self) -> u128 {
        if self.trunc == 0 {
            0
        } else {
            (1u128 << self.trunc) - 1
        }
    }

    /// Width of the product port.
    pub fn output_width(&self) -> u32 {
        if self.trunc == 0 {
            return self.w_x + self.w_y;
        }
        // largest sum seen by the final adder: full product plus compensation
        let max_prod = ((1u128 << self.w_x) - 1) * ((1u128 << self.w_y) - 1);
        let max_sum = max_prod + self.truncation_budget();
        (128 - max_sum.leading_zeros()).saturating_sub(self.trunc)
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.w_x, self.w_y)?;
        if self.trunc > 0 {
            write!(f, "/t{}", self.trunc)?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Board {
    type Err = Error;

    /// Parses `WxH` (e.g. `6x4`).
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::InvalidBoard(format!("expected WxH, got {s:?}")))?;
        let w_x = a.trim().parse().map_err(|_| Error::InvalidBoard(format!("bad width in {s:?}")))?;
        let w_y = b.trim().parse().map_err(|_| Error::InvalidBoard(format!("bad height in {s:?}")))?;
        Board::new(w_x, w_y)
    }
}
