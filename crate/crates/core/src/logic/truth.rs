//! Truth tables of tile outputs and exact functional supports.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::{range_bits, Cell, GridPattern, Signedness};

/// Maximum number of distinct operand bits a tabulated tile may use.
pub const MAX_TABLE_INPUTS: usize = 8;

/// One operand bit feeding a tile, in tile-local coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InputBit {
    X(u32),
    Y(u32),
}

impl fmt::Display for InputBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputBit::X(i) => write!(f, "x{i}"),
            InputBit::Y(j) => write!(f, "y{j}"),
        }
    }
}

impl std::str::FromStr for InputBit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("bad input name {s:?}"));
        let (kind, idx) = s.split_at(1.min(s.len()));
        let idx: u32 = idx.parse().map_err(|_| bad())?;
        match kind {
            "x" => Ok(InputBit::X(idx)),
            "y" => Ok(InputBit::Y(idx)),
            _ => Err(bad()),
        }
    }
}

/// Single-output Boolean function of up to 8 variables, one bit per row.
/// Row `r` assigns variable `k` the value `(r >> k) & 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitTable {
    vars: u8,
    words: [u64; 4],
}

impl BitTable {
    pub fn zero(vars: usize) -> Self {
        assert!(vars <= MAX_TABLE_INPUTS);
        Self {
            vars: vars as u8,
            words: [0; 4],
        }
    }

    pub fn from_fn(vars: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut t = Self::zero(vars);
        for r in 0..1usize << vars {
            t.set(r, f(r));
        }
        t
    }

    pub const fn vars(&self) -> usize {
        self.vars as usize
    }

    pub const fn rows(&self) -> usize {
        1 << self.vars
    }

    pub fn get(&self, row: usize) -> bool {
        self.words[row >> 6] >> (row & 63) & 1 == 1
    }

    pub fn set(&mut self, row: usize, v: bool) {
        let bit = 1u64 << (row & 63);
        if v {
            self.words[row >> 6] |= bit;
        } else {
            self.words[row >> 6] &= !bit;
        }
    }

    pub fn count_ones(&self) -> u32 {
        (0..self.rows()).filter(|&r| self.get(r)).count() as u32
    }

    pub fn is_constant(&self) -> bool {
        let first = self.get(0);
        (0..self.rows()).all(|r| self.get(r) == first)
    }

    /// True if toggling variable `var` changes the output for some row.
    pub fn depends_on(&self, var: usize) -> bool {
        let stride = 1usize << var;
        (0..self.rows())
            .filter(|r| r & stride == 0)
            .any(|r| self.get(r) != self.get(r | stride))
    }

    /// Indices of the variables the function depends on.
    pub fn support(&self) -> Vec<usize> {
        (0..self.vars()).filter(|&v| self.depends_on(v)).collect()
    }

    /// Restricts the table to `vars` (which must contain the support);
    /// variable `k` of the result is `vars[k]` of `self`.
    pub fn project(&self, vars: &[usize]) -> BitTable {
        BitTable::from_fn(vars.len(), |r| {
            let mut full = 0usize;
            for (k, &v) in vars.iter().enumerate() {
                full |= (r >> k & 1) << v;
            }
            self.get(full)
        })
    }

    /// Low 64 rows as a LUT initialisation word, replicated when the
    /// function has fewer than 6 variables.
    pub fn lut_init(&self) -> u64 {
        let rows = self.rows().min(64);
        let mut init = 0u64;
        for r in 0..64 {
            if self.get(r % rows) {
                init |= 1 << r;
            }
        }
        init
    }
}

impl fmt::Debug for BitTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitTable({} vars, ", self.vars)?;
        for r in (0..self.rows()).rev() {
            f.write_str(if self.get(r) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

/// Value of a tile for every assignment of its operand bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    inputs: Vec<InputBit>,
    rows: Vec<i64>,
    width: u32,
}

impl TruthTable {
    pub fn inputs(&self) -> &[InputBit] {
        &self.inputs
    }

    pub fn rows(&self) -> &[i64] {
        &self.rows
    }

    /// Two's complement width of the tabulated values.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn min_value(&self) -> i64 {
        self.rows.iter().copied().min().unwrap_or(0)
    }

    pub fn max_value(&self) -> i64 {
        self.rows.iter().copied().max().unwrap_or(0)
    }

    /// Column of output bit `bit` as a Boolean function over all inputs.
    pub fn column(&self, bit: u32) -> BitTable {
        BitTable::from_fn(self.inputs.len(), |r| (self.rows[r] >> bit.min(63)) & 1 == 1)
    }

    /// Output bits that are not constant.
    pub fn active_bits(&self) -> Vec<u32> {
        (0..self.width).filter(|&b| !self.column(b).is_constant()).collect()
    }
}

/// Tabulates the weighted sum of the active partial products of `pattern`
/// over all assignments of the operand bits it uses. The top X (Y) bit of a
/// signed operand has negative weight; values are sign-extended.
pub fn build_truth_table(pattern: &GridPattern, s: Signedness) -> Result<TruthTable> {
    let cells: Vec<Cell> = pattern.cells().collect();
    tabulate(&cells, s)
}

pub(crate) fn tile_inputs(cells: &[Cell]) -> Vec<InputBit> {
    let mut xs: Vec<u32> = cells.iter().map(|c| c.x).collect();
    let mut ys: Vec<u32> = cells.iter().map(|c| c.y).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    xs.into_iter()
        .map(InputBit::X)
        .chain(ys.into_iter().map(InputBit::Y))
        .collect()
}

pub(crate) fn tabulate(cells: &[Cell], s: Signedness) -> Result<TruthTable> {
    let inputs = tile_inputs(cells);
    if inputs.len() > MAX_TABLE_INPUTS {
        return Err(Error::TooManyInputs {
            inputs: inputs.len(),
            limit: MAX_TABLE_INPUTS,
        });
    }
    let top_x = cells.iter().map(|c| c.x).max().unwrap_or(0);
    let top_y = cells.iter().map(|c| c.y).max().unwrap_or(0);
    let terms: Vec<(usize, usize, i64)> = cells
        .iter()
        .map(|c| {
            let xi = inputs.iter().position(|&i| i == InputBit::X(c.x)).expect("x input");
            let yi = inputs.iter().position(|&i| i == InputBit::Y(c.y)).expect("y input");
            let mut w = 1i64 << c.rank();
            if s.x_signed && c.x == top_x {
                w = -w;
            }
            if s.y_signed && c.y == top_y {
                w = -w;
            }
            (xi, yi, w)
        })
        .collect();
    let rows: Vec<i64> = (0..1usize << inputs.len())
        .map(|r| {
            terms
                .iter()
                .filter(|(xi, yi, _)| r >> xi & 1 == 1 && r >> yi & 1 == 1)
                .map(|t| t.2)
                .sum()
        })
        .collect();
    let lo = rows.iter().copied().min().unwrap_or(0);
    let hi = rows.iter().copied().max().unwrap_or(0);
    let width = range_bits(lo as i128, hi as i128);
    Ok(TruthTable { inputs, rows, width })
}

/// Exact support of output bit `bit`: an input belongs to it iff toggling
/// that input flips the bit for at least one assignment.
pub fn functional_support(tt: &TruthTable, bit: u32) -> Vec<InputBit> {
    let col = tt.column(bit);
    col.support().into_iter().map(|v| tt.inputs[v]).collect()
}
