//! Cost model and descriptors of sub-multiplier tiles.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logic::lutmap::{map_masks, map_to_luts, LutPlan, LutSlot};
use crate::logic::qm::{qm_minimize, Sop};
use crate::logic::truth::{tile_inputs, BitTable, InputBit, MAX_TABLE_INPUTS};
use crate::shape::{canonicalize, range_bits, Cell, GridPattern, Signedness};

/// Compression cost charged per output bit, in 1/20 LUT (0.65 LUT).
pub const COMP_UNITS_PER_BIT: u32 = 13;
const UNITS_PER_LUT: u32 = 20;

/// Largest pattern area for which one product may be tabulated on its own
/// next to the sum of the others.
pub const SPLIT_MAX_AREA: u32 = 5;

/// LUT cost held exactly in twentieths of a LUT.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cost(pub u32);

impl Cost {
    pub const fn luts(n: u32) -> Cost {
        Cost(n * UNITS_PER_LUT)
    }

    pub const fn compression(bits: u32) -> Cost {
        Cost(bits * COMP_UNITS_PER_BIT)
    }

    /// Cost of a tile with `cost_mult` LUTs and `w_out` output bits.
    pub const fn tile(cost_mult: u32, w_out: u32) -> Cost {
        Cost(cost_mult * UNITS_PER_LUT + w_out * COMP_UNITS_PER_BIT)
    }

    pub const fn units(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / UNITS_PER_LUT as f64
    }

    pub fn as_ratio(self) -> Ratio<u64> {
        Ratio::new(self.0 as u64, UNITS_PER_LUT as u64)
    }

    pub fn from_f64(v: f64) -> Cost {
        Cost((v * UNITS_PER_LUT as f64).round() as u32)
    }
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost(self.0 + o.0)
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(it: I) -> Cost {
        Cost(it.map(|c| c.0).sum())
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / UNITS_PER_LUT;
        let hundredths = self.0 % UNITS_PER_LUT * 5;
        match hundredths {
            0 => write!(f, "{whole}"),
            h if h % 10 == 0 => write!(f, "{whole}.{}", h / 10),
            h => write!(f, "{whole}.{h:02}"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Cost::from_f64)
    }
}

pub type Efficiency = Ratio<u64>;

pub fn efficiency(area: u32, cost: Cost) -> Efficiency {
    Ratio::new(area as u64 * UNITS_PER_LUT as u64, cost.0.max(1) as u64)
}

/// Floating-point value of an efficiency, for display.
pub fn efficiency_f64(e: Efficiency) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// One output bit of a tabulated tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanFunction {
    /// Bit weight relative to the tile origin.
    pub weight: u32,
    pub support: Vec<InputBit>,
    /// Truth table over `support` (variable k = `support[k]`).
    pub table: BitTable,
    pub sop: Sop,
}

impl BooleanFunction {
    fn new(weight: u32, support: Vec<InputBit>, table: BitTable) -> Self {
        let names: Vec<String> = support.iter().map(|i| i.to_string()).collect();
        let sop = qm_minimize(&table, &names);
        BooleanFunction {
            weight,
            support,
            table,
            sop,
        }
    }

    pub fn eval(&self, x: u128, y: u128) -> bool {
        self.table.get(row_of(&self.support, x, y))
    }

    /// The table re-expressed over a superset of the support.
    pub fn over(&self, vars: &[InputBit]) -> BitTable {
        BitTable::from_fn(vars.len(), |r| {
            let mut own = 0;
            for (k, v) in self.support.iter().enumerate() {
                let pos = vars.iter().position(|w| w == v).expect("superset of the support");
                own |= (r >> pos & 1) << k;
            }
            self.table.get(own)
        })
    }
}

fn row_of(vars: &[InputBit], x: u128, y: u128) -> usize {
    vars.iter().enumerate().fold(0, |row, (k, v)| {
        let bit = match *v {
            InputBit::X(i) => x >> i & 1,
            InputBit::Y(j) => y >> j & 1,
        };
        row | (bit as usize) << k
    })
}

/// A physical LUT6_2 site (two sites joined by F7 for seven-input functions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutSite {
    /// Inputs I0, I1, ...; a seven-input site lists the F7 select last.
    pub inputs: Vec<InputBit>,
    /// Index into the tile's function list driven by O6 (or the F7 mux).
    pub o6: usize,
    /// Function on O5; when present, I5 is tied high.
    pub o5: Option<usize>,
    /// One word per LUT; two words for a seven-input site.
    pub init: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicTile {
    pub inputs: Vec<InputBit>,
    pub functions: Vec<BooleanFunction>,
    /// Cell whose product is tabulated on its own instead of joining the sum.
    pub separate: Option<Cell>,
    pub plan: LutPlan,
    pub sites: Vec<LutSite>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Realization {
    Logic(LogicTile),
    /// Rectangle of `length` by 2 built on the carry chain: one LUT for the
    /// lowest bit, then `length` chain positions. `along_x` means the long
    /// side runs in the X direction.
    CarryChain { length: u32, along_x: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileDescriptor {
    /// Tight canonical pattern.
    pub pattern: GridPattern,
    pub signedness: Signedness,
    pub area: u32,
    pub w_out: u32,
    pub cost_mult: u32,
    pub realization: Realization,
}

impl TileDescriptor {
    pub fn cost_tile(&self) -> Cost {
        Cost::tile(self.cost_mult, self.w_out)
    }

    pub fn efficiency(&self) -> Efficiency {
        efficiency(self.area, self.cost_tile())
    }

    /// Weights of the output bits relative to the tile origin; repeated
    /// weights mean several bits land in the same column.
    pub fn output_weights(&self) -> Vec<u32> {
        match &self.realization {
            Realization::Logic(t) => t.functions.iter().map(|f| f.weight).collect(),
            Realization::CarryChain { length, .. } => (0..length + 2).collect(),
        }
    }

    pub fn functions(&self) -> &[BooleanFunction] {
        match &self.realization {
            Realization::Logic(t) => &t.functions,
            Realization::CarryChain { .. } => &[],
        }
    }

    pub fn is_carry_chain(&self) -> bool {
        matches!(self.realization, Realization::CarryChain { .. })
    }

    /// Sum of the output bits for operands `x`, `y` given in tile-local
    /// coordinates. Unsigned tiles only.
    pub fn eval_outputs(&self, x: u128, y: u128) -> u128 {
        match &self.realization {
            Realization::Logic(t) => t
                .functions
                .iter()
                .filter(|f| f.eval(x, y))
                .map(|f| 1u128 << f.weight)
                .sum(),
            Realization::CarryChain { .. } => self
                .pattern
                .cells()
                .filter(|c| x >> c.x & 1 == 1 && y >> c.y & 1 == 1)
                .map(|c| 1u128 << c.rank())
                .sum(),
        }
    }
}

/// Metrics of one way of tabulating a cell set, without minimised equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariantCost {
    pub cost_mult: u32,
    pub w_out: u32,
    pub separate: Option<Cell>,
}

impl VariantCost {
    pub fn cost(&self) -> Cost {
        Cost::tile(self.cost_mult, self.w_out)
    }
}

struct Column {
    weight: u32,
    support: Vec<usize>,
    table: BitTable,
}

/// Output columns of the sum over `cells` with rows indexed by `inputs`.
fn sum_columns(cells: &[Cell], inputs: &[InputBit], s: Signedness) -> Vec<Column> {
    let top_x = cells.iter().map(|c| c.x).max().unwrap_or(0);
    let top_y = cells.iter().map(|c| c.y).max().unwrap_or(0);
    let terms: Vec<(usize, usize, i64)> = cells
        .iter()
        .map(|c| {
            let xi = inputs.iter().position(|&i| i == InputBit::X(c.x)).expect("x input");
            let yi = inputs.iter().position(|&i| i == InputBit::Y(c.y)).expect("y input");
            let neg = (s.x_signed && c.x == top_x) ^ (s.y_signed && c.y == top_y);
            let w = 1i64 << c.rank();
            (xi, yi, if neg { -w } else { w })
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
    (0..width)
        .filter_map(|bit| {
            let table = BitTable::from_fn(inputs.len(), |r| rows[r] >> bit & 1 == 1);
            let support = table.support();
            (!support.is_empty()).then_some(Column {
                weight: bit,
                support,
                table,
            })
        })
        .collect()
}

fn and_column(c: Cell, inputs: &[InputBit]) -> Column {
    let xi = inputs.iter().position(|&i| i == InputBit::X(c.x)).expect("x input");
    let yi = inputs.iter().position(|&i| i == InputBit::Y(c.y)).expect("y input");
    let mut support = vec![xi, yi];
    support.sort_unstable();
    Column {
        weight: c.rank(),
        support,
        table: BitTable::from_fn(inputs.len(), |r| r >> xi & 1 == 1 && r >> yi & 1 == 1),
    }
}

fn variant_columns(cells: &[Cell], s: Signedness, separate: Option<Cell>) -> Result<(Vec<InputBit>, Vec<Column>)> {
    let inputs = tile_inputs(cells);
    if inputs.len() > MAX_TABLE_INPUTS {
        return Err(Error::TooManyInputs {
            inputs: inputs.len(),
            limit: MAX_TABLE_INPUTS,
        });
    }
    let main: Vec<Cell> = cells.iter().copied().filter(|&c| Some(c) != separate).collect();
    let mut cols = sum_columns(&main, &inputs, s);
    if let Some(c) = separate {
        cols.push(and_column(c, &inputs));
    }
    Ok((inputs, cols))
}

fn variant_cost(cells: &[Cell], s: Signedness, separate: Option<Cell>) -> Result<VariantCost> {
    let (_, cols) = variant_columns(cells, s, separate)?;
    let masks: Vec<u32> = cols
        .iter()
        .map(|c| c.support.iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let plan = map_masks(&masks)?;
    Ok(VariantCost {
        cost_mult: plan.lut_count(),
        w_out: cols.len() as u32,
        separate,
    })
}

/// Cheapest tabulation of a tight pattern. Besides the plain sum, unsigned
/// patterns of small area may take one product out of the sum and emit it
/// as its own bit. Ties keep the plain sum, then the lowest cell.
pub fn best_logic_variant(pattern: &GridPattern, s: Signedness) -> Result<VariantCost> {
    let cells: Vec<Cell> = pattern.cells().collect();
    let mut best = variant_cost(&cells, s, None)?;
    if s.is_unsigned() && cells.len() >= 2 && cells.len() as u32 <= SPLIT_MAX_AREA {
        for &c in &cells {
            let v = variant_cost(&cells, s, Some(c))?;
            if v.cost() < best.cost() {
                best = v;
            }
        }
    }
    Ok(best)
}

fn logic_tile(pattern: &GridPattern, s: Signedness, separate: Option<Cell>) -> Result<LogicTile> {
    let cells: Vec<Cell> = pattern.cells().collect();
    let (inputs, cols) = variant_columns(&cells, s, separate)?;
    let functions: Vec<BooleanFunction> = cols
        .iter()
        .map(|c| {
            let support: Vec<InputBit> = c.support.iter().map(|&v| inputs[v]).collect();
            BooleanFunction::new(c.weight, support, c.table.project(&c.support))
        })
        .collect();
    let supports: Vec<Vec<InputBit>> = functions.iter().map(|f| f.support.clone()).collect();
    let plan = map_to_luts(&supports)?;
    let sites = plan.slots.iter().map(|slot| lut_site(slot, &functions)).collect();
    Ok(LogicTile {
        inputs,
        functions,
        separate,
        plan,
        sites,
    })
}

fn lut_site(slot: &LutSlot, functions: &[BooleanFunction]) -> LutSite {
    match *slot {
        LutSlot::Single(f) => LutSite {
            inputs: functions[f].support.clone(),
            o6: f,
            o5: None,
            init: vec![functions[f].table.lut_init()],
        },
        LutSlot::Pair(f, g) => {
            let mut vars: Vec<InputBit> = functions[f].support.iter().chain(&functions[g].support).copied().collect();
            vars.sort_unstable();
            vars.dedup();
            let hi = functions[f].over(&vars);
            let lo = functions[g].over(&vars);
            let rows = 1usize << vars.len();
            let mut init = 0u64;
            for r in 0..32 {
                if lo.get(r % rows) {
                    init |= 1 << r;
                }
                if hi.get(r % rows) {
                    init |= 1 << (r + 32);
                }
            }
            LutSite {
                inputs: vars,
                o6: f,
                o5: Some(g),
                init: vec![init],
            }
        }
        LutSlot::Wide(f) => {
            let t = &functions[f].table;
            let half = |sel: bool| {
                let mut init = 0u64;
                for r in 0..64 {
                    if t.get(r | (sel as usize) << 6) {
                        init |= 1 << r;
                    }
                }
                init
            };
            LutSite {
                inputs: functions[f].support.clone(),
                o6: f,
                o5: None,
                init: vec![half(false), half(true)],
            }
        }
    }
}

/// Descriptor of the carry-chain rectangle with a long side of `k >= 2`.
pub fn describe_two_by_k(k: u32, along_x: bool) -> Result<TileDescriptor> {
    if k < 2 {
        return Err(Error::InvalidPattern(format!("carry-chain tiles need k >= 2, got {k}")));
    }
    let pattern = if along_x {
        GridPattern::rect(k, 2)?
    } else {
        GridPattern::rect(2, k)?
    };
    Ok(TileDescriptor {
        pattern,
        signedness: Signedness::UNSIGNED,
        area: 2 * k,
        w_out: k + 2,
        cost_mult: k + 1,
        realization: Realization::CarryChain { length: k, along_x },
    })
}

fn two_by_k_shape(p: &GridPattern) -> Option<(u32, bool)> {
    if !p.is_rectangle() {
        return None;
    }
    match (p.bound_x(), p.bound_y()) {
        (k, 2) if k >= 2 => Some((k, true)),
        (2, k) if k >= 2 => Some((k, false)),
        _ => None,
    }
}

/// Full descriptor of a pattern: the cheapest logic tabulation, or for
/// 2×k rectangles the carry-chain realization when it is at least as cheap
/// (strictly cheaper for k < 4) or when tabulation is impossible.
pub fn describe_tile(pattern: &GridPattern, s: Signedness) -> Result<TileDescriptor> {
    let pattern = canonicalize(pattern)?.tight();
    let area = pattern.area();
    let chain = if s.is_unsigned() { two_by_k_shape(&pattern) } else { None };
    let logic = best_logic_variant(&pattern, s);
    if let Some((k, along_x)) = chain {
        let carry = describe_two_by_k(k, along_x)?;
        let take_chain = match &logic {
            Err(_) => true,
            Ok(v) => carry.cost_tile() < v.cost() || (carry.cost_tile() == v.cost() && k >= 4),
        };
        if take_chain {
            return Ok(carry);
        }
    }
    let v = logic?;
    let tile = logic_tile(&pattern, s, v.separate)?;
    debug_assert_eq!(tile.plan.lut_count(), v.cost_mult);
    Ok(TileDescriptor {
        pattern,
        signedness: s,
        area,
        w_out: v.w_out,
        cost_mult: v.cost_mult,
        realization: Realization::Logic(tile),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(p: GridPattern) -> TileDescriptor {
        describe_tile(&p, Signedness::UNSIGNED).unwrap()
    }

    #[test]
    fn cost_display() {
        assert_eq!(Cost::tile(5, 6).to_string(), "8.9");
        assert_eq!(Cost::tile(3, 5).to_string(), "6.25");
        assert_eq!(Cost::tile(1, 1).to_string(), "1.65");
        assert_eq!(Cost::luts(3).to_string(), "3");
        assert_eq!(Cost::from_f64(23.75), Cost::tile(14, 15));
    }

    #[test]
    fn motivational_tile() {
        let p = GridPattern::rect(3, 2).unwrap().without(Cell::new(2, 1));
        let d = u(p);
        assert_eq!((d.cost_mult, d.w_out, d.cost_tile()), (2, 4, Cost(92)));
        assert_eq!(d.efficiency(), Ratio::new(25, 23));
    }

    #[test]
    fn s_shape_alone_and_with_helper() {
        let s = GridPattern::parse_rows(&[".##", "##."]).unwrap();
        let d = u(s);
        assert_eq!((d.cost_mult, d.w_out), (2, 3));
        assert_eq!(d.efficiency(), Ratio::new(80, 79));
    }

    #[test]
    fn outputs_sum_to_the_product_sum() {
        for rows in [&["###", "###"][..], &["##.", "###"], &[".#", "##"], &["#.#", ".#."]] {
            let d = u(GridPattern::parse_rows(rows).unwrap());
            for x in 0..8u128 {
                for y in 0..4u128 {
                    let expect: u128 = d
                        .pattern
                        .cells()
                        .filter(|c| x >> c.x & 1 == 1 && y >> c.y & 1 == 1)
                        .map(|c| 1 << c.rank())
                        .sum();
                    assert_eq!(d.eval_outputs(x, y), expect, "{rows:?} {x} {y}");
                }
            }
        }
    }

    #[test]
    fn lut_inits_reproduce_functions() {
        let d = u(GridPattern::rect(3, 3).unwrap());
        let Realization::Logic(t) = &d.realization else { panic!() };
        for site in &t.sites {
            let n = site.inputs.len();
            assert!(n <= 6);
            for r in 0..1usize << n {
                let (x, y) = site.inputs.iter().enumerate().fold((0u128, 0u128), |(x, y), (k, v)| {
                    let b = (r >> k & 1) as u128;
                    match *v {
                        InputBit::X(i) => (x | b << i, y),
                        InputBit::Y(j) => (x, y | b << j),
                    }
                });
                let row6 = if site.o5.is_some() { r | 32 } else { r };
                assert_eq!(site.init[0] >> row6 & 1 == 1, t.functions[site.o6].eval(x, y));
                if let Some(g) = site.o5 {
                    assert_eq!(site.init[0] >> r & 1 == 1, t.functions[g].eval(x, y));
                }
            }
        }
    }

    #[test]
    fn chain_versus_logic() {
        let d = u(GridPattern::rect(3, 2).unwrap());
        assert!(!d.is_carry_chain());
        assert_eq!((d.cost_mult, d.w_out), (3, 5));
        let d = u(GridPattern::rect(2, 4).unwrap());
        assert!(d.is_carry_chain());
        assert_eq!(d.cost_tile(), Cost::tile(5, 6));
        let d = u(GridPattern::rect(13, 2).unwrap());
        assert_eq!(d.efficiency(), Ratio::new(26 * 20, 475));
    }
}
