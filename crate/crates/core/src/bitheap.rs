//! Bit heaps of tile outputs and their reduction to a single sum.
//!
//! Tiles drop their output bits into weighted columns. Generalized parallel
//! counters (GPCs) then shrink the columns stage by stage until a carry-chain
//! adder can finish: a binary adder takes two rows, a ternary adder three,
//! and a 4:2 row compressor turns four rows into two for a binary adder.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::lutmap::map_masks;
use crate::solver::{TilingProblem, TilingSolution};

/// Where a heap bit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BitSource {
    /// Output `output` of solution placement `placement`, in the order of
    /// the tile's output weights.
    Tile { placement: usize, output: usize },
    /// A set bit of the truncation compensation constant.
    Constant,
    /// Output of a counter placed during compression.
    Counter { stage: usize, instance: usize, output: usize },
    /// Sum or shifted-majority bit of the 4:2 row compressor.
    RowSum { column: u32 },
    RowMajority { column: u32 },
    RowCarry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapBit {
    pub weight: u32,
    pub source: BitSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitHeap {
    /// Every bit ever created; indices are bit ids.
    pub bits: Vec<HeapBit>,
    /// Bit ids of the heap proper, by weight.
    pub columns: Vec<Vec<usize>>,
    /// Result bits below this weight are dropped after the final sum.
    pub trunc: u32,
    /// Number of sum bits kept before truncation; anything above is zero.
    pub width: u32,
}

impl BitHeap {
    pub fn new(width: u32, trunc: u32) -> Self {
        BitHeap {
            bits: Vec::new(),
            columns: vec![Vec::new(); width as usize],
            trunc,
            width,
        }
    }

    pub fn push(&mut self, weight: u32, source: BitSource) -> Result<usize> {
        if weight >= self.width {
            return Err(Error::Inconsistent(format!("bit of weight {weight} in a {}-bit heap", self.width)));
        }
        let id = self.bits.len();
        self.bits.push(HeapBit { weight, source });
        self.columns[weight as usize].push(id);
        Ok(id)
    }

    pub fn heights(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    pub fn max_height(&self) -> usize {
        self.columns.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn bit_count(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Value of the heap for given bit values, modulo `2^width`.
    pub fn value(&self, bit: impl Fn(usize) -> bool) -> u128 {
        let sum: u128 = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(w, col)| col.iter().map(move |&b| (w, b)))
            .filter(|&(_, b)| bit(b))
            .map(|(w, _)| 1u128 << w)
            .sum();
        sum & mask(self.width)
    }
}

fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

/// Collects the output bits of every placement, anchored at the placement
/// offset, plus the compensation constant of a truncated board.
pub fn heap_from_tiling(problem: &TilingProblem, solution: &TilingSolution) -> Result<BitHeap> {
    let board = &solution.board;
    let mut heap = BitHeap::new(board.trunc + board.output_width(), board.trunc);
    for (i, p) in solution.placements.iter().enumerate() {
        let tile = &problem
            .tiles
            .get(p.tile)
            .ok_or_else(|| Error::Inconsistent(format!("placement {i} names an unknown tile")))?
            .tile;
        for (k, w) in tile.output_weights().into_iter().enumerate() {
            heap.push(p.dx + p.dy + w, BitSource::Tile { placement: i, output: k })?;
        }
    }
    let c = solution.compensation;
    for w in 0..128 {
        if c >> w & 1 == 1 {
            heap.push(w, BitSource::Constant)?;
        }
    }
    Ok(heap)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CompressorKind {
    /// Counts `inputs[j]` bits of weight `j` (lowest column first) into
    /// `outputs` bits.
    Gpc { inputs: Vec<u32>, outputs: u32 },
    RowFourTwo,
    BinaryAdder,
    TernaryAdder,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressorDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: CompressorKind,
    /// LUTs per instance for counters, per column for row operations.
    pub luts: u32,
}

impl CompressorDef {
    pub fn gpc(name: &str, inputs: &[u32], outputs: u32, luts: u32) -> Self {
        CompressorDef {
            name: name.into(),
            kind: CompressorKind::Gpc {
                inputs: inputs.to_vec(),
                outputs,
            },
            luts,
        }
    }

    fn row(name: &str, kind: CompressorKind) -> Self {
        CompressorDef {
            name: name.into(),
            kind,
            luts: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Format(format!("compressor {}: {why}", self.name)));
        if self.luts == 0 {
            return bad("cost must be positive".into());
        }
        match &self.kind {
            CompressorKind::Gpc { inputs, outputs } => {
                let n: u32 = inputs.iter().sum();
                if inputs.is_empty() || inputs[0] == 0 || n == 0 {
                    return bad("empty lowest column".into());
                }
                if n > 6 {
                    return bad(format!("{n} inputs do not fit a LUT"));
                }
                if *outputs >= 32 || gpc_max_sum(inputs) >= 1 << outputs {
                    return bad(format!("{outputs} outputs cannot hold the largest count"));
                }
                let luts = gpc_luts(inputs, *outputs)?;
                if luts != self.luts {
                    return bad(format!("declared {} LUTs, packing needs {luts}", self.luts));
                }
                Ok(())
            }
            _ if self.luts != 1 => bad("row operations cost one LUT per column".into()),
            _ => Ok(()),
        }
    }

    fn gpc_shape(&self) -> Option<(&[u32], u32)> {
        match &self.kind {
            CompressorKind::Gpc { inputs, outputs } => Some((inputs, *outputs)),
            _ => None,
        }
    }
}

fn gpc_max_sum(inputs: &[u32]) -> u64 {
    inputs.iter().enumerate().map(|(j, &k)| (k as u64) << j).sum()
}

/// LUT count of a counter keeping its lowest `kept` outputs: each output
/// depends on every input it can see.
fn gpc_luts_kept(inputs: &[u32], kept: u32) -> Result<u32> {
    let n: u32 = inputs.iter().sum();
    let masks: Vec<u32> = (0..kept).map(|_| (1u32 << n) - 1).collect();
    Ok(map_masks(&masks)?.lut_count())
}

fn gpc_luts(inputs: &[u32], outputs: u32) -> Result<u32> {
    gpc_luts_kept(inputs, outputs)
}

/// The compressor set used unless a configuration file says otherwise.
pub fn default_compressors() -> Vec<CompressorDef> {
    vec![
        CompressorDef::gpc("(3;2)", &[3], 2, 1),
        CompressorDef::gpc("(2;2)", &[2], 2, 1),
        CompressorDef::gpc("(6;3)", &[6], 3, 3),
        CompressorDef::gpc("(1,5;3)", &[5, 1], 3, 3),
        CompressorDef::row("4:2", CompressorKind::RowFourTwo),
        CompressorDef::row("ternary", CompressorKind::TernaryAdder),
        CompressorDef::row("binary", CompressorKind::BinaryAdder),
    ]
}

#[derive(Serialize, Deserialize)]
struct CompressorFile {
    compressors: Vec<CompressorDef>,
}

pub fn load_compressors(path: &Path) -> Result<Vec<CompressorDef>> {
    parse_compressors(&std::fs::read_to_string(path)?)
}

pub fn parse_compressors(text: &str) -> Result<Vec<CompressorDef>> {
    let file: CompressorFile = serde_json::from_str(text)?;
    for d in &file.compressors {
        d.validate()?;
    }
    if !file.compressors.iter().any(|d| {
        matches!(d.kind, CompressorKind::BinaryAdder | CompressorKind::TernaryAdder)
    }) {
        return Err(Error::Format("compressor library has no final adder".into()));
    }
    Ok(file.compressors)
}

pub fn compressors_to_json(defs: &[CompressorDef]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CompressorFile {
        compressors: defs.to_vec(),
    })?)
}

/// One placed counter. `inputs[j]` are the bits taken from column
/// `anchor + j`; `outputs[j]` has weight `anchor + j`, or is `None` when
/// that weight lies above the heap (the bit is always zero there).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterInstance {
    pub def: usize,
    pub anchor: u32,
    pub inputs: Vec<Vec<usize>>,
    pub outputs: Vec<Option<usize>>,
    pub luts: u32,
}

/// A run of 4:2 row-compressor columns `lo..=hi` sharing one carry chain.
///
/// Column `c` takes up to four bits `a, b, c, d` plus the chain carry and
/// produces a sum bit at `c`, `maj(a, b, c)` at `c + 1` and the next chain
/// carry; the last carry leaves at `hi + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSegment {
    pub def: usize,
    pub lo: u32,
    pub hi: u32,
    /// Slots `a, b, c, d` per column.
    pub rows: Vec<[Option<usize>; 4]>,
    pub sums: Vec<usize>,
    pub majorities: Vec<Option<usize>>,
    pub carry: Option<usize>,
}

impl RowSegment {
    pub fn luts(&self) -> u32 {
        self.hi + 1 - self.lo
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub counters: Vec<CounterInstance>,
    pub segments: Vec<RowSegment>,
}

impl Stage {
    pub fn luts(&self) -> u32 {
        self.counters.iter().map(|c| c.luts).sum::<u32>() + self.segments.iter().map(RowSegment::luts).sum::<u32>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdderKind {
    Binary,
    Ternary,
}

impl AdderKind {
    /// Rows the adder sums; the chain carry-in takes one more bit in the
    /// lowest column.
    pub const fn rows(self) -> usize {
        match self {
            AdderKind::Binary => 2,
            AdderKind::Ternary => 3,
        }
    }
}

/// Carry-chain adder over columns `lo..=hi`, one LUT per column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalAdder {
    pub def: usize,
    pub kind: AdderKind,
    pub lo: u32,
    pub hi: u32,
    /// Bits of column `lo + i`, at most `kind.rows()` each.
    pub rows: Vec<Vec<usize>>,
    /// Extra bit of column `lo` fed into the chain carry-in.
    pub carry_in: Option<usize>,
    /// Whether the chain carry-out is a result bit (it lies inside the heap).
    pub carry_out: bool,
}

impl FinalAdder {
    pub fn luts(&self) -> u32 {
        self.hi + 1 - self.lo
    }
}

/// Value of each result column: a heap bit passed through, the final
/// adder's sum at that column, its carry out, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultBit {
    Zero,
    Wire { bit: usize },
    Sum { column: u32 },
    Carry,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionPlan {
    pub heap: BitHeap,
    pub compressors: Vec<CompressorDef>,
    pub stages: Vec<Stage>,
    /// `None` when no column holds two bits after the stages.
    pub adder: Option<FinalAdder>,
    /// One entry per heap column.
    pub result: Vec<ResultBit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub lut_cost: u32,
    pub stage_count: usize,
    pub final_adder_bits: u32,
}

fn maj3(a: bool, b: bool, c: bool) -> bool {
    (a as u8 + b as u8 + c as u8) >= 2
}

impl CompressionPlan {
    pub fn stage_luts(&self) -> u32 {
        self.stages.iter().map(Stage::luts).sum()
    }

    pub fn adder_bits(&self) -> u32 {
        self.adder.as_ref().map_or(0, FinalAdder::luts)
    }

    pub fn lut_cost(&self) -> u32 {
        self.stage_luts() + self.adder_bits()
    }

    /// Evaluates the plan bit by bit. `inputs` gives the values of the
    /// original heap bits; the result is the sum modulo `2^width`.
    pub fn evaluate(&self, inputs: impl Fn(usize) -> bool) -> u128 {
        let mut val: Vec<Option<bool>> = vec![None; self.heap.bits.len()];
        for (id, b) in self.heap.bits.iter().enumerate() {
            if matches!(b.source, BitSource::Tile { .. } | BitSource::Constant) {
                val[id] = Some(inputs(id));
            }
        }
        let get = |val: &[Option<bool>], id: usize| val[id].expect("bits are produced before use");
        for s in &self.stages {
            for c in &s.counters {
                let count: u64 = c
                    .inputs
                    .iter()
                    .enumerate()
                    .map(|(j, col)| col.iter().filter(|&&b| get(&val, b)).count() as u64 * (1 << j))
                    .sum();
                for (j, o) in c.outputs.iter().enumerate() {
                    if let Some(o) = o {
                        val[*o] = Some(count >> j & 1 == 1);
                    }
                }
            }
            for seg in &s.segments {
                let mut carry = false;
                for (i, slots) in seg.rows.iter().enumerate() {
                    let [a, b, c, d] = slots.map(|x| x.is_some_and(|id| get(&val, id)));
                    let p = a ^ b ^ c ^ d;
                    val[seg.sums[i]] = Some(p ^ carry);
                    if let Some(m) = seg.majorities[i] {
                        val[m] = Some(maj3(a, b, c));
                    }
                    carry = if p { carry } else { d };
                }
                if let Some(k) = seg.carry {
                    val[k] = Some(carry);
                }
            }
        }
        let adder_sum: u128 = match &self.adder {
            None => 0,
            Some(a) => {
                let width = a.luts() + a.carry_out as u32;
                let total: u128 = a
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, col)| col.iter().filter(|&&b| get(&val, b)).count() as u128 * (1 << i))
                    .sum::<u128>()
                    + a.carry_in.map_or(0, |b| get(&val, b) as u128);
                (total & mask(width)) << a.lo
            }
        };
        let mut out = 0u128;
        for (w, r) in self.result.iter().enumerate() {
            let bit = match *r {
                ResultBit::Zero => false,
                ResultBit::Wire { bit } => get(&val, bit),
                ResultBit::Sum { .. } | ResultBit::Carry => adder_sum >> w & 1 == 1,
            };
            if bit {
                out |= 1 << w;
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn compression_cost_report(plan: &CompressionPlan) -> CompressionReport {
    CompressionReport {
        lut_cost: plan.lut_cost(),
        stage_count: plan.stages.len(),
        final_adder_bits: plan.adder_bits(),
    }
}

/// Counter selection for one column: best bits removed per LUT, then the
/// largest drop of this column's height that does not overshoot its
/// excess, then library order.
fn pick_counter(defs: &[CompressorDef], avail: &[usize], excess: usize, shuffles: bool) -> Option<usize> {
    let mut best: Option<(usize, (u32, u32), usize)> = None;
    for (i, d) in defs.iter().enumerate() {
        let Some((inputs, outputs)) = d.gpc_shape() else { continue };
        if inputs.iter().enumerate().any(|(j, &k)| avail.get(j).copied().unwrap_or(0) < k as usize) {
            continue;
        }
        let n: u32 = inputs.iter().sum();
        let removed = n.saturating_sub(outputs);
        if removed == 0 && !shuffles {
            continue;
        }
        let fit = (inputs[0] as usize - 1).min(excess);
        let better = match &best {
            None => true,
            Some((_, (r, l), f)) => {
                let lhs = removed as u64 * *l as u64;
                let rhs = *r as u64 * d.luts as u64;
                lhs > rhs || (lhs == rhs && fit > *f)
            }
        };
        if better {
            best = Some((i, (removed, d.luts), fit));
        }
    }
    best.map(|b| b.0)
}

/// Segments of `stage` that closed at column `i`, whose carries already
/// sit in `i`.
fn open_closing(stage: &Stage, i: usize) -> usize {
    stage.segments.iter().filter(|g| g.hi as usize + 1 == i).count()
}

/// Limit on counter stages; real heaps need a handful.
const MAX_STAGES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Policy {
    adder: usize,
    kind: AdderKind,
    /// 4:2 row compressor definition to use inside stages.
    rows: Option<usize>,
    /// Segments that may run side by side in one stage.
    max_segments: usize,
    /// Reduce by about half per stage instead of straight to the adder
    /// height.
    halving: bool,
    /// A segment opens where the column exceeds its target by this much.
    open_slack: usize,
    /// A segment only continues into columns with this many bits left.
    keep_min: usize,
    /// Whether counters that remove no bits, such as (2;2), may move bits
    /// up a column.
    shuffles: bool,
    /// Leave one extra bit in the lowest two-bit column for the adder's
    /// carry input.
    carry_in: bool,
}

struct Builder<'a> {
    defs: &'a [CompressorDef],
    heap: BitHeap,
    stages: Vec<Stage>,
    cols: Vec<Vec<usize>>,
}

struct OpenSegment {
    seg: RowSegment,
}

impl Builder<'_> {
    fn add_bit(&mut self, weight: u32, source: BitSource) -> Option<usize> {
        (weight < self.heap.width).then(|| {
            let id = self.heap.bits.len();
            self.heap.bits.push(HeapBit { weight, source });
            id
        })
    }

    fn width(&self) -> usize {
        self.cols.len()
    }

    /// Adds one column to a 4:2 segment, taking up to four bits of
    /// `remaining`. Slots are filled so that unused inputs are zero
    /// without making the majority output meaningless.
    fn row_column(&mut self, seg: &mut RowSegment, col: u32, remaining: &mut Vec<usize>, next: &mut [Vec<usize>]) {
        let k = remaining.len().min(4);
        let taken: Vec<usize> = remaining.drain(..k).collect();
        let slots = match taken.as_slice() {
            [a] => [Some(*a), None, None, None],
            [a, d] => [Some(*a), None, None, Some(*d)],
            [a, b, c] => [Some(*a), Some(*b), Some(*c), None],
            [a, b, c, d] => [Some(*a), Some(*b), Some(*c), Some(*d)],
            _ => [None; 4],
        };
        let s = self.add_bit(col, BitSource::RowSum { column: col }).expect("column inside heap");
        next[col as usize].push(s);
        let m = if k >= 3 {
            let m = self.add_bit(col + 1, BitSource::RowMajority { column: col });
            if let Some(m) = m {
                next[col as usize + 1].push(m);
            }
            m
        } else {
            None
        };
        seg.hi = col;
        seg.rows.push(slots);
        seg.sums.push(s);
        seg.majorities.push(m);
    }

    fn close(&mut self, open: OpenSegment, next: &mut [Vec<usize>], stage: &mut Stage) {
        let mut seg = open.seg;
        let at = seg.hi + 1;
        seg.carry = self.add_bit(at, BitSource::RowCarry);
        if let Some(k) = seg.carry {
            next[at as usize].push(k);
        }
        stage.segments.push(seg);
    }

    /// Stages until no column is taller than `target`; the lowest column
    /// with two bits may keep one more for the adder's carry-in.
    fn reduce_to(&mut self, target: usize, policy: Policy) -> Result<()> {
        let Policy { rows, max_segments, carry_in, halving, open_slack, keep_min, shuffles, .. } = policy;
        let width = self.width();
        loop {
            let ci_col = self.cols.iter().position(|c| c.len() >= 2).filter(|_| carry_in);
            let limit = |i: usize| target + (Some(i) == ci_col) as usize;
            if (0..width).all(|i| self.cols[i].len() <= limit(i)) {
                return Ok(());
            }
            // with halving, each stage only goes down to the next height in
            // target, 2 target, 4 target, ...
            let tallest = self.cols.iter().map(Vec::len).max().unwrap_or(0);
            let mut floor = target;
            while halving && floor * 2 < tallest {
                floor *= 2;
            }
            if self.stages.len() >= MAX_STAGES {
                return Err(Error::Unsupported(format!(
                    "compressor library cannot reduce the heap to height {target}"
                )));
            }
            let stage_no = self.stages.len();
            let mut remaining = std::mem::take(&mut self.cols);
            let mut next: Vec<Vec<usize>> = vec![Vec::new(); width];
            let mut stage = Stage::default();
            let mut open: Vec<OpenSegment> = Vec::new();
            for i in 0..width {
                let tgt = limit(i).max(floor);
                let mut still_open = Vec::new();
                for mut o in open.drain(..) {
                    // the carries of segments closed here land in this column
                    let closing = open_closing(&stage, i);
                    let close_height = remaining[i].len() + next[i].len() + closing + 1;
                    if close_height <= tgt || remaining[i].len() < keep_min {
                        self.close(o, &mut next, &mut stage);
                    } else {
                        self.row_column(&mut o.seg, i as u32, &mut remaining[i], &mut next);
                        still_open.push(o);
                    }
                }
                open = still_open;
                if let Some(def) = rows {
                    while open.len() < max_segments {
                        let projected = remaining[i].len() + next[i].len();
                        if remaining[i].len() < 4 || projected < tgt + open_slack {
                            break;
                        }
                        let mut seg = RowSegment {
                            def,
                            lo: i as u32,
                            hi: i as u32,
                            rows: vec![],
                            sums: vec![],
                            majorities: vec![],
                            carry: None,
                        };
                        self.row_column(&mut seg, i as u32, &mut remaining[i], &mut next);
                        open.push(OpenSegment { seg });
                    }
                }
                loop {
                    // a pending chain carry will occupy one slot here or above
                    let projected = remaining[i].len() + next[i].len();
                    if projected <= tgt {
                        break;
                    }
                    let avail: Vec<usize> = (i..width.min(i + 4)).map(|j| remaining[j].len()).collect();
                    let Some(d) = pick_counter(self.defs, &avail, projected - tgt, shuffles) else { break };
                    let (inputs, outputs) = self.defs[d].gpc_shape().expect("counters only");
                    let inputs = inputs.to_vec();
                    let instance = stage.counters.len();
                    let taken: Vec<Vec<usize>> = inputs
                        .iter()
                        .enumerate()
                        .map(|(j, &k)| remaining[i + j].drain(..k as usize).collect())
                        .collect();
                    let outs: Vec<Option<usize>> = (0..outputs)
                        .map(|j| {
                            self.add_bit(
                                i as u32 + j,
                                BitSource::Counter {
                                    stage: stage_no,
                                    instance,
                                    output: j as usize,
                                },
                            )
                        })
                        .collect();
                    for (j, o) in outs.iter().enumerate() {
                        if let Some(o) = o {
                            next[i + j].push(*o);
                        }
                    }
                    let kept = outs.iter().filter(|o| o.is_some()).count() as u32;
                    let luts = if kept == outputs {
                        self.defs[d].luts
                    } else {
                        gpc_luts_kept(&inputs, kept)?
                    };
                    stage.counters.push(CounterInstance {
                        def: d,
                        anchor: i as u32,
                        inputs: taken,
                        outputs: outs,
                        luts,
                    });
                }
                let rest = std::mem::take(&mut remaining[i]);
                next[i].extend(rest);
            }
            for o in open {
                self.close(o, &mut next, &mut stage);
            }
            self.cols = next;
            if stage.counters.is_empty() && stage.segments.is_empty() {
                return Err(Error::Unsupported(format!(
                    "compressor library cannot reduce the heap to height {target}"
                )));
            }
            self.stages.push(stage);
        }
    }

    fn final_adder(&mut self, def: usize, kind: AdderKind) -> Result<(Option<FinalAdder>, Vec<ResultBit>)> {
        let width = self.heap.width;
        let wire = |c: &Vec<usize>| c.first().map_or(ResultBit::Zero, |&bit| ResultBit::Wire { bit });
        let Some(lo) = self.cols.iter().position(|c| c.len() >= 2) else {
            return Ok((None, self.cols.iter().map(wire).collect()));
        };
        let top = self.cols.iter().rposition(|c| !c.is_empty()).expect("a column holds bits");
        let growth = match kind {
            AdderKind::Binary => 0,
            AdderKind::Ternary => 1,
        };
        let hi = (top + growth).min(width as usize - 1);
        let mut rows: Vec<Vec<usize>> = (lo..=hi).map(|c| std::mem::take(&mut self.cols[c])).collect();
        let carry_in = (rows[0].len() > kind.rows()).then(|| rows[0].pop().expect("non-empty"));
        if rows.iter().any(|r| r.len() > kind.rows()) {
            return Err(Error::Inconsistent("column too tall for the final adder".into()));
        }
        let carry_out = hi + 1 < width as usize;
        let result = (0..width as usize)
            .map(|c| match c {
                c if c < lo => wire(&self.cols[c]),
                c if c <= hi => ResultBit::Sum { column: c as u32 },
                c if c == hi + 1 => ResultBit::Carry,
                _ => ResultBit::Zero,
            })
            .collect();
        let adder = FinalAdder {
            def,
            kind,
            lo: lo as u32,
            hi: hi as u32,
            rows,
            carry_in,
            carry_out,
        };
        Ok((Some(adder), result))
    }
}

fn plan_with(heap: &BitHeap, defs: &[CompressorDef], policy: Policy) -> Result<CompressionPlan> {
    let mut b = Builder {
        defs,
        heap: heap.clone(),
        stages: Vec::new(),
        cols: heap.columns.clone(),
    };
    b.reduce_to(policy.kind.rows(), policy)?;
    let (adder, result) = b.final_adder(policy.adder, policy.kind)?;
    Ok(CompressionPlan {
        heap: b.heap,
        compressors: defs.to_vec(),
        stages: b.stages,
        adder,
        result,
    })
}

/// Greedy compression, run once per policy in a small fixed grid: each
/// final adder in the library, with or without a bit on its carry input,
/// straight to the adder height or halving per stage, counters only or
/// with 4:2 row segments under a few opening and continuation thresholds.
/// The cheapest plan wins. Ties go to the shorter carry chain, then to
/// fewer stages, then to the earlier policy.
pub fn compress(heap: &BitHeap, defs: &[CompressorDef]) -> Result<CompressionPlan> {
    for d in defs {
        d.validate()?;
    }
    let four_two = defs.iter().position(|d| d.kind == CompressorKind::RowFourTwo);
    let mut policies = Vec::new();
    for (i, d) in defs.iter().enumerate() {
        let kind = match d.kind {
            CompressorKind::BinaryAdder => AdderKind::Binary,
            CompressorKind::TernaryAdder => AdderKind::Ternary,
            _ => continue,
        };
        for (carry_in, halving) in [(true, false), (false, false), (true, true), (false, true)] {
            let base = Policy {
                adder: i,
                kind,
                rows: None,
                max_segments: 0,
                halving,
                open_slack: 0,
                keep_min: 0,
                shuffles: true,
                carry_in,
            };
            policies.push(base);
            policies.push(Policy { shuffles: false, ..base });
            if four_two.is_some() {
                for max_segments in [1, usize::MAX] {
                    for open_slack in 1..=5 {
                        for keep_min in 1..=3 {
                            for shuffles in [true, false] {
                                policies.push(Policy {
                                    rows: four_two,
                                    max_segments,
                                    open_slack,
                                    keep_min,
                                    shuffles,
                                    ..base
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    if policies.is_empty() {
        return Err(Error::Format("compressor library has no final adder".into()));
    }
    let mut best: Option<CompressionPlan> = None;
    let mut last_err = None;
    for policy in policies {
        match plan_with(heap, defs, policy) {
            Ok(p) => {
                let key = |p: &CompressionPlan| (p.lut_cost(), p.adder_bits(), p.stages.len());
                if best.as_ref().map_or(true, |b| key(&p) < key(b)) {
                    best = Some(p);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one policy ran"))
}
