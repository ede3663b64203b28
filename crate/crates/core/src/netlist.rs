//! Gate-level netlists of tiled multipliers: construction, bit-parallel
//! simulation and verification against integer multiplication.

mod hdl;
mod svg;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitheap::{AdderKind, BitSource, CompressionPlan, ResultBit};
use crate::error::{Error, Result};
use crate::logic::tile::Realization;
use crate::logic::{BitTable, InputBit, LutSite, LutSlot};
use crate::shape::Board;
use crate::solver::{TilingProblem, TilingSolution};

pub use hdl::{emit_hdl, parse_inits, HdlDialect};
pub use svg::emit_svg;

pub type NetId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Driver {
    InputX { bit: u32 },
    InputY { bit: u32 },
    Const { value: bool },
    /// Output of node `node`; `port` names the node output.
    Node { node: usize, port: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub driver: Driver,
}

/// Primitive cells. A LUT with `o5` set works in dual-output mode: its
/// sixth input is tied high, `o5` reads `init` bits 0..32 indexed by the
/// first five inputs and `o6` bits 32..64.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Node {
    Lut {
        inputs: Vec<NetId>,
        #[serde(with = "hex_init")]
        init: u64,
        o6: NetId,
        o5: Option<NetId>,
    },
    /// Two-input mux selected by `sel` (`i1` when high).
    Mux7 { i0: NetId, i1: NetId, sel: NetId, o: NetId },
    /// One position of a carry chain: `o = s ^ ci`, `co = s ? ci : di`.
    Carry {
        s: NetId,
        di: NetId,
        ci: NetId,
        o: NetId,
        co: NetId,
    },
}

mod hex_init {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016X}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        u64::from_str_radix(&text, 16).map_err(serde::de::Error::custom)
    }
}

impl Node {
    pub fn is_lut(&self) -> bool {
        matches!(self, Node::Lut { .. })
    }

    fn inputs(&self) -> Vec<NetId> {
        match self {
            Node::Lut { inputs, .. } => inputs.clone(),
            Node::Mux7 { i0, i1, sel, .. } => vec![*i0, *i1, *sel],
            Node::Carry { s, di, ci, .. } => vec![*s, *di, *ci],
        }
    }

    fn outputs(&self) -> Vec<(NetId, &'static str)> {
        match self {
            Node::Lut { o6, o5, .. } => {
                let mut v = vec![(*o6, "o6")];
                if let Some(o5) = o5 {
                    v.push((*o5, "o5"));
                }
                v
            }
            Node::Mux7 { o, .. } => vec![(*o, "o")],
            Node::Carry { o, co, .. } => vec![(*o, "o"), (*co, "co")],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub name: String,
    pub board: Board,
    pub nets: Vec<Net>,
    /// Nodes in topological order.
    pub nodes: Vec<Node>,
    pub x: Vec<NetId>,
    pub y: Vec<NetId>,
    /// Product bits, least significant first; bit `i` has weight
    /// `2^(trunc + i)` for truncated boards.
    pub p: Vec<NetId>,
}

struct Builder {
    nets: Vec<Net>,
    nodes: Vec<Node>,
    zero: NetId,
    one: NetId,
    x: Vec<NetId>,
    y: Vec<NetId>,
}

impl Builder {
    fn new(board: &Board) -> Self {
        let mut b = Builder {
            nets: Vec::new(),
            nodes: Vec::new(),
            zero: 0,
            one: 0,
            x: Vec::new(),
            y: Vec::new(),
        };
        b.zero = b.net("const0", Driver::Const { value: false });
        b.one = b.net("const1", Driver::Const { value: true });
        b.x = (0..board.w_x).map(|i| b.net(&format!("x{i}"), Driver::InputX { bit: i })).collect();
        b.y = (0..board.w_y).map(|i| b.net(&format!("y{i}"), Driver::InputY { bit: i })).collect();
        b
    }

    fn net(&mut self, name: &str, driver: Driver) -> NetId {
        self.nets.push(Net {
            name: name.to_string(),
            driver,
        });
        (self.nets.len() - 1) as NetId
    }

    /// Adds a node, creating its output nets named `prefix_port`.
    fn node(&mut self, prefix: &str, make: impl FnOnce(&mut dyn FnMut(&str) -> NetId) -> Node) -> Node {
        let idx = self.nodes.len();
        let mut pending: Vec<(String, NetId)> = Vec::new();
        let base = self.nets.len() as NetId;
        let mut alloc = |port: &str| {
            let id = base + pending.len() as NetId;
            pending.push((port.to_string(), id));
            id
        };
        let node = make(&mut alloc);
        for (port, _) in pending {
            self.nets.push(Net {
                name: format!("{prefix}_{port}"),
                driver: Driver::Node {
                    node: idx,
                    port: port.clone(),
                },
            });
        }
        self.nodes.push(node.clone());
        node
    }

    fn lut(&mut self, prefix: &str, inputs: Vec<NetId>, init: u64, dual: bool) -> (NetId, Option<NetId>) {
        let n = self.node(prefix, |alloc| Node::Lut {
            inputs,
            init,
            o6: alloc("o6"),
            o5: dual.then(|| alloc("o5")),
        });
        match n {
            Node::Lut { o6, o5, .. } => (o6, o5),
            _ => unreachable!(),
        }
    }

    fn carry(&mut self, prefix: &str, s: NetId, di: NetId, ci: NetId) -> (NetId, NetId) {
        let n = self.node(prefix, |alloc| Node::Carry {
            s,
            di,
            ci,
            o: alloc("o"),
            co: alloc("co"),
        });
        match n {
            Node::Carry { o, co, .. } => (o, co),
            _ => unreachable!(),
        }
    }

    fn mux(&mut self, prefix: &str, i0: NetId, i1: NetId, sel: NetId) -> NetId {
        match self.node(prefix, |alloc| Node::Mux7 { i0, i1, sel, o: alloc("o") }) {
            Node::Mux7 { o, .. } => o,
            _ => unreachable!(),
        }
    }

    /// Packs functions of all `inputs` into LUTs the same way compressor
    /// costs are computed (every function reads every input).
    fn functions(&mut self, prefix: &str, inputs: &[NetId], tables: &[BitTable]) -> Result<Vec<NetId>> {
        let full = (1u32 << inputs.len()) - 1;
        let plan = crate::logic::lutmap::map_masks(&vec![full; tables.len()])?;
        let mut out: Vec<Option<NetId>> = vec![None; tables.len()];
        for (s, slot) in plan.slots.iter().enumerate() {
            let name = format!("{prefix}_l{s}");
            match *slot {
                LutSlot::Single(f) => {
                    out[f] = Some(self.lut(&name, inputs.to_vec(), tables[f].lut_init(), false).0);
                }
                LutSlot::Pair(f, g) => {
                    let (o6, o5) = self.lut(&name, inputs.to_vec(), dual_init(&tables[f], &tables[g]), true);
                    out[f] = Some(o6);
                    out[g] = o5;
                }
                LutSlot::Wide(_) => {
                    return Err(Error::Unsupported("seven-input compressor output".into()));
                }
            }
        }
        Ok(out.into_iter().map(|o| o.expect("every function placed")).collect())
    }
}

fn dual_init(hi: &BitTable, lo: &BitTable) -> u64 {
    let rows = hi.rows().min(32);
    let mut init = 0u64;
    for r in 0..32 {
        if lo.get(r % rows) {
            init |= 1 << r;
        }
        if hi.get(r % rows) {
            init |= 1 << (r + 32);
        }
    }
    init
}

fn table_of(vars: usize, f: impl Fn(&[bool]) -> bool) -> BitTable {
    BitTable::from_fn(vars, |r| {
        let bits: Vec<bool> = (0..vars).map(|k| r >> k & 1 == 1).collect();
        f(&bits)
    })
}

/// Materialises tiles, compressor stages and the final adder.
pub fn build_netlist(problem: &TilingProblem, solution: &TilingSolution, plan: &CompressionPlan) -> Result<Netlist> {
    let board = solution.board;
    let mut b = Builder::new(&board);
    let mut bit_net: Vec<Option<NetId>> = vec![None; plan.heap.bits.len()];

    // tile outputs, in placement order
    let mut tile_nets: Vec<Vec<NetId>> = Vec::new();
    for (i, p) in solution.placements.iter().enumerate() {
        let tile = &problem
            .tiles
            .get(p.tile)
            .ok_or_else(|| Error::Inconsistent(format!("placement {i} names an unknown tile")))?
            .tile;
        let resolve = |bit: &InputBit, b: &Builder| match *bit {
            InputBit::X(k) => b.x[(p.dx + k) as usize],
            InputBit::Y(k) => b.y[(p.dy + k) as usize],
        };
        let nets = match &tile.realization {
            Realization::Logic(t) => {
                let mut outs: Vec<Option<NetId>> = vec![None; t.functions.len()];
                for (s, site) in t.sites.iter().enumerate() {
                    tile_site(&mut b, &format!("t{i}_l{s}"), site, &resolve, &mut outs)?;
                }
                outs.into_iter()
                    .map(|o| o.ok_or_else(|| Error::Inconsistent(format!("tile of placement {i} leaves an output unmapped"))))
                    .collect::<Result<Vec<_>>>()?
            }
            Realization::CarryChain { length, along_x } => {
                let k = *length;
                // long operand bits `a`, the two short operand bits `s0`, `s1`
                let (long, short) = if *along_x {
                    (&b.x[p.dx as usize..], &b.y[p.dy as usize..])
                } else {
                    (&b.y[p.dy as usize..], &b.x[p.dx as usize..])
                };
                let a: Vec<NetId> = long[..k as usize].to_vec();
                let (s0, s1) = (short[0], short[1]);
                let and2 = table_of(2, |v| v[0] & v[1]);
                let (bit0, _) = b.lut(&format!("t{i}_l0"), vec![a[0], s0], and2.lut_init(), false);
                let mut outs = vec![bit0];
                let mut ci = b.zero;
                for j in 1..=k {
                    // p = (a_j & s0) ^ (a_{j-1} & s1), generate = a_{j-1} & s1
                    let name = format!("t{i}_l{j}");
                    let (o6, o5, di) = if j < k {
                        let hi = table_of(4, |v| (v[0] & v[2]) ^ (v[1] & v[3]));
                        let lo = table_of(4, |v| v[1] & v[3]);
                        let (o6, o5) = b.lut(&name, vec![a[j as usize], a[j as usize - 1], s0, s1], dual_init(&hi, &lo), true);
                        (o6, o5, None)
                    } else {
                        let f = table_of(2, |v| v[0] & v[1]);
                        let (o6, _) = b.lut(&name, vec![a[j as usize - 1], s1], f.lut_init(), false);
                        (o6, None, Some(b.zero))
                    };
                    let di = o5.or(di).expect("generate signal");
                    let (o, co) = b.carry(&format!("t{i}_c{j}"), o6, di, ci);
                    outs.push(o);
                    ci = co;
                }
                outs.push(ci);
                outs
            }
        };
        if nets.len() != tile.output_weights().len() {
            return Err(Error::Inconsistent(format!("tile of placement {i} has the wrong output count")));
        }
        tile_nets.push(nets);
    }

    for (id, bit) in plan.heap.bits.iter().enumerate() {
        match bit.source {
            BitSource::Tile { placement, output } => {
                bit_net[id] = Some(
                    *tile_nets
                        .get(placement)
                        .and_then(|v| v.get(output))
                        .ok_or_else(|| Error::Inconsistent(format!("heap bit {id} has no tile output")))?,
                )
            }
            BitSource::Constant => bit_net[id] = Some(b.one),
            _ => {}
        }
    }
    let net_of = |bit_net: &[Option<NetId>], id: usize| {
        bit_net[id].ok_or_else(|| Error::Inconsistent(format!("heap bit {id} used before it is produced")))
    };

    for (si, stage) in plan.stages.iter().enumerate() {
        for (ci, c) in stage.counters.iter().enumerate() {
            let mut inputs = Vec::new();
            let mut weights = Vec::new();
            for (j, col) in c.inputs.iter().enumerate() {
                for &bit in col {
                    inputs.push(net_of(&bit_net, bit)?);
                    weights.push(1u32 << j);
                }
            }
            let kept: Vec<usize> = (0..c.outputs.len()).filter(|&j| c.outputs[j].is_some()).collect();
            let tables: Vec<BitTable> = kept
                .iter()
                .map(|&j| {
                    BitTable::from_fn(inputs.len(), |r| {
                        let sum: u32 = (0..inputs.len()).filter(|&k| r >> k & 1 == 1).map(|k| weights[k]).sum();
                        sum >> j & 1 == 1
                    })
                })
                .collect();
            let nets = b.functions(&format!("s{si}_g{ci}"), &inputs, &tables)?;
            for (n, &j) in kept.iter().enumerate() {
                bit_net[c.outputs[j].expect("kept")] = Some(nets[n]);
            }
        }
        for (gi, seg) in stage.segments.iter().enumerate() {
            let mut ci = b.zero;
            for (k, slots) in seg.rows.iter().enumerate() {
                let name = format!("s{si}_r{gi}_{k}");
                let present: Vec<(usize, NetId)> = slots
                    .iter()
                    .enumerate()
                    .filter_map(|(s, o)| o.map(|bit| net_of(&bit_net, bit).map(|n| (s, n))))
                    .collect::<Result<Vec<_>>>()?;
                let nets: Vec<NetId> = present.iter().map(|p| p.1).collect();
                let slot_of: Vec<usize> = present.iter().map(|p| p.0).collect();
                let val = |v: &[bool], s: usize| slot_of.iter().position(|&x| x == s).is_some_and(|k| v[k]);
                let p = table_of(nets.len(), |v| val(v, 0) ^ val(v, 1) ^ val(v, 2) ^ val(v, 3));
                let d = slots[3].map(|bit| net_of(&bit_net, bit)).transpose()?.unwrap_or(b.zero);
                let o6 = if let Some(m) = seg.majorities[k] {
                    let maj = table_of(nets.len(), |v| {
                        (val(v, 0) as u8 + val(v, 1) as u8 + val(v, 2) as u8) >= 2
                    });
                    let (o6, o5) = b.lut(&name, nets, dual_init(&p, &maj), true);
                    bit_net[m] = o5;
                    o6
                } else {
                    b.lut(&name, nets, p.lut_init(), false).0
                };
                let (o, co) = b.carry(&format!("{name}_c"), o6, d, ci);
                bit_net[seg.sums[k]] = Some(o);
                ci = co;
            }
            if let Some(k) = seg.carry {
                bit_net[k] = Some(ci);
            }
        }
    }

    let mut sum_nets: Vec<NetId> = Vec::new();
    let mut carry_out = None;
    if let Some(a) = &plan.adder {
        let mut ci = match a.carry_in {
            Some(bit) => net_of(&bit_net, bit)?,
            None => b.zero,
        };
        let mut prev_maj: Option<NetId> = None;
        for (k, col) in a.rows.iter().enumerate() {
            let name = format!("add_{}", a.lo as usize + k);
            let mut nets: Vec<NetId> = col.iter().map(|&bit| net_of(&bit_net, bit)).collect::<Result<_>>()?;
            let rows = nets.len();
            let (o6, di) = match a.kind {
                AdderKind::Binary => {
                    let p = table_of(rows, |v| v.iter().fold(false, |acc, &x| acc ^ x));
                    let di = nets.first().copied().unwrap_or(b.zero);
                    (b.lut(&name, nets, p.lut_init(), false).0, di)
                }
                AdderKind::Ternary => {
                    // x = a ^ b ^ c, y = maj of the previous column; the chain adds x + y
                    if let Some(m) = prev_maj {
                        nets.push(m);
                    }
                    let n = nets.len();
                    let p = table_of(n, |v| v.iter().fold(false, |acc, &x| acc ^ x));
                    let maj = table_of(n, |v| (v[..rows].iter().filter(|&&x| x).count()) >= 2);
                    let di = prev_maj.unwrap_or(b.zero);
                    let (o6, o5) = b.lut(&name, nets, dual_init(&p, &maj), true);
                    prev_maj = o5;
                    (o6, di)
                }
            };
            let (o, co) = b.carry(&format!("{name}_c"), o6, di, ci);
            sum_nets.push(o);
            ci = co;
        }
        if a.carry_out {
            carry_out = Some(ci);
        }
    }

    let mut p = Vec::new();
    for (w, r) in plan.result.iter().enumerate() {
        if (w as u32) < board.trunc {
            continue;
        }
        let net = match *r {
            ResultBit::Zero => b.zero,
            ResultBit::Wire { bit } => net_of(&bit_net, bit)?,
            ResultBit::Sum { column } => {
                let a = plan.adder.as_ref().ok_or_else(|| Error::Inconsistent("sum bit without adder".into()))?;
                sum_nets[(column - a.lo) as usize]
            }
            ResultBit::Carry => carry_out.ok_or_else(|| Error::Inconsistent("carry bit without carry".into()))?,
        };
        p.push(net);
    }
    let netlist = Netlist {
        name: format!("mult_{}x{}{}", board.w_x, board.w_y, if board.trunc > 0 { format!("_t{}", board.trunc) } else { String::new() }),
        board,
        nets: b.nets,
        nodes: b.nodes,
        x: b.x,
        y: b.y,
        p,
    };
    netlist.check()?;
    Ok(netlist)
}

fn tile_site(
    b: &mut Builder,
    name: &str,
    site: &LutSite,
    resolve: &dyn Fn(&InputBit, &Builder) -> NetId,
    outs: &mut [Option<NetId>],
) -> Result<()> {
    let nets: Vec<NetId> = site.inputs.iter().map(|i| resolve(i, b)).collect();
    match site.init.as_slice() {
        [init] => {
            let (o6, o5) = b.lut(name, nets, *init, site.o5.is_some());
            outs[site.o6] = Some(o6);
            if let Some(g) = site.o5 {
                outs[g] = o5;
            }
        }
        [lo, hi] => {
            let (sel, six) = nets.split_last().expect("seven inputs");
            let (a, _) = b.lut(&format!("{name}a"), six.to_vec(), *lo, false);
            let (c, _) = b.lut(&format!("{name}b"), six.to_vec(), *hi, false);
            outs[site.o6] = Some(b.mux(&format!("{name}_f7"), a, c, *sel));
        }
        _ => return Err(Error::Inconsistent(format!("LUT site {name} has no init"))),
    }
    Ok(())
}

/// Evaluates a LUT on 64 lanes at once.
fn lut_lanes(words: &[u64], init: u64, dual: bool) -> (u64, u64) {
    let k = words.len();
    let eval = |offset: usize, rows: usize| -> u64 {
        let mut acc = 0u64;
        for r in 0..rows {
            if init >> (r | offset) & 1 == 0 {
                continue;
            }
            let mut m = !0u64;
            for (i, w) in words.iter().enumerate() {
                m &= if r >> i & 1 == 1 { *w } else { !*w };
            }
            acc |= m;
        }
        acc
    };
    let rows = 1usize << k;
    if dual {
        (eval(32, rows), eval(0, rows))
    } else {
        (eval(0, rows), 0)
    }
}

impl Netlist {
    pub fn lut_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_lut()).count()
    }

    pub fn carry_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Carry { .. })).count()
    }

    /// Structural checks: every net driven once, nodes in topological
    /// order, LUT input counts within the primitive's limits.
    pub fn check(&self) -> Result<()> {
        let n = self.nets.len();
        let mut driven_by: Vec<Option<usize>> = vec![None; n];
        for (i, node) in self.nodes.iter().enumerate() {
            for (net, port) in node.outputs() {
                let net = net as usize;
                if net >= n || driven_by[net].is_some() {
                    return Err(Error::Inconsistent(format!("net {net} driven twice")));
                }
                match &self.nets[net].driver {
                    Driver::Node { node, port: p } if *node == i && p == port => {}
                    _ => return Err(Error::Inconsistent(format!("net {net} disagrees with its driver"))),
                }
                driven_by[net] = Some(i);
            }
            if let Node::Lut { inputs, o5, .. } = node {
                if inputs.len() > 6 || (o5.is_some() && inputs.len() > 5) {
                    return Err(Error::Inconsistent(format!("LUT {i} has too many inputs")));
                }
            }
            for net in node.inputs() {
                let net = net as usize;
                if net >= n {
                    return Err(Error::Inconsistent(format!("node {i} reads unknown net {net}")));
                }
                if let Driver::Node { node: d, .. } = self.nets[net].driver {
                    if d >= i {
                        return Err(Error::Inconsistent(format!("node {i} reads net {net} before it is driven")));
                    }
                }
            }
        }
        for (net, info) in self.nets.iter().enumerate() {
            if matches!(info.driver, Driver::Node { .. }) && driven_by[net].is_none() {
                return Err(Error::Inconsistent(format!("net {} has no driver", info.name)));
            }
        }
        Ok(())
    }

    /// Evaluates 64 operand pairs at once; lane `l` uses `xs[l]`, `ys[l]`.
    fn simulate_lanes(&self, xs: &[u128; 64], ys: &[u128; 64]) -> [u128; 64] {
        let mut v = vec![0u64; self.nets.len()];
        let spread = |ops: &[u128; 64], bit: u32| -> u64 {
            ops.iter().enumerate().fold(0u64, |w, (l, o)| w | ((o >> bit & 1) as u64) << l)
        };
        for (i, net) in self.nets.iter().enumerate() {
            v[i] = match net.driver {
                Driver::InputX { bit } => spread(xs, bit),
                Driver::InputY { bit } => spread(ys, bit),
                Driver::Const { value } => {
                    if value {
                        !0
                    } else {
                        0
                    }
                }
                Driver::Node { .. } => 0,
            };
        }
        for node in &self.nodes {
            match node {
                Node::Lut { inputs, init, o6, o5 } => {
                    let words: Vec<u64> = inputs.iter().map(|&n| v[n as usize]).collect();
                    let (a, b) = lut_lanes(&words, *init, o5.is_some());
                    v[*o6 as usize] = a;
                    if let Some(o5) = o5 {
                        v[*o5 as usize] = b;
                    }
                }
                Node::Mux7 { i0, i1, sel, o } => {
                    let s = v[*sel as usize];
                    v[*o as usize] = (v[*i1 as usize] & s) | (v[*i0 as usize] & !s);
                }
                Node::Carry { s, di, ci, o, co } => {
                    let (s, di, ci) = (v[*s as usize], v[*di as usize], v[*ci as usize]);
                    v[*o as usize] = s ^ ci;
                    v[*co as usize] = (s & ci) | (!s & di);
                }
            }
        }
        let mut out = [0u128; 64];
        for (i, &net) in self.p.iter().enumerate() {
            let w = v[net as usize];
            for (l, o) in out.iter_mut().enumerate() {
                *o |= ((w >> l & 1) as u128) << i;
            }
        }
        out
    }

    fn check_operands(&self, x: u128, y: u128) -> Result<()> {
        let b = &self.board;
        for (value, width) in [(x, b.w_x), (y, b.w_y)] {
            if width < 128 && value >> width != 0 {
                return Err(Error::WidthOverflow { value, width });
            }
        }
        Ok(())
    }

    /// Output port value for one operand pair.
    pub fn simulate(&self, x: u128, y: u128) -> Result<u128> {
        self.check_operands(x, y)?;
        let out = self.simulate_lanes(&[x; 64], &[y; 64]);
        Ok(out[0])
    }

    /// Output port values for a batch of operand pairs.
    pub fn simulate_batch(&self, pairs: &[(u128, u128)]) -> Result<Vec<u128>> {
        let mut out = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(64) {
            let mut xs = [0u128; 64];
            let mut ys = [0u128; 64];
            for (l, &(x, y)) in chunk.iter().enumerate() {
                self.check_operands(x, y)?;
                xs[l] = x;
                ys[l] = y;
            }
            let r = self.simulate_lanes(&xs, &ys);
            out.extend_from_slice(&r[..chunk.len()]);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled { pairs: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: u128,
    pub y: u128,
    pub got: u128,
    pub expected: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub board: Board,
    pub mode: VerifyMode,
    pub pairs: u64,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

/// Largest operand-width sum checked exhaustively by [`verify`].
pub const EXHAUSTIVE_BITS: u32 = 20;

/// Whether `out` is acceptable for `x * y`: exact for full multipliers,
/// within one unit of the last kept place for truncated ones.
pub fn accepts(board: &Board, x: u128, y: u128, out: u128) -> bool {
    let exact = x * y;
    if board.trunc == 0 {
        return out == exact;
    }
    let scaled = out << board.trunc;
    scaled.abs_diff(exact) < 1u128 << board.trunc
}

fn expected(board: &Board, x: u128, y: u128) -> u128 {
    (x * y) >> board.trunc
}

fn check_pairs(netlist: &Netlist, pairs: &[(u128, u128)]) -> Result<Option<Counterexample>> {
    let out = netlist.simulate_batch(pairs)?;
    Ok(pairs.iter().zip(out).find_map(|(&(x, y), got)| {
        (!accepts(&netlist.board, x, y, got)).then_some(Counterexample {
            x,
            y,
            got,
            expected: expected(&netlist.board, x, y),
        })
    }))
}

/// Checks the netlist against multiplication. Boards up to
/// [`EXHAUSTIVE_BITS`] operand bits in total are checked on every pair
/// unless a sampled mode is requested; larger ones must be sampled.
pub fn verify(netlist: &Netlist, mode: Option<VerifyMode>) -> Result<VerifyReport> {
    use rand::{Rng, SeedableRng};
    let b = netlist.board;
    let bits = b.w_x + b.w_y;
    let mode = match mode {
        Some(m) => m,
        None if bits <= EXHAUSTIVE_BITS => VerifyMode::Exhaustive,
        None => VerifyMode::Sampled { pairs: 100_000, seed: 0 },
    };
    let (pairs, cex) = match mode {
        VerifyMode::Exhaustive => {
            if bits > EXHAUSTIVE_BITS + 8 {
                return Err(Error::Unsupported(format!("{b} is too large for exhaustive verification")));
            }
            let nx = 1u128 << b.w_x;
            let ny = 1u128 << b.w_y;
            let found = (0..ny)
                .into_par_iter()
                .map(|y| {
                    let pairs: Vec<(u128, u128)> = (0..nx).map(|x| (x, y)).collect();
                    check_pairs(netlist, &pairs)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .next();
            ((nx * ny) as u64, found)
        }
        VerifyMode::Sampled { pairs, seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mx = mask_bits(b.w_x);
            let my = mask_bits(b.w_y);
            // the extremes first, then uniform samples
            let mut list: Vec<(u128, u128)> = vec![(0, 0), (mx, my), (mx, 0), (0, my), (mx, 1), (1, my)];
            while (list.len() as u64) < pairs {
                list.push((rng.gen::<u128>() & mx, rng.gen::<u128>() & my));
            }
            list.truncate(pairs.max(1) as usize);
            let found = list
                .par_chunks(4096)
                .map(|c| check_pairs(netlist, c))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .next();
            (list.len() as u64, found)
        }
    };
    Ok(VerifyReport {
        board: b,
        mode,
        pairs,
        passed: cex.is_none(),
        counterexample: cex,
    })
}

fn mask_bits(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1u128 << w) - 1
    }
}
