//! Reference models that share no code with the generator: a primitive-level
//! interpreter for netlist files, an exhaustive cover enumerator, and a bridge
//! to an external ILP solver.

use std::io::Write;
use std::process::Command;

use serde_json::Value;
use tilemul::solver::{enumerate_placements, export_lp, Placement, TilingProblem};
use tilemul::Cost;

#[derive(Debug)]
enum Prim {
    Lut { inputs: Vec<usize>, init: u64, o6: usize, o5: Option<usize> },
    Mux { i0: usize, i1: usize, sel: usize, o: usize },
    Carry { s: usize, di: usize, ci: usize, o: usize, co: usize },
}

#[derive(Clone, Copy, Debug)]
enum Source {
    X(u32),
    Y(u32),
    Const(bool),
    Node,
}

/// A netlist read back from its JSON file, evaluated from the primitive
/// definitions alone.
#[derive(Debug)]
pub struct JsonNetlist {
    sources: Vec<Source>,
    prims: Vec<Prim>,
    outputs: Vec<usize>,
    pub trunc: u32,
    pub luts: usize,
}

fn field(v: &Value, key: &str) -> Result<usize, String> {
    v[key].as_u64().map(|n| n as usize).ok_or_else(|| format!("missing {key} in {v}"))
}

impl JsonNetlist {
    pub fn parse(text: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let sources = v["nets"]
            .as_array()
            .ok_or("no nets")?
            .iter()
            .map(|n| {
                let d = &n["driver"];
                Ok(match d["kind"].as_str() {
                    Some("input-x") => Source::X(field(d, "bit")? as u32),
                    Some("input-y") => Source::Y(field(d, "bit")? as u32),
                    Some("const") => Source::Const(d["value"].as_bool().ok_or("const without value")?),
                    Some("node") => Source::Node,
                    other => return Err(format!("unknown driver {other:?}")),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let mut luts = 0;
        let prims = v["nodes"]
            .as_array()
            .ok_or("no nodes")?
            .iter()
            .map(|n| {
                Ok(match n["kind"].as_str() {
                    Some("lut") => {
                        luts += 1;
                        let inputs = n["inputs"]
                            .as_array()
                            .ok_or("lut without inputs")?
                            .iter()
                            .map(|i| i.as_u64().map(|k| k as usize).ok_or("bad input"))
                            .collect::<Result<Vec<_>, _>>()?;
                        let init = u64::from_str_radix(n["init"].as_str().ok_or("lut without init")?, 16)
                            .map_err(|e| e.to_string())?;
                        let o5 = if n["o5"].is_null() { None } else { Some(field(n, "o5")?) };
                        Prim::Lut { inputs, init, o6: field(n, "o6")?, o5 }
                    }
                    Some("mux7") => Prim::Mux {
                        i0: field(n, "i0")?,
                        i1: field(n, "i1")?,
                        sel: field(n, "sel")?,
                        o: field(n, "o")?,
                    },
                    Some("carry") => Prim::Carry {
                        s: field(n, "s")?,
                        di: field(n, "di")?,
                        ci: field(n, "ci")?,
                        o: field(n, "o")?,
                        co: field(n, "co")?,
                    },
                    other => return Err(format!("unknown node {other:?}")),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let outputs = v["p"]
            .as_array()
            .ok_or("no product port")?
            .iter()
            .map(|i| i.as_u64().map(|k| k as usize).ok_or_else(|| "bad output".to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JsonNetlist {
            sources,
            prims,
            outputs,
            trunc: v["board"]["trunc"].as_u64().unwrap_or(0) as u32,
            luts,
        })
    }

    /// Product port value. Fails if a primitive reads a net nobody has
    /// driven yet, so the file's node order is checked as well.
    pub fn eval(&self, x: u128, y: u128) -> Result<u128, String> {
        let mut val: Vec<Option<bool>> = self
            .sources
            .iter()
            .map(|s| match *s {
                Source::X(i) => Some(x >> i & 1 == 1),
                Source::Y(j) => Some(y >> j & 1 == 1),
                Source::Const(b) => Some(b),
                Source::Node => None,
            })
            .collect();
        let get = |val: &[Option<bool>], n: usize| val[n].ok_or_else(|| format!("net {n} read before it is driven"));
        for p in &self.prims {
            match p {
                Prim::Lut { inputs, init, o6, o5 } => {
                    let mut idx = 0usize;
                    for (k, &n) in inputs.iter().enumerate() {
                        idx |= (get(&val, n)? as usize) << k;
                    }
                    match o5 {
                        // dual output: I5 is high for O6, O5 reads the low half
                        Some(o5) => {
                            let low = idx & 31;
                            val[*o6] = Some(init >> (32 | low) & 1 == 1);
                            val[*o5] = Some(init >> low & 1 == 1);
                        }
                        None => val[*o6] = Some(init >> idx & 1 == 1),
                    }
                }
                Prim::Mux { i0, i1, sel, o } => {
                    let pick = if get(&val, *sel)? { *i1 } else { *i0 };
                    val[*o] = Some(get(&val, pick)?);
                }
                Prim::Carry { s, di, ci, o, co } => {
                    let (s, di, ci) = (get(&val, *s)?, get(&val, *di)?, get(&val, *ci)?);
                    val[*o] = Some(s ^ ci);
                    val[*co] = Some(if s { ci } else { di });
                }
            }
        }
        self.outputs
            .iter()
            .enumerate()
            .try_fold(0u128, |acc, (i, &n)| Ok(acc | (get(&val, n)? as u128) << i))
    }
}

/// Cheapest cover found by listing every cover of the board. Optional cells
/// may stay uncovered while their total weight fits the budget.
pub fn brute_force_cover(p: &TilingProblem) -> Option<Cost> {
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
            let Some(k) = self.covered.iter().position(|&c| !c) else {
                let c = self.p.objective_of(&self.chosen);
                if self.best.is_none_or(|x| c < x) {
                    self.best = Some(c);
                }
                return;
            };
            for i in 0..self.placements.len() {
                if !self.cells[i].contains(&k) || self.cells[i].iter().any(|&c| self.covered[c]) {
                    continue;
                }
                let cs = self.cells[i].clone();
                cs.iter().for_each(|&c| self.covered[c] = true);
                self.chosen.push(self.placements[i].clone());
                self.rec(skipped);
                self.chosen.pop();
                cs.iter().for_each(|&c| self.covered[c] = false);
            }
            let cell = b.cell(k);
            let weight = skipped + (1u128 << (cell.x + cell.y));
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

const HIGHS: &str = r#"
import sys, highspy
h = highspy.Highs()
h.setOptionValue("output_flag", False)
h.readModel(sys.argv[1])
h.run()
print(h.modelStatusToString(h.getModelStatus()))
print(repr(h.getInfo().objective_function_value))
"#;

/// Whether `python3` can import the HiGHS bindings.
pub fn external_solver_available() -> bool {
    Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success())
}

/// Solves the exported model with HiGHS and returns its optimum.
pub fn external_optimum(problem: &TilingProblem) -> Result<f64, String> {
    let lp = export_lp(problem).map_err(|e| e.to_string())?;
    let mut file = tempfile::Builder::new().suffix(".lp").tempfile().map_err(|e| e.to_string())?;
    file.write_all(lp.as_bytes()).map_err(|e| e.to_string())?;
    let out = Command::new("python3")
        .args(["-c", HIGHS])
        .arg(file.path())
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    match (lines.next(), lines.next()) {
        (Some("Optimal"), Some(obj)) => obj.trim().parse().map_err(|_| format!("bad objective {obj:?}")),
        _ => Err(format!("HiGHS: {text} {}", String::from_utf8_lossy(&out.stderr))),
    }
}
