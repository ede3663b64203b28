//! Two-level minimisation: Quine-McCluskey prime generation followed by an
//! exact minimum cover of the remaining minterms (Petrick's problem, solved
//! by branch and bound rather than by expanding the product of sums).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::truth::BitTable;

/// Product term. Variable `k` appears iff bit `k` of `care` is set, and it
/// appears complemented iff bit `k` of `value` is clear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube {
    pub care: u16,
    pub value: u16,
}

impl Cube {
    pub fn minterm(vars: usize, m: usize) -> Self {
        Cube {
            care: ((1u32 << vars) - 1) as u16,
            value: m as u16,
        }
    }

    pub fn literals(&self) -> u32 {
        self.care.count_ones()
    }

    pub fn covers(&self, row: usize) -> bool {
        (row as u16 ^ self.value) & self.care == 0
    }

    fn merge(&self, other: &Cube) -> Option<Cube> {
        if self.care != other.care {
            return None;
        }
        let diff = self.value ^ other.value;
        (diff.count_ones() == 1).then(|| Cube {
            care: self.care & !diff,
            value: self.value & !diff,
        })
    }
}

/// Sum of products over named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sop {
    pub vars: Vec<String>,
    pub cubes: Vec<Cube>,
}

impl Sop {
    pub fn eval(&self, row: usize) -> bool {
        self.cubes.iter().any(|c| c.covers(row))
    }

    pub fn to_table(&self) -> BitTable {
        BitTable::from_fn(self.vars.len(), |r| self.eval(r))
    }

    pub fn literal_count(&self) -> u32 {
        self.cubes.iter().map(Cube::literals).sum()
    }

    /// Parses the `a&!b | c` notation produced by `Display`, resolving
    /// names against `vars`.
    pub fn parse(text: &str, vars: &[String]) -> Result<Sop> {
        let text = text.trim();
        let mut cubes = Vec::new();
        if text != "0" {
            for term in text.split('|') {
                let term = term.trim();
                let mut cube = Cube { care: 0, value: 0 };
                if term != "1" {
                    for lit in term.split('&') {
                        let lit = lit.trim();
                        let (neg, name) = match lit.strip_prefix('!') {
                            Some(rest) => (true, rest),
                            None => (false, lit),
                        };
                        let k = vars
                            .iter()
                            .position(|v| v == name)
                            .ok_or_else(|| Error::Format(format!("unknown variable {name:?} in {text:?}")))?;
                        cube.care |= 1 << k;
                        if !neg {
                            cube.value |= 1 << k;
                        }
                    }
                }
                cubes.push(cube);
            }
        }
        Ok(Sop {
            vars: vars.to_vec(),
            cubes,
        })
    }
}

impl fmt::Display for Sop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cubes.is_empty() {
            return f.write_str("0");
        }
        for (i, cube) in self.cubes.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            if cube.care == 0 {
                f.write_str("1")?;
                continue;
            }
            let mut first = true;
            for (k, name) in self.vars.iter().enumerate() {
                if cube.care >> k & 1 == 0 {
                    continue;
                }
                if !first {
                    f.write_str("&")?;
                }
                first = false;
                if cube.value >> k & 1 == 0 {
                    f.write_str("!")?;
                }
                f.write_str(name)?;
            }
        }
        Ok(())
    }
}

/// All prime implicants of `f`, sorted.
pub fn prime_implicants(f: &BitTable) -> Vec<Cube> {
    let n = f.vars();
    let mut current: BTreeSet<Cube> = (0..f.rows()).filter(|&r| f.get(r)).map(|m| Cube::minterm(n, m)).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let cubes: Vec<Cube> = current.iter().copied().collect();
        let mut merged = vec![false; cubes.len()];
        let mut next = BTreeSet::new();
        for i in 0..cubes.len() {
            for j in i + 1..cubes.len() {
                if let Some(m) = cubes[i].merge(&cubes[j]) {
                    merged[i] = true;
                    merged[j] = true;
                    next.insert(m);
                }
            }
        }
        primes.extend(cubes.iter().zip(&merged).filter(|(_, &m)| !m).map(|(c, _)| *c));
        current = next;
    }
    primes.into_iter().collect()
}

/// Minimum sum of products of `f`: fewest cubes, then fewest literals.
pub fn qm_minimize(f: &BitTable, vars: &[String]) -> Sop {
    assert_eq!(vars.len(), f.vars(), "one name per variable");
    let primes = prime_implicants(f);
    let minterms: Vec<usize> = (0..f.rows()).filter(|&r| f.get(r)).collect();
    let chosen = minimum_cover(&primes, &minterms);
    let mut cubes: Vec<Cube> = chosen.into_iter().map(|i| primes[i]).collect();
    cubes.sort_by_key(|c| (std::cmp::Reverse(c.care.count_ones()), c.care, c.value));
    Sop {
        vars: vars.to_vec(),
        cubes,
    }
}

fn minimum_cover(primes: &[Cube], minterms: &[usize]) -> Vec<usize> {
    let covering: Vec<Vec<usize>> = minterms
        .iter()
        .map(|&m| (0..primes.len()).filter(|&p| primes[p].covers(m)).collect())
        .collect();

    let mut chosen = Vec::new();
    let mut covered = vec![false; minterms.len()];
    // essential primes
    for cands in &covering {
        if cands.len() == 1 && !chosen.contains(&cands[0]) {
            chosen.push(cands[0]);
        }
    }
    mark(&chosen, primes, minterms, &mut covered);

    let mut best: Option<(usize, u32, Vec<usize>)> = None;
    let mut stack = Vec::new();
    branch(primes, minterms, &covering, &mut covered, &mut stack, &mut best);
    if let Some((_, _, extra)) = best {
        chosen.extend(extra);
    }
    chosen.sort_unstable();
    chosen
}

fn mark(sel: &[usize], primes: &[Cube], minterms: &[usize], covered: &mut [bool]) {
    for (k, &m) in minterms.iter().enumerate() {
        if sel.iter().any(|&p| primes[p].covers(m)) {
            covered[k] = true;
        }
    }
}

fn branch(
    primes: &[Cube],
    minterms: &[usize],
    covering: &[Vec<usize>],
    covered: &mut Vec<bool>,
    stack: &mut Vec<usize>,
    best: &mut Option<(usize, u32, Vec<usize>)>,
) {
    let lits: u32 = stack.iter().map(|&p| primes[p].literals()).sum();
    if let Some((n, l, _)) = best {
        if stack.len() > *n || (stack.len() == *n && lits >= *l) {
            return;
        }
    }
    // the open minterm with the fewest candidates
    let open = (0..minterms.len())
        .filter(|&k| !covered[k])
        .min_by_key(|&k| covering[k].len());
    let Some(k) = open else {
        *best = Some((stack.len(), lits, stack.clone()));
        return;
    };
    if let Some((n, _, _)) = best {
        if stack.len() + 1 > *n {
            return;
        }
    }
    let mut cands = covering[k].clone();
    cands.sort_by_key(|&p| {
        let gain = (0..minterms.len()).filter(|&j| !covered[j] && primes[p].covers(minterms[j])).count();
        (std::cmp::Reverse(gain), primes[p].literals(), p)
    });
    for p in cands {
        let saved = covered.clone();
        mark(&[p], primes, minterms, covered);
        stack.push(p);
        branch(primes, minterms, covering, covered, stack, best);
        stack.pop();
        *covered = saved;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|k| format!("v{k}")).collect()
    }

    #[test]
    fn constants() {
        let v = names(3);
        assert_eq!(qm_minimize(&BitTable::zero(3), &v).to_string(), "0");
        assert_eq!(qm_minimize(&BitTable::from_fn(3, |_| true), &v).to_string(), "1");
    }

    #[test]
    fn xor_needs_all_minterms() {
        let f = BitTable::from_fn(3, |r| (r as u32).count_ones() % 2 == 1);
        let sop = qm_minimize(&f, &names(3));
        assert_eq!(sop.cubes.len(), 4);
        assert_eq!(sop.literal_count(), 12);
    }

    #[test]
    fn classic_cyclic_core() {
        // f = sum m(0,1,2,5,6,7) has no essential primes and two
        // minimum covers of three cubes each
        let ms = [0, 1, 2, 5, 6, 7];
        let f = BitTable::from_fn(3, |r| ms.contains(&r));
        assert_eq!(prime_implicants(&f).len(), 6);
        let sop = qm_minimize(&f, &names(3));
        assert_eq!(sop.cubes.len(), 3);
        assert_eq!(sop.to_table(), f);
    }

    #[test]
    fn two_bit_product_bit1() {
        // bit 1 of (a1 a0) * (b1 b0) = a1 b0 xor a0 b1
        let v: Vec<String> = ["a0", "a1", "b0", "b1"].iter().map(|s| s.to_string()).collect();
        let f = BitTable::from_fn(4, |r| {
            let a = r & 3;
            let b = r >> 2 & 3;
            (a * b) >> 1 & 1 == 1
        });
        let sop = qm_minimize(&f, &v);
        assert_eq!(sop.cubes.len(), 4);
        assert_eq!(Sop::parse(&sop.to_string(), &v).unwrap(), sop);
    }

    fn brute_min_terms(f: &BitTable) -> usize {
        // oracle: smallest subset of primes covering all minterms
        let primes = prime_implicants(f);
        let ms: Vec<usize> = (0..f.rows()).filter(|&r| f.get(r)).collect();
        if ms.is_empty() {
            return 0;
        }
        (1u32..1 << primes.len())
            .filter(|s| ms.iter().all(|&m| (0..primes.len()).any(|p| s >> p & 1 == 1 && primes[p].covers(m))))
            .map(|s| s.count_ones() as usize)
            .min()
            .unwrap()
    }

    proptest! {
        #[test]
        fn minimised_sop_is_equivalent(n in 1usize..=6, seed in any::<u64>()) {
            let f = BitTable::from_fn(n, |r| seed.rotate_left(r as u32 * 7) >> (r % 64) & 1 == 1);
            let v = names(n);
            let sop = qm_minimize(&f, &v);
            prop_assert_eq!(sop.to_table(), f);
            let reparsed = Sop::parse(&sop.to_string(), &v).unwrap();
            prop_assert_eq!(reparsed.to_table(), f);
        }

        #[test]
        fn cover_size_is_minimum(bits in any::<u16>()) {
            let f = BitTable::from_fn(4, |r| bits >> r & 1 == 1);
            let primes = prime_implicants(&f);
            prop_assume!(primes.len() <= 16);
            prop_assert_eq!(qm_minimize(&f, &names(4)).cubes.len(), brute_min_terms(&f));
        }
    }
}
