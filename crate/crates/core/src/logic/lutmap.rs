//! Packing single-output functions into fracturable 6-input LUTs.
//!
//! A LUT6_2 computes either one function of up to six inputs (O6), or two
//! functions (O6 and O5) whose combined support has at most five inputs.
//! A seven-input function takes two LUTs joined by the slice's F7 mux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::truth::InputBit;

pub const LUT_INPUTS: usize = 6;
pub const SHARED_LUT_INPUTS: usize = 5;
pub const WIDE_INPUTS: usize = 7;

/// What one physical LUT site (or F7 pair) implements; the indices refer to
/// the function list passed to [`map_to_luts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LutSlot {
    Single(usize),
    Pair(usize, usize),
    Wide(usize),
}

impl LutSlot {
    pub const fn luts(&self) -> u32 {
        match self {
            LutSlot::Wide(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutPlan {
    pub slots: Vec<LutSlot>,
}

impl LutPlan {
    pub fn lut_count(&self) -> u32 {
        self.slots.iter().map(LutSlot::luts).sum()
    }
}

/// Finds a packing with the fewest LUTs. Functions may be constant (empty
/// support); those need no LUT and are left out of the plan.
pub fn map_to_luts(supports: &[Vec<InputBit>]) -> Result<LutPlan> {
    let mut universe: Vec<InputBit> = supports.iter().flatten().copied().collect();
    universe.sort_unstable();
    universe.dedup();
    if universe.len() > 32 {
        return Err(Error::Unsupported("more than 32 distinct LUT inputs in one tile".into()));
    }
    let masks: Vec<u32> = supports
        .iter()
        .map(|s| {
            s.iter()
                .map(|i| 1u32 << universe.binary_search(i).expect("collected above"))
                .fold(0, |a, b| a | b)
        })
        .collect();
    map_masks(&masks)
}

/// [`map_to_luts`] on supports given as bit masks over a shared input list.
pub fn map_masks(masks: &[u32]) -> Result<LutPlan> {
    if let Some(m) = masks.iter().find(|m| m.count_ones() as usize > WIDE_INPUTS) {
        return Err(Error::SupportTooLarge(m.count_ones() as usize));
    }
    let open: Vec<usize> = (0..masks.len()).filter(|&i| masks[i] != 0).collect();
    let mut best: Option<(u32, Vec<LutSlot>)> = None;
    let mut slots = Vec::new();
    pack(masks, &open, 0, &mut slots, &mut best);
    Ok(LutPlan {
        slots: best.map(|b| b.1).unwrap_or_default(),
    })
}

/// Lower bound used for pruning: pairs halve the count of small functions.
fn bound(masks: &[u32], open: &[usize]) -> u32 {
    let mut wide = 0;
    let mut big = 0;
    let mut small = 0;
    for &i in open {
        match masks[i].count_ones() as usize {
            WIDE_INPUTS => wide += 2,
            LUT_INPUTS => big += 1,
            _ => small += 1,
        }
    }
    wide + big + (small + 1) / 2
}

fn pack(masks: &[u32], open: &[usize], used: u32, slots: &mut Vec<LutSlot>, best: &mut Option<(u32, Vec<LutSlot>)>) {
    if let Some((b, _)) = best {
        if used + bound(masks, open) >= *b {
            return;
        }
    }
    let Some((&f, rest)) = open.split_first() else {
        *best = Some((used, slots.clone()));
        return;
    };
    let width = masks[f].count_ones() as usize;
    if width == WIDE_INPUTS {
        slots.push(LutSlot::Wide(f));
        pack(masks, rest, used + 2, slots, best);
        slots.pop();
        return;
    }
    if width <= SHARED_LUT_INPUTS {
        for (k, &g) in rest.iter().enumerate() {
            if (masks[f] | masks[g]).count_ones() as usize <= SHARED_LUT_INPUTS {
                let mut remaining = rest.to_vec();
                remaining.remove(k);
                slots.push(LutSlot::Pair(f, g));
                pack(masks, &remaining, used + 1, slots, best);
                slots.pop();
            }
        }
    }
    slots.push(LutSlot::Single(f));
    pack(masks, rest, used + 1, slots, best);
    slots.pop();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(bits: &[u32]) -> u32 {
        bits.iter().map(|b| 1 << b).sum()
    }

    #[test]
    fn pairs_share_five_inputs() {
        let plan = map_masks(&[m(&[0, 1]), m(&[0, 1, 2, 3, 4])]).unwrap();
        assert_eq!(plan.lut_count(), 1);
        assert_eq!(plan.slots, [LutSlot::Pair(0, 1)]);
        let plan = map_masks(&[m(&[0, 1]), m(&[2, 3, 4, 5])]).unwrap();
        assert_eq!(plan.lut_count(), 2);
    }

    #[test]
    fn wide_and_constant_functions() {
        let plan = map_masks(&[0, m(&[0, 1, 2, 3, 4, 5, 6]), m(&[0])]).unwrap();
        assert_eq!(plan.lut_count(), 3);
        assert!(plan.slots.contains(&LutSlot::Wide(1)));
        assert!(matches!(map_masks(&[m(&[0, 1, 2, 3, 4, 5, 6, 7])]), Err(Error::SupportTooLarge(8))));
    }

    #[test]
    fn pairing_choice_matters() {
        // greedy pairing of 0 with 1 strands 2 and 3; optimum pairs 0-2, 1-3
        let masks = [m(&[0, 1, 2]), m(&[2, 3, 4]), m(&[0, 1, 5, 6]), m(&[3, 4, 7])];
        assert_eq!(map_masks(&masks).unwrap().lut_count(), 2);
    }

    #[test]
    fn matches_exhaustive_partition() {
        // oracle: brute force over all slot assignments for small random sets
        let mut state = 0x9e37_79b9_u32;
        for _ in 0..200 {
            let n = (state % 5 + 1) as usize;
            let masks: Vec<u32> = (0..n)
                .map(|_| {
                    state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
                    let mut mask = 0;
                    while (mask as u32).count_ones() < (state >> 28) % 6 + 1 {
                        state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
                        mask |= 1 << (state >> 29);
                    }
                    mask
                })
                .collect();
            assert_eq!(map_masks(&masks).unwrap().lut_count(), brute(&masks), "{masks:?}");
        }
    }

    fn brute(masks: &[u32]) -> u32 {
        if masks.is_empty() {
            return 0;
        }
        let f = masks[0];
        let rest = &masks[1..];
        let mut best = 1 + brute(rest);
        if f.count_ones() <= 5 {
            for k in 0..rest.len() {
                if (f | rest[k]).count_ones() <= 5 {
                    let mut r = rest.to_vec();
                    r.remove(k);
                    best = best.min(1 + brute(&r));
                }
            }
        }
        best
    }
}
