use proptest::prelude::*;

use tilemul::shape::{area, canonicalize, evaluate, output_width, value_range};
use tilemul::{Board, Cell, GridPattern, Signedness};

fn cells(list: &[(u32, u32)]) -> GridPattern {
    let cs: Vec<Cell> = list.iter().map(|&(x, y)| Cell::new(x, y)).collect();
    GridPattern::from_cells_in(4, 4, &cs).unwrap()
}

fn motivational() -> GridPattern {
    GridPattern::rect(3, 2).unwrap().without(Cell::new(2, 1))
}

#[test]
fn areas() {
    assert_eq!(area(&GridPattern::rect(3, 3).unwrap()), 9);
    assert_eq!(area(&GridPattern::new(4, 4, 0).unwrap()), 0);
    assert_eq!(area(&motivational()), 5);
}

#[test]
fn unsigned_ranges() {
    assert_eq!(value_range(&GridPattern::rect(3, 2).unwrap(), Signedness::UNSIGNED), (0, 21));
    assert_eq!(value_range(&motivational(), Signedness::UNSIGNED), (0, 13));
    assert_eq!(value_range(&cells(&[(0, 0)]), Signedness::UNSIGNED), (0, 1));
}

#[test]
fn output_widths() {
    assert_eq!(output_width(&GridPattern::rect(3, 2).unwrap(), Signedness::UNSIGNED), 5);
    assert_eq!(output_width(&motivational(), Signedness::UNSIGNED), 4);
    for k in 2..=16 {
        assert_eq!(output_width(&GridPattern::rect(2, k).unwrap(), Signedness::UNSIGNED), k + 2, "2x{k}");
        assert_eq!(output_width(&GridPattern::rect(k, 2).unwrap(), Signedness::UNSIGNED), k + 2, "{k}x2");
    }
}

#[test]
fn canonical_forms() {
    assert_eq!(canonicalize(&cells(&[(1, 1), (2, 1)])).unwrap(), cells(&[(0, 0), (1, 0)]));
    assert_eq!(canonicalize(&cells(&[(0, 0)])).unwrap(), cells(&[(0, 0)]));
    let already = cells(&[(1, 0), (0, 1)]);
    assert!(already.is_canonical());
    assert_eq!(canonicalize(&already).unwrap(), already);
    assert!(canonicalize(&GridPattern::new(4, 4, 0).unwrap()).is_err());
}

#[test]
fn bad_patterns_and_boards() {
    assert!(GridPattern::new(0, 3, 0).is_err());
    assert!(GridPattern::new(2, 2, 1 << 4).is_err());
    assert!(Board::new(0, 4).is_err());
    // the truncation must stay below the product width
    assert!(Board::truncated(3, 3, 6).is_err());
    assert!(Board::truncated(3, 3, 5).is_ok());
}

#[test]
fn truncated_board_regions() {
    let b = Board::truncated(4, 4, 3).unwrap();
    assert_eq!(b.truncation_budget(), 7);
    for c in b.cells() {
        assert_eq!(b.is_optional(c), c.rank() < 3, "{c}");
    }
    assert_eq!(b.optional().len(), 6);
    assert_eq!(b.required().len() + b.optional().len(), 16);
}

/// Value range by trying every operand assignment, with the sign rule
/// written out again: the top X bit and the top Y bit of a signed operand
/// count negatively.
fn brute_range(p: &GridPattern, s: Signedness) -> (i128, i128) {
    let (w, h) = p.extent();
    let mut lo = i128::MAX;
    let mut hi = i128::MIN;
    for x in 0u128..1 << w {
        for y in 0u128..1 << h {
            let mut v = 0i128;
            for c in p.cells() {
                if x >> c.x & 1 == 1 && y >> c.y & 1 == 1 {
                    let negative = (s.x_signed && c.x + 1 == w) != (s.y_signed && c.y + 1 == h);
                    let w = 1i128 << (c.x + c.y);
                    v += if negative { -w } else { w };
                }
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

/// Bits of the result word that take both values. The word is the
/// narrowest one holding the whole range, two's complement if it dips
/// below zero.
fn brute_width(p: &GridPattern, s: Signedness) -> u32 {
    let (lo, hi) = brute_range(p, s);
    let bits = (1..64u32)
        .find(|&n| if lo < 0 { -(1i128 << (n - 1)) <= lo && hi < 1i128 << (n - 1) } else { hi < 1i128 << n })
        .unwrap();
    let word = (1u64 << bits) - 1;
    let (w, h) = p.extent();
    let (mut ones, mut zeros) = (0u64, 0u64);
    for x in 0u128..1 << w {
        for y in 0u128..1 << h {
            let v = (evaluate(p, s, x, y) as u64) & word;
            ones |= v;
            zeros |= !v & word;
        }
    }
    (ones & zeros).count_ones()
}

fn signedness() -> impl Strategy<Value = Signedness> {
    (any::<bool>(), any::<bool>()).prop_map(|(a, b)| Signedness::new(a, b))
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(mask in 1u128..1 << 16) {
        let p = GridPattern::new(4, 4, mask).unwrap();
        let c = canonicalize(&p).unwrap();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(canonicalize(&c).unwrap(), c);
        prop_assert_eq!(c.area(), p.area());
    }

    #[test]
    fn translation_scales_the_maximum(mask in 1u128..1 << 16) {
        let p = GridPattern::new(4, 4, mask).unwrap();
        let c = canonicalize(&p).unwrap();
        let dx = p.cells().map(|c| c.x).min().unwrap();
        let dy = p.cells().map(|c| c.y).min().unwrap();
        let (_, hi) = value_range(&p, Signedness::UNSIGNED);
        let (_, hc) = value_range(&c, Signedness::UNSIGNED);
        prop_assert_eq!(hi, hc << (dx + dy));
    }

    #[test]
    fn range_matches_enumeration(mask in 1u128..1 << 16, s in signedness()) {
        let p = canonicalize(&GridPattern::new(4, 4, mask).unwrap()).unwrap().tight();
        prop_assert_eq!(value_range(&p, s), brute_range(&p, s));
    }

    #[test]
    fn width_counts_the_varying_bits(mask in 1u128..1 << 16, s in signedness()) {
        let p = canonicalize(&GridPattern::new(4, 4, mask).unwrap()).unwrap().tight();
        prop_assert_eq!(output_width(&p, s), brute_width(&p, s));
    }

    #[test]
    fn rectangle_maximum(m in 1u32..=8, n in 1u32..=8) {
        let (lo, hi) = value_range(&GridPattern::rect(m, n).unwrap(), Signedness::UNSIGNED);
        prop_assert_eq!(lo, 0);
        prop_assert_eq!(hi, ((1i128 << m) - 1) * ((1i128 << n) - 1));
    }

    #[test]
    fn transpose_swaps_coordinates(mask in 1u128..1 << 16) {
        let p = GridPattern::new(4, 4, mask).unwrap();
        let t = p.transpose();
        prop_assert_eq!(t.transpose(), p);
        for c in p.cells() {
            prop_assert!(t.contains(Cell::new(c.y, c.x)));
        }
        prop_assert_eq!(value_range(&t, Signedness::UNSIGNED), value_range(&p, Signedness::UNSIGNED));
    }
}
