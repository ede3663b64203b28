use proptest::prelude::*;

use tilemul::logic::tile::efficiency_f64;
use tilemul::logic::{
    build_truth_table, describe_two_by_k, functional_support, map_to_luts, qm_minimize, BitTable, Cube, InputBit,
    LutSite, Realization,
};
use tilemul::shape::canonicalize;
use tilemul::{describe_tile, Cell, Cost, GridPattern, Signedness, TileDescriptor};

const U: Signedness = Signedness::UNSIGNED;

fn motivational() -> GridPattern {
    GridPattern::rect(3, 2).unwrap().without(Cell::new(2, 1))
}

fn s_shape() -> GridPattern {
    GridPattern::parse_rows(&[".##", "##."]).unwrap()
}

fn describe(p: &GridPattern) -> TileDescriptor {
    describe_tile(p, U).unwrap()
}

fn names(bits: &[InputBit]) -> Vec<String> {
    bits.iter().map(|b| b.to_string()).collect()
}

/// A sum of products written as `y3 !y2 x2 + ...`. Returns its value for
/// the operand words `x`, `y`.
fn eval_reference(eq: &str, x: u32, y: u32) -> bool {
    eq.split('+').any(|term| {
        term.split_whitespace().all(|lit| {
            let (neg, name) = match lit.strip_prefix('!') {
                Some(rest) => (true, rest),
                None => (false, lit),
            };
            let idx: u32 = name[1..].parse().unwrap();
            let word = if name.starts_with('x') { x } else { y };
            (word >> idx & 1 == 1) != neg
        })
    })
}

#[test]
fn and_table() {
    let tt = build_truth_table(&GridPattern::rect(1, 1).unwrap(), U).unwrap();
    assert_eq!(tt.rows(), &[0, 0, 0, 1]);
}

#[test]
fn rectangle_tables() {
    let tt = build_truth_table(&GridPattern::rect(3, 2).unwrap(), U).unwrap();
    assert_eq!(tt.rows().len(), 32);
    assert_eq!(tt.max_value(), 21);
    let tt = build_truth_table(&GridPattern::rect(2, 2).unwrap(), U).unwrap();
    assert_eq!(tt.rows().len(), 16);
    assert_eq!(tt.max_value(), 9);
    // every row is the product of the two operand fields
    for (r, &v) in tt.rows().iter().enumerate() {
        assert_eq!(v, ((r & 3) * (r >> 2)) as i64);
    }
}

#[test]
fn three_by_three_supports() {
    let tt = build_truth_table(&GridPattern::rect(3, 3).unwrap(), U).unwrap();
    assert_eq!(names(&functional_support(&tt, 0)), ["x0", "y0"]);
    assert_eq!(names(&functional_support(&tt, 1)), ["x0", "x1", "y0", "y1"]);
}

#[test]
fn minimised_equations() {
    let tt = build_truth_table(&GridPattern::rect(1, 1).unwrap(), U).unwrap();
    let sop = qm_minimize(&tt.column(0), &names(tt.inputs()));
    assert_eq!(sop.cubes.len(), 1);
    assert_eq!(sop.literal_count(), 2);

    // bit 1 is x1 y0 xor x0 y1: the two products, each with one of the
    // other product's literals complemented
    let t = describe(&GridPattern::rect(3, 3).unwrap());
    let r1 = &t.functions()[1];
    assert_eq!(r1.weight, 1);
    assert_eq!(names(&r1.support), ["x0", "x1", "y0", "y1"]);
    let mut got: Vec<Cube> = r1.sop.cubes.clone();
    got.sort();
    let cube = |care, value| Cube { care, value };
    let mut want = vec![
        cube(0b0111, 0b0110),
        cube(0b1110, 0b0110),
        cube(0b1011, 0b1001),
        cube(0b1101, 0b1001),
    ];
    want.sort();
    assert_eq!(got, want);
    for r in 0..16usize {
        let and = |a: usize, b: usize| r >> a & 1 == 1 && r >> b & 1 == 1;
        assert_eq!(r1.sop.eval(r), and(1, 2) != and(0, 3));
    }
}

/// Reference equations of the s-shape, with operand indices starting at 2;
/// ours start at 0 after canonicalisation.
const S_SHAPE: [&str; 3] = [
    "!y3 y2 x3 + y2 !x2 x3 + y3 !y2 x2 + y3 x2 !x3",
    "y3 !x2 !x4 x3 + y3 x2 x4 x3 + !y3 y2 x4 + y2 x4 !x3 + y3 !y2 x3",
    "y3 y2 x4 x3 + y3 y2 x2 x3",
];

#[test]
fn s_shape_equations() {
    let t = describe(&s_shape());
    let fs = t.functions();
    assert_eq!(fs.iter().map(|f| f.weight).collect::<Vec<_>>(), [1, 2, 3]);
    assert_eq!(fs.iter().map(|f| f.support.len()).collect::<Vec<_>>(), [4, 5, 5]);
    assert_eq!(names(&fs[2].support), ["x0", "x1", "x2", "y0", "y1"]);
    assert_eq!(fs[0].sop.cubes.len(), 4);
    assert!(fs[0].sop.cubes.iter().all(|c| c.literals() == 3));
    for (f, eq) in fs.iter().zip(S_SHAPE) {
        for x in 0..8u32 {
            for y in 0..4u32 {
                let row = f
                    .support
                    .iter()
                    .enumerate()
                    .map(|(k, b)| match *b {
                        InputBit::X(i) => (x >> i & 1) << k,
                        InputBit::Y(j) => (y >> j & 1) << k,
                    })
                    .sum::<u32>() as usize;
                assert_eq!(f.sop.eval(row), eval_reference(eq, x << 2, y << 2), "r{} x={x} y={y}", f.weight - 1);
            }
        }
    }
}

#[test]
fn s_shape_with_extra_product_packs_it_beside_the_low_bit() {
    let p = GridPattern::parse_rows(&[".##", "##.", "...", ".#."]).unwrap();
    let t = describe(&p);
    assert_eq!(t.cost_mult, 2);
    assert_eq!(t.w_out, 4);
    let Realization::Logic(logic) = &t.realization else { panic!("logic tile expected") };
    let lone = logic.functions.iter().position(|f| f.weight == 4).unwrap();
    assert_eq!(names(&logic.functions[lone].support), ["x1", "y3"]);
    let site = logic.sites.iter().find(|s| s.o6 == lone || s.o5 == Some(lone)).unwrap();
    let partner = if site.o6 == lone { site.o5.unwrap() } else { site.o6 };
    assert_eq!(logic.functions[partner].weight, 1);
    assert_eq!(site.inputs.len(), 5);
}

#[test]
fn lut_mapping() {
    let supports = |p: &GridPattern| {
        let tt = build_truth_table(p, U).unwrap();
        tt.active_bits().iter().map(|&b| functional_support(&tt, b)).collect::<Vec<_>>()
    };
    let full = supports(&GridPattern::rect(3, 2).unwrap());
    assert_eq!(full.len(), 5);
    assert_eq!(map_to_luts(&full).unwrap().lut_count(), 3);
    let cut = supports(&motivational());
    assert_eq!(cut.len(), 4);
    assert_eq!(map_to_luts(&cut).unwrap().lut_count(), 2);
    let six: Vec<InputBit> = (0..3).map(InputBit::X).chain((0..3).map(InputBit::Y)).collect();
    assert_eq!(map_to_luts(&[six]).unwrap().lut_count(), 1);
}

/// Reference properties of the small rectangles: shape, area, cost_mult,
/// W_out, cost_tile and efficiency at the usual display precision.
#[test]
fn small_rectangle_properties() {
    let rows = [
        (GridPattern::rect(1, 1).unwrap(), 1, 1, 1, "1.65"),
        (GridPattern::rect(1, 2).unwrap(), 2, 1, 2, "2.3"),
        (GridPattern::rect(2, 1).unwrap(), 2, 1, 2, "2.3"),
        (GridPattern::rect(2, 3).unwrap(), 6, 3, 5, "6.25"),
        (GridPattern::rect(3, 2).unwrap(), 6, 3, 5, "6.25"),
        (GridPattern::rect(3, 3).unwrap(), 9, 5, 6, "8.9"),
    ];
    for (p, a, cm, w, cost) in rows {
        let t = describe(&p);
        assert_eq!((t.area, t.cost_mult, t.w_out), (a, cm, w), "{p:?}");
        assert_eq!(t.cost_tile().to_string(), cost);
    }
    assert_eq!(format!("{:.2}", efficiency_f64(describe(&GridPattern::rect(1, 2).unwrap()).efficiency())), "0.87");
    assert_eq!(format!("{:.2}", efficiency_f64(describe(&GridPattern::rect(2, 3).unwrap()).efficiency())), "0.96");
    assert_eq!(format!("{:.3}", efficiency_f64(describe(&GridPattern::rect(3, 3).unwrap()).efficiency())), "1.011");
    for k in 3..=16 {
        let chain = describe_two_by_k(k, false).unwrap();
        assert_eq!((chain.area, chain.cost_mult, chain.w_out), (2 * k, k + 1, k + 2));
        assert_eq!(chain.cost_tile(), Cost::from_f64(1.65 * k as f64 + 2.3));
        if k >= 4 {
            assert_eq!(describe(&GridPattern::rect(2, k).unwrap()), chain);
            assert_eq!(describe(&GridPattern::rect(k, 2).unwrap()), describe_two_by_k(k, true).unwrap());
        }
    }
}

#[test]
fn motivational_tile() {
    let t = describe(&motivational());
    assert_eq!(build_truth_table(&motivational(), U).unwrap().max_value(), 13);
    assert_eq!((t.area, t.cost_mult, t.w_out), (5, 2, 4));
    assert_eq!(t.cost_tile().to_string(), "4.6");
    assert_eq!(t.efficiency(), num_rational::Ratio::new(50, 46));
}

#[test]
fn long_chains_pass_the_best_incomplete_tile() {
    let top = describe(&motivational()).efficiency();
    let e = |k| describe_two_by_k(k, true).unwrap().efficiency();
    assert_eq!(e(13), num_rational::Ratio::new(26 * 20, 475));
    assert!(e(12) < top && e(13) > top);
    for k in 2..40 {
        assert!(e(k) < e(k + 1));
        assert!(e(k) < num_rational::Ratio::new(200, 165));
    }
}

/// Output of one LUT site for the given input values, read off the INIT
/// words with LUT6_2 and MUXF7 semantics.
fn site_outputs(site: &LutSite, bits: &[bool]) -> (bool, Option<bool>) {
    let idx = |n: usize| bits[..n.min(bits.len())].iter().enumerate().map(|(k, &b)| (b as usize) << k).sum::<usize>();
    match site.init.len() {
        2 => {
            let sel = bits[6] as usize;
            (site.init[sel] >> idx(6) & 1 == 1, None)
        }
        _ if site.o5.is_some() => {
            let r = idx(5);
            (site.init[0] >> (32 + r) & 1 == 1, Some(site.init[0] >> r & 1 == 1))
        }
        _ => (site.init[0] >> idx(site.inputs.len()) & 1 == 1, None),
    }
}

fn random_tile() -> impl Strategy<Value = GridPattern> {
    (1u128..1 << 16).prop_map(|m| canonicalize(&GridPattern::new(4, 4, m).unwrap()).unwrap().tight())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn equations_match_their_tables(p in random_tile()) {
        let Ok(t) = describe_tile(&p, U) else { return Ok(()) };
        for f in t.functions() {
            prop_assert_eq!(f.sop.to_table(), f.table.clone());
            // every cube is prime and none is redundant
            for (i, c) in f.sop.cubes.iter().enumerate() {
                for v in 0..f.support.len() {
                    let bit = 1u16 << v;
                    if c.care & bit != 0 {
                        let wider = Cube { care: c.care & !bit, value: c.value & !bit };
                        prop_assert!((0..f.table.rows()).any(|r| wider.covers(r) && !f.table.get(r)));
                    }
                }
                let rest: Vec<&Cube> = f.sop.cubes.iter().enumerate().filter(|&(j, _)| j != i).map(|x| x.1).collect();
                prop_assert!((0..f.table.rows()).any(|r| f.table.get(r) && !rest.iter().any(|d| d.covers(r))));
            }
        }
    }

    #[test]
    fn supports_are_exact(p in random_tile()) {
        let tt = build_truth_table(&p, U).unwrap();
        for b in tt.active_bits() {
            let col = tt.column(b);
            let support = functional_support(&tt, b);
            for (k, input) in tt.inputs().iter().enumerate() {
                let flips = (0..col.rows()).any(|r| col.get(r) != col.get(r ^ 1 << k));
                prop_assert_eq!(flips, support.contains(input));
            }
        }
    }

    #[test]
    fn tiles_compute_their_sum(p in random_tile(), x in 0u128..16, y in 0u128..16) {
        let Ok(t) = describe_tile(&p, U) else { return Ok(()) };
        let want: u128 = p.cells().filter(|c| x >> c.x & 1 == 1 && y >> c.y & 1 == 1).map(|c| 1 << (c.x + c.y)).sum();
        prop_assert_eq!(t.eval_outputs(x, y), want);
        prop_assert_eq!(t.cost_tile(), Cost::tile(t.cost_mult, t.w_out));
        prop_assert_eq!(t.w_out as usize, t.functions().len());
    }

    #[test]
    fn lut_sites_realise_the_functions(p in random_tile(), x in 0u128..16, y in 0u128..16) {
        let Ok(t) = describe_tile(&p, U) else { return Ok(()) };
        let Realization::Logic(logic) = &t.realization else { return Ok(()) };
        prop_assert_eq!(logic.sites.iter().map(|s| s.init.len() as u32).sum::<u32>(), t.cost_mult);
        for site in &logic.sites {
            let pins = match (site.init.len(), site.o5) {
                (2, _) => 7,
                (_, Some(_)) => 5,
                _ => 6,
            };
            prop_assert!(site.inputs.len() <= pins);
            let bits: Vec<bool> = site.inputs.iter().map(|b| match *b {
                InputBit::X(i) => x >> i & 1 == 1,
                InputBit::Y(j) => y >> j & 1 == 1,
            }).collect();
            let (o6, o5) = site_outputs(site, &bits);
            prop_assert_eq!(o6, logic.functions[site.o6].eval(x, y));
            if let Some(g) = site.o5 {
                prop_assert_eq!(o5, Some(logic.functions[g].eval(x, y)));
            }
        }
    }

    #[test]
    fn display_notation_round_trips(p in random_tile()) {
        let Ok(t) = describe_tile(&p, U) else { return Ok(()) };
        for f in t.functions() {
            let vars = names(&f.support);
            let again = tilemul::logic::Sop::parse(&f.sop.to_string(), &vars).unwrap();
            prop_assert_eq!(again.to_table(), f.table.clone());
        }
    }
}

#[test]
fn bit_table_basics() {
    let t = BitTable::from_fn(3, |r| r == 5);
    assert_eq!(t.count_ones(), 1);
    assert_eq!(t.support(), vec![0, 1, 2]);
    assert!(t.depends_on(2));
    assert!(!BitTable::from_fn(3, |r| r & 1 == 1).depends_on(2));
    assert!(BitTable::zero(4).is_constant());
}
