mod common;

use std::sync::Arc;

use oag_core::arith::{Exp, Index};
use oag_core::dsl::{parse, parse_expr};
use oag_core::group::{h_n, h_n_minus, ConvexSubgroup, Group, GroupExpr};
use oag_core::ladder::{Ambient, LadderSubgroup, Modulus};
use oag_core::lattice::embed;
use oag_core::rank::{self, Rank, Verdict};
use oag_core::report::Report;
use oag_core::spine::{bracket, spine};
use proptest::prelude::*;

use common::*;

fn block() -> impl Strategy<Value = B> {
    let exp = prop_oneof![Just(INF), 1u64..=3];
    prop_oneof![
        2 => Just(B::Z),
        1 => Just(B::Q),
        3 => proptest::collection::btree_map(prop_oneof![Just(2u64), Just(3), Just(5)], exp, 0..=3)
            .prop_map(|m| B::Dense(m.into_iter().collect())),
    ]
}

fn blocks(max: usize) -> impl Strategy<Value = Vec<B>> {
    proptest::collection::vec(block(), 1..=max)
}

/// A monotone modulus vector of length `n`: built from the last block upwards.
fn moduli(n: usize) -> impl Strategy<Value = Vec<Modulus>> {
    proptest::collection::vec((1u64..=12, any::<bool>()), n).prop_map(|steps| {
        let mut out = Vec::with_capacity(steps.len());
        let mut cur = 1u64;
        let mut inf = false;
        for (f, stop) in steps.into_iter().rev() {
            inf |= stop && f > 10;
            if inf {
                out.push(Modulus::Infinite);
                continue;
            }
            if cur * f <= 1 << 20 {
                cur *= f;
            }
            out.push(Modulus::from_u64(cur).unwrap());
        }
        out.reverse();
        out
    })
}

fn ladders(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<Modulus>>> {
    proptest::collection::vec(moduli(n), k)
}

fn zn(n: usize) -> (Group, Arc<Ambient>) {
    let g = build(&vec![B::Z; n]);
    let amb = Ambient::of_group(&g).unwrap();
    (g, amb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(bs in blocks(6)) {
        let g = build(&bs);
        let printed = g.to_string();
        let again = parse(&printed).unwrap();
        prop_assert_eq!(&again, &g);
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn nested_lex_flattens(bs in blocks(6), split in 0usize..6) {
        let split = split.min(bs.len());
        let (l, r) = bs.split_at(split);
        let text = match (l.is_empty(), r.is_empty()) {
            (true, _) => lex_dsl(r),
            (_, true) => lex_dsl(l),
            _ => format!("lex({}, {})", lex_dsl(l), lex_dsl(r)),
        };
        prop_assert_eq!(parse(&text).unwrap(), build(&bs));
    }

    #[test]
    fn ladder_lattice_laws(ms in ladders(4, 3)) {
        let (_, amb) = zn(4);
        let [a, b, c] = [0, 1, 2].map(|i| LadderSubgroup::new(amb.clone(), ms[i].clone()).unwrap());
        prop_assert_eq!(a.intersect(&b).unwrap(), b.intersect(&a).unwrap());
        prop_assert_eq!(a.sum(&b).unwrap(), b.sum(&a).unwrap());
        prop_assert_eq!(a.intersect(&a.sum(&b).unwrap()).unwrap(), a.clone());
        prop_assert_eq!(a.sum(&a.intersect(&b).unwrap()).unwrap(), a.clone());
        // Modular law: a ⊆ c ⇒ a + (b ∩ c) = (a + b) ∩ c.
        let ac = a.intersect(&c).unwrap();
        let lhs = ac.sum(&b.intersect(&c).unwrap()).unwrap();
        let rhs = ac.sum(&b).unwrap().intersect(&c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn index_is_multiplicative(ms in ladders(5, 3)) {
        let (_, amb) = zn(5);
        let a = LadderSubgroup::new(amb.clone(), ms[0].clone()).unwrap();
        let b = a.intersect(&LadderSubgroup::new(amb.clone(), ms[1].clone()).unwrap()).unwrap();
        let c = b.intersect(&LadderSubgroup::new(amb, ms[2].clone()).unwrap()).unwrap();
        let ab = a.index(&b).unwrap();
        let bc = b.index(&c).unwrap();
        prop_assert_eq!(a.index(&c).unwrap(), ab.mul(&bc));
    }

    #[test]
    fn ladders_agree_with_lattice(ms in ladders(4, 2)) {
        let (g, amb) = zn(4);
        let a = LadderSubgroup::new(amb.clone(), ms[0].clone()).unwrap();
        let b = LadderSubgroup::new(amb, ms[1].clone()).unwrap();
        let (la, lb) = (embed(&g, &a).unwrap(), embed(&g, &b).unwrap());
        let meet = embed(&g, &a.intersect(&b).unwrap()).unwrap();
        let want = la.intersect(&lb).unwrap();
        prop_assert!(meet.contains(&want) && want.contains(&meet));
        prop_assert_eq!(a.contains(&b), la.contains(&lb));
    }

    #[test]
    fn crt_parts_recompose(m in moduli(5)) {
        let (_, amb) = zn(5);
        let a = LadderSubgroup::new(amb, m).unwrap();
        let d = a.decompose_crt();
        prop_assert_eq!(d.recompose().unwrap(), a);
    }

    #[test]
    fn spine_embeds_into_multiples(bs in blocks(6), p in prop_oneof![Just(2u64), Just(3), Just(5)], m in 1u64..=6) {
        let g = build(&bs);
        let small = spine(&g, p).unwrap();
        let big = spine(&g, p * m).unwrap();
        for h in small.members().unwrap() {
            prop_assert!(big.members().unwrap().contains(h));
        }
    }

    #[test]
    fn hn_lands_in_spine(bs in blocks(6), n in 1u64..=12, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = build(&bs);
        let x = random_coeffs(&mut rng, bs.len());
        let h = h_n(&element(&x), n, &g).unwrap();
        prop_assert!(spine(&g, n).unwrap().members().unwrap().contains(&h));
        prop_assert_eq!(h, tail(&g, hn_cut(&bs, &x, n)));
    }

    #[test]
    fn hn_minus_and_hn_classes_coincide(bs in blocks(5), n in 2u64..=12) {
        // Over the spanning set of generators and their sums of consecutive pairs.
        let g = build(&bs);
        let len = bs.len();
        let mut xs: Vec<Vec<i64>> = (0..len).map(|i| (0..len).map(|j| i64::from(i == j)).collect()).collect();
        xs.extend((1..len).map(|i| (0..len).map(|j| i64::from(j + 1 == i || j == i)).collect()));
        let mut plus: Vec<ConvexSubgroup> = Vec::new();
        let mut minus: Vec<ConvexSubgroup> = Vec::new();
        for x in &xs {
            plus.push(h_n(&element(x), n, &g).unwrap());
            minus.push(h_n_minus(&element(x), n, &g).unwrap());
        }
        plus.push(g.zero());
        minus.push(g.zero());
        plus.sort();
        plus.dedup();
        minus.sort();
        minus.dedup();
        prop_assert_eq!(plus, minus);
    }

    #[test]
    fn segment_exp_is_additive(bs in blocks(6), p in prop_oneof![Just(2u64), Just(3), Just(5)], cuts in proptest::collection::vec(0usize..=6, 3)) {
        let g = build(&bs);
        let mut c: Vec<usize> = cuts.into_iter().map(|c| c.min(bs.len())).collect();
        c.sort_unstable();
        let t = |i: usize| tail(&g, c[i]);
        let whole = g.segment_exp(t(0), t(2), p).unwrap();
        let parts = g.segment_exp(t(0), t(1), p).unwrap() + g.segment_exp(t(1), t(2), p).unwrap();
        prop_assert_eq!(whole, parts);
        let oracle = quotient_exp(&bs, c[0], c[2], p);
        prop_assert_eq!(whole, if oracle == INF { Exp::Inf } else { Exp::Fin(oracle) });
    }

    #[test]
    fn bracket_is_successor_plus_multiple(bs in blocks(5), c in 0usize..=5, m in 1u64..=12) {
        let g = build(&bs);
        let c = c.min(bs.len());
        let amb = Ambient::of_group(&g).unwrap();
        let got = bracket(&g, tail(&g, c), m).unwrap();
        // Intersection of tail(j) + mG over the tails strictly containing tail(c).
        let want = (0..c).fold(LadderSubgroup::whole(amb.clone()), |acc, j| {
            acc.intersect(&LadderSubgroup::tail_plus(amb.clone(), j, &Modulus::from_u64(m).unwrap()).unwrap()).unwrap()
        });
        prop_assert_eq!(got, want);
    }

    #[test]
    fn kp_matches_brute_force(bs in blocks(5), p in prop_oneof![Just(2u64), Just(3), Just(5)]) {
        let g = build(&bs);
        prop_assert_eq!(rank::k_p(&g, p).unwrap(), kp_bruteforce(&bs, p, &[2, 3, 5]));
    }

    #[test]
    fn rank_report_invariants(bs in blocks(6)) {
        let g = build(&bs);
        let r = rank::verdict(&g).unwrap();
        let (Rank::Fin(dp), Rank::Fin(red)) = (r.dp_rank, r.dp_rank_reduct) else {
            return Err(TestCaseError::fail("finite presentations have finite rank"));
        };
        prop_assert!(red <= dp);
        prop_assert_eq!(r.verdict == Verdict::DpMinimal, dp == 1);
        let sum: u64 = r.primes.iter().map(|d| d.k_p.unwrap()).sum();
        prop_assert_eq!(dp, 1 + sum);
        for d in &r.primes {
            prop_assert!(d.k_p.unwrap() >= 1);
        }
        for w in &r.witnesses {
            prop_assert!(w.verify(&g).unwrap());
        }
    }

    #[test]
    fn extension_law(a in blocks(3), b in blocks(3), omega in any::<bool>()) {
        let first = if omega { "omega(dense{2:1})".to_string() } else { lex_dsl(&a) };
        let e1 = parse_expr(&first).unwrap();
        let e2 = parse_expr(&lex_dsl(&b)).unwrap();
        let sd = |g: &Group| rank::verdict(g).unwrap().verdict != Verdict::NotStronglyDependent;
        let g1 = Group::flatten(&e1).unwrap();
        let g2 = Group::flatten(&e2).unwrap();
        let both = Group::flatten(&GroupExpr::Lex(vec![e1, e2])).unwrap();
        prop_assert_eq!(sd(&both), sd(&g1) && sd(&g2));
    }

    #[test]
    fn reports_round_trip(bs in blocks(5)) {
        let (_, r) = Report::analyze(&lex_dsl(&bs)).unwrap();
        prop_assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn index_of_multiples_on_z_blocks(n in 1usize..=5, k in 1u64..=30) {
        let (_, amb) = zn(n);
        let whole = LadderSubgroup::whole(amb.clone());
        let kg = LadderSubgroup::multiple(amb, &Modulus::from_u64(k).unwrap());
        let want = num_bigint::BigUint::from(k).pow(n as u32);
        prop_assert_eq!(whole.index(&kg).unwrap(), Index::Finite(want));
    }
}
