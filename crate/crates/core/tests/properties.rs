use std::cmp::Ordering;

use proptest::prelude::*;

use cscheme::ad::GradedSet;
use cscheme::applications::{entangled_f, is_c_monotone, lex_compare, FiniteMetric, Q};
use cscheme::capturing::{search_captured, Star};
use cscheme::io::{parse_ordinal, scheme_from_jsonl, scheme_to_jsonl};
use cscheme::metrics::MetricContext;
use cscheme::ordinal::naturals;
use cscheme::scheme::{is_scheme, unique_finite_scheme};
use cscheme::types::fixtures::{t4, t_e};
use cscheme::types::{LevelParams, Schedule};
use cscheme::verify::oracle_search;
use cscheme::{Block, OrdinalCode, TypeSpec};

fn small_type() -> impl Strategy<Value = TypeSpec> {
    (2usize..=3, 1usize..=4).prop_map(|(n, steps)| {
        TypeSpec::with_schedule(vec![LevelParams::base()], Schedule { default_n: n, cursor: 0 })
            .unwrap()
            .extend_type(steps)
    })
    .prop_filter("keep domains small", |s| s.m(s.top()) <= 40)
}

fn star() -> impl Strategy<Value = Star> {
    prop_oneof![Just(Star::NONE), Just(Star::RHO), Just(Star::DELTA), Just(Star::BOTH)]
}

fn family() -> impl Strategy<Value = Vec<Block>> {
    prop::collection::vec(prop::collection::btree_set(0u32..10, 1..=3), 0..=6)
        .prop_map(|f| f.into_iter().map(|s| s.into_iter().map(OrdinalCode::fin).collect()).collect())
}

fn graded() -> impl Strategy<Value = GradedSet> {
    prop::collection::vec((1usize..4, prop::collection::vec(0u32..3, 2)), 0..12).prop_map(|items| {
        let mut g = GradedSet::default();
        for (k, s) in items {
            g.insert(k, s);
        }
        g
    })
}

/// Off-diagonal distances in [1/2, 1] always satisfy the triangle inequality.
fn metric() -> impl Strategy<Value = FiniteMetric> {
    (2usize..=4).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(Q::new(1, 2)), Just(Q::new(3, 4)), Just(Q::from_integer(1))], n * n)
            .prop_map(move |v| {
                let mut m = vec![vec![Q::from_integer(0); n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        m[i][j] = v[i * n + j];
                        m[j][i] = v[i * n + j];
                    }
                }
                FiniteMetric::new(m).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_types_give_schemes(spec in small_type()) {
        for k in 0..=spec.top() {
            let s = unique_finite_scheme(&naturals(spec.m(k)), &spec).unwrap();
            let rep = is_scheme(s.levels(), &spec, s.domain());
            prop_assert!(rep.passed(), "level {}: {:?}", k, rep.violations.first());
        }
    }

    #[test]
    fn closure_is_block_prefix(spec in small_type(), pick in any::<prop::sample::Index>()) {
        let s = unique_finite_scheme(&naturals(spec.m(spec.top())), &spec).unwrap();
        let c = MetricContext::new(s);
        let blocks: Vec<_> = c.scheme().blocks().map(|(k, b)| (k, b.clone())).collect();
        let (k, f) = pick.get(&blocks);
        for a in f {
            let want: Block = f.iter().copied().filter(|x| x <= a).collect();
            prop_assert_eq!(c.closure(*a, *k).unwrap(), want);
        }
    }

    #[test]
    fn rho_triangle_from_below(spec in small_type(), a in 0u32..40, b in 0u32..40, d in 0u32..40) {
        let size = spec.m(spec.top()) as u32;
        let (a, b, d) = (OrdinalCode::fin(a % size), OrdinalCode::fin(b % size), OrdinalCode::fin(d % size));
        let c = MetricContext::new(unique_finite_scheme(&naturals(size as usize), &spec).unwrap());
        let r = |x, y| c.rho(x, y).unwrap();
        if a <= b.min(d) {
            prop_assert!(r(a, b) <= r(a, d).max(r(b, d)));
        }
        prop_assert_eq!(r(a, b), r(b, a));
        prop_assert_eq!(r(a, b) == 0, a == b);
    }

    #[test]
    fn search_matches_oracle(fam in family(), n in 1usize..=3, st in star(), lo in 1usize..=4) {
        let spec = t4();
        let c = MetricContext::new(unique_finite_scheme(&naturals(10), &spec).unwrap());
        let got = search_captured(&c, &fam, n, st, lo..=4).unwrap();
        let want = oracle_search(&c, &fam, n, st, lo..=4).unwrap();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn lex_is_a_total_order(f in prop::collection::vec(-3i64..3, 4), g in prop::collection::vec(-3i64..3, 4)) {
        let fg = lex_compare(&f, &g).unwrap();
        prop_assert_eq!(fg, lex_compare(&g, &f).unwrap().reverse());
        prop_assert_eq!(fg == Ordering::Equal, f == g);
        prop_assert_eq!(fg, f.cmp(&g));
    }

    #[test]
    fn entangled_vectors_split_at_delta(a in 0u32..6, b in 0u32..6) {
        let spec = t_e();
        let c = MetricContext::new(unique_finite_scheme(&naturals(6), &spec).unwrap());
        let (a, b) = (OrdinalCode::fin(a), OrdinalCode::fin(b));
        let (fa, fb) = (entangled_f(&c, a, 2).unwrap().f, entangled_f(&c, b, 2).unwrap().f);
        match c.delta(a, b).unwrap().level() {
            None => prop_assert_eq!(fa, fb),
            Some(d) => {
                prop_assert_eq!(&fa[..d], &fb[..d]);
                if fa[d] != fb[d] {
                    prop_assert_eq!(lex_compare(&fa, &fb).unwrap(), fa[d].cmp(&fb[d]));
                }
            }
        }
    }

    #[test]
    fn monotonicity_is_antitone_in_c(m in metric(), lo in 1i64..8, step in 0i64..8) {
        let (c, d) = (Q::new(lo, 4), Q::new(lo + step, 4));
        if is_c_monotone(&m, c).monotone {
            prop_assert!(is_c_monotone(&m, d).monotone);
        }
    }

    #[test]
    fn graded_symmetric_difference(a in graded(), b in graded(), c in graded()) {
        prop_assert_eq!(a.symmetric_difference(&b), b.symmetric_difference(&a));
        prop_assert_eq!(a.symmetric_difference(&b).symmetric_difference(&b), a.clone());
        prop_assert_eq!(
            a.symmetric_difference(&b).symmetric_difference(&c),
            a.symmetric_difference(&b.symmetric_difference(&c))
        );
        prop_assert_eq!(a.intersection(&b).union(&a.difference(&b)), a.clone());
    }

    #[test]
    fn ordinal_text_round_trip(block in 0u32..5, offset in 0u32..50) {
        let x = OrdinalCode::new(block, offset);
        prop_assert_eq!(parse_ordinal(&x.to_string()).unwrap(), x);
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<OrdinalCode>(&json).unwrap(), x);
    }

    #[test]
    fn dump_round_trip(spec in small_type()) {
        let s = unique_finite_scheme(&naturals(spec.m(spec.top())), &spec).unwrap();
        let back = scheme_from_jsonl(&spec, &scheme_to_jsonl(&s)).unwrap();
        prop_assert_eq!(back.levels(), s.levels());
        prop_assert_eq!(back.domain(), s.domain());
    }
}
