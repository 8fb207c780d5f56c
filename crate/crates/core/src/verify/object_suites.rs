use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde_json::json;

use super::{Suite, SuiteResult, VerifyConfig};
use crate::ad::{ad_piece, g_s_system, key_fact, m_lemma_check, monotone_bijection, representation_check, FinitePoset, GradedSet};
use crate::applications::{
    captured_realization_check, entangled_f, finite_metric_search, is_c_monotone, isometry_check, parse_level_metrics,
    scheme_metric, FiniteMetric, LevelMetrics, RealizationType, SearchOutcome, Q,
};
use crate::capturing::{search_captured, Star};
use crate::error::Result;
use crate::metrics::MetricContext;
use crate::ordinal::naturals;
use crate::scheme::unique_finite_scheme;
use crate::types::fixtures::{t4, t_e};

fn t4_ctx(top: usize) -> Result<MetricContext> {
    let spec = t4();
    Ok(MetricContext::new(unique_finite_scheme(&naturals(spec.m(top)), &spec)?))
}

/// A^k_α ∩ A^k_β = ∅ above ρ(α, β).
pub fn ad_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("ad", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("ad");
    let top = cfg.levels.min(t4().top());
    let c = t4_ctx(top)?;
    let dom = c.scheme().domain().to_vec();
    for (a, b) in dom.iter().tuple_combinations() {
        for k in c.rho(*a, *b)? + 1..=top {
            let (pa, pb) = (ad_piece(&c, *a, k)?.members, ad_piece(&c, *b, k)?.members);
            s.case(pa.is_disjoint(&pb), || json!({"a": a.to_string(), "b": b.to_string(), "k": k}));
        }
    }
    Ok(s.finish())
}

/// Realization indices on T_E at level 2, and the lex/Δ alignment of the f vectors.
pub fn entangled_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("entangled", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("entangled");
    let spec = t_e();
    if cfg.levels < 2 {
        s.warn("level 2 is outside the configured bounds");
        return Ok(s.finish());
    }
    let c = MetricContext::new(unique_finite_scheme(&naturals(spec.m(2)), &spec)?);
    let singletons: Vec<_> = c.scheme().domain().iter().map(|x| vec![*x]).collect();
    let reports = search_captured(&c, &singletons, spec.n(2), Star::DELTA, 2..=2)?;
    if reports.is_empty() {
        s.warn("no Δ-captured family at level 2");
    }
    for r in reports.iter().filter(|r| r.witness.pairwise_disjoint()) {
        for t in ["<", ">"] {
            let t = RealizationType::parse(t)?;
            let check = captured_realization_check(&c, r, &t);
            s.case(check.as_ref().is_ok_and(|v| v.realized == t), || {
                json!({"report": r, "t": t, "error": check.as_ref().err().map(ToString::to_string)})
            });
        }
    }
    let dom = c.scheme().domain().to_vec();
    for (a, b) in dom.iter().tuple_combinations() {
        let (fa, fb) = (entangled_f(&c, *a, 2)?.f, entangled_f(&c, *b, 2)?.f);
        let Some(d) = c.delta(*a, *b)?.level() else { continue };
        let first = (0..fa.len()).find(|i| fa[*i] != fb[*i]);
        let ok = first.is_none_or(|i| i >= d) && (fa[d] == fb[d] || first == Some(d));
        s.case(ok, || json!({"a": a.to_string(), "b": b.to_string(), "delta": d, "fa": fa, "fb": fb}));
    }
    Ok(s.finish())
}

/// Discrete level metrics on T₄ except d_2 = (0 ½ 1 / ½ 0 ½ / 1 ½ 0).
pub fn level_metrics_fixture() -> LevelMetrics {
    parse_level_metrics(&t4(), r#"{"k":2,"matrix":[["0","1/2","1"],["1/2","0","1/2"],["1","1/2","0"]]}"#)
        .expect("fixture metric is valid")
}

/// Metric axioms on every triple; isometry on every Δ-captured report.
pub fn metric_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("metric", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("metric");
    let top = cfg.levels.min(t4().top());
    let c = t4_ctx(top)?;
    let m = level_metrics_fixture();
    let dom = c.scheme().domain().to_vec();
    let n = dom.len();
    let mut d = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = scheme_metric(&c, &m, dom[i], dom[j])?;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let at = || json!({"a": dom[i].to_string(), "b": dom[j].to_string(), "d": d[i][j].to_string()});
            s.case((d[i][j].is_zero()) == (i == j) && d[i][j] >= Q::zero(), || json!({"axiom": "identity", "at": at()}));
            s.case(d[i][j] == d[j][i], || json!({"axiom": "symmetry", "at": at()}));
            for l in 0..n {
                s.case(d[i][l] <= d[i][j] + d[j][l], || json!({"axiom": "triangle", "via": dom[j].to_string(), "c": dom[l].to_string(), "at": at()}));
            }
        }
    }
    let singletons: Vec<_> = dom.iter().map(|x| vec![*x]).collect();
    for k in 2..=3 {
        for r in search_captured(&c, &singletons, k, Star::DELTA, 1..=top)? {
            let v = isometry_check(&c, &m, &r)?;
            s.case(v.passed(), || json!({"report": r, "verdict": v}));
        }
    }
    Ok(s.finish())
}

/// The space the monotone search returns at c = 1, grid {1, 3/4, 1/2, 1/4}, size ≤ 5.
pub fn pinned_monotone_space() -> FiniteMetric {
    let (a, b) = (Q::one(), Q::new(3, 4));
    let z = Q::zero();
    FiniteMetric::new(vec![vec![z, a, b, b], vec![a, z, b, b], vec![b, b, z, a], vec![b, b, a, z]])
        .expect("pinned space is a metric")
}

/// Search outcome against the pinned value, its re-verification, and antitonicity in c.
pub fn monotone_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("monotone", cfg.metric_size, "metric_size") {
        return Ok(r);
    }
    let mut s = Suite::new("monotone");
    let grid = [Q::one(), Q::new(3, 4), Q::new(1, 2), Q::new(1, 4)];
    let outcome = finite_metric_search(Q::one(), cfg.metric_size, &grid)?;
    let mut spaces = vec![FiniteMetric::discrete(3), FiniteMetric::discrete(4)];
    match &outcome {
        SearchOutcome::Found { space, .. } => {
            s.case(*space == pinned_monotone_space(), || json!({"property": "pinned", "found": space}));
            let v = is_c_monotone(space, Q::one());
            let all: usize = (1..=space.size()).product();
            s.case(!v.monotone && v.orders_checked == all, || json!({"property": "refutation", "verdict": v}));
            spaces.push(space.clone());
        }
        SearchOutcome::NotFound { .. } => {
            s.case(cfg.metric_size < 4, || json!({"property": "pinned", "found": null}));
        }
    }
    let cs = [Q::new(1, 4), Q::new(1, 2), Q::new(3, 4), Q::one(), Q::new(5, 4), Q::new(3, 2), Q::new(2, 1), Q::new(4, 1)];
    for sp in &spaces {
        let flags: Vec<bool> = cs.iter().map(|c| is_c_monotone(sp, *c).monotone).collect();
        s.case(flags.windows(2).all(|w| !w[0] || w[1]), || json!({"property": "antitone", "space": sp, "flags": flags}));
    }
    Ok(s.finish())
}

fn coherent_algebra(s: &mut Suite, a: &crate::ad::CoherentApprox, b: &crate::ad::CoherentApprox) -> Result<()> {
    let ab = a.product(b)?;
    s.case(ab == b.product(a)?, || json!({"property": "commutative"}));
    let sq = a.product(a)?;
    s.case(sq.g.iter().all(GradedSet::is_empty) && sq.trivialize(0) == Some(GradedSet::default()), || {
        json!({"property": "involutive"})
    });
    s.case(ab.check().is_empty(), || json!({"property": "check-closed", "failures": ab.check()}));
    Ok(())
}

/// Clauses (a)–(e) on three posets, the M-set clauses, g_S on a 2-chain and the product key fact.
pub fn representation_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("representation", cfg.rep_levels, "rep_levels") {
        return Ok(r);
    }
    let mut s = Suite::new("representation");
    let k = cfg.rep_levels.min(3);
    let c = t4_ctx(4)?;
    for (name, p) in [("3-chain", FinitePoset::chain(3)), ("diamond", FinitePoset::diamond()), ("2-antichain", FinitePoset::antichain(2))] {
        for j in representation_check(&c, &p, k)?.judgments {
            s.case(j.verdict == crate::ad::Verdict::Agree, || json!({"poset": name, "judgment": j}));
        }
        for l in m_lemma_check(&c, &p, &monotone_bijection(&p), k)? {
            s.case(l.holds, || json!({"poset": name, "lemma": l}));
        }
    }
    let chain = FinitePoset::chain(2);
    let empty = BTreeSet::new();
    let top = BTreeSet::from([1]);
    let sys_empty = g_s_system(&c, &chain, empty.clone(), k)?;
    let sys_top = g_s_system(&c, &chain, top.clone(), k)?;
    for sys in [&sys_empty, &sys_top] {
        for step in &sys.steps {
            s.case(step.passed(), || json!({"property": "g_S step", "step": step}));
        }
        let approx = sys.approx(&c)?;
        s.case(approx.check().is_empty(), || json!({"property": "g_S coherent", "failures": approx.check()}));
    }
    for f in key_fact(&c, &chain, &top, &empty, k)? {
        s.case(f.one_inside && f.zero_outside, || json!({"property": "key fact", "fact": f}));
    }
    coherent_algebra(&mut s, &sys_top.approx(&c)?, &sys_empty.approx(&c)?)?;
    Ok(s.finish())
}
