use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Suite, SuiteResult, VerifyConfig};
use crate::ad::capture_intersection_witness;
use crate::capturing::{delta_system_root, is_captured, search_captured, CaptureFailure, CaptureReport, DeltaSystemWitness, Star};
use crate::error::Result;
use crate::metrics::{DeltaValue, MetricContext};
use crate::ordinal::{naturals, OrdinalCode};
use crate::scheme::{canonical_decomposition, unique_finite_scheme, Block, SchemePrefix};
use crate::types::fixtures::{t4, t_alt};
use crate::types::TypeSpec;

fn fixtures(cfg: &VerifyConfig) -> Vec<(&'static str, TypeSpec, usize)> {
    [("t4", t4()), ("t_alt", t_alt())]
        .into_iter()
        .map(|(n, s)| {
            let k = cfg.levels.min(s.top());
            (n, s, k)
        })
        .collect()
}

fn fixture_ctx(spec: &TypeSpec, k: usize) -> Result<MetricContext> {
    Ok(MetricContext::new(unique_finite_scheme(&naturals(spec.m(k)), spec)?))
}

fn blocks(s: &SchemePrefix) -> BTreeSet<(usize, Block)> {
    s.blocks().map(|(k, b)| (k, b.clone())).collect()
}

fn show(b: &[OrdinalCode]) -> Vec<String> {
    b.iter().map(ToString::to_string).collect()
}

/// is_scheme, determinism, reconstruction, order-isomorphism invariance and restriction coherence.
pub fn scheme_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("scheme", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("scheme");
    for (name, spec, top) in fixtures(cfg) {
        for k in 0..=top {
            let x = naturals(spec.m(k));
            let f = unique_finite_scheme(&x, &spec)?;
            let report = f.check();
            s.case(report.passed(), || json!({"type": name, "k": k, "violation": report.violations[0].to_string()}));
            s.case(unique_finite_scheme(&x, &spec)? == f, || json!({"type": name, "k": k, "property": "determinism"}));
            for (level, b) in f.blocks().filter(|(l, _)| *l >= 1) {
                let d = canonical_decomposition(b, level, &spec)?;
                let union: Block = d.pieces.iter().flatten().copied().sorted().dedup().collect();
                let meets = d.pieces.iter().tuple_combinations().all(|(p, q)| {
                    let common: Block = p.iter().filter(|z| q.contains(z)).copied().collect();
                    common == d.root
                });
                let tails_ordered =
                    (1..d.pieces.len()).all(|i| match (d.tail(i - 1).last(), d.tail(i).first()) {
                        (Some(a), Some(b)) => a < b,
                        _ => true,
                    });
                let root_first = d.root.last().is_none_or(|r| (0..d.pieces.len()).all(|i| d.tail(i).first().is_none_or(|t| t > r)));
                s.case(union == *b && meets && tails_ordered && root_first, || {
                    json!({"type": name, "property": "reconstruction", "level": level, "block": show(b)})
                });
            }
            let shift = |p: &OrdinalCode| OrdinalCode::new(1, p.offset);
            let y: Vec<OrdinalCode> = x.iter().map(shift).collect();
            let mapped: BTreeSet<(usize, Block)> = f.blocks().map(|(l, b)| (l, b.iter().map(shift).collect())).collect();
            s.case(blocks(&unique_finite_scheme(&y, &spec)?) == mapped, || {
                json!({"type": name, "k": k, "property": "order isomorphism"})
            });
            for j in 0..=k {
                let gamma = OrdinalCode::fin(spec.m(j) as u32);
                let restricted = blocks(&f.restrict(gamma));
                let direct = blocks(&unique_finite_scheme(&naturals(spec.m(j)), &spec)?);
                s.case(restricted == direct && restricted.is_subset(&blocks(&f)), || {
                    json!({"type": name, "k": k, "j": j, "property": "restriction"})
                });
            }
        }
    }
    Ok(s.finish())
}

/// is_scheme on a loaded dump.
pub fn scheme_dump_suite(scheme: &SchemePrefix) -> SuiteResult {
    let mut s = Suite::new("scheme-dump");
    let report = scheme.check();
    s.case(report.passed(), || json!({"violation": report.violations[0].to_string()}));
    s.finish()
}

/// om₁–om₄, dp₁–dp₂ and xi_a–xi_d on every pair and triple.
pub fn metrics_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("metrics", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("metrics");
    for (name, spec, top) in fixtures(cfg) {
        let c = fixture_ctx(&spec, top)?;
        let dom = c.scheme().domain().to_vec();
        let n = dom.len();
        let mut rho = vec![vec![0; n]; n];
        let mut delta = vec![vec![DeltaValue::Infinite; n]; n];
        for i in 0..n {
            for j in 0..n {
                rho[i][j] = c.rho(dom[i], dom[j])?;
                delta[i][j] = c.delta(dom[i], dom[j])?;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let at = || json!({"type": name, "a": dom[i].to_string(), "b": dom[j].to_string()});
                s.case((rho[i][j] == 0) == (i == j), || json!({"om": 1, "at": at()}));
                s.case(rho[i][j] == rho[j][i], || json!({"om": 2, "at": at()}));
                if i < j {
                    for k in rho[i][j]..=top {
                        s.case(c.k_card(dom[i], k)? < c.k_card(dom[j], k)?, || json!({"dp": 1, "k": k, "at": at()}));
                    }
                    let d = delta[i][j].level();
                    s.case(d.is_some_and(|d| d <= rho[i][j]), || json!({"dp": 1, "delta": "≤ ρ", "at": at()}));
                    let (d, r) = (d.unwrap_or(usize::MAX), rho[i][j]);
                    for k in 1..=top {
                        let (xa, xb) = (c.xi(dom[i], k)?, c.xi(dom[j], k)?);
                        let ok = (k >= d || xa == xb)
                            && (k != r || (0 <= xa && xa < xb))
                            && (k <= r || xa == -1 || xa == xb)
                            && (k != d || (xa >= 0 && xb >= 0 && xa != xb));
                        s.case(ok, || json!({"xi": k, "values": [xa, xb], "at": at()}));
                    }
                }
                for l in 0..n {
                    if i <= j.min(l) {
                        s.case(rho[i][j] <= rho[i][l].max(rho[j][l]), || json!({"om": 3, "c": dom[l].to_string(), "at": at()}));
                    }
                    if i != j && j != l && i != l && delta[i][j] < delta[j][l] {
                        s.case(delta[i][j] == delta[i][l], || json!({"dp": 2, "c": dom[l].to_string(), "at": at()}));
                    }
                }
            }
            for k in 0..=top {
                let ball: Vec<OrdinalCode> = (0..=i).filter(|x| rho[i][*x] <= k).map(|x| dom[x]).collect();
                s.case(ball == c.closure(dom[i], k)?, || json!({"om": 4, "type": name, "a": dom[i].to_string(), "k": k}));
            }
        }
    }
    Ok(s.finish())
}

/// (α)_k = F ∩ (α+1) for every level-k block F ∋ α.
pub fn closure_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("closure", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("closure");
    for (name, spec, top) in fixtures(cfg) {
        let c = fixture_ctx(&spec, top)?;
        for (k, f) in c.scheme().blocks() {
            for a in f {
                let cut: Block = f.iter().copied().filter(|x| x <= a).collect();
                s.case(c.closure(*a, k)? == cut, || json!({"type": name, "k": k, "a": a.to_string(), "block": show(f)}));
            }
        }
    }
    Ok(s.finish())
}

/// The literal double loop: every n-subset (by bitmask), every level, is_captured; sorted like the search.
pub fn oracle_search(
    ctx: &MetricContext,
    family: &[Block],
    n: usize,
    star: Star,
    levels: std::ops::RangeInclusive<usize>,
) -> Result<Vec<CaptureReport>> {
    let mut out = Vec::new();
    if n == 0 || family.len() >= 64 {
        return Ok(out);
    }
    for mask in 0u64..(1u64 << family.len()) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let idx: Vec<usize> = (0..family.len()).filter(|i| mask >> i & 1 == 1).collect();
        let chosen: Vec<Block> = idx.iter().map(|i| family[*i].clone()).collect();
        let w = if n == 1 {
            DeltaSystemWitness::single(chosen[0].clone())
        } else {
            match delta_system_root(&chosen) {
                Ok(w) => w,
                Err(_) => continue,
            }
        };
        for l in levels.clone() {
            if let Ok(mut r) = is_captured(ctx, &w, l, star)? {
                r.indices = Some(idx.clone());
                out.push(r);
            }
        }
    }
    out.sort_by(|a, b| (&a.indices, a.level).cmp(&(&b.indices, b.level)));
    Ok(out)
}

/// Random 2-sets below `bound`, drawn from ChaCha8 seeded with `seed`.
pub fn seeded_family(seed: u64, size: usize, bound: u32) -> Vec<Block> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let a = rng.random_range(0..bound);
            let mut b = rng.random_range(0..bound - 1);
            if b >= a {
                b += 1;
            }
            let mut v = vec![OrdinalCode::fin(a), OrdinalCode::fin(b)];
            v.sort();
            v
        })
        .collect()
}

/// Search equals the oracle; reports are Δ-systems with the Ξ pattern; disjoint ones meet in A^l.
pub fn capture_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    if let Some(r) = Suite::skip_if_zero("capture", cfg.levels, "levels") {
        return Ok(r);
    }
    let mut s = Suite::new("capture");
    let spec = t4();
    let top = cfg.levels.min(spec.top());
    let c = fixture_ctx(&spec, top)?;
    let singletons: Vec<Block> = c.scheme().domain().iter().map(|x| vec![*x]).collect();
    let mut families = vec![("singletons".to_string(), singletons)];
    if top >= 1 {
        for i in 0..3 {
            let seed = cfg.seed.wrapping_add(i);
            families.push((format!("seeded {seed}"), seeded_family(seed, 8, c.scheme().domain().len() as u32)));
        }
    }
    let max_n = (1..=top).map(|k| spec.n(k)).max().unwrap_or(0);
    for (label, fam) in &families {
        for n in 1..=max_n {
            for star in [Star::NONE, Star::RHO, Star::DELTA, Star::BOTH] {
                let found = search_captured(&c, fam, n, star, 1..=top)?;
                let oracle = oracle_search(&c, fam, n, star, 1..=top)?;
                s.case(found == oracle, || json!({"family": label, "n": n, "star": star, "search": found.len(), "oracle": oracle.len()}));
                for r in &found {
                    let w = &r.witness;
                    let again = if w.n() == 1 { Ok(w.clone()) } else { delta_system_root(&w.sets) };
                    s.case(again.as_ref() == Ok(w), || json!({"family": label, "report": r, "property": "Δ-system"}));
                    s.case(!r.full || w.n() == spec.n(r.level), || json!({"family": label, "report": r, "property": "full"}));
                    if w.pairwise_disjoint() {
                        let mut ok = true;
                        for (i, set) in w.sets.iter().enumerate() {
                            for x in set {
                                ok &= c.xi(*x, r.level)? == i as i64;
                            }
                        }
                        s.case(ok, || json!({"family": label, "report": r, "property": "Ξ pattern"}));
                        let iw = capture_intersection_witness(&c, r);
                        s.case(iw.is_ok(), || json!({"family": label, "report": r, "property": "intersection witness"}));
                    }
                }
            }
        }
        // A clause (I) failure cannot be repaired by adding star clauses.
        for (set, l) in fam.iter().cartesian_product(1..=top) {
            let w = DeltaSystemWitness::single(set.clone());
            if let Err(CaptureFailure::ClauseOne { .. }) = is_captured(&c, &w, l, Star::NONE)? {
                s.case(is_captured(&c, &w, l, Star::BOTH)?.is_err(), || json!({"family": label, "set": show(set), "l": l}));
            }
        }
    }
    Ok(s.finish())
}
