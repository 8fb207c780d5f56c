//! The constructive extension steps behind IH_ρ(C, n+1) and IH_Δ(C).
//!
//! Each step builds a condition q below p from witnesses found by exhaustive scans of the
//! ground prefix, then re-checks the promised facts on the finite family ground ∪ F(q).

use serde::Serialize;

use super::cseq::{accepts, captured_singletons, good_tuple_root, jmax, CSequence, GoodTuple};
use super::{Condition, Forcing};
use crate::delta::is_subset;
use crate::error::{horizon, invalid, Error, Result};
use crate::metrics::MetricContext;
use crate::ordinal::OrdinalCode;
use crate::scheme::{canonical_decomposition, Block};

fn combined(forcing: &Forcing, q: &Condition) -> Result<MetricContext> {
    let part = forcing.scheme_of(q)?;
    Ok(MetricContext::new(forcing.ground().union(&part)))
}

fn ground_ctx(forcing: &Forcing) -> MetricContext {
    MetricContext::new(forcing.ground().clone())
}

fn unverified(what: &str) -> Error {
    Error::Inconsistent(format!("postcondition failed: {what}"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum DeltaStep {
    /// α < γ: the ground already carries the instance.
    Ground,
    Extended {
        q: Condition,
        l: usize,
        j: usize,
        /// j = 0 because no nonempty adequate set exists.
        vacuous: bool,
        delta_is_gamma: bool,
    },
}

/// Extend p towards an instance of IH_Δ(C) for (δ, α) at levels ≥ k.
pub fn ih_delta_extension_step(
    forcing: &Forcing,
    c: &CSequence,
    p: &Condition,
    delta: OrdinalCode,
    alpha: OrdinalCode,
    k: usize,
) -> Result<DeltaStep> {
    let gamma = forcing.gamma();
    if alpha < gamma {
        return Ok(DeltaStep::Ground);
    }
    if !delta.is_limit() || delta > gamma || alpha < delta {
        return Err(invalid("need a limit δ ≤ γ with δ ≤ α"));
    }
    if let Some(step) = already_decided(forcing, c, p, delta, alpha, k) {
        return Ok(step);
    }
    if delta == gamma {
        delta_case_one(forcing, c, p, alpha, k)
    } else {
        delta_case_two(forcing, c, p, delta, alpha, k)
    }
}

/// p itself carries the instance at some level in (k, k_p].
fn already_decided(forcing: &Forcing, c: &CSequence, p: &Condition, delta: OrdinalCode, alpha: OrdinalCode, k: usize) -> Option<DeltaStep> {
    let kp = p.k?;
    if !p.contains(alpha) {
        return None;
    }
    let ctx = combined(forcing, p).ok()?;
    (k.max(1)..=kp).find_map(|l| {
        let jm = jmax(&ctx, c, delta, l, alpha).ok()?;
        verify_delta_facts(&ctx, c, delta, alpha, l, jm.j).ok()?;
        Some(DeltaStep::Extended { q: p.clone(), l, j: jm.j, vacuous: jm.vacuous, delta_is_gamma: delta == forcing.gamma() })
    })
}

fn delta_case_one(forcing: &Forcing, c: &CSequence, p: &Condition, alpha: OrdinalCode, k: usize) -> Result<DeltaStep> {
    let gamma = forcing.gamma();
    let spec = forcing.spec().clone();
    let ground = ground_ctx(forcing);
    let cg = c.get(gamma)?.to_vec();

    // q′ ≤ p with α ∈ q′, k_{q′} ≥ k and r_{k_{q′}+1} = |q′ ∩ γ|.
    let mut found = None;
    for q1 in forcing.candidates() {
        let Some(kq) = q1.k else { continue };
        let l = kq + 1;
        if kq < k || !q1.contains(alpha) || !spec.has_level(l) || spec.r(l) != q1.below(gamma).len() {
            continue;
        }
        if !forcing.leq(&q1, p) {
            continue;
        }
        let below = q1.below(gamma);
        let a_rank = q1.points.iter().filter(|x| **x < alpha).count();
        // j: largest size of a Δ-captured D ⊆ C_γ at level l with ‖D(i)‖_{l−1} = |α ∩ q′|.
        let mut j = 0;
        for size in (1..=spec.n(l).min(cg.len())).rev() {
            let hit = itertools::Itertools::combinations(cg.iter().copied(), size).find_map(|d| {
                let ok = d.iter().all(|x| ground.k_card(*x, l - 1).ok() == Some(a_rank))
                    && captured_singletons(&ground, l, &d).ok() == Some(true);
                ok.then_some(d)
            });
            if hit.is_some() {
                j = size;
                break;
            }
        }
        if j == spec.n(l) {
            return Err(Error::Invalid(format!("hypothesis violated: q′ = {q1} forces j = n_{l}")));
        }
        let blocks: Vec<&Block> = forcing
            .ground()
            .level(l)
            .iter()
            .filter(|f| f[..spec.r(l)] == below[..])
            .collect();
        for f in blocks {
            let dec = canonical_decomposition(f, l, &spec)?;
            let alpha_j = dec.tail(j)[0];
            let q = forcing.cut(f, alpha_j);
            if forcing.leq(&q, &q1) {
                found = Some((q, l, j));
                break;
            }
        }
        if found.is_some() {
            break;
        }
    }
    let (q, l, j) = found.ok_or_else(|| horizon("no q′ with r_{k+1} = |q′ ∩ γ| and a usable level-l block"))?;
    if !forcing.leq(&q, p) {
        return Err(unverified("q ≤ p"));
    }
    let ctx = combined(forcing, &q)?;
    verify_delta_facts(&ctx, c, gamma, alpha, l, j)?;
    let vacuous = jmax(&ctx, c, gamma, l, alpha)?.vacuous;
    Ok(DeltaStep::Extended { q, l, j, vacuous, delta_is_gamma: true })
}

fn verify_delta_facts(ctx: &MetricContext, c: &CSequence, delta: OrdinalCode, alpha: OrdinalCode, l: usize, j: usize) -> Result<()> {
    let spec = ctx.scheme().spec();
    let below = ctx.closure(alpha, l - 1)?.into_iter().filter(|x| *x < delta).count();
    if spec.r(l) != below {
        return Err(unverified("r_l = |(α)_{l−1} ∩ δ|"));
    }
    let jm = jmax(ctx, c, delta, l, alpha)?;
    if jm.j != j {
        return Err(unverified("j = j^α_δ(l)"));
    }
    if j < spec.n(l) && ctx.xi(alpha, l)? != j as i64 {
        return Err(unverified("Ξ_α(l) = j"));
    }
    Ok(())
}

fn delta_case_two(
    forcing: &Forcing,
    c: &CSequence,
    p: &Condition,
    delta: OrdinalCode,
    alpha: OrdinalCode,
    k: usize,
) -> Result<DeltaStep> {
    let gamma = forcing.gamma();
    let spec = forcing.spec().clone();
    let ground = ground_ctx(forcing);
    // Without loss of generality α ∈ p, k_p ≥ k and p ∩ [δ, γ) ≠ ∅.
    let p = forcing
        .least_extension(p, |q| {
            Ok(q.contains(alpha)
                && q.k.is_some_and(|kq| kq >= k)
                && q.points.iter().any(|x| *x >= delta && *x < gamma))
        })?
        .ok_or_else(|| horizon("no condition below p meets [δ, γ) and contains α"))?;
    let kp = p.k.expect("nonempty");
    let f = super::red(&p.points, gamma);
    let alpha_rank = p.points.iter().filter(|x| **x < alpha).count();
    let alpha_prime = f[alpha_rank];
    let beta = f[p.below(gamma).len()];
    for l in kp + 1..=spec.top() {
        if !forcing.ground().level_known(l) || forcing.ground().level(l).is_empty() {
            break;
        }
        let Ok(closure) = ground.closure(alpha_prime, l - 1) else { continue };
        if spec.r(l) != closure.iter().filter(|x| **x < delta).count() {
            continue;
        }
        let jm = jmax(&ground, c, delta, l, alpha_prime)?;
        let xi = ground.xi(alpha_prime, l)?;
        if jm.j != spec.n(l) && xi != jm.j as i64 {
            continue;
        }
        let Some(g) = forcing.ground().level(l).iter().find(|g| g.binary_search(&alpha_prime).is_ok()) else {
            continue;
        };
        let q = forcing.cut(g, beta);
        if !forcing.leq(&q, &p) {
            continue;
        }
        let ctx = combined(forcing, &q)?;
        verify_delta_facts(&ctx, c, delta, alpha, l, jm.j)?;
        return Ok(DeltaStep::Extended { q, l, j: jm.j, vacuous: jm.vacuous, delta_is_gamma: false });
    }
    Err(horizon("no level above k_p carries the ground instance for α′"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RhoStep {
    pub q: Condition,
    pub l: usize,
    /// The accepting block (q itself, as a block of F(q)).
    pub block: Block,
    /// Tail selection D ∈ [C^{n}_δ]^{n}.
    pub selection: Vec<OrdinalCode>,
}

/// Ground points α ∈ (lo, γ) with (α)^-_k = target, in increasing order.
fn unbounded_closure_witnesses<'a>(
    ground: &'a MetricContext,
    lo: OrdinalCode,
    gamma: OrdinalCode,
    k: usize,
    target: &'a [OrdinalCode],
) -> impl Iterator<Item = OrdinalCode> + 'a {
    ground
        .scheme()
        .domain()
        .iter()
        .copied()
        .filter(move |x| *x > lo && *x < gamma)
        .filter(move |x| ground.closure_strict(*x, k).ok().as_deref() == Some(target))
}

/// Every (l > k′, F ∈ F_l, D) accepting `t` in the ground, in scan order.
fn accepting_blocks(
    ground: &MetricContext,
    c: &CSequence,
    t: &GoodTuple,
    kprime: usize,
    n_above: usize,
) -> Result<Vec<(usize, Block, Vec<OrdinalCode>)>> {
    let spec = ground.scheme().spec();
    let cn = if t.n == 0 { vec![] } else { c.c_n(t.n, t.delta)? };
    let mut out = Vec::new();
    for l in kprime + 1..ground.scheme().num_levels() {
        if spec.n(l) <= n_above {
            continue;
        }
        for f in ground.scheme().level(l) {
            for d in itertools::Itertools::combinations(cn.iter().copied(), t.n) {
                if accepts(ground, c, l, f, t, &d)?.is_ok() {
                    out.push((l, f.clone(), d));
                }
            }
        }
    }
    Ok(out)
}

fn with_point(base: impl IntoIterator<Item = OrdinalCode>, x: OrdinalCode) -> Vec<OrdinalCode> {
    let mut v: Vec<OrdinalCode> = base.into_iter().collect();
    v.push(x);
    v.sort();
    v.dedup();
    v
}

/// Extend p so that some (l, q) with l > k′ accepts the good tuple `t` (whose n is ≥ 1).
///
/// Witnesses are scanned in a fixed order and the first candidate whose q passes q ≤ p and
/// the acceptance check on ground ∪ F(q) is returned.
pub fn ih_rho_extension_step(forcing: &Forcing, c: &CSequence, p: &Condition, t: &GoodTuple, kprime: usize) -> Result<RhoStep> {
    let gamma = forcing.gamma();
    if t.n == 0 {
        return Err(invalid("the step extends tuples with n ≥ 1"));
    }
    if kprime < t.k {
        return Err(invalid("k′ must be at least k"));
    }
    if !t.delta.is_limit() || t.delta > gamma || t.a.iter().any(|x| *x < t.delta) {
        return Err(invalid("need a limit δ ≤ γ and A ⊆ [δ, γ+ω)"));
    }
    if !c.in_lim(t.n, t.delta)? {
        return Err(invalid(format!("{} is not in Lim_{}", t.delta, t.n)));
    }
    let ground = ground_ctx(forcing);
    // Without loss of generality A ⊆ p, k_p ≥ k′, p ∩ δ ≠ ∅ and p reaches past γ.
    let p = forcing
        .least_extension(p, |q| {
            Ok(is_subset(&t.a, &q.points)
                && q.k.is_some_and(|kq| kq >= kprime)
                && q.points.iter().any(|x| *x < t.delta)
                && q.points.last().is_some_and(|x| *x >= gamma))
        })?
        .ok_or_else(|| horizon("no condition below p contains A with k_p ≥ k′"))?;
    let kp = p.k.expect("nonempty");
    let p_below = p.below(gamma);
    let n = t.n - 1;

    // (l, F, D, β) candidates in scan order.
    let mut candidates: Vec<(usize, Block, Vec<OrdinalCode>, OrdinalCode)> = Vec::new();
    if t.delta == gamma {
        let top = *p_below.last().expect("p meets δ");
        let delta1 = *c
            .get(gamma)?
            .iter()
            .find(|x| **x > top)
            .ok_or_else(|| horizon("C_γ has no stored point above p ∩ γ"))?;
        let root = good_tuple_root(&ground, c, t.n, gamma, t.k)?;
        for nu in c.c_n(t.n, gamma)? {
            let Ok(cl) = ground.closure(nu, t.k) else { continue };
            let tail: Vec<OrdinalCode> = cl.into_iter().filter(|y| root.binary_search(y).is_err()).collect();
            if tail.first().is_none_or(|m| *m <= delta1) {
                continue;
            }
            for alpha in unbounded_closure_witnesses(&ground, nu, gamma, kp, &p_below) {
                let t1 = GoodTuple { n, delta: delta1, k: t.k, a: with_point(tail.iter().copied(), alpha) };
                for (l, f, d) in accepting_blocks(&ground, c, &t1, kprime, n + 1)? {
                    // Homogeneity: the point of F_{n+1} matching α in F_n.
                    let dec = canonical_decomposition(&f, l, forcing.spec())?;
                    let Some(pos) = dec.tail(n).iter().position(|x| *x == alpha) else { continue };
                    let beta = dec.tail(n + 1)[pos];
                    let mut sel = d;
                    sel.push(nu);
                    candidates.push((l, f, sel, beta));
                }
            }
        }
    } else {
        let lo = t.a.iter().copied().filter(|x| *x < gamma).chain([t.delta]).max().expect("δ present");
        for alpha in unbounded_closure_witnesses(&ground, lo, gamma, kp, &p_below) {
            let t1 = GoodTuple { n: t.n, delta: t.delta, k: t.k, a: with_point(t.a.iter().copied().filter(|x| *x < gamma), alpha) };
            for (l, f, d) in accepting_blocks(&ground, c, &t1, kprime, t.n)? {
                candidates.push((l, f, d, alpha));
            }
        }
    }

    for (l, f, selection, beta) in candidates {
        let q = forcing.cut(&f, beta);
        if !forcing.leq(&q, &p) {
            continue;
        }
        let ctx = combined(forcing, &q)?;
        if accepts(&ctx, c, l, &q.points, t, &selection)?.is_ok() {
            return Ok(RhoStep { block: q.points.clone(), q, l, selection });
        }
    }
    Err(horizon("no scanned witness yields an accepted cut below p"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::extend_to_next_limit;
    use crate::ordinal::codes;
    use crate::scheme::{omega_scheme_prefix, SchemePrefix};
    use crate::types::fixtures::t4;

    fn om(a: u32) -> OrdinalCode {
        OrdinalCode::omega(a)
    }

    fn over_omega() -> Forcing {
        Forcing::new(omega_scheme_prefix(&t4(), 4).unwrap(), om(1)).unwrap()
    }

    /// Grounds over ω·2 and ω·3 obtained by two extension runs of T₄ extended to level 6.
    fn tower() -> (SchemePrefix, SchemePrefix) {
        let spec = t4().extended_to(6);
        let ih1 = [(OrdinalCode::fin(2), codes(&[2]))];
        let g0 = omega_scheme_prefix(&spec, 6).unwrap();
        let e1 = extend_to_next_limit(&Forcing::new(g0, om(1)).unwrap(), 6, &ih1).unwrap();
        let e2 = extend_to_next_limit(&Forcing::new(e1.scheme.clone(), om(2)).unwrap(), 6, &ih1).unwrap();
        (e1.scheme, e2.scheme)
    }

    fn text(q: &Condition) -> String {
        q.to_string()
    }

    #[test]
    fn delta_ground_points_need_nothing() {
        let f = over_omega();
        let c = CSequence::new([(om(1), codes(&[1, 2]))]).unwrap();
        let r = ih_delta_extension_step(&f, &c, &Condition::empty(), om(1), OrdinalCode::fin(3), 1).unwrap();
        assert_eq!(r, DeltaStep::Ground);
    }

    #[test]
    fn delta_case_one_full_and_vacuous() {
        let f = over_omega();
        let c = CSequence::new([(om(1), codes(&[1, 2]))]).unwrap();
        let DeltaStep::Extended { q, l, j, vacuous, delta_is_gamma } =
            ih_delta_extension_step(&f, &c, &Condition::empty(), om(1), om(1), 1).unwrap()
        else {
            panic!("expected an extension")
        };
        assert_eq!((text(&q).as_str(), l, j, vacuous, delta_is_gamma), ("{0,1,2,ω}", 2, 2, false, true));
        // q already decides the instance.
        let again = ih_delta_extension_step(&f, &c, &q, om(1), om(1), 1).unwrap();
        assert!(matches!(again, DeltaStep::Extended { q: ref q2, l: 2, j: 2, .. } if *q2 == q));

        let empty = CSequence::new([(om(1), vec![])]).unwrap();
        let DeltaStep::Extended { q, j, vacuous, .. } =
            ih_delta_extension_step(&f, &empty, &Condition::empty(), om(1), om(1), 1).unwrap()
        else {
            panic!("expected an extension")
        };
        assert_eq!((text(&q).as_str(), j, vacuous), ("{0,ω,ω+1,ω+2}", 0, true));
        let ctx = MetricContext::new(f.ground().union(&f.scheme_of(&q).unwrap()));
        assert_eq!(ctx.xi(om(1), 2).unwrap(), 0);
    }

    #[test]
    fn delta_case_two_on_a_tower() {
        let (g1, _) = tower();
        let f = Forcing::new(g1, om(2)).unwrap();
        let c = CSequence::new([(om(1), codes(&[1, 2, 3, 5]))]).unwrap();
        let r = ih_delta_extension_step(&f, &c, &Condition::empty(), om(1), om(2), 1).unwrap();
        let DeltaStep::Extended { q, l, j, delta_is_gamma, .. } = r else { panic!("expected an extension") };
        assert_eq!((l, j, delta_is_gamma), (5, 1, false));
        assert!(q.contains(om(2)) && q.contains(OrdinalCode::fin(0)));
    }

    #[test]
    fn missing_entries_are_horizon_errors() {
        let f = over_omega();
        let c = CSequence::new([(om(2), vec![])]).unwrap();
        let r = ih_delta_extension_step(&f, &c, &Condition::empty(), om(1), om(1), 1);
        assert!(matches!(r, Err(Error::Horizon(_))));
        let (_, g2) = tower();
        let f3 = Forcing::new(g2, om(3)).unwrap();
        let t = GoodTuple { n: 1, delta: om(3), k: 0, a: vec![] };
        let c = CSequence::new([(om(1), codes(&[2, 3]))]).unwrap();
        assert!(matches!(ih_rho_extension_step(&f3, &c, &Condition::empty(), &t, 1), Err(Error::Horizon(_))));
    }

    #[test]
    fn rho_case_two_degenerate_instance() {
        let (_, g2) = tower();
        let f = Forcing::new(g2, om(3)).unwrap();
        let c = CSequence::new([(om(1), codes(&[2, 3])), (om(2), vec![om(1)])]).unwrap();
        let t = GoodTuple { n: 1, delta: om(2), k: 0, a: vec![] };
        let r = ih_rho_extension_step(&f, &c, &Condition::empty(), &t, 1).unwrap();
        assert_eq!(text(&r.q), "{0,1,2,3,4,ω·2,ω·3,ω·3+1,ω·3+2,ω·3+3}");
        assert_eq!((r.l, r.selection.clone()), (4, codes(&[2])));
        let ctx = MetricContext::new(f.ground().union(&f.scheme_of(&r.q).unwrap()));
        assert_eq!(accepts(&ctx, &c, r.l, &r.block, &t, &r.selection).unwrap(), Ok(()));
        // A condition already carrying the witness is kept.
        let again = ih_rho_extension_step(&f, &c, &r.q, &t, 1).unwrap();
        assert!(f.leq(&again.q, &r.q));
        assert_eq!(again.l, r.l);
    }

    #[test]
    fn rho_case_one_on_a_tower() {
        let (_, g2) = tower();
        let f = Forcing::new(g2, om(3)).unwrap();
        let c = CSequence::new([
            (om(1), codes(&[2, 3])),
            (om(2), vec![om(1).plus(1), om(1).plus(2)]),
            (om(3), vec![om(1), om(2)]),
        ])
        .unwrap();
        let t = GoodTuple { n: 1, delta: om(3), k: 0, a: vec![] };
        let r = ih_rho_extension_step(&f, &c, &Condition::empty(), &t, 1).unwrap();
        assert_eq!(text(&r.q), "{0,1,ω+1,ω+2,ω+3,ω·3}");
        assert_eq!((r.l, r.selection.clone()), (3, vec![om(1).plus(1)]));
        assert!(ih_rho_extension_step(&f, &c, &Condition::empty(), &GoodTuple { n: 0, ..t }, 1).is_err());
    }
}
