use std::collections::BTreeSet;

use serde::Serialize;

use super::graded::{GradedSet, Sigma};
use super::poset::{monotone_bijection, FinitePoset};
use super::{ad_graded, ad_piece};
use crate::error::{horizon, Result};
use crate::metrics::MetricContext;
use crate::ordinal::OrdinalCode;

fn code(phi: &[usize], x: usize) -> OrdinalCode {
    OrdinalCode::fin(phi[x] as u32)
}

/// M^k_x = {z ≤ x : φ(z) ∈ (φ(x))_k}.
pub fn m_set(ctx: &MetricContext, poset: &FinitePoset, phi: &[usize], x: usize, k: usize) -> Result<Vec<usize>> {
    let closure = ctx.closure(code(phi, x), k)?;
    Ok((0..poset.len())
        .filter(|z| poset.leq(*z, x) && closure.binary_search(&code(phi, *z)).is_ok())
        .collect())
}

/// T^k_x = ∪{A^{k+1}_{φ(z)} : z ∈ M^k_x} ⊆ N_{k+1}.
pub fn t_piece(ctx: &MetricContext, poset: &FinitePoset, phi: &[usize], x: usize, k: usize) -> Result<BTreeSet<Sigma>> {
    let mut out = BTreeSet::new();
    for z in m_set(ctx, poset, phi, x, k)? {
        out.extend(ad_piece(ctx, code(phi, z), k + 1)?.members);
    }
    Ok(out)
}

/// T_x and Â_x = A_{φ(x)} up to T-level K, i.e. on N_1..N_{K+1}.
#[derive(Debug, Clone)]
pub struct Representation {
    pub poset: FinitePoset,
    pub phi: Vec<usize>,
    pub horizon: usize,
    pub t: Vec<GradedSet>,
    pub a_hat: Vec<GradedSet>,
}

impl Representation {
    pub fn build(ctx: &MetricContext, poset: &FinitePoset, horizon_k: usize) -> Result<Self> {
        let phi = monotone_bijection(poset);
        if let Some(x) = (0..poset.len()).find(|x| !ctx.scheme().contains_point(code(&phi, *x))) {
            return Err(horizon(format!("φ({}) = {} is outside the scheme domain", poset.name(x), phi[x])));
        }
        let mut t = Vec::with_capacity(poset.len());
        let mut a_hat = Vec::with_capacity(poset.len());
        for x in 0..poset.len() {
            let mut tx = GradedSet::default();
            for k in 0..=horizon_k {
                tx.extend_level(k + 1, t_piece(ctx, poset, &phi, x, k)?);
            }
            t.push(tx);
            a_hat.push(ad_graded(ctx, code(&phi, x), 1, horizon_k + 1)?);
        }
        Ok(Representation { poset: poset.clone(), phi, horizon: horizon_k, t, a_hat })
    }

    /// ρ^{φ[S]}
    pub fn rho_of(&self, ctx: &MetricContext, set: &[usize]) -> Result<usize> {
        let codes: Vec<OrdinalCode> = set.iter().map(|x| code(&self.phi, *x)).collect();
        ctx.rho_max(&codes)
    }

    pub fn judge(&self, clause: &'static str, pair: &[usize], lhs: GradedSet, rhs: GradedSet, tail_level: usize) -> BoundedTailJudgment {
        // T-level k lives on N_{k+1}.
        let first = lhs.first_difference(&rhs, tail_level + 1, self.horizon + 1);
        BoundedTailJudgment {
            clause,
            pair: pair.iter().map(|x| self.poset.name(*x).to_string()).collect(),
            tail_level,
            horizon: self.horizon,
            verdict: if first.is_none() { Verdict::Agree } else { Verdict::Disagree },
            first_disagreement: first.map(|j| j - 1),
            lhs,
            rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Disagree,
}

/// lhs and rhs compared on T-levels tail_level..=horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundedTailJudgment {
    pub clause: &'static str,
    pub pair: Vec<String>,
    pub tail_level: usize,
    pub horizon: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_disagreement: Option<usize>,
    #[serde(skip)]
    pub lhs: GradedSet,
    #[serde(skip)]
    pub rhs: GradedSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub phi: Vec<(String, usize)>,
    pub judgments: Vec<BoundedTailJudgment>,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.judgments.iter().all(|j| j.verdict == Verdict::Agree)
    }
}

/// Clauses (a)–(e) of an AD representation, each with the tail level its proof yields.
pub fn representation_check(ctx: &MetricContext, poset: &FinitePoset, horizon_k: usize) -> Result<RepresentationReport> {
    let rep = Representation::build(ctx, poset, horizon_k)?;
    let n = poset.len();
    let mut out = Vec::new();
    for x in 0..n {
        out.push(rep.judge("a", &[x], rep.a_hat[x].intersection(&rep.t[x]), rep.a_hat[x].clone(), 0));
    }
    for x in 0..n {
        for y in 0..n {
            if x != y && !poset.leq(y, x) {
                let k0 = rep.rho_of(ctx, &[x, y])? + 1;
                out.push(rep.judge("b", &[x, y], rep.a_hat[y].intersection(&rep.t[x]), GradedSet::default(), k0));
            }
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            if let Some(m) = poset.inf(x, y) {
                let k0 = rep.rho_of(ctx, &[x, y, m])? + 1;
                out.push(rep.judge("c", &[x, y], rep.t[x].intersection(&rep.t[y]), rep.t[m].clone(), k0));
            }
        }
    }
    for x in 0..n {
        if poset.is_successor_like(x) {
            let pred = poset.pred(x);
            let mut set = pred.clone();
            set.push(x);
            let k0 = rep.rho_of(ctx, &set)? + 1;
            let below = pred.iter().fold(GradedSet::default(), |acc, z| acc.union(&rep.t[*z]));
            out.push(rep.judge("d", &[x], rep.t[x].difference(&below), rep.a_hat[x].clone(), k0));
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            if !poset.compatible(x, y) {
                let k0 = rep.rho_of(ctx, &[x, y])? + 1;
                out.push(rep.judge("e", &[x, y], rep.t[x].intersection(&rep.t[y]), GradedSet::default(), k0));
            }
        }
    }
    let phi = (0..n).map(|x| (poset.name(x).to_string(), rep.phi[x])).collect();
    Ok(RepresentationReport { phi, judgments: out })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub clause: &'static str,
    pub x: usize,
    pub y: usize,
    pub k: usize,
    pub holds: bool,
}

/// The M-set clauses (1), (3/2), (2), (3), (4), checked exactly for k ≤ K above their thresholds.
pub fn m_lemma_check(ctx: &MetricContext, poset: &FinitePoset, phi: &[usize], horizon_k: usize) -> Result<Vec<LemmaCheck>> {
    let n = poset.len();
    let rho = |s: &[usize]| -> Result<usize> {
        let codes: Vec<OrdinalCode> = s.iter().map(|x| code(phi, *x)).collect();
        ctx.rho_max(&codes)
    };
    let mut ms = Vec::with_capacity(horizon_k + 1);
    for k in 0..=horizon_k {
        let row: Vec<BTreeSet<usize>> =
            (0..n).map(|x| m_set(ctx, poset, phi, x, k).map(|v| v.into_iter().collect())).collect::<Result<_>>()?;
        ms.push(row);
    }
    let mut out = Vec::new();
    let mut push = |clause, x, y, k, holds| out.push(LemmaCheck { clause, x, y, k, holds });
    for x in 0..n {
        for y in 0..n {
            let inf = poset.inf(x, y);
            let t_inf = inf.map(|m| rho(&[x, y, m])).transpose()?;
            let t_pair = rho(&[x, y])?;
            for (k, m) in ms.iter().enumerate() {
                if let (Some(i), Some(t)) = (inf, t_inf) {
                    if k > t {
                        let meet: BTreeSet<usize> = m[x].intersection(&m[y]).copied().collect();
                        push("1", x, y, k, meet == m[i]);
                    }
                }
                if poset.leq(y, x) && k > t_pair {
                    push("3/2", x, y, k, m[y].is_subset(&m[x]));
                }
                if !poset.leq(y, x) {
                    push("2", x, y, k, m[y].contains(&y) && !m[x].contains(&y));
                }
                if x < y && !poset.compatible(x, y) {
                    push("4", x, y, k, m[x].is_disjoint(&m[y]));
                }
            }
        }
        if poset.is_successor_like(x) {
            let pred = poset.pred(x);
            let mut set = pred.clone();
            set.push(x);
            let t = rho(&set)?;
            for (k, m) in ms.iter().enumerate().filter(|(k, _)| *k > t) {
                let rest: BTreeSet<usize> = m[x].iter().copied().filter(|w| pred.iter().all(|z| !m[*z].contains(w))).collect();
                push("3", x, x, k, rest == BTreeSet::from([x]));
            }
        }
    }
    Ok(out)
}
