//! The graded symbol space N, the pieces A^k_α, AD representations of finite posets and
//! coherent subsystems over them.

mod coherent;
mod graded;
mod poset;
mod represent;

pub use coherent::{g_s_step, g_s_system, key_fact, CoherenceFailure, CoherentApprox, GStep, GSystem, KeyFact};
pub use graded::{GradedSet, Sigma};
pub use poset::{monotone_bijection, well_founded_cofinal, FinitePoset};
pub use represent::{
    m_lemma_check, m_set, representation_check, t_piece, BoundedTailJudgment, LemmaCheck, Representation,
    RepresentationReport, Verdict,
};

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::capturing::CaptureReport;
use crate::error::{horizon, invalid, Error, Result};
use crate::metrics::MetricContext;
use crate::ordinal::OrdinalCode;
use crate::types::TypeSpec;

/// N_k = m_{k−1}^{n_k} × {k}, for the levels a type represents.
#[derive(Debug, Clone)]
pub struct SymbolSpace {
    spec: TypeSpec,
}

impl SymbolSpace {
    pub fn new(spec: TypeSpec) -> Self {
        SymbolSpace { spec }
    }

    fn check(&self, k: usize) -> Result<()> {
        if k == 0 || !self.spec.has_level(k) {
            return Err(horizon(format!("N_{k} needs level {k} ≥ 1 of the type")));
        }
        Ok(())
    }

    /// (arity n_k, alphabet m_{k−1})
    pub fn shape(&self, k: usize) -> Result<(usize, usize)> {
        self.check(k)?;
        Ok((self.spec.n(k), self.spec.m(k - 1)))
    }

    pub fn level_size(&self, k: usize) -> Result<usize> {
        let (n, m) = self.shape(k)?;
        Ok(m.pow(n as u32))
    }

    pub fn contains(&self, k: usize, s: &[u32]) -> bool {
        self.shape(k).is_ok_and(|(n, m)| s.len() == n && s.iter().all(|c| (*c as usize) < m))
    }

    /// Every σ ∈ N_k, lexicographically.
    pub fn level(&self, k: usize) -> Result<Vec<Sigma>> {
        let (n, m) = self.shape(k)?;
        Ok((0..n).map(|_| 0..m as u32).multi_cartesian_product().collect())
    }
}

/// Tuples of length n over m with coordinate `pos` pinned to `value`, lexicographically.
fn pinned(n: usize, m: usize, pos: usize, value: u32) -> Vec<Sigma> {
    (0..n)
        .map(|i| if i == pos { value..value + 1 } else { 0..m as u32 })
        .multi_cartesian_product()
        .collect()
}

/// A^k_α ⊆ N_k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdPiece {
    pub alpha: OrdinalCode,
    pub k: usize,
    pub members: BTreeSet<Sigma>,
}

/// A^k_α = {σ ∈ N_k : Ξ_α(k) ≥ 0 and σ(Ξ_α(k)) = ‖α‖_{k−1}}.
pub fn ad_piece(ctx: &MetricContext, alpha: OrdinalCode, k: usize) -> Result<AdPiece> {
    let (n, m) = SymbolSpace::new(ctx.scheme().spec().clone()).shape(k)?;
    let xi = ctx.xi(alpha, k)?;
    let members = if xi < 0 {
        BTreeSet::new()
    } else {
        let v = ctx.k_card(alpha, k - 1)?;
        pinned(n, m, xi as usize, v as u32).into_iter().collect()
    };
    Ok(AdPiece { alpha, k, members })
}

/// A_α restricted to levels lo..=hi.
pub fn ad_graded(ctx: &MetricContext, alpha: OrdinalCode, lo: usize, hi: usize) -> Result<GradedSet> {
    let mut g = GradedSet::default();
    for k in lo.max(1)..=hi {
        g.extend_level(k, ad_piece(ctx, alpha, k)?.members);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionVerdict {
    pub rho: usize,
    /// Levels ρ < k ≤ H that were compared.
    pub checked: Vec<usize>,
    /// First level above ρ where the pieces meet.
    pub overlap: Option<usize>,
}

impl IntersectionVerdict {
    pub fn passed(&self) -> bool {
        self.overlap.is_none()
    }
}

/// A^k_α ∩ A^k_β = ∅ for every ρ(α, β) < k ≤ H.
pub fn ad_intersection_bound(ctx: &MetricContext, alpha: OrdinalCode, beta: OrdinalCode, h: usize) -> Result<IntersectionVerdict> {
    if alpha == beta {
        return Err(invalid("the intersection bound needs α ≠ β"));
    }
    let rho = ctx.rho(alpha, beta)?;
    let mut checked = Vec::new();
    let mut overlap = None;
    for k in rho + 1..=h {
        checked.push(k);
        let a = ad_piece(ctx, alpha, k)?.members;
        let b = ad_piece(ctx, beta, k)?.members;
        if overlap.is_none() && !a.is_disjoint(&b) {
            overlap = Some(k);
        }
    }
    Ok(IntersectionVerdict { rho, checked, overlap })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterWitness {
    pub level: usize,
    /// The selected point of each set: its least element x with Ξ_x(l) = i.
    pub selected: Vec<OrdinalCode>,
    pub sigma: Sigma,
}

/// σ ∈ N_l with σ(i) = ‖D_i(i)‖_{l−1} and zeros elsewhere; checked to lie in every A^l_{D_i(i)}.
pub fn capture_intersection_witness(ctx: &MetricContext, report: &CaptureReport) -> Result<InterWitness> {
    let l = report.level;
    let sets = &report.witness.sets;
    if !report.witness.pairwise_disjoint() {
        return Err(invalid("the captured sets are not pairwise disjoint"));
    }
    let (arity, _) = SymbolSpace::new(ctx.scheme().spec().clone()).shape(l)?;
    if sets.len() > arity {
        return Err(invalid(format!("{} sets exceed n_{l} = {arity}", sets.len())));
    }
    let mut selected = Vec::with_capacity(sets.len());
    for (i, set) in sets.iter().enumerate() {
        let mut pick = None;
        for x in set {
            if ctx.xi(*x, l)? == i as i64 {
                pick = Some(*x);
                break;
            }
        }
        selected.push(pick.ok_or_else(|| invalid(format!("set {i} has no point with Ξ(l) = {i}")))?);
    }
    let mut sigma = vec![0u32; arity];
    for (i, x) in selected.iter().enumerate() {
        sigma[i] = ctx.k_card(*x, l - 1)? as u32;
    }
    for x in &selected {
        if !ad_piece(ctx, *x, l)?.members.contains(&sigma) {
            return Err(Error::Inconsistent(format!("σ = {sigma:?} is not in A^{l}_{x}")));
        }
    }
    Ok(InterWitness { level: l, selected, sigma })
}
