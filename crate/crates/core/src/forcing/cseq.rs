//! C-sequence prefixes, good tuples, acceptance and adequacy.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::capturing::{delta_system_root, is_captured, DeltaSystemWitness, Star};
use crate::delta::{intersect, is_subset, root_tail_tail};
use crate::error::{horizon, invalid, Result};
use crate::metrics::{DeltaValue, MetricContext};
use crate::ordinal::OrdinalCode;
use crate::scheme::canonical_decomposition;

/// Finite approximations of C_δ for finitely many limits δ.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CSequence {
    entries: BTreeMap<OrdinalCode, Vec<OrdinalCode>>,
}

impl CSequence {
    pub fn new(entries: impl IntoIterator<Item = (OrdinalCode, Vec<OrdinalCode>)>) -> Result<Self> {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        for (delta, c) in &entries {
            if !delta.is_limit() {
                return Err(invalid(format!("{delta} is not a limit")));
            }
            if !c.windows(2).all(|w| w[0] < w[1]) || c.last().is_some_and(|x| x >= delta) {
                return Err(invalid(format!("C_{delta} must be strictly increasing and below {delta}")));
            }
        }
        Ok(CSequence { entries })
    }

    /// Parse {"δ": [...]} where keys are JSON-encoded codes such as "[1,0]".
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<OrdinalCode>> =
            serde_json::from_str(s).map_err(|e| invalid(format!("c-sequence: {e}")))?;
        let mut entries = Vec::new();
        for (k, v) in raw {
            let delta: OrdinalCode =
                serde_json::from_str(&k).map_err(|e| invalid(format!("c-sequence key {k:?}: {e}")))?;
            entries.push((delta, v));
        }
        CSequence::new(entries)
    }

    pub fn get(&self, delta: OrdinalCode) -> Result<&[OrdinalCode]> {
        self.entries
            .get(&delta)
            .map(Vec::as_slice)
            .ok_or_else(|| horizon(format!("no C-sequence entry for {delta}")))
    }

    /// δ ∈ Lim_n.
    pub fn in_lim(&self, n: usize, delta: OrdinalCode) -> Result<bool> {
        if !delta.is_limit() {
            return Ok(false);
        }
        if n == 0 {
            return Ok(true);
        }
        for xi in self.get(delta)? {
            if !self.in_lim(n - 1, *xi)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// C^n_δ, defined for δ ∈ Lim_n.
    pub fn c_n(&self, n: usize, delta: OrdinalCode) -> Result<Vec<OrdinalCode>> {
        if n == 0 {
            return Ok(self.get(delta)?.to_vec());
        }
        if !self.in_lim(n, delta)? {
            return Err(invalid(format!("{delta} is not in Lim_{n}")));
        }
        let mut out = Vec::new();
        for xi in self.get(delta)? {
            out.extend(self.c_n(n - 1, *xi)?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// (δ ∈ Lim_n, C^n_δ when defined).
    pub fn lim_and_cn(&self, n: usize, delta: OrdinalCode) -> Result<(bool, Option<Vec<OrdinalCode>>)> {
        let inside = self.in_lim(n, delta)?;
        let c = if inside { Some(self.c_n(n, delta)?) } else { None };
        Ok((inside, c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodTuple {
    pub n: usize,
    pub delta: OrdinalCode,
    pub k: usize,
    pub a: Vec<OrdinalCode>,
}

/// R^n_k(δ), the root of {(ξ)_k : ξ ∈ C^n_δ}.
pub fn good_tuple_root(ctx: &MetricContext, c: &CSequence, n: usize, delta: OrdinalCode, k: usize) -> Result<Vec<OrdinalCode>> {
    let cn = c.c_n(n, delta)?;
    if cn.len() < 2 {
        return Err(horizon(format!("C^{n}_{delta} has fewer than two stored points")));
    }
    let closures: Vec<Vec<OrdinalCode>> = cn.iter().map(|x| ctx.closure(*x, k)).try_collect()?;
    root_tail_tail(&closures).map_err(|e| invalid(format!("closures over C^{n}_{delta} are not a system: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Rejection {
    /// n_l > n fails.
    Guard,
    NotABlock,
    BadSelection,
    /// A ⊄ F_n ∖ R(F).
    ASetOutside,
    /// (D(i))_k ⊄ F_i.
    ClosureOutside { i: usize },
    /// (D(i))_k ∩ R(F) ≠ R^n_k(δ).
    RootMismatch { i: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Whether (l, F) accepts the tuple with tail selection `d`.
pub fn accepts(
    ctx: &MetricContext,
    c: &CSequence,
    l: usize,
    f: &[OrdinalCode],
    t: &GoodTuple,
    d: &[OrdinalCode],
) -> Result<std::result::Result<(), Rejection>> {
    let spec = ctx.scheme().spec();
    if !spec.has_level(l) {
        return Err(horizon(format!("level {l} is not represented")));
    }
    if l == 0 || spec.n(l) <= t.n {
        return Ok(Err(Rejection::Guard));
    }
    if !ctx.scheme().contains_block(l, f) {
        return Ok(Err(Rejection::NotABlock));
    }
    let cn = c.c_n(t.n, t.delta)?;
    if d.len() != t.n || !d.windows(2).all(|w| w[0] < w[1]) || !is_subset(d, &cn) {
        return Ok(Err(Rejection::BadSelection));
    }
    let dec = canonical_decomposition(f, l, spec)?;
    let tail_n = dec.tail(t.n);
    if !is_subset(&t.a, &tail_n) {
        return Ok(Err(Rejection::ASetOutside));
    }
    if t.n == 0 {
        return Ok(Ok(()));
    }
    let root = good_tuple_root(ctx, c, t.n, t.delta, t.k)?;
    for (i, x) in d.iter().enumerate() {
        let cl = ctx.closure(*x, t.k)?;
        if !is_subset(&cl, &dec.pieces[i]) {
            return Ok(Err(Rejection::ClosureOutside { i }));
        }
        if intersect(&cl, &dec.root) != root {
            return Ok(Err(Rejection::RootMismatch { i }));
        }
    }
    Ok(Ok(()))
}

/// The singletons of `d` form a Δ-system that is Δ-captured at level l.
pub fn captured_singletons(ctx: &MetricContext, l: usize, d: &[OrdinalCode]) -> Result<bool> {
    if d.is_empty() {
        return Ok(true);
    }
    let singles: Vec<Vec<OrdinalCode>> = d.iter().map(|x| vec![*x]).collect();
    let witness = if d.len() == 1 {
        DeltaSystemWitness::single(singles[0].clone())
    } else {
        match delta_system_root(&singles) {
            Ok(w) => w,
            Err(_) => return Ok(false),
        }
    };
    Ok(is_captured(ctx, &witness, l, Star::DELTA)?.is_ok())
}

/// D is (δ, l, α)-adequate: Δ-captured at l as a family of singletons and Δ(α, D(i)) ≥ l.
pub fn adequate(ctx: &MetricContext, l: usize, alpha: OrdinalCode, d: &[OrdinalCode]) -> Result<bool> {
    if !captured_singletons(ctx, l, d)? {
        return Ok(false);
    }
    for x in d {
        if ctx.delta(alpha, *x)? < DeltaValue::Level(l) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JMax {
    pub j: usize,
    /// Least adequate set of size j, if j > 0.
    pub witness: Option<Vec<OrdinalCode>>,
    /// No nonempty adequate set exists; j = 0 stands in for the maximum of an empty set.
    pub vacuous: bool,
}

/// j^α_δ(l) by exhaustive search over the stored part of C_δ.
pub fn jmax(ctx: &MetricContext, c: &CSequence, delta: OrdinalCode, l: usize, alpha: OrdinalCode) -> Result<JMax> {
    let spec = ctx.scheme().spec();
    if l == 0 || !spec.has_level(l) {
        return Err(invalid(format!("level {l} has no n_l")));
    }
    if spec.n(l) < 2 {
        return Err(invalid(format!("n_{l} < 2")));
    }
    if alpha < delta {
        return Err(invalid(format!("α = {alpha} lies below δ = {delta}")));
    }
    let cd = c.get(delta)?;
    for j in (1..=spec.n(l).min(cd.len())).rev() {
        for d in cd.iter().copied().combinations(j) {
            if adequate(ctx, l, alpha, &d)? {
                return Ok(JMax { j, witness: Some(d), vacuous: false });
            }
        }
    }
    Ok(JMax { j: 0, witness: None, vacuous: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::{codes, naturals};
    use crate::scheme::unique_finite_scheme;
    use crate::types::fixtures::t4;

    fn om(a: u32) -> OrdinalCode {
        OrdinalCode::omega(a)
    }

    #[test]
    fn lim_towers() {
        let c = CSequence::new([
            (om(1), codes(&[1, 4])),
            (om(2), vec![OrdinalCode::new(1, 2)]),
            (om(3), vec![om(1), om(2)]),
            (om(4), vec![om(1), OrdinalCode::new(3, 1)]),
        ])
        .unwrap();
        assert!(c.in_lim(0, om(1)).unwrap());
        assert!(c.in_lim(0, om(7)).unwrap());
        let (inside, c1) = c.lim_and_cn(1, om(3)).unwrap();
        assert!(inside);
        assert_eq!(c1.unwrap(), vec![OrdinalCode::fin(1), OrdinalCode::fin(4), OrdinalCode::new(1, 2)]);
        assert!(!c.in_lim(1, om(4)).unwrap());
        assert!(c.in_lim(1, om(9)).is_err());
    }

    #[test]
    fn acceptance_guard() {
        let ctx = MetricContext::new(unique_finite_scheme(&naturals(10), &t4()).unwrap());
        let c = CSequence::new([(om(1), codes(&[3, 7]))]).unwrap();
        let t = GoodTuple { n: 2, delta: om(1), k: 1, a: vec![] };
        let verdict = accepts(&ctx, &c, 4, &naturals(10), &t, &codes(&[3, 7])).unwrap();
        assert_eq!(verdict, Err(Rejection::Guard));
        // With the guard satisfied at n = 1 the remaining clauses decide.
        let t1 = GoodTuple { n: 1, delta: om(1), k: 1, a: codes(&[7]) };
        let c1 = CSequence::new([(om(1), codes(&[3]))]).unwrap();
        assert!(accepts(&ctx, &c1, 4, &naturals(10), &t1, &codes(&[3])).is_err());
        let t0 = GoodTuple { n: 0, delta: om(1), k: 1, a: codes(&[7]) };
        assert_eq!(accepts(&ctx, &c1, 4, &naturals(10), &t0, &[]).unwrap(), Err(Rejection::ASetOutside));
        let t0 = GoodTuple { n: 0, delta: om(1), k: 1, a: codes(&[2, 5]) };
        assert_eq!(accepts(&ctx, &c1, 4, &naturals(10), &t0, &[]).unwrap(), Ok(()));
    }

    #[test]
    fn empty_c_gives_vacuous_j() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        let ctx = MetricContext::new(s);
        let c = CSequence::new([(om(1), vec![])]).unwrap();
        // α is only checked against δ; the empty search never touches it.
        let r = jmax(&ctx, &c, om(1), 4, om(1)).unwrap();
        assert_eq!(r, JMax { j: 0, witness: None, vacuous: true });
        assert!(jmax(&ctx, &c, om(1), 0, om(1)).is_err());
    }
}
