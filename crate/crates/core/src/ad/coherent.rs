use std::collections::BTreeSet;

use serde::Serialize;

use super::graded::GradedSet;
use super::poset::{monotone_bijection, FinitePoset};
use super::represent::Representation;
use crate::error::{invalid, Error, Result};
use crate::metrics::MetricContext;

/// A finite family of graded sets with an assignment g and the tails at which coherence is asked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherentApprox {
    pub family: Vec<GradedSet>,
    pub g: Vec<GradedSet>,
    /// (b, a, tail): family[b] sits below family[a]; g(a) ∩ family[b] must equal g(b) on N-levels tail..=horizon.
    pub pairs: Vec<(usize, usize, usize)>,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoherenceFailure {
    NotContained { index: usize, level: usize },
    Incoherent { below: usize, above: usize, level: usize },
}

impl CoherentApprox {
    pub fn new(family: Vec<GradedSet>, g: Vec<GradedSet>, pairs: Vec<(usize, usize, usize)>, horizon: usize) -> Result<Self> {
        if family.len() != g.len() {
            return Err(invalid("g must assign one set to each family member"));
        }
        if pairs.iter().any(|(b, a, _)| *a >= family.len() || *b >= family.len()) {
            return Err(invalid("pair index out of range"));
        }
        Ok(CoherentApprox { family, g, pairs, horizon })
    }

    /// g(A) = A for every A.
    pub fn identity(family: Vec<GradedSet>, pairs: Vec<(usize, usize, usize)>, horizon: usize) -> Self {
        CoherentApprox { g: family.clone(), family, pairs, horizon }
    }

    pub fn check(&self) -> Vec<CoherenceFailure> {
        let mut out = Vec::new();
        for (i, (a, ga)) in self.family.iter().zip(&self.g).enumerate() {
            if let Some(level) = ga.first_excess(a, 0, self.horizon) {
                out.push(CoherenceFailure::NotContained { index: i, level });
            }
        }
        for &(b, a, tail) in &self.pairs {
            let lhs = self.g[a].intersection(&self.family[b]);
            if let Some(level) = lhs.first_difference(&self.g[b], tail, self.horizon) {
                out.push(CoherenceFailure::Incoherent { below: b, above: a, level });
            }
        }
        out
    }

    /// (f·g)(A) = f(A) Δ g(A)
    pub fn product(&self, other: &CoherentApprox) -> Result<CoherentApprox> {
        if self.family != other.family {
            return Err(invalid("the product needs assignments on the same family"));
        }
        let g = self.g.iter().zip(&other.g).map(|(x, y)| x.symmetric_difference(y)).collect();
        let mut pairs: Vec<_> = self.pairs.iter().chain(&other.pairs).copied().collect();
        pairs.sort_unstable();
        pairs.dedup();
        Ok(CoherentApprox { family: self.family.clone(), g, pairs, horizon: self.horizon.min(other.horizon) })
    }

    /// The least C with C ∩ A = g(A) on N-levels tail..=horizon for every A, if one exists.
    ///
    /// The constraints are pointwise, so this is equivalent to searching all C ⊆ ∪A.
    pub fn trivialize(&self, tail: usize) -> Option<GradedSet> {
        let mut forced_in = GradedSet::default();
        let mut forced_out = GradedSet::default();
        for (a, ga) in self.family.iter().zip(&self.g) {
            for k in tail..=self.horizon {
                forced_in.extend_level(k, ga.level(k));
                forced_out.extend_level(k, a.level(k).difference(&ga.level(k)).cloned());
            }
        }
        forced_in.intersection(&forced_out).is_empty().then_some(forced_in)
    }
}

/// One stage of the g_S recursion.
#[derive(Debug, Clone, Serialize)]
pub struct GStep {
    pub y: String,
    pub in_s: bool,
    pub separator: GradedSet,
    pub g: GradedSet,
    /// (x, N-level) for each x < y.
    pub tails: Vec<(String, usize)>,
    pub clause_a: bool,
    pub clause_b: bool,
    /// Â_(y,0) ⊆ g(T_y) above the level where the two pieces split.
    pub keeps_zero: bool,
    pub coherent: bool,
}

impl GStep {
    pub fn passed(&self) -> bool {
        self.clause_a && self.clause_b && self.keeps_zero && self.coherent
    }
}

/// T_x = T′_(x,0) ∪ T′_(x,1) and the pieces Â_(x,i), from the representation of X × 2.
#[derive(Debug, Clone)]
pub struct GSystem {
    pub poset: FinitePoset,
    pub doubled: Representation,
    pub s: BTreeSet<usize>,
    pub t: Vec<GradedSet>,
    pub g: Vec<Option<GradedSet>>,
    pub steps: Vec<GStep>,
}

impl GSystem {
    pub fn new(ctx: &MetricContext, poset: &FinitePoset, s: BTreeSet<usize>, horizon_k: usize) -> Result<Self> {
        if s.iter().any(|x| *x >= poset.len()) {
            return Err(invalid("S must be a subset of the poset"));
        }
        let doubled = Representation::build(ctx, &poset.doubled(), horizon_k)?;
        let t = (0..poset.len()).map(|x| doubled.t[2 * x].union(&doubled.t[2 * x + 1])).collect();
        Ok(GSystem { poset: poset.clone(), doubled, s, t, g: vec![None; poset.len()], steps: Vec::new() })
    }

    pub fn n_horizon(&self) -> usize {
        self.doubled.horizon + 1
    }

    fn a_hat(&self, x: usize, i: usize) -> &GradedSet {
        &self.doubled.a_hat[2 * x + i]
    }

    /// First N-level where Â_(x,0) and Â_(x,1) are disjoint by the AD grading.
    fn split(&self, ctx: &MetricContext, x: usize) -> Result<usize> {
        Ok(self.doubled.rho_of(ctx, &[2 * x, 2 * x + 1])? + 1)
    }

    /// N-level from which g(T_y) ∩ T_x must match g(T_x).
    fn tail(&self, ctx: &MetricContext, x: usize, y: usize) -> Result<usize> {
        Ok(self.doubled.rho_of(ctx, &[2 * x, 2 * x + 1, 2 * y, 2 * y + 1])? + 2)
    }

    pub fn approx(&self, ctx: &MetricContext) -> Result<CoherentApprox> {
        let g = self
            .g
            .iter()
            .enumerate()
            .map(|(x, g)| g.clone().ok_or_else(|| invalid(format!("g is undefined at {}", self.poset.name(x)))))
            .collect::<Result<_>>()?;
        let mut pairs = Vec::new();
        for y in 0..self.poset.len() {
            for x in self.poset.below(y) {
                pairs.push((x, y, self.tail(ctx, x, y)?));
            }
        }
        CoherentApprox::new(self.t.clone(), g, pairs, self.n_horizon())
    }
}

/// Extends g to y: a separator C ⊆ T_y for g below y, then the Â pieces of y according to S.
pub fn g_s_step(ctx: &MetricContext, sys: &mut GSystem, y: usize) -> Result<GStep> {
    let below = sys.poset.below(y);
    let h = sys.n_horizon();
    let mut tails = Vec::with_capacity(below.len());
    for &x in &below {
        if sys.g[x].is_none() {
            return Err(invalid(format!("g is undefined at {} below {}", sys.poset.name(x), sys.poset.name(y))));
        }
        tails.push((x, sys.tail(ctx, x, y)?));
    }
    let ty = &sys.t[y];
    let mut separator = GradedSet::default();
    for k in 1..=h {
        for sigma in ty.level(k) {
            let mut verdict = None;
            for &(x, tail) in &tails {
                if k < tail || !sys.t[x].contains(k, &sigma) {
                    continue;
                }
                let inside = sys.g[x].as_ref().is_some_and(|g| g.contains(k, &sigma));
                if verdict.is_some_and(|v| v != inside) {
                    return Err(Error::Inconsistent(format!("no separator below {}: level {k} point {sigma:?}", sys.poset.name(y))));
                }
                verdict = Some(inside);
            }
            if verdict == Some(true) {
                separator.insert(k, sigma);
            }
        }
    }
    let in_s = sys.s.contains(&y);
    let (a0, a1) = (sys.a_hat(y, 0).clone(), sys.a_hat(y, 1).clone());
    let g = if in_s { separator.union(&a0).difference(&a1) } else { separator.union(&a0).union(&a1) };
    let clause_a = !in_s || a1.intersection(&g).is_empty();
    let clause_b = in_s || a1.first_excess(&g, 0, h).is_none();
    let keeps_zero = a0.first_excess(&g, sys.split(ctx, y)?, h).is_none();
    let coherent = g.first_excess(ty, 0, h).is_none()
        && tails.iter().all(|&(x, tail)| {
            let gx = sys.g[x].as_ref().expect("checked above");
            g.intersection(&sys.t[x]).first_difference(gx, tail, h).is_none()
        });
    let step = GStep {
        y: sys.poset.name(y).to_string(),
        in_s,
        separator,
        g: g.clone(),
        tails: tails.iter().map(|(x, t)| (sys.poset.name(*x).to_string(), *t)).collect(),
        clause_a,
        clause_b,
        keeps_zero,
        coherent,
    };
    sys.g[y] = Some(g);
    sys.steps.push(step.clone());
    Ok(step)
}

/// Runs g_s_step along φ.
pub fn g_s_system(ctx: &MetricContext, poset: &FinitePoset, s: BTreeSet<usize>, horizon_k: usize) -> Result<GSystem> {
    let mut sys = GSystem::new(ctx, poset, s, horizon_k)?;
    let phi = monotone_bijection(poset);
    let mut order: Vec<usize> = (0..poset.len()).collect();
    order.sort_by_key(|x| phi[*x]);
    for y in order {
        g_s_step(ctx, &mut sys, y)?;
    }
    Ok(sys)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyFact {
    pub x: String,
    /// Â_(x,1) ⊆ (g_S · g_S′)(T_x)
    pub one_inside: bool,
    /// Â_(x,0) ∩ (g_S · g_S′)(T_x) = ∅ from N-level `split` on.
    pub zero_outside: bool,
    pub split: usize,
}

/// For x ∈ S Δ S′, the product g_S · g_S′ separates the two Â pieces of x.
pub fn key_fact(
    ctx: &MetricContext,
    poset: &FinitePoset,
    s: &BTreeSet<usize>,
    s_prime: &BTreeSet<usize>,
    horizon_k: usize,
) -> Result<Vec<KeyFact>> {
    let a = g_s_system(ctx, poset, s.clone(), horizon_k)?;
    let b = g_s_system(ctx, poset, s_prime.clone(), horizon_k)?;
    let product = a.approx(ctx)?.product(&b.approx(ctx)?)?;
    let h = a.n_horizon();
    s.symmetric_difference(s_prime)
        .map(|&x| {
            let split = a.split(ctx, x)?;
            Ok(KeyFact {
                x: poset.name(x).to_string(),
                one_inside: a.a_hat(x, 1).first_excess(&product.g[x], 0, h).is_none(),
                zero_outside: a.a_hat(x, 0).intersection(&product.g[x]).first_difference(&GradedSet::default(), split, h).is_none(),
                split,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::naturals;
    use crate::scheme::unique_finite_scheme;
    use crate::types::fixtures::t4;

    fn ctx() -> MetricContext {
        MetricContext::new(unique_finite_scheme(&naturals(10), &t4()).unwrap())
    }

    fn set(items: &[(usize, &[u32])]) -> GradedSet {
        let mut g = GradedSet::default();
        for (k, s) in items {
            g.insert(*k, s.to_vec());
        }
        g
    }

    #[test]
    fn identity_and_group_law() {
        let a = set(&[(1, &[0]), (2, &[0, 1]), (2, &[1, 1])]);
        let b = set(&[(2, &[0, 1])]);
        let id = CoherentApprox::identity(vec![a.clone(), b.clone()], vec![(1, 0, 0)], 2);
        assert!(id.check().is_empty());
        assert_eq!(id.trivialize(0), Some(a.union(&b)));
        let sq = id.product(&id).unwrap();
        assert!(sq.g.iter().all(GradedSet::is_empty));
        assert_eq!(sq.trivialize(0), Some(GradedSet::default()));
        let bad = CoherentApprox::new(vec![a.clone(), b.clone()], vec![GradedSet::default(), b.clone()], vec![(1, 0, 0)], 2).unwrap();
        assert_eq!(bad.check(), vec![CoherenceFailure::Incoherent { below: 1, above: 0, level: 2 }]);
        // Above the only differing level the pair is fine.
        let late = CoherentApprox { pairs: vec![(1, 0, 3)], ..bad };
        assert!(late.check().is_empty());
    }

    #[test]
    fn g_s_on_a_two_chain() {
        let c = ctx();
        let chain = FinitePoset::chain(2);
        for s in [BTreeSet::new(), BTreeSet::from([1])] {
            let sys = g_s_system(&c, &chain, s.clone(), 3).unwrap();
            assert!(sys.steps.iter().all(GStep::passed), "{:?}", sys.steps);
            assert!(sys.steps[0].separator.is_empty());
            assert!(sys.approx(&c).unwrap().check().is_empty());
            let top = &sys.steps[1];
            assert_eq!(top.in_s, s.contains(&1));
        }
        let facts = key_fact(&c, &chain, &BTreeSet::from([1]), &BTreeSet::new(), 3).unwrap();
        assert_eq!(facts.len(), 1);
        assert!(facts[0].one_inside && facts[0].zero_outside);
    }
}
