//! The forcing P(F) of finite conditions over a ground scheme on a limit γ.

mod cseq;
mod steps;

pub use cseq::{accepts, adequate, captured_singletons, good_tuple_root, jmax, CSequence, GoodTuple, JMax, Rejection};
pub use steps::{ih_delta_extension_step, ih_rho_extension_step, DeltaStep, RhoStep};

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{horizon, invalid, Error, Result};
use crate::ordinal::{naturals, OrdinalCode};
use crate::scheme::{canonical_decomposition, template, unique_finite_scheme, Block, SchemePrefix};
use crate::types::TypeSpec;

/// red_δ(p)
pub fn red(p: &[OrdinalCode], delta: OrdinalCode) -> Vec<OrdinalCode> {
    let below: Vec<OrdinalCode> = p.iter().copied().filter(|x| *x < delta).collect();
    let above = p.len() - below.len();
    match below.last() {
        Some(&top) => {
            let mut out = below.clone();
            out.extend((1..=above as u32).map(|i| top.plus(i)));
            out
        }
        None => naturals(p.len()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Condition {
    pub points: Vec<OrdinalCode>,
    /// k_p; `None` only for the empty condition.
    pub k: Option<usize>,
}

impl Condition {
    pub fn empty() -> Self {
        Condition { points: vec![], k: None }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: OrdinalCode) -> bool {
        self.points.binary_search(&x).is_ok()
    }

    pub fn below(&self, gamma: OrdinalCode) -> Vec<OrdinalCode> {
        self.points.iter().copied().filter(|x| *x < gamma).collect()
    }

    /// α_p = max(p ∩ γ).
    pub fn alpha(&self, gamma: OrdinalCode) -> Option<OrdinalCode> {
        self.below(gamma).last().copied()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionReason {
    /// A point lies at or above γ+ω.
    OutsideUniverse,
    /// (III): the part above γ is not an initial segment of [γ, γ+ω).
    TailNotInitial,
    /// (I): |p| is not some m_k.
    SizeNotInType,
    /// (II): p ∩ γ is not an initial segment of a level-k_p ground block.
    NotBlockSegment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionVerdict {
    pub is_condition: bool,
    pub k: Option<usize>,
    pub reason: Option<ConditionReason>,
}

impl ConditionVerdict {
    fn yes(k: Option<usize>) -> Self {
        ConditionVerdict { is_condition: true, k, reason: None }
    }

    fn no(reason: ConditionReason) -> Self {
        ConditionVerdict { is_condition: false, k: None, reason: Some(reason) }
    }
}

/// P(F) over `ground`, a family on points below the limit γ.
#[derive(Debug, Clone)]
pub struct Forcing {
    ground: SchemePrefix,
    gamma: OrdinalCode,
    /// All blocks of F(m_k), by k, as index vectors.
    templates: Vec<HashSet<Vec<usize>>>,
}

impl Forcing {
    pub fn new(ground: SchemePrefix, gamma: OrdinalCode) -> Result<Self> {
        if !gamma.is_limit() {
            return Err(invalid(format!("{gamma} is not a limit code")));
        }
        if let Some(x) = ground.domain().iter().find(|x| **x >= gamma) {
            return Err(invalid(format!("ground point {x} is not below {gamma}")));
        }
        let spec = ground.spec();
        let templates = (0..=spec.top())
            .map(|k| template(spec, k).into_iter().flatten().collect())
            .collect();
        Ok(Forcing { ground, gamma, templates })
    }

    pub fn ground(&self) -> &SchemePrefix {
        &self.ground
    }

    pub fn gamma(&self) -> OrdinalCode {
        self.gamma
    }

    pub fn spec(&self) -> &TypeSpec {
        self.ground.spec()
    }

    /// γ + j
    pub fn new_point(&self, j: usize) -> OrdinalCode {
        self.gamma.plus(j as u32)
    }

    fn is_new(&self, x: OrdinalCode) -> bool {
        x >= self.gamma && x.limit_block == self.gamma.limit_block
    }

    /// Cut_α(F) = (F ∩ α) ∪ [γ, γ + |F ∖ α|).
    pub fn cut(&self, f: &[OrdinalCode], alpha: OrdinalCode) -> Condition {
        let mut points: Vec<OrdinalCode> = f.iter().copied().filter(|x| *x < alpha).collect();
        let moved = f.len() - points.len();
        points.extend((0..moved).map(|j| self.new_point(j)));
        let k = if points.is_empty() { None } else { self.spec().level_of_size(points.len()) };
        Condition { points, k }
    }

    /// Whether red_γ(p) is a ground block; errors when the prefix cannot decide.
    fn red_is_block(&self, p: &[OrdinalCode], k: usize) -> Result<bool> {
        let r = red(p, self.gamma);
        self.ground.check_points(&r)?;
        if !self.ground.level_known(k) {
            return Err(horizon(format!("ground does not store level {k}")));
        }
        Ok(self.ground.contains_block(k, &r))
    }

    /// Checks (I)–(III) directly and against red_γ(p) ∈ F; the two must agree.
    pub fn is_condition(&self, p: &[OrdinalCode]) -> Result<ConditionVerdict> {
        let mut pts = p.to_vec();
        pts.sort();
        pts.dedup();
        if pts.is_empty() {
            return Ok(ConditionVerdict::yes(None));
        }
        if pts.iter().any(|x| *x >= self.gamma && !self.is_new(*x)) {
            return Ok(ConditionVerdict::no(ConditionReason::OutsideUniverse));
        }
        let below: Vec<OrdinalCode> = pts.iter().copied().filter(|x| *x < self.gamma).collect();
        let tail_ok = pts[below.len()..].iter().enumerate().all(|(j, x)| *x == self.new_point(j));
        if !tail_ok {
            return Ok(ConditionVerdict::no(ConditionReason::TailNotInitial));
        }
        self.ground.check_points(&below)?;
        let Some(k) = self.spec().level_of_size(pts.len()) else {
            return Ok(ConditionVerdict::no(ConditionReason::SizeNotInType));
        };
        let direct = self.ground.level(k).iter().any(|b| b.len() >= below.len() && b[..below.len()] == below[..]);
        let via_red = self.red_is_block(&pts, k)?;
        if direct != via_red {
            return Err(Error::Inconsistent(format!(
                "direct check and reduction disagree on {:?}",
                pts.iter().map(ToString::to_string).collect::<Vec<_>>()
            )));
        }
        Ok(if direct {
            ConditionVerdict::yes(Some(k))
        } else {
            ConditionVerdict::no(ConditionReason::NotBlockSegment)
        })
    }

    /// Build a condition, failing when `p` is not one.
    pub fn condition(&self, p: &[OrdinalCode]) -> Result<Condition> {
        let v = self.is_condition(p)?;
        if !v.is_condition {
            return Err(invalid(format!("not a condition: {:?}", v.reason)));
        }
        let mut points = p.to_vec();
        points.sort();
        points.dedup();
        Ok(Condition { points, k: v.k })
    }

    /// p ≤ q iff q = ∅ or q ∈ F(p).
    pub fn leq(&self, p: &Condition, q: &Condition) -> bool {
        if q.is_empty() {
            return true;
        }
        let Some(kp) = p.k else { return false };
        let mut idx = Vec::with_capacity(q.points.len());
        for x in &q.points {
            match p.points.binary_search(x) {
                Ok(i) => idx.push(i),
                Err(_) => return false,
            }
        }
        self.templates.get(kp).is_some_and(|t| t.contains(&idx))
    }

    /// F(p), the unique scheme on the points of p.
    pub fn scheme_of(&self, p: &Condition) -> Result<SchemePrefix> {
        if p.is_empty() {
            return Ok(SchemePrefix::from_levels(self.spec().clone(), vec![], vec![]));
        }
        unique_finite_scheme(&p.points, self.spec())
    }

    /// Blocks of F(p) with their levels, without building a `SchemePrefix`.
    pub fn blocks_of(&self, p: &Condition) -> Vec<(usize, Block)> {
        let Some(kp) = p.k else { return vec![] };
        template(self.spec(), kp)
            .into_iter()
            .enumerate()
            .flat_map(|(k, level)| {
                level
                    .into_iter()
                    .map(move |ix| (k, ix.into_iter().map(|i| p.points[i]).collect::<Block>()))
            })
            .collect()
    }

    /// Every condition, each once: by level, then ground block, then the number of ground
    /// points kept (largest first).
    pub fn candidates(&self) -> impl Iterator<Item = Condition> + '_ {
        let mut seen = HashSet::new();
        (0..self.ground.num_levels())
            .flat_map(move |k| self.ground.level(k).iter().map(move |g| (k, g)))
            .flat_map(move |(k, g)| {
                (0..=g.len()).rev().map(move |j| {
                    let mut points = g[..j].to_vec();
                    points.extend((0..g.len() - j).map(|i| self.new_point(i)));
                    Condition { points, k: Some(k) }
                })
            })
            .filter(move |c| seen.insert(c.points.clone()))
    }

    /// Least candidate below `p` satisfying `pred`.
    pub fn least_extension<P>(&self, p: &Condition, mut pred: P) -> Result<Option<Condition>>
    where
        P: FnMut(&Condition) -> Result<bool>,
    {
        for q in self.candidates() {
            if self.leq(&q, p) && pred(&q)? {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    /// IH₁(α, A, F): A ⊆ F_0 and R(F) = F ∩ α, for F of level ≥ 1.
    pub fn ih1_holds(&self, alpha: OrdinalCode, a: &[OrdinalCode], f: &[OrdinalCode], level: usize) -> Result<bool> {
        if level == 0 {
            return Ok(false);
        }
        let d = canonical_decomposition(f, level, self.spec())?;
        let below: Vec<OrdinalCode> = f.iter().copied().filter(|x| *x < alpha).collect();
        Ok(a.iter().all(|x| d.pieces[0].binary_search(x).is_ok()) && d.root == below)
    }
}

/// A dense set of P(F) together with its least-witness extender.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DenseSet {
    /// Conditions containing β.
    Cofinal { beta: OrdinalCode },
    /// Conditions p with some F ∈ F(p) satisfying IH₁(α, A, F).
    Ih1 { alpha: OrdinalCode, set: Vec<OrdinalCode> },
}

impl DenseSet {
    pub fn cofinal(beta: OrdinalCode) -> Self {
        DenseSet::Cofinal { beta }
    }

    pub fn ih1(alpha: OrdinalCode, set: &[OrdinalCode]) -> Self {
        let set: BTreeSet<_> = set.iter().copied().collect();
        DenseSet::Ih1 { alpha, set: set.into_iter().collect() }
    }

    pub fn id(&self) -> String {
        match self {
            DenseSet::Cofinal { beta } => format!("cofinal({beta})"),
            DenseSet::Ih1 { alpha, set } => {
                let s: Vec<String> = set.iter().map(ToString::to_string).collect();
                format!("ih1({alpha};{})", s.join(","))
            }
        }
    }

    pub fn holds(&self, forcing: &Forcing, p: &Condition) -> Result<bool> {
        match self {
            DenseSet::Cofinal { beta } => Ok(p.contains(*beta)),
            DenseSet::Ih1 { alpha, set } => {
                for (k, f) in forcing.blocks_of(p) {
                    if forcing.ih1_holds(*alpha, set, &f, k)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// The least condition below p in the set; p itself when it already belongs.
    pub fn extend(&self, forcing: &Forcing, p: &Condition) -> Result<Condition> {
        let fail = |reason: String| Error::DenseSet { id: self.id(), reason };
        match self {
            DenseSet::Cofinal { beta } => {
                if *beta >= forcing.gamma && !forcing.is_new(*beta) {
                    return Err(fail(format!("{beta} is not below γ+ω")));
                }
            }
            DenseSet::Ih1 { alpha, set } => {
                if *alpha >= forcing.gamma || set.iter().any(|x| *x >= forcing.gamma) {
                    return Err(fail("α and A must lie below γ".into()));
                }
            }
        }
        if self.holds(forcing, p).map_err(|e| fail(e.to_string()))? {
            return Ok(p.clone());
        }
        forcing
            .least_extension(p, |q| self.holds(forcing, q))
            .map_err(|e| fail(e.to_string()))?
            .ok_or_else(|| fail("the ground prefix holds no witness".into()))
    }
}

/// A decreasing run of conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub conditions: Vec<Condition>,
    pub met: Vec<String>,
}

impl Chain {
    pub fn last(&self) -> &Condition {
        self.conditions.last().expect("chains are never empty")
    }
}

/// Apply each extender in order, starting from `start`.
pub fn run_filter(forcing: &Forcing, start: Condition, schedule: &[DenseSet]) -> Result<Chain> {
    let mut chain = Chain { conditions: vec![start], met: vec![] };
    for d in schedule {
        let cur = chain.last().clone();
        let next = d.extend(forcing, &cur)?;
        if next != cur {
            chain.conditions.push(next);
        }
        chain.met.push(d.id());
    }
    Ok(chain)
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub chain: Chain,
    pub schedule: Vec<DenseSet>,
    /// Ground ∪ F(p_T).
    pub scheme: SchemePrefix,
    /// F(p_T) alone.
    pub generic_part: SchemePrefix,
}

/// Interleave cofinal(γ+i) for i < horizon with the IH₁ instances.
pub fn canonical_schedule(gamma: OrdinalCode, horizon: usize, ih1: &[(OrdinalCode, Vec<OrdinalCode>)]) -> Vec<DenseSet> {
    let mut out = Vec::new();
    for i in 0..horizon.max(ih1.len()) {
        if i < horizon {
            out.push(DenseSet::cofinal(gamma.plus(i as u32)));
        }
        if let Some((alpha, set)) = ih1.get(i) {
            out.push(DenseSet::ih1(*alpha, set));
        }
    }
    out
}

/// Extend the ground over γ towards γ+ω along the canonical schedule.
pub fn extend_to_next_limit(
    forcing: &Forcing,
    horizon: usize,
    ih1: &[(OrdinalCode, Vec<OrdinalCode>)],
) -> Result<Extension> {
    let schedule = canonical_schedule(forcing.gamma, horizon, ih1);
    let chain = run_filter(forcing, Condition::empty(), &schedule)?;
    let generic_part = forcing.scheme_of(chain.last())?;
    let scheme = forcing.ground.union(&generic_part);
    Ok(Extension { chain, schedule, scheme, generic_part })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::codes;
    use crate::scheme::omega_scheme_prefix;
    use crate::types::fixtures::t4;

    fn w(j: u32) -> OrdinalCode {
        OrdinalCode::new(1, j)
    }

    fn forcing() -> Forcing {
        Forcing::new(omega_scheme_prefix(&t4(), 4).unwrap(), OrdinalCode::omega(1)).unwrap()
    }

    fn pts(fin: &[u32], new: &[u32]) -> Vec<OrdinalCode> {
        let mut v = codes(fin);
        v.extend(new.iter().map(|j| w(*j)));
        v
    }

    #[test]
    fn condition_examples() {
        let f = forcing();
        assert_eq!(f.is_condition(&pts(&[0], &[0])).unwrap(), ConditionVerdict::yes(Some(1)));
        assert_eq!(f.is_condition(&pts(&[0, 1], &[0, 1])).unwrap(), ConditionVerdict::yes(Some(2)));
        let v = f.is_condition(&pts(&[0, 2], &[0, 2])).unwrap();
        assert_eq!(v.reason, Some(ConditionReason::TailNotInitial));
        assert!(f.is_condition(&[]).unwrap().is_condition);
    }

    #[test]
    fn reduction_examples() {
        let g = OrdinalCode::omega(1);
        assert_eq!(red(&pts(&[0], &[0]), g), codes(&[0, 1]));
        assert_eq!(red(&pts(&[], &[0, 1]), g), codes(&[0, 1]));
        assert_eq!(red(&pts(&[0, 1], &[0, 1]), g), codes(&[0, 1, 2, 3]));
    }

    #[test]
    fn cut_examples() {
        let f = forcing();
        assert_eq!(f.cut(&codes(&[0, 1, 4, 5]), OrdinalCode::fin(4)).points, pts(&[0, 1], &[0, 1]));
        assert_eq!(f.cut(&codes(&[0, 1, 4, 5]), OrdinalCode::fin(6)).points, codes(&[0, 1, 4, 5]));
        assert_eq!(f.cut(&codes(&[0, 2]), OrdinalCode::fin(0)).points, pts(&[], &[0, 1]));
    }

    #[test]
    fn order_examples() {
        let f = forcing();
        let p = f.condition(&pts(&[0, 1], &[0, 1])).unwrap();
        assert!(f.leq(&p, &f.condition(&pts(&[0], &[0])).unwrap()));
        assert!(f.leq(&p, &p));
        assert!(!f.leq(&p, &f.condition(&codes(&[0, 2])).unwrap()));
        assert!(f.leq(&p, &Condition::empty()));
    }

    #[test]
    fn dense_set_examples() {
        let f = forcing();
        let p = f.condition(&pts(&[0], &[0])).unwrap();
        let q = DenseSet::cofinal(w(3)).extend(&f, &p).unwrap();
        assert!(f.leq(&q, &p));
        assert!((0..4).all(|j| q.contains(w(j))));
        let d = DenseSet::ih1(OrdinalCode::fin(0), &[]);
        assert!(d.holds(&f, &f.condition(&codes(&[0, 1])).unwrap()).unwrap());
    }

    #[test]
    fn filter_examples() {
        let f = forcing();
        let sched = [DenseSet::cofinal(w(0)), DenseSet::cofinal(w(1))];
        let chain = run_filter(&f, Condition::empty(), &sched).unwrap();
        assert!(chain.last().contains(w(0)) && chain.last().contains(w(1)));
        assert_eq!(chain.met.len(), 2);
        let chain = run_filter(&f, Condition::empty(), &[]).unwrap();
        assert_eq!(chain.conditions, vec![Condition::empty()]);
        let p = f.condition(&pts(&[0], &[0])).unwrap();
        let chain = run_filter(&f, p.clone(), &[DenseSet::cofinal(w(0))]).unwrap();
        assert_eq!(chain.conditions, vec![p]);
    }

    #[test]
    fn extension_horizon_zero_is_identity() {
        let f = forcing();
        let ext = extend_to_next_limit(&f, 0, &[]).unwrap();
        assert_eq!(ext.scheme.levels(), f.ground().levels());
    }
}
