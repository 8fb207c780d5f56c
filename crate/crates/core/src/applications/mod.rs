//! Entangled sequences f_α with their realization machinery, and the scheme metric.

mod metric;

pub use metric::{
    finite_metric_search, is_c_monotone, isometry_check, parse_level_metrics, scheme_metric, FiniteMetric, IsometryVerdict,
    LevelMetrics, MonotoneVerdict, SearchOutcome, Q,
};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::capturing::{is_captured, CaptureReport, Star};
use crate::error::{invalid, Error, Result};
use crate::metrics::MetricContext;
use crate::ordinal::OrdinalCode;
use crate::types::TypeSpec;

/// Order by first disagreement.
pub fn lex_compare(f: &[i64], g: &[i64]) -> Result<Ordering> {
    if f.len() != g.len() {
        return Err(invalid(format!("lex_compare needs equal lengths, got {} and {}", f.len(), g.len())));
    }
    Ok(f.cmp(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Less,
    Greater,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Less => "<",
            Rel::Greater => ">",
        })
    }
}

impl Serialize for Rel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// t with a(i) t(i) b(i).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RealizationType(pub Vec<Rel>);

impl RealizationType {
    /// Parses a word over {<, >}.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '<' => Ok(Rel::Less),
                '>' => Ok(Rel::Greater),
                _ => Err(invalid(format!("realization types are words over <, >; got {c:?}"))),
            })
            .collect::<Result<_>>()
            .map(RealizationType)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for RealizationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|r| write!(f, "{r}"))
    }
}

/// T(a, b)
pub fn realization<T: Ord + fmt::Debug>(a: &[T], b: &[T]) -> Result<RealizationType> {
    if a.len() != b.len() {
        return Err(invalid("realization needs tuples of equal length"));
    }
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| match x.cmp(y) {
            Ordering::Less => Ok(Rel::Less),
            Ordering::Greater => Ok(Rel::Greater),
            Ordering::Equal => Err(invalid(format!("tie at coordinate {i}: {x:?}"))),
        })
        .collect::<Result<_>>()
        .map(RealizationType)
}

/// Positions of `values` listed in increasing value order.
pub fn order_pattern<T: Ord>(values: &[T]) -> Vec<usize> {
    let mut h: Vec<usize> = (0..values.len()).collect();
    h.sort_by(|a, b| values[*a].cmp(&values[*b]));
    h
}

/// C^k_i ⊆ m_k: the bits of (i − 1) mod 2^{m_k}; C^k_0 = ∅.
pub fn subset_code(spec: &TypeSpec, k: usize, i: usize) -> Result<BTreeSet<usize>> {
    if !spec.has_level(k + 1) {
        return Err(invalid(format!("C^{k} needs level {} of the type", k + 1)));
    }
    if i >= spec.n(k + 1) {
        return Err(invalid(format!("C^{k}_{i} needs i < n_{} = {}", k + 1, spec.n(k + 1))));
    }
    if i == 0 {
        return Ok(BTreeSet::new());
    }
    let m = spec.m(k);
    // m ≥ 64 would overflow the shift; those codes never wrap within any n we can store.
    let code = if m >= 64 { (i - 1) as u64 } else { ((i - 1) as u64) % (1u64 << m) };
    Ok((0..m.min(64)).filter(|b| code >> b & 1 == 1).collect())
}

/// n_k ≥ 2^{m_{k−1}} + 1
pub fn entangled_requirement(spec: &TypeSpec, k: usize) -> bool {
    let m = spec.m(k - 1);
    m < 63 && spec.n(k) as u64 > 1u64 << m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntangledVector {
    pub alpha: OrdinalCode,
    pub f: Vec<i64>,
}

/// f_α(0..=K). The subset-code requirement is enforced on levels 2..=K.
pub fn entangled_f(ctx: &MetricContext, alpha: OrdinalCode, top: usize) -> Result<EntangledVector> {
    let spec = ctx.scheme().spec();
    let mut f = vec![0i64];
    for k in 1..=top {
        if k >= 2 && !entangled_requirement(spec, k) {
            return Err(Error::TypeRequirement(format!(
                "n_{k} = {} < 2^m_{} + 1 = {}",
                spec.n(k),
                k - 1,
                1u128.checked_shl(spec.m(k - 1) as u32).map_or("∞".into(), |v| (v + 1).to_string())
            )));
        }
        let xi = ctx.xi(alpha, k)?;
        let v = if xi <= 0 {
            0
        } else {
            let code = subset_code(spec, k - 1, xi as usize)?;
            if code.contains(&ctx.k_card(alpha, k - 1)?) {
                xi
            } else {
                -xi
            }
        };
        f.push(v);
    }
    Ok(EntangledVector { alpha, f })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizationCheck {
    pub level: usize,
    pub t: RealizationType,
    pub index: usize,
    pub code: BTreeSet<usize>,
    /// T(f∘c_0, f∘c_i), recomputed from the vectors.
    pub realized: RealizationType,
}

/// The i with T(c_0, c_i) = t under the lexicographic order of the f vectors.
pub fn captured_realization_check(ctx: &MetricContext, report: &CaptureReport, t: &RealizationType) -> Result<RealizationCheck> {
    let l = report.level;
    let d = &report.witness;
    if l == 0 {
        return Err(invalid("capture level must be positive"));
    }
    if !d.pairwise_disjoint() {
        return Err(invalid("the captured tuples must be pairwise disjoint"));
    }
    if d.sets.iter().any(|s| s.len() != t.len()) {
        return Err(invalid(format!("tuples must have the arity of t ({})", t.len())));
    }
    if let Err(why) = is_captured(ctx, d, l, Star::DELTA)? {
        return Err(invalid(format!("family is not Δ-captured at {l}: {why}")));
    }
    let c0 = &d.sets[0];
    let mut code = BTreeSet::new();
    for (x, rel) in c0.iter().zip(&t.0) {
        if *rel == Rel::Less {
            code.insert(ctx.k_card(*x, l - 1)?);
        }
    }
    let spec = ctx.scheme().spec();
    let mut index = None;
    for i in 1..spec.n(l) {
        if subset_code(spec, l - 1, i)? == code {
            index = Some(i);
            break;
        }
    }
    let index = index.ok_or_else(|| Error::TypeRequirement(format!("no C^{}_i equals {code:?}; n_{l} is too small", l - 1)))?;
    if index >= d.sets.len() {
        return Err(invalid(format!("the family has {} tuples; index {index} is missing", d.sets.len())));
    }
    let ci = &d.sets[index];
    let mut rels = Vec::with_capacity(t.len());
    for (x, y) in c0.iter().zip(ci) {
        let fx = entangled_f(ctx, *x, l)?.f;
        let fy = entangled_f(ctx, *y, l)?.f;
        rels.push(match lex_compare(&fx, &fy)? {
            Ordering::Less => Rel::Less,
            Ordering::Greater => Rel::Greater,
            Ordering::Equal => return Err(Error::Inconsistent(format!("f_{x} = f_{y} up to level {l}"))),
        });
    }
    let realized = RealizationType(rels);
    if realized != *t {
        return Err(Error::Inconsistent(format!("index {index} realizes {realized}, not {t}")));
    }
    Ok(RealizationCheck { level: l, t: t.clone(), index, code, realized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capturing::DeltaSystemWitness;
    use crate::ordinal::{codes, naturals};
    use crate::scheme::unique_finite_scheme;
    use crate::types::fixtures::{t4, t_e};

    fn te_ctx() -> MetricContext {
        MetricContext::new(unique_finite_scheme(&naturals(6), &t_e()).unwrap())
    }

    #[test]
    fn lex_and_realization_examples() {
        assert_eq!(lex_compare(&[0, 1, 0], &[0, 1, 1]).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&[3, 1], &[3, 1]).unwrap(), Ordering::Equal);
        assert_eq!(lex_compare(&[0, -2], &[0, 1]).unwrap(), Ordering::Less);
        assert!(lex_compare(&[0], &[0, 1]).is_err());
        assert_eq!(realization(&[1, 5], &[2, 3]).unwrap().to_string(), "<>");
        assert!(realization(&[1, 5], &[1, 5]).is_err());
        assert_eq!(order_pattern(&[9, 4, 7]), vec![1, 2, 0]);
        assert_eq!(RealizationType::parse("<>").unwrap(), realization(&[1, 5], &[2, 3]).unwrap());
    }

    #[test]
    fn subset_code_examples() {
        let s = t_e();
        let c: Vec<Vec<usize>> = (0..5).map(|i| subset_code(&s, 1, i).unwrap().into_iter().collect()).collect();
        assert_eq!(c, vec![vec![], vec![], vec![0], vec![1], vec![0, 1]]);
        assert!(subset_code(&s, 1, 5).is_err());
        let wide = TypeSpec::from_lists(&[1, 2, 14], &[2, 7], &[0, 0]).unwrap();
        assert_eq!(subset_code(&wide, 1, 5).unwrap(), subset_code(&wide, 1, 1).unwrap());
        assert!(entangled_requirement(&s, 2) && !entangled_requirement(&t4(), 2));
    }

    #[test]
    fn entangled_examples() {
        let c = te_ctx();
        assert_eq!(entangled_f(&c, OrdinalCode::fin(3), 2).unwrap().f, vec![0, -1, -2]);
        assert_eq!(entangled_f(&c, OrdinalCode::fin(2), 2).unwrap().f[2], -1);
        for a in 0..6 {
            assert_eq!(entangled_f(&c, OrdinalCode::fin(a), 2).unwrap().f[0], 0);
        }
        let t4c = MetricContext::new(unique_finite_scheme(&naturals(10), &t4()).unwrap());
        assert!(matches!(entangled_f(&t4c, OrdinalCode::fin(3), 2), Err(Error::TypeRequirement(_))));
    }

    #[test]
    fn realization_on_te() {
        let c = te_ctx();
        // The level-2 block is the whole domain with root {0}; {1},…,{5} is full at level 2.
        let reports = crate::capturing::search_captured(&c, &(0..6).map(|x| codes(&[x])).collect::<Vec<_>>(), 5, Star::DELTA, 2..=2)
            .unwrap();
        let report = reports.first().expect("a full Δ-captured family of singletons at level 2");
        for t in ["<", ">"] {
            let t = RealizationType::parse(t).unwrap();
            let r = captured_realization_check(&c, report, &t).unwrap();
            assert!((1..5).contains(&r.index));
            assert_eq!(r.realized, t);
        }
        let empty = CaptureReport {
            witness: DeltaSystemWitness { sets: vec![vec![]; 5], root: vec![] },
            level: 2,
            star: Star::DELTA,
            full: true,
            indices: None,
        };
        assert_eq!(captured_realization_check(&c, &empty, &RealizationType(vec![])).unwrap().index, 1);
        let bad = CaptureReport { witness: DeltaSystemWitness { sets: vec![codes(&[0]), codes(&[1])], root: vec![] }, ..empty };
        assert!(captured_realization_check(&c, &bad, &RealizationType::parse("<").unwrap()).is_err());
    }
}
