use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::capturing::{is_captured, CaptureReport, Star};
use crate::error::{invalid, Error, Result};
use crate::metrics::{DeltaValue, MetricContext};
use crate::ordinal::OrdinalCode;
use crate::types::TypeSpec;

pub type Q = Ratio<i64>;

fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|e| invalid(format!("bad rational {s:?}: {e}")))
}

/// A metric on {0, …, n−1} with rational distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetric {
    matrix: Vec<Vec<Q>>,
}

impl Serialize for FiniteMetric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self.matrix.iter().map(|r| r.iter().map(Q::to_string).collect()).collect();
        rows.serialize(s)
    }
}

impl FiniteMetric {
    pub fn new(matrix: Vec<Vec<Q>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(invalid("distance matrix must be square"));
        }
        for i in 0..n {
            if !matrix[i][i].is_zero() {
                return Err(invalid(format!("d({i},{i}) ≠ 0")));
            }
            for j in 0..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(invalid(format!("d({i},{j}) ≠ d({j},{i})")));
                }
                if i != j && matrix[i][j] <= Q::zero() {
                    return Err(invalid(format!("d({i},{j}) must be positive")));
                }
            }
        }
        if let Some((i, j, k)) = (0..n).tuple_combinations().find(|(i, j, k)| !triangle(&matrix, *i, *j, *k)) {
            return Err(invalid(format!("triangle inequality fails on {i},{j},{k}")));
        }
        Ok(FiniteMetric { matrix })
    }

    /// d ≡ 1 off the diagonal.
    pub fn discrete(n: usize) -> Self {
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { Q::zero() } else { Q::one() }).collect()).collect();
        FiniteMetric { matrix }
    }

    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self> {
        FiniteMetric::new(rows.iter().map(|r| r.iter().map(|s| parse_q(s)).collect::<Result<_>>()).collect::<Result<_>>()?)
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn d(&self, i: usize, j: usize) -> Q {
        self.matrix[i][j]
    }

    fn off_diagonal(&self) -> impl Iterator<Item = Q> + '_ {
        (0..self.size()).tuple_combinations().map(|(i, j)| self.matrix[i][j])
    }

    /// Least nonzero distance; 1 for spaces with fewer than two points.
    pub fn mindist(&self) -> Q {
        self.off_diagonal().min().unwrap_or_else(Q::one)
    }

    pub fn diam(&self) -> Q {
        self.off_diagonal().max().unwrap_or_else(Q::zero)
    }
}

fn triangle(m: &[Vec<Q>], i: usize, j: usize, k: usize) -> bool {
    m[i][k] <= m[i][j] + m[j][k] && m[i][j] <= m[i][k] + m[k][j] && m[j][k] <= m[j][i] + m[i][k]
}

impl fmt::Display for FiniteMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.matrix {
            writeln!(f, "{}", row.iter().join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotoneVerdict {
    pub monotone: bool,
    /// Least witnessing order in lexicographic order of permutations.
    pub order: Option<Vec<usize>>,
    pub orders_checked: usize,
}

fn monotone_under(space: &FiniteMetric, order: &[usize], c: Q) -> bool {
    order.iter().tuple_combinations().all(|(x, y, z)| space.d(*x, *y) <= c * space.d(*x, *z))
}

/// Exhaustive over linear orders: d(x,y) ≤ c·d(x,z) whenever x ≺ y ≺ z.
pub fn is_c_monotone(space: &FiniteMetric, c: Q) -> MonotoneVerdict {
    let mut checked = 0;
    for order in (0..space.size()).permutations(space.size()) {
        checked += 1;
        if monotone_under(space, &order, c) {
            return MonotoneVerdict { monotone: true, order: Some(order), orders_checked: checked };
        }
    }
    MonotoneVerdict { monotone: false, order: None, orders_checked: checked }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { space: FiniteMetric, spaces_tried: usize },
    NotFound { max_size: usize, spaces_tried: usize },
}

/// First space (by size, then grid-lexicographic upper triangle) that is not c-monotone.
pub fn finite_metric_search(c: Q, max_size: usize, grid: &[Q]) -> Result<SearchOutcome> {
    if grid.is_empty() || grid.iter().any(|g| *g <= Q::zero()) {
        return Err(invalid("the distance grid must be nonempty and positive"));
    }
    let mut tried = 0;
    for n in 3..=max_size {
        let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
        for values in pairs.iter().map(|_| grid.iter().copied()).multi_cartesian_product() {
            let mut m = vec![vec![Q::zero(); n]; n];
            for ((i, j), v) in pairs.iter().zip(values) {
                m[*i][*j] = v;
                m[*j][*i] = v;
            }
            if (0..n).tuple_combinations().any(|(i, j, k)| !triangle(&m, i, j, k)) {
                continue;
            }
            tried += 1;
            let space = FiniteMetric { matrix: m };
            if !is_c_monotone(&space, c).monotone {
                // Re-verified from scratch through the validating constructor.
                let again = FiniteMetric::new(space.matrix.clone())?;
                if is_c_monotone(&again, c).monotone {
                    return Err(Error::Inconsistent("search result failed re-verification".into()));
                }
                return Ok(SearchOutcome::Found { space, spaces_tried: tried });
            }
        }
    }
    Ok(SearchOutcome::NotFound { max_size, spaces_tried: tried })
}

#[derive(Deserialize)]
struct LevelMetricFile {
    k: usize,
    matrix: Vec<Vec<String>>,
}

/// d_k on n_k for each level k ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelMetrics {
    levels: BTreeMap<usize, FiniteMetric>,
}

impl LevelMetrics {
    /// The discrete metric on every represented level ≥ 1.
    pub fn discrete(spec: &TypeSpec) -> Self {
        LevelMetrics { levels: (1..=spec.top()).map(|k| (k, FiniteMetric::discrete(spec.n(k)))).collect() }
    }

    /// Sets d_k after checking |d_k| = n_k and diam = 1.
    pub fn set(&mut self, spec: &TypeSpec, k: usize, d: FiniteMetric) -> Result<()> {
        if k == 0 || !spec.has_level(k) {
            return Err(invalid(format!("level {k} is not a positive level of the type")));
        }
        if d.size() != spec.n(k) {
            return Err(invalid(format!("d_{k} has {} points, n_{k} = {}", d.size(), spec.n(k))));
        }
        if d.size() > 1 && d.diam() != Q::one() {
            return Err(invalid(format!("d_{k} has diameter {}, not 1", d.diam())));
        }
        self.levels.insert(k, d);
        Ok(())
    }

    pub fn get(&self, k: usize) -> Result<&FiniteMetric> {
        self.levels.get(&k).ok_or_else(|| invalid(format!("missing level metric d_{k}")))
    }

    /// s_k = ∏_{1≤i<k} mindist(d_i)
    pub fn scale(&self, k: usize) -> Result<Q> {
        (1..k).try_fold(Q::one(), |acc, i| Ok(acc * self.get(i)?.mindist()))
    }
}

/// Overrides for the discrete metrics: one {"k":…,"matrix":[["0","1/2",…],…]} object or an array of them.
pub fn parse_level_metrics(spec: &TypeSpec, json: &str) -> Result<LevelMetrics> {
    let value: serde_json::Value = serde_json::from_str(json).map_err(|e| invalid(format!("level metrics: {e}")))?;
    let files: Vec<LevelMetricFile> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value),
        other => serde_json::from_value(other).map(|f| vec![f]),
    }
    .map_err(|e| invalid(format!("level metrics: {e}")))?;
    let mut out = LevelMetrics::discrete(spec);
    for f in files {
        out.set(spec, f.k, FiniteMetric::from_strings(&f.matrix)?)?;
    }
    Ok(out)
}

/// d(α, β) = s_Δ · d_Δ(Ξ_α(Δ), Ξ_β(Δ)) with Δ = Δ(α, β).
pub fn scheme_metric(ctx: &MetricContext, metrics: &LevelMetrics, alpha: OrdinalCode, beta: OrdinalCode) -> Result<Q> {
    let k = match ctx.delta(alpha, beta)? {
        DeltaValue::Infinite => return Ok(Q::zero()),
        DeltaValue::Level(k) => k,
    };
    let (a, b) = (ctx.xi(alpha, k)?, ctx.xi(beta, k)?);
    if a < 0 || b < 0 {
        return Err(Error::Inconsistent(format!("Ξ({alpha}) or Ξ({beta}) is −1 at Δ = {k}")));
    }
    let d = metrics.get(k)?;
    Ok(metrics.scale(k)? * d.d(a as usize, b as usize))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsometryVerdict {
    pub level: usize,
    pub scale: String,
    pub pairs_checked: usize,
    /// (i, j, position, found distance)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<(usize, usize, usize, String)>,
}

impl IsometryVerdict {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// d(D_i(a), D_j(a)) = s_l · d_l(i, j) on the tail positions of a captured report.
pub fn isometry_check(ctx: &MetricContext, metrics: &LevelMetrics, report: &CaptureReport) -> Result<IsometryVerdict> {
    let l = report.level;
    let d_l = metrics.get(l)?;
    let scale = metrics.scale(l)?;
    let w = &report.witness;
    if w.n() > d_l.size() {
        return Err(invalid(format!("{} sets exceed n_{l} = {}", w.n(), d_l.size())));
    }
    if let Err(why) = is_captured(ctx, w, l, Star::NONE)? {
        return Err(invalid(format!("report is not captured at level {l}: {why}")));
    }
    let size = w.sets.first().map_or(0, Vec::len);
    let mut checked = 0;
    for (i, j) in (0..w.n()).tuple_combinations() {
        for a in w.r()..size {
            checked += 1;
            let found = scheme_metric(ctx, metrics, w.sets[i][a], w.sets[j][a])?;
            if found != scale * d_l.d(i, j) {
                return Ok(IsometryVerdict {
                    level: l,
                    scale: scale.to_string(),
                    pairs_checked: checked,
                    mismatch: Some((i, j, a, found.to_string())),
                });
            }
        }
    }
    Ok(IsometryVerdict { level: l, scale: scale.to_string(), pairs_checked: checked, mismatch: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capturing::{delta_system_root, DeltaSystemWitness};
    use crate::ordinal::{codes, naturals};
    use crate::scheme::unique_finite_scheme;
    use crate::types::fixtures::t4;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    fn ctx() -> MetricContext {
        MetricContext::new(unique_finite_scheme(&naturals(10), &t4()).unwrap())
    }

    fn half_d2() -> LevelMetrics {
        parse_level_metrics(&t4(), r#"{"k":2,"matrix":[["0","1/2","1"],["1/2","0","1/2"],["1","1/2","0"]]}"#).unwrap()
    }

    #[test]
    fn metric_validation() {
        assert!(FiniteMetric::from_strings(&[vec!["0".into(), "1".into()], vec!["1".into(), "0".into()]]).is_ok());
        let bad = vec![vec![q(0, 1), q(1, 1), q(1, 4)], vec![q(1, 1), q(0, 1), q(1, 2)], vec![q(1, 4), q(1, 2), q(0, 1)]];
        assert!(FiniteMetric::new(bad).is_err());
        assert!(parse_level_metrics(&t4(), r#"{"k":2,"matrix":[["0","1/2"],["1/2","0"]]}"#).is_err());
        assert!(parse_level_metrics(&t4(), r#"{"k":2,"matrix":[["0","1/2","1/2"],["1/2","0","1/2"],["1/2","1/2","0"]]}"#).is_err());
    }

    #[test]
    fn monotone_examples() {
        assert!(is_c_monotone(&FiniteMetric::discrete(2), Q::one()).monotone);
        let v = is_c_monotone(&FiniteMetric::discrete(3), Q::one());
        assert_eq!((v.monotone, v.order, v.orders_checked), (true, Some(vec![0, 1, 2]), 1));
        assert!(!is_c_monotone(&FiniteMetric::discrete(3), q(1, 2)).monotone);
    }

    #[test]
    fn search_small_bounds() {
        let grid = [Q::one(), q(3, 4), q(1, 2), q(1, 4)];
        assert!(matches!(finite_metric_search(Q::one(), 2, &grid).unwrap(), SearchOutcome::NotFound { .. }));
        assert!(matches!(finite_metric_search(Q::one(), 5, &[Q::one()]).unwrap(), SearchOutcome::NotFound { .. }));
    }

    #[test]
    fn scheme_metric_examples() {
        let c = ctx();
        let m = half_d2();
        assert_eq!(scheme_metric(&c, &m, OrdinalCode::fin(2), OrdinalCode::fin(4)).unwrap(), q(1, 2));
        assert_eq!(scheme_metric(&c, &m, OrdinalCode::fin(5), OrdinalCode::fin(5)).unwrap(), Q::zero());
        assert_eq!(m.scale(4).unwrap(), q(1, 2));
        assert_eq!(scheme_metric(&c, &m, OrdinalCode::fin(2), OrdinalCode::fin(6)).unwrap(), q(1, 2));
        assert!(scheme_metric(&c, &LevelMetrics::default(), OrdinalCode::fin(2), OrdinalCode::fin(6)).is_err());
    }

    #[test]
    fn isometry_examples() {
        let c = ctx();
        let m = half_d2();
        let w = delta_system_root(&[codes(&[2]), codes(&[6])]).unwrap();
        let report = is_captured(&c, &w, 4, Star::NONE).unwrap().unwrap();
        let v = isometry_check(&c, &m, &report).unwrap();
        assert!(v.passed());
        assert_eq!(v.pairs_checked, 1);
        let single = CaptureReport { witness: DeltaSystemWitness::single(codes(&[2])), ..report.clone() };
        assert_eq!(isometry_check(&c, &m, &single).unwrap().pairs_checked, 0);
        let shifted = CaptureReport { level: 3, ..report };
        assert!(isometry_check(&c, &m, &shifted).is_err());
    }
}
