//! Finite schemes F(X), ω-prefixes, canonical decompositions and an independent checker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;

use crate::delta::{intersect, is_subset, root_tail_tail};
use crate::error::{horizon, invalid, Result};
use crate::ordinal::{naturals, OrdinalCode};
use crate::types::TypeSpec;

/// A strictly increasing list of codes.
pub type Block = Vec<OrdinalCode>;

/// Split `block` (of level k+1) into its root and n_{k+1} pieces.
pub fn decompose_slice<T: Clone>(block: &[T], r: usize, m_prev: usize, n: usize) -> (Vec<T>, Vec<Vec<T>>) {
    let root = block[..r].to_vec();
    let width = m_prev - r;
    let pieces = (0..n)
        .map(|i| {
            let a = r + i * width;
            root.iter().chain(&block[a..a + width]).cloned().collect()
        })
        .collect();
    (root, pieces)
}

/// Levels 0..=k of F(m_k) as sets of index vectors.
pub fn template(spec: &TypeSpec, k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut levels: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); k + 1];
    levels[k].insert((0..spec.m(k)).collect());
    for j in (1..=k).rev() {
        let below: Vec<Vec<usize>> = levels[j]
            .iter()
            .flat_map(|b| decompose_slice(b, spec.r(j), spec.m(j - 1), spec.n(j)).1)
            .collect();
        levels[j - 1].extend(below);
    }
    levels.into_iter().map(|s| s.into_iter().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionView {
    pub root: Block,
    pub pieces: Vec<Block>,
}

impl DecompositionView {
    /// −1 for root points, the piece index for tail points, `None` if x is not in the block.
    pub fn position(&self, x: OrdinalCode) -> Option<i64> {
        if self.root.binary_search(&x).is_ok() {
            return Some(-1);
        }
        self.pieces.iter().position(|p| p.binary_search(&x).is_ok()).map(|i| i as i64)
    }

    pub fn tail(&self, i: usize) -> Block {
        self.pieces[i].iter().filter(|x| self.root.binary_search(x).is_err()).copied().collect()
    }
}

/// Canonical decomposition of a block of level `level` ≥ 1.
pub fn canonical_decomposition(block: &[OrdinalCode], level: usize, spec: &TypeSpec) -> Result<DecompositionView> {
    if level == 0 {
        return Err(invalid("level-0 blocks have no decomposition"));
    }
    if !spec.has_level(level) {
        return Err(horizon(format!("level {level} is not represented by the type")));
    }
    if block.len() != spec.m(level) {
        return Err(invalid(format!("block of size {} at level {level} (expected {})", block.len(), spec.m(level))));
    }
    let (root, pieces) = decompose_slice(block, spec.r(level), spec.m(level - 1), spec.n(level));
    Ok(DecompositionView { root, pieces })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Finite,
    /// Domain m_K of F(ω); levels above K are unknown.
    OmegaPrefix { bound: usize },
}

/// A leveled family of blocks over a sorted domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemePrefix {
    spec: TypeSpec,
    domain: Vec<OrdinalCode>,
    kind: DomainKind,
    levels: Vec<Vec<Block>>,
}

impl SchemePrefix {
    /// Wrap an arbitrary leveled family. Blocks are sorted and deduplicated, nothing is checked.
    pub fn from_levels(spec: TypeSpec, mut domain: Vec<OrdinalCode>, levels: Vec<Vec<Block>>) -> Self {
        domain.sort();
        domain.dedup();
        let levels = levels
            .into_iter()
            .map(|l| {
                let set: BTreeSet<Block> = l
                    .into_iter()
                    .map(|mut b| {
                        b.sort();
                        b.dedup();
                        b
                    })
                    .collect();
                set.into_iter().collect()
            })
            .collect();
        SchemePrefix { spec, domain, kind: DomainKind::Finite, levels }
    }

    pub fn spec(&self) -> &TypeSpec {
        &self.spec
    }

    pub fn domain(&self) -> &[OrdinalCode] {
        &self.domain
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn levels(&self) -> &[Vec<Block>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[Block] {
        self.levels.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of stored levels (one more than the highest level index).
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn block_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn contains_point(&self, x: OrdinalCode) -> bool {
        self.domain.binary_search(&x).is_ok()
    }

    pub fn contains_block(&self, k: usize, b: &[OrdinalCode]) -> bool {
        self.level(k).binary_search_by(|x| x.as_slice().cmp(b)).is_ok()
    }

    /// Level of `b` if it is a block of the family.
    pub fn level_of_block(&self, b: &[OrdinalCode]) -> Option<usize> {
        let k = self.spec.level_of_size(b.len())?;
        self.contains_block(k, b).then_some(k)
    }

    /// Every (level, block) pair in level order.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, &Block)> {
        self.levels.iter().enumerate().flat_map(|(k, l)| l.iter().map(move |b| (k, b)))
    }

    /// Whether a query at level `k` can be answered soundly.
    pub fn level_known(&self, k: usize) -> bool {
        match self.kind {
            DomainKind::Finite => true,
            DomainKind::OmegaPrefix { bound } => k <= bound,
        }
    }

    pub fn check_points(&self, points: &[OrdinalCode]) -> Result<()> {
        match points.iter().find(|x| !self.contains_point(**x)) {
            Some(x) => Err(horizon(format!("{x} lies outside the stored domain"))),
            None => Ok(()),
        }
    }

    /// All level-k blocks containing `points`.
    pub fn blocks_containing(&self, k: usize, points: &[OrdinalCode]) -> Result<Vec<&Block>> {
        self.check_points(points)?;
        if !self.level_known(k) {
            return Err(horizon(format!("level {k} is beyond the stored prefix")));
        }
        Ok(self.level(k).iter().filter(|b| is_subset(points, b)).collect())
    }

    /// Blocks all of whose points lie below γ.
    pub fn restrict(&self, gamma: OrdinalCode) -> SchemePrefix {
        let levels: Vec<Vec<Block>> = self
            .levels
            .iter()
            .map(|l| l.iter().filter(|b| b.last().is_none_or(|x| *x < gamma)).cloned().collect())
            .collect();
        let top = levels.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
        SchemePrefix {
            spec: self.spec.clone(),
            domain: self.domain.iter().copied().filter(|x| *x < gamma).collect(),
            kind: DomainKind::Finite,
            levels: levels.into_iter().take(top).collect(),
        }
    }

    /// Union of two families over the same type.
    pub fn union(&self, other: &SchemePrefix) -> SchemePrefix {
        let n = self.levels.len().max(other.levels.len());
        let levels = (0..n)
            .map(|k| self.level(k).iter().chain(other.level(k)).cloned().collect())
            .collect();
        let domain = self.domain.iter().chain(&other.domain).copied().collect();
        let spec = if other.spec.top() > self.spec.top() { &other.spec } else { &self.spec };
        let mut out = SchemePrefix::from_levels(spec.clone(), domain, levels);
        if let (DomainKind::OmegaPrefix { bound }, _) | (_, DomainKind::OmegaPrefix { bound }) = (self.kind, other.kind) {
            out.kind = DomainKind::OmegaPrefix { bound };
        }
        out
    }

    pub fn with_kind(mut self, kind: DomainKind) -> Self {
        self.kind = kind;
        self
    }
}

/// F(X) for |X| = m_k.
pub fn unique_finite_scheme(x: &[OrdinalCode], spec: &TypeSpec) -> Result<SchemePrefix> {
    let mut xs = x.to_vec();
    xs.sort();
    xs.dedup();
    if xs.len() != x.len() {
        return Err(invalid("repeated points"));
    }
    let k = spec.level_of_size_or_err(xs.len())?;
    let levels = template(spec, k)
        .into_iter()
        .map(|l| l.into_iter().map(|ix| ix.into_iter().map(|i| xs[i]).collect()).collect())
        .collect();
    Ok(SchemePrefix::from_levels(spec.clone(), xs, levels))
}

/// F(m_K), flagged so that levels above K raise horizon errors.
pub fn omega_scheme_prefix(spec: &TypeSpec, k: usize) -> Result<SchemePrefix> {
    if !spec.has_level(k) {
        return Err(horizon(format!("type does not represent level {k}")));
    }
    let s = unique_finite_scheme(&naturals(spec.m(k)), spec)?;
    Ok(s.with_kind(DomainKind::OmegaPrefix { bound: k }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeViolation {
    LevelNotInType { level: usize },
    Size { level: usize, block: Block },
    OutsideDomain { level: usize, block: Block },
    /// Property (i): two same-level blocks do not meet in an initial segment of both.
    NotInitialSegment { level: usize, a: Block, b: Block },
    /// Property (ii): the block is not a root-tail-tail union of the right lower blocks.
    Decomposition { level: usize, block: Block, detail: String },
    NotCofinal { points: Block },
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |b: &Block| format!("{{{}}}", b.iter().join(","));
        match self {
            SchemeViolation::LevelNotInType { level } => write!(f, "level {level} is not in the type"),
            SchemeViolation::Size { level, block } => write!(f, "size: {} at level {level}", show(block)),
            SchemeViolation::OutsideDomain { level, block } => {
                write!(f, "domain: {} at level {level}", show(block))
            }
            SchemeViolation::NotInitialSegment { level, a, b } => {
                write!(f, "property (i) at level {level}: {} and {}", show(a), show(b))
            }
            SchemeViolation::Decomposition { level, block, detail } => {
                write!(f, "property (ii) at level {level}: {} ({detail})", show(block))
            }
            SchemeViolation::NotCofinal { points } => write!(f, "cofinality: {} lies in no block", show(points)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchemeReport {
    pub violations: Vec<SchemeViolation>,
}

impl SchemeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn is_initial_segment(seg: &[OrdinalCode], of: &[OrdinalCode]) -> bool {
    seg.len() <= of.len() && of[..seg.len()] == *seg
}

/// Domains up to this size get the full subset-cofinality check.
const FULL_COFINALITY_LIMIT: usize = 12;

/// Check a leveled family against the scheme axioms without using the constructor.
pub fn is_scheme(levels: &[Vec<Block>], spec: &TypeSpec, domain: &[OrdinalCode]) -> SchemeReport {
    let mut violations = Vec::new();
    let in_domain = |x: &OrdinalCode| domain.binary_search(x).is_ok();

    for (k, level) in levels.iter().enumerate() {
        if !level.is_empty() && !spec.has_level(k) {
            violations.push(SchemeViolation::LevelNotInType { level: k });
            continue;
        }
        for b in level {
            if b.len() != spec.m(k) || !b.windows(2).all(|w| w[0] < w[1]) {
                violations.push(SchemeViolation::Size { level: k, block: b.clone() });
            }
            if !b.iter().all(in_domain) {
                violations.push(SchemeViolation::OutsideDomain { level: k, block: b.clone() });
            }
        }
        for (a, b) in level.iter().tuple_combinations() {
            let common = intersect(a, b);
            if !is_initial_segment(&common, a) || !is_initial_segment(&common, b) {
                violations.push(SchemeViolation::NotInitialSegment { level: k, a: a.clone(), b: b.clone() });
            }
        }
    }

    for (k, level) in levels.iter().enumerate().skip(1) {
        if !spec.has_level(k) {
            continue;
        }
        let (n, r) = (spec.n(k), spec.r(k));
        for f in level.iter().filter(|b| b.len() == spec.m(k)) {
            let below: Vec<&Block> = levels[k - 1].iter().filter(|g| is_subset(g, f)).collect();
            let found = below.iter().copied().combinations(n).any(|combo| {
                let mut sets: Vec<Block> = combo.into_iter().cloned().collect();
                sets.sort();
                let union: BTreeSet<_> = sets.iter().flatten().collect();
                matches!(root_tail_tail(&sets), Ok(root) if root.len() == r)
                    && union.len() == f.len()
                    && sets.iter().all(|s| s.len() == spec.m(k - 1))
            });
            if !found {
                let detail = format!("{} lower blocks inside, none forms the required system", below.len());
                violations.push(SchemeViolation::Decomposition { level: k, block: f.clone(), detail });
            }
        }
    }

    let all: Vec<&Block> = levels.iter().flatten().collect();
    let covered = |pts: &[OrdinalCode]| all.iter().any(|b| is_subset(pts, b));
    for x in domain {
        if !covered(&[*x]) {
            violations.push(SchemeViolation::NotCofinal { points: vec![*x] });
        }
    }
    for (x, y) in domain.iter().tuple_combinations() {
        if !covered(&[*x, *y]) {
            violations.push(SchemeViolation::NotCofinal { points: vec![*x, *y] });
        }
    }
    if domain.len() <= FULL_COFINALITY_LIMIT && domain.len() > 2 && !covered(domain) {
        violations.push(SchemeViolation::NotCofinal { points: domain.to_vec() });
    }
    SchemeReport { violations }
}

impl SchemePrefix {
    pub fn check(&self) -> SchemeReport {
        is_scheme(&self.levels, &self.spec, &self.domain)
    }

    /// Block counts per level.
    pub fn summary(&self) -> BTreeMap<usize, usize> {
        self.levels.iter().enumerate().map(|(k, l)| (k, l.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::codes;
    use crate::types::fixtures::t4;

    fn level(s: &SchemePrefix, k: usize) -> Vec<Vec<u32>> {
        s.level(k).iter().map(|b| b.iter().map(|x| x.offset).collect()).collect()
    }

    #[test]
    fn fixture_levels() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        assert_eq!(level(&s, 0).len(), 10);
        assert_eq!(level(&s, 1), (1..10).map(|i| vec![0, i]).collect::<Vec<_>>());
        assert_eq!(level(&s, 2), vec![vec![0, 1, 2, 3], vec![0, 1, 4, 5], vec![0, 1, 6, 7], vec![0, 1, 8, 9]]);
        assert_eq!(level(&s, 3), vec![vec![0, 1, 2, 3, 4, 5], vec![0, 1, 6, 7, 8, 9]]);
        assert_eq!(level(&s, 4), vec![(0..10).collect::<Vec<_>>()]);
        assert_eq!(s.block_count(), 26);
    }

    #[test]
    fn size_mismatch() {
        assert_eq!(unique_finite_scheme(&naturals(3), &t4()), Err(crate::error::Error::SizeMismatch(3)));
    }

    #[test]
    fn decompositions() {
        let d = canonical_decomposition(&codes(&[0, 1, 2, 3]), 2, &t4()).unwrap();
        assert_eq!(d.root, codes(&[0]));
        assert_eq!(d.pieces, vec![codes(&[0, 1]), codes(&[0, 2]), codes(&[0, 3])]);
        let d = canonical_decomposition(&naturals(10), 4, &t4()).unwrap();
        assert_eq!(d.root, codes(&[0, 1]));
        assert_eq!(d.pieces, vec![codes(&[0, 1, 2, 3, 4, 5]), codes(&[0, 1, 6, 7, 8, 9])]);
        let d = canonical_decomposition(&codes(&[0, 1]), 1, &t4()).unwrap();
        assert!(d.root.is_empty());
        assert_eq!(d.pieces, vec![codes(&[0]), codes(&[1])]);
        assert!(canonical_decomposition(&codes(&[3]), 0, &t4()).is_err());
    }

    #[test]
    fn omega_prefixes() {
        let s = omega_scheme_prefix(&t4(), 1).unwrap();
        assert_eq!(s.blocks().count(), 3);
        let s = omega_scheme_prefix(&t4(), 0).unwrap();
        assert_eq!(level(&s, 0), vec![vec![0]]);
        let s = omega_scheme_prefix(&t4(), 4).unwrap();
        assert!(s.blocks_containing(5, &[]).is_err());
        assert!(s.blocks_containing(1, &codes(&[10])).is_err());
    }

    #[test]
    fn restriction() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        let r = s.restrict(OrdinalCode::fin(4));
        assert_eq!(r.block_count(), 4 + 3 + 1);
        assert_eq!(level(&r, 2), vec![vec![0, 1, 2, 3]]);
        assert_eq!(s.restrict(OrdinalCode::fin(10)).levels(), s.levels());
        assert_eq!(s.restrict(OrdinalCode::fin(1)).block_count(), 1);
    }

    #[test]
    fn containing_queries() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        assert_eq!(s.blocks_containing(1, &codes(&[2])).unwrap(), vec![&codes(&[0, 2])]);
        assert_eq!(s.blocks_containing(2, &codes(&[1, 2])).unwrap(), vec![&codes(&[0, 1, 2, 3])]);
        assert_eq!(s.blocks_containing(4, &[]).unwrap(), vec![&naturals(10)]);
    }

    #[test]
    fn checker_rejections() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        assert!(s.check().passed());
        let mut levels = s.levels().to_vec();
        levels[1].push(codes(&[0, 2, 3]));
        let rep = is_scheme(&levels, &t4(), s.domain());
        assert!(rep.violations.iter().any(|v| matches!(v, SchemeViolation::Size { level: 1, .. })));

        let levels = vec![
            naturals(4).into_iter().map(|x| vec![x]).collect(),
            vec![codes(&[0, 1]), codes(&[1, 2])],
        ];
        let rep = is_scheme(&levels, &t4(), &naturals(4));
        assert!(rep.violations.iter().any(|v| matches!(v, SchemeViolation::NotInitialSegment { level: 1, .. })));
    }
}
