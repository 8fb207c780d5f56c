use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// A tuple σ; its level is carried by the containing `GradedSet`.
pub type Sigma = Vec<u32>;

/// A finite subset of N, stored level by level.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GradedSet {
    levels: BTreeMap<usize, BTreeSet<Sigma>>,
}

impl GradedSet {
    pub fn insert(&mut self, k: usize, s: Sigma) {
        self.levels.entry(k).or_default().insert(s);
    }

    pub fn extend_level(&mut self, k: usize, items: impl IntoIterator<Item = Sigma>) {
        let entry = self.levels.entry(k).or_default();
        entry.extend(items);
        if entry.is_empty() {
            self.levels.remove(&k);
        }
    }

    pub fn level(&self, k: usize) -> BTreeSet<Sigma> {
        self.levels.get(&k).cloned().unwrap_or_default()
    }

    pub fn contains(&self, k: usize, s: &Sigma) -> bool {
        self.levels.get(&k).is_some_and(|l| l.contains(s))
    }

    pub fn is_empty(&self) -> bool {
        self.levels.values().all(BTreeSet::is_empty)
    }

    pub fn len(&self) -> usize {
        self.levels.values().map(BTreeSet::len).sum()
    }

    fn keys<'a>(&'a self, other: &'a GradedSet) -> BTreeSet<usize> {
        self.levels.keys().chain(other.levels.keys()).copied().collect()
    }

    fn combine(&self, other: &GradedSet, f: impl Fn(&BTreeSet<Sigma>, &BTreeSet<Sigma>) -> BTreeSet<Sigma>) -> GradedSet {
        let mut out = GradedSet::default();
        for k in self.keys(other) {
            out.extend_level(k, f(&self.level(k), &other.level(k)));
        }
        out
    }

    pub fn union(&self, other: &GradedSet) -> GradedSet {
        self.combine(other, |a, b| a.union(b).cloned().collect())
    }

    pub fn intersection(&self, other: &GradedSet) -> GradedSet {
        self.combine(other, |a, b| a.intersection(b).cloned().collect())
    }

    pub fn difference(&self, other: &GradedSet) -> GradedSet {
        self.combine(other, |a, b| a.difference(b).cloned().collect())
    }

    pub fn symmetric_difference(&self, other: &GradedSet) -> GradedSet {
        self.combine(other, |a, b| a.symmetric_difference(b).cloned().collect())
    }

    /// Least level in lo..=hi where the two sets differ.
    pub fn first_difference(&self, other: &GradedSet, lo: usize, hi: usize) -> Option<usize> {
        (lo..=hi).find(|k| self.level(*k) != other.level(*k))
    }

    /// Least level in lo..=hi where self ⊄ other.
    pub fn first_excess(&self, other: &GradedSet, lo: usize, hi: usize) -> Option<usize> {
        (lo..=hi).find(|k| !self.level(*k).is_subset(&other.level(*k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra() {
        let mut a = GradedSet::default();
        a.insert(1, vec![0]);
        a.insert(2, vec![1, 0]);
        let mut b = GradedSet::default();
        b.insert(2, vec![1, 0]);
        b.insert(3, vec![0, 0]);
        assert_eq!(a.intersection(&b).len(), 1);
        assert_eq!(a.union(&b).len(), 3);
        assert_eq!(a.symmetric_difference(&a), GradedSet::default());
        assert_eq!(a.first_difference(&b, 1, 3), Some(1));
        assert_eq!(a.first_difference(&b, 2, 2), None);
        assert_eq!(b.first_excess(&a, 1, 3), Some(3));
        assert!(a.difference(&a).is_empty());
    }
}
