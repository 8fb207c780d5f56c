//! Root-tail-tail Δ-systems over any ordered element type.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaFailure {
    TooFew,
    UnequalSizes { i: usize, j: usize },
    /// D_i ∩ D_j differs from the root computed from the first two sets.
    Intersection { i: usize, j: usize },
    /// Some root element is not below the tail of D_i.
    RootNotBelowTail { i: usize },
    /// The tail of D_i is not entirely below the tail of D_{i+1}.
    TailsNotOrdered { i: usize },
}

impl fmt::Display for DeltaFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaFailure::TooFew => write!(f, "fewer than two sets"),
            DeltaFailure::UnequalSizes { i, j } => write!(f, "sets {i} and {j} differ in size"),
            DeltaFailure::Intersection { i, j } => write!(f, "sets {i} and {j} do not meet in the root"),
            DeltaFailure::RootNotBelowTail { i } => write!(f, "root is not below the tail of set {i}"),
            DeltaFailure::TailsNotOrdered { i } => write!(f, "tails {i} and {} are not ordered", i + 1),
        }
    }
}

pub fn intersect<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().filter(|x| b.binary_search(x).is_ok()).cloned().collect()
}

pub fn is_subset<T: Ord>(a: &[T], b: &[T]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

/// Check that the sorted sets `sets`, in the given order, form a root-tail-tail Δ-system.
/// Returns the root.
pub fn root_tail_tail<T: Ord + Clone>(sets: &[Vec<T>]) -> Result<Vec<T>, DeltaFailure> {
    if sets.len() < 2 {
        return Err(DeltaFailure::TooFew);
    }
    let size = sets[0].len();
    if let Some(j) = sets.iter().position(|s| s.len() != size) {
        return Err(DeltaFailure::UnequalSizes { i: 0, j });
    }
    let root = intersect(&sets[0], &sets[1]);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if intersect(&sets[i], &sets[j]) != root {
                return Err(DeltaFailure::Intersection { i, j });
            }
        }
    }
    let tails: Vec<Vec<T>> = sets
        .iter()
        .map(|s| s.iter().filter(|x| root.binary_search(x).is_err()).cloned().collect())
        .collect();
    for (i, t) in tails.iter().enumerate() {
        if let (Some(r), Some(t0)) = (root.last(), t.first()) {
            if r >= t0 {
                return Err(DeltaFailure::RootNotBelowTail { i });
            }
        }
    }
    for i in 0..tails.len() - 1 {
        if let (Some(a), Some(b)) = (tails[i].last(), tails[i + 1].first()) {
            if a >= b {
                return Err(DeltaFailure::TailsNotOrdered { i });
            }
        }
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_systems() {
        assert_eq!(root_tail_tail(&[vec![0, 2, 3], vec![0, 6, 7]]), Ok(vec![0]));
        assert_eq!(root_tail_tail(&[vec![5], vec![7]]), Ok(vec![]));
        assert!(root_tail_tail(&[vec![0, 1], vec![1, 2]]).is_err());
        assert_eq!(root_tail_tail(&[vec![0, 6, 7], vec![0, 2, 3]]), Err(DeltaFailure::TailsNotOrdered { i: 0 }));
        assert_eq!(root_tail_tail::<u8>(&[vec![1]]), Err(DeltaFailure::TooFew));
    }
}
