use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};

/// A finite strict partial order on named elements, closed under transitivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    names: Vec<String>,
    lt: Vec<Vec<bool>>,
}

#[derive(Deserialize, Serialize)]
struct PosetFile {
    elements: Vec<Value>,
    #[serde(default)]
    lt: Vec<(Value, Value)>,
}

fn name_of(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl FinitePoset {
    /// Builds the transitive closure of `pairs` (a < b); cycles are rejected.
    pub fn new(names: Vec<String>, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = names.len();
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|x| !seen.insert(*x)) {
            return Err(invalid(format!("duplicate poset element {dup}")));
        }
        let mut lt = vec![vec![false; n]; n];
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(invalid("poset edge out of range"));
            }
            lt[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if lt[i][k] {
                    for j in 0..n {
                        if lt[k][j] {
                            lt[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| lt[i][i]) {
            return Err(invalid("the order has a cycle"));
        }
        Ok(FinitePoset { names, lt })
    }

    /// {"elements":[…],"lt":[[a,b],…]}
    pub fn from_json(s: &str) -> Result<Self> {
        let f: PosetFile = serde_json::from_str(s).map_err(|e| invalid(format!("poset: {e}")))?;
        let names: Vec<String> = f.elements.iter().map(name_of).collect();
        let index = |v: &Value| {
            let n = name_of(v);
            names.iter().position(|x| *x == n).ok_or_else(|| invalid(format!("unknown poset element {n}")))
        };
        let pairs: Vec<(usize, usize)> = f.lt.iter().map(|(a, b)| Ok((index(a)?, index(b)?))).collect::<Result<_>>()?;
        FinitePoset::new(names, &pairs)
    }

    pub fn chain(n: usize) -> Self {
        let pairs: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FinitePoset::new((0..n).map(|i| i.to_string()).collect(), &pairs).expect("chains are acyclic")
    }

    pub fn antichain(n: usize) -> Self {
        FinitePoset::new((0..n).map(|i| i.to_string()).collect(), &[]).expect("no edges")
    }

    /// a < b, c < d
    pub fn diamond() -> Self {
        let names = ["a", "b", "c", "d"].map(String::from).to_vec();
        FinitePoset::new(names, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("acyclic")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.lt[a][b]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        a == b || self.lt[a][b]
    }

    pub fn below(&self, x: usize) -> Vec<usize> {
        (0..self.len()).filter(|z| self.lt[*z][x]).collect()
    }

    /// Maximal elements of (−∞, x).
    pub fn pred(&self, x: usize) -> Vec<usize> {
        let below = self.below(x);
        below.iter().copied().filter(|z| !below.iter().any(|w| self.lt[*z][*w])).collect()
    }

    /// pred(x) is finite and cofinal in (−∞, x); always true for finite orders, checked anyway.
    pub fn is_successor_like(&self, x: usize) -> bool {
        let pred = self.pred(x);
        self.below(x).iter().all(|w| pred.iter().any(|z| self.leq(*w, *z)))
    }

    /// Greatest lower bound, when it exists.
    pub fn inf(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len()).filter(|z| self.leq(*z, a) && self.leq(*z, b)).collect();
        lower.iter().copied().find(|z| lower.iter().all(|w| self.leq(*w, *z)))
    }

    pub fn compatible(&self, a: usize, b: usize) -> bool {
        (0..self.len()).any(|z| self.leq(z, a) && self.leq(z, b))
    }

    /// X × 2 with (x, i) < (y, j) iff x < y and i = j; (x, i) sits at index 2x + i.
    pub fn doubled(&self) -> FinitePoset {
        let names = self.names.iter().flat_map(|x| [format!("({x},0)"), format!("({x},1)")]).collect();
        let mut pairs = Vec::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                if self.lt[a][b] {
                    pairs.push((2 * a, 2 * b));
                    pairs.push((2 * a + 1, 2 * b + 1));
                }
            }
        }
        FinitePoset::new(names, &pairs).expect("doubling keeps acyclicity")
    }
}

/// Keep y_β when y_β ≰ y_α for every α < β (elements in index order).
pub fn well_founded_cofinal(poset: &FinitePoset) -> Vec<usize> {
    (0..poset.len()).filter(|b| (0..*b).all(|a| !poset.leq(*b, a))).collect()
}

/// φ(x) for each element: the lexicographically least linear extension, by element index.
pub fn monotone_bijection(poset: &FinitePoset) -> Vec<usize> {
    let n = poset.len();
    let mut indeg: Vec<usize> = (0..n).map(|x| poset.below(x).len()).collect();
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|x| indeg[*x] == 0).map(Reverse).collect();
    let mut phi = vec![0; n];
    let mut next = 0;
    while let Some(Reverse(x)) = heap.pop() {
        phi[x] = next;
        next += 1;
        for y in 0..n {
            if poset.less(x, y) {
                indeg[y] -= 1;
                if indeg[y] == 0 {
                    heap.push(Reverse(y));
                }
            }
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_and_queries() {
        let p = FinitePoset::from_json(r#"{"elements":["a","b","c"],"lt":[["a","b"],["b","c"]]}"#).unwrap();
        assert!(p.less(0, 2));
        assert_eq!(p.pred(2), vec![1]);
        assert_eq!(p.inf(1, 2), Some(1));
        assert!(FinitePoset::from_json(r#"{"elements":[1,2],"lt":[[1,2],[2,1]]}"#).is_err());
        let d = FinitePoset::diamond();
        assert_eq!(d.inf(1, 2), Some(0));
        assert_eq!(d.pred(3), vec![1, 2]);
        assert!((0..4).all(|x| d.is_successor_like(x)));
        let a = FinitePoset::antichain(2);
        assert_eq!(a.inf(0, 1), None);
        assert!(!a.compatible(0, 1));
    }

    #[test]
    fn cofinal_examples() {
        assert_eq!(well_founded_cofinal(&FinitePoset::antichain(3)), vec![0, 1, 2]);
        assert_eq!(well_founded_cofinal(&FinitePoset::chain(3)), vec![0, 1, 2]);
        let dec = FinitePoset::new(vec!["y0".into(), "y1".into()], &[(1, 0)]).unwrap();
        assert_eq!(well_founded_cofinal(&dec), vec![0]);
        assert!(well_founded_cofinal(&FinitePoset::antichain(0)).is_empty());
    }

    #[test]
    fn bijection_examples() {
        assert_eq!(monotone_bijection(&FinitePoset::chain(3)), vec![0, 1, 2]);
        assert_eq!(monotone_bijection(&FinitePoset::antichain(2)), vec![0, 1]);
        assert_eq!(monotone_bijection(&FinitePoset::diamond()), vec![0, 1, 2, 3]);
        let rev = FinitePoset::new(vec!["p".into(), "q".into()], &[(1, 0)]).unwrap();
        assert_eq!(monotone_bijection(&rev), vec![1, 0]);
        let d = FinitePoset::chain(2).doubled();
        assert_eq!(monotone_bijection(&d), vec![0, 1, 2, 3]);
        assert!(d.less(0, 2) && !d.less(0, 3));
    }
}
