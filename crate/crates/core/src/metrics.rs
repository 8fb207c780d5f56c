//! ρ, ρ^A, k-closures, ‖·‖_k, Δ and Ξ over a stored scheme.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{horizon, invalid, Error, Result};
use crate::ordinal::OrdinalCode;
use crate::scheme::{canonical_decomposition, Block, SchemePrefix};

/// Value of Δ: a level, or the sentinel for equal arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeltaValue {
    Level(usize),
    Infinite,
}

impl DeltaValue {
    pub fn level(self) -> Option<usize> {
        match self {
            DeltaValue::Level(k) => Some(k),
            DeltaValue::Infinite => None,
        }
    }
}

impl fmt::Display for DeltaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaValue::Level(k) => write!(f, "{k}"),
            DeltaValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for DeltaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DeltaValue::Level(k) => s.serialize_u64(*k as u64),
            DeltaValue::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Query context over one scheme; keeps a per-level point → block index.
#[derive(Debug, Clone)]
pub struct MetricContext {
    scheme: SchemePrefix,
    index: Vec<HashMap<OrdinalCode, Vec<usize>>>,
}

impl MetricContext {
    pub fn new(scheme: SchemePrefix) -> Self {
        let index = scheme
            .levels()
            .iter()
            .map(|level| {
                let mut map: HashMap<OrdinalCode, Vec<usize>> = HashMap::new();
                for (i, b) in level.iter().enumerate() {
                    for x in b {
                        map.entry(*x).or_default().push(i);
                    }
                }
                map
            })
            .collect();
        MetricContext { scheme, index }
    }

    pub fn scheme(&self) -> &SchemePrefix {
        &self.scheme
    }

    fn check_point(&self, x: OrdinalCode) -> Result<()> {
        if self.scheme.contains_point(x) {
            Ok(())
        } else {
            Err(horizon(format!("{x} lies outside the stored domain")))
        }
    }

    /// Level-k blocks containing x.
    pub fn blocks_with(&self, x: OrdinalCode, k: usize) -> impl Iterator<Item = &Block> {
        let level = self.scheme.level(k);
        self.index
            .get(k)
            .and_then(|m| m.get(&x))
            .into_iter()
            .flatten()
            .map(move |&i| &level[i])
    }

    fn blocks_with_or_err(&self, x: OrdinalCode, k: usize) -> Result<Vec<&Block>> {
        self.check_point(x)?;
        if !self.scheme.level_known(k) {
            return Err(horizon(format!("level {k} is beyond the stored prefix")));
        }
        let v: Vec<&Block> = self.blocks_with(x, k).collect();
        if v.is_empty() {
            return Err(horizon(format!("no stored level-{k} block contains {x}")));
        }
        Ok(v)
    }

    pub fn rho(&self, a: OrdinalCode, b: OrdinalCode) -> Result<usize> {
        self.check_point(a)?;
        self.check_point(b)?;
        (0..self.scheme.num_levels())
            .take_while(|&k| self.scheme.level_known(k))
            .find(|&k| self.blocks_with(a, k).any(|f| f.binary_search(&b).is_ok()))
            .ok_or_else(|| horizon(format!("no stored block contains both {a} and {b}")))
    }

    /// ρ^A, the largest pairwise ρ.
    pub fn rho_max(&self, set: &[OrdinalCode]) -> Result<usize> {
        if set.is_empty() {
            return Err(invalid("ρ^A needs a nonempty set"));
        }
        for x in set {
            self.check_point(*x)?;
        }
        set.iter()
            .tuple_combinations()
            .map(|(a, b)| self.rho(*a, *b))
            .fold_ok(0, usize::max)
    }

    /// (α)_k, checked to be the same for every level-k block containing α.
    pub fn closure(&self, a: OrdinalCode, k: usize) -> Result<Vec<OrdinalCode>> {
        let blocks = self.blocks_with_or_err(a, k)?;
        let cut = |f: &Block| f.iter().copied().filter(|x| *x <= a).collect::<Vec<_>>();
        let first = cut(blocks[0]);
        if let Some(other) = blocks[1..].iter().find(|f| cut(f) != first) {
            return Err(Error::Inconsistent(format!(
                "closure of {a} at level {k} differs between blocks {:?} and {:?}",
                blocks[0], other
            )));
        }
        Ok(first)
    }

    /// (α)_k^- = (α)_k ∖ {α}.
    pub fn closure_strict(&self, a: OrdinalCode, k: usize) -> Result<Vec<OrdinalCode>> {
        let mut c = self.closure(a, k)?;
        c.pop();
        Ok(c)
    }

    /// ‖α‖_k
    pub fn k_card(&self, a: OrdinalCode, k: usize) -> Result<usize> {
        Ok(self.closure(a, k)?.len() - 1)
    }

    pub fn delta(&self, a: OrdinalCode, b: OrdinalCode) -> Result<DeltaValue> {
        if a == b {
            self.check_point(a)?;
            return Ok(DeltaValue::Infinite);
        }
        let rho = self.rho(a, b)?;
        for k in 0..=rho {
            if self.k_card(a, k)? != self.k_card(b, k)? {
                return Ok(DeltaValue::Level(k));
            }
        }
        Err(Error::Inconsistent(format!("‖{a}‖ and ‖{b}‖ agree up to ρ = {rho}")))
    }

    /// Ξ_α(k): −1 for root points, the piece index otherwise, 0 at k = 0 or above the domain.
    pub fn xi(&self, a: OrdinalCode, k: usize) -> Result<i64> {
        self.check_point(a)?;
        let spec = self.scheme.spec();
        if k == 0 {
            return Ok(0);
        }
        if !spec.has_level(k) {
            return Err(horizon(format!("level {k} is not represented by the type")));
        }
        if spec.m(k) > self.scheme.domain().len() {
            return Ok(0);
        }
        let blocks = self.blocks_with_or_err(a, k)?;
        let mut value = None;
        for f in blocks {
            let v = canonical_decomposition(f, k, spec)?
                .position(a)
                .expect("block contains the point");
            match value {
                None => value = Some(v),
                Some(w) if w != v => {
                    return Err(Error::Inconsistent(format!("Ξ_{a}({k}) depends on the block")));
                }
                _ => {}
            }
        }
        Ok(value.expect("at least one block"))
    }
}
