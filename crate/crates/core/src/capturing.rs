//! Root-tail-tail Δ-systems and the ∗-captured predicates.

use std::fmt;
use std::ops::RangeInclusive;

use itertools::Itertools;
use serde::Serialize;

use crate::delta::{intersect, root_tail_tail, DeltaFailure};
use crate::error::{invalid, Error, Result};
use crate::metrics::{DeltaValue, MetricContext};
use crate::scheme::Block;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaSystemWitness {
    pub sets: Vec<Block>,
    pub root: Block,
}

impl DeltaSystemWitness {
    /// A one-set system; its root is taken to be empty.
    pub fn single(set: Block) -> Self {
        DeltaSystemWitness { sets: vec![set], root: vec![] }
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn r(&self) -> usize {
        self.root.len()
    }

    pub fn pairwise_disjoint(&self) -> bool {
        self.root.is_empty()
    }
}

/// Witness for `family` when it is a root-tail-tail Δ-system once sorted.
pub fn delta_system_root(family: &[Block]) -> std::result::Result<DeltaSystemWitness, DeltaFailure> {
    let mut sets: Vec<Block> = family.to_vec();
    for s in &mut sets {
        s.sort();
        s.dedup();
    }
    sets.sort();
    let root = root_tail_tail(&sets)?;
    Ok(DeltaSystemWitness { sets, root })
}

/// Which of ρ, Δ must take value l on position-paired tail elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Star {
    pub rho: bool,
    pub delta: bool,
}

impl Star {
    pub const NONE: Star = Star { rho: false, delta: false };
    pub const RHO: Star = Star { rho: true, delta: false };
    pub const DELTA: Star = Star { rho: false, delta: true };
    pub const BOTH: Star = Star { rho: true, delta: true };

    pub fn parse(s: &str) -> Result<Star> {
        let mut star = Star::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "rho" => star.rho = true,
                "delta" => star.delta = true,
                other => return Err(invalid(format!("unknown star member {other:?}"))),
            }
        }
        Ok(star)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaptureReport {
    pub witness: DeltaSystemWitness,
    pub level: usize,
    pub star: Star,
    pub full: bool,
    /// Positions in the searched family, when produced by a search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaptureFailure {
    NotDeltaSystem(DeltaFailure),
    /// Ξ_{D_set(position)}(l) differs from the value clause (I) requires.
    ClauseOne { set: usize, position: usize, expected: i64, found: i64 },
    /// ν(D_i(a), D_j(a)) ≠ l.
    ClauseTwo { nu: &'static str, i: usize, j: usize, position: usize, found: String },
}

impl fmt::Display for CaptureFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaptureFailure::NotDeltaSystem(d) => write!(f, "not a root-tail-tail system: {d}"),
            CaptureFailure::ClauseOne { set, position, expected, found } => {
                write!(f, "(I) fails at set {set} position {position}: Ξ = {found}, needed {expected}")
            }
            CaptureFailure::ClauseTwo { nu, i, j, position, found } => {
                write!(f, "(II_{nu}) fails for sets {i},{j} at position {position}: value {found}")
            }
        }
    }
}

pub type CaptureVerdict = std::result::Result<CaptureReport, CaptureFailure>;

/// Test clauses (I) and (II_ν) for ν in `star` at level l.
pub fn is_captured(ctx: &MetricContext, d: &DeltaSystemWitness, l: usize, star: Star) -> Result<CaptureVerdict> {
    let r = d.r();
    for (i, set) in d.sets.iter().enumerate() {
        for (a, x) in set.iter().enumerate() {
            let expected = if a < r { -1 } else { i as i64 };
            let found = ctx.xi(*x, l)?;
            if found != expected {
                return Ok(Err(CaptureFailure::ClauseOne { set: i, position: a, expected, found }));
            }
        }
    }
    let size = d.sets.first().map_or(0, Vec::len);
    for (i, j) in (0..d.n()).tuple_combinations() {
        for a in r..size {
            let (x, y) = (d.sets[i][a], d.sets[j][a]);
            if star.rho {
                let v = ctx.rho(x, y)?;
                if v != l {
                    return Ok(Err(CaptureFailure::ClauseTwo { nu: "rho", i, j, position: a, found: v.to_string() }));
                }
            }
            if star.delta {
                let v = ctx.delta(x, y)?;
                if v != DeltaValue::Level(l) {
                    return Ok(Err(CaptureFailure::ClauseTwo { nu: "delta", i, j, position: a, found: v.to_string() }));
                }
            }
        }
    }
    let full = d.n() == ctx.scheme().spec().n(l);
    Ok(Ok(CaptureReport { witness: d.clone(), level: l, star, full, indices: None }))
}

/// Every captured n-subset of `family` over `levels`; subsets in lexicographic index order,
/// levels ascending within each subset.
pub fn search_captured(
    ctx: &MetricContext,
    family: &[Block],
    n: usize,
    star: Star,
    levels: RangeInclusive<usize>,
) -> Result<Vec<CaptureReport>> {
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    for idx in (0..family.len()).combinations(n) {
        let chosen: Vec<Block> = idx.iter().map(|&i| family[i].clone()).collect();
        let witness = if n == 1 {
            DeltaSystemWitness::single(chosen[0].clone())
        } else {
            match delta_system_root(&chosen) {
                Ok(w) => w,
                Err(_) => continue,
            }
        };
        for l in levels.clone() {
            if let Ok(mut rep) = is_captured(ctx, &witness, l, star)? {
                rep.indices = Some(idx.clone());
                out.push(rep);
            }
        }
    }
    Ok(out)
}

/// Output of the Δ-system preprocessing for a finite stand-in of an uncountable family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinedSystem {
    pub indices: Vec<usize>,
    pub witness: DeltaSystemWitness,
    /// Common value of ρ^D.
    pub k: usize,
    /// α_D = max(D) for each member.
    pub alphas: Vec<crate::OrdinalCode>,
    /// (α_D)_k for each member.
    pub closures: Vec<Block>,
    /// Root of the closure system.
    pub root_prime: Block,
}

/// Largest subfamily (lexicographically least among the largest) that is a root-tail-tail
/// Δ-system with constant ρ^D = k whose closures (max D)_k form a Δ-system with root R′
/// satisfying R′ ∩ D = R.
pub fn refine_to_uniform_system(ctx: &MetricContext, family: &[Block]) -> Result<RefinedSystem> {
    for size in (2..=family.len()).rev() {
        for idx in (0..family.len()).combinations(size) {
            let chosen: Vec<Block> = idx.iter().map(|&i| family[i].clone()).collect();
            let Ok(witness) = delta_system_root(&chosen) else { continue };
            if witness.sets.iter().any(Vec::is_empty) {
                continue;
            }
            let rhos: Vec<usize> = witness.sets.iter().map(|s| ctx.rho_max(s)).try_collect()?;
            if !rhos.iter().all_equal() {
                continue;
            }
            let k = rhos[0];
            let alphas: Vec<_> = witness.sets.iter().map(|s| *s.last().expect("nonempty")).collect();
            let closures: Vec<Block> = alphas.iter().map(|a| ctx.closure(*a, k)).try_collect()?;
            let Ok(root_prime) = root_tail_tail(&closures) else { continue };
            if witness.sets.iter().all(|s| intersect(&root_prime, s) == witness.root) {
                let indices = sorted_indices(family, &witness.sets, &idx);
                return Ok(RefinedSystem { indices, witness, k, alphas, closures, root_prime });
            }
        }
    }
    Err(Error::Invalid("no subfamily of size at least 2 admits the refinement".into()))
}

/// Original indices listed in the witness order.
fn sorted_indices(family: &[Block], sorted: &[Block], idx: &[usize]) -> Vec<usize> {
    sorted
        .iter()
        .map(|s| *idx.iter().find(|&&i| {
            let mut b = family[i].clone();
            b.sort();
            b == *s
        }).expect("member of the family"))
        .collect()
}
