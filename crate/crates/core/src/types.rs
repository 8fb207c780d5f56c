//! Types ⟨m_k, n_{k+1}, r_{k+1}⟩ and their lazy extension.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// One entry of a type. At k = 0 the fields `n` and `r` are unused and kept at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LevelParams {
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl LevelParams {
    pub fn base() -> Self {
        LevelParams { m: 1, n: 0, r: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    /// m_0 = 1
    BaseSize,
    /// n_{k+1} ≥ 2
    AtLeastTwoPieces,
    /// m_k > r_{k+1}
    RootBelowSize,
    /// m_{k+1} = r_{k+1} + (m_k − r_{k+1})·n_{k+1}
    Recurrence,
}

impl Axiom {
    pub fn id(self) -> &'static str {
        match self {
            Axiom::BaseSize => "m0_is_1",
            Axiom::AtLeastTwoPieces => "n_at_least_2",
            Axiom::RootBelowSize => "m_gt_r",
            Axiom::Recurrence => "recurrence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending entry.
    pub k: usize,
    pub axiom: Axiom,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "entry {} violates {}", self.k, self.axiom.id())
    }
}

/// Validity of a type prefix. Returns the first violation found, scanning entries in order.
pub fn validate_type_prefix(entries: &[LevelParams]) -> std::result::Result<(), Violation> {
    let Some(first) = entries.first() else {
        return Err(Violation { k: 0, axiom: Axiom::BaseSize });
    };
    if first.m != 1 {
        return Err(Violation { k: 0, axiom: Axiom::BaseSize });
    }
    for (k, pair) in entries.windows(2).enumerate() {
        let (prev, cur) = (pair[0], pair[1]);
        let at = k + 1;
        if cur.n < 2 {
            return Err(Violation { k: at, axiom: Axiom::AtLeastTwoPieces });
        }
        if prev.m <= cur.r {
            return Err(Violation { k: at, axiom: Axiom::RootBelowSize });
        }
        if cur.m != cur.r + (prev.m - cur.r) * cur.n {
            return Err(Violation { k: at, axiom: Axiom::Recurrence });
        }
    }
    Ok(())
}

/// Rule for choosing r_{k+1} when a type is extended.
///
/// Root sizes come from the diagonal enumeration of pairs (r, repetition) ordered by
/// r + repetition and then by r, i.e. 0; 0,1; 0,1,2; ... Values with r ≥ m_k are skipped.
/// `cursor` counts the pairs consumed so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub default_n: usize,
    pub cursor: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { default_n: 2, cursor: 0 }
    }
}

/// r-value at position t of the diagonal enumeration.
pub fn diagonal_r(t: usize) -> usize {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= t {
        d += 1;
    }
    t - d * (d + 1) / 2
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeSpec {
    entries: Vec<LevelParams>,
    pub schedule: Schedule,
}

impl TypeSpec {
    pub fn new(entries: Vec<LevelParams>) -> Result<Self> {
        Self::with_schedule(entries, Schedule::default())
    }

    pub fn with_schedule(entries: Vec<LevelParams>, schedule: Schedule) -> Result<Self> {
        validate_type_prefix(&entries).map_err(|v| invalid(format!("type prefix: {v}")))?;
        if schedule.default_n < 2 {
            return Err(invalid("schedule default_n must be at least 2"));
        }
        Ok(TypeSpec { entries, schedule })
    }

    /// Build from parallel m, n, r lists where n and r have one fewer entry than m.
    pub fn from_lists(m: &[usize], n: &[usize], r: &[usize]) -> Result<Self> {
        if m.is_empty() || n.len() + 1 != m.len() || r.len() + 1 != m.len() {
            return Err(invalid("m must have exactly one more entry than n and r"));
        }
        let mut entries = vec![LevelParams { m: m[0], n: 0, r: 0 }];
        for k in 1..m.len() {
            entries.push(LevelParams { m: m[k], n: n[k - 1], r: r[k - 1] });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[LevelParams] {
        &self.entries
    }

    /// Highest represented level.
    pub fn top(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn m(&self, k: usize) -> usize {
        self.entries[k].m
    }

    pub fn n(&self, k: usize) -> usize {
        self.entries[k].n
    }

    pub fn r(&self, k: usize) -> usize {
        self.entries[k].r
    }

    pub fn has_level(&self, k: usize) -> bool {
        k < self.entries.len()
    }

    pub fn level_of_size(&self, size: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.m == size)
    }

    pub fn level_of_size_or_err(&self, size: usize) -> Result<usize> {
        self.level_of_size(size).ok_or(Error::SizeMismatch(size))
    }

    /// Append `steps` entries chosen by the schedule.
    pub fn extend_type(&self, steps: usize) -> TypeSpec {
        let mut out = self.clone();
        for _ in 0..steps {
            let m_k = out.entries.last().map(|e| e.m).unwrap_or(1);
            let r = loop {
                let r = diagonal_r(out.schedule.cursor);
                out.schedule.cursor += 1;
                if r < m_k {
                    break r;
                }
            };
            let n = out.schedule.default_n;
            out.entries.push(LevelParams { m: r + (m_k - r) * n, n, r });
        }
        out
    }

    /// Extend until level `k` is represented.
    pub fn extended_to(&self, k: usize) -> TypeSpec {
        self.extend_type((k + 1).saturating_sub(self.entries.len()))
    }
}

/// Named fixtures used across tests and the verify suite.
pub mod fixtures {
    use super::TypeSpec;

    /// m = [1,2,4,6,10], n = [_,2,3,2,2], r = [_,0,1,2,2]
    pub fn t4() -> TypeSpec {
        TypeSpec::from_lists(&[1, 2, 4, 6, 10], &[2, 3, 2, 2], &[0, 1, 2, 2]).unwrap()
    }

    /// m = [1,2,6], n = [_,2,5], r = [_,0,1]; n_2 ≥ 2^{m_1} + 1.
    pub fn t_e() -> TypeSpec {
        TypeSpec::from_lists(&[1, 2, 6], &[2, 5], &[0, 1]).unwrap()
    }

    /// m = [1,2,4,10,26], n = [_,2,3,3,3], r = [_,0,1,1,2]; n_2 ≥ 3 and 26 points.
    pub fn t_alt() -> TypeSpec {
        TypeSpec::from_lists(&[1, 2, 4, 10, 26], &[2, 3, 3, 3], &[0, 1, 1, 2]).unwrap()
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ScheduleJson {
    Diagonal {
        default_n: usize,
        #[serde(default, skip_serializing_if = "is_zero")]
        cursor: usize,
    },
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

#[derive(Serialize, Deserialize)]
struct TypeSpecJson {
    entries: Vec<EntryJson>,
    #[serde(default)]
    schedule: Option<ScheduleJson>,
}

impl Serialize for TypeSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| EntryJson {
                m: e.m,
                n: (k > 0).then_some(e.n),
                r: (k > 0).then_some(e.r),
            })
            .collect();
        TypeSpecJson {
            entries,
            schedule: Some(ScheduleJson::Diagonal {
                default_n: self.schedule.default_n,
                cursor: self.schedule.cursor,
            }),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TypeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TypeSpecJson::deserialize(d)?;
        let mut entries = Vec::with_capacity(raw.entries.len());
        for (k, e) in raw.entries.into_iter().enumerate() {
            if k == 0 {
                entries.push(LevelParams { m: e.m, n: 0, r: 0 });
            } else {
                let (Some(n), Some(r)) = (e.n, e.r) else {
                    return Err(D::Error::custom(format!("entry {k} needs both n and r")));
                };
                entries.push(LevelParams { m: e.m, n, r });
            }
        }
        let schedule = match raw.schedule {
            Some(ScheduleJson::Diagonal { default_n, cursor }) => Schedule { default_n, cursor },
            None => Schedule::default(),
        };
        TypeSpec::with_schedule(entries, schedule).map_err(|e| match e {
            Error::Invalid(msg) => D::Error::custom(msg),
            other => D::Error::custom(other),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lists(m: &[usize], n: &[usize], r: &[usize]) -> Vec<LevelParams> {
        let mut v = vec![LevelParams { m: m[0], n: 0, r: 0 }];
        for k in 1..m.len() {
            v.push(LevelParams { m: m[k], n: n[k - 1], r: r[k - 1] });
        }
        v
    }

    #[test]
    fn fixture_t4_is_valid() {
        assert_eq!(validate_type_prefix(&lists(&[1, 2, 4, 6, 10], &[2, 3, 2, 2], &[0, 1, 2, 2])), Ok(()));
    }

    #[test]
    fn trivial_prefix_is_valid() {
        assert_eq!(validate_type_prefix(&[LevelParams::base()]), Ok(()));
    }

    #[test]
    fn root_too_large_is_reported() {
        let v = validate_type_prefix(&lists(&[1, 2], &[2], &[1])).unwrap_err();
        assert_eq!(v, Violation { k: 1, axiom: Axiom::RootBelowSize });
    }

    #[test]
    fn other_violations() {
        assert_eq!(validate_type_prefix(&[LevelParams { m: 2, n: 0, r: 0 }]).unwrap_err().axiom, Axiom::BaseSize);
        assert_eq!(
            validate_type_prefix(&lists(&[1, 1], &[1], &[0])).unwrap_err().axiom,
            Axiom::AtLeastTwoPieces
        );
        assert_eq!(
            validate_type_prefix(&lists(&[1, 2, 5], &[2, 3], &[0, 1])).unwrap_err(),
            Violation { k: 2, axiom: Axiom::Recurrence }
        );
    }

    #[test]
    fn diagonal_sequence() {
        let got: Vec<_> = (0..10).map(diagonal_r).collect();
        assert_eq!(got, vec![0, 0, 1, 0, 1, 2, 0, 1, 2, 3]);
    }

    #[test]
    fn extension_examples() {
        let t4 = fixtures::t4();
        assert_eq!(t4.extend_type(0), t4);
        let base = TypeSpec::new(vec![LevelParams::base()]).unwrap().extend_type(1);
        assert_eq!(base.entries()[1], LevelParams { m: 2, n: 2, r: 0 });
        let t5 = t4.extend_type(1);
        assert_eq!(t5.entries()[5], LevelParams { m: 20, n: 2, r: 0 });
    }

    #[test]
    fn extension_follows_the_diagonal() {
        let t = TypeSpec::new(vec![LevelParams::base()]).unwrap().extend_type(3);
        assert!(validate_type_prefix(t.entries()).is_ok());
        let rs: Vec<_> = t.entries()[1..].iter().map(|e| e.r).collect();
        assert_eq!(rs, vec![0, 0, 1]);
        assert_eq!(t.m(3), 7);
    }

    #[test]
    fn extension_skips_roots_that_are_too_big() {
        // Position 2 of the diagonal is r = 1, which m_0 = 1 cannot carry.
        let sched = Schedule { default_n: 2, cursor: 2 };
        let t = TypeSpec::with_schedule(vec![LevelParams::base()], sched).unwrap().extend_type(1);
        assert_eq!(t.r(1), 0);
        assert_eq!(t.schedule.cursor, 4);
    }

    #[test]
    fn json_round_trip() {
        let t4 = fixtures::t4();
        let s = serde_json::to_string(&t4).unwrap();
        assert!(s.starts_with(r#"{"entries":[{"m":1},{"m":2,"n":2,"r":0}"#));
        let back: TypeSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t4);
        let bad = r#"{"entries":[{"m":1},{"m":2,"n":2,"r":1}]}"#;
        assert!(serde_json::from_str::<TypeSpec>(bad).is_err());
    }
}
