//! Codes for ordinals below ω·S.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// The ordinal ω·limit_block + offset. Field order gives the lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OrdinalCode {
    pub limit_block: u32,
    pub offset: u32,
}

impl OrdinalCode {
    pub const fn new(limit_block: u32, offset: u32) -> Self {
        OrdinalCode { limit_block, offset }
    }

    pub const fn fin(n: u32) -> Self {
        OrdinalCode::new(0, n)
    }

    /// ω·a
    pub const fn omega(a: u32) -> Self {
        OrdinalCode::new(a, 0)
    }

    pub fn is_finite(self) -> bool {
        self.limit_block == 0
    }

    pub fn is_limit(self) -> bool {
        self.limit_block > 0 && self.offset == 0
    }

    pub fn succ(self) -> Self {
        OrdinalCode::new(self.limit_block, self.offset + 1)
    }

    /// self + n for finite n.
    pub fn plus(self, n: u32) -> Self {
        OrdinalCode::new(self.limit_block, self.offset + n)
    }

    /// The greatest limit ≤ self (0 counts as the limit of block 0).
    pub fn limit_part(self) -> Self {
        OrdinalCode::new(self.limit_block, 0)
    }
}

impl fmt::Display for OrdinalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.limit_block, self.offset) {
            (0, b) => write!(f, "{b}"),
            (1, 0) => write!(f, "ω"),
            (1, b) => write!(f, "ω+{b}"),
            (a, 0) => write!(f, "ω·{a}"),
            (a, b) => write!(f, "ω·{a}+{b}"),
        }
    }
}

impl From<u32> for OrdinalCode {
    fn from(n: u32) -> Self {
        OrdinalCode::fin(n)
    }
}

impl Serialize for OrdinalCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.limit_block == 0 {
            s.serialize_u32(self.offset)
        } else {
            [self.limit_block, self.offset].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for OrdinalCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Plain(u32),
            Pair([u32; 2]),
        }
        match Raw::deserialize(d) {
            Ok(Raw::Plain(n)) => Ok(OrdinalCode::fin(n)),
            Ok(Raw::Pair([a, b])) => Ok(OrdinalCode::new(a, b)),
            Err(_) => Err(de::Error::custom("expected an integer or an [a, b] pair")),
        }
    }
}

/// Finite codes 0..n.
pub fn naturals(n: usize) -> Vec<OrdinalCode> {
    (0..n as u32).map(OrdinalCode::fin).collect()
}

/// Shorthand for building sorted code sets in tests and examples.
pub fn codes(xs: &[u32]) -> Vec<OrdinalCode> {
    let mut v: Vec<_> = xs.iter().copied().map(OrdinalCode::fin).collect();
    v.sort();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_lexicographic() {
        assert!(OrdinalCode::fin(1000) < OrdinalCode::omega(1));
        assert!(OrdinalCode::new(1, 5) < OrdinalCode::new(2, 0));
        assert!(OrdinalCode::new(1, 2) < OrdinalCode::new(1, 3));
    }

    #[test]
    fn json_forms() {
        let s = serde_json::to_string(&vec![OrdinalCode::fin(3), OrdinalCode::new(1, 2)]).unwrap();
        assert_eq!(s, "[3,[1,2]]");
        let back: Vec<OrdinalCode> = serde_json::from_str("[[0,4],7,[2,0]]").unwrap();
        assert_eq!(back, vec![OrdinalCode::fin(4), OrdinalCode::fin(7), OrdinalCode::omega(2)]);
    }

    #[test]
    fn display() {
        assert_eq!(OrdinalCode::new(1, 3).to_string(), "ω+3");
        assert_eq!(OrdinalCode::omega(2).to_string(), "ω·2");
    }
}
