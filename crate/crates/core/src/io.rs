//! File formats: type specs, JSON Lines scheme dumps, block families.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ordinal::OrdinalCode;
use crate::scheme::{Block, SchemePrefix};
use crate::types::TypeSpec;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parse_type_spec(text: &str) -> Result<TypeSpec> {
    serde_json::from_str(text).map_err(|e| invalid(format!("type spec: {e}")))
}

pub fn read_type_spec(path: &Path) -> Result<TypeSpec> {
    parse_type_spec(&read_text(path)?)
}

/// One JSON value per line.
pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable values");
    s.push('\n');
    s
}

#[derive(Serialize, Deserialize)]
struct BlockLine {
    level: usize,
    elements: Block,
}

/// {"level":k,"elements":[…]} per block, levels ascending.
pub fn scheme_to_jsonl(s: &SchemePrefix) -> String {
    s.blocks().map(|(level, b)| json_line(&BlockLine { level, elements: b.clone() })).collect()
}

/// Reads a dump back; the domain is the union of the blocks.
pub fn scheme_from_jsonl(spec: &TypeSpec, text: &str) -> Result<SchemePrefix> {
    let mut levels: Vec<Vec<Block>> = Vec::new();
    let mut domain: Vec<OrdinalCode> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let b: BlockLine = serde_json::from_str(line).map_err(|e| invalid(format!("dump line {}: {e}", i + 1)))?;
        if levels.len() <= b.level {
            levels.resize(b.level + 1, Vec::new());
        }
        domain.extend(&b.elements);
        levels[b.level].push(b.elements);
    }
    for level in &mut levels {
        level.sort();
    }
    domain.sort();
    domain.dedup();
    Ok(SchemePrefix::from_levels(spec.clone(), domain, levels))
}

/// A JSON array of sets of codes; each set is sorted and deduplicated.
pub fn parse_family(text: &str) -> Result<Vec<Block>> {
    let mut fam: Vec<Block> = serde_json::from_str(text).map_err(|e| invalid(format!("family: {e}")))?;
    for b in &mut fam {
        b.sort();
        b.dedup();
    }
    Ok(fam)
}

/// "ω·2+3", "ω+1", "7", or "[2,3]".
pub fn parse_ordinal(s: &str) -> Result<OrdinalCode> {
    let t = s.trim();
    if t.starts_with('[') || t.chars().all(|c| c.is_ascii_digit()) {
        return serde_json::from_str(t).map_err(|_| invalid(format!("bad ordinal {s:?}")));
    }
    let bad = || invalid(format!("bad ordinal {s:?}"));
    let rest = t.strip_prefix('ω').or_else(|| t.strip_prefix('w')).ok_or_else(bad)?;
    let (mult, rest) = match rest.strip_prefix('·').or_else(|| rest.strip_prefix('*')) {
        Some(r) => {
            let end = r.find('+').unwrap_or(r.len());
            (r[..end].parse::<u32>().map_err(|_| bad())?, &r[end..])
        }
        None => (1, rest),
    };
    let offset = match rest.strip_prefix('+') {
        Some(r) => r.parse::<u32>().map_err(|_| bad())?,
        None if rest.is_empty() => 0,
        None => return Err(bad()),
    };
    Ok(OrdinalCode::new(mult, offset))
}

/// Comma-separated ordinals; empty text is the empty set.
pub fn parse_ordinal_set(s: &str) -> Result<Vec<OrdinalCode>> {
    let mut v: Vec<OrdinalCode> =
        s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(parse_ordinal).collect::<Result<_>>()?;
    v.sort();
    v.dedup();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::naturals;
    use crate::scheme::unique_finite_scheme;
    use crate::types::fixtures::t4;

    #[test]
    fn scheme_dump_round_trip() {
        let s = unique_finite_scheme(&naturals(10), &t4()).unwrap();
        let text = scheme_to_jsonl(&s);
        assert_eq!(text.lines().count(), 26);
        assert!(text.starts_with("{\"level\":0,\"elements\":[0]}\n"));
        let back = scheme_from_jsonl(&t4(), &text).unwrap();
        assert_eq!(back.levels(), s.levels());
        assert!(back.check().passed());
    }

    #[test]
    fn ordinal_text() {
        assert_eq!(parse_ordinal("ω·2+3").unwrap(), OrdinalCode::new(2, 3));
        assert_eq!(parse_ordinal("w+1").unwrap(), OrdinalCode::new(1, 1));
        assert_eq!(parse_ordinal("ω").unwrap(), OrdinalCode::omega(1));
        assert_eq!(parse_ordinal("7").unwrap(), OrdinalCode::fin(7));
        assert_eq!(parse_ordinal("[3,0]").unwrap(), OrdinalCode::omega(3));
        assert!(parse_ordinal("ω-1").is_err());
        assert_eq!(parse_ordinal_set("2, 1,2").unwrap(), vec![OrdinalCode::fin(1), OrdinalCode::fin(2)]);
        assert!(parse_ordinal_set("").unwrap().is_empty());
    }

    #[test]
    fn type_spec_text() {
        let t = parse_type_spec(r#"{"entries":[{"m":1},{"m":2,"n":2,"r":0}]}"#).unwrap();
        assert_eq!(t.m(1), 2);
        assert!(parse_type_spec(r#"{"entries":[{"m":1},{"m":3,"n":2,"r":0}]}"#).is_err());
    }
}
