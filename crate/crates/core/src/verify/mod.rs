//! Property suites over the fixtures, each reporting its case count and first counterexample.

mod core_suites;
mod forcing_suites;
mod object_suites;

pub use core_suites::{capture_suite, closure_suite, metrics_suite, oracle_search, scheme_suite, scheme_dump_suite};
pub use forcing_suites::{extension_instances, extension_suite, forcing_suite};
pub use object_suites::{
    ad_suite, entangled_suite, level_metrics_fixture, metric_suite, monotone_suite, pinned_monotone_space,
    representation_suite,
};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::io::json_line;

/// Bounds for a verify run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Highest scheme level exercised on T₄ (and the alternate type).
    pub levels: usize,
    /// Number of cofinal dense sets in the extension run.
    pub horizon: usize,
    /// K for AD representations.
    pub rep_levels: usize,
    /// Largest space size in the monotone search.
    pub metric_size: usize,
    /// Drives the extra random families in the capture suite.
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { levels: 4, horizon: 6, rep_levels: 3, metric_size: 5, seed: 0 }
    }
}

impl VerifyConfig {
    pub fn zero() -> Self {
        VerifyConfig { levels: 0, horizon: 0, rep_levels: 0, metric_size: 0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Accumulates cases; keeps the first failure.
pub(crate) struct Suite {
    name: &'static str,
    cases: usize,
    counterexample: Option<Value>,
    warnings: Vec<String>,
}

impl Suite {
    pub(crate) fn new(name: &'static str) -> Self {
        Suite { name, cases: 0, counterexample: None, warnings: Vec::new() }
    }

    pub(crate) fn case(&mut self, ok: bool, what: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(what());
        }
    }

    pub(crate) fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    /// Finish without running anything when the governing bound is 0.
    pub(crate) fn skip_if_zero(name: &'static str, bound: usize, what: &str) -> Option<SuiteResult> {
        (bound == 0).then(|| {
            let mut s = Suite::new(name);
            s.warn(format!("{what} = 0"));
            s.finish()
        })
    }

    pub(crate) fn finish(mut self) -> SuiteResult {
        if self.cases == 0 {
            self.warnings.push("0 cases".into());
        }
        SuiteResult {
            suite: self.name,
            cases: self.cases,
            passed: self.counterexample.is_none(),
            counterexample: self.counterexample,
            warnings: self.warnings,
        }
    }
}

/// Errors inside a suite are failures of that suite, not of the run.
pub(crate) fn guarded(name: &'static str, f: impl FnOnce() -> Result<SuiteResult>) -> SuiteResult {
    f().unwrap_or_else(|e| SuiteResult {
        suite: name,
        cases: 0,
        passed: false,
        counterexample: Some(serde_json::json!({ "error": e.to_string() })),
        warnings: Vec::new(),
    })
}

/// Every suite, in a fixed order.
pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteResult> {
    vec![
        guarded("scheme", || scheme_suite(cfg)),
        guarded("metrics", || metrics_suite(cfg)),
        guarded("closure", || closure_suite(cfg)),
        guarded("forcing", || forcing_suite(cfg)),
        guarded("extension", || extension_suite(cfg)),
        guarded("capture", || capture_suite(cfg)),
        guarded("ad", || ad_suite(cfg)),
        guarded("entangled", || entangled_suite(cfg)),
        guarded("metric", || metric_suite(cfg)),
        guarded("monotone", || monotone_suite(cfg)),
        guarded("representation", || representation_suite(cfg)),
    ]
}

pub fn to_jsonl(results: &[SuiteResult]) -> String {
    results.iter().map(json_line).collect()
}
