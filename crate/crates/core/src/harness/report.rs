//! Check outcomes, their aggregation and the JSON report.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cases::Payload;
use crate::error::Result;

/// Counterexamples kept per check.
pub const MAX_COUNTEREXAMPLES: usize = 3;

/// Result of one named check on one case. `passed` and `failed` count
/// sub-instances (a case may check many probes).
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub check: Cow<'static, str>,
    pub passed: u64,
    pub failed: u64,
    pub residual: f64,
    pub detail: Option<String>,
}

impl Outcome {
    pub fn pass(check: impl Into<Cow<'static, str>>) -> Self {
        Outcome {
            check: check.into(),
            passed: 1,
            failed: 0,
            residual: 0.0,
            detail: None,
        }
    }

    pub fn fail(check: impl Into<Cow<'static, str>>, detail: impl Into<String>) -> Self {
        Outcome {
            check: check.into(),
            passed: 0,
            failed: 1,
            residual: 0.0,
            detail: Some(detail.into()),
        }
    }

    pub fn expect(check: impl Into<Cow<'static, str>>, ok: bool, detail: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(check)
        } else {
            Self::fail(check, detail())
        }
    }

    /// Passes when `residual ≤ tolerance`.
    pub fn residual(check: impl Into<Cow<'static, str>>, residual: f64, tolerance: f64) -> Self {
        let ok = residual <= tolerance;
        Outcome {
            check: check.into(),
            passed: ok as u64,
            failed: !ok as u64,
            residual: if residual.is_finite() { residual } else { f64::MAX },
            detail: (!ok).then(|| format!("residual {residual:e} exceeds tolerance {tolerance:e}")),
        }
    }

    pub fn counts(check: impl Into<Cow<'static, str>>, passed: u64, failures: Vec<String>) -> Self {
        Outcome {
            check: check.into(),
            passed,
            failed: failures.len() as u64,
            residual: 0.0,
            detail: (!failures.is_empty()).then(|| failures.join("; ")),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub passed: u64,
    pub failed: u64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub detail: String,
    pub payload: Payload,
}

/// An expected, documented observation, such as the discontinuity of the
/// literal neighborhood retraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub description: String,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub suite: String,
    pub space: String,
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub artifact: String,
    pub version: String,
    pub config: ConfigEcho,
    pub passed: bool,
    pub checks: BTreeMap<String, CheckSummary>,
    pub counterexamples: Vec<Counterexample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| c.failed > 0)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Pretty JSON with keys in a fixed order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Folds outcomes in case order.
#[derive(Debug, Default)]
pub struct Tally {
    checks: BTreeMap<String, CheckSummary>,
    counterexamples: Vec<Counterexample>,
}

impl Tally {
    /// Adds the outcomes of one case; `payload` is built only if a check failed.
    pub fn add(&mut self, outcomes: Vec<Outcome>, payload: impl FnOnce() -> Payload) {
        let mut payload = outcomes.iter().any(|o| !o.ok()).then_some(payload);
        let mut built: Option<Payload> = None;
        for o in outcomes {
            let entry = self.checks.entry(o.check.to_string()).or_default();
            entry.passed += o.passed;
            entry.failed += o.failed;
            entry.max_residual = entry.max_residual.max(o.residual);
            if o.ok() {
                continue;
            }
            let kept = self.counterexamples.iter().filter(|c| c.check == o.check).count();
            if kept < MAX_COUNTEREXAMPLES {
                if built.is_none() {
                    built = payload.take().map(|f| f());
                }
                self.counterexamples.push(Counterexample {
                    check: o.check.to_string(),
                    detail: o.detail.unwrap_or_default(),
                    payload: built.clone().expect("payload exists for failing cases"),
                });
            }
        }
    }

    pub fn finish(self, config: ConfigEcho, findings: Vec<Finding>, plot: Option<serde_json::Value>) -> Report {
        let passed = self.checks.values().all(|c| c.failed == 0) && !self.checks.is_empty();
        Report {
            artifact: "ipm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            passed,
            checks: self.checks,
            counterexamples: self.counterexamples,
            findings,
            plot,
            wall_time_ms: None,
        }
    }
}

pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json())?;
    Ok(())
}
