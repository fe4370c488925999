//! Seeded property suites with deterministic JSON
//! reports and replayable counterexamples.
//!
//! | suite             | checks                                                   |
//! |-------------------|----------------------------------------------------------|
//! | `semiring`        | ⊕/⊙ laws bit-exact, `ln_coeffs` normalization, symmetry   |
//! | `axioms`          | axioms (1)–(3), affinity of evaluation, `eval_gap`       |
//! | `support_oracle`  | `support` against the subset-scan oracle                 |
//! | `functor`         | pushforward identity/composition laws, `I_f` closure     |
//! | `thm1_retraction` | idempotence, Dirac fixing, fibre partition, intervals    |
//! | `thm1_homotopy`   | fibre homotopy endpoints, membership, plateau `t ≥ ½`    |
//! | `prop1`           | deformation endpoints, strong deformation, plateau `t ≤ ½` |
//! | `thm1_base`       | bracket(ε/2) ⊆ subbase(ε)                                |
//! | `thm1_openness`   | both inclusions of the openness check                    |
//! | `prop2_lemma1`    | neighborhood retraction into `I_f`, stability, jump      |
//! | `thm2`            | lifted witness tracks                                    |
//! | `thm3`            | ambient retraction on `I_f(X)`                           |

pub mod cases;
pub mod generate;
pub mod report;
pub mod suites;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;
use crate::subspace::RetractVariant;
use crate::wire::SpaceDoc;
use cases::{check_case, CaseDoc, CheckCtx, Payload};
use generate::{generate_space, SpaceGen};
use report::{ConfigEcho, Counterexample, Report, Tally};

pub use report::emit_report;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SEED: u64 = 42;

/// Exit status of a run: all checks passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status of a run: some check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status of a run: the configuration was rejected.
pub const EXIT_CONFIG: i32 = 2;

const CHUNK: u64 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Semiring,
    Axioms,
    SupportOracle,
    Functor,
    Thm1Retraction,
    Thm1Homotopy,
    Prop1,
    Thm1Base,
    Thm1Openness,
    Prop2Lemma1,
    Thm2,
    Thm3,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Semiring,
        Suite::Axioms,
        Suite::SupportOracle,
        Suite::Functor,
        Suite::Thm1Retraction,
        Suite::Thm1Homotopy,
        Suite::Prop1,
        Suite::Thm1Base,
        Suite::Thm1Openness,
        Suite::Prop2Lemma1,
        Suite::Thm2,
        Suite::Thm3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Semiring => "semiring",
            Suite::Axioms => "axioms",
            Suite::SupportOracle => "support_oracle",
            Suite::Functor => "functor",
            Suite::Thm1Retraction => "thm1_retraction",
            Suite::Thm1Homotopy => "thm1_homotopy",
            Suite::Prop1 => "prop1",
            Suite::Thm1Base => "thm1_base",
            Suite::Thm1Openness => "thm1_openness",
            Suite::Prop2Lemma1 => "prop2_lemma1",
            Suite::Thm2 => "thm2",
            Suite::Thm3 => "thm3",
        }
    }

    /// Trials per run. For `thm1_base` and `thm1_openness` a trial is a
    /// configuration with 100 probes; for `thm2` it is a witness lifted over
    /// 10 measures.
    pub fn default_trials(self) -> u64 {
        match self {
            Suite::Semiring => 100_000,
            Suite::Axioms | Suite::Functor | Suite::Thm1Retraction | Suite::Prop2Lemma1 => 10_000,
            Suite::SupportOracle | Suite::Thm1Homotopy | Suite::Prop1 | Suite::Thm3 => 1_000,
            Suite::Thm1Base | Suite::Thm2 => 100,
            Suite::Thm1Openness => 50,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub suite: Suite,
    /// Echoed in the report: a generator spec or a file name.
    pub space_label: String,
    pub space: Arc<FiniteMetricSpace>,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// `None` runs both variants where a suite distinguishes them.
    pub variant: Option<RetractVariant>,
    pub parallel: bool,
}

impl Scenario {
    /// Defaults: the suite's trial count, seed 42, tolerance 1e-12, serial.
    pub fn new(suite: Suite, spec: &SpaceGen) -> Result<Self> {
        Ok(Self::with_space(
            suite,
            spec.to_string(),
            Arc::new(generate_space(spec)?),
        ))
    }

    pub fn with_space(suite: Suite, space_label: String, space: Arc<FiniteMetricSpace>) -> Self {
        Scenario {
            suite,
            space_label,
            space,
            trials: suite.default_trials(),
            seed: DEFAULT_SEED,
            tolerance: DEFAULT_TOLERANCE,
            variant: None,
            parallel: false,
        }
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            suite: self.suite.to_string(),
            space: self.space_label.clone(),
            trials: self.trials,
            seed: Some(self.seed),
            tolerance: self.tolerance,
            variant: self.variant.map(|v| v.to_string()),
        }
    }
}

fn check_tolerance(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance {t} must be finite and nonnegative")))
    }
}

/// Runs a suite. Reports are identical for serial and parallel runs.
pub fn run_suite(s: &Scenario) -> Result<Report> {
    if s.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    check_tolerance(s.tolerance)?;
    suites::validate_space(s.suite, &s.space)?;
    let ctx = CheckCtx {
        tolerance: s.tolerance,
        variant: s.variant,
    };
    let space_doc = OnceLock::new();
    let payload = |case: &CaseDoc| Payload {
        suite: s.suite,
        tolerance: s.tolerance,
        variant: s.variant.map(|v| v.to_string()),
        space: space_doc.get_or_init(|| SpaceDoc::from_space(&s.space)).clone(),
        case: case.clone(),
    };
    let trial = |t: u64| -> Result<(CaseDoc, Vec<report::Outcome>)> {
        let case = suites::generate_case(s.suite, &s.space, s.seed, t)?;
        let outcomes = check_case(&s.space, &case, &ctx);
        Ok((case, outcomes))
    };

    let mut tally = Tally::default();
    let mut start = 0;
    while start < s.trials {
        let end = (start + CHUNK).min(s.trials);
        let results: Vec<_> = if s.parallel {
            (start..end).into_par_iter().map(trial).collect::<Result<_>>()?
        } else {
            (start..end).map(trial).collect::<Result<_>>()?
        };
        for (case, outcomes) in results {
            tally.add(outcomes, || payload(&case));
        }
        start = end;
    }
    for case in suites::extra_cases(s.suite, &s.space)? {
        let outcomes = check_case(&s.space, &case, &ctx);
        tally.add(outcomes, || payload(&case));
    }
    Ok(tally.finish(
        s.echo(),
        suites::findings(s.suite, &s.space)?,
        suites::plot(s.suite, &s.space, s.seed)?,
    ))
}

/// Reruns the payloads in a report, a single counterexample, or a bare payload.
pub fn replay(json: &str) -> Result<Report> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    let mut payloads: Vec<Payload> = if value.get("counterexamples").is_some() {
        serde_json::from_value::<Report>(value)?
            .counterexamples
            .into_iter()
            .map(|c| c.payload)
            .collect()
    } else if value.get("payload").is_some() {
        vec![serde_json::from_value::<Counterexample>(value)?.payload]
    } else {
        vec![serde_json::from_value::<Payload>(value)?]
    };
    // A case failing several checks appears once per check.
    payloads.dedup();
    let first = payloads
        .first()
        .ok_or_else(|| Error::Config("nothing to replay: no counterexamples".into()))?
        .clone();

    let mut tally = Tally::default();
    for p in &payloads {
        check_tolerance(p.tolerance)?;
        let space = Arc::new(p.space.to_space()?);
        let ctx = CheckCtx {
            tolerance: p.tolerance,
            variant: p.variant.as_deref().map(str::parse).transpose()?,
        };
        tally.add(check_case(&space, &p.case, &ctx), || p.clone());
    }
    let echo = ConfigEcho {
        suite: first.suite.to_string(),
        space: "replay".into(),
        trials: payloads.len() as u64,
        seed: None,
        tolerance: first.tolerance,
        variant: first.variant,
    };
    Ok(tally.finish(echo, Vec::new(), None))
}

pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.passed => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(_) => EXIT_CONFIG,
    }
}
