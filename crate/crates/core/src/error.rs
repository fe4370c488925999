use thiserror::Error;

use crate::space::MetricViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("max-plus scalar must be finite or -inf, got {0}")]
    InvalidScalar(f64),
    #[error("homotopy parameter {0} lies outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("a space needs at least one point")]
    EmptySpace,
    #[error("duplicate point id {0:?}")]
    DuplicatePoint(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("point index {index} out of range for a space of {len} points")]
    PointOutOfRange { index: usize, len: usize },
    #[error("malformed space: {0}")]
    MalformedSpace(String),
    #[error("metric axioms violated ({} instance(s)): {}", .0.len(), summarize(.0))]
    MetricAxioms(Vec<MetricViolation>),
    #[error("objects live on different spaces")]
    SpaceMismatch,
    #[error("map codomain does not match the next map's domain")]
    DomainMismatch,
    #[error("map table is not total: {0}")]
    MapNotTotal(String),
    #[error("test function violates its Lipschitz bound {bound} at ({a}, {b}): needs {needed}")]
    Lipschitz {
        a: String,
        b: String,
        bound: f64,
        needed: f64,
    },
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("homotopy witness needs at least one step")]
    EmptyWitness,
    #[error("witness step {step} moves {point} by {moved}, exceeding the bound {bound}")]
    StepBound {
        step: usize,
        point: String,
        moved: f64,
        bound: f64,
    },

    #[error("measure has no atom with finite weight")]
    EmptySupport,
    #[error("measure is not normalized: max weight is {0}, expected 0")]
    NotNormalized(f64),
    #[error("coefficients {0} and {1} do not satisfy max = 0")]
    CoefficientNormalization(f64, f64),
    #[error("support oracle is limited to {max} points, space has {len}")]
    SpaceTooLarge { len: usize, max: usize },
    #[error("empty test-function family")]
    EmptyFamily,

    #[error("measure is not in I_f: {0}")]
    NotInIf(String),
    #[error("measure is not in the fibre over {0}")]
    NotInFibre(String),
    #[error("measure lies in no O_delta neighborhood: {0}")]
    NotInNeighborhood(String),
    #[error("top atom {0} lies outside U")]
    TopOutsideU(String),
    #[error("invalid retraction data: {0}")]
    InvalidRetraction(String),

    #[error("step index {index} out of range for a witness with {len} steps")]
    StepOutOfRange { index: usize, len: usize },
    #[error("invalid t grid: {0}")]
    InvalidGrid(String),

    #[error("invalid neighborhood: {0}")]
    InvalidNeighborhood(String),
    #[error("epsilon {0} must lie in (0, ln 3)")]
    EpsilonTooLarge(f64),
    #[error("balls {0} and {1} share point {2}")]
    BallsOverlap(usize, usize, String),
    #[error("grid point {0} lies outside the top ball")]
    GridOutsideBall(String),

    #[error("configuration error: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn summarize(v: &[MetricViolation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(|m| m.to_string()).collect();
    if v.len() > 5 {
        format!("{}, ...", shown.join(", "))
    } else {
        shown.join(", ")
    }
}
