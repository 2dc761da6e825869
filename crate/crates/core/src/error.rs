use thiserror::Error;

/// Errors raised by the evaluation model, the frontier stages and the
/// compromise selection.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside domain [{lo}, {hi}] for {what}")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("negative power input for {0}")]
    NegativePower(&'static str),
    #[error("expected {expected} samples, got {got}")]
    SeriesLength { expected: usize, got: usize },
    #[error("power balance violated at slot {slot}: residual {residual} MW")]
    Balance { slot: usize, residual: f64 },
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("total generation {total} MW below floor {floor} MW")]
    GenerationFloor { total: f64, floor: f64 },
    #[error("dispersion needs at least two present observations, got {0}")]
    UndefinedDispersion(usize),
    #[error("degenerate normalization bounds for objective {objective}: min {min}, max {max}")]
    DegenerateBounds { objective: usize, min: f64, max: f64 },
    #[error("anchor solve for objective {0} did not converge")]
    AnchorNotConverged(usize),
    #[error("frontier has {0} points, at least 3 required")]
    FrontierTooSmall(usize),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("singular system: {0}")]
    Singular(&'static str),
    #[error("no candidate fell inside any uniform-point box ({candidates} candidates, {uniform_points} uniform points)")]
    EmptySelection {
        candidates: usize,
        uniform_points: usize,
    },
    #[error("degenerate point set: all distances to both ideal points are zero")]
    DegenerateCloseness,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
