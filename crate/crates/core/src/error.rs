use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),

    #[error("non-positive measure at vertex `{0}`")]
    NonPositiveMeasure(String),

    #[error("non-positive weight on {degree}-cell {cell:?}")]
    NonPositiveWeight { degree: usize, cell: Vec<usize> },

    #[error("non-positive length on edge {0:?}")]
    NonPositiveLength(Vec<usize>),

    #[error("complex is disconnected: no path between `{0}` and `{1}`")]
    Disconnected(String, String),

    #[error("explicit distances are not a metric: {0}")]
    NotAMetric(String),

    #[error("inconsistent cell data: {degree}-cell {cell:?} is missing face {face:?}")]
    MissingFace { degree: usize, cell: Vec<usize>, face: Vec<usize> },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("unknown complex kind `{0}`")]
    UnknownKind(String),

    #[error("size too small: {0}")]
    SizeTooSmall(String),

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("empty radius grid")]
    EmptyRadiusGrid,

    #[error("invalid vertex subset: {0}")]
    InvalidSubset(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("symbol `{name}` is undefined at spectral value {value}")]
    SymbolUndefined { name: String, value: f64 },

    #[error("symbol `{0}` does not vanish at the origin")]
    NotPsiClass(String),

    #[error("cannot parse symbol `{0}`")]
    SymbolParse(String),

    #[error("empty time grid")]
    EmptyGrid,

    #[error("time grids do not match")]
    GridMismatch,

    #[error("normalization integral {0}: {1}")]
    Normalization(&'static str, String),

    #[error("exponent p must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("zero field has no atomic decomposition")]
    ZeroField,

    #[error("symbol `{name}` in class ({sigma}, {tau}) is not admissible for p = {p}: {reason}")]
    Inadmissible { name: String, sigma: f64, tau: f64, p: f64, reason: String },

    #[error("form has a harmonic component of relative size {0:.3e}")]
    HarmonicComponent(f64),

    #[error("molecule order {order} too small: need N > kappa/2 + 1 = {bound}")]
    OrderTooSmall { order: u32, bound: f64 },

    #[error("aperture constant c = {c} violates c <= alpha/(1+2 alpha) for alpha = {alpha}")]
    ApertureConstant { alpha: f64, c: f64 },

    #[error("vertex sets must be disjoint and at positive distance")]
    OverlappingSets,

    #[error("inadmissible decay request: {0}")]
    DecayRequest(String),

    #[error("empty battery")]
    EmptyBattery,

    #[error("constraint space `{0}` is trivial on this complex")]
    TrivialConstraint(String),

    #[error("nothing to run")]
    NothingToRun,

    #[error("experiment `{id}` failed at stage `{stage}`: {source}")]
    Experiment {
        id: String,
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
