use thiserror::Error;

/// Crate-wide error type. Every fallible operation reports through this enum so
/// the CLI can map failures onto its exit-code contract uniformly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("point is not on the boundary: |r(P)| = {value:e} exceeds {tol:e}")]
    NotOnBoundary { value: f64, tol: f64 },

    #[error("gradient too small at the given point: |grad r| = {value:e} < {tol:e}")]
    DegenerateGradient { value: f64, tol: f64 },

    #[error("point lies outside the domain (r = {r:e} >= 0)")]
    OutsideDomain { r: f64 },

    #[error("direction is not complex-tangential: residual {residual:e} exceeds {tol:e}")]
    NotTangent { residual: f64, tol: f64 },

    #[error("{what} leaves the neighborhood box")]
    LeavesBox { what: String },

    #[error("expression contains a non-rational constant; exact expansion requires rational pairs")]
    NonRationalConstant,

    #[error("curve component {index} is invalid: {msg}")]
    BadCurve { index: usize, msg: String },

    #[error("curve base point does not lie on the zero set of the defining function")]
    BaseNotOnZeroSet,

    #[error("contact-order sweep requires a rational base point; got a non-rational coordinate")]
    NonRationalBasePoint,

    #[error("radius modes disagree: definition {definition:e} vs inverse {inverse:e} (allowed {allowed:e})")]
    InconsistentRadiusModes {
        definition: f64,
        inverse: f64,
        allowed: f64,
    },

    #[error("requested disc is not contained in the domain ({what})")]
    DiscNotInterior { what: String },

    #[error("parameter out of range: {msg}")]
    ParameterRange { msg: String },

    #[error("domain '{name}' lacks the hermitian sum-of-squares structure needed here")]
    MissingSosStructure { name: String },

    #[error("unknown domain '{name}'")]
    UnknownDomain { name: String },

    #[error("registry schema violation at {pointer}: {msg}")]
    SchemaViolation { pointer: String, msg: String },

    #[error("normal direction is too tangential: |<n, nu>| = {value:e} < {tol:e}")]
    ObliqueNormal { value: f64, tol: f64 },

    #[error("interior sample verification failed: {msg}")]
    InteriorSample { msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
