use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid underresolved: axis size {size} (need an even count >= 4)")]
    GridUnderresolved { size: usize },

    #[error("aliasing: halfwidth {halfwidth} needs at least {needed} grid points, got {size}")]
    Aliasing {
        halfwidth: usize,
        needed: usize,
        size: usize,
    },

    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("expected a {expected}-dimensional grid, got {actual} dimensions")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sample count {actual} does not match grid size {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("nome out of range: q = {0} (need 0 <= q < 1)")]
    NomeOutOfRange(f64),

    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),

    #[error("invalid time t = {0}")]
    InvalidTime(f64),

    #[error("kernel time t = {t} is below the supported minimum {min}")]
    KernelTimeTooSmall { t: f64, min: f64 },

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error(
        "quadrature failed to converge: estimated error {estimate:e} > requested {requested:e} \
         ({rule}, {nodes} nodes, t = {t})"
    )]
    QuadratureNotConverged {
        estimate: f64,
        requested: f64,
        rule: String,
        nodes: usize,
        t: f64,
    },

    #[error("invalid growth class: {0}")]
    InvalidClass(String),

    #[error("divergent pairing: {0}")]
    DivergentPairing(String),

    #[error("unsmoothable class: order k = {k} with base {base} cannot be damped by exp(-n^2 t)")]
    UnsmoothableClass { k: u32, base: f64 },

    #[error("unsupported order k = {0} (only k = 2 is supported here)")]
    UnsupportedOrder(u32),

    #[error("window radius {radius} too small (need >= {min})")]
    WindowTooSmall { radius: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
