use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Stencil would leave the chart's domain box.
    #[error("point too close to chart boundary: coordinate {coord} = {value} needs margin {margin} inside [{lo}, {hi}]")]
    BoundaryMargin {
        coord: usize,
        value: f64,
        margin: f64,
        lo: f64,
        hi: f64,
    },
    #[error("metric is not symmetric positive definite at {0:?}")]
    Degenerate(Vec<f64>),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("fiber {0} carries no tensor data")]
    InsufficientFiberData(String),
    #[error("singular warping sample (phi = {0})")]
    SingularSample(f64),
    #[error("chart window [{lo}, {hi}] reaches phi <= 0")]
    SingularWindow { lo: f64, hi: f64 },
    #[error("singular state phi = 0 at r = {0}; start from the origin series instead")]
    SingularState(f64),
    #[error("no smooth closing at a critical point for fiber curvature {0} (needs kappa > 0)")]
    NoSmoothClosing(f64),
    #[error("step size underflow at r = {r} (h = {h:e}); problem looks stiff or singular")]
    StepUnderflow { r: f64, h: f64 },
    #[error("step budget of {0} exhausted before reaching the integration limit")]
    StepLimit(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
}
