use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("non-finite integrand value at r = {r}")]
    NonFinite { r: f64 },

    #[error("integration diverged at t = {t}: step size underflow (h = {h:e})")]
    Divergence { t: f64, h: f64, state: Vec<f64> },

    #[error("integration exceeded {steps} steps at t = {t}")]
    StepLimit {
        t: f64,
        steps: usize,
        state: Vec<f64>,
    },

    #[error("factorization breakdown: {0}")]
    Conditioning(String),

    #[error("all {starts} descents converged to the boundary of the sector (best min θ_k = {min_component:e})")]
    BoundaryMinimizer { starts: usize, min_component: f64 },

    #[error("expected a positive value, found n = {0}")]
    Sign(f64),

    #[error("critical point is a saddle: smallest tangential curvature {0:e}")]
    Saddle(f64),

    #[error("grid too coarse: {nodes} nodes, at least {required} required")]
    Resolution { nodes: usize, required: usize },

    #[error("no negative eigenvalue found (smallest = {0:e})")]
    Contradiction(f64),

    #[error("solvability defect {defect:e} exceeds {limit:e}")]
    Orthogonality { defect: f64, limit: f64 },

    #[error("scale parameter λ_{index} reached {value:e} at t = {t}")]
    BlowDown {
        t: f64,
        index: usize,
        value: f64,
        state: Vec<f64>,
    },

    #[error("shooting failed: {0}")]
    ShootingFailure(String),

    #[error("unsupported method: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
