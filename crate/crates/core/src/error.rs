use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curve is not immersed: min |γ'| = {min_speed:e}, mean |γ'| = {mean_speed:e}")]
    NotImmersed { min_speed: f64, mean_speed: f64 },

    #[error("winding number 0 is not allowed here")]
    ZeroWinding,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("random curve generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("arclength reparametrization did not converge (residual {residual:e})")]
    ReparametrizationFailed { residual: f64 },

    #[error("order {order} outside the supported range {min}..={max}")]
    UnsupportedOrder { order: u32, min: u32, max: u32 },

    #[error("window [{start}, {end}] has {reason}")]
    BadWindow { start: f64, end: f64, reason: String },

    #[error("trace did not terminate in a singularity")]
    NotSingular,

    #[error("no interior minimum of the shrinker residual in [{lo}, {hi}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    #[error("time step fell below dt_min = {dt_min:e} at t = {t}")]
    StepFailure { t: f64, dt_min: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
