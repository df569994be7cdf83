// SPDX-License-Identifier: Apache-2.0

use crate::model::{Basis, BathLabel};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // configuration
    #[error("level ordering violated: omega_b = {omega_b} exceeds omega_a = {omega_a}")]
    LevelOrdering { omega_a: f64, omega_b: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("duplicate bath label `{0}`")]
    DuplicateBath(BathLabel),
    #[error("missing bath label `{0}`")]
    MissingBath(BathLabel),

    // numerics and preconditions
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate excited levels: omega_a = omega_b with g = 0 leaves the work transition at zero frequency")]
    DegenerateLevels,
    #[error("full secular generator requires g=0 (got g = {0})")]
    RequiresUncoupled(f64),
    #[error("basis mismatch: expected {expected} basis, got {found}")]
    BasisMismatch { expected: Basis, found: Basis },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("degenerate steady state: null space dimension {0}")]
    DegenerateSteadyState(usize),
    #[error("steady-state linear system is singular")]
    SingularSystem,
    #[error("steady-state residual {residual:e} exceeds bound {bound:e}")]
    SteadyStateResidual { residual: f64, bound: f64 },
    #[error(
        "step size too large: trace drift {drift:e} at t = {time}; try dt <= {suggested_dt:e}"
    )]
    StepTooLarge {
        drift: f64,
        time: f64,
        suggested_dt: f64,
    },
    #[error("positivity lost at t = {time}: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityLost { time: f64, min_eigenvalue: f64 },
    #[error("density matrix is not diagonal (largest coherence {0:e})")]
    NotDiagonal(f64),
    #[error("negative effective temperature: population inversion on level {0}")]
    NegativeEffectiveTemperature(&'static str),
    #[error("coefficient of performance undefined: work current {0:e} is numerically zero")]
    UndefinedCop(f64),

    // analysis
    #[error("no working point in bracket [{lo}, {hi}]")]
    NoWorkingPoint { lo: f64, hi: f64 },
    #[error("no equilibrium control temperature (Tc <= xi*Th)")]
    NoEquilibrium,
    #[error("sample below measurable range: no Jh sign change up to Tw = {tw_max}")]
    BelowMeasurableRange { tw_max: f64 },
    #[error("amplifier factor undefined here: work-current variation {0:e} below noise floor")]
    AmplifierUndefined(f64),
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("csv output: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl Error {
    /// Whether the error stems from a bad configuration rather than from the
    /// numerics. The CLI maps these to exit code 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::LevelOrdering { .. }
                | Error::NonPositive { .. }
                | Error::Negative { .. }
                | Error::NonFinite { .. }
                | Error::DuplicateBath(_)
                | Error::MissingBath(_)
                | Error::DegenerateLevels
                | Error::RequiresUncoupled(_)
                | Error::InvalidGrid(_)
        )
    }
}
