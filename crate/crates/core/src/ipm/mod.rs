//! Potential-reduction interior-point method.
//!
//! Each iteration computes a primal Newton direction of the potential
//!
//! ```text
//! φ(x, Z) = (n + ν√n)·log tr(F(x)Z) − log det F(x) − log det Z − n·log n
//! ```
//!
//! (the dual direction is the by-product `δZ` of the same linear system),
//! then picks the two step lengths by a plane search and updates both
//! iterates. The potential strictly decreases at every accepted step, which
//! drives the duality gap to zero while keeping the pair strictly feasible.

mod data;
mod direction;
mod plane;
mod solver;
mod state;

pub use data::FloatProblem;
pub use direction::{search_directions, DirectionPair, DirectionResidual};
pub use plane::{
    plane_search_minimize, plane_search_setup, PlaneSearchProblem, PlaneSearchResult, UNBOUNDED_STEP_CAP,
};
pub use solver::{solve, solve_with_big_m, IterationLog, IterationRecord, PotentialReduction, Solution, StepOutcome};
pub use state::{potential, IterateState};

use rug::{Float, Rational};
use thiserror::Error;

use crate::linalg::{pow10, LinalgError, PrecisionContext};
use crate::sdp::SdpError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("iterate is not strictly feasible: {0}")]
    NotStrictlyFeasible(String),
    #[error("direction system is singular")]
    SingularSystem,
    #[error("plane search made no progress")]
    LineSearchStall,
    #[error("iteration limit reached with duality gap {gap}")]
    MaxIterations { gap: String, best: Box<Solution> },
    #[error("precision escalation exceeded {max_digits} digits")]
    PrecisionExhausted { max_digits: u32 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] SdpError),
}

impl SolverError {
    /// Errors that a retry at higher precision may cure.
    pub fn is_precision_related(&self) -> bool {
        matches!(
            self,
            SolverError::SingularSystem
                | SolverError::LineSearchStall
                | SolverError::NotStrictlyFeasible(_)
                | SolverError::Linalg(_)
        )
    }
}

/// When and how far to raise the working precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscalationPolicy {
    /// Decimal digits added per escalation.
    pub digit_step: u32,
    /// Escalation fails once this many digits would be exceeded.
    pub max_digits: u32,
    /// Retries of a single iteration before giving up at the current digits.
    pub stall_threshold: u32,
}

impl Default for EscalationPolicy {
    fn default() -> Self {
        EscalationPolicy {
            digit_step: 15,
            max_digits: 8 * 15,
            stall_threshold: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Weight `ν` of the gap term.
    pub nu: Rational,
    /// Duality-gap tolerance; `None` means `10^-(digits - 10)`.
    pub eps: Option<Rational>,
    pub max_iter: usize,
    pub ctx: PrecisionContext,
    /// Plane-search stationarity tolerance; `None` means `10^-(digits / 2)`.
    pub plane_tol: Option<Rational>,
    pub escalation: EscalationPolicy,
}

impl SolverConfig {
    pub fn new(digits: u32) -> Self {
        SolverConfig {
            nu: Rational::from(5),
            eps: None,
            max_iter: 200,
            ctx: PrecisionContext::new(digits),
            plane_tol: None,
            escalation: EscalationPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.nu.cmp0().is_le() {
            return Err(SolverError::InvalidConfig("nu must be positive".into()));
        }
        if self.eps.as_ref().is_some_and(|e| e.cmp0().is_le()) {
            return Err(SolverError::InvalidConfig("eps must be positive".into()));
        }
        if self.plane_tol.as_ref().is_some_and(|e| e.cmp0().is_le()) {
            return Err(SolverError::InvalidConfig("plane_tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(SolverError::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn eps_at(&self, ctx: &PrecisionContext) -> Float {
        match &self.eps {
            Some(e) => Float::with_val(ctx.bits(), e),
            None => pow10(ctx.bits(), -(self.ctx.digits() as i32 - 10)),
        }
    }

    pub fn plane_tol_at(&self, ctx: &PrecisionContext) -> Float {
        match &self.plane_tol {
            Some(t) => Float::with_val(ctx.bits(), t),
            None => pow10(ctx.bits(), -(ctx.digits() as i32 / 2)),
        }
    }

    pub fn nu_at(&self, ctx: &PrecisionContext) -> Float {
        Float::with_val(ctx.bits(), &self.nu)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::new(60)
    }
}
