//! Dense symmetric linear algebra over arbitrary-precision floats and exact
//! rationals.
//!
//! Floating-point routines work at the binary precision of a
//! [`PrecisionContext`], which always carries [`GUARD_DIGITS`] extra decimal
//! digits beyond what the caller asked for. Exact routines operate on
//! [`Rational`] entries and never round.

mod exact;
mod float;
mod matrix;

pub use exact::{det_exact, ldlt_exact, rank_exact, rref, solve_exact, PsdDecision};
pub use float::{cholesky, solve_spd, sym_eigenvalues, CholeskyFactor, MAX_JACOBI_SWEEPS};
pub use matrix::{Matrix, SymMatrix};

pub use rug::{Float as BigFloat, Integer, Rational};

use rug::Float;
use thiserror::Error;

/// Decimal guard digits appended to every requested precision.
pub const GUARD_DIGITS: u32 = 10;

/// Smallest supported working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },
    #[error("Jacobi sweeps did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value encountered")]
    NonFinite,
}

/// Working precision, expressed in significant decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    /// Panics if `digits` is below [`MIN_DIGITS`]; use [`PrecisionContext::try_new`]
    /// for user input.
    pub fn new(digits: u32) -> Self {
        Self::try_new(digits).expect("precision below minimum")
    }

    pub fn try_new(digits: u32) -> Option<Self> {
        (digits >= MIN_DIGITS).then_some(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision used for arithmetic: requested plus guard digits,
    /// converted to bits and rounded up.
    pub fn bits(&self) -> u32 {
        ((self.digits + GUARD_DIGITS) as f64 * std::f64::consts::LOG2_10).ceil() as u32
    }

    /// The acceptance threshold `10^(-digits + GUARD_DIGITS)`.
    pub fn tolerance(&self) -> Float {
        pow10(self.bits(), -(self.digits as i32 - GUARD_DIGITS as i32))
    }

    pub fn with_digits(&self, digits: u32) -> Self {
        PrecisionContext::new(digits)
    }

    pub fn float<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        let mut f = Float::new(self.bits());
        rug::Assign::assign(&mut f, v);
        f
    }
}

/// `10^exp` rounded to `prec` bits.
pub fn pow10(prec: u32, exp: i32) -> Float {
    use rug::ops::Pow;
    let ten = Float::with_val(prec, 10);
    Float::with_val(prec, ten.pow(exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_bits_round_up() {
        let ctx = PrecisionContext::new(60);
        assert_eq!(ctx.bits(), 233);
        assert!(PrecisionContext::try_new(14).is_none());
        let tol = ctx.tolerance();
        assert_eq!(tol.to_f64(), 1e-50);
    }
}
