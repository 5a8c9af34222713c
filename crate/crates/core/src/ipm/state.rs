use rug::Float;

use super::SolverError;
use crate::linalg::{cholesky, CholeskyFactor, PrecisionContext, SymMatrix};
use crate::sdp::{SdProblem, SdpError};

/// A strictly feasible primal/dual pair with cached `F(x)`, gap and potential.
#[derive(Clone, Debug)]
pub struct IterateState {
    pub x: Vec<Float>,
    pub z: SymMatrix<Float>,
    pub fx: SymMatrix<Float>,
    pub gap: Float,
    pub potential: Float,
}

/// `φ = (n + ν√n)·log gap − log det F − log det Z − n·log n`.
pub fn potential(n: usize, nu: &Float, gap: &Float, logdet_f: &Float, logdet_z: &Float) -> Float {
    let prec = gap.prec();
    let nf = Float::with_val(prec, n);
    let mut weight = Float::with_val(prec, nf.sqrt_ref());
    weight *= nu;
    weight += &nf;
    let mut phi = Float::with_val(prec, gap.ln_ref());
    phi *= &weight;
    phi -= logdet_f;
    phi -= logdet_z;
    let mut nlogn = Float::with_val(prec, nf.ln_ref());
    nlogn *= &nf;
    phi -= &nlogn;
    phi
}

impl IterateState {
    /// Builds the cached quantities, failing unless both `F(x)` and `Z` are
    /// positive definite at working precision.
    pub fn new(
        p: &SdProblem,
        x: Vec<Float>,
        z: SymMatrix<Float>,
        nu: &Float,
        ctx: &PrecisionContext,
    ) -> Result<Self, SdpError> {
        let fx = p.eval_f(&x, ctx)?;
        if z.n() != p.n() {
            return Err(SdpError::DimensionMismatch(format!("Z is {}x{}", z.n(), z.n())));
        }
        let (lf, lz) = Self::factors(&fx, &z, ctx).map_err(|e| SdpError::NotStrictlyFeasible(e.to_string()))?;
        Ok(Self::from_parts(x, z, fx, &lf, &lz, nu))
    }

    pub(crate) fn factors(
        fx: &SymMatrix<Float>,
        z: &SymMatrix<Float>,
        ctx: &PrecisionContext,
    ) -> Result<(CholeskyFactor, CholeskyFactor), SolverError> {
        let lf = cholesky(fx, ctx).map_err(|e| SolverError::NotStrictlyFeasible(format!("F(x): {e}")))?;
        let lz = cholesky(z, ctx).map_err(|e| SolverError::NotStrictlyFeasible(format!("Z: {e}")))?;
        Ok((lf, lz))
    }

    pub(crate) fn from_parts(
        x: Vec<Float>,
        z: SymMatrix<Float>,
        fx: SymMatrix<Float>,
        lf: &CholeskyFactor,
        lz: &CholeskyFactor,
        nu: &Float,
    ) -> Self {
        let gap = fx.dot(&z);
        let potential = potential(fx.n(), nu, &gap, &lf.log_det(), &lz.log_det());
        IterateState {
            x,
            z,
            fx,
            gap,
            potential,
        }
    }

    /// Re-checks strict feasibility with fresh Cholesky factorizations.
    pub fn is_strictly_feasible(&self, ctx: &PrecisionContext) -> bool {
        Self::factors(&self.fx, &self.z, ctx).is_ok()
    }

    pub fn set_prec(&mut self, prec: u32) {
        for v in &mut self.x {
            v.set_prec(prec);
        }
        self.z.set_prec(prec);
        self.fx.set_prec(prec);
        self.gap.set_prec(prec);
        self.potential.set_prec(prec);
    }
}
