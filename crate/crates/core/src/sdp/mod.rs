//! Primal/dual semidefinite program pair
//!
//! ```text
//! primal:  minimize cᵀx        s.t.  F(x) = F₀ + Σ xᵢFᵢ ⪰ 0
//! dual:    maximize −tr(F₀Z)   s.t.  tr(FᵢZ) = cᵢ,  Z ⪰ 0
//! ```
//!
//! Problem data are exact rationals; iterates are arbitrary-precision floats.

mod bigm;
mod format;

pub use bigm::{default_big_m, BigMEmbedding};
pub use format::ParseError;

use rug::{Float, Rational};
use thiserror::Error;

use crate::linalg::{rank_exact, LinalgError, PrecisionContext, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix F{index} is {found}x{found}, expected {expected}x{expected}")]
    MatrixSize { index: usize, expected: usize, found: usize },
    #[error("Big-M bounds too small for a strictly feasible start ({0})")]
    MTooSmall(String),
    #[error("Big-M bounds must be positive")]
    NonPositiveBigM,
    #[error("dual equality constraints are inconsistent")]
    InconsistentDual,
    #[error("iterate is not strictly feasible: {0}")]
    NotStrictlyFeasible(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Problem data `(c, F₀, …, F_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdProblem {
    c: Vec<Rational>,
    f: Vec<SymMatrix<Rational>>,
}

impl SdProblem {
    /// `f[0]` is `F₀`; `f.len()` must equal `c.len() + 1`.
    pub fn new(c: Vec<Rational>, f: Vec<SymMatrix<Rational>>) -> Result<Self, SdpError> {
        if f.len() != c.len() + 1 {
            return Err(SdpError::DimensionMismatch(format!(
                "{} objective entries need {} matrices, got {}",
                c.len(),
                c.len() + 1,
                f.len()
            )));
        }
        let n = f[0].n();
        for (index, fi) in f.iter().enumerate() {
            if fi.n() != n {
                return Err(SdpError::MatrixSize {
                    index,
                    expected: n,
                    found: fi.n(),
                });
            }
        }
        let p = SdProblem { c, f };
        if p.m() * p.n() * p.n() <= 40_000 && !p.constraints_independent() {
            log::warn!("constraint matrices F1..F{} are linearly dependent", p.m());
        }
        Ok(p)
    }

    /// Number of primal variables.
    pub fn m(&self) -> usize {
        self.c.len()
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.f[0].n()
    }

    pub fn c(&self) -> &[Rational] {
        &self.c
    }

    /// `F_i` for `i` in `0..=m`.
    pub fn f(&self, i: usize) -> &SymMatrix<Rational> {
        &self.f[i]
    }

    pub fn matrices(&self) -> &[SymMatrix<Rational>] {
        &self.f
    }

    /// Exact rank test on the upper-triangle vectorizations of `F₁…F_m`.
    pub fn constraints_independent(&self) -> bool {
        let rows: Vec<Vec<Rational>> = self.f[1..]
            .iter()
            .map(|fi| fi.upper().map(|(_, _, v)| v.clone()).collect())
            .collect();
        rank_exact(&rows) == self.m()
    }

    fn check_x<T>(&self, x: &[T]) -> Result<(), SdpError> {
        if x.len() != self.m() {
            return Err(SdpError::DimensionMismatch(format!(
                "x has {} entries, problem has {} variables",
                x.len(),
                self.m()
            )));
        }
        Ok(())
    }

    fn check_z<T: Clone>(&self, z: &SymMatrix<T>) -> Result<(), SdpError> {
        if z.n() != self.n() {
            return Err(SdpError::DimensionMismatch(format!(
                "Z is {}x{}, problem matrices are {}x{}",
                z.n(),
                z.n(),
                self.n(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `F(x) = F₀ + Σ xᵢFᵢ`.
    pub fn eval_f(&self, x: &[Float], ctx: &PrecisionContext) -> Result<SymMatrix<Float>, SdpError> {
        self.check_x(x)?;
        let prec = ctx.bits();
        Ok(SymMatrix::from_fn(self.n(), |r, s| {
            let mut v = Float::with_val(prec, self.f[0].get(r, s));
            for (xi, fi) in x.iter().zip(&self.f[1..]) {
                let e = fi.get(r, s);
                if e.cmp0().is_ne() {
                    v += Float::with_val(prec, xi * e);
                }
            }
            v
        }))
    }

    /// Exact `F(x)` for rational `x`.
    pub fn eval_f_exact(&self, x: &[Rational]) -> Result<SymMatrix<Rational>, SdpError> {
        self.check_x(x)?;
        Ok(SymMatrix::from_fn(self.n(), |r, s| {
            let mut v = self.f[0].get(r, s).clone();
            for (xi, fi) in x.iter().zip(&self.f[1..]) {
                let e = fi.get(r, s);
                if e.cmp0().is_ne() {
                    v += Rational::from(xi * e);
                }
            }
            v
        }))
    }

    /// Duality gap `tr(F(x) Z)`.
    pub fn duality_gap(&self, x: &[Float], z: &SymMatrix<Float>, ctx: &PrecisionContext) -> Result<Float, SdpError> {
        self.check_z(z)?;
        Ok(self.eval_f(x, ctx)?.dot(z))
    }

    /// `cᵀx`.
    pub fn primal_objective(&self, x: &[Float], ctx: &PrecisionContext) -> Float {
        let mut s = Float::new(ctx.bits());
        for (ci, xi) in self.c.iter().zip(x) {
            s += Float::with_val(ctx.bits(), xi * ci);
        }
        s
    }

    /// `−tr(F₀ Z)`.
    pub fn dual_objective(&self, z: &SymMatrix<Float>, ctx: &PrecisionContext) -> Float {
        -self.f[0].to_float(ctx.bits()).dot(z)
    }

    /// `max_i |tr(FᵢZ) − cᵢ|`.
    pub fn dual_residual(&self, z: &SymMatrix<Float>, ctx: &PrecisionContext) -> Float {
        let prec = ctx.bits();
        let mut worst = Float::new(prec);
        for (ci, fi) in self.c.iter().zip(&self.f[1..]) {
            let mut r = fi.to_float(prec).dot(z);
            r -= ci;
            r.abs_mut();
            if r > worst {
                worst = r;
            }
        }
        worst
    }

    /// `max(1, ‖c‖∞, maxᵢ ‖Fᵢ‖∞)`, the data scale used for default Big-M bounds.
    pub fn data_scale(&self) -> Rational {
        let mut s = Rational::from(1);
        for ci in &self.c {
            let a = Rational::from(ci.abs_ref());
            if a > s {
                s = a;
            }
        }
        for fi in &self.f {
            let a = fi.max_abs();
            if a > s {
                s = a;
            }
        }
        s
    }

    /// The same problem with the objective multiplied by `alpha`.
    pub fn scale_objective(&self, alpha: &Rational) -> SdProblem {
        SdProblem {
            c: self.c.iter().map(|ci| Rational::from(ci * alpha)).collect(),
            f: self.f.clone(),
        }
    }
}
