use rug::{Float, Integer, Rational};

use super::{SdProblem, SdpError};
use crate::ipm::IterateState;
use crate::linalg::{solve_exact, sym_eigenvalues, PrecisionContext, SymMatrix};

/// Default bound `10⁶ · max(1, ‖c‖∞, maxᵢ‖Fᵢ‖∞)` for both M1 and M2.
pub fn default_big_m(p: &SdProblem) -> Rational {
    p.data_scale() * Rational::from(1_000_000)
}

/// Big-M embedding of an SDP.
///
/// The embedded primal is
///
/// ```text
/// minimize cᵀx + M1·t  s.t.  diag(F(x) + tI,  M2 − tr F(x),  t) ⪰ 0
/// ```
///
/// whose dual over `Ẑ = diag(Z, z, w)` reads
///
/// ```text
/// maximize −tr F₀(Z − zI) − M2·z  s.t.  tr Fᵢ(Z − zI) = cᵢ,  tr Z + w = M1.
/// ```
///
/// Variable `m` of the embedded problem (0-based) is `t`; dual slots `n` and
/// `n + 1` hold `z` and the trace slack `w`.
#[derive(Clone, Debug)]
pub struct BigMEmbedding {
    m1: Rational,
    m2: Rational,
    base: SdProblem,
    embedded: SdProblem,
}

impl BigMEmbedding {
    pub fn new(base: &SdProblem, m1: Rational, m2: Rational) -> Result<Self, SdpError> {
        if m1.cmp0().is_le() || m2.cmp0().is_le() {
            return Err(SdpError::NonPositiveBigM);
        }
        let n = base.n();
        let m = base.m();
        let lift = |fi: &SymMatrix<Rational>, trace_slot: Rational, t_slot: Rational| {
            SymMatrix::from_fn(n + 2, |i, j| {
                if i < n && j < n {
                    fi.get(i, j).clone()
                } else if i == j && i == n {
                    trace_slot.clone()
                } else if i == j && i == n + 1 {
                    t_slot.clone()
                } else {
                    Rational::new()
                }
            })
        };
        let mut f = Vec::with_capacity(m + 2);
        f.push(lift(base.f(0), Rational::from(&m2 - base.f(0).trace()), Rational::new()));
        for i in 1..=m {
            f.push(lift(base.f(i), -base.f(i).trace(), Rational::new()));
        }
        f.push(lift(&SymMatrix::identity(n), Rational::new(), Rational::from(1)));
        let mut c = base.c().to_vec();
        c.push(m1.clone());
        let embedded = SdProblem::new(c, f)?;
        Ok(BigMEmbedding {
            m1,
            m2,
            base: base.clone(),
            embedded,
        })
    }

    pub fn m1(&self) -> &Rational {
        &self.m1
    }

    pub fn m2(&self) -> &Rational {
        &self.m2
    }

    pub fn base(&self) -> &SdProblem {
        &self.base
    }

    pub fn embedded(&self) -> &SdProblem {
        &self.embedded
    }

    /// Splits an embedded primal point into `(x, t)`.
    pub fn recover_primal(&self, xhat: &[Float]) -> (Vec<Float>, Float) {
        let m = self.base.m();
        (xhat[..m].to_vec(), xhat[m].clone())
    }

    /// Splits an embedded dual point into `(Z − zI, z, w)`.
    pub fn recover_dual(&self, zhat: &SymMatrix<Float>) -> (SymMatrix<Float>, Float, Float) {
        let n = self.base.n();
        let z = zhat.get(n, n).clone();
        let w = zhat.get(n + 1, n + 1).clone();
        let prec = zhat.prec();
        let base = SymMatrix::from_fn(n, |i, j| {
            let mut v = Float::with_val(prec, zhat.get(i, j));
            if i == j {
                v -= &z;
            }
            v
        });
        (base, z, w)
    }

    /// Base primal objective: embedded objective minus `M1·t`.
    pub fn base_primal_objective(&self, xhat: &[Float], ctx: &PrecisionContext) -> Float {
        let (x, _) = self.recover_primal(xhat);
        self.base.primal_objective(&x, ctx)
    }

    /// Base dual objective `−tr F₀(Z − zI)`, i.e. the embedded one plus `M2·z`.
    pub fn base_dual_objective(&self, zhat: &SymMatrix<Float>, ctx: &PrecisionContext) -> Float {
        let (z, _, _) = self.recover_dual(zhat);
        self.base.dual_objective(&z, ctx)
    }

    /// Exact strictly feasible start for the embedded pair.
    ///
    /// Primal: `x̂₀ = (0, t₀)` with `t₀ = ⌈|λ_min(F₀)|⌉ + 1`. Dual: `Y` is the
    /// least-norm exact solution of `tr(FᵢY) = cᵢ`, `z₀ = ⌈max(0, −λ_min(Y))⌉ + 1`,
    /// `Ẑ₀ = diag(Y + z₀I, z₀, M1 − tr Y − n·z₀)`.
    pub fn initial_point_exact(&self, ctx: &PrecisionContext) -> Result<(Vec<Rational>, SymMatrix<Rational>), SdpError> {
        let base = &self.base;
        let n = base.n();
        let m = base.m();

        let t0 = margin_above(base.f(0), ctx)?;
        let trace_slack = Rational::from(&self.m2 - base.f(0).trace());
        if trace_slack.cmp0().is_le() {
            return Err(SdpError::MTooSmall(format!("M2 = {} does not exceed tr F0", self.m2)));
        }
        let mut x0 = vec![Rational::new(); m];
        x0.push(t0);

        let y = least_norm_dual(base)?;
        let z0 = margin_above(&y, ctx)?;
        let w0 = Rational::from(&self.m1 - y.trace()) - Rational::from(&z0 * n as u32);
        if w0.cmp0().is_le() {
            return Err(SdpError::MTooSmall(format!(
                "M1 = {} leaves no slack for tr Z (need more than {})",
                self.m1,
                Rational::from(y.trace() + Rational::from(&z0 * n as u32))
            )));
        }
        let zhat = SymMatrix::from_fn(n + 2, |i, j| {
            if i < n && j < n {
                let mut v = y.get(i, j).clone();
                if i == j {
                    v += &z0;
                }
                v
            } else if i == j && i == n {
                z0.clone()
            } else if i == j && i == n + 1 {
                w0.clone()
            } else {
                Rational::new()
            }
        });
        Ok((x0, zhat))
    }

    /// Strictly feasible start for the embedded problem at working precision.
    pub fn initial_point(&self, ctx: &PrecisionContext, nu: &Float) -> Result<IterateState, SdpError> {
        let (x0, z0) = self.initial_point_exact(ctx)?;
        let x: Vec<Float> = x0.iter().map(|v| Float::with_val(ctx.bits(), v)).collect();
        IterateState::new(&self.embedded, x, z0.to_float(ctx.bits()), nu, ctx)
    }
}

/// Integer `s > 0` such that `A + sI ≻ 0` with margin at least one.
fn margin_above(a: &SymMatrix<Rational>, ctx: &PrecisionContext) -> Result<Rational, SdpError> {
    let eig = sym_eigenvalues(&a.to_float(ctx.bits()), ctx)?;
    let lo = eig.first().cloned().unwrap_or_else(|| Float::new(ctx.bits()));
    let shift = if lo.is_sign_negative() {
        lo.abs().ceil().to_integer().expect("finite eigenvalue")
    } else {
        Integer::new()
    };
    Ok(Rational::from(shift + 1u32))
}

/// Least-norm `Y = Σ yⱼFⱼ` with `tr(FᵢY) = cᵢ`, solved exactly.
fn least_norm_dual(p: &SdProblem) -> Result<SymMatrix<Rational>, SdpError> {
    let m = p.m();
    let n = p.n();
    if m == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let gram: Vec<Vec<Rational>> = (1..=m)
        .map(|i| (1..=m).map(|j| p.f(i).dot(p.f(j))).collect())
        .collect();
    let coeffs = match solve_exact(&gram, p.c()) {
        Ok(y) => y,
        Err(_) => particular_solution(&gram, p.c()).ok_or(SdpError::InconsistentDual)?,
    };
    Ok(SymMatrix::from_fn(n, |r, s| {
        let mut v = Rational::new();
        for (yj, fj) in coeffs.iter().zip(&p.matrices()[1..]) {
            let e = fj.get(r, s);
            if e.cmp0().is_ne() {
                v += Rational::from(yj * e);
            }
        }
        v
    }))
}

/// Some solution of a singular but consistent square system.
fn particular_solution(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    let (reduced, pivots) = crate::linalg::rref(&rows);
    let ncols = a.first().map_or(0, Vec::len);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rational::new(); ncols];
    for (row, &col) in reduced.iter().zip(&pivots) {
        x[col] = row[ncols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky;

    fn toy() -> SdProblem {
        let f0 = SymMatrix::from_fn(2, |i, j| Rational::from(u32::from(i != j)));
        SdProblem::new(vec![Rational::from(1)], vec![f0, SymMatrix::identity(2)]).unwrap()
    }

    #[test]
    fn embedding_shape() {
        let e = BigMEmbedding::new(&toy(), Rational::from(100), Rational::from(100)).unwrap();
        assert_eq!(e.embedded().m(), 2);
        assert_eq!(e.embedded().n(), 4);
        assert_eq!(e.embedded().c()[1], 100);
        // F̂₀ trace slot holds M2 − tr F₀.
        assert_eq!(*e.embedded().f(0).get(2, 2), 100);
        assert_eq!(*e.embedded().f(1).get(2, 2), -2);
        assert_eq!(*e.embedded().f(2).get(3, 3), 1);
        assert!(BigMEmbedding::new(&toy(), Rational::from(0), Rational::from(1)).is_err());
    }

    #[test]
    fn initial_point_is_strictly_feasible() {
        let ctx = PrecisionContext::new(40);
        let e = BigMEmbedding::new(&toy(), Rational::from(100), Rational::from(100)).unwrap();
        let (x0, z0) = e.initial_point_exact(&ctx).unwrap();
        // Dual equalities hold exactly.
        for i in 1..=e.embedded().m() {
            assert_eq!(e.embedded().f(i).dot(&z0), e.embedded().c()[i - 1]);
        }
        let fx = e.embedded().eval_f_exact(&x0).unwrap();
        assert!(cholesky(&fx.to_float(ctx.bits()), &ctx).is_ok());
        assert!(cholesky(&z0.to_float(ctx.bits()), &ctx).is_ok());
    }

    #[test]
    fn tiny_bounds_are_rejected() {
        let ctx = PrecisionContext::new(40);
        let tiny = Rational::from((1, 1_000_000));
        let e = BigMEmbedding::new(&toy(), tiny.clone(), tiny).unwrap();
        assert!(matches!(e.initial_point_exact(&ctx), Err(SdpError::MTooSmall(_))));
    }

    #[test]
    fn recover_dual_subtracts_shift() {
        let ctx = PrecisionContext::new(40);
        let e = BigMEmbedding::new(&toy(), Rational::from(100), Rational::from(100)).unwrap();
        let (_, z0) = e.initial_point_exact(&ctx).unwrap();
        let (z, shift, w) = e.recover_dual(&z0.to_float(ctx.bits()));
        assert!(shift > 0 && w > 0);
        // tr F₁ (Z − zI) = c₁
        let f1 = e.base().f(1).to_float(ctx.bits());
        assert_eq!(f1.dot(&z), 1);
    }
}
