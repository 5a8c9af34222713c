use rug::Float;

use super::{FloatProblem, IterateState, SolverError};
use crate::linalg::{cholesky, SymMatrix};

/// Search directions `(δx, δZ)` solving
///
/// ```text
/// F δZ F + Σ δxᵢ Fᵢ = −ρ F Z F + F
/// tr(Fⱼ δZ) = 0,  j = 1..m
/// ```
#[derive(Clone, Debug)]
pub struct DirectionPair {
    pub dx: Vec<Float>,
    pub dz: SymMatrix<Float>,
    pub rho: Float,
    /// `δF = Σ δxᵢ Fᵢ`.
    pub df: SymMatrix<Float>,
    /// Entrywise `|F⁻¹| + ρ|Z| + Σ |δxᵢ||F⁻¹FᵢF⁻¹|`, the magnitude of the
    /// terms that cancel in `δZ`.
    pub dz_scale: SymMatrix<Float>,
}

/// Backward-error residuals of the direction system, each measured against
/// the magnitude of the terms it is computed from, with `δZ` replaced by
/// [`DirectionPair::dz_scale`].
#[derive(Clone, Debug)]
pub struct DirectionResidual {
    /// `‖F δZ F + δF + ρFZF − F‖∞ / ‖|F| S |F| + |δF| + ρ|F||Z||F| + |F|‖∞`.
    pub system: Float,
    /// `maxⱼ |tr(Fⱼ δZ)| / Σ|Fⱼ| ∘ S`.
    pub orthogonality: Float,
}

/// Primal-based directions with `ρ = (n + ν√n) / tr(F(x)Z)`.
///
/// Substituting `δZ = F⁻¹ − ρZ − Σ δxᵢ F⁻¹FᵢF⁻¹` into the trace conditions
/// leaves the `m × m` system `H δx = b` with `Hⱼᵢ = tr(F⁻¹FⱼF⁻¹Fᵢ)` and
/// `bⱼ = tr(FⱼF⁻¹) − ρ tr(FⱼZ)`.
pub fn search_directions(p: &FloatProblem, state: &IterateState, nu: &Float) -> Result<DirectionPair, SolverError> {
    let ctx = p.ctx();
    let prec = ctx.bits();
    let n = p.n();
    let m = p.m();

    let lf = cholesky(&state.fx, ctx).map_err(|e| SolverError::NotStrictlyFeasible(format!("F(x): {e}")))?;
    let g = lf.inverse();

    let nf = Float::with_val(prec, n);
    let mut rho = Float::with_val(prec, nf.sqrt_ref());
    rho *= nu;
    rho += &nf;
    rho /= &state.gap;

    // Pᵢ = G Fᵢ G, accumulated over the nonzeros of Fᵢ (upper triangle of P).
    let sandwiches: Vec<SymMatrix<Float>> = (1..=m)
        .map(|i| {
            let mut acc: Vec<Float> = (0..n * n).map(|_| Float::new(prec)).collect();
            for (k, l, v) in &p.nz[i] {
                for a in 0..n {
                    let u = Float::with_val(prec, g.get(a, *k) * v);
                    let gl = g.row(*l);
                    for b in a..n {
                        acc[a * n + b] += &u * &gl[b];
                    }
                }
            }
            SymMatrix::from_fn(n, |a, b| acc[a * n + b].clone())
        })
        .collect();

    let mut h = SymMatrix::zeros_float(m, prec);
    for i in 0..m {
        for j in i..m {
            h.set(i, j, p.trace_with(j + 1, &sandwiches[i]));
        }
    }
    let rhs: Vec<Float> = (1..=m)
        .map(|j| {
            let mut b = p.trace_with(j, &g);
            b -= Float::with_val(prec, &rho * &p.trace_with(j, &state.z));
            b
        })
        .collect();
    let dx = if m == 0 {
        Vec::new()
    } else {
        cholesky(&h, ctx).map_err(|_| SolverError::SingularSystem)?.solve(&rhs)
    };
    if dx.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::SingularSystem);
    }

    let mut dz_flat: Vec<Float> = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            let mut v = Float::with_val(prec, g.get(a, b));
            v -= Float::with_val(prec, &rho * state.z.get(a, b));
            v
        })
        .collect();
    let mut scale_flat: Vec<Float> = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            let mut v = Float::with_val(prec, g.get(a, b).abs_ref());
            v += Float::with_val(prec, &rho * state.z.get(a, b)).abs();
            v
        })
        .collect();
    for (dxi, pi) in dx.iter().zip(&sandwiches) {
        let adx = Float::with_val(prec, dxi.abs_ref());
        for a in 0..n {
            for b in a..n {
                dz_flat[a * n + b] -= dxi * pi.get(a, b);
                scale_flat[a * n + b] += Float::with_val(prec, &adx * pi.get(a, b)).abs();
            }
        }
    }
    let dz = SymMatrix::from_fn(n, |a, b| dz_flat[a * n + b].clone());
    let dz_scale = SymMatrix::from_fn(n, |a, b| scale_flat[a * n + b].clone());
    let df = p.linear_part(&dx);
    Ok(DirectionPair { dx, dz, rho, df, dz_scale })
}

impl DirectionPair {
    /// Residuals of both equations of the direction system at `state`.
    pub fn residual(&self, p: &FloatProblem, state: &IterateState) -> DirectionResidual {
        let prec = p.ctx().bits();
        let f = &state.fx;
        let fdzf = sandwich(f, &self.dz);
        let fzf = sandwich(f, &state.z).scale(&self.rho);
        let fa = f.map(|v| Float::with_val(prec, v.abs_ref()));
        let za = state.z.map(|v| Float::with_val(prec, v.abs_ref()));
        let fsf = sandwich(&fa, &self.dz_scale);
        let fzfa = sandwich(&fa, &za).scale(&self.rho);
        let n = f.n();
        let mut worst = Float::new(prec);
        let mut scale = Float::with_val(prec, 1e-300);
        for a in 0..n {
            for b in a..n {
                let mut r = Float::with_val(prec, fdzf.get(a, b) + self.df.get(a, b));
                r += fzf.get(a, b);
                r -= f.get(a, b);
                r.abs_mut();
                if r > worst {
                    worst = r;
                }
                let mut s = Float::with_val(prec, self.df.get(a, b).abs_ref());
                s += fsf.get(a, b);
                s += fzfa.get(a, b);
                s += fa.get(a, b);
                if s > scale {
                    scale = s;
                }
            }
        }
        let system = worst / scale;

        let mut orthogonality = Float::new(prec);
        for j in 1..=p.m() {
            let t = p.trace_with(j, &self.dz).abs();
            let s = p.trace_scale(j, &self.dz_scale);
            if s.is_zero() {
                continue;
            }
            let rel = t / s;
            if rel > orthogonality {
                orthogonality = rel;
            }
        }
        DirectionResidual { system, orthogonality }
    }
}

/// `A S A` for symmetric `A`, `S`.
fn sandwich(a: &SymMatrix<Float>, s: &SymMatrix<Float>) -> SymMatrix<Float> {
    let n = a.n();
    let prec = a.prec();
    let as_ = a.mul(s);
    SymMatrix::from_fn(n, |i, j| {
        let mut acc = Float::new(prec);
        for k in 0..n {
            acc += as_.get(i, k) * a.get(k, j);
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PrecisionContext;
    use crate::sdp::SdProblem;
    use rug::Rational;

    #[test]
    fn identity_pair_closed_form() {
        // F(x) = I, Z = I, m = 1, F₁ = diag(1, −1), c₁ = tr(F₁ Z) = 0.
        let ctx = PrecisionContext::new(40);
        let f1 = SymMatrix::from_fn(2, |i, j| Rational::from(if i != j { 0 } else if i == 0 { 1 } else { -1 }));
        let p = SdProblem::new(vec![Rational::new()], vec![SymMatrix::identity(2), f1]).unwrap();
        let nu = ctx.float(5);
        let state = IterateState::new(&p, vec![ctx.float(0)], SymMatrix::identity_float(2, ctx.bits()), &nu, &ctx).unwrap();
        let fp = FloatProblem::new(&p, &ctx);
        let d = search_directions(&fp, &state, &nu).unwrap();
        // H = tr(F₁F₁) = 2, b = tr(F₁) − ρ tr(F₁) = 0 ⇒ δx = 0, δZ = (1 − ρ) I.
        assert!(d.dx[0].clone().abs() <= ctx.tolerance());
        let want = Float::with_val(ctx.bits(), 1 - &d.rho);
        for i in 0..2 {
            assert!(Float::with_val(ctx.bits(), d.dz.get(i, i) - &want).abs() <= ctx.tolerance());
        }
        let r = d.residual(&fp, &state);
        assert!(r.system <= ctx.tolerance());
        assert!(r.orthogonality <= ctx.tolerance());
    }
}
