use std::cmp::Ordering;

use rug::float::Special;
use rug::Float;

use super::{DirectionPair, FloatProblem, IterateState, SolverError};
use crate::linalg::{cholesky, sym_eigenvalues, CholeskyFactor};

/// Bound on `|p|` and `|q|` used when the feasible interval is unbounded.
pub const UNBOUNDED_STEP_CAP: f64 = 1e10;

const MAX_PLANE_ITERS: usize = 200;
const MAX_BISECTIONS: usize = 400;

/// The two-variable step-length problem
///
/// ```text
/// minimize (n + ν√n)·log(1 + c₁p + c₂q) − Σ log(1 + pμᵢ) − Σ log(1 + qνᵢ)
/// ```
///
/// where `μ`, `ν` are the eigenvalues of `L_F⁻¹ δF L_F⁻ᵀ` and `L_Z⁻¹ δZ L_Z⁻ᵀ`.
#[derive(Clone, Debug)]
pub struct PlaneSearchProblem {
    pub c1: Float,
    pub c2: Float,
    pub mu: Vec<Float>,
    pub nuev: Vec<Float>,
    pub p_min: Float,
    pub p_max: Float,
    pub q_min: Float,
    pub q_max: Float,
}

#[derive(Clone, Debug)]
pub struct PlaneSearchResult {
    pub p: Float,
    pub q: Float,
    pub value: Float,
    /// Objective at the starting point of the search.
    pub start_value: Float,
    pub iterations: usize,
    /// `‖∇‖∞ <= plane_tol` at the returned point.
    pub stationary: bool,
}

/// Interval `{t : 1 + t·λᵢ > 0 ∀i}`.
fn feasible_interval(eig: &[Float], prec: u32) -> (Float, Float) {
    let mut lo = Float::with_val(prec, Special::NegInfinity);
    let mut hi = Float::with_val(prec, Special::Infinity);
    for l in eig {
        if l.is_zero() {
            continue;
        }
        let mut t = Float::with_val(prec, l.recip_ref());
        t = -t;
        if l.is_sign_positive() {
            if t > lo {
                lo = t;
            }
        } else if t < hi {
            hi = t;
        }
    }
    (lo, hi)
}

/// Builds the plane-search data. The gap coefficients are evaluated as
/// `tr(δF Z)/gap` and `tr(F δZ)/gap`, which equal `cᵀδx/gap` and
/// `tr(F₀δZ)/gap` for a dual-feasible `Z`, without the rounding drift of the
/// equality constraints.
pub fn plane_search_setup(
    p: &FloatProblem,
    state: &IterateState,
    dir: &DirectionPair,
) -> Result<PlaneSearchProblem, SolverError> {
    let ctx = p.ctx();
    let prec = ctx.bits();
    let lf = cholesky(&state.fx, ctx).map_err(|e| SolverError::NotStrictlyFeasible(format!("F(x): {e}")))?;
    let lz = cholesky(&state.z, ctx).map_err(|e| SolverError::NotStrictlyFeasible(format!("Z: {e}")))?;
    setup_with_factors(p, state, dir, &lf, &lz, prec)
}

pub(crate) fn setup_with_factors(
    p: &FloatProblem,
    state: &IterateState,
    dir: &DirectionPair,
    lf: &CholeskyFactor,
    lz: &CholeskyFactor,
    prec: u32,
) -> Result<PlaneSearchProblem, SolverError> {
    let ctx = p.ctx();
    let mu = sym_eigenvalues(&lf.whiten(&dir.df), ctx)?;
    let nuev = sym_eigenvalues(&lz.whiten(&dir.dz), ctx)?;
    let c1 = Float::with_val(prec, dir.df.dot(&state.z) / &state.gap);
    let c2 = Float::with_val(prec, state.fx.dot(&dir.dz) / &state.gap);
    let (p_min, p_max) = feasible_interval(&mu, prec);
    let (q_min, q_max) = feasible_interval(&nuev, prec);
    Ok(PlaneSearchProblem {
        c1,
        c2,
        mu,
        nuev,
        p_min,
        p_max,
        q_min,
        q_max,
    })
}

impl PlaneSearchProblem {
    fn prec(&self) -> u32 {
        self.c1.prec()
    }

    /// `n + ν√n`.
    pub fn weight(n: usize, nu: &Float) -> Float {
        let prec = nu.prec();
        let nf = Float::with_val(prec, n);
        let mut w = Float::with_val(prec, nf.sqrt_ref());
        w *= nu;
        w += &nf;
        w
    }

    /// Objective value, or `None` outside the open feasible region.
    pub fn objective(&self, weight: &Float, p: &Float, q: &Float) -> Option<Float> {
        let prec = self.prec();
        let s = self.gap_ratio(p, q);
        if s.cmp0() != Some(Ordering::Greater) {
            return None;
        }
        let mut v = Float::with_val(prec, s.ln_ref());
        v *= weight;
        for (eig, t) in [(&self.mu, p), (&self.nuev, q)] {
            for l in eig {
                let mut a = Float::with_val(prec, t * l);
                a += 1u32;
                if a.cmp0() != Some(Ordering::Greater) {
                    return None;
                }
                a.ln_mut();
                v -= &a;
            }
        }
        Some(v)
    }

    /// `1 + c₁p + c₂q`.
    pub fn gap_ratio(&self, p: &Float, q: &Float) -> Float {
        let prec = self.prec();
        let mut s = Float::with_val(prec, &self.c1 * p);
        s += &self.c2 * q;
        s += 1u32;
        s
    }

    /// Whether `(p, q)` lies strictly inside every log argument.
    pub fn is_interior(&self, p: &Float, q: &Float) -> bool {
        let prec = self.prec();
        let pos = |a: Float| a.cmp0() == Some(Ordering::Greater);
        pos(self.gap_ratio(p, q))
            && self.mu.iter().all(|l| pos(Float::with_val(prec, p * l) + 1u32))
            && self.nuev.iter().all(|l| pos(Float::with_val(prec, q * l) + 1u32))
    }

    fn gradient_hessian(&self, weight: &Float, p: &Float, q: &Float) -> ([Float; 2], [Float; 3]) {
        let prec = self.prec();
        let s = self.gap_ratio(p, q);
        let a = Float::with_val(prec, weight / &s);
        let mut gp = Float::with_val(prec, &a * &self.c1);
        let mut gq = Float::with_val(prec, &a * &self.c2);
        let a2 = Float::with_val(prec, &a / &s);
        let mut hpp = Float::with_val(prec, &self.c1 * &self.c1);
        hpp *= &a2;
        hpp = -hpp;
        let mut hqq = Float::with_val(prec, &self.c2 * &self.c2);
        hqq *= &a2;
        hqq = -hqq;
        let mut hpq = Float::with_val(prec, &self.c1 * &self.c2);
        hpq *= &a2;
        hpq = -hpq;
        for (eig, t, g, h) in [(&self.mu, p, &mut gp, &mut hpp), (&self.nuev, q, &mut gq, &mut hqq)] {
            for l in eig {
                let mut d = Float::with_val(prec, t * l);
                d += 1u32;
                let r = Float::with_val(prec, l / &d);
                *g -= &r;
                *h += r.square();
            }
        }
        ([gp, gq], [hpp, hpq, hqq])
    }

    /// Directional derivative `∇φ(p + r·dp, q + r·dq) · (dp, dq)`.
    fn slope(&self, weight: &Float, p: &Float, q: &Float, dp: &Float, dq: &Float) -> Float {
        let prec = self.prec();
        let s = self.gap_ratio(p, q);
        let mut ds = Float::with_val(prec, &self.c1 * dp);
        ds += &self.c2 * dq;
        let mut v = Float::with_val(prec, weight * &ds);
        v /= &s;
        for (eig, t, dt) in [(&self.mu, p, dp), (&self.nuev, q, dq)] {
            if dt.is_zero() {
                continue;
            }
            for l in eig {
                let mut d = Float::with_val(prec, t * l);
                d += 1u32;
                let mut r = Float::with_val(prec, l * dt);
                r /= &d;
                v -= &r;
            }
        }
        v
    }

    /// Largest `r` keeping `(p, q) + r·(dp, dq)` inside the region and the step cap.
    fn max_step(&self, p: &Float, q: &Float, dp: &Float, dq: &Float) -> Float {
        let prec = self.prec();
        let cap = Float::with_val(prec, UNBOUNDED_STEP_CAP);
        let mut best = Float::with_val(prec, Special::Infinity);
        let mut limit = |num: Float, den: Float| {
            // Constraint num + r·den > 0 with num > 0.
            if den.cmp0() == Some(Ordering::Less) {
                let r = Float::with_val(prec, -(num / den));
                if r < best {
                    best = r;
                }
            }
        };
        for (eig, t, dt) in [(&self.mu, p, dp), (&self.nuev, q, dq)] {
            for l in eig {
                let mut num = Float::with_val(prec, t * l);
                num += 1u32;
                limit(num, Float::with_val(prec, l * dt));
            }
            // |t + r·dt| <= cap
            limit(Float::with_val(prec, &cap - t), Float::with_val(prec, -dt));
            limit(Float::with_val(prec, &cap + t), Float::with_val(prec, dt));
        }
        let mut ds = Float::with_val(prec, &self.c1 * dp);
        ds += &self.c2 * dq;
        limit(self.gap_ratio(p, q), ds);
        best
    }
}

/// Minimizes the plane-search objective from `(p̂/2, 0)`, `p̂` the largest
/// feasible `p` (or 1 when unbounded). Each step follows the Newton direction
/// when the 2×2 Hessian is positive definite and the negative gradient
/// otherwise; the step length is found by bisection on the sign of the
/// directional derivative over the feasible part of the ray.
pub fn plane_search_minimize(
    ps: &PlaneSearchProblem,
    n: usize,
    nu: &Float,
    plane_tol: &Float,
) -> Result<PlaneSearchResult, SolverError> {
    let prec = ps.prec();
    let weight = PlaneSearchProblem::weight(n, nu);
    let zero = Float::new(prec);

    let p_hat = if ps.p_max.is_infinite() {
        Float::with_val(prec, 1)
    } else {
        ps.p_max.clone().min(&Float::with_val(prec, UNBOUNDED_STEP_CAP))
    };
    let mut p = Float::with_val(prec, &p_hat / 2u32);
    let mut q = zero.clone();
    let mut value = match ps.objective(&weight, &p, &q) {
        Some(v) if v.cmp0() != Some(Ordering::Greater) => v,
        _ => {
            p = zero.clone();
            zero.clone()
        }
    };
    let start_value = value.clone();

    let cap = Float::with_val(prec, UNBOUNDED_STEP_CAP);
    let mut stationary = false;
    let mut iterations = 0;
    while iterations < MAX_PLANE_ITERS {
        let ([mut gp, mut gq], [hpp, hpq, hqq]) = ps.gradient_hessian(&weight, &p, &q);
        // Components pushing against the step cap are dropped.
        let clipped_p = project_at_cap(&p, &mut gp, &cap);
        let clipped_q = project_at_cap(&q, &mut gq, &cap);
        if gp.clone().abs().max(&gq.clone().abs()) <= *plane_tol {
            stationary = true;
            break;
        }
        iterations += 1;
        let det = Float::with_val(prec, &hpp * &hqq) - Float::with_val(prec, &hpq * &hpq);
        let newton = !clipped_p
            && !clipped_q
            && hpp.cmp0() == Some(Ordering::Greater)
            && det.cmp0() == Some(Ordering::Greater);
        let (mut dp, mut dq) = if newton {
            // d = −H⁻¹g
            let dp = Float::with_val(prec, &hqq * &gp) - Float::with_val(prec, &hpq * &gq);
            let dq = Float::with_val(prec, &hpp * &gq) - Float::with_val(prec, &hpq * &gp);
            (-(dp / &det), -(dq / &det))
        } else {
            (-gp.clone(), -gq.clone())
        };
        if ps.slope(&weight, &p, &q, &dp, &dq).cmp0() != Some(Ordering::Less) {
            dp = -gp;
            dq = -gq;
        }
        let Some(r) = line_search(ps, &weight, &p, &q, &dp, &dq, plane_tol) else {
            break;
        };
        let np = Float::with_val(prec, &p + Float::with_val(prec, &r * &dp));
        let nq = Float::with_val(prec, &q + Float::with_val(prec, &r * &dq));
        match ps.objective(&weight, &np, &nq) {
            Some(v) if v < value => {
                p = np;
                q = nq;
                value = v;
            }
            _ => break,
        }
    }

    let neg_tol = Float::with_val(prec, -plane_tol);
    if value > neg_tol {
        return Err(SolverError::LineSearchStall);
    }
    Ok(PlaneSearchResult {
        p,
        q,
        value,
        start_value,
        iterations,
        stationary,
    })
}

/// Zeroes `g` when `t` sits at the step cap and descent would cross it.
fn project_at_cap(t: &Float, g: &mut Float, cap: &Float) -> bool {
    let slack = Float::with_val(t.prec(), cap - Float::with_val(t.prec(), t.abs_ref()));
    let near = slack <= Float::with_val(t.prec(), cap * 1e-9);
    let outward = (t.is_sign_positive() && g.is_sign_negative()) || (t.is_sign_negative() && g.is_sign_positive());
    if near && outward && !g.is_zero() {
        *g = Float::new(t.prec());
        true
    } else {
        false
    }
}

/// Bisection on the sign of the directional derivative over the feasible
/// part of the ray. Stops once the derivative is below `tol` relative to the
/// direction or the bracket collapses to working precision. Returns `None`
/// when no positive step decreases the objective.
fn line_search(
    ps: &PlaneSearchProblem,
    weight: &Float,
    p: &Float,
    q: &Float,
    dp: &Float,
    dq: &Float,
    tol: &Float,
) -> Option<Float> {
    let prec = ps.prec();
    let at = |r: &Float| {
        (
            Float::with_val(prec, p + Float::with_val(prec, r * dp)),
            Float::with_val(prec, q + Float::with_val(prec, r * dq)),
        )
    };
    let slope_at = |r: &Float| {
        let (a, b) = at(r);
        ps.slope(weight, &a, &b, dp, dq)
    };
    let r_max = ps.max_step(p, q, dp, dq);
    if r_max.cmp0() != Some(Ordering::Greater) {
        return None;
    }
    let dnorm = dp.clone().abs().max(&dq.clone().abs());
    if dnorm.is_zero() {
        return None;
    }
    let slope_tol = Float::with_val(prec, tol * &dnorm);
    let mut lo = Float::new(prec);
    let mut hi = if r_max.is_infinite() {
        // Expand until the derivative turns nonnegative.
        let mut h = Float::with_val(prec, 1);
        while slope_at(&h).cmp0() == Some(Ordering::Less) {
            lo = h.clone();
            h *= 2u32;
            if h > UNBOUNDED_STEP_CAP {
                break;
            }
        }
        h
    } else {
        r_max
    };
    let hi_interior = {
        let (a, b) = at(&hi);
        ps.is_interior(&a, &b)
    };
    if hi_interior && slope_at(&hi).cmp0() == Some(Ordering::Less) {
        return Some(hi);
    }
    let floor = Float::with_val(prec, &hi >> (prec as i32 - 8));
    for _ in 0..MAX_BISECTIONS {
        if Float::with_val(prec, &hi - &lo) <= floor {
            break;
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        let (a, b) = at(&mid);
        if !ps.is_interior(&a, &b) {
            hi = mid;
            continue;
        }
        let s = slope_at(&mid);
        if Float::with_val(prec, s.abs_ref()) <= slope_tol {
            return Some(mid);
        }
        if s.cmp0() == Some(Ordering::Less) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo.is_zero() {
        None
    } else {
        Some(lo)
    }
}
