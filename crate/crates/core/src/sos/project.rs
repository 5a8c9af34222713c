use rug::{Float, Integer, Rational};

use super::{GramSystem, RationalProgram, SosError};
use crate::linalg::SymMatrix;
use crate::polytope::ExponentVector;

/// Last continued-fraction convergent of `v` whose denominator does not
/// exceed `den_bound`.
pub fn rationalize(v: &Float, den_bound: &Integer) -> Rational {
    assert!(*den_bound >= 1, "denominator bound must be positive");
    let exact = v.to_rational().expect("finite value");
    // Convergents hₖ/kₖ with h₋₁ = 1, k₋₁ = 0, h₋₂ = 0, k₋₂ = 1.
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    let mut rest = exact;
    loop {
        let a = rest.clone().floor().into_numer_denom().0;
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if k2 > *den_bound {
            break;
        }
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let frac = rest - &a;
        if frac.cmp0().is_eq() {
            break;
        }
        rest = frac.recip();
    }
    Rational::from((h1, k1))
}

/// `round(v·d)/d`.
pub fn round_to_denominator(v: &Float, d: &Integer) -> Rational {
    let scaled = Float::with_val(v.prec(), v * d);
    let num = scaled.to_integer().expect("finite value");
    Rational::from((num, d.clone()))
}

impl GramSystem {
    /// Frobenius-nearest `A` (with free `r`) satisfying every identity
    /// constraint. Each constraint touches its own set of entries, so for a
    /// fixed `r` the correction spreads the residual of class `α` evenly over
    /// its `n_α` ordered entries; minimizing the remaining distance
    /// `Σ (f_α − r g_α − s_α)²/n_α` over `r` is a scalar least-squares problem.
    pub fn project(&self, w: &SymMatrix<Rational>) -> Result<(SymMatrix<Rational>, Rational), SosError> {
        let mut forced: Option<Rational> = None;
        let mut num = Rational::new();
        let mut den = Rational::new();
        let mut classes: Vec<(&ExponentVector, Rational, Rational)> = Vec::new();
        for (a, (fa, ga)) in &self.target {
            let pairs = self.pairs(a);
            if pairs.is_empty() {
                if ga.cmp0().is_eq() {
                    if fa.cmp0().is_ne() {
                        return Err(SosError::DegenerateConstraints);
                    }
                    continue;
                }
                let r = Rational::from(fa / ga);
                match &forced {
                    Some(prev) if *prev != r => return Err(SosError::DegenerateConstraints),
                    _ => forced = Some(r),
                }
                continue;
            }
            let mut count = 0u32;
            let mut sum = Rational::new();
            for &(i, j) in pairs {
                if i == j {
                    count += 1;
                    sum += w.get(i, j);
                } else {
                    count += 2;
                    sum += Rational::from(w.get(i, j) * 2u32);
                }
            }
            let n = Rational::from(count);
            let resid = Rational::from(fa - &sum);
            num += Rational::from(ga * &resid) / &n;
            den += Rational::from(ga * ga) / &n;
            classes.push((a, sum, n));
        }
        let r = match forced {
            Some(r) => r,
            None if den.cmp0().is_eq() => return Err(SosError::DegenerateConstraints),
            None => num / den,
        };
        let mut out = w.clone();
        for (a, sum, n) in classes {
            let (fa, ga) = &self.target[a];
            let mut shift = Rational::from(fa - Rational::from(&r * ga));
            shift -= sum;
            shift /= n;
            if shift.cmp0().is_eq() {
                continue;
            }
            for &(i, j) in self.pairs(a) {
                let v = Rational::from(out.get(i, j) + &shift);
                out.set(i, j, v);
            }
        }
        Ok((out, r))
    }
}

/// Orthogonal projection of `W` onto `{A : f − r·g = mᵀAm for some r}`.
pub fn project_to_chi(
    prog: &RationalProgram,
    basis: &[ExponentVector],
    w: &SymMatrix<Rational>,
) -> Result<(SymMatrix<Rational>, Rational), SosError> {
    GramSystem::new(prog, basis).project(w)
}
