use rug::{Assign, Float};

use super::{LinalgError, Matrix, PrecisionContext, SymMatrix};

/// Sweep cap for the cyclic Jacobi eigen-solver.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Lower-triangular factor `L` of `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    l: Matrix<Float>,
}

/// Cholesky factorization at the working precision of `ctx`.
pub fn cholesky(a: &SymMatrix<Float>, ctx: &PrecisionContext) -> Result<CholeskyFactor, LinalgError> {
    let n = a.n();
    let prec = ctx.bits();
    let mut l = Matrix::from_fn(n, n, |_, _| Float::new(prec));
    for j in 0..n {
        let mut d = Float::with_val(prec, a.get(j, j));
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !d.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        if d.cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(LinalgError::NotPositiveDefinite { index: j });
        }
        let d = d.sqrt();
        for i in (j + 1)..n {
            let mut s = Float::with_val(prec, a.get(i, j));
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            s /= &d;
            *l.get_mut(i, j) = s;
        }
        *l.get_mut(j, j) = d;
    }
    Ok(CholeskyFactor { l })
}

impl CholeskyFactor {
    pub fn factor(&self) -> &Matrix<Float> {
        &self.l
    }

    pub fn n(&self) -> usize {
        self.l.rows()
    }

    fn prec(&self) -> u32 {
        self.l.get(0, 0).prec()
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> Float {
        let mut s = Float::new(self.prec());
        for i in 0..self.n() {
            s += self.l.get(i, i).clone().ln();
        }
        s * 2u32
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[Float]) -> Vec<Float> {
        let n = self.n();
        let mut y: Vec<Float> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = Float::with_val(self.prec(), &b[i]);
            for (k, yk) in y.iter().enumerate() {
                s -= self.l.get(i, k) * yk;
            }
            s /= self.l.get(i, i);
            y.push(s);
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn backward(&self, y: &[Float]) -> Vec<Float> {
        let n = self.n();
        let mut x: Vec<Float> = vec![Float::new(self.prec()); n];
        for i in (0..n).rev() {
            let mut s = Float::with_val(self.prec(), &y[i]);
            for k in (i + 1)..n {
                s -= self.l.get(k, i) * &x[k];
            }
            s /= self.l.get(i, i);
            x[i] = s;
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Float]) -> Vec<Float> {
        self.backward(&self.forward(b))
    }

    /// Explicit inverse of the factor, `L⁻¹` (lower triangular).
    pub fn inverse_factor(&self) -> Matrix<Float> {
        let n = self.n();
        let prec = self.prec();
        let mut inv = Matrix::from_fn(n, n, |_, _| Float::new(prec));
        for j in 0..n {
            let mut diag = Float::with_val(prec, 1);
            diag /= self.l.get(j, j);
            *inv.get_mut(j, j) = diag;
            for i in (j + 1)..n {
                let mut s = Float::new(prec);
                for k in j..i {
                    s += self.l.get(i, k) * inv.get(k, j);
                }
                s = -s;
                s /= self.l.get(i, i);
                *inv.get_mut(i, j) = s;
            }
        }
        inv
    }

    /// `A⁻¹ = L⁻ᵀ L⁻¹`.
    pub fn inverse(&self) -> SymMatrix<Float> {
        let inv = self.inverse_factor();
        let n = self.n();
        let prec = self.prec();
        SymMatrix::from_fn(n, |i, j| {
            let mut s = Float::new(prec);
            for k in j.max(i)..n {
                s += inv.get(k, i) * inv.get(k, j);
            }
            s
        })
    }

    /// Congruence `L⁻¹ S L⁻ᵀ` given a precomputed `L⁻¹`.
    pub fn whiten_with(linv: &Matrix<Float>, s: &SymMatrix<Float>) -> SymMatrix<Float> {
        let n = s.n();
        let prec = s.prec();
        // t = L⁻¹ S
        let t = Matrix::from_fn(n, n, |i, j| {
            let mut acc = Float::new(prec);
            for k in 0..=i {
                acc += linv.get(i, k) * s.get(k, j);
            }
            acc
        });
        SymMatrix::from_fn(n, |i, j| {
            let mut acc = Float::new(prec);
            for k in 0..=j {
                acc += t.get(i, k) * linv.get(j, k);
            }
            acc
        })
    }

    /// Congruence `L⁻¹ S L⁻ᵀ`.
    pub fn whiten(&self, s: &SymMatrix<Float>) -> SymMatrix<Float> {
        Self::whiten_with(&self.inverse_factor(), s)
    }

    /// `L Lᵀ`, for residual checks.
    pub fn reconstruct(&self) -> SymMatrix<Float> {
        let n = self.n();
        let prec = self.prec();
        SymMatrix::from_fn(n, |i, j| {
            let mut s = Float::new(prec);
            for k in 0..=i.min(j) {
                s += self.l.get(i, k) * self.l.get(j, k);
            }
            s
        })
    }
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
pub fn solve_spd(a: &SymMatrix<Float>, b: &[Float], ctx: &PrecisionContext) -> Result<Vec<Float>, LinalgError> {
    if b.len() != a.n() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.n(),
            found: b.len(),
        });
    }
    Ok(cholesky(a, ctx)?.solve(b))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted ascending.
pub fn sym_eigenvalues(a: &SymMatrix<Float>, ctx: &PrecisionContext) -> Result<Vec<Float>, LinalgError> {
    let n = a.n();
    let prec = ctx.bits();
    let mut m: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| Float::with_val(prec, a.get(i, j))).collect())
        .collect();

    let mut scale = Float::new(prec);
    for row in &m {
        for v in row {
            scale += v * v;
        }
    }
    if !scale.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut tol = ctx.tolerance();
    tol.square_mut();
    let threshold = Float::with_val(prec, &scale * &tol);

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut off = Float::new(prec);
        for i in 0..n {
            for j in (i + 1)..n {
                off += &m[i][j] * &m[i][j];
            }
        }
        off *= 2u32;
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].is_zero() {
                    continue;
                }
                rotate(&mut m, p, q, prec);
            }
        }
    }
    if !converged {
        let mut off = Float::new(prec);
        for i in 0..n {
            for j in (i + 1)..n {
                off += &m[i][j] * &m[i][j];
            }
        }
        off *= 2u32;
        if off > threshold {
            return Err(LinalgError::NoConvergence {
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
    }
    let mut eig: Vec<Float> = (0..n).map(|i| m[i][i].clone()).collect();
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(eig)
}

/// Annihilates `m[p][q]` with one Jacobi rotation.
fn rotate(m: &mut [Vec<Float>], p: usize, q: usize, prec: u32) {
    let n = m.len();
    let apq = m[p][q].clone();
    let mut theta = Float::with_val(prec, &m[q][q] - &m[p][p]);
    theta /= Float::with_val(prec, &apq * 2u32);
    // t = sgn(θ) / (|θ| + sqrt(θ² + 1))
    let mut root = Float::with_val(prec, theta.square_ref());
    root += 1u32;
    root.sqrt_mut();
    let mut t = Float::with_val(prec, theta.abs_ref());
    t += &root;
    t.recip_mut();
    if theta.is_sign_negative() {
        t = -t;
    }
    let mut c = Float::with_val(prec, t.square_ref());
    c += 1u32;
    c.sqrt_mut();
    c.recip_mut();
    let s = Float::with_val(prec, &t * &c);
    let mut tau = Float::with_val(prec, &c + 1u32);
    tau.recip_mut();
    tau *= &s;

    let shift = Float::with_val(prec, &t * &apq);
    m[p][p] -= &shift;
    m[q][q] += &shift;
    m[p][q].assign(0);
    m[q][p].assign(0);
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[r][p].clone();
        let arq = m[r][q].clone();
        // a_rp' = a_rp - s (a_rq + τ a_rp)
        let mut np = Float::with_val(prec, &tau * &arp);
        np += &arq;
        np *= &s;
        let np = Float::with_val(prec, &arp - &np);
        // a_rq' = a_rq + s (a_rp - τ a_rq)
        let mut nq = Float::with_val(prec, &tau * &arq);
        nq = Float::with_val(prec, &arp - &nq);
        nq *= &s;
        nq += &arq;
        m[r][p].assign(&np);
        m[p][r].assign(&np);
        m[r][q].assign(&nq);
        m[q][r].assign(&nq);
    }
}
