use rug::Rational;

use super::{LinalgError, SymMatrix};

/// Outcome of the exact positive-semidefiniteness test.
#[derive(Debug, Clone, PartialEq)]
pub enum PsdDecision {
    /// `A = Pᵀ L D Lᵀ P` with `D = diag(pivots) >= 0`. `order` lists the
    /// original indices in elimination order.
    Psd { pivots: Vec<Rational>, order: Vec<usize> },
    /// `vᵀ A v < 0`.
    NotPsd { witness: Vec<Rational>, value: Rational },
}

impl PsdDecision {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdDecision::Psd { .. })
    }
}

/// Exact PSD decision by symmetric-pivoted LDLᵀ.
///
/// At each step a strictly positive diagonal entry of the remaining Schur
/// complement is eliminated. A negative diagonal, or a zero diagonal whose
/// row is not entirely zero, yields a witness vector.
pub fn ldlt_exact(a: &SymMatrix<Rational>) -> PsdDecision {
    let n = a.n();
    let mut s: Vec<Vec<Rational>> = a.to_rows();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);

    while !remaining.is_empty() {
        // Negative diagonal: immediate witness.
        if let Some(&k) = remaining.iter().find(|&&k| s[k][k].cmp0().is_lt()) {
            let mut y = vec![Rational::new(); n];
            y[k] = Rational::from(1);
            return not_psd(a, &order, &remaining, y);
        }
        let Some(pos) = remaining.iter().position(|&k| s[k][k].cmp0().is_gt()) else {
            // All remaining diagonals are zero; PSD only if the block is zero.
            for (x, &i) in remaining.iter().enumerate() {
                for &j in &remaining[x + 1..] {
                    if s[i][j].cmp0().is_ne() {
                        let mut y = vec![Rational::new(); n];
                        y[i] = Rational::from(1);
                        y[j] = Rational::from(if s[i][j].cmp0().is_gt() { -1 } else { 1 });
                        return not_psd(a, &order, &remaining, y);
                    }
                }
            }
            for k in remaining.drain(..) {
                order.push(k);
                pivots.push(Rational::new());
            }
            break;
        };
        let k = remaining.remove(pos);
        let d = s[k][k].clone();
        for x in 0..remaining.len() {
            let i = remaining[x];
            if s[i][k].cmp0().is_eq() {
                continue;
            }
            let f = Rational::from(&s[i][k] / &d);
            for &j in &remaining[x..] {
                if s[k][j].cmp0().is_ne() {
                    let delta = Rational::from(&f * &s[k][j]);
                    s[i][j] -= &delta;
                    if i != j {
                        s[j][i] = s[i][j].clone();
                    }
                }
            }
        }
        order.push(k);
        pivots.push(d);
    }
    PsdDecision::Psd { pivots, order }
}

/// Lifts a Schur-complement direction `y` (supported on `remaining`) to a full
/// vector `v` with `vᵀ A v = yᵀ S y`.
fn not_psd(a: &SymMatrix<Rational>, eliminated: &[usize], remaining: &[usize], mut y: Vec<Rational>) -> PsdDecision {
    if !eliminated.is_empty() {
        // Solve A_PP v_P = -A_PR y_R.
        let app: Vec<Vec<Rational>> = eliminated
            .iter()
            .map(|&i| eliminated.iter().map(|&j| a.get(i, j).clone()).collect())
            .collect();
        let rhs: Vec<Rational> = eliminated
            .iter()
            .map(|&i| {
                let mut acc = Rational::new();
                for &j in remaining {
                    if y[j].cmp0().is_ne() {
                        acc -= Rational::from(a.get(i, j) * &y[j]);
                    }
                }
                acc
            })
            .collect();
        let vp = solve_exact(&app, &rhs).expect("eliminated block has positive pivots");
        for (&i, v) in eliminated.iter().zip(vp) {
            y[i] = v;
        }
    }
    let value = a.quad_form(&y);
    debug_assert!(value.cmp0().is_lt());
    PsdDecision::NotPsd { witness: y, value }
}

/// Solves `A x = b` exactly by Gaussian elimination.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
    let n = a.len();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| m[r][col].cmp0().is_ne()).ok_or(LinalgError::Singular)?;
        m.swap(col, piv);
        let inv = Rational::from(m[col][col].recip_ref());
        for v in &mut m[col][col..] {
            *v *= &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].cmp0().is_eq() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..=n {
                let delta = Rational::from(&f * &m[col][c]);
                m[r][c] -= delta;
            }
        }
    }
    Ok(m.into_iter().map(|mut r| r.pop().expect("augmented column")).collect())
}

/// Reduced row echelon form. Returns the reduced rows and pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(piv) = (r..m.len()).find(|&i| m[i][col].cmp0().is_ne()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = Rational::from(m[r][col].recip_ref());
        for v in &mut m[r][col..] {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i == r || m[i][col].cmp0().is_eq() {
                continue;
            }
            let f = m[i][col].clone();
            for c in col..ncols {
                let delta = Rational::from(&f * &m[r][c]);
                m[i][c] -= delta;
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank_exact(rows: &[Vec<Rational>]) -> usize {
    rref(rows).1.len()
}

/// Determinant by fraction-based elimination.
pub fn det_exact(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Rational::from(1);
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m[r][col].cmp0().is_ne()) else {
            return Rational::new();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= &m[col][col];
        for r in (col + 1)..n {
            if m[r][col].cmp0().is_eq() {
                continue;
            }
            let f = Rational::from(&m[r][col] / &m[col][col]);
            for c in col..n {
                let delta = Rational::from(&f * &m[col][c]);
                m[r][c] -= delta;
            }
        }
    }
    det
}
