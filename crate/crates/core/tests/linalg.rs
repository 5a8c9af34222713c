use proptest::prelude::*;
use rug::{Float, Rational};
use sdpcert::linalg::{
    cholesky, det_exact, ldlt_exact, rank_exact, solve_exact, solve_spd, sym_eigenvalues, PrecisionContext, PsdDecision,
    SymMatrix,
};

fn sym_from_upper(n: usize, vals: &[i64]) -> SymMatrix<Rational> {
    let mut m = SymMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m.set(i, j, Rational::from(vals[k]));
            k += 1;
        }
    }
    m
}

/// `BᵀB` for an `r × n` integer matrix `B`: PSD with rank at most `r`.
fn gram(n: usize, r: usize, b: &[i64]) -> SymMatrix<Rational> {
    SymMatrix::from_fn(n, |i, j| {
        let mut s = Rational::new();
        for k in 0..r {
            s += Rational::from(b[k * n + i] * b[k * n + j]);
        }
        s
    })
}

/// Oracle: a symmetric matrix is PSD iff every principal minor is nonnegative.
fn psd_by_minors(a: &SymMatrix<Rational>) -> bool {
    let n = a.n();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| idx.iter().map(|&j| a.get(i, j).clone()).collect()).collect();
        det_exact(&sub).cmp0().is_ge()
    })
}

fn check_decision(a: &SymMatrix<Rational>) {
    let decision = ldlt_exact(a);
    assert_eq!(decision.is_psd(), psd_by_minors(a), "matrix {a:?}");
    match decision {
        PsdDecision::Psd { pivots, .. } => assert!(pivots.iter().all(|p| p.cmp0().is_ge())),
        PsdDecision::NotPsd { witness, value } => {
            assert!(value.cmp0().is_lt());
            assert_eq!(a.quad_form(&witness), value);
        }
    }
}

proptest! {
    #[test]
    fn ldlt_agrees_with_principal_minors(n in 1usize..=5, vals in prop::collection::vec(-4i64..=4, 15)) {
        check_decision(&sym_from_upper(n, &vals));
    }

    #[test]
    fn ldlt_accepts_rank_deficient_grams(n in 1usize..=5, r in 0usize..=3, b in prop::collection::vec(-3i64..=3, 15)) {
        let a = gram(n, r, &b);
        prop_assert!(ldlt_exact(&a).is_psd());
        prop_assert!(rank_exact(&a.to_rows()) <= r);
    }

    #[test]
    fn perturbed_grams_match_oracle(n in 2usize..=5, b in prop::collection::vec(-3i64..=3, 10), i in 0usize..5, d in -2i64..=2) {
        let mut a = gram(n, 2, &b);
        let i = i % n;
        let v = Rational::from(a.get(i, i) + d);
        a.set(i, i, v);
        check_decision(&a);
    }

    #[test]
    fn solve_exact_satisfies_system(n in 1usize..=4, vals in prop::collection::vec(-5i64..=5, 16), rhs in prop::collection::vec(-5i64..=5, 4)) {
        let a: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| Rational::from(vals[i * 4 + j])).collect()).collect();
        let b: Vec<Rational> = rhs[..n].iter().map(|&v| Rational::from(v)).collect();
        match solve_exact(&a, &b) {
            Ok(x) => {
                for i in 0..n {
                    let mut s = Rational::new();
                    for j in 0..n {
                        s += Rational::from(&a[i][j] * &x[j]);
                    }
                    prop_assert_eq!(&s, &b[i]);
                }
            }
            Err(_) => prop_assert_eq!(det_exact(&a), 0),
        }
    }
}

/// Cayley transform `(I − S)(I + S)⁻¹` of a skew matrix: exactly orthogonal.
fn cayley(n: usize, s_upper: &[i64]) -> Vec<Vec<Rational>> {
    let mut s = vec![vec![Rational::new(); n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            s[i][j] = Rational::from((s_upper[k], 2));
            s[j][i] = Rational::from(-&s[i][j]);
            k += 1;
        }
    }
    let id = |i: usize, j: usize| Rational::from(u32::from(i == j));
    let plus: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| Rational::from(&s[i][j] + id(i, j))).collect()).collect();
    let minus: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| Rational::from(id(i, j) - &s[i][j])).collect()).collect();
    // Columns of (I + S)⁻¹.
    let inv_cols: Vec<Vec<Rational>> = (0..n)
        .map(|c| solve_exact(&plus, &(0..n).map(|r| id(r, c)).collect::<Vec<_>>()).unwrap())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = Rational::new();
                    for k in 0..n {
                        v += Rational::from(&minus[i][k] * &inv_cols[j][k]);
                    }
                    v
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jacobi_recovers_planted_spectrum(n in 2usize..=5, s in prop::collection::vec(-4i64..=4, 10), d in prop::collection::vec(-20i64..=20, 5)) {
        let q = cayley(n, &s);
        let a = SymMatrix::from_fn(n, |i, j| {
            let mut v = Rational::new();
            for k in 0..n {
                v += Rational::from(&q[i][k] * &q[j][k]) * Rational::from(d[k]);
            }
            v
        });
        let ctx = PrecisionContext::new(50);
        let eig = sym_eigenvalues(&a.to_float(ctx.bits()), &ctx).unwrap();
        let mut want: Vec<i64> = d[..n].to_vec();
        want.sort();
        let scale = Float::with_val(ctx.bits(), 1.0 + a.max_abs().to_f64().abs());
        for (got, w) in eig.iter().zip(&want) {
            let err = Float::with_val(ctx.bits(), got - *w).abs();
            prop_assert!(err <= Float::with_val(ctx.bits(), &scale * ctx.tolerance()), "{} vs {}", got, w);
        }
        let mut sum = Float::new(ctx.bits());
        for v in &eig {
            sum += v;
        }
        let tr_err = Float::with_val(ctx.bits(), &sum - a.trace().to_f64()).abs();
        prop_assert!(tr_err.to_f64() < 1e-30);
    }

    #[test]
    fn cholesky_log_det_and_solve(n in 1usize..=5, b in prop::collection::vec(-3i64..=3, 25), rhs in prop::collection::vec(-9i64..=9, 5)) {
        let mut a = gram(n, n, &b);
        for i in 0..n {
            let v = Rational::from(a.get(i, i) + 1);
            a.set(i, i, v);
        }
        let ctx = PrecisionContext::new(40);
        let af = a.to_float(ctx.bits());
        let f = cholesky(&af, &ctx).unwrap();
        let det = det_exact(&a.to_rows());
        let want = Float::with_val(ctx.bits(), Float::with_val(ctx.bits(), &det).ln_ref());
        let err = Float::with_val(ctx.bits(), f.log_det() - &want).abs();
        prop_assert!(err <= Float::with_val(ctx.bits(), ctx.tolerance() * 1000u32));

        let bv: Vec<Rational> = rhs[..n].iter().map(|&v| Rational::from(v)).collect();
        let exact = solve_exact(&a.to_rows(), &bv).unwrap();
        let x = solve_spd(&af, &bv.iter().map(|v| Float::with_val(ctx.bits(), v)).collect::<Vec<_>>(), &ctx).unwrap();
        for (xi, ei) in x.iter().zip(&exact) {
            let err = Float::with_val(ctx.bits(), xi - ei).abs();
            prop_assert!(err <= Float::with_val(ctx.bits(), ctx.tolerance() * 1000u32));
        }
    }
}

#[test]
fn indefinite_matrix_rejected_by_cholesky() {
    let ctx = PrecisionContext::new(30);
    let a = sym_from_upper(2, &[1, 2, 1]);
    assert!(cholesky(&a.to_float(ctx.bits()), &ctx).is_err());
    assert!(!ldlt_exact(&a).is_psd());
}
