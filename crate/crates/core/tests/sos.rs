mod common;

use proptest::prelude::*;
use rand::Rng;
use rug::{Float, Integer, Rational};
use sdpcert::linalg::SymMatrix;
use sdpcert::sos::{
    build_basis, certify, project_to_chi, rationalize, verify_certificate, CertifyConfig, GramSystem, RationalProgram,
    SosCertificate,
};

fn random_gram(rng: &mut impl Rng, k: usize) -> SymMatrix<Rational> {
    let mut w = SymMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            w.set(i, j, Rational::from((rng.gen_range(-20i64..=20), rng.gen_range(1u32..=7))));
        }
    }
    w
}

fn sub(a: &SymMatrix<Rational>, b: &SymMatrix<Rational>) -> SymMatrix<Rational> {
    SymMatrix::from_fn(a.n(), |i, j| Rational::from(a.get(i, j) - b.get(i, j)))
}

fn programs() -> Vec<RationalProgram> {
    vec![
        common::program(&["x"], "x^2 + 2x + 2", "1"),
        common::program(&["x"], "x^4 + 1", "x^2 + 1"),
        common::program(&["x", "y"], "x^4 + y^4 + 3x^2 y^2 + 1", "x^2 + y^2 + 1"),
        common::program(&["x", "y"], "x^2 y^2 + x^2 + y^2 + 2x y + 1", "1"),
    ]
}

/// The projection is the nearest point of the affine set: the residual is
/// Frobenius-orthogonal to every difference of feasible points.
#[test]
fn projection_is_orthogonal_and_nearest() {
    let mut rng = common::rng(3);
    for prog in programs() {
        let basis = build_basis(&prog).unwrap();
        let sys = GramSystem::new(&prog, &basis);
        for _ in 0..10 {
            let w = random_gram(&mut rng, basis.len());
            let (wt, r) = sys.project(&w).unwrap();
            assert_eq!(sys.gram_polynomial(&wt), prog.residual_poly(&r));
            let other = random_gram(&mut rng, basis.len());
            let (a, _) = sys.project(&other).unwrap();
            assert_eq!(sub(&w, &wt).dot(&sub(&a, &wt)), 0);
            let d_proj = sub(&w, &wt).dot(&sub(&w, &wt));
            let d_other = sub(&w, &a).dot(&sub(&w, &a));
            assert!(d_proj <= d_other);
        }
    }
}

#[test]
fn projection_fixes_feasible_points() {
    let mut rng = common::rng(4);
    for prog in programs() {
        let basis = build_basis(&prog).unwrap();
        let (wt, r) = project_to_chi(&prog, &basis, &random_gram(&mut rng, basis.len())).unwrap();
        let (again, r2) = project_to_chi(&prog, &basis, &wt).unwrap();
        assert_eq!(again, wt);
        assert_eq!(r2, r);
    }
}

/// Continued-fraction convergents of `num/den` by the Euclidean algorithm.
fn convergents(mut num: i128, mut den: i128) -> Vec<(i128, i128)> {
    let mut out = Vec::new();
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    while den != 0 {
        let a = num.div_euclid(den);
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        out.push((h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        (num, den) = (den, num - a * den);
    }
    out
}

proptest! {
    #[test]
    fn rationalize_returns_last_admissible_convergent(num in -1_000_000i64..=1_000_000, shift in 0u32..=20, bound in 1u32..=5000) {
        let den = 1i128 << shift;
        let v = Float::with_val(128, Rational::from((num, 1u64 << shift)));
        let got = rationalize(&v, &Integer::from(bound));
        let &(h, k) = convergents(num as i128, den).iter().filter(|&&(_, k)| k <= bound as i128).last().unwrap();
        prop_assert_eq!(got, Rational::from((h, k)));
    }
}

#[test]
fn pipeline_certificates_verify_and_reject_mutations() {
    for prog in programs() {
        let report = certify(&prog, &CertifyConfig::new(40, 40)).unwrap();
        let cert = &report.best;
        assert!(verify_certificate(&prog, cert));
        let parsed = SosCertificate::parse(&cert.to_text()).unwrap();
        assert!(verify_certificate(&prog, &parsed));
        for (i, j, v) in cert.w.upper() {
            let mut bad = cert.clone();
            bad.w.set(i, j, Rational::from(v + Rational::from((1, 1_000_000_007))));
            assert!(!verify_certificate(&prog, &bad), "entry ({i}, {j})");
        }
        let mut bad = cert.clone();
        bad.r += Rational::from((1, 1_000_000_007));
        assert!(!verify_certificate(&prog, &bad));
        assert!(report.best.r.to_f64() <= report.upper.to_f64() + 1e-15);
    }
}

#[test]
fn program_text_round_trip() {
    for prog in programs() {
        let back = RationalProgram::parse(&prog.to_text()).unwrap();
        assert_eq!(back.f, prog.f);
        assert_eq!(back.g, prog.g);
        assert_eq!(back.vars, prog.vars);
    }
}

#[test]
fn bivariate_bound_is_sound() {
    // f = (x² + y² + 1)² + x²y², so f/g ≥ 1 with equality at the origin.
    let prog = common::program(&["x", "y"], "x^4 + y^4 + 3x^2 y^2 + 2x^2 + 2y^2 + 1", "x^2 + y^2 + 1");
    let report = certify(&prog, &CertifyConfig::new(40, 40)).unwrap();
    let r = report.best.r.to_f64();
    assert!(r <= 1.0 && r > 0.999_999, "r = {r}");
    let at_origin = prog.f.eval(&[Rational::new(), Rational::new()]) / prog.g.eval(&[Rational::new(), Rational::new()]);
    assert!(report.best.r <= at_origin);
}
