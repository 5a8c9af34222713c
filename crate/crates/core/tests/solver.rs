mod common;

use rug::{Float, Rational};
use sdpcert::ipm::{
    plane_search_minimize, search_directions, solve, FloatProblem, IterateState, PlaneSearchProblem, SolverConfig,
    SolverError,
};
use sdpcert::linalg::{solve_exact, PrecisionContext, SymMatrix};
use sdpcert::sdp::SdProblem;

fn cfg(digits: u32, nu: u32, eps: Option<(i64, u32)>) -> SolverConfig {
    let mut c = SolverConfig::new(digits);
    c.nu = Rational::from(nu);
    c.eps = eps.map(|(num, e)| Rational::from((num, rug::Integer::from(rug::Integer::u_pow_u(10, e)))));
    c
}

fn close(a: &Float, b: &Float, tol: f64) -> bool {
    Float::with_val(a.prec(), a - b).abs().to_f64() <= tol
}

#[test]
fn toy_for_each_nu() {
    for nu in [2, 5, 10] {
        let c = cfg(60, nu, Some((1, 20)));
        let sol = solve(&common::toy(), &c, None).unwrap();
        let one = Float::with_val(200, 1);
        assert!(close(&sol.x()[0], &one, 1e-20), "nu = {nu}: x = {}", sol.x()[0]);
        assert!(sol.gap().to_f64() <= 1e-20);
        assert!(sol.log.potential_strictly_decreasing());
    }
}

#[test]
fn objective_scaling_keeps_minimizer() {
    let p = common::toy();
    let c = cfg(50, 5, Some((1, 25)));
    let base = solve(&p, &c, None).unwrap();
    let scaled = solve(&p.scale_objective(&Rational::from((7, 2))), &c, None).unwrap();
    assert!(close(&base.x()[0], &scaled.x()[0], 1e-20));
    let (obj, _) = scaled.base_objectives();
    assert!(close(&obj, &Float::with_val(200, 3.5), 1e-20));
}

/// `min x` s.t. `F₀ + xI ⪰ 0` has optimum `−λ_min(F₀)`, in closed form for 2×2 `F₀`.
#[test]
fn one_parameter_family_matches_eigenvalue() {
    for (a, b, d) in [(3i64, 1i64, -2i64), (0, 5, 0), (7, -3, 7), (-4, 2, 9)] {
        let f0 = SymMatrix::from_rows(&[vec![Rational::from(a), Rational::from(b)], vec![Rational::from(b), Rational::from(d)]])
            .unwrap();
        let p = SdProblem::new(vec![Rational::from(1)], vec![f0, SymMatrix::identity(2)]).unwrap();
        let sol = solve(&p, &cfg(60, 5, Some((1, 30))), None).unwrap();
        let prec = 256;
        let half = Float::with_val(prec, a - d) / 2u32;
        let r = Float::with_val(prec, Float::with_val(prec, half.square_ref()) + b * b).sqrt();
        let lmin = Float::with_val(prec, a + d) / 2u32 - r;
        let want = -lmin;
        assert!(close(&sol.x()[0], &want, 1e-25), "({a},{b},{d}): {} vs {}", sol.x()[0], want);
    }
}

#[test]
fn random_instances_bracket_and_match_coarse_reference() {
    let mut rng = common::rng(11);
    for _ in 0..6 {
        let p = common::random_instance(&mut rng, 4, 3);
        let fine = solve(&p, &cfg(60, 5, Some((1, 25))), None).unwrap();
        let (primal, dual) = fine.base_objectives();
        assert!(primal.to_f64() >= dual.to_f64() - 1e-20);
        assert!(close(&primal, &dual, 1e-18));
        let coarse = solve(&p, &cfg(20, 5, Some((1, 8))), None).unwrap();
        let (coarse_primal, _) = coarse.base_objectives();
        let scale = 1.0 + primal.to_f64().abs();
        assert!(close(&primal, &coarse_primal, 1e-6 * scale), "{primal} vs {coarse_primal}");
        for (a, b) in fine.x().iter().zip(coarse.x()) {
            assert!(close(a, &b, 1e-3 * scale));
        }
    }
}

#[test]
fn iteration_cap_returns_best_iterate() {
    match solve(&common::toy(), &cfg(40, 5, None).tap(|c| c.max_iter = 3), None) {
        Err(SolverError::MaxIterations { best, .. }) => {
            assert_eq!(best.log.len(), 3);
            assert!(!best.converged);
        }
        other => panic!("expected MaxIterations, got {:?}", other.map(|s| s.log.len())),
    }
}

trait Tap: Sized {
    fn tap(mut self, f: impl FnOnce(&mut Self)) -> Self {
        f(&mut self);
        self
    }
}
impl Tap for SolverConfig {}

/// Exact directions from the full linear system in the unknowns `δx` and the
/// upper triangle of `δZ`, for data chosen so that `ρ` is rational.
#[test]
fn directions_match_exact_linear_system() {
    let mut rng = common::rng(5);
    let n = 4; // √n = 2
    let m = 2;
    let p = common::random_instance(&mut rng, n, m);
    // Shift F₀ so that the chosen x is strictly feasible.
    let shift = SymMatrix::from_fn(n, |i, j| Rational::from(if i == j { 30 } else { 0 }));
    let mut mats = p.matrices().to_vec();
    mats[0] = SymMatrix::from_fn(n, |i, j| Rational::from(mats[0].get(i, j) + shift.get(i, j)));
    let p = SdProblem::new(p.c().to_vec(), mats).unwrap();
    let x: Vec<Rational> = vec![Rational::from((1, 3)), Rational::from(-1)];
    let z = SymMatrix::from_fn(n, |i, j| Rational::from(if i == j { (i + 2) as i64 } else { 0 }) + Rational::from((1, 5)));
    let fx = p.eval_f_exact(&x).unwrap();
    let nu = Rational::from(3);
    let gap = fx.dot(&z);
    let rho = Rational::from((n as i64 + 3 * 2, 1)) / &gap;

    // Unknowns: δx (m) then δZ upper triangle (n(n+1)/2).
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let unknowns = m + pairs.len();
    let unit = |k: usize| {
        let (a, b) = pairs[k];
        SymMatrix::from_fn(n, |i, j| Rational::from(u32::from((i, j) == (a, b) || (j, i) == (a, b))))
    };
    let mul = |a: &SymMatrix<Rational>, b: &SymMatrix<Rational>| -> Vec<Vec<Rational>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut s = Rational::new();
                        for k in 0..n {
                            s += Rational::from(a.get(i, k) * b.get(k, j));
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    };
    let sandwich = |s: &SymMatrix<Rational>| -> SymMatrix<Rational> {
        let fs = mul(&fx, s);
        SymMatrix::from_fn(n, |i, j| {
            let mut v = Rational::new();
            for k in 0..n {
                v += Rational::from(&fs[i][k] * fx.get(k, j));
            }
            v
        })
    };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let fzf = sandwich(&z);
    for &(a, b) in &pairs {
        let mut row = vec![Rational::new(); unknowns];
        for i in 0..m {
            row[i] = p.f(i + 1).get(a, b).clone();
        }
        for (k, _) in pairs.iter().enumerate() {
            row[m + k] = sandwich(&unit(k)).get(a, b).clone();
        }
        rows.push(row);
        rhs.push(Rational::from(fx.get(a, b) - Rational::from(&rho * fzf.get(a, b))));
    }
    for j in 1..=m {
        let mut row = vec![Rational::new(); unknowns];
        for k in 0..pairs.len() {
            row[m + k] = p.f(j).dot(&unit(k));
        }
        rows.push(row);
        rhs.push(Rational::new());
    }
    let sol = solve_exact(&rows, &rhs).unwrap();

    let ctx = PrecisionContext::new(50);
    let prec = ctx.bits();
    let xf: Vec<Float> = x.iter().map(|v| Float::with_val(prec, v)).collect();
    let nuf = Float::with_val(prec, &nu);
    let state = IterateState::new(&p, xf, z.to_float(prec), &nuf, &ctx).unwrap();
    let fp = FloatProblem::new(&p, &ctx);
    let dir = search_directions(&fp, &state, &nuf).unwrap();
    let tol = 1e-38;
    for i in 0..m {
        assert!(close(&dir.dx[i], &Float::with_val(prec, &sol[i]), tol * (1.0 + sol[i].to_f64().abs())));
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let want = Float::with_val(prec, &sol[m + k]);
        assert!(close(dir.dz.get(a, b), &want, tol * (1.0 + want.to_f64().abs())), "δZ[{a}][{b}]");
    }
}

fn bounded_plane(rng: &mut impl rand::Rng, prec: u32) -> PlaneSearchProblem {
    let f = |v: f64| Float::with_val(prec, v);
    let mut eig = |len: usize| -> Vec<Float> {
        let mut v: Vec<Float> = (0..len).map(|_| f(rng.gen_range(-2.0..2.0))).collect();
        v[0] = f(rng.gen_range(0.2..2.0));
        v[1] = f(-rng.gen_range(0.2..2.0));
        v
    };
    let mu = eig(4);
    let nuev = eig(4);
    let interval = |e: &[Float]| {
        let mut lo = f(f64::NEG_INFINITY);
        let mut hi = f(f64::INFINITY);
        for l in e {
            let t = Float::with_val(prec, -1.0 / l);
            if l.cmp0() == Some(std::cmp::Ordering::Greater) {
                lo = lo.max(&t);
            } else if l.cmp0() == Some(std::cmp::Ordering::Less) {
                hi = hi.min(&t);
            }
        }
        (lo, hi)
    };
    let (p_min, p_max) = interval(&mu);
    let (q_min, q_max) = interval(&nuev);
    PlaneSearchProblem {
        c1: f(rng.gen_range(-0.3..0.0)),
        c2: f(rng.gen_range(-0.3..0.0)),
        mu,
        nuev,
        p_min,
        p_max,
        q_min,
        q_max,
    }
}

#[test]
fn plane_search_against_grid_scan() {
    let mut rng = common::rng(23);
    let prec = 160;
    let nu = Float::with_val(prec, 5);
    let n = 4;
    let w = PlaneSearchProblem::weight(n, &nu);
    for _ in 0..10 {
        let ps = bounded_plane(&mut rng, prec);
        let res = plane_search_minimize(&ps, n, &nu, &Float::with_val(prec, 1e-30)).unwrap();
        assert!(ps.is_interior(&res.p, &res.q));
        assert!(res.value.cmp0().is_some_and(|o| o.is_le()));
        let steps = 120;
        let mut best = f64::INFINITY;
        for i in 1..steps {
            for j in 1..steps {
                let t = |lo: &Float, hi: &Float, k: usize| {
                    Float::with_val(prec, lo + Float::with_val(prec, hi - lo) * (k as f64 / steps as f64))
                };
                if let Some(v) = ps.objective(&w, &t(&ps.p_min, &ps.p_max, i), &t(&ps.q_min, &ps.q_max, j)) {
                    best = best.min(v.to_f64());
                }
            }
        }
        assert!(res.value.to_f64() <= best + 1e-9 * (1.0 + best.abs()), "{} vs grid {}", res.value, best);
    }
}
