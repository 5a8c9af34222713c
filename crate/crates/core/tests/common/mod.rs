#![allow(dead_code)]

pub mod hull;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use sdpcert::linalg::SymMatrix;
use sdpcert::sdp::SdProblem;
use sdpcert::sos::{RationalProgram, SparsePolynomial};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(rng: &mut impl Rng, n: usize, range: i64) -> SymMatrix<Rational> {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, Rational::from(rng.gen_range(-range..=range)));
        }
    }
    m
}

/// Random SDP with `F(x₀) = I` for an integer `x₀` and `c = (tr FᵢZ₀)`
/// for `Z₀ = I + BᵀB/4`, so both problems are strictly feasible.
pub fn random_instance(rng: &mut impl Rng, n: usize, m: usize) -> SdProblem {
    loop {
        let fs: Vec<SymMatrix<Rational>> = (0..m).map(|_| random_sym(rng, n, 3)).collect();
        let x0: Vec<i64> = (0..m).map(|_| rng.gen_range(-2..=2)).collect();
        let f0 = SymMatrix::from_fn(n, |i, j| {
            let mut v = Rational::from(u32::from(i == j));
            for (f, &x) in fs.iter().zip(&x0) {
                v -= Rational::from(f.get(i, j) * x);
            }
            v
        });
        let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let z0 = SymMatrix::from_fn(n, |i, j| {
            let mut v = Rational::from(4 * u32::from(i == j) as i64);
            for row in &b {
                v += row[i] * row[j];
            }
            v / 4u32
        });
        let c: Vec<Rational> = fs.iter().map(|f| f.dot(&z0)).collect();
        let mut all = vec![f0];
        all.extend(fs);
        if let Ok(p) = SdProblem::new(c, all) {
            return p;
        }
    }
}

/// The toy problem `min x` s.t. `[[x, 1], [1, x]] ⪰ 0`.
pub fn toy() -> SdProblem {
    let f0 = SymMatrix::from_fn(2, |i, j| Rational::from(u32::from(i != j)));
    SdProblem::new(vec![Rational::from(1)], vec![f0, SymMatrix::identity(2)]).unwrap()
}

pub fn program(vars: &[&str], f: &str, g: &str) -> RationalProgram {
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let f = SparsePolynomial::parse(f, &vars).unwrap();
    let g = SparsePolynomial::parse(g, &vars).unwrap();
    RationalProgram::new(vars, f, g).unwrap()
}
