//! Rump's model problem: minimize `‖PQ‖² / (‖P‖²‖Q‖²)` over nonzero real
//! polynomials `P`, `Q` with `n` coefficients each, where `‖·‖` is the
//! Euclidean norm of the coefficient vector.
//!
//! Minimizers can be taken self-reciprocal or skew-reciprocal, so each case
//! `k` fixes the symmetry of both factors and keeps only the free half of
//! their coefficients:
//!
//! | k | P                     | Q                     |
//! |---|-----------------------|-----------------------|
//! | 1 | `p_{n+1−i} = p_i`     | `q_{n+1−i} = q_i`     |
//! | 2 | `p_{n+1−i} = p_i`     | `q_{n+1−i} = −q_i`    |
//! | 3 | `p_{n+1−i} = −p_i`    | `q_{n+1−i} = −q_i`    |
//!
//! For odd `n` a skew factor has a zero middle coefficient, which is dropped
//! from the variable list.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use log::{info, warn};
use rug::{Float, Rational};
use thiserror::Error;

use crate::sos::{certify, CertifyConfig, RationalProgram, SosError, SparsePolynomial};

#[derive(Debug, Error)]
pub enum RumpError {
    #[error("invalid case: n = {n}, k = {k} (need n >= 2 and k in 1..=3)")]
    InvalidCase { n: usize, k: u8 },
}

#[derive(Debug, Clone)]
pub struct RumpInstance {
    pub n: usize,
    pub k: u8,
    pub prog: RationalProgram,
}

/// Coefficients `c_1 … c_n` of a symmetric (`skew = false`) or skew factor,
/// expressed in the variables `first .. first + free` of an `arity`-variate ring.
fn factor_coefficients(n: usize, skew: bool, first: usize, arity: usize) -> Vec<SparsePolynomial> {
    (0..n)
        .map(|i| {
            let mirror = n - 1 - i;
            if i == mirror && skew {
                return SparsePolynomial::zero(arity);
            }
            let j = i.min(mirror);
            let v = SparsePolynomial::var(arity, first + j);
            if skew && i > mirror {
                -&v
            } else {
                v
            }
        })
        .collect()
}

fn free_count(n: usize, skew: bool) -> usize {
    if skew {
        n / 2
    } else {
        n.div_ceil(2)
    }
}

/// The case-`k` instance for polynomials of length `n`.
pub fn rump_generate(n: usize, k: u8) -> Result<RumpInstance, RumpError> {
    if n < 2 || !(1..=3).contains(&k) {
        return Err(RumpError::InvalidCase { n, k });
    }
    let (p_skew, q_skew) = match k {
        1 => (false, false),
        2 => (false, true),
        _ => (true, true),
    };
    let hp = free_count(n, p_skew);
    let hq = free_count(n, q_skew);
    let arity = hp + hq;
    let p = factor_coefficients(n, p_skew, 0, arity);
    let q = factor_coefficients(n, q_skew, hp, arity);

    let mut f = SparsePolynomial::zero(arity);
    for s in 0..=2 * (n - 1) {
        let mut c = SparsePolynomial::zero(arity);
        for i in s.saturating_sub(n - 1)..=s.min(n - 1) {
            c = &c + &(&p[i] * &q[s - i]);
        }
        f = &f + &(&c * &c);
    }
    let norm2 = |v: &[SparsePolynomial]| v.iter().fold(SparsePolynomial::zero(arity), |acc, c| &acc + &(c * c));
    let g = &norm2(&p) * &norm2(&q);

    let vars: Vec<String> = (1..=hp).map(|i| format!("p{i}")).chain((1..=hq).map(|i| format!("q{i}"))).collect();
    let prog = RationalProgram::new(vars, f, g).expect("g is a product of nonzero squares");
    Ok(RumpInstance { n, k, prog })
}

/// The case used for each length: 2 for even `n`, 1 for odd `n`.
pub fn default_case(n: usize) -> u8 {
    if n % 2 == 0 {
        2
    } else {
        1
    }
}

/// `(digits, iterations)` per length.
pub fn default_schedule(n: usize) -> (u32, usize) {
    match n {
        0..=6 => (60, 50),
        7..=10 => (75, 75),
        11..=12 => (75, 85),
        13..=14 => (75, 100),
        _ => (90, 120),
    }
}

/// Certification settings per length from [`default_schedule`].
pub fn default_config(n: usize) -> CertifyConfig {
    let (digits, iters) = default_schedule(n);
    CertifyConfig::new(digits, iters)
}

#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub n: usize,
    pub k: u8,
    pub iterations: usize,
    pub digits: u32,
    pub seconds_per_iter: f64,
    pub certified_lower: Rational,
    pub float_upper: Float,
}

#[derive(Debug, Error)]
pub enum RowError {
    #[error(transparent)]
    Case(#[from] RumpError),
    #[error(transparent)]
    Certify(#[from] SosError),
}

#[derive(Debug)]
pub struct BenchmarkFailure {
    pub n: usize,
    pub k: u8,
    pub error: RowError,
}

/// Certifies each `(n, k)` on up to `jobs` threads. Rows are returned in
/// input order and a failing row does not stop the rest.
pub fn run_benchmark(
    cases: &[(usize, u8)],
    config: impl Fn(usize) -> CertifyConfig + Sync,
    jobs: usize,
) -> Vec<Result<BenchmarkRow, BenchmarkFailure>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<BenchmarkRow, BenchmarkFailure>>>> =
        Mutex::new((0..cases.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, cases.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, k)) = cases.get(i) else { break };
                let row = benchmark_row(n, k, &config(n));
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every case ran"))
        .collect()
}

fn benchmark_row(n: usize, k: u8, cfg: &CertifyConfig) -> Result<BenchmarkRow, BenchmarkFailure> {
    let started = Instant::now();
    let fail = |error: RowError| {
        warn!("n = {n}, k = {k}: {error}");
        BenchmarkFailure { n, k, error }
    };
    let inst = rump_generate(n, k).map_err(|e| fail(e.into()))?;
    let report = certify(&inst.prog, cfg).map_err(|e| fail(e.into()))?;
    info!("n = {n}, k = {k} done in {:.1}s", started.elapsed().as_secs_f64());
    Ok(BenchmarkRow {
        n,
        k,
        iterations: report.iterations,
        digits: report.digits,
        seconds_per_iter: report.seconds_per_iter,
        certified_lower: report.best.r,
        float_upper: report.upper,
    })
}

/// Decimal expansion of `r` truncated (toward −∞) to `places` digits.
pub fn decimal_floor(r: &Rational, places: usize) -> String {
    let scale = rug::Integer::from(rug::Integer::u_pow_u(10, places as u32));
    let scaled = Rational::from(r * &scale).floor();
    let num = scaled.numer().clone();
    let neg = num.cmp0().is_lt();
    let digits = num.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    format!("{}{int}.{frac}", if neg { "-" } else { "" })
}

pub fn format_table(rows: &[Result<BenchmarkRow, BenchmarkFailure>]) -> String {
    let mut s = format!(
        "{:>3} {:>2} {:>7} {:>6} {:>10}  {:<24} {:<24}\n",
        "n", "k", "# iter", "prec.", "secs/iter", "lower bound r_n", "upper bound"
    );
    for row in rows {
        match row {
            Ok(r) => {
                let _ = writeln!(
                    s,
                    "{:>3} {:>2} {:>7} {:>6} {:>10.3}  {:<24} {:<24}",
                    r.n,
                    r.k,
                    r.iterations,
                    r.digits,
                    r.seconds_per_iter,
                    decimal_floor(&r.certified_lower, 20),
                    format!("{:.20}", r.float_upper.to_f64())
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{:>3} {:>2}  failed: {}", e.n, e.k, e.error);
            }
        }
    }
    s
}

pub fn format_csv(rows: &[Result<BenchmarkRow, BenchmarkFailure>]) -> String {
    let mut s = String::from("n,k,iterations,digits,secs_per_iter,lower_bound,lower_bound_exact,upper_bound\n");
    for r in rows.iter().flatten() {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.4},{},{},{:.30e}",
            r.n,
            r.k,
            r.iterations,
            r.digits,
            r.seconds_per_iter,
            decimal_floor(&r.certified_lower, 30),
            r.certified_lower,
            r.float_upper
        );
    }
    s
}
