use std::time::Instant;

use log::{debug, info};
use rug::{Float, Integer, Rational};

use super::{build_basis, get_sdp, round_to_denominator, verify_certificate, RationalProgram, SosCertificate, SosError, SosSdp};
use crate::ipm::{IterationLog, PotentialReduction, SolverConfig, SolverError, StepOutcome};
use crate::linalg::{ldlt_exact, PsdDecision, SymMatrix};

#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub solver: SolverConfig,
    /// Solver iterations to run.
    pub iters: usize,
    /// Iterations skipped before the first projection attempt.
    pub warmup: usize,
    /// Common denominator for rounding `Ŵ`; `None` means `10^(digits/2)`.
    pub den_bound: Option<Integer>,
    pub m1: Option<Rational>,
    pub m2: Option<Rational>,
}

/// Gap weight `ν` used for certification runs.
pub const CERTIFY_NU: u32 = 20;

impl CertifyConfig {
    /// Solver settings with `ν` = [`CERTIFY_NU`] and gap tolerance
    /// `10^(−digits/2)`, the resolution of the default rounding denominator.
    pub fn new(digits: u32, iters: usize) -> Self {
        let mut solver = SolverConfig::new(digits);
        solver.nu = Rational::from(CERTIFY_NU);
        solver.eps = Some(Rational::from((1, Integer::from(Integer::u_pow_u(10, digits / 2)))));
        CertifyConfig {
            solver,
            iters,
            warmup: 5,
            den_bound: None,
            m1: None,
            m2: None,
        }
    }

    pub fn den_bound(&self) -> Integer {
        self.den_bound
            .clone()
            .unwrap_or_else(|| Integer::from(Integer::u_pow_u(10, self.solver.ctx.digits() / 2)))
    }
}

/// A strictly improved certified bound found after solver iteration `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedStep {
    pub k: usize,
    pub r: Rational,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct CertifyReport {
    /// Certified bounds, strictly increasing.
    pub steps: Vec<CertifiedStep>,
    pub best: SosCertificate,
    /// Embedded primal objective at termination; an upper bound on the relaxation.
    pub upper: Float,
    /// Dual slack `z` at termination.
    pub final_z: Float,
    /// Duality gap tolerance in effect.
    pub eps: Float,
    pub m1: Rational,
    pub m2: Rational,
    pub iterations: usize,
    pub digits: u32,
    pub seconds_per_iter: f64,
    pub basis_size: usize,
    pub constraints: usize,
    pub log: IterationLog,
}

/// Runs the relaxation and, after each solver iteration beyond the warm-up,
/// rounds `Ŵ` to the common denominator, projects onto the identity
/// constraints and keeps the projection if it is exactly PSD and improves
/// the bound.
pub fn certify(prog: &RationalProgram, cfg: &CertifyConfig) -> Result<CertifyReport, SosError> {
    certify_observed(prog, cfg, |_| {})
}

/// [`certify`], calling `observe` with the solver after every accepted iteration.
pub fn certify_observed(
    prog: &RationalProgram,
    cfg: &CertifyConfig,
    mut observe: impl FnMut(&PotentialReduction),
) -> Result<CertifyReport, SosError> {
    let basis = build_basis(prog)?;
    let sdp = get_sdp(prog, &basis, cfg.m1.clone(), cfg.m2.clone())?;
    info!(
        "basis size {}, {} constraints, M1 = {}, M2 = {}",
        basis.len(),
        sdp.embedding.base().m(),
        sdp.embedding.m1(),
        sdp.embedding.m2()
    );
    let ctx = cfg.solver.ctx;
    let start = sdp.embedding.initial_point(&ctx, &cfg.solver.nu_at(&ctx))?;
    let mut driver = PotentialReduction::new(sdp.problem(), &cfg.solver, start)?;
    let den = cfg.den_bound();

    let started = Instant::now();
    let mut steps: Vec<CertifiedStep> = Vec::new();
    let mut best: Option<SosCertificate> = None;
    let mut diagnostic = String::from("no projection attempted");
    while driver.iterations() < cfg.iters {
        let converged = match driver.step() {
            Ok(outcome) => outcome == StepOutcome::Converged,
            Err(e @ SolverError::PrecisionExhausted { .. }) if best.is_some() => {
                info!("stopping: {e}");
                break;
            }
            Err(e) => return Err(e.into()),
        };
        if !converged {
            observe(&driver);
        }
        let k = driver.iterations();
        if k <= cfg.warmup && !converged {
            continue;
        }
        match attempt(&sdp, driver.state().z.clone(), &den) {
            Ok(cert) => {
                if best.as_ref().is_none_or(|b| cert.r > b.r) {
                    debug!("iteration {k}: certified r = {}", cert.r.to_f64());
                    steps.push(CertifiedStep {
                        k,
                        r: cert.r.clone(),
                        certified: true,
                    });
                    best = Some(cert);
                }
            }
            Err(d) => diagnostic = d,
        }
        if converged {
            break;
        }
    }
    let iterations = driver.iterations();
    let elapsed = started.elapsed().as_secs_f64();
    let state = driver.state();
    let final_z = sdp.decode(&state.z).z;
    let upper = sdp.problem().primal_objective(&state.x, driver.ctx());
    let eps = cfg.solver.eps_at(driver.ctx());
    let digits = driver.ctx().digits();
    let log = driver.log().clone();
    let Some(best) = best else {
        return Err(SosError::NoCertificateFound { iterations, diagnostic });
    };
    debug_assert!(verify_certificate(prog, &best));
    Ok(CertifyReport {
        steps,
        best,
        upper,
        final_z,
        eps,
        m1: sdp.embedding.m1().clone(),
        m2: sdp.embedding.m2().clone(),
        iterations,
        digits,
        seconds_per_iter: if iterations == 0 { 0.0 } else { elapsed / iterations as f64 },
        basis_size: basis.len(),
        constraints: sdp.embedding.base().m(),
        log,
    })
}

/// Rationalize, project, and test one dual iterate. On failure returns a
/// description of why the projection is not a certificate.
fn attempt(sdp: &SosSdp, zhat: SymMatrix<Float>, den: &Integer) -> Result<SosCertificate, String> {
    let pt = sdp.decode(&zhat);
    let w = pt.w_hat.map(|v| round_to_denominator(v, den));
    let (wt, r) = sdp.system.project(&w).map_err(|e| e.to_string())?;
    match ldlt_exact(&wt) {
        PsdDecision::Psd { pivots, .. } => Ok(SosCertificate {
            r,
            basis: sdp.system.basis.clone(),
            w: wt,
            psd_witness: pivots,
        }),
        PsdDecision::NotPsd { value, .. } => Err(format!(
            "projection is not PSD (vᵀWv = {:.3e})",
            value.to_f64()
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::SparsePolynomial;

    fn prog(f: &str, g: &str) -> RationalProgram {
        let vars = vec!["x".to_string()];
        let f = SparsePolynomial::parse(f, &vars).unwrap();
        let g = SparsePolynomial::parse(g, &vars).unwrap();
        RationalProgram::new(vars, f, g).unwrap()
    }

    #[test]
    fn square_certifies_zero() {
        let p = prog("x^2", "1");
        let report = certify(&p, &CertifyConfig::new(30, 40)).unwrap();
        assert_eq!(report.best.r, 0);
        assert!(verify_certificate(&p, &report.best));
    }

    #[test]
    fn completed_square_approaches_one() {
        let p = prog("x^2 + 2x + 2", "1");
        let report = certify(&p, &CertifyConfig::new(30, 40)).unwrap();
        let r = report.best.r.to_f64();
        assert!(r <= 1.0 && r > 0.999_999, "r = {r}");
        assert!(report.steps.windows(2).all(|w| w[0].r < w[1].r));
    }
}
