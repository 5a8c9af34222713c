use std::time::Instant;

use log::{debug, info};
use rug::{Float, Rational};

use super::plane::setup_with_factors;
use super::{
    plane_search_minimize, search_directions, PlaneSearchProblem, DirectionResidual, FloatProblem, IterateState, SolverConfig,
    SolverError,
};
use crate::linalg::{PrecisionContext, SymMatrix};
use crate::sdp::{default_big_m, BigMEmbedding, SdProblem};

/// One accepted iteration.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    pub gap: Float,
    pub potential: Float,
    pub p: Float,
    pub q: Float,
    /// Decimal digits in effect when the step was taken.
    pub digits: u32,
    pub seconds: f64,
    pub residual: DirectionResidual,
    /// Plane-search objective at the accepted `(p, q)`.
    pub plane_value: Float,
    /// Plane-search objective at the origin.
    pub plane_origin_value: Float,
    /// Whether every log argument of the plane objective was positive at `(p, q)`.
    pub plane_interior: bool,
    /// `|log(gap⁺/gap) − log(1 + c₁p + c₂q)|`.
    pub gap_identity_error: Float,
}

#[derive(Clone, Debug, Default)]
pub struct IterationLog {
    pub initial_gap: Option<Float>,
    pub initial_potential: Option<Float>,
    pub records: Vec<IterationRecord>,
}

impl IterationLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Whether the potential strictly decreases from the start through every record.
    pub fn potential_strictly_decreasing(&self) -> bool {
        let mut prev = self.initial_potential.clone();
        for r in &self.records {
            if let Some(p) = &prev {
                if r.potential >= *p {
                    return false;
                }
            }
            prev = Some(r.potential.clone());
        }
        true
    }

    /// Per-iteration CSV: `iteration,gap,potential,p,q,digits`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,gap,potential,p,q,digits\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.19e},{:.19e},{:.19e},{:.19e},{}\n",
                r.iter, r.gap, r.potential, r.p, r.q, r.digits
            ));
        }
        out
    }
}

/// Final iterate of a solve.
#[derive(Clone, Debug)]
pub struct Solution {
    /// The problem the iterates belong to (the embedded problem when auto-embedded).
    pub problem: SdProblem,
    pub state: IterateState,
    pub log: IterationLog,
    pub ctx: PrecisionContext,
    pub converged: bool,
    pub embedding: Option<BigMEmbedding>,
}

impl Solution {
    /// Primal point of the original problem.
    pub fn x(&self) -> Vec<Float> {
        match &self.embedding {
            Some(e) => e.recover_primal(&self.state.x).0,
            None => self.state.x.clone(),
        }
    }

    /// Dual point of the original problem.
    pub fn z(&self) -> SymMatrix<Float> {
        match &self.embedding {
            Some(e) => e.recover_dual(&self.state.z).0,
            None => self.state.z.clone(),
        }
    }

    /// Embedding slacks `(t, z)`, when auto-embedded.
    pub fn slacks(&self) -> Option<(Float, Float)> {
        self.embedding.as_ref().map(|e| {
            let (_, t) = e.recover_primal(&self.state.x);
            let (_, z, _) = e.recover_dual(&self.state.z);
            (t, z)
        })
    }

    pub fn gap(&self) -> &Float {
        &self.state.gap
    }

    /// `cᵀx` of the solved problem (includes `M₁·t` when embedded).
    pub fn primal_objective(&self) -> Float {
        self.problem.primal_objective(&self.state.x, &self.ctx)
    }

    /// `−tr(F₀Z)` of the solved problem.
    pub fn dual_objective(&self) -> Float {
        self.problem.dual_objective(&self.state.z, &self.ctx)
    }

    /// Objective values recovered for the original problem.
    pub fn base_objectives(&self) -> (Float, Float) {
        match &self.embedding {
            Some(e) => (
                e.base_primal_objective(&self.state.x, &self.ctx),
                e.base_dual_objective(&self.state.z, &self.ctx),
            ),
            None => (self.primal_objective(), self.dual_objective()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// An iteration was accepted; the gap is still above tolerance.
    Continue,
    /// The gap is at or below tolerance; nothing was done.
    Converged,
}

/// Step-wise driver of the potential-reduction loop.
#[derive(Debug)]
pub struct PotentialReduction {
    problem: SdProblem,
    fp: FloatProblem,
    cfg: SolverConfig,
    ctx: PrecisionContext,
    state: IterateState,
    eps: Float,
    log: IterationLog,
}

impl PotentialReduction {
    /// `start` must be strictly feasible for `problem`.
    pub fn new(problem: &SdProblem, cfg: &SolverConfig, start: IterateState) -> Result<Self, SolverError> {
        cfg.validate()?;
        let ctx = cfg.ctx;
        let fp = FloatProblem::new(problem, &ctx);
        let mut state = start;
        state.set_prec(ctx.bits());
        let state = refresh(&fp, state, &cfg.nu_at(&ctx))?;
        let log = IterationLog {
            initial_gap: Some(state.gap.clone()),
            initial_potential: Some(state.potential.clone()),
            records: Vec::new(),
        };
        Ok(PotentialReduction {
            problem: problem.clone(),
            fp,
            eps: cfg.eps_at(&ctx),
            cfg: cfg.clone(),
            ctx,
            state,
            log,
        })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn log(&self) -> &IterationLog {
        &self.log
    }

    pub fn problem(&self) -> &SdProblem {
        &self.problem
    }

    pub fn iterations(&self) -> usize {
        self.log.records.len()
    }

    pub fn is_converged(&self) -> bool {
        self.state.gap <= self.eps
    }

    /// Takes one iteration, raising the working precision on numerical
    /// failure until the step succeeds or the digit cap is reached.
    pub fn step(&mut self) -> Result<StepOutcome, SolverError> {
        if self.is_converged() {
            return Ok(StepOutcome::Converged);
        }
        let mut failures = 0u32;
        loop {
            match self.try_step() {
                Ok(record) => {
                    debug!(
                        "iter {} gap {} potential {} p {} q {}",
                        record.iter,
                        record.gap.to_f64(),
                        record.potential.to_f64(),
                        record.p.to_f64(),
                        record.q.to_f64()
                    );
                    self.log.records.push(record);
                    return Ok(StepOutcome::Continue);
                }
                Err(e) if e.is_precision_related() => {
                    failures += 1;
                    if failures < self.cfg.escalation.stall_threshold {
                        continue;
                    }
                    failures = 0;
                    self.escalate(&e)?;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn escalate(&mut self, cause: &SolverError) -> Result<(), SolverError> {
        let digits = self.ctx.digits() + self.cfg.escalation.digit_step;
        let max_digits = self.cfg.escalation.max_digits;
        if digits > max_digits {
            return Err(SolverError::PrecisionExhausted { max_digits });
        }
        info!("raising precision to {digits} digits after: {cause}");
        self.ctx = self.ctx.with_digits(digits);
        self.fp = FloatProblem::new(&self.problem, &self.ctx);
        let mut state = self.state.clone();
        state.set_prec(self.ctx.bits());
        self.state = refresh(&self.fp, state, &self.cfg.nu_at(&self.ctx))?;
        self.eps.set_prec(self.ctx.bits());
        Ok(())
    }

    fn try_step(&mut self) -> Result<IterationRecord, SolverError> {
        let started = Instant::now();
        let ctx = self.ctx;
        let prec = ctx.bits();
        let nu = self.cfg.nu_at(&ctx);
        let plane_tol = self.cfg.plane_tol_at(&ctx);
        let n = self.fp.n();

        let dir = search_directions(&self.fp, &self.state, &nu)?;
        let residual = dir.residual(&self.fp, &self.state);
        let (lf, lz) = IterateState::factors(&self.state.fx, &self.state.z, &ctx)?;
        let ps = setup_with_factors(&self.fp, &self.state, &dir, &lf, &lz, prec)?;
        let res = plane_search_minimize(&ps, n, &nu, &plane_tol)?;
        let plane_interior = ps.is_interior(&res.p, &res.q);
        let zero = Float::new(prec);
        let plane_origin_value = ps
            .objective(&PlaneSearchProblem::weight(n, &nu), &zero, &zero)
            .expect("the origin is interior");

        let x: Vec<Float> = self
            .state
            .x
            .iter()
            .zip(&dir.dx)
            .map(|(xi, di)| Float::with_val(prec, xi + Float::with_val(prec, &res.p * di)))
            .collect();
        let z = self.state.z.add_scaled(&res.q, &dir.dz);
        let fx = self.fp.eval_f(&x);
        let (lf, lz) = IterateState::factors(&fx, &z, &ctx)?;
        let next = IterateState::from_parts(x, z, fx, &lf, &lz, &nu);
        if next.potential >= self.state.potential || next.gap.cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(SolverError::LineSearchStall);
        }

        let mut ratio = Float::with_val(prec, &next.gap / &self.state.gap);
        ratio.ln_mut();
        let mut predicted = ps.gap_ratio(&res.p, &res.q);
        predicted.ln_mut();
        let gap_identity_error = Float::with_val(prec, ratio - predicted).abs();

        self.state = next;
        Ok(IterationRecord {
            iter: self.log.records.len() + 1,
            gap: self.state.gap.clone(),
            potential: self.state.potential.clone(),
            p: res.p,
            q: res.q,
            digits: ctx.digits(),
            seconds: started.elapsed().as_secs_f64(),
            residual,
            plane_value: res.value,
            plane_origin_value,
            plane_interior,
            gap_identity_error,
        })
    }

    pub fn into_solution(self, embedding: Option<BigMEmbedding>) -> Solution {
        let converged = self.is_converged();
        Solution {
            problem: self.problem,
            state: self.state,
            log: self.log,
            ctx: self.ctx,
            converged,
            embedding,
        }
    }
}

/// Recomputes `F(x)`, gap and potential of `state` at the precision of `fp`.
fn refresh(fp: &FloatProblem, state: IterateState, nu: &Float) -> Result<IterateState, SolverError> {
    let fx = fp.eval_f(&state.x);
    let (lf, lz) = IterateState::factors(&fx, &state.z, fp.ctx())?;
    Ok(IterateState::from_parts(state.x, state.z, fx, &lf, &lz, nu))
}

/// Runs the potential-reduction method until the duality gap is at most
/// `ε` or `max_iter` iterations have been taken.
///
/// With `start = None` the problem is first embedded with the default
/// Big-M bounds and started from the constructed interior point; the
/// returned [`Solution`] maps back to the original variables.
pub fn solve(p: &SdProblem, cfg: &SolverConfig, start: Option<IterateState>) -> Result<Solution, SolverError> {
    match start {
        Some(s) => {
            cfg.validate()?;
            run(p, cfg, s, None)
        }
        None => {
            let m = default_big_m(p);
            solve_with_big_m(p, cfg, m.clone(), m)
        }
    }
}

/// [`solve`] on the Big-M embedding of `p` with explicit bounds `M₁`, `M₂`.
pub fn solve_with_big_m(p: &SdProblem, cfg: &SolverConfig, m1: Rational, m2: Rational) -> Result<Solution, SolverError> {
    cfg.validate()?;
    let e = BigMEmbedding::new(p, m1, m2)?;
    let s = e.initial_point(&cfg.ctx, &cfg.nu_at(&cfg.ctx))?;
    let problem = e.embedded().clone();
    run(&problem, cfg, s, Some(e))
}

fn run(
    problem: &SdProblem,
    cfg: &SolverConfig,
    start: IterateState,
    embedding: Option<BigMEmbedding>,
) -> Result<Solution, SolverError> {
    let mut driver = PotentialReduction::new(problem, cfg, start)?;
    while driver.iterations() < cfg.max_iter {
        if driver.step()? == StepOutcome::Converged {
            break;
        }
    }
    let solution = driver.into_solution(embedding);
    if solution.converged {
        Ok(solution)
    } else {
        Err(SolverError::MaxIterations {
            gap: format!("{:.9e}", solution.state.gap),
            best: Box::new(solution),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn toy() -> SdProblem {
        let f0 = SymMatrix::from_fn(2, |i, j| Rational::from(u32::from(i != j)));
        SdProblem::new(vec![Rational::from(1)], vec![f0, SymMatrix::identity(2)]).unwrap()
    }

    #[test]
    fn toy_problem_reaches_one() {
        let cfg = SolverConfig::new(40);
        let sol = solve(&toy(), &cfg, None).unwrap();
        let x = sol.x();
        let err = Float::with_val(sol.ctx.bits(), &x[0] - 1u32).abs();
        assert!(err < 1e-25, "x = {}", x[0]);
        assert!(sol.log.potential_strictly_decreasing());
    }

    #[test]
    fn iteration_cap_returns_best() {
        let mut cfg = SolverConfig::new(30);
        cfg.max_iter = 2;
        match solve(&toy(), &cfg, None) {
            Err(SolverError::MaxIterations { best, .. }) => assert_eq!(best.log.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
