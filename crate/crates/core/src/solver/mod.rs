//! Adaptive modified-BB projected gradient on the dual box problem.
//!
//! The solver runs blocks of `M` projected steps
//!
//! ```text
//! U ← P[U − δ·σ·∇ψ(U)]
//! ```
//!
//! with `σ` the safeguarded MBB coefficient (formulas A and B alternating
//! step by step) and `δ` held fixed for the whole block. No step inside a
//! block is ever rejected. At the end of a block (a checkpoint) the iterate is
//! known to be positive definite, the descent condition
//!
//! ```text
//! ψ(Uᶜ) − ψ(Uᶜ⁺ᴹ) ≥ κ ⟨∇ψ(Uᶜ), Uᶜ − Uᶜ⁺ᴹ⟩
//! ```
//!
//! decides whether `δ` is kept or multiplied by `η` once, and the duality gap
//! is tested against `eps`. The block endpoint is accepted either way.
//!
//! Every iterate needs `(S + U)⁻¹` for its gradient, so a failed Cholesky is
//! noticed at the step that produced it. The block then stops and the
//! offending point is pulled back toward the last checkpoint by halving
//! ([`enforce_posdef`]); the repaired point ends the block.

mod step;
mod trace;

use std::time::Instant;

pub use step::{
    cold_sigma, masked_bb_sums, mbb_sigma, mbb_sigma_from_differences, safeguard, sigma_from_sums,
    BbFormula, StepState, DEGENERATE_DENOMINATOR,
};
pub use trace::{
    CheckpointRecord, ConvergenceTrace, EvalCounts, SolverResult, Status, StepRecord, TRACE_HEADER,
};
pub(crate) use trace::csv_err;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CholeskyFactor, SymMatrix};
use crate::objective::{binding_set, project_box, projected_step, DualIterate, ProblemInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Inner steps per block.
    pub m: usize,
    pub kappa: f64,
    pub eta: f64,
    pub delta0: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub eps: f64,
    pub max_checkpoints: usize,
    pub fallback_max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            m: 10,
            kappa: 1e-4,
            eta: 0.8,
            delta0: 1.0,
            sigma_min: 1e-8,
            sigma_max: 1e8,
            eps: 1e-5,
            max_checkpoints: 10_000,
            fallback_max_halvings: 40,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.m < 1 {
            return bad("M must be at least 1");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa must lie in (0, 1)");
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eta must lie in (0, 1)");
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return bad("delta0 must be positive");
        }
        if !(self.sigma_min > 0.0 && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite()) {
            return bad("need 0 < sigma_min <= sigma_max < inf");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        Ok(())
    }
}

/// Wraps iterate construction so every factorization is counted.
pub struct Evaluator<'a> {
    problem: &'a ProblemInstance,
    counts: EvalCounts,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a ProblemInstance) -> Self {
        Self {
            problem,
            counts: EvalCounts::default(),
        }
    }

    pub fn problem(&self) -> &'a ProblemInstance {
        self.problem
    }

    pub fn counts(&self) -> EvalCounts {
        self.counts
    }

    /// Builds the iterate at `u`, or `None` when `S + U` is not positive
    /// definite. `u` must be box-feasible.
    pub fn eval(&mut self, u: SymMatrix) -> Option<DualIterate> {
        assert!(
            self.problem.is_box_feasible(&u),
            "iterate left the box |u_ij| <= rho_ij"
        );
        self.counts.factorizations += 1;
        match DualIterate::new(self.problem, u) {
            Ok(it) => {
                self.counts.inverses += 1;
                Some(it)
            }
            Err(Error::NotPositiveDefinite { .. }) => None,
            Err(e) => unreachable!("unexpected evaluation error: {e}"),
        }
    }
}

/// A point whose factorization succeeded but whose gradient has not been
/// formed yet.
pub struct Trial {
    pub u: SymMatrix,
    pub factor: CholeskyFactor,
}

impl Trial {
    pub fn value(&self) -> f64 {
        -self.factor.logdet()
    }
}

impl Evaluator<'_> {
    /// Factorization only; `None` when `S + U` is not positive definite.
    pub fn trial(&mut self, u: SymMatrix) -> Option<Trial> {
        assert!(
            self.problem.is_box_feasible(&u),
            "iterate left the box |u_ij| <= rho_ij"
        );
        self.counts.factorizations += 1;
        let factor = cholesky(&self.problem.covariance().add(&u)).ok()?;
        Some(Trial { u, factor })
    }

    /// Forms the inverse for an accepted trial point.
    pub fn complete(&mut self, trial: Trial) -> DualIterate {
        self.counts.inverses += 1;
        DualIterate::from_factor(trial.u, trial.factor)
    }
}

/// Where a block ended.
#[derive(Debug)]
pub struct InnerOutcome {
    /// Last iterate with a valid factorization.
    pub end: DualIterate,
    /// Successful steps, each costing one gradient evaluation.
    pub steps_taken: usize,
    /// Set when a step produced a point with `S + U` not positive definite.
    pub posdef_failure: Option<PosdefFailure>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug)]
pub struct PosdefFailure {
    /// Zero-based index of the failing step within the block.
    pub step: usize,
    pub iterate: SymMatrix,
}

/// Runs up to `cfg.m` projected MBB steps from `start` with scale `delta`.
///
/// The binding set is recomputed at every step from the current gradient and
/// the formula alternates on every step taken. Stops early at the first
/// iterate whose factorization fails.
pub fn inner_loop(
    ev: &mut Evaluator<'_>,
    start: &DualIterate,
    state: &mut StepState,
    delta: f64,
    cfg: &SolverConfig,
) -> InnerOutcome {
    let r = ev.problem().penalty();
    let mut current = start.clone();
    let mut steps = Vec::with_capacity(cfg.m);
    for j in 0..cfg.m {
        let binding = binding_set(current.u(), current.grad(), r);
        let formula = state.next_formula;
        let sigma = mbb_sigma(state, &current, &binding, formula, cfg);
        state.next_formula = formula.other();
        state.sigma_last = sigma;
        steps.push(StepRecord {
            formula,
            sigma,
            delta,
        });

        let candidate = projected_step(current.u(), current.grad(), delta * sigma, r);
        match ev.eval(candidate.clone()) {
            Some(next) => {
                state.remember(&current);
                current = next;
            }
            None => {
                return InnerOutcome {
                    end: current,
                    steps_taken: j,
                    posdef_failure: Some(PosdefFailure {
                        step: j,
                        iterate: candidate,
                    }),
                    steps,
                }
            }
        }
    }
    InnerOutcome {
        end: current,
        steps_taken: cfg.m,
        posdef_failure: None,
        steps,
    }
}

/// Non-strict descent test `drop ≥ κ·directional`.
pub fn sufficient_descent(drop: f64, directional: f64, kappa: f64) -> bool {
    drop >= kappa * directional
}

/// `ψ(Uᶜ) − ψ(Uᶜ⁺ᴹ) ≥ κ Σᵢⱼ ∂ᵢⱼψ(Uᶜ)·[Uᶜ − Uᶜ⁺ᴹ]ᵢⱼ`, failing also when
/// `Uᶜ⁺ᴹ = Uᶜ`: a block that returns to its start is a cycle whose period
/// divides `M`, and only shrinking `δ` breaks it.
pub fn descent_check(u_c: &DualIterate, u_cm: &DualIterate, kappa: f64) -> bool {
    if u_c.u() == u_cm.u() {
        return false;
    }
    let drop = u_c.value() - u_cm.value();
    let directional = u_c.grad().inner(&u_c.u().sub(u_cm.u()));
    sufficient_descent(drop, directional, kappa)
}

/// Pulls `bad` back toward `anchor`: returns `anchor + 2⁻ᵗ(bad − anchor)` for
/// the smallest `t ≥ 1` with `S + U ≻ 0`, together with `t`.
///
/// `anchor` must be positive definite and both points box-feasible; the
/// convex combination then stays in the box.
pub fn enforce_posdef(
    ev: &mut Evaluator<'_>,
    anchor: &DualIterate,
    bad: &SymMatrix,
    cfg: &SolverConfig,
) -> Result<(DualIterate, usize)> {
    let r = ev.problem().penalty();
    let direction = bad.sub(anchor.u());
    let mut beta = 1.0;
    for t in 1..=cfg.fallback_max_halvings {
        beta *= 0.5;
        let mut candidate = anchor.u().clone();
        candidate.axpy(beta, &direction);
        // guards against round-off stepping an ulp past a bound
        let candidate = project_box(&candidate, r)?;
        if let Some(it) = ev.eval(candidate) {
            return Ok((it, t));
        }
    }
    Err(Error::FallbackExhausted {
        halvings: cfg.fallback_max_halvings,
    })
}

/// The two starting iterates: `U⁰ = Diag(R)` and
/// `U¹ = P[U⁰ − t∇ψ(U⁰)]` with `t = 1, 1/2, …` until `S + U¹ ≻ 0`.
pub fn cold_start(ev: &mut Evaluator<'_>, cfg: &SolverConfig) -> Result<(DualIterate, DualIterate)> {
    let problem = ev.problem();
    let u0 = ev
        .eval(problem.penalty().diag_matrix())
        .ok_or_else(|| Error::InvalidInstance("S + Diag(R) is not positive definite".into()))?;
    let mut t = 1.0;
    for _ in 0..=cfg.fallback_max_halvings {
        let candidate = projected_step(u0.u(), u0.grad(), t, problem.penalty());
        if let Some(u1) = ev.eval(candidate) {
            return Ok((u0, u1));
        }
        t *= 0.5;
    }
    Err(Error::FallbackExhausted {
        halvings: cfg.fallback_max_halvings,
    })
}

/// Solves the dual problem and recovers `X* = −∇ψ(U*)`.
pub fn solve(problem: &ProblemInstance, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut ev = Evaluator::new(problem);
    let (u0, u1) = cold_start(&mut ev, cfg)?;

    let mut state = StepState::with_previous(&u0, cfg);
    drop(u0);
    let mut current = u1;
    let mut delta = cfg.delta0;
    let mut iters = 0usize;
    let mut steps = Vec::new();
    let mut trace = ConvergenceTrace::default();

    let mut gap = current.gap(problem);
    trace.push(CheckpointRecord {
        checkpoint: 0,
        iters,
        grad_evals: ev.counts().inverses,
        seconds: clock.elapsed().as_secs_f64(),
        dual_value: current.value(),
        gap,
        delta,
        sigma_last: state.sigma_last,
        descent_passed: true,
        fallback_halvings: 0,
    });

    let mut status = Status::BudgetExhausted;
    if gap < cfg.eps {
        status = Status::Converged;
    } else {
        for checkpoint in 1..=cfg.max_checkpoints {
            let block = inner_loop(&mut ev, &current, &mut state, delta, cfg);
            iters += block.steps_taken;
            steps.extend(block.steps);

            let (end, halvings) = match block.posdef_failure {
                None => (block.end, 0),
                Some(failure) => {
                    let (repaired, t) = enforce_posdef(&mut ev, &current, &failure.iterate, cfg)?;
                    // the next block's BB history starts from the checkpoint
                    state.remember(&current);
                    (repaired, t)
                }
            };

            let passed = descent_check(&current, &end, cfg.kappa);
            let delta_used = delta;
            if !passed {
                delta *= cfg.eta;
            }
            current = end;
            gap = current.gap(problem);
            trace.push(CheckpointRecord {
                checkpoint,
                iters,
                grad_evals: ev.counts().inverses,
                seconds: clock.elapsed().as_secs_f64(),
                dual_value: current.value(),
                gap,
                delta: delta_used,
                sigma_last: state.sigma_last,
                descent_passed: passed,
                fallback_halvings: halvings,
            });
            if gap < cfg.eps {
                status = Status::Converged;
                break;
            }
        }
    }

    Ok(SolverResult {
        x_star: current.primal_point(),
        u_star: current,
        final_gap: gap,
        trace,
        status,
        counts: ev.counts(),
        steps,
    })
}

/// Residuals of the optimality conditions `X*(S + U*) = I` and
/// `tr(X*U*) = tr(R|X*|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalityResiduals {
    /// `‖X*(S + U*) − I‖_max`
    pub inverse: f64,
    /// `|tr(X*U*) − tr(R|X*|)|`
    pub complementarity: f64,
}

pub fn check_optimality(problem: &ProblemInstance, result: &SolverResult) -> OptimalityResiduals {
    let n = problem.n();
    let x = &result.x_star;
    let u = result.u_star.u();
    let product = x.matmul(&problem.covariance().add(u));
    let mut inverse = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            inverse = inverse.max((product[i * n + j] - target).abs());
        }
    }
    let complementarity = (x.inner(u) - problem.penalty_term(x)).abs();
    OptimalityResiduals {
        inverse,
        complementarity,
    }
}
