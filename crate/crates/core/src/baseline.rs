//! Projected gradient with Armijo backtracking on the same dual problem.
//!
//! Each iteration tries `U(t) = P[U − t∇ψ(U)]` for `t = t0, t0·β, t0·β², …`
//! and accepts the first trial point that is positive definite and satisfies
//!
//! ```text
//! ψ(U(t)) ≤ ψ(U) − c·⟨∇ψ(U), U − U(t)⟩
//! ```
//!
//! Trial points cost a Cholesky only; the inverse is formed once a point is
//! accepted, so the baseline also spends one gradient evaluation per
//! iteration.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::objective::{projected_step, ProblemInstance};
use crate::solver::{CheckpointRecord, ConvergenceTrace, Evaluator, SolverResult, Status};

/// Step below which the line search gives up.
pub const MIN_STEP: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq)]
pub struct PgConfig {
    pub t0: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub eps: f64,
    pub max_iters: usize,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            eps: 1e-5,
            max_iters: 100_000,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return bad("t0 must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        Ok(())
    }
}

/// Runs the baseline from `U⁰ = Diag(R)`. The trace holds one record per
/// iteration; `delta` is the accepted step and `fallback_halvings` the number
/// of backtracks it took.
pub fn solve_pg(problem: &ProblemInstance, cfg: &PgConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let r = problem.penalty();
    let mut ev = Evaluator::new(problem);
    let mut current = ev
        .eval(r.diag_matrix())
        .ok_or_else(|| Error::InvalidInstance("S + Diag(R) is not positive definite".into()))?;

    let mut trace = ConvergenceTrace::default();
    let mut gap = current.gap(problem);
    let record = |k: usize, ev: &Evaluator<'_>, value: f64, gap: f64, t: f64, backtracks: usize| {
        CheckpointRecord {
            checkpoint: k,
            iters: k,
            grad_evals: ev.counts().inverses,
            seconds: clock.elapsed().as_secs_f64(),
            dual_value: value,
            gap,
            delta: t,
            sigma_last: 1.0,
            descent_passed: true,
            fallback_halvings: backtracks,
        }
    };
    trace.push(record(0, &ev, current.value(), gap, cfg.t0, 0));

    let mut status = Status::BudgetExhausted;
    if gap < cfg.eps {
        status = Status::Converged;
    } else {
        for k in 1..=cfg.max_iters {
            let mut t = cfg.t0;
            let mut backtracks = 0;
            let accepted = loop {
                let candidate = projected_step(current.u(), current.grad(), t, r);
                let directional = current.grad().inner(&current.u().sub(&candidate));
                if let Some(trial) = ev.trial(candidate) {
                    if trial.value() <= current.value() - cfg.armijo_c * directional {
                        break ev.complete(trial);
                    }
                }
                t *= cfg.backtrack_factor;
                backtracks += 1;
                if t < MIN_STEP {
                    return Err(Error::LineSearchStalled { step: t });
                }
            };
            current = accepted;
            gap = current.gap(problem);
            trace.push(record(k, &ev, current.value(), gap, t, backtracks));
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
        steps: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    #[test]
    fn scalar_optimum() {
        let p = ProblemInstance::new(SymMatrix::from_diag(&[2.0]), SymMatrix::from_diag(&[1.0])).unwrap();
        let res = solve_pg(&p, &PgConfig { eps: 1e-10, ..Default::default() }).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!((res.u_star.u().get(0, 0) - 1.0).abs() < 1e-12);
        assert!((res.x_star.get(0, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn dual_values_never_increase() {
        let s = SymMatrix::from_rows([[1.0, 0.6, 0.2], [0.6, 1.5, -0.4], [0.2, -0.4, 0.8]]).unwrap();
        let p = ProblemInstance::with_uniform_penalty(s, 0.1).unwrap();
        let res = solve_pg(&p, &PgConfig { eps: 1e-9, ..Default::default() }).unwrap();
        assert_eq!(res.status, Status::Converged);
        for w in res.trace.records.windows(2) {
            assert!(w[1].dual_value <= w[0].dual_value);
        }
        assert_eq!(res.counts.inverses, res.trace.len());
    }

    #[test]
    fn rejects_bad_config() {
        let p = ProblemInstance::new(SymMatrix::from_diag(&[2.0]), SymMatrix::from_diag(&[1.0])).unwrap();
        let cfg = PgConfig { backtrack_factor: 1.0, ..Default::default() };
        assert!(matches!(solve_pg(&p, &cfg), Err(Error::InvalidConfig(_))));
    }
}
