use std::io::Write;

use crate::error::Result;
use crate::linalg::SymMatrix;
use crate::objective::DualIterate;

use super::step::BbFormula;

/// Header of the trace CSV. The column order is fixed.
pub const TRACE_HEADER: [&str; 9] = [
    "checkpoint",
    "iters",
    "seconds",
    "dual_value",
    "gap",
    "delta",
    "sigma_last",
    "descent_passed",
    "fallback_halvings",
];

/// One row per checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointRecord {
    pub checkpoint: usize,
    /// Cumulative accepted iterations.
    pub iters: usize,
    /// Cumulative gradient evaluations (factorization plus inverse).
    pub grad_evals: usize,
    pub seconds: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Step scale in force for the block that ended here.
    pub delta: f64,
    pub sigma_last: f64,
    pub descent_passed: bool,
    pub fallback_halvings: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<CheckpointRecord>,
}

impl ConvergenceTrace {
    pub fn push(&mut self, record: CheckpointRecord) {
        debug_assert!(self
            .records
            .last()
            .map_or(true, |last| last.checkpoint < record.checkpoint));
        self.records.push(record);
    }

    pub fn last(&self) -> Option<&CheckpointRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First checkpoint whose gap is at most `eps`. Later rises in the gap do
    /// not undo attainment.
    pub fn first_attainment(&self, eps: f64) -> Option<&CheckpointRecord> {
        self.records.iter().find(|r| r.gap <= eps)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_HEADER).map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.checkpoint.to_string(),
                r.iters.to_string(),
                r.seconds.to_string(),
                r.dual_value.to_string(),
                r.gap.to_string(),
                r.delta.to_string(),
                r.sigma_last.to_string(),
                r.descent_passed.to_string(),
                r.fallback_halvings.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::Io(io),
        other => crate::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Instrumentation of the `O(n³)` work done by a solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounts {
    /// Cholesky attempts, successful or not.
    pub factorizations: usize,
    /// Inverses formed, i.e. gradient evaluations.
    pub inverses: usize,
}

/// One inner MBB step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub formula: BbFormula,
    pub sigma: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    BudgetExhausted,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "Converged",
            Status::BudgetExhausted => "BudgetExhausted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    /// `(S + U*)⁻¹`
    pub x_star: SymMatrix,
    pub u_star: DualIterate,
    pub final_gap: f64,
    pub trace: ConvergenceTrace,
    pub status: Status,
    pub counts: EvalCounts,
    /// Per-step log of the MBB solver; empty for the baseline.
    pub steps: Vec<StepRecord>,
}

impl SolverResult {
    /// Number of checkpoints after the initial one.
    pub fn checkpoints(&self) -> usize {
        self.trace.last().map_or(0, |r| r.checkpoint)
    }

    pub fn seconds(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.seconds)
    }
}
