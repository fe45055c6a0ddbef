//! Modified Barzilai–Borwein coefficients.
//!
//! The BB quotient is computed only over coordinates outside the binding set
//! of the current iterate: binding coordinates are guaranteed to stay on their
//! bound after the next projected step, so they carry no curvature
//! information. The raw quotient is clamped to `[sigma_min, sigma_max]`.

use crate::linalg::SymMatrix;
use crate::objective::{DualIterate, IndexSet};

use super::SolverConfig;

/// Curvature cosine `⟨s,y⟩ / (‖s‖‖y‖)` at or below which a BB pair is degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BbFormula {
    /// `‖ΔU‖² / ⟨ΔU, Δ∇ψ⟩`
    A,
    /// `⟨ΔU, Δ∇ψ⟩ / ‖Δ∇ψ‖²`
    B,
}

impl BbFormula {
    pub fn other(self) -> Self {
        match self {
            BbFormula::A => BbFormula::B,
            BbFormula::B => BbFormula::A,
        }
    }
}

/// History carried from one inner step to the next (and across blocks).
#[derive(Clone, Debug)]
pub struct StepState {
    /// The iterate before the current one, with its gradient.
    pub prev: Option<(SymMatrix, SymMatrix)>,
    pub next_formula: BbFormula,
    pub sigma_last: f64,
}

impl StepState {
    pub fn new(cfg: &SolverConfig) -> Self {
        Self {
            prev: None,
            next_formula: BbFormula::A,
            sigma_last: cold_sigma(cfg),
        }
    }

    pub fn with_previous(prev: &DualIterate, cfg: &SolverConfig) -> Self {
        Self {
            prev: Some((prev.u().clone(), prev.grad().clone())),
            ..Self::new(cfg)
        }
    }

    /// Records `it` as the previous iterate for the next step.
    pub fn remember(&mut self, it: &DualIterate) {
        match &mut self.prev {
            Some((u, g)) => {
                u.clone_from(it.u());
                g.clone_from(it.grad());
            }
            None => self.prev = Some((it.u().clone(), it.grad().clone())),
        }
    }
}

/// Coefficient used when no history exists: a unit step, safeguarded.
pub fn cold_sigma(cfg: &SolverConfig) -> f64 {
    safeguard(1.0, cfg)
}

#[inline]
pub fn safeguard(sigma: f64, cfg: &SolverConfig) -> f64 {
    sigma.max(cfg.sigma_min).min(cfg.sigma_max)
}

/// Masked sums `(⟨s,s⟩, ⟨s,y⟩, ⟨y,y⟩)` over coordinates not in `binding`,
/// with `s = u − u_prev` and `y = g − g_prev`. All `n²` entries are visited.
pub fn masked_bb_sums(
    u: &SymMatrix,
    u_prev: &SymMatrix,
    g: &SymMatrix,
    g_prev: &SymMatrix,
    binding: &IndexSet,
) -> (f64, f64, f64) {
    let (mut ss, mut sy, mut yy) = (0.0, 0.0, 0.0);
    let iter = u
        .as_slice()
        .iter()
        .zip(u_prev.as_slice())
        .zip(g.as_slice().iter().zip(g_prev.as_slice()))
        .zip(binding.mask());
    for (((u, up), (g, gp)), &bound) in iter {
        if bound {
            continue;
        }
        let s = u - up;
        let y = g - gp;
        ss += s * s;
        sy += s * y;
        yy += y * y;
    }
    (ss, sy, yy)
}

/// Safeguarded coefficient from masked sums. The pair is degenerate, and
/// the result is `sigma_max`, when `⟨s,y⟩ ≤ DEGENERATE_DENOMINATOR·‖s‖‖y‖`:
/// nonpositive curvature, an all-zero difference, or a NaN. The test is
/// relative so that short steps near the optimum keep a finite coefficient.
pub fn sigma_from_sums(ss: f64, sy: f64, yy: f64, formula: BbFormula, cfg: &SolverConfig) -> f64 {
    if !(sy > DEGENERATE_DENOMINATOR * (ss * yy).sqrt()) {
        return cfg.sigma_max;
    }
    let raw = match formula {
        BbFormula::A => ss / sy,
        BbFormula::B => sy / yy,
    };
    if raw.is_nan() {
        return cfg.sigma_max;
    }
    safeguard(raw, cfg)
}

/// MBB coefficient from explicit differences `ΔU` and `Δ∇ψ`.
pub fn mbb_sigma_from_differences(
    du: &SymMatrix,
    dg: &SymMatrix,
    binding: &IndexSet,
    formula: BbFormula,
    cfg: &SolverConfig,
) -> f64 {
    let zero = SymMatrix::zeros(du.n());
    let (ss, sy, yy) = masked_bb_sums(du, &zero, dg, &zero, binding);
    sigma_from_sums(ss, sy, yy, formula, cfg)
}

/// MBB coefficient for the step leaving `current`, using the history in `state`.
pub fn mbb_sigma(
    state: &StepState,
    current: &DualIterate,
    binding: &IndexSet,
    formula: BbFormula,
    cfg: &SolverConfig,
) -> f64 {
    match &state.prev {
        None => cold_sigma(cfg),
        Some((u_prev, g_prev)) => {
            let (ss, sy, yy) = masked_bb_sums(current.u(), u_prev, current.grad(), g_prev, binding);
            sigma_from_sums(ss, sy, yy, formula, cfg)
        }
    }
}
