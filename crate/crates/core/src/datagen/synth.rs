//! Random sample covariances with a sparse inverse.
//!
//! 1. `S′` has ones on the diagonal; each upper-triangle position is
//!    independently drawn with probability `density`, with sign ±1 equally
//!    likely, mirrored below. A lone ±1 pair `[[1, s], [s, 1]]` is singular,
//!    so plain Bernoulli placement almost never yields an invertible matrix.
//!    While the LU test fails, one drawn pair is removed from the support of
//!    a null vector (the pair whose smaller endpoint weight is largest, the
//!    latest drawn on ties).
//! 2. `S″ = (S′)⁻¹ + τN` with `N` symmetric, entries uniform on `[0, 1)`.
//! 3. `S = S″ − min{λ_min(S″) − ς, 0}·I`.
//!
//! Draw order from a single [`SplitMix64`] stream: for each attempt, rows
//! `i = 0..n`, columns `j = i+1..n`, one uniform `u`; if `u < density` one more
//! uniform picks the sign (`< 0.5` is `+1`). After the accepted `S′`, the noise
//! takes one uniform per position `i = 0..n`, `j = i..n` (diagonal included).

use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymMatrix};

use super::lu::lu_inverse;
use super::rng::SplitMix64;

/// Redraws of `S′` before giving up.
pub const MAX_ATTEMPTS: usize = 100;

/// Bisection width for the smallest eigenvalue.
const LAMBDA_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// Off-diagonal fill fraction of `S′`.
    pub density: f64,
    /// Noise scale `τ`.
    pub tau: f64,
    /// Spectrum floor `ς`.
    pub sigma_shift: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 100,
            density: 0.01,
            tau: 0.15,
            sigma_shift: 1e-4,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.density > 0.0 && self.density < 1.0) {
            return bad(format!("density must lie in (0, 1), got {}", self.density));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be nonnegative, got {}", self.tau));
        }
        if !(self.sigma_shift > 0.0 && self.sigma_shift.is_finite()) {
            return bad(format!("shift must be positive, got {}", self.sigma_shift));
        }
        Ok(())
    }
}

/// Generated covariance with the intermediate quantities kept for inspection.
#[derive(Clone, Debug)]
pub struct Synthetic {
    /// The sparse sign matrix `S′`.
    pub sparse: SymMatrix,
    /// `S`
    pub covariance: SymMatrix,
    /// Lower bound on `λ_min(S″)` from bisection.
    pub lambda_min: f64,
    /// Amount added to the diagonal of `S″` (zero when no shift was needed).
    pub shift: f64,
    /// Draws of `S′` consumed, including the accepted one.
    pub attempts: usize,
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<SymMatrix> {
    generate(cfg).map(|g| g.covariance)
}

pub fn generate(cfg: &SynthConfig) -> Result<Synthetic> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = SplitMix64::new(cfg.seed);

    let mut accepted = None;
    for attempt in 1..=MAX_ATTEMPTS {
        let sparse = sample_sparse_signs(n, cfg.density, &mut rng);
        if let Some(inv) = lu_inverse(sparse.as_slice(), n) {
            accepted = Some((sparse, inv, attempt));
            break;
        }
    }
    let (sparse, inv, attempts) = accepted.ok_or(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })?;

    let mut perturbed = SymMatrix::symmetrize(n, inv);
    let noise = SymMatrix::from_fn(n, |_, _| rng.next_f64());
    perturbed.axpy(cfg.tau, &noise);

    let lambda_min = lambda_min_lower_bound(&perturbed);
    let shift = -(lambda_min - cfg.sigma_shift).min(0.0);
    let mut covariance = perturbed;
    if shift > 0.0 {
        covariance.shift_diagonal(shift);
    }
    Ok(Synthetic {
        sparse,
        covariance,
        lambda_min,
        shift,
        attempts,
    })
}

/// Diagonal shift that makes a singular `S′` safely invertible for the
/// null-vector estimate.
const NULL_SHIFT: f64 = 1e-7;

fn sample_sparse_signs(n: usize, density: f64, rng: &mut SplitMix64) -> SymMatrix {
    let mut drawn = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.next_f64() < density {
                let sign = if rng.next_f64() < 0.5 { 1.0 } else { -1.0 };
                drawn.push((i, j, sign));
            }
        }
    }

    let mut m = SymMatrix::identity(n);
    for &(i, j, s) in &drawn {
        m.set(i, j, s);
    }
    // Each round removes one pair from the support of a null vector. The
    // identity is invertible, so this ends.
    while lu_inverse(m.as_slice(), n).is_none() {
        let v = null_vector(&m);
        let weight = |&(i, j, _): &(usize, usize, f64)| v[i].abs().min(v[j].abs());
        let (k, _) = drawn
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (k, p)| if weight(p) >= best.1 { (k, weight(p)) } else { best });
        let (i, j, _) = drawn.remove(k);
        m.set(i, j, 0.0);
    }
    m
}

/// Approximate null vector of a singular `m` by two steps of inverse
/// iteration on `m + NULL_SHIFT·I`, scaled to unit max norm.
fn null_vector(m: &SymMatrix) -> Vec<f64> {
    let n = m.n();
    let mut shifted = m.clone();
    shifted.shift_diagonal(NULL_SHIFT);
    let inv = lu_inverse(shifted.as_slice(), n).unwrap_or_else(|| SymMatrix::identity(n).as_slice().to_vec());
    // start vector with distinct entries, so no lone pair null vector is orthogonal to it
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 / (k + 1) as f64).collect();
    for _ in 0..2 {
        let w: Vec<f64> = (0..n)
            .map(|r| inv[r * n..(r + 1) * n].iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        v = w.into_iter().map(|x| x / scale).collect();
    }
    v
}

/// Largest `ζ` found with `A − ζI` Cholesky-factorable, by bisection on
/// `[−(1 + r), 1 + r]` (`r` the largest absolute row sum) down to width
/// `1e-10`. The result never exceeds the computed `λ_min(A)`.
pub fn lambda_min_lower_bound(a: &SymMatrix) -> f64 {
    let n = a.n();
    let radius = 1.0
        + (0..n)
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius, radius);
    let factors_at = |zeta: f64| {
        let mut shifted = a.clone();
        shifted.shift_diagonal(-zeta);
        cholesky(&shifted).is_ok()
    };
    debug_assert!(factors_at(lo));
    while hi - lo > LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        if factors_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
