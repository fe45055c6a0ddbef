//! Primal and dual objectives, the dual gradient, the duality gap, box
//! projection and the active/binding index sets.
//!
//! The primal problem is
//!
//! ```text
//! min_{X ≻ 0}  tr(SX) − log det X + Σᵢⱼ ρᵢⱼ |xᵢⱼ|
//! ```
//!
//! and its dual, solved here, is the box-constrained problem
//!
//! ```text
//! min_U  ψ(U) = −log det(S + U)   s.t. |uᵢⱼ| ≤ ρᵢⱼ
//! ```
//!
//! with `∇ψ(U) = −(S + U)⁻¹`, so the primal point paired with `U` is
//! `X_U = (S + U)⁻¹ = −∇ψ(U)`.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, frob_inner, CholeskyFactor, SymMatrix};

/// One SICE problem: sample covariance `S` and elementwise penalties `R`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    s: SymMatrix,
    r: SymMatrix,
}

impl ProblemInstance {
    /// Validates `R ≥ 0` elementwise and `S + Diag(R) ≻ 0`.
    pub fn new(s: SymMatrix, r: SymMatrix) -> Result<Self> {
        if s.n() != r.n() {
            return Err(Error::DimensionMismatch {
                left: s.n(),
                right: r.n(),
            });
        }
        if let Some(bad) = r.as_slice().iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "penalty entries must be finite and nonnegative, found {bad}"
            )));
        }
        if s.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("S has non-finite entries".into()));
        }
        let shifted = s.add(&r.diag_matrix());
        if cholesky(&shifted).is_err() {
            return Err(Error::InvalidInstance(
                "S + Diag(R) is not positive definite".into(),
            ));
        }
        Ok(Self { s, r })
    }

    /// Uniform penalty `R = ρ·eeᵀ`.
    pub fn with_uniform_penalty(s: SymMatrix, rho: f64) -> Result<Self> {
        let n = s.n();
        Self::new(s, SymMatrix::from_fn(n, |_, _| rho))
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.s
    }

    pub fn penalty(&self) -> &SymMatrix {
        &self.r
    }

    /// `Σᵢⱼ ρᵢⱼ |xᵢⱼ|` over all `n²` entries, diagonal included.
    pub fn penalty_term(&self, x: &SymMatrix) -> f64 {
        self.r
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(rho, v)| rho * v.abs())
            .sum()
    }

    /// Duality gap at primal point `x`: `tr(SX) + Σ ρᵢⱼ|xᵢⱼ| − n`.
    pub fn gap_at_primal(&self, x: &SymMatrix) -> f64 {
        self.s.inner(x) + self.penalty_term(x) - self.n() as f64
    }

    pub fn is_box_feasible(&self, u: &SymMatrix) -> bool {
        first_infeasible(u, &self.r).is_none()
    }
}

fn first_infeasible(u: &SymMatrix, r: &SymMatrix) -> Option<(usize, usize)> {
    let n = u.n();
    for i in 0..n {
        for j in i..n {
            if !(u.get(i, j).abs() <= r.get(i, j)) {
                return Some((i, j));
            }
        }
    }
    None
}

/// A box-feasible dual point with its factorization, gradient and objective
/// value computed once, at construction.
#[derive(Clone, Debug)]
pub struct DualIterate {
    u: SymMatrix,
    factor: CholeskyFactor,
    grad: SymMatrix,
    value: f64,
}

impl DualIterate {
    /// Factors `S + U` and inverts it: one gradient evaluation.
    pub fn new(problem: &ProblemInstance, u: SymMatrix) -> Result<Self> {
        if u.n() != problem.n() {
            return Err(Error::DimensionMismatch {
                left: problem.n(),
                right: u.n(),
            });
        }
        if let Some((i, j)) = first_infeasible(&u, problem.penalty()) {
            return Err(Error::Infeasible { i, j });
        }
        let factor = cholesky(&problem.covariance().add(&u))?;
        Ok(Self::from_factor(u, factor))
    }

    /// Completes an iterate from an already computed factor of `S + U`.
    pub(crate) fn from_factor(u: SymMatrix, factor: CholeskyFactor) -> Self {
        let grad = factor.inverse().map(|v| -v);
        let value = -factor.logdet();
        Self {
            u,
            factor,
            grad,
            value,
        }
    }

    pub fn u(&self) -> &SymMatrix {
        &self.u
    }

    pub fn into_u(self) -> SymMatrix {
        self.u
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `∇ψ(U) = −(S + U)⁻¹`
    pub fn grad(&self) -> &SymMatrix {
        &self.grad
    }

    /// `ψ(U) = −log det(S + U)`
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `X_U = (S + U)⁻¹`
    pub fn primal_point(&self) -> SymMatrix {
        self.grad.map(|v| -v)
    }

    /// `tr(S X_U) + Σ ρᵢⱼ |[X_U]ᵢⱼ| − n`, reusing the cached gradient.
    pub fn gap(&self, problem: &ProblemInstance) -> f64 {
        let s = problem.covariance().as_slice();
        let r = problem.penalty().as_slice();
        let mut total = 0.0;
        for ((g, s), r) in self.grad.as_slice().iter().zip(s).zip(r) {
            total += -g * s + r * g.abs();
        }
        total - problem.n() as f64
    }
}

/// `ψ(U) = −log det(S + U)`.
pub fn dual_value(problem: &ProblemInstance, u: &SymMatrix) -> Result<f64> {
    let f = cholesky(&problem.covariance().add(u))?;
    Ok(-f.logdet())
}

/// `∇ψ(U) = −(S + U)⁻¹`.
pub fn dual_gradient(problem: &ProblemInstance, u: &SymMatrix) -> Result<SymMatrix> {
    let f = cholesky(&problem.covariance().add(u))?;
    Ok(f.inverse().map(|v| -v))
}

/// `tr(SX) − log det X + Σᵢⱼ ρᵢⱼ |xᵢⱼ|`.
pub fn primal_value(problem: &ProblemInstance, x: &SymMatrix) -> Result<f64> {
    if x.n() != problem.n() {
        return Err(Error::DimensionMismatch {
            left: problem.n(),
            right: x.n(),
        });
    }
    let f = cholesky(x)?;
    Ok(problem.covariance().inner(x) - f.logdet() + problem.penalty_term(x))
}

/// Duality gap `tr(S X_U) + Σ ρᵢⱼ |[X_U]ᵢⱼ| − n` with `X_U = (S + U)⁻¹`.
pub fn duality_gap(problem: &ProblemInstance, u: &SymMatrix) -> Result<f64> {
    let x = cholesky(&problem.covariance().add(u))?.inverse();
    Ok(problem.gap_at_primal(&x))
}

/// Entrywise `mid{uᵢⱼ, −ρᵢⱼ, ρᵢⱼ}`. Clamped entries carry the bound value
/// exactly, which the active/binding tests rely on.
pub fn project_box(u: &SymMatrix, r: &SymMatrix) -> Result<SymMatrix> {
    if u.n() != r.n() {
        return Err(Error::DimensionMismatch {
            left: u.n(),
            right: r.n(),
        });
    }
    Ok(u.zip_map(r, clamp_to_bound))
}

/// `P[U − step·G]`, fused so no intermediate matrix is built.
pub fn projected_step(u: &SymMatrix, grad: &SymMatrix, step: f64, r: &SymMatrix) -> SymMatrix {
    let n = u.n();
    let mut data = Vec::with_capacity(n * n);
    for ((&u, &g), &rho) in u.as_slice().iter().zip(grad.as_slice()).zip(r.as_slice()) {
        data.push(clamp_to_bound(u - step * g, rho));
    }
    SymMatrix::from_symmetric_unchecked(n, data)
}

#[inline]
fn clamp_to_bound(u: f64, rho: f64) -> f64 {
    if u > rho {
        rho
    } else if u < -rho {
        -rho
    } else {
        u
    }
}

/// Symmetric set of index pairs, stored as a dense `n × n` mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    n: usize,
    mask: Vec<bool>,
}

impl IndexSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            mask: vec![false; n * n],
        }
    }

    fn from_predicate(n: usize, mut pred: impl FnMut(usize, usize) -> bool) -> Self {
        let mut set = Self::empty(n);
        for i in 0..n {
            for j in i..n {
                if pred(i, j) {
                    set.insert(i, j);
                }
            }
        }
        set
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.mask[i * self.n + j] = true;
        self.mask[j * self.n + i] = true;
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    /// Row-major membership mask over all `n²` entries.
    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Pairs `(i, j)` with `i ≤ j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i..self.n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.contains(i, j))
    }

    /// Number of stored pairs with `i ≤ j`.
    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.n == other.n && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Active set: coordinates sitting exactly on a bound, `|uᵢⱼ| = ρᵢⱼ`.
pub fn active_set(u: &SymMatrix, r: &SymMatrix) -> IndexSet {
    IndexSet::from_predicate(u.n(), |i, j| u.get(i, j).abs() == r.get(i, j))
}

/// Binding set: `uᵢⱼ = −ρᵢⱼ` with `∂ᵢⱼψ > 0`, or `uᵢⱼ = ρᵢⱼ` with `∂ᵢⱼψ < 0`.
/// Both sign tests are strict and bound equality is exact.
pub fn binding_set(u: &SymMatrix, grad: &SymMatrix, r: &SymMatrix) -> IndexSet {
    IndexSet::from_predicate(u.n(), |i, j| {
        let (v, g, rho) = (u.get(i, j), grad.get(i, j), r.get(i, j));
        (v == -rho && g > 0.0) || (v == rho && g < 0.0)
    })
}

/// `Σ ρᵢⱼ |[X_U]ᵢⱼ| − ⟨U, X_U⟩`, equal to the duality gap because
/// `tr(X_U (S + U)) = n`.
pub fn gap_via_complementarity(problem: &ProblemInstance, u: &SymMatrix, x: &SymMatrix) -> Result<f64> {
    Ok(problem.penalty_term(x) - frob_inner(u, x)?)
}
