//! Dense symmetric matrices and the Cholesky-based kernels the solvers run on.
//!
//! Storage is a full row-major `n × n` buffer kept mirrored: every write goes
//! through [`SymMatrix::set`], which updates `(i, j)` and `(j, i)` together.
//! Keeping both triangles makes row access contiguous for the `O(n³)` kernels.

use std::fmt;

use crate::error::{Error, Result};

/// Largest `|a_ij - a_ji|` accepted by the strict constructors.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 0..self.n {
            list.entry(&self.row(i));
        }
        list.finish()
    }
}

impl SymMatrix {
    /// # Panics
    /// If `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix dimension must be at least 1");
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.n + i] = d;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Strict constructor: rejects asymmetry above [`SYMMETRY_TOL`], then
    /// stores `(A + Aᵀ) / 2`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        let mut max_dev = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let dev = (data[i * n + j] - data[j * n + i]).abs();
                if dev.is_nan() || dev > max_dev {
                    max_dev = if dev.is_nan() { f64::INFINITY } else { dev };
                }
            }
        }
        if max_dev > SYMMETRY_TOL {
            return Err(Error::Asymmetric { max_dev });
        }
        Ok(Self::symmetrize(n, data))
    }

    /// Lenient constructor: stores `(A + Aᵀ) / 2` whatever the input asymmetry.
    ///
    /// # Panics
    /// If `data.len() != n * n` or `n == 0`.
    pub fn symmetrize(n: usize, mut data: Vec<f64>) -> Self {
        assert!(n >= 1);
        assert_eq!(data.len(), n * n);
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Self { n, data }
    }

    /// Trusted constructor for buffers already known to be symmetric.
    pub(crate) fn from_symmetric_unchecked(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    /// Convenience for small literal matrices.
    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::from_row_major(N, rows.iter().flatten().copied().collect())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes `v` at `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Row-major view of all `n²` entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// The diagonal part of `self` as a matrix (`Diag(A)`).
    pub fn diag_matrix(&self) -> Self {
        Self::from_diag(&self.diagonal())
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Elementwise map. `f` must not break symmetry, which holds for any
    /// function of the entry value alone.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entrywise combination of two equally sized matrices.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self ← self + alpha · x`
    pub fn axpy(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.n, x.n, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += shift;
        }
    }

    /// Full elementwise inner product `Σᵢⱼ aᵢⱼ bᵢⱼ`, both triangles counted.
    ///
    /// # Panics
    /// On dimension mismatch; see [`frob_inner`] for the checked form.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        dot(&self.data, &other.data)
    }

    pub fn frob_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Ordinary matrix product, returned row-major (the product of two
    /// symmetric matrices is generally not symmetric).
    pub fn matmul(&self, other: &Self) -> Vec<f64> {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let row = self.row(i);
            for j in 0..n {
                // other is symmetric, so column j equals row j
                out[i * n + j] = dot(row, other.row(j));
            }
        }
        out
    }
}

/// Checked form of [`SymMatrix::inner`].
pub fn frob_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(a.inner(b))
}

/// Cholesky factorization `A = L·Lᵀ`, held internally in the square-root
/// free form `A = L₁·D·L₁ᵀ` (`L₁` unit lower triangular, `D > 0` diagonal) so
/// that `L = L₁·D^½`. The pivots of both forms coincide; keeping `D` avoids
/// square-root round-off in the inverse and log-determinant.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    // row-major unit lower triangle; the stored diagonal and upper part are zero
    unit: Vec<f64>,
    pivots: Vec<f64>,
}

impl CholeskyFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` of the lower-triangular `L`.
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => self.pivots[i].sqrt(),
            std::cmp::Ordering::Greater => self.unit[i * self.n + j] * self.pivots[j].sqrt(),
        }
    }

    /// The pivots `D`, equal to the squared diagonal of `L`.
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// `log det A = Σᵢ ln dᵢ = 2 Σᵢ ln Lᵢᵢ`.
    pub fn logdet(&self) -> f64 {
        self.pivots.iter().map(|d| d.ln()).sum()
    }

    /// `A⁻¹ = L₁⁻ᵀ D⁻¹ L₁⁻¹`.
    pub fn inverse(&self) -> SymMatrix {
        let n = self.n;
        let l = &self.unit;
        // Row j of `t` holds column j of L₁⁻¹, i.e. t = L₁⁻ᵀ (unit upper).
        let mut t = vec![0.0; n * n];
        for j in 0..n {
            let tj = &mut t[j * n..(j + 1) * n];
            tj[j] = 1.0;
            for i in j + 1..n {
                tj[i] = -dot(&l[i * n + j..i * n + i], &tj[j..i]);
            }
        }
        // scale columns of t by D^-1 in a copy so the final product is a dot
        let mut ts = t.clone();
        for row in ts.chunks_exact_mut(n) {
            for (v, d) in row.iter_mut().zip(&self.pivots) {
                *v /= d;
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            let ti = &ts[i * n..(i + 1) * n];
            for j in i..n {
                let tj = &t[j * n..(j + 1) * n];
                let v = dot(&ti[j..], &tj[j..]);
                inv[i * n + j] = v;
                inv[j * n + i] = v;
            }
        }
        SymMatrix { n, data: inv }
    }

    /// `L·Lᵀ`, for checking the factorization.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_fn(n, |i, j| (0..=i.min(j)).map(|k| self.lower(i, k) * self.lower(j, k)).sum())
    }
}

/// Cholesky factorization with pivot floor 0: fails unless `A ≻ 0`.
pub fn cholesky(a: &SymMatrix) -> Result<CholeskyFactor> {
    cholesky_with_floor(a, 0.0)
}

/// Cholesky factorization failing on any pivot `≤ floor` (or NaN). The pivot
/// is the squared diagonal entry of `L` about to be formed.
pub fn cholesky_with_floor(a: &SymMatrix, floor: f64) -> Result<CholeskyFactor> {
    let n = a.n;
    let mut unit = vec![0.0; n * n];
    let mut pivots = vec![0.0; n];
    // c[k] = L₁[i][k]·d[k] for the row being formed
    let mut c = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            c[j] = a.data[i * n + j] - dot(&c[..j], &unit[j * n..j * n + j]);
        }
        let d = a.data[i * n + i] - {
            let row = &mut unit[i * n..i * n + i];
            for j in 0..i {
                row[j] = c[j] / pivots[j];
            }
            dot(&c[..i], row)
        };
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: i, pivot: d });
        }
        pivots[i] = d;
    }
    Ok(CholeskyFactor { n, unit, pivots })
}

pub fn logdet(f: &CholeskyFactor) -> f64 {
    f.logdet()
}

pub fn inverse_from_factor(f: &CholeskyFactor) -> SymMatrix {
    f.inverse()
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let f = cholesky(&SymMatrix::identity(2)).unwrap();
        assert_eq!(f.lower(0, 0), 1.0);
        assert_eq!(f.lower(1, 0), 0.0);
        assert_eq!(f.lower(1, 1), 1.0);
    }

    #[test]
    fn cholesky_diagonal() {
        let f = cholesky(&SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(f.lower(0, 0), 2.0);
        assert_eq!(f.lower(1, 1), 3.0);
        assert_eq!(f.lower(1, 0), 0.0);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let err = cholesky(&SymMatrix::from_diag(&[1.0, -1.0])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { index: 1, .. }));
        // eigenvalues 3 and -1
        let a = SymMatrix::from_rows([[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_err());
        // singular: eigenvalues 2 and 0
        let a = SymMatrix::from_rows([[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_err());
    }

    #[test]
    fn pivot_floor_is_respected() {
        let a = SymMatrix::from_diag(&[1.0, 0.5]);
        assert!(cholesky_with_floor(&a, 0.4).is_ok());
        assert!(cholesky_with_floor(&a, 0.5).is_err());
    }

    #[test]
    fn logdet_examples() {
        assert_eq!(cholesky(&SymMatrix::identity(3)).unwrap().logdet(), 0.0);
        let f = cholesky(&SymMatrix::from_diag(&[2.0, 2.0])).unwrap();
        assert!(close(logdet(&f), 2.0 * 2f64.ln(), 1e-15));
        assert!(close(1.386294, logdet(&f), 1e-6));
        let f = cholesky(&SymMatrix::from_diag(&[std::f64::consts::E, 1.0])).unwrap();
        assert!(close(logdet(&f), 1.0, 1e-15));
    }

    #[test]
    fn inverse_examples() {
        let inv = inverse_from_factor(&cholesky(&SymMatrix::identity(2)).unwrap());
        assert_eq!(inv, SymMatrix::identity(2));

        let inv = cholesky(&SymMatrix::from_diag(&[2.0, 4.0])).unwrap().inverse();
        assert_eq!(inv, SymMatrix::from_diag(&[0.5, 0.25]));

        let a = SymMatrix::from_rows([[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let inv = cholesky(&a).unwrap().inverse();
        let expected = SymMatrix::from_rows([[2.0, -1.0], [-1.0, 2.0]])
            .unwrap()
            .scaled(1.0 / 3.0);
        assert!(inv.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn frob_inner_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(frob_inner(&i2, &i2).unwrap(), 2.0);
        let a = SymMatrix::from_rows([[1.0, 2.0], [2.0, 1.0]]).unwrap();
        let b = SymMatrix::from_rows([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(frob_inner(&a, &b).unwrap(), 4.0);
        assert_eq!(frob_inner(&a, &SymMatrix::zeros(2)).unwrap(), 0.0);
        assert!((frob_inner(&a, &a).unwrap() - a.frob_norm().powi(2)).abs() < 1e-12);
        assert!(matches!(
            frob_inner(&a, &SymMatrix::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn strict_constructor_rejects_asymmetry() {
        let err = SymMatrix::from_row_major(2, vec![1.0, 0.5, 0.4, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { .. }));
        let m = SymMatrix::from_row_major(2, vec![1.0, 0.5, 0.5 + 1e-13, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!(matches!(
            SymMatrix::from_row_major(0, vec![]),
            Err(Error::EmptyMatrix)
        ));
        assert!(matches!(
            SymMatrix::from_row_major(2, vec![1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn set_keeps_symmetry() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 2, 7.0);
        assert_eq!(m.get(2, 0), 7.0);
    }

    #[test]
    fn reconstruct_matches_input() {
        let a = SymMatrix::from_rows([[4.0, 2.0, 0.4], [2.0, 5.0, 1.0], [0.4, 1.0, 3.0]]).unwrap();
        let f = cholesky(&a).unwrap();
        assert!(f.reconstruct().max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn dot_handles_remainders() {
        for len in 0..11 {
            let a: Vec<f64> = (0..len).map(|v| v as f64).collect();
            let b: Vec<f64> = (0..len).map(|v| 2.0 * v as f64 + 1.0).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            assert_eq!(dot(&a, &b), naive);
        }
    }
}
