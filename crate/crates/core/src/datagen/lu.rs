//! Dense LU with partial pivoting, used only to test and invert the
//! indefinite sparse sign matrix during generation.

/// Pivots with magnitude at or below this are treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Inverse of the row-major `n × n` matrix `a`, or `None` if elimination
/// meets a pivot with `|p| ≤ PIVOT_TOL`.
pub fn lu_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, max) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(max > PIVOT_TOL) {
            return None;
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
    }

    // Solve for all columns at once: rows of `x` are rows of the inverse.
    let mut x = vec![0.0; n * n];
    for (i, &src) in perm.iter().enumerate() {
        x[i * n + src] = 1.0;
    }
    // forward: L y = P b
    for i in 0..n {
        for k in 0..i {
            let f = lu[i * n + k];
            if f != 0.0 {
                for j in 0..n {
                    x[i * n + j] -= f * x[k * n + j];
                }
            }
        }
    }
    // backward: U x = y
    for i in (0..n).rev() {
        for k in i + 1..n {
            let f = lu[i * n + k];
            if f != 0.0 {
                for j in 0..n {
                    x[i * n + j] -= f * x[k * n + j];
                }
            }
        }
        let d = lu[i * n + i];
        for j in 0..n {
            x[i * n + j] /= d;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_permuted_matrix() {
        // needs pivoting: zero in the leading position
        let a = [0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 4.0, -3.0, 8.0];
        let inv = lu_inverse(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-12, "{i} {j} {v}");
            }
        }
    }

    #[test]
    fn detects_singular() {
        assert!(lu_inverse(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
        assert!(lu_inverse(&[1.0, 1.0, 1.0, 1.0], 2).is_none());
    }
}
