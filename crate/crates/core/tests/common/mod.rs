//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sice::linalg::cholesky;
use sice::{ProblemInstance, SymMatrix};

/// Row-major dense copy.
pub fn dense(a: &SymMatrix) -> Vec<Vec<f64>> {
    (0..a.n()).map(|i| a.row(i).to_vec()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &SymMatrix) -> Vec<f64> {
    let n = a.n();
    let mut m = dense(a);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(a: &SymMatrix) -> Vec<Vec<f64>> {
    let n = a.n();
    let mut m = dense(a);
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                for j in 0..n {
                    m[r][j] -= f * m[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Posdef test for 3×3 by leading principal minors.
pub fn posdef3(m: &[[f64; 3]; 3]) -> bool {
    m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0 && det3(m) > 0.0
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `S = AᵀA/m + 0.1·I` with `A` an `m × n` matrix of uniforms on `[−1, 1]`.
pub fn random_covariance(rng: &mut StdRng, n: usize) -> SymMatrix {
    let m = n + 2;
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    SymMatrix::from_fn(n, |i, j| {
        let v: f64 = (0..m).map(|k| a[k][i] * a[k][j]).sum::<f64>() / m as f64;
        if i == j {
            v + 0.1
        } else {
            v
        }
    })
}

/// Symmetric penalties uniform on `[lo, hi)`.
pub fn random_penalty(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.gen_range(lo..hi))
}

pub fn random_problem(rng: &mut StdRng, n: usize) -> ProblemInstance {
    let s = random_covariance(rng, n);
    let r = random_penalty(rng, n, 0.05, 0.5);
    ProblemInstance::new(s, r).expect("S ≻ 0 so S + Diag(R) ≻ 0")
}

/// A box-feasible `U` with `S + U ≻ 0`: entries uniform on `[−frac·ρ, frac·ρ]`,
/// shrunk by halves until the factorization succeeds.
pub fn random_feasible_u(rng: &mut StdRng, problem: &ProblemInstance, frac: f64) -> SymMatrix {
    let r = problem.penalty();
    let mut u = SymMatrix::from_fn(problem.n(), |i, j| {
        let rho = r.get(i, j);
        frac * rng.gen_range(-rho..=rho)
    });
    while cholesky(&problem.covariance().add(&u)).is_err() {
        u = u.scaled(0.5);
    }
    u
}

/// Box-feasible `U` whose entries land exactly on `−ρ` or `ρ` with
/// probability `p_bound` each. `S + U ≻ 0` is not checked.
pub fn random_u_with_bounds(rng: &mut StdRng, s: &SymMatrix, r: &SymMatrix, p_bound: f64) -> SymMatrix {
    SymMatrix::from_fn(s.n(), |i, j| {
        let rho = r.get(i, j);
        let x: f64 = rng.gen();
        if x < p_bound {
            -rho
        } else if x < 2.0 * p_bound {
            rho
        } else {
            rng.gen_range(-rho..=rho)
        }
    })
}
