mod common;

use common::jacobi_eigenvalues;
use proptest::prelude::*;
use sice::datagen::{
    generate, gen_synthetic, lu_inverse, parse_matrix, read_matrix, write_matrix, write_matrix_to, SynthConfig,
};
use sice::linalg::cholesky;
use sice::{solve, Error, ProblemInstance, SolverConfig, Status, SymMatrix};

fn off_diagonal_density(s: &SymMatrix) -> f64 {
    let n = s.n();
    let nnz = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && s.get(i, j) != 0.0)
        .count();
    nnz as f64 / (n * (n - 1)) as f64
}

#[test]
fn same_seed_same_bits() {
    let cfg = SynthConfig::default();
    let a = gen_synthetic(&cfg).unwrap();
    let b = gen_synthetic(&cfg).unwrap();
    assert!(a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let c = gen_synthetic(&SynthConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn sparse_factor_is_invertible_signed_and_dense_enough() {
    for (n, seed) in [(300, 42), (400, 9)] {
        let g = generate(&SynthConfig { n, seed, ..Default::default() }).unwrap();
        for i in 0..n {
            assert_eq!(g.sparse.get(i, i), 1.0);
            for j in 0..n {
                let v = g.sparse.get(i, j);
                assert_eq!(v, g.sparse.get(j, i));
                if i != j {
                    assert!(v == 0.0 || v == 1.0 || v == -1.0);
                }
            }
        }
        let d = off_diagonal_density(&g.sparse);
        assert!((d - 0.01).abs() <= 0.2 * 0.01, "n={n} density {d}");
        assert!(lu_inverse(g.sparse.as_slice(), n).is_some());
    }
}

#[test]
fn spectrum_floor_at_scale() {
    for (n, seed) in [(100, 42), (200, 1)] {
        let cfg = SynthConfig { n, seed, ..Default::default() };
        let s = gen_synthetic(&cfg).unwrap();
        let mut floor = s.clone();
        floor.shift_diagonal(-(cfg.sigma_shift - 1e-10));
        assert!(cholesky(&floor).is_ok(), "n={n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectrum_floor_small(n in 2usize..=6, seed in any::<u64>(), density in 0.05f64..0.9, tau in 0.0f64..1.0) {
        let cfg = SynthConfig { n, seed, density, tau, ..Default::default() };
        let s = gen_synthetic(&cfg).unwrap();
        let lmin = jacobi_eigenvalues(&s)[0];
        prop_assert!(lmin >= cfg.sigma_shift - 1e-10, "λ_min = {lmin}");
    }

    #[test]
    fn shift_only_when_needed(n in 2usize..=6, seed in any::<u64>()) {
        let g = generate(&SynthConfig { n, seed, density: 0.5, ..Default::default() }).unwrap();
        prop_assert!(g.shift >= 0.0);
        if g.shift > 0.0 {
            prop_assert_eq!(g.shift, -(g.lambda_min - 1e-4));
        }
    }

    #[test]
    fn text_round_trip_is_exact(n in 1usize..6, vals in prop::collection::vec(-1e6f64..1e6, 36), tiny in -1e-9f64..1e-9) {
        let a = SymMatrix::from_fn(n, |i, j| if i == j { tiny } else { vals[i * 6 + j] });
        let mut buf = Vec::new();
        write_matrix_to(&a, &mut buf).unwrap();
        let back = parse_matrix(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert!(a.as_slice().iter().zip(back.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn file_round_trip_of_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    let s = gen_synthetic(&SynthConfig::default()).unwrap();
    write_matrix(&s, &path).unwrap();
    let back = read_matrix(&path).unwrap();
    assert_eq!(back, s);

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("100\n"));
    assert!(text.ends_with('\n') && !text.contains("\r") && !text.contains(" \n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn truncated_file_is_malformed() {
    let s = gen_synthetic(&SynthConfig { n: 5, ..Default::default() }).unwrap();
    let mut buf = Vec::new();
    write_matrix_to(&s, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let cut = &text[..text.len() / 2];
    assert!(matches!(parse_matrix(cut), Err(Error::MalformedMatrix(_))));
}

#[test]
fn degenerate_parameters_give_identity() {
    let s = gen_synthetic(&SynthConfig { n: 4, density: 1e-300, tau: 0.0, ..Default::default() }).unwrap();
    assert_eq!(s, SymMatrix::identity(4));
}

#[test]
fn reference_instance_regression() {
    // default generator settings, n = 100, seed 42
    let g = generate(&SynthConfig::default()).unwrap();
    assert_eq!(g.attempts, FIXTURE_ATTEMPTS);
    assert_eq!(g.covariance.get(0, 0).to_bits(), FIXTURE_S00.to_bits());
    assert_eq!(g.covariance.trace().to_bits(), FIXTURE_TRACE.to_bits());

    let p = ProblemInstance::with_uniform_penalty(g.covariance, 0.1).unwrap();
    let res = solve(&p, &SolverConfig { eps: 1e-5, max_checkpoints: 2000, ..Default::default() }).unwrap();
    assert_eq!(res.status, Status::Converged);
    assert_eq!(res.checkpoints(), FIXTURE_CHECKPOINTS);
}

const FIXTURE_ATTEMPTS: usize = 1;
const FIXTURE_S00: f64 = 7.052593468590349;
const FIXTURE_TRACE: f64 = 670.0734567560934;
const FIXTURE_CHECKPOINTS: usize = 4;
