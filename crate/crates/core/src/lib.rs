//! Sparse inverse covariance estimation.
//!
//! Given a sample covariance `S` and nonnegative penalties `R`, estimate a
//! sparse precision matrix by solving
//!
//! ```text
//! min_{X ≻ 0}  tr(SX) − log det X + Σᵢⱼ ρᵢⱼ |xᵢⱼ|
//! ```
//!
//! through its dual `min −log det(S + U)` over the box `|uᵢⱼ| ≤ ρᵢⱼ`. The main
//! solver ([`solver::solve`]) is a projected gradient method whose step is a
//! Barzilai–Borwein coefficient restricted to coordinates that can still
//! move, scaled by a factor that shrinks only when a block of steps fails a
//! descent test. [`baseline::solve_pg`] is an Armijo projected gradient
//! reference on the same problem.
//!
//! ```
//! use sice::{solve, ProblemInstance, SolverConfig, Status, SymMatrix};
//!
//! let s = SymMatrix::from_rows([[1.0, 0.5], [0.5, 2.0]])?;
//! let problem = ProblemInstance::with_uniform_penalty(s, 0.1)?;
//! let result = solve(&problem, &SolverConfig { eps: 1e-8, ..Default::default() })?;
//! assert_eq!(result.status, Status::Converged);
//! assert!(result.final_gap < 1e-8);
//! # Ok::<(), sice::Error>(())
//! ```

pub mod baseline;
pub mod bench;
pub mod datagen;
mod error;
pub mod linalg;
pub mod objective;
pub mod solver;

pub use baseline::{solve_pg, PgConfig};
pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use objective::{DualIterate, ProblemInstance};
pub use solver::{check_optimality, solve, SolverConfig, SolverResult, Status};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem.md")]
    mod problem {}
    #[doc = include_str!("../../../book/src/mbb-step.md")]
    mod mbb_step {}
    #[doc = include_str!("../../../book/src/diminishment.md")]
    mod diminishment {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/datagen.md")]
    mod datagen {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
