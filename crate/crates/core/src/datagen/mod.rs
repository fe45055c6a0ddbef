//! Synthetic instances and the plain-text matrix format.

mod io;
mod lu;
mod rng;
mod synth;

pub use io::{format_entry, parse_matrix, read_matrix, write_matrix, write_matrix_to};
pub use lu::{lu_inverse, PIVOT_TOL};
pub use rng::SplitMix64;
pub use synth::{gen_synthetic, generate, lambda_min_lower_bound, SynthConfig, Synthetic, MAX_ATTEMPTS};
