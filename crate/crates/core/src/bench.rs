//! Time-to-gap tables: for each size, method and gap level, the first
//! checkpoint at which the measured duality gap is at most that level.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::baseline::{solve_pg, PgConfig};
use crate::datagen::{gen_synthetic, SynthConfig};
use crate::error::{Error, Result};
use crate::objective::ProblemInstance;
use crate::solver::{csv_err, solve, SolverConfig, SolverResult};

/// Header of the benchmark CSV.
pub const BENCH_HEADER: [&str; 6] = [
    "n",
    "method",
    "eps",
    "seconds_median",
    "iters_median",
    "attained",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Sice,
    Pg,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sice => "sice",
            Method::Pg => "pg",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sice" => Ok(Method::Sice),
            "pg" => Ok(Method::Pg),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Runs `method` to `eps` on `problem` with a budget of roughly
/// `max_grad_evals` gradient evaluations.
pub fn run_method(
    method: Method,
    problem: &ProblemInstance,
    eps: f64,
    max_grad_evals: usize,
    sice: &SolverConfig,
) -> Result<SolverResult> {
    match method {
        Method::Sice => {
            let cfg = SolverConfig {
                eps,
                max_checkpoints: (max_grad_evals / sice.m).max(1),
                ..sice.clone()
            };
            solve(problem, &cfg)
        }
        Method::Pg => {
            let cfg = PgConfig {
                eps,
                max_iters: max_grad_evals,
                ..PgConfig::default()
            };
            solve_pg(problem, &cfg)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub sizes: Vec<usize>,
    /// Strictly decreasing.
    pub eps_levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    /// Repetition `k` uses instance seed `seed + k`.
    pub seed: u64,
    /// Uniform penalty level.
    pub rho: f64,
    /// Gradient-evaluation budget shared by every method.
    pub max_grad_evals: usize,
    pub solver: SolverConfig,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            sizes: vec![100],
            eps_levels: vec![1e-1, 1e-2, 1e-3, 1e-4, 2e-5, 1e-5],
            methods: vec![Method::Sice, Method::Pg],
            repetitions: 1,
            seed: 42,
            rho: 0.1,
            max_grad_evals: 20_000,
            solver: SolverConfig::default(),
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return bad("sizes must be nonempty and each at least 2");
        }
        if self.eps_levels.is_empty() || self.eps_levels.iter().any(|&e| !(e > 0.0)) {
            return bad("eps levels must be nonempty and positive");
        }
        if self.eps_levels.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("eps levels must be strictly decreasing");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1");
        }
        if self.max_grad_evals < 1 {
            return bad("budget must be at least 1");
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub method: Method,
    pub eps: f64,
    /// `None` when the level was not attained in every repetition.
    pub seconds_median: Option<f64>,
    pub iters_median: Option<f64>,
    pub attained: bool,
}

/// First-attainment `(seconds, iters)` per level, `None` where unattained.
pub fn attainment(result: &SolverResult, eps_levels: &[f64]) -> Vec<Option<(f64, usize)>> {
    eps_levels
        .iter()
        .map(|&eps| {
            result
                .trace
                .first_attainment(eps)
                .map(|r| (r.seconds, r.iters))
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Runs the whole table sequentially. A solver error marks every level of
/// that run unattained and the benchmark carries on.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let tightest = *spec.eps_levels.last().expect("validated nonempty");
    let mut rows = Vec::new();
    for &n in &spec.sizes {
        let mut problems = Vec::with_capacity(spec.repetitions);
        for rep in 0..spec.repetitions {
            let s = gen_synthetic(&SynthConfig {
                n,
                seed: spec.seed.wrapping_add(rep as u64),
                ..SynthConfig::default()
            })?;
            problems.push(ProblemInstance::with_uniform_penalty(s, spec.rho)?);
        }
        for &method in &spec.methods {
            // per level: (seconds, iters) of every repetition that attained it
            let mut hits: Vec<Vec<(f64, usize)>> = vec![Vec::new(); spec.eps_levels.len()];
            for problem in &problems {
                let Ok(result) = run_method(method, problem, tightest, spec.max_grad_evals, &spec.solver)
                else {
                    continue;
                };
                for (slot, hit) in hits.iter_mut().zip(attainment(&result, &spec.eps_levels)) {
                    if let Some(h) = hit {
                        slot.push(h);
                    }
                }
            }
            for (&eps, level) in spec.eps_levels.iter().zip(&hits) {
                let attained = level.len() == spec.repetitions;
                let (mut secs, mut iters): (Vec<f64>, Vec<f64>) =
                    level.iter().map(|&(s, i)| (s, i as f64)).unzip();
                rows.push(BenchRow {
                    n,
                    method,
                    eps,
                    seconds_median: if attained { median(&mut secs) } else { None },
                    iters_median: if attained { median(&mut iters) } else { None },
                    attained,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.method.to_string(),
            r.eps.to_string(),
            opt(r.seconds_median),
            opt(r.iters_median),
            r.attained.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
