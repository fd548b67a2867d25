//! Benchmark suites: verdict and wall time per instance.

use std::str::FromStr;
use web_time::Instant;

use super::builtins::{builtin_problem, BuiltinError};
use super::generators::{gen_s1, gen_s2, GenError};
use super::report::{BenchReport, BenchRow, Meta, SCHEMA_VERSION};
use crate::feasibility::SolveOptions;
use crate::reduction::{solve_full, ReductionError, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    S1,
    S2,
    Swe,
    Rom,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s1" => Ok(Suite::S1),
            "s2" => Ok(Suite::S2),
            "swe" => Ok(Suite::Swe),
            "rom" => Ok(Suite::Rom),
            other => Err(format!("unknown suite {other:?} (expected s1, s2, swe or rom)")),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::S1 => "s1",
            Suite::S2 => "s2",
            Suite::Swe => "swe",
            Suite::Rom => "rom",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    Solve(#[from] ReductionError),
}

fn instance(suite: Suite, n: usize, d: u32, k: usize, seed: u64) -> Result<SystemSpec, BenchError> {
    Ok(match suite {
        Suite::S1 => gen_s1(n, d, seed)?,
        Suite::S2 => gen_s2(n, d, k, seed)?,
        Suite::Swe => builtin_problem("swe", n)?,
        Suite::Rom => builtin_problem("rom", n)?,
    })
}

/// One row per `n`; generated suites use `seed` for every instance.
pub fn run_bench(
    suite: Suite,
    ns: &[usize],
    d: u32,
    k: usize,
    seed: u64,
    opts: &SolveOptions,
    jobs: usize,
) -> Result<BenchReport, BenchError> {
    let mut rows = Vec::new();
    for &n in ns {
        let spec = instance(suite, n, d, k, seed)?;
        let start = Instant::now();
        let v = solve_full(&spec, opts, jobs)?;
        rows.push(BenchRow {
            suite: suite.name().to_string(),
            n,
            d: spec.d(),
            k: spec.equalities().len(),
            seed,
            verdict: v.kind,
            partitions: v.outcomes.len(),
            boxes: v.outcomes.iter().map(|o| o.verdict.stats.boxes).sum(),
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(BenchReport { schema_version: SCHEMA_VERSION, meta: Meta::new(Some(seed)), rows })
}
