//! Machine-readable reports.

use serde::{Deserialize, Serialize};

use super::generators::RNG_NAME;
use super::qe::QeTable;
use crate::feasibility::{replay, VerdictKind, Witness};
use crate::partition::partitions_up_to;
use crate::reduction::{distinct_coordinate_bound, expand_witness, reduce_system, FullVerdict, SystemSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(seed: Option<u64>) -> Self {
        Meta {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_NAME.to_string(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub source: String,
    pub n: usize,
    pub t: usize,
    pub d: u32,
}

impl SystemInfo {
    pub fn of(spec: &SystemSpec) -> Self {
        SystemInfo { source: spec.source().to_string(), n: spec.n(), t: spec.t(), d: spec.d() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub meta: Meta,
    pub system: SystemInfo,
    pub result: FullVerdict,
    pub wall_seconds: f64,
}

impl SolveReport {
    pub fn new(spec: &SystemSpec, result: FullVerdict, wall_seconds: f64) -> Self {
        SolveReport {
            schema_version: SCHEMA_VERSION,
            meta: Meta::new(None),
            system: SystemInfo::of(spec),
            result,
            wall_seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeReport {
    pub schema_version: u32,
    pub meta: Meta,
    pub system: SystemInfo,
    pub table: QeTable,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub suite: String,
    pub n: usize,
    pub d: u32,
    pub k: usize,
    pub seed: u64,
    pub verdict: VerdictKind,
    pub partitions: usize,
    pub boxes: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub meta: Meta,
    pub rows: Vec<BenchRow>,
}

/// Re-verifies every certificate in a report against the system it was
/// produced from. Returns the number of certificates checked.
pub fn replay_report(spec: &SystemSpec, report: &SolveReport) -> Result<usize, String> {
    if report.schema_version != SCHEMA_VERSION {
        return Err(format!("unsupported schema version {}", report.schema_version));
    }
    let result = &report.result;
    let mut checked = 0;
    for o in &result.outcomes {
        if o.partition.total() as usize != spec.n() {
            return Err(format!("partition {} does not partition n = {}", o.partition, spec.n()));
        }
        let problem = reduce_system(spec, &o.partition).to_problem(&[]).map_err(|e| e.to_string())?;
        replay(&problem, &o.verdict).map_err(|e| format!("partition {}: {e}", o.partition))?;
        if matches!(o.verdict.kind, VerdictKind::SatCertified | VerdictKind::UnsatInBox) {
            checked += 1;
        }
    }
    match result.kind {
        VerdictKind::SatCertified => {
            let gamma = result.partition.as_ref().ok_or("Sat report names no partition")?;
            let o = result.outcomes.iter().find(|o| &o.partition == gamma).ok_or("winning partition has no outcome")?;
            let expected = match o.verdict.witness.as_ref().ok_or("winning outcome has no witness")? {
                Witness::Point(p) => Witness::Point(expand_witness(p, gamma).map_err(|e| e.to_string())?),
                Witness::Box(b) => Witness::Box(expand_witness(b, gamma).map_err(|e| e.to_string())?),
            };
            if result.witness.as_ref() != Some(&expected) {
                return Err("reported witness is not the expansion of the certified one".into());
            }
            if let Witness::Point(p) = &expected {
                if let Some(k) = spec.constraints().iter().position(|c| !c.holds_at(p)) {
                    return Err(format!("constraint {k} fails at the reported witness"));
                }
            }
        }
        VerdictKind::UnsatInBox => {
            let bound = distinct_coordinate_bound(spec).bound;
            for gamma in partitions_up_to(spec.n() as u32, bound as u32) {
                let covered =
                    result.outcomes.iter().any(|o| o.partition == gamma && o.verdict.kind == VerdictKind::UnsatInBox);
                if !covered {
                    return Err(format!("partition {gamma} has no emptiness certificate"));
                }
            }
        }
        _ => {}
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::SolveOptions;
    use crate::io::{builtin_problem, parse_system};
    use crate::reduction::solve_full;

    #[test]
    fn json_roundtrip_and_replay() {
        for spec in [
            builtin_problem("swe", 3).unwrap(),
            builtin_problem("orthant", 3).unwrap(),
            parse_system("n = 4\nsym: p2 - 2 = 0\nequ-template: x1^2 - 1/4 >= 0").unwrap(),
        ] {
            let result = solve_full(&spec, &SolveOptions::default(), 2).unwrap();
            let report = SolveReport::new(&spec, result, 0.5);
            let text = serde_json::to_string_pretty(&report).unwrap();
            let back: SolveReport = serde_json::from_str(&text).unwrap();
            assert_eq!(back, report);
            assert!(replay_report(&spec, &back).unwrap() > 0);
        }
    }

    #[test]
    fn tampered_reports_fail() {
        let spec = builtin_problem("swe", 3).unwrap();
        let result = solve_full(&spec, &SolveOptions::default(), 1).unwrap();
        let mut report = SolveReport::new(&spec, result, 0.0);
        report.result.outcomes.pop();
        assert!(replay_report(&spec, &report).is_err());
    }
}
