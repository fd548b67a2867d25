use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use web_time::Instant;

use serde::{Deserialize, Serialize};

use super::reduce::block_map;
use super::{
    distinct_coordinate_bound, expand_witness, reduce_system, HypothesisReport, ReducedSystem, ReductionError,
    SystemSpec,
};
use crate::feasibility::{
    check_regularity, decide, replay, Constraint, FeasibilityError, Problem, RegionChoice, Relation, SolveOptions,
    Verdict, VerdictKind, Witness,
};
use crate::partition::{partitions_up_to, Partition};
use crate::poly::{Interval, Rational};

pub const DEGRADED_NOTE: &str = "theorem hypotheses not met; reduction bound is trivial";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionOutcome {
    pub partition: Partition,
    /// Verdict on the reduced system, in block variables.
    pub verdict: Verdict,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullVerdict {
    pub kind: VerdictKind,
    /// Witness in the original `n` coordinates.
    pub witness: Option<Witness>,
    pub partition: Option<Partition>,
    pub outcomes: Vec<PartitionOutcome>,
    /// Partitions not searched because an earlier one was already certified.
    pub skipped: Vec<Partition>,
    pub hypotheses: HypothesisReport,
    /// Every reduced search box contained all real solutions.
    pub box_is_global: bool,
    /// Full-rank Jacobian of the equalities at the witness.
    pub regular: Option<bool>,
    pub notes: Vec<String>,
}

impl FullVerdict {
    pub fn distinct_coordinates(&self) -> Option<usize> {
        let w = self.witness.as_ref()?.approx();
        let mut v: Vec<f64> = w;
        v.sort_by(f64::total_cmp);
        v.dedup();
        Some(v.len())
    }
}

/// Restricts a box on the x-variables to the block variables of `gamma`.
fn block_region(region: &RegionChoice, gamma: &Partition) -> RegionChoice {
    match region {
        RegionChoice::Fixed(bx) => {
            let blocks = gamma.block_of_coordinates();
            let mut out: Vec<Option<Interval>> = vec![None; gamma.len()];
            for (i, b) in blocks.into_iter().enumerate() {
                // a block whose coordinate ranges are disjoint keeps the
                // first range: a larger box is still sound
                out[b] = Some(match out[b] {
                    None => bx[i],
                    Some(iv) => iv.intersect(&bx[i]).unwrap_or(iv),
                });
            }
            RegionChoice::Fixed(out.into_iter().map(|iv| iv.expect("every block is nonempty")).collect())
        }
        other => other.clone(),
    }
}

type TaskResult = Result<(Verdict, f64), FeasibilityError>;

/// Decides every task on a pool of `jobs` threads. Tasks after the first
/// certified one are skipped (`None`); all earlier tasks always run, so the
/// outcome does not depend on scheduling.
fn run_pool(tasks: &[(Problem, SolveOptions)], jobs: usize) -> Vec<Option<TaskResult>> {
    let next = AtomicUsize::new(0);
    let first_certified = AtomicUsize::new(usize::MAX);
    let slots: Vec<Mutex<Option<TaskResult>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= tasks.len() {
            break;
        }
        if i > first_certified.load(Ordering::SeqCst) {
            continue;
        }
        let start = Instant::now();
        let result = decide(&tasks[i].0, &tasks[i].1).map(|v| (v, start.elapsed().as_secs_f64()));
        if matches!(&result, Ok((v, _)) if v.kind == VerdictKind::SatCertified) {
            first_certified.fetch_min(i, Ordering::SeqCst);
        }
        *slots[i].lock().expect("result slot") = Some(result);
    };
    let threads = jobs.clamp(1, tasks.len().max(1));
    if threads == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(worker);
            }
        });
    }
    let cutoff = first_certified.load(Ordering::SeqCst);
    slots
        .into_iter()
        .enumerate()
        .map(|(i, m)| if i > cutoff { None } else { m.into_inner().expect("result slot") })
        .collect()
}

/// Checks a reduced Sat verdict against the original system and returns
/// the expanded witness.
fn verify(spec: &SystemSpec, reduced: &ReducedSystem, problem: &Problem, v: &Verdict) -> Result<Witness, String> {
    let witness = v.witness.as_ref().ok_or("verdict has no witness")?;
    let gamma = &reduced.partition;
    if v.kind == VerdictKind::SatCertified {
        replay(problem, v).map_err(|e| e.to_string())?;
        // every original constraint must appear in the reduced problem
        let n = spec.n() as u32;
        let map = block_map(spec.layout(), gamma);
        for (k, c) in spec.constraints().into_iter().enumerate() {
            let local = c.poly.substitute(&map).rename(|v| v - n).primitive_part();
            if !problem.constraints.iter().any(|pc| pc.rel == c.rel && pc.poly == local) {
                return Err(format!("original constraint {k} is missing from the reduced system"));
            }
        }
    }
    let expanded = match witness {
        Witness::Point(p) => Witness::Point(expand_witness(p, gamma).map_err(|e| e.to_string())?),
        Witness::Box(b) => Witness::Box(expand_witness(b, gamma).map_err(|e| e.to_string())?),
    };
    for (k, c) in spec.constraints().iter().enumerate() {
        let ok = match (&expanded, v.kind) {
            (Witness::Point(p), VerdictKind::SatCertified) => c.holds_at(p),
            (Witness::Box(b), VerdictKind::SatCertified) => !c.rel.excluded_by(c.poly.evaluate_interval(b)),
            (w, _) => numeric_holds(c, &w.approx()),
        };
        if !ok {
            return Err(format!("original constraint {k} fails at the expanded witness"));
        }
    }
    Ok(expanded)
}

fn numeric_holds(c: &Constraint, x: &[f64]) -> bool {
    let value = c.poly.evaluate_f64(x);
    let scale: f64 = c
        .poly
        .terms()
        .map(|(m, coef)| {
            let mag: f64 = m.pairs().iter().map(|&(v, e)| x[v as usize].abs().powi(e as i32)).product();
            mag * num_traits::ToPrimitive::to_f64(coef).unwrap_or(f64::INFINITY).abs()
        })
        .sum();
    let tol = 1e-6 * (1.0 + scale);
    match c.rel {
        Relation::Eq => value.abs() <= tol,
        Relation::Ge | Relation::Gt => value >= -tol,
    }
}

/// Decides the reduced systems (in order) and aggregates: a verified Sat
/// wins, then Unknown, then UnsatInBox.
fn run_partitions(
    spec: &SystemSpec,
    systems: Vec<ReducedSystem>,
    params: &[Rational],
    hypotheses: HypothesisReport,
    opts: &SolveOptions,
    jobs: usize,
) -> Result<FullVerdict, ReductionError> {
    if let RegionChoice::Fixed(bx) = &opts.region {
        if bx.len() != spec.n() {
            return Err(ReductionError::BoxDimension { expected: spec.n(), got: bx.len() });
        }
    }
    let mut tasks = Vec::with_capacity(systems.len());
    for r in &systems {
        let problem = r.to_problem(params)?;
        let local = SolveOptions { region: block_region(&opts.region, &r.partition), ..opts.clone() };
        tasks.push((problem, local));
    }
    let results = run_pool(&tasks, jobs);

    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    let mut ran = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            None => skipped.push(systems[i].partition.clone()),
            Some(Err(source)) => {
                return Err(ReductionError::Backend { partition: systems[i].partition.clone(), source });
            }
            Some(Ok((verdict, seconds))) => {
                ran.push((i, outcomes.len()));
                outcomes.push(PartitionOutcome { partition: systems[i].partition.clone(), verdict, seconds });
            }
        }
    }

    let mut notes = Vec::new();
    if hypotheses.degraded() {
        notes.push(DEGRADED_NOTE.to_string());
    }
    let instantiated = if params.is_empty() { spec.clone() } else { spec.instantiate(params)? };
    let mut candidates: Vec<(usize, usize)> = ran.clone();
    candidates.sort_by_key(|&(i, o)| (outcomes[o].verdict.kind != VerdictKind::SatCertified, i));
    let mut failed = false;
    for (i, o) in candidates {
        let v = &outcomes[o].verdict;
        if !v.kind.is_sat() {
            continue;
        }
        match verify(&instantiated, &systems[i], &tasks[i].0, v) {
            Ok(witness) => {
                let regular = (!instantiated.equalities().is_empty())
                    .then(|| check_regularity(instantiated.equalities(), &witness.approx(), 1e-8));
                return Ok(FullVerdict {
                    kind: v.kind,
                    witness: Some(witness),
                    partition: Some(systems[i].partition.clone()),
                    outcomes,
                    skipped,
                    hypotheses,
                    box_is_global: false,
                    regular,
                    notes,
                });
            }
            Err(e) => {
                failed = true;
                notes.push(format!("partition {}: witness rejected on re-verification: {e}", systems[i].partition));
            }
        }
    }
    let unknown = failed || !skipped.is_empty() || outcomes.iter().any(|o| o.verdict.kind == VerdictKind::Unknown);
    let kind = if unknown { VerdictKind::Unknown } else { VerdictKind::UnsatInBox };
    let box_is_global = kind == VerdictKind::UnsatInBox && outcomes.iter().all(|o| o.verdict.box_is_global);
    Ok(FullVerdict {
        kind,
        witness: None,
        partition: None,
        outcomes,
        skipped,
        hypotheses,
        box_is_global,
        regular: None,
        notes,
    })
}

/// Decides a parameter-free system by searching every partition of `n`
/// into at most `r` blocks, `r` from [`distinct_coordinate_bound`].
pub fn solve_full(spec: &SystemSpec, opts: &SolveOptions, jobs: usize) -> Result<FullVerdict, ReductionError> {
    if spec.t() > 0 {
        return Err(ReductionError::HasParameters { t: spec.t() });
    }
    let hypotheses = distinct_coordinate_bound(spec);
    let systems =
        partitions_up_to(spec.n() as u32, hypotheses.bound as u32).iter().map(|g| reduce_system(spec, g)).collect();
    run_partitions(spec, systems, &[], hypotheses, opts, jobs)
}

/// One parametric reduced system per partition; the projection of the
/// solution set is the union of their projections.
pub fn qe_decompose(spec: &SystemSpec) -> Result<Vec<ReducedSystem>, ReductionError> {
    if spec.t() == 0 {
        return Err(ReductionError::NoParameters);
    }
    let h = distinct_coordinate_bound(spec);
    if h.degraded() {
        let msgs: Vec<String> = h.violations.iter().map(ToString::to_string).collect();
        return Err(ReductionError::Hypotheses(msgs.join("; ")));
    }
    Ok(partitions_up_to(spec.n() as u32, h.bound as u32).iter().map(|g| reduce_system(spec, g)).collect())
}

/// Decides the union of parametric reduced systems at one parameter value.
pub fn solve_decomposed(
    spec: &SystemSpec,
    systems: &[ReducedSystem],
    params: &[Rational],
    opts: &SolveOptions,
    jobs: usize,
) -> Result<FullVerdict, ReductionError> {
    let hypotheses = distinct_coordinate_bound(spec);
    run_partitions(spec, systems.to_vec(), params, hypotheses, opts, jobs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, Polynomial};
    use crate::symmetry::{gradient_family, power_sum, EquivariantFamily};

    #[test]
    fn diagonal_point_first() {
        let n = 5;
        let g = gradient_family(&power_sum(2, n), n).unwrap();
        let spec = SystemSpec::builder(n, 0).family(g, Relation::Ge).build().unwrap();
        let v = solve_full(&spec, &SolveOptions::default(), 1).unwrap();
        assert_eq!(v.kind, VerdictKind::SatCertified);
        assert_eq!(v.partition, Some(Partition::trivial(n as u32)));
        assert_eq!(v.distinct_coordinates(), Some(1));
        assert!(v.notes.iter().any(|s| s == DEGRADED_NOTE));
        assert_eq!(v.outcomes.len(), 1);
    }

    #[test]
    fn negative_sphere_is_empty() {
        let n = 4;
        let spec = SystemSpec::builder(n, 0).equality(&power_sum(2, n) + &Polynomial::one()).build().unwrap();
        for jobs in [1, 3] {
            let v = solve_full(&spec, &SolveOptions::default(), jobs).unwrap();
            assert_eq!(v.kind, VerdictKind::UnsatInBox);
            assert!(v.box_is_global);
            for o in &v.outcomes {
                replay(&tasks_problem(&spec, &o.partition), &o.verdict).unwrap();
            }
        }
    }

    fn tasks_problem(spec: &SystemSpec, g: &Partition) -> Problem {
        reduce_system(spec, g).to_problem(&[]).unwrap()
    }

    #[test]
    fn sphere_with_cubic_family() {
        // p2 = 7 with every |x_i| >= 1, e.g. (1, 1, 1, 2)
        let n = 4;
        let x = Polynomial::var;
        let g = EquivariantFamily::from_template(n, &x(0).pow(2) - &Polynomial::one()).unwrap();
        let spec = SystemSpec::builder(n, 0)
            .equality(&power_sum(2, n) - &Polynomial::from_int(7))
            .family(g, Relation::Ge)
            .build()
            .unwrap();
        let v = solve_full(&spec, &SolveOptions::default(), 2).unwrap();
        assert!(v.kind.is_sat(), "{v:?}");
        let w = v.witness.unwrap().approx();
        assert!((w.iter().map(|c| c * c).sum::<f64>() - 7.0).abs() < 1e-8);
        assert!(w.iter().all(|c| c.abs() >= 1.0 - 1e-9));
    }

    #[test]
    fn fixed_box_restricts_blocks() {
        let g = Partition::new(vec![1, 2]).unwrap();
        let bx = vec![Interval::new(0.0, 1.0), Interval::new(-1.0, 2.0), Interval::new(0.5, 3.0)];
        match block_region(&RegionChoice::Fixed(bx), &g) {
            RegionChoice::Fixed(b) => assert_eq!(b, vec![Interval::new(0.0, 1.0), Interval::new(0.5, 2.0)]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn parametric_contracts() {
        let n = 4;
        let y = Polynomial::var(2 * n as u32);
        let spec = SystemSpec::builder(n, 1).equality(&power_sum(2, n) - &y).build().unwrap();
        let systems = qe_decompose(&spec).unwrap();
        let parts: Vec<String> = systems.iter().map(|s| s.partition.to_string()).collect();
        assert_eq!(parts, ["[4]", "[1,3]", "[2,2]", "[1,1,2]"]);
        assert!(matches!(solve_full(&spec, &SolveOptions::default(), 1), Err(ReductionError::HasParameters { t: 1 })));
        let flat = spec.instantiate(&[int(1)]).unwrap();
        assert!(matches!(qe_decompose(&flat), Err(ReductionError::NoParameters)));
        let v = solve_decomposed(&spec, &systems, &[int(2)], &SolveOptions::default(), 1).unwrap();
        assert!(v.kind.is_sat());
        let v = solve_decomposed(&spec, &systems, &[int(-1)], &SolveOptions::default(), 1).unwrap();
        assert_eq!(v.kind, VerdictKind::UnsatInBox);
    }
}
