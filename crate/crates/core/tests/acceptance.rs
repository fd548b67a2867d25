//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqsas::feasibility::{oracle_grid_search, OracleOptions, SolveOptions, VerdictKind, Witness};
use eqsas::io::{
    builtin_problem, gen_s1, gen_s2, qe_sample, random_symmetric, replay_report, run_bench, GridAxis, SolveReport,
    Suite,
};
use eqsas::partition::{partitions_exact, partitions_up_to, Partition};
use eqsas::poly::{int, rat, Interval, Polynomial, Rational};
use eqsas::reduction::{distinct_coordinate_bound, qe_decompose, solve_decomposed, solve_full, SystemSpec};
use eqsas::symmetry::{equivariant_decompose, gradient_family, power_sum, symmetric_to_power_sums, EquivariantFamily};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

/// Solve reports whose certificates are replayed by the soundness check.
type Reports = Vec<(SystemSpec, SolveReport)>;

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn solve(spec: &SystemSpec, reports: &mut Reports) -> (SolveReport, Duration) {
    let start = Instant::now();
    let v = solve_full(spec, &SolveOptions::default(), jobs()).expect("solve_full runs");
    let wall = start.elapsed();
    let report = SolveReport::new(spec, v, wall.as_secs_f64());
    reports.push((spec.clone(), report.clone()));
    (report, wall)
}

fn swe_emptiness(reports: &mut Reports) -> Outcome {
    let mut failures = Vec::new();
    let mut times = Vec::new();
    for n in 3..=7 {
        let spec = builtin_problem("swe", n).unwrap();
        let (report, wall) = solve(&spec, reports);
        let r = &report.result;
        times.push(format!("n={n}: {:.2}s", wall.as_secs_f64()));
        if r.kind != VerdictKind::UnsatInBox || !r.box_is_global || wall > Duration::from_secs(120) {
            failures.push(format!("n={n}: {} global={} {:.1}s", r.kind, r.box_is_global, wall.as_secs_f64()));
        }
    }
    let detail = if failures.is_empty() { times.join(", ") } else { failures.join("; ") };
    Outcome::new(failures.is_empty(), detail)
}

fn reduction_property(reports: &mut Reports) -> Outcome {
    let start = Instant::now();
    let oracle = OracleOptions { steps: 9, slack: None, strict_only: true, symmetric: true };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut instances, mut hits, mut certified) = (0, 0, 0);
    let mut counterexamples = Vec::new();
    let mut seed = 0u64;
    while instances < 200 {
        seed += 1;
        let n = rng.gen_range(4..=7usize);
        let d = if n >= 6 && rng.gen_bool(0.5) { 3 } else { 2 };
        // equalities of a random dense system almost never meet a grid
        // point exactly, so S2 instances carry no equalities here
        let spec = if seed.is_multiple_of(2) { gen_s1(n, d, seed) } else { gen_s2(n, d, 0, seed) }.unwrap();
        if distinct_coordinate_bound(&spec).degraded() {
            continue;
        }
        instances += 1;
        let problem = spec.to_problem(&[]).unwrap();
        let bx = vec![Interval::new(-4.0, 4.0); n];
        if oracle_grid_search(&problem, &bx, &oracle).is_none() {
            continue;
        }
        hits += 1;
        let (report, _) = solve(&spec, reports);
        let r = &report.result;
        certified += usize::from(r.kind == VerdictKind::SatCertified);
        let distinct = r.distinct_coordinates();
        if !r.kind.is_sat() || distinct.is_none_or(|k| k > 2 * d as usize - 1) {
            counterexamples.push(format!("{}: {} with {distinct:?} distinct coordinates", spec.source(), r.kind));
        }
    }
    let wall = start.elapsed();
    let detail = format!(
        "{instances} instances, oracle found points in {hits}, {certified} certified, {} counterexamples, {:.1}s{}",
        counterexamples.len(),
        wall.as_secs_f64(),
        counterexamples.first().map(|c| format!(" (first: {c})")).unwrap_or_default()
    );
    Outcome::new(counterexamples.is_empty() && wall < Duration::from_secs(30 * 60), detail)
}

/// `g_1 = Σ_j x_1^j s_j` with random symmetric `s_j`, or the gradient of a
/// random symmetric polynomial.
fn random_family(rng: &mut ChaCha8Rng) -> EquivariantFamily {
    let n = rng.gen_range(2..=5usize);
    let d = rng.gen_range(1..=4u32);
    if rng.gen_bool(0.3) {
        return gradient_family(&random_symmetric(n, d + 1, rng), n).unwrap();
    }
    let x1 = Polynomial::var(0);
    let mut g1 = Polynomial::zero();
    for j in 0..=d {
        g1 += &(&x1.pow(j) * &random_symmetric(n, d - j, rng));
    }
    EquivariantFamily::from_template(n, g1).unwrap()
}

fn decomposition_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut family_failures = 0;
    for _ in 0..100 {
        let g = random_family(&mut rng);
        let exact = equivariant_decompose(&g)
            .map(|dec| (0..g.n()).all(|i| (&dec.recompose(i) - &g.components()[i]).is_zero()))
            .unwrap_or(false);
        family_failures += usize::from(!exact);
    }
    let mut sym_failures = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6usize);
        // the power-sum form exists for degree at most n
        let f = random_symmetric(n, rng.gen_range(0..=n.min(5) as u32), &mut rng);
        let exact = symmetric_to_power_sums(&f, n).map(|e| (&e.compose() - &f).is_zero()).unwrap_or(false);
        sym_failures += usize::from(!exact);
    }
    Outcome::new(
        family_failures == 0 && sym_failures == 0,
        format!("families: {family_failures}/100 nonzero residuals, power sums: {sym_failures}/100"),
    )
}

/// Every partition of `n`, by merging pairs of parts starting from all ones.
fn brute_force_partitions(n: u32) -> BTreeSet<Vec<u32>> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![vec![1u32; n as usize]];
    seen.insert(vec![1u32; n as usize]);
    while let Some(p) = frontier.pop() {
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let mut q: Vec<u32> =
                    p.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, &v)| v).collect();
                q.push(p[i] + p[j]);
                q.sort_unstable();
                if seen.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
    }
    seen
}

fn partition_machinery() -> Outcome {
    let mut failures = Vec::new();
    for n in 1..=30u32 {
        let all = brute_force_partitions(n);
        for r in 1..=9u32 {
            let expected: BTreeSet<Vec<u32>> = all.iter().filter(|p| p.len() <= r as usize).cloned().collect();
            let listed: Vec<Vec<u32>> = partitions_up_to(n, r).iter().map(|p| p.parts().to_vec()).collect();
            let got: BTreeSet<Vec<u32>> = listed.iter().cloned().collect();
            if got != expected || listed.len() != got.len() {
                failures.push(format!("n={n} r={r}: {} listed, {} expected", listed.len(), expected.len()));
            }
            let exact = partitions_exact(n, r).len();
            if (exact as f64) > (n as f64).powi(r as i32) {
                failures.push(format!("p({n},{r}) = {exact} exceeds n^r"));
            }
            if n < r && exact != 0 {
                failures.push(format!("p({n},{r}) = {exact}, expected 0"));
            }
        }
        if partitions_exact(n, 1).len() != 1 || partitions_exact(n, n).len() != 1 {
            failures.push(format!("p({n},1) or p({n},{n}) is not 1"));
        }
    }
    let detail = if failures.is_empty() { "n <= 30, r <= 9".to_string() } else { failures.join("; ") };
    Outcome::new(failures.is_empty(), detail)
}

fn all_equal(w: &Witness) -> bool {
    match w {
        Witness::Point(p) => p.windows(2).all(|v| v[0] == v[1]),
        Witness::Box(b) => b.windows(2).all(|v| v[0] == v[1]),
    }
}

fn diagonal_point(reports: &mut Reports) -> Outcome {
    let mut failures = Vec::new();
    let mut times = Vec::new();
    for n in 3..=5 {
        let spec = builtin_problem("orthant", n).unwrap();
        let (report, wall) = solve(&spec, reports);
        let r = &report.result;
        times.push(format!("n={n}: {:.3}s", wall.as_secs_f64()));
        let ok = r.kind == VerdictKind::SatCertified
            && r.partition == Some(Partition::trivial(n as u32))
            && r.witness.as_ref().is_some_and(all_equal)
            && wall < Duration::from_secs(5);
        if !ok {
            failures.push(format!("n={n}: {} at {:?}", r.kind, r.partition));
        }
    }
    let detail = if failures.is_empty() { times.join(", ") } else { failures.join("; ") };
    Outcome::new(failures.is_empty(), detail)
}

fn union_identity(reports: &mut Reports) -> Outcome {
    let n = 4;
    let y = Polynomial::var(2 * n as u32);
    let spec = SystemSpec::builder(n, 1).source("sphere").equality(&power_sum(2, n) - &y).build().unwrap();
    let axis = GridAxis { lo: int(-2), hi: int(2), step: rat(1, 4) };
    let opts = SolveOptions::default();
    let table = qe_sample(&spec, &[axis], &opts, jobs(), true).unwrap();
    let mut failures = Vec::new();
    for row in &table.rows {
        let expect_sat = row.params[0] >= Rational::from_integer(0.into());
        if row.decomposed.is_sat() != expect_sat || row.decomposed == VerdictKind::Unknown {
            failures.push(format!("y={}: {}", row.params[0], row.decomposed));
        }
        if row.agrees() != Some(true) {
            failures.push(format!("y={}: decomposed {} vs direct {:?}", row.params[0], row.decomposed, row.direct));
        }
    }
    // keep each decomposed verdict for the replay check
    let systems = qe_decompose(&spec).unwrap();
    for row in &table.rows {
        let v = solve_decomposed(&spec, &systems, &row.params, &opts, jobs()).unwrap();
        let fixed = spec.instantiate(&row.params).unwrap();
        let report = SolveReport::new(&fixed, v, 0.0);
        reports.push((fixed, report));
    }
    let sat = table.rows.iter().filter(|r| r.decomposed.is_sat()).count();
    let detail = if failures.is_empty() {
        format!("{} grid points, {sat} Sat, all agree with the direct path", table.rows.len())
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

fn soundness_replay(reports: &Reports) -> Outcome {
    let mut failures = Vec::new();
    let mut certificates = 0;
    for (spec, report) in reports {
        // replay from the serialized form, as an offline checker would
        let text = serde_json::to_string(report).unwrap();
        let parsed: SolveReport = serde_json::from_str(&text).unwrap();
        match replay_report(spec, &parsed) {
            Ok(k) => certificates += k,
            Err(e) => failures.push(format!("{}: {e}", spec.source())),
        }
    }
    let detail = if failures.is_empty() {
        format!("{} reports, {certificates} certificates replayed", reports.len())
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

fn scaling_smoke() -> Outcome {
    let start = Instant::now();
    let ns: Vec<usize> = (3..=9).collect();
    let report = run_bench(Suite::S1, &ns, 2, 0, 1, &SolveOptions::default(), jobs()).unwrap();
    let wall = start.elapsed();
    println!("      {:>3} {:>12} verdict", "n", "wall-time(s)");
    for r in &report.rows {
        println!("      {:>3} {:>12.4} {}", r.n, r.wall_seconds, r.verdict);
    }
    let delivered = report.rows.iter().all(|r| r.verdict != VerdictKind::Unknown);
    Outcome::new(
        delivered && wall < Duration::from_secs(300),
        format!("{} verdicts, total {:.2}s", report.rows.len(), wall.as_secs_f64()),
    )
}

fn record(results: &mut Vec<bool>, id: u32, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = f();
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!("{status} {id} {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
    results.push(o.pass);
}

fn main() -> ExitCode {
    let mut reports = Reports::new();
    let mut results = Vec::new();
    record(&mut results, 1, "SWE emptiness, n = 3..7", || swe_emptiness(&mut reports));
    record(&mut results, 2, "reduction property on 200 random S1/S2 systems", || reduction_property(&mut reports));
    record(&mut results, 3, "decomposition and power-sum round trips", decomposition_roundtrip);
    record(&mut results, 4, "partition enumeration", partition_machinery);
    record(&mut results, 5, "orthant diagonal witness, n = 3..5", || diagonal_point(&mut reports));
    record(&mut results, 6, "sphere union identity over y in [-2, 2]", || union_identity(&mut reports));
    record(&mut results, 7, "certificate replay", || soundness_replay(&reports));
    record(&mut results, 8, "S1 scaling, d = 2, n = 3..9", scaling_smoke);
    let failed = results.iter().filter(|&&p| !p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
