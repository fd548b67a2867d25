use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use eqsas::feasibility::{RegionChoice, SolveOptions, VerdictKind, Witness};
use eqsas::io::{
    builtin_problem, format_value, parse_grid, parse_system, print_reduced, qe_sample, replay_report, rom, run_bench,
    Meta, QeReport, RomVariant, SolveReport, Suite, SystemInfo, SCHEMA_VERSION,
};
use eqsas::partition::partitions_up_to;
use eqsas::poly::{parse_rational, Interval, Rational, VarLayout};
use eqsas::reduction::{distinct_coordinate_bound, reduce_system, solve_full, SystemSpec};
use eqsas::symmetry::{equivariant_decompose, fiber_zero_polynomial, symmetric_to_power_sums};

/// `println!` that exits quietly once stdout is closed, as when piped into
/// `head`.
macro_rules! say {
    ($($arg:tt)*) => {
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0)
        }
    };
}

const EXIT_SAT: u8 = 0;
const EXIT_UNSAT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INVALID: u8 = 65;

#[derive(Parser)]
#[command(name = "eqsas", version, about = "Feasibility of symmetric polynomial systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a system and report the reduction bound
    Check { system: String },
    /// Print the equivariant decomposition g_i = sum_j s_j x_i^j
    Decompose {
        system: String,
        /// Power-sum values p_1, .., p_d of a fiber: also print the
        /// univariate polynomial whose roots are the coordinate values where
        /// some g_i vanishes on that fiber
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        fiber: Vec<String>,
    },
    /// Print every reduced system
    Reduce {
        system: String,
        /// Write one file per partition into this directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide feasibility
    Solve {
        system: String,
        /// Search box: `lo:hi` for every coordinate, or one `lo:hi` per coordinate separated by commas
        #[arg(long = "box")]
        bx: Option<String>,
        #[arg(long)]
        max_boxes: Option<u64>,
        #[arg(long, env = "EQSAS_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Decide feasibility on a grid of parameter values
    QeSample {
        system: String,
        /// `lo:hi:step` per parameter, comma separated
        #[arg(long)]
        grid: String,
        /// Also decide the unreduced system at each point
        #[arg(long)]
        direct: bool,
        #[arg(long, env = "EQSAS_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Verdicts and wall times over a suite of instances
    Bench {
        #[arg(long)]
        suite: Suite,
        /// Comma separated list of n
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "EQSAS_JOBS")]
        jobs: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-verify the certificates in a solve report
    Replay { system: String, report: PathBuf },
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

/// A path, or `builtin:<name>:<n>` with name swe, rom, rom-classical or orthant.
fn load(arg: &str) -> Result<SystemSpec, Failure> {
    if let Some(rest) = arg.strip_prefix("builtin:") {
        let (name, n) = rest.rsplit_once(':').ok_or_else(|| fail(EXIT_USAGE, "expected builtin:<name>:<n>"))?;
        let n: usize = n.parse().map_err(|_| fail(EXIT_USAGE, format!("bad n {n:?}")))?;
        let spec = if name == "rom-classical" { rom(n, RomVariant::Classical) } else { builtin_problem(name, n) };
        return spec.map_err(|e| fail(EXIT_USAGE, e.to_string()));
    }
    let text = fs::read_to_string(arg).map_err(|e| fail(EXIT_USAGE, format!("{arg}: {e}")))?;
    parse_system(&text).map_err(|e| {
        let code = if e.is_validation() { EXIT_INVALID } else { EXIT_USAGE };
        fail(code, format!("{arg}: {e}"))
    })
}

fn jobs_or_default(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

fn parse_box(text: &str, n: usize) -> Result<RegionChoice, Failure> {
    let parse_iv = |s: &str| -> Result<Interval, Failure> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| fail(EXIT_USAGE, format!("box entry {s:?} must be lo:hi")))?;
        let lo: f64 = lo.trim().parse().map_err(|_| fail(EXIT_USAGE, format!("bad bound {lo:?}")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| fail(EXIT_USAGE, format!("bad bound {hi:?}")))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(fail(EXIT_USAGE, format!("box entry {s:?} needs finite lo <= hi")));
        }
        Ok(Interval::new(lo, hi))
    };
    let items: Vec<&str> = text.split(',').collect();
    match items.len() {
        1 => Ok(RegionChoice::Uniform(parse_iv(items[0])?)),
        len if len == n => Ok(RegionChoice::Fixed(items.iter().map(|s| parse_iv(s)).collect::<Result<_, _>>()?)),
        len => Err(fail(EXIT_USAGE, format!("box has {len} entries, system has n = {n}"))),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn exit_for(kind: VerdictKind) -> u8 {
    match kind {
        VerdictKind::SatCertified | VerdictKind::SatNumeric => EXIT_SAT,
        VerdictKind::UnsatInBox => EXIT_UNSAT,
        VerdictKind::Unknown => EXIT_UNKNOWN,
    }
}

fn format_witness(w: &Witness) -> String {
    let parts: Vec<String> = match w {
        Witness::Point(p) => p.iter().map(format_value).collect(),
        Witness::Box(b) => {
            b.iter().map(|iv| if iv.is_point() { format!("{}", iv.lo + 0.0) } else { iv.to_string() }).collect()
        }
    };
    format!("({})", parts.join(", "))
}

fn check(spec: &SystemSpec) {
    let h = distinct_coordinate_bound(spec);
    say!("valid system{}", if spec.source().is_empty() { String::new() } else { format!(" {}", spec.source()) });
    say!("n = {}, parameters = {}, d = {}", spec.n(), spec.t(), spec.d());
    say!(
        "equalities: {}, symmetric inequalities: {}, family: {}, general constraints: {}",
        spec.equalities().len(),
        spec.symmetric().len(),
        spec.family().map_or("none".to_string(), |(g, rel)| format!("{} components {rel} 0", g.n())),
        spec.general().len()
    );
    say!("distinct coordinates searched: {} (nominal 2d-1 = {})", h.bound, h.nominal_bound);
    for v in &h.violations {
        say!("hypothesis not met: {v}");
    }
    for note in &h.notes {
        say!("note: {note}");
    }
    let count = partitions_up_to(spec.n() as u32, h.bound as u32).len();
    say!("partitions to search: {count}");
}

fn decompose(spec: &SystemSpec, fiber: &[String]) -> Result<(), Failure> {
    let layout = spec.layout();
    let n = spec.n();
    for (i, f) in spec.equalities().iter().enumerate() {
        match symmetric_to_power_sums(f, n) {
            Ok(ps) => say!("f{} = {}", i + 1, ps.display()),
            Err(_) => say!("f{} = {}", i + 1, f.display(&layout)),
        }
    }
    let Some((g, rel)) = spec.family() else {
        say!("no equivariant family");
        return Ok(());
    };
    let dec = equivariant_decompose(g).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    say!("g_i = sum_j s_j x_i^j {rel} 0 with family degree {}", g.degree());
    for (j, s) in dec.coeffs.iter().enumerate() {
        let in_power_sums = symmetric_to_power_sums(s, n).map(|ps| ps.display()).ok();
        match in_power_sums {
            Some(ps) if ps != s.display(&layout) => say!("s_{j} = {}    [{}]", s.display(&layout), ps),
            _ => say!("s_{j} = {}", s.display(&layout)),
        }
    }
    let ok = (0..n).all(|i| dec.recompose(i) == g.components()[i]);
    say!("recomposition exact: {ok}");
    if fiber.is_empty() {
        return Ok(());
    }
    let gamma: Vec<Rational> = fiber
        .iter()
        .map(|v| parse_rational(v.trim()).ok_or_else(|| fail(EXIT_USAGE, format!("bad fiber value {v:?}"))))
        .collect::<Result<_, _>>()?;
    let f = fiber_zero_polynomial(g, &gamma).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    say!("delta(U) = {}", f.delta.display_with(|_| "U".to_string()));
    match (f.real_roots(), f.root_count()) {
        (Some(roots), Some(count)) => {
            let values: Vec<String> = roots
                .iter()
                .map(|r| if r.is_exact() { format_value(&r.lo) } else { format!("{:.9}", r.enclosure().mid()) })
                .collect();
            say!("real roots (t = {}): {}", count.t, values.join(", "));
            if count.exceeds {
                say!("note: t exceeds d - 1 = {}", count.bound);
            }
        }
        _ => say!("delta vanishes identically: every g_i is zero on this fiber"),
    }
    Ok(())
}

fn reduce(spec: &SystemSpec, out: Option<&Path>) -> Result<(), Failure> {
    let h = distinct_coordinate_bound(spec);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", dir.display())))?;
    }
    for gamma in partitions_up_to(spec.n() as u32, h.bound as u32) {
        let r = reduce_system(spec, &gamma);
        let text = print_reduced(&r, spec.source());
        match out {
            Some(dir) => {
                let parts: Vec<String> = gamma.parts().iter().map(u32::to_string).collect();
                let path = dir.join(format!("partition_{}.sys", parts.join("-")));
                fs::write(&path, text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
                say!("{}", path.display());
            }
            None => say!("{text}"),
        }
    }
    Ok(())
}

fn solve(
    spec: &SystemSpec,
    bx: Option<&str>,
    max_boxes: Option<u64>,
    jobs: usize,
    json: Option<&Path>,
) -> Result<u8, Failure> {
    let mut opts = SolveOptions::default();
    if let Some(b) = bx {
        opts.region = parse_box(b, spec.n())?;
    }
    if let Some(m) = max_boxes {
        opts.max_boxes = m;
    }
    let start = Instant::now();
    let v = solve_full(spec, &opts, jobs).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();
    say!("verdict: {}", v.kind);
    if let Some(p) = &v.partition {
        say!("partition: {p}");
    }
    if let Some(w) = &v.witness {
        say!("witness: {}", format_witness(w));
    }
    if let Some(r) = v.regular {
        say!("equality Jacobian full rank at witness: {r}");
    }
    if v.kind == VerdictKind::UnsatInBox {
        let scope = if v.box_is_global { "every real solution region" } else { "the search box" };
        say!("emptiness proved over {scope}");
    }
    for o in &v.outcomes {
        let reason = o.verdict.reason.as_deref().map(|r| format!(" ({r})")).unwrap_or_default();
        say!("  {} -> {} in {:.3}s, {} boxes{}", o.partition, o.verdict.kind, o.seconds, o.verdict.stats.boxes, reason);
    }
    if !v.skipped.is_empty() {
        say!("  {} partitions skipped after a certified witness", v.skipped.len());
    }
    for note in &v.notes {
        say!("note: {note}");
    }
    let code = exit_for(v.kind);
    if let Some(path) = json {
        write_json(path, &SolveReport::new(spec, v, wall))?;
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { system } => {
            check(&load(&system)?);
            Ok(0)
        }
        Command::Decompose { system, fiber } => decompose(&load(&system)?, &fiber).map(|_| 0),
        Command::Reduce { system, out } => reduce(&load(&system)?, out.as_deref()).map(|_| 0),
        Command::Solve { system, bx, max_boxes, jobs, json } => {
            solve(&load(&system)?, bx.as_deref(), max_boxes, jobs_or_default(jobs), json.as_deref())
        }
        Command::QeSample { system, grid, direct, jobs, json } => {
            let spec = load(&system)?;
            let axes = parse_grid(&grid, spec.t()).map_err(|e| fail(EXIT_USAGE, e))?;
            let start = Instant::now();
            let table = qe_sample(&spec, &axes, &SolveOptions::default(), jobs_or_default(jobs), direct)
                .map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
            let layout = VarLayout::new(spec.n(), spec.t());
            for row in &table.rows {
                let params: Vec<String> = row
                    .params
                    .iter()
                    .enumerate()
                    .map(|(j, v)| format!("{}={}", layout.name(layout.y(j)), format_value(v)))
                    .collect();
                let direct = row.direct.map(|d| format!("  direct: {d}")).unwrap_or_default();
                say!("{}  {}{}", params.join(" "), row.decomposed, direct);
            }
            if let Some(path) = json {
                let report = QeReport {
                    schema_version: SCHEMA_VERSION,
                    meta: Meta::new(None),
                    system: SystemInfo::of(&spec),
                    table,
                    wall_seconds: start.elapsed().as_secs_f64(),
                };
                write_json(&path, &report)?;
            }
            Ok(0)
        }
        Command::Bench { suite, n, d, k, seed, jobs, json } => {
            if n.is_empty() {
                return Err(fail(EXIT_USAGE, "--n needs at least one value"));
            }
            let report = run_bench(suite, &n, d, k, seed, &SolveOptions::default(), jobs_or_default(jobs))
                .map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
            say!("{:>4} {:>3} {:>3} {:>12} verdict", "n", "d", "k", "wall-time(s)");
            for r in &report.rows {
                say!("{:>4} {:>3} {:>3} {:>12.4} {}", r.n, r.d, r.k, r.wall_seconds, r.verdict);
            }
            if let Some(path) = json {
                write_json(&path, &report)?;
            }
            Ok(0)
        }
        Command::Replay { system, report } => {
            let spec = load(&system)?;
            let text =
                fs::read_to_string(&report).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", report.display())))?;
            let parsed: SolveReport = serde_json::from_str(&text).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
            let checked =
                replay_report(&spec, &parsed).map_err(|e| fail(EXIT_INVALID, format!("replay failed: {e}")))?;
            say!("replayed {checked} certificates: ok");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
