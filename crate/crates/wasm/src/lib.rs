//! Browser bindings: solve a system, show its equivariant decomposition,
//! and sample a parametric system over a grid.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use eqsas::feasibility::{refine_to_width, SolveOptions, Witness};
use eqsas::io::{builtin_problem, format_value, parse_grid, parse_system, print_system, qe_sample};
use eqsas::partition::partitions_up_to;
use eqsas::poly::{parse_rational, Polynomial, Rational};
use eqsas::reduction::{distinct_coordinate_bound, solve_full, SystemSpec};
use eqsas::symmetry::{equivariant_decompose, fiber_zero_polynomial, symmetric_to_power_sums};

#[derive(Serialize)]
struct Outcome {
    partition: String,
    verdict: String,
    boxes: u64,
    reason: Option<String>,
}

#[derive(Serialize)]
struct SolveSummary {
    verdict: String,
    partition: Option<String>,
    witness: Option<Vec<String>>,
    global: bool,
    bound: usize,
    outcomes: Vec<Outcome>,
    skipped: usize,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct Coefficient {
    power: usize,
    poly: String,
    power_sums: Option<String>,
}

#[derive(Serialize)]
struct Decomposition {
    n: usize,
    d: u32,
    bound: usize,
    partitions: Vec<String>,
    violations: Vec<String>,
    equalities: Vec<String>,
    coefficients: Vec<Coefficient>,
    fiber: Option<Fiber>,
}

#[derive(Serialize)]
struct Fiber {
    delta: String,
    /// `None` when δ vanishes identically.
    roots: Option<Vec<f64>>,
    bound: usize,
}

#[derive(Serialize)]
struct QeRow {
    params: Vec<String>,
    verdict: String,
    partition: Option<String>,
}

fn js_error(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(js_error)
}

fn load(text: &str) -> Result<SystemSpec, JsError> {
    parse_system(text).map_err(js_error)
}

fn witness_strings(w: &Witness) -> Vec<String> {
    match w {
        Witness::Point(p) => p.iter().map(format_value).collect(),
        Witness::Box(b) => {
            b.iter().map(|iv| if iv.is_point() { format!("{}", iv.lo + 0.0) } else { iv.to_string() }).collect()
        }
    }
}

/// System file text for a builtin problem (`swe`, `rom` or `orthant`).
#[wasm_bindgen]
pub fn builtin_text(name: &str, n: usize) -> Result<String, JsError> {
    Ok(print_system(&builtin_problem(name, n).map_err(js_error)?))
}

/// Decides a parameter-free system; returns a JSON summary.
#[wasm_bindgen]
pub fn solve(text: &str, max_boxes: u32) -> Result<String, JsError> {
    let spec = load(text)?;
    let opts = SolveOptions { max_boxes: u64::from(max_boxes.max(1)), ..SolveOptions::default() };
    let v = solve_full(&spec, &opts, 1).map_err(js_error)?;
    to_json(&SolveSummary {
        verdict: v.kind.to_string(),
        partition: v.partition.as_ref().map(ToString::to_string),
        witness: v.witness.as_ref().map(witness_strings),
        global: v.box_is_global,
        bound: v.hypotheses.bound,
        outcomes: v
            .outcomes
            .iter()
            .map(|o| Outcome {
                partition: o.partition.to_string(),
                verdict: o.verdict.kind.to_string(),
                boxes: o.verdict.stats.boxes,
                reason: o.verdict.reason.clone(),
            })
            .collect(),
        skipped: v.skipped.len(),
        notes: v.notes,
    })
}

/// Equivariant decomposition `g_i = Σ_j s_j x_i^j`, the power-sum forms and
/// the partitions that the search visits; returns JSON. A nonempty `fiber`
/// (comma separated values of `p_1, .., p_d`) adds the polynomial δ whose
/// roots are the coordinate values where some `g_i` vanishes on that fiber.
#[wasm_bindgen]
pub fn decompose(text: &str, fiber: &str) -> Result<String, JsError> {
    let spec = load(text)?;
    let (n, layout) = (spec.n(), spec.layout());
    let h = distinct_coordinate_bound(&spec);
    let power_sums = |f: &Polynomial| symmetric_to_power_sums(f, n).ok().map(|e| e.display());
    let coefficients = match spec.family() {
        Some((g, _)) => equivariant_decompose(g)
            .map_err(js_error)?
            .coeffs
            .into_iter()
            .enumerate()
            .map(|(power, s)| Coefficient { power, poly: s.display(&layout), power_sums: power_sums(&s) })
            .collect(),
        None => Vec::new(),
    };
    let fiber = match (spec.family(), fiber.trim()) {
        (Some((g, _)), f) if !f.is_empty() => {
            let gamma: Vec<Rational> = f
                .split(',')
                .map(|v| parse_rational(v.trim()).ok_or_else(|| JsError::new(&format!("bad fiber value {v:?}"))))
                .collect::<Result<_, _>>()?;
            let f = fiber_zero_polynomial(g, &gamma).map_err(js_error)?;
            let roots = f
                .real_roots()
                .map(|rs| rs.iter().map(|r| refine_to_width(&f.coeffs, r, 1e-12).enclosure().mid()).collect());
            let bound = f.family_degree.saturating_sub(1) as usize;
            Some(Fiber { delta: f.delta.display_with(|_| "U".to_string()), roots, bound })
        }
        _ => None,
    };
    to_json(&Decomposition {
        fiber,
        n,
        d: spec.d(),
        bound: h.bound,
        partitions: partitions_up_to(n as u32, h.bound as u32).iter().map(ToString::to_string).collect(),
        violations: h.violations.iter().map(ToString::to_string).collect(),
        equalities: spec.equalities().iter().map(|f| power_sums(f).unwrap_or_else(|| f.display(&layout))).collect(),
        coefficients,
    })
}

/// Verdict at every point of a parameter grid such as `-2:2:0.25`.
#[wasm_bindgen]
pub fn sample(text: &str, grid: &str) -> Result<String, JsError> {
    let spec = load(text)?;
    let axes = parse_grid(grid, spec.t()).map_err(js_error)?;
    let table = qe_sample(&spec, &axes, &SolveOptions::default(), 1, false).map_err(js_error)?;
    let rows: Vec<QeRow> = table
        .rows
        .iter()
        .map(|r| QeRow {
            params: r.params.iter().map(format_value).collect(),
            verdict: r.decomposed.to_string(),
            partition: r.partition.as_ref().map(ToString::to_string),
        })
        .collect();
    to_json(&rows)
}
