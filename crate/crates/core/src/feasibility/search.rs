//! Interval branch-and-prune.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::certify::{certify_candidate, newton, snap_point};
use super::{Certificate, Problem, Relation, SearchStats, SolveOptions, Verdict, VerdictKind, Witness};
use crate::poly::{rational_from_f64, CompiledPoly, Interval, Rational};

/// How a cell was shown to violate a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExclusionMethod {
    /// Term-by-term interval evaluation.
    Natural,
    /// Mean-value form around the cell midpoint, intersected with the
    /// natural enclosure.
    Centered,
    /// Variables with a sign-definite partial derivative are pinned to the
    /// extremal face; a fully pinned vertex is evaluated exactly.
    Monotone,
}

/// One node of a cover, in depth-first preorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoverNode {
    /// Bisect `var` at `at`; the lower half's subtree follows, then the
    /// upper half's.
    Split { var: usize, at: f64 },
    /// `constraint` evaluates to `enclosure` on the cell, violating its
    /// relation.
    Leaf { constraint: usize, method: ExclusionMethod, enclosure: Interval },
}

/// Interval forms of every constraint and its partial derivatives.
pub(crate) struct Compiled<'a> {
    pub problem: &'a Problem,
    pub polys: Vec<CompiledPoly>,
    /// `grads[k][v]`, `None` when `v` does not occur in constraint `k`.
    pub grads: Vec<Vec<Option<CompiledPoly>>>,
}

impl<'a> Compiled<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        let q = problem.nvars;
        let polys = problem.constraints.iter().map(|c| CompiledPoly::new(&c.poly)).collect();
        let grads = problem
            .constraints
            .iter()
            .map(|c| {
                (0..q as u32)
                    .map(|v| {
                        let d = c.poly.derivative(v);
                        (c.poly.degree_in(v) > 0).then(|| CompiledPoly::new(&d))
                    })
                    .collect()
            })
            .collect();
        Compiled { problem, polys, grads }
    }

    pub fn natural(&self, k: usize, cell: &[Interval]) -> Interval {
        self.polys[k].eval(cell)
    }

    pub fn centered(&self, k: usize, cell: &[Interval]) -> Interval {
        let mid: Vec<Interval> = cell.iter().map(|iv| Interval::point(iv.mid())).collect();
        // Hansen's form: the partial in v is taken over a box whose later
        // coordinates are still pinned to the midpoint.
        let mut acc = self.polys[k].eval(&mid);
        let mut partial = mid.clone();
        for (v, g) in self.grads[k].iter().enumerate() {
            partial[v] = cell[v];
            if let Some(g) = g {
                acc = acc + g.eval(&partial) * (cell[v] - mid[v]);
            }
        }
        let nat = self.natural(k, cell);
        acc.intersect(&nat).unwrap_or(nat)
    }

    /// Rigorous bound on the maximum (`upper`) or minimum of constraint `k`.
    fn monotone_extreme(&self, k: usize, cell: &[Interval], upper: bool) -> f64 {
        let vars = self.polys[k].vars().to_vec();
        let mut b = cell.to_vec();
        loop {
            let mut changed = false;
            for &v in &vars {
                let v = v as usize;
                if b[v].is_point() {
                    continue;
                }
                let Some(g) = &self.grads[k][v] else { continue };
                let d = g.eval(&b);
                let increasing = if d.lo >= 0.0 {
                    true
                } else if d.hi <= 0.0 {
                    false
                } else {
                    continue;
                };
                let take_hi = increasing == upper;
                b[v] = Interval::point(if take_hi { b[v].hi } else { b[v].lo });
                changed = true;
            }
            if !changed {
                break;
            }
        }
        if vars.iter().all(|&v| b[v as usize].is_point()) {
            let point: Vec<Rational> = b.iter().map(|iv| rational_from_f64(iv.lo)).collect();
            let value = self.problem.constraints[k].poly.evaluate_exact(&point).expect("dimension checked");
            let e = Interval::from_rational(&value);
            return if upper { e.hi } else { e.lo };
        }
        let e = self.centered(k, &b);
        if upper {
            e.hi
        } else {
            e.lo
        }
    }

    pub fn enclosure(&self, k: usize, cell: &[Interval], method: ExclusionMethod) -> Interval {
        match method {
            ExclusionMethod::Natural => self.natural(k, cell),
            ExclusionMethod::Centered => self.centered(k, cell),
            ExclusionMethod::Monotone => {
                let lo = self.monotone_extreme(k, cell, false);
                let hi = self.monotone_extreme(k, cell, true);
                Interval::new(lo.min(hi), hi.max(lo))
            }
        }
    }

    /// First constraint shown violated on the cell, trying cheap methods
    /// first.
    pub fn try_exclude(&self, cell: &[Interval]) -> Option<(usize, ExclusionMethod, Interval)> {
        for method in [ExclusionMethod::Natural, ExclusionMethod::Centered, ExclusionMethod::Monotone] {
            for (k, c) in self.problem.constraints.iter().enumerate() {
                let e = self.enclosure(k, cell, method);
                if c.rel.excluded_by(e) {
                    return Some((k, method, e));
                }
            }
        }
        None
    }

    pub fn eval_f64(&self, k: usize, x: &[f64]) -> f64 {
        self.polys[k].eval_f64(x)
    }

    pub fn scale_f64(&self, k: usize, x: &[f64]) -> f64 {
        1.0 + self.polys[k].eval_abs_f64(x)
    }

    /// Sum of scaled relation violations at a point.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.problem
            .constraints
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let v = self.eval_f64(k, x) / self.scale_f64(k, x);
                match c.rel {
                    Relation::Eq => v.abs(),
                    Relation::Ge | Relation::Gt => (-v).max(0.0),
                }
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
enum Status {
    Pending,
    Split { var: usize, at: f64, children: [usize; 2] },
    Excluded { constraint: usize, method: ExclusionMethod, enclosure: Interval },
    Unresolved,
}

struct Node {
    cell: Vec<Interval>,
    depth: u32,
    status: Status,
}

#[derive(PartialEq)]
struct Queued {
    score: f64,
    id: usize,
}

impl Eq for Queued {}

impl Ord for Queued {
    // BinaryHeap is a max-heap: lower score and then lower id pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.total_cmp(&self.score).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const MAX_NEWTON: u64 = 4000;

fn mids(cell: &[Interval]) -> Vec<f64> {
    cell.iter().map(Interval::mid).collect()
}

/// Exact check at a float point, after a cheap float prefilter.
fn exact_point(comp: &Compiled, x: &[f64]) -> Option<Vec<Rational>> {
    let plausible = comp.problem.constraints.iter().enumerate().all(|(k, c)| {
        let v = comp.eval_f64(k, x);
        let tol = 1e-9 * comp.scale_f64(k, x);
        match c.rel {
            Relation::Eq => v.abs() <= tol,
            Relation::Ge | Relation::Gt => v >= -tol,
        }
    });
    if !plausible {
        return None;
    }
    let candidates = [x.iter().map(|&c| rational_from_f64(c)).collect::<Vec<_>>()].into_iter().chain(snap_point(x));
    candidates.into_iter().find(|p| comp.problem.satisfied_exactly(p))
}

fn inequality_cell_certificate(comp: &Compiled, cell: &[Interval]) -> Option<Vec<(usize, Interval)>> {
    let mut out = Vec::new();
    for (k, c) in comp.problem.constraints.iter().enumerate() {
        let e = comp.centered(k, cell);
        if !c.rel.satisfied_by(e) {
            return None;
        }
        out.push((k, e));
    }
    Some(out)
}

/// Constraints Newton should drive to zero from `x`: all equalities plus
/// weak inequalities that are violated or nearly active.
fn active_set(comp: &Compiled, x: &[f64]) -> Vec<usize> {
    comp.problem
        .constraints
        .iter()
        .enumerate()
        .filter(|(k, c)| match c.rel {
            Relation::Eq => true,
            Relation::Ge => comp.eval_f64(*k, x) < 1e-6 * comp.scale_f64(*k, x),
            Relation::Gt => false,
        })
        .map(|(k, _)| k)
        .collect()
}

fn sat_verdict(witness: Witness, certificate: Certificate, bx: &[Interval], stats: SearchStats) -> Verdict {
    Verdict {
        kind: VerdictKind::SatCertified,
        witness: Some(witness),
        certificate: Some(certificate),
        search_box: bx.to_vec(),
        box_is_global: false,
        reason: None,
        stats,
    }
}

/// The point with the coarsest dyadic grid in the middle half of `iv`, so
/// that splits land on round values such as 0 or 1 whenever possible.
/// Variable with the largest smear `width * max_k |d f_k / d x_v|` among
/// those wider than `floor`; the widest side when every smear vanishes.
fn split_variable(comp: &Compiled, cell: &[Interval], floor: f64) -> (usize, f64) {
    let pick = |score: &dyn Fn(usize) -> f64| {
        (0..cell.len())
            .filter(|&v| cell[v].width() > floor)
            .map(|v| (v, score(v)))
            .fold((usize::MAX, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    };
    let smear = |v: usize| {
        let mag = comp.grads.iter().filter_map(|g| g[v].as_ref()).map(|g| g.eval(cell).mag()).fold(0.0, f64::max);
        let s = mag * cell[v].width();
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    };
    let (mut var, _) = pick(&smear);
    if var == usize::MAX {
        var = pick(&|v| cell[v].width()).0;
    }
    match var {
        usize::MAX => cell.iter().enumerate().map(|(v, iv)| (v, iv.width())).fold((usize::MAX, -1.0), |b, c| {
            if c.1 > b.1 {
                c
            } else {
                b
            }
        }),
        v => (v, cell[v].width()),
    }
}

fn round_split(iv: Interval) -> f64 {
    let w = iv.width();
    let (a, b) = (iv.lo + 0.25 * w, iv.hi - 0.25 * w);
    if !(a < b) {
        return iv.mid();
    }
    if a <= 0.0 && 0.0 <= b {
        return 0.0;
    }
    let mut step = 2f64.powi(a.abs().max(b.abs()).log2().ceil() as i32);
    while step > 0.0 {
        let m = (a / step).ceil() * step;
        if m <= b {
            return m;
        }
        step *= 0.5;
    }
    iv.mid()
}

pub(crate) fn branch_and_prune(problem: &Problem, bx: &[Interval], opts: &SolveOptions) -> Verdict {
    let comp = Compiled::new(problem);
    let has_eq = problem.equalities().next().is_some();
    let scale = bx.iter().map(Interval::mag).fold(1.0, f64::max);
    let floor = opts.min_width * scale;

    let mut stats = SearchStats::default();
    let mut nodes = vec![Node { cell: bx.to_vec(), depth: 0, status: Status::Pending }];
    let mut heap = BinaryHeap::new();
    heap.push(Queued { score: comp.violation(&mids(bx)), id: 0 });
    let mut tried: HashSet<Vec<u64>> = HashSet::new();
    let mut numeric: Option<(Vec<f64>, f64)> = None;
    let mut budget_hit = false;

    while let Some(Queued { id, .. }) = heap.pop() {
        if stats.boxes >= opts.max_boxes {
            budget_hit = true;
            break;
        }
        stats.boxes += 1;
        stats.max_depth = stats.max_depth.max(nodes[id].depth);
        let cell = nodes[id].cell.clone();

        if let Some((constraint, method, enclosure)) = comp.try_exclude(&cell) {
            nodes[id].status = Status::Excluded { constraint, method, enclosure };
            stats.excluded += 1;
            continue;
        }

        if !has_eq {
            if let Some(inequalities) = inequality_cell_certificate(&comp, &cell) {
                return sat_verdict(
                    Witness::Box(cell),
                    Certificate::Enclosure { inequalities, krawczyk: None },
                    bx,
                    stats,
                );
            }
        }

        let mid = mids(&cell);
        if let Some(p) = exact_point(&comp, &mid) {
            return sat_verdict(Witness::Point(p), Certificate::ExactPoint, bx, stats);
        }

        let active = active_set(&comp, &mid);
        if !active.is_empty() && stats.newton_attempts < MAX_NEWTON {
            stats.newton_attempts += 1;
            if let Some((x, residual)) =
                newton(&comp, &active, &mid).filter(|(x, _)| x.iter().zip(bx).all(|(v, iv)| iv.contains(*v)))
            {
                let key: Vec<u64> = x.iter().map(|v| (v * 1e9).round().to_bits()).collect();
                if tried.insert(key) {
                    if let Some(p) = exact_point(&comp, &x) {
                        return sat_verdict(Witness::Point(p), Certificate::ExactPoint, bx, stats);
                    }
                    match certify_candidate(&comp, &x, &active) {
                        Some((w, c)) => return sat_verdict(w, c, bx, stats),
                        None => {
                            let inequalities_hold = problem.constraints.iter().enumerate().all(|(k, c)| match c.rel {
                                Relation::Eq => true,
                                Relation::Ge => comp.eval_f64(k, &x) >= 0.0,
                                Relation::Gt => comp.eval_f64(k, &x) > 0.0,
                            });
                            if inequalities_hold && numeric.as_ref().is_none_or(|(_, r)| residual < *r) {
                                numeric = Some((x, residual));
                            }
                        }
                    }
                }
            }
        }

        let (var, width) = split_variable(&comp, &cell, floor);
        if var == usize::MAX || width <= floor {
            nodes[id].status = Status::Unresolved;
            stats.unresolved += 1;
            continue;
        }
        let at = round_split(cell[var]);
        if at <= cell[var].lo || at >= cell[var].hi {
            nodes[id].status = Status::Unresolved;
            stats.unresolved += 1;
            continue;
        }
        let depth = nodes[id].depth + 1;
        let mut children = [0usize; 2];
        for (slot, half) in [Interval::new(cell[var].lo, at), Interval::new(at, cell[var].hi)].into_iter().enumerate() {
            let mut c = cell.clone();
            c[var] = half;
            let child = nodes.len();
            heap.push(Queued { score: comp.violation(&mids(&c)), id: child });
            nodes.push(Node { cell: c, depth, status: Status::Pending });
            children[slot] = child;
        }
        nodes[id].status = Status::Split { var, at, children };
    }

    let unknown = |reason: String, stats: SearchStats| Verdict {
        kind: VerdictKind::Unknown,
        witness: None,
        certificate: None,
        search_box: bx.to_vec(),
        box_is_global: false,
        reason: Some(reason),
        stats,
    };

    if let Some((x, residual)) = numeric {
        return Verdict {
            kind: VerdictKind::SatNumeric,
            witness: Some(Witness::Point(x.iter().map(|&c| rational_from_f64(c)).collect())),
            certificate: Some(Certificate::Numeric { residual }),
            search_box: bx.to_vec(),
            box_is_global: false,
            reason: Some("Newton converged but the root could not be certified".into()),
            stats,
        };
    }
    if budget_hit {
        return unknown(format!("box budget of {} exhausted", opts.max_boxes), stats);
    }
    if stats.unresolved > 0 {
        return unknown(format!("{} cells below the width floor could not be decided", stats.unresolved), stats);
    }
    Verdict {
        kind: VerdictKind::UnsatInBox,
        witness: None,
        certificate: Some(Certificate::Cover { refuted_by_propagation: None, nodes: flatten(&nodes) }),
        search_box: bx.to_vec(),
        box_is_global: false,
        reason: None,
        stats,
    }
}

fn flatten(nodes: &[Node]) -> Vec<CoverNode> {
    let mut out = Vec::with_capacity(nodes.len());
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        match &nodes[id].status {
            Status::Split { var, at, children } => {
                out.push(CoverNode::Split { var: *var, at: *at });
                stack.push(children[1]);
                stack.push(children[0]);
            }
            Status::Excluded { constraint, method, enclosure } => {
                out.push(CoverNode::Leaf { constraint: *constraint, method: *method, enclosure: *enclosure });
            }
            Status::Pending | Status::Unresolved => unreachable!("cover requested for an undecided cell"),
        }
    }
    out
}
