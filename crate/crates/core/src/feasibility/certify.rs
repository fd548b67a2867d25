//! Newton refinement and witness certification.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::search::Compiled;
use super::{Certificate, Problem, Relation, Witness};
use crate::poly::{next_down, next_up, Interval, Polynomial, Rational};

/// Data needed to recompute a Krawczyk contraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrawczykRecord {
    /// Constraints forming the square system.
    pub equations: Vec<usize>,
    /// Variables it is solved for; all others are pinned to `base`.
    pub vars: Vec<usize>,
    pub base: Vec<f64>,
    pub center: Vec<f64>,
    pub input: Vec<Interval>,
    pub preconditioner: Vec<Vec<f64>>,
    pub output: Vec<Interval>,
    /// Constraints equal to `±` one of `equations`, hence zero at the root.
    pub implied: Vec<usize>,
}

fn jacobian_f64(comp: &Compiled, rows: &[usize], x: &[f64]) -> DMatrix<f64> {
    let q = comp.problem.nvars;
    DMatrix::from_fn(rows.len(), q, |r, c| comp.grads[rows[r]][c].as_ref().map_or(0.0, |g| g.eval_f64(x)))
}

/// Gauss-Newton with SVD steps on the constraints `rows`, from `start`.
/// Returns the point and its largest scaled residual when it converges.
pub(crate) fn newton(comp: &Compiled, rows: &[usize], start: &[f64]) -> Option<(Vec<f64>, f64)> {
    let q = comp.problem.nvars;
    if q == 0 || rows.is_empty() {
        return None;
    }
    let mut x = start.to_vec();
    for _ in 0..60 {
        let f = DVector::from_iterator(rows.len(), rows.iter().map(|&k| comp.eval_f64(k, &x)));
        let j = jacobian_f64(comp, rows, &x);
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        if !smax.is_finite() || smax == 0.0 {
            return None;
        }
        let step = svd.solve(&f, 1e-12 * smax).ok()?;
        for v in 0..q {
            x[v] -= step[v];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
        let xnorm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step.amax() <= 1e-15 * (1.0 + xnorm) {
            break;
        }
    }
    let residual = rows.iter().map(|&k| comp.eval_f64(k, &x).abs() / comp.scale_f64(k, &x)).fold(0.0, f64::max);
    (residual <= 1e-10).then_some((x, residual))
}

/// Best rational approximation with a small denominator, if one lies
/// within float noise of `x`.
fn snap(x: f64) -> Option<Rational> {
    let tol = 1e-11 * (1.0 + x.abs());
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h = ai * h1 + h0;
        let k = ai * k1 + k0;
        (h0, h1, k0, k1) = (h1, h, k1, k);
        if k > 100_000 {
            return None;
        }
        if ((h as f64) / (k as f64) - x).abs() <= tol {
            return Some(Rational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

pub(crate) fn snap_point(x: &[f64]) -> Option<Vec<Rational>> {
    x.iter().map(|&v| snap(v)).collect()
}

/// Pivot rows and columns of a full-rank square submatrix, chosen by
/// complete pivoting.
fn select_square(j: &DMatrix<f64>) -> (Vec<usize>, Vec<usize>) {
    let mut a = j.clone();
    let (m, q) = a.shape();
    let scale = a.amax();
    let mut rows_left: Vec<usize> = (0..m).collect();
    let mut cols_left: Vec<usize> = (0..q).collect();
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    while !rows_left.is_empty() && !cols_left.is_empty() {
        let mut best = (0, 0, 0.0f64);
        for &r in &rows_left {
            for &c in &cols_left {
                if a[(r, c)].abs() > best.2 {
                    best = (r, c, a[(r, c)].abs());
                }
            }
        }
        if best.2 <= 1e-9 * scale.max(1e-300) {
            break;
        }
        let (pr, pc, _) = best;
        for &r in &rows_left {
            if r == pr {
                continue;
            }
            let f = a[(r, pc)] / a[(pr, pc)];
            for c in 0..q {
                a[(r, c)] -= f * a[(pr, c)];
            }
        }
        rows.push(pr);
        cols.push(pc);
        rows_left.retain(|&r| r != pr);
        cols_left.retain(|&c| c != pc);
    }
    (rows, cols)
}

/// `K(X) = c - Y F(c) + (I - Y J(X)) (X - c)` for the square system.
pub(crate) fn krawczyk_operator(
    comp: &Compiled,
    equations: &[usize],
    vars: &[usize],
    base: &[f64],
    center: &[f64],
    input: &[Interval],
    y: &[Vec<f64>],
) -> Vec<Interval> {
    let m = equations.len();
    let mut pbox: Vec<Interval> = base.iter().map(|&v| Interval::point(v)).collect();
    for (i, &v) in vars.iter().enumerate() {
        pbox[v] = Interval::point(center[i]);
    }
    let fc: Vec<Interval> = equations.iter().map(|&k| comp.polys[k].eval(&pbox)).collect();
    let mut xbox = pbox;
    for (i, &v) in vars.iter().enumerate() {
        xbox[v] = input[i];
    }
    let jx: Vec<Vec<Interval>> = equations
        .iter()
        .map(|&k| vars.iter().map(|&v| comp.grads[k][v].as_ref().map_or(Interval::zero(), |g| g.eval(&xbox))).collect())
        .collect();
    (0..m)
        .map(|i| {
            let mut acc = Interval::point(center[i]);
            for r in 0..m {
                acc = acc - Interval::point(y[i][r]) * fc[r];
            }
            for c in 0..m {
                let mut coef = Interval::point(if i == c { 1.0 } else { 0.0 });
                for r in 0..m {
                    coef = coef - Interval::point(y[i][r]) * jx[r][c];
                }
                acc = acc + coef * (input[c] - Interval::point(center[c]));
            }
            acc
        })
        .collect()
}

fn is_plus_minus(a: &Polynomial, b: &Polynomial) -> bool {
    a == b || a == &(-b)
}

/// Certifies a Newton candidate: a square subsystem of `active` is proved
/// to have a root near `x` by a Krawczyk contraction, the remaining active
/// constraints coincide with it up to sign, and every other inequality has
/// the right sign on the resulting box.
pub(crate) fn certify_candidate(comp: &Compiled, x: &[f64], active: &[usize]) -> Option<(Witness, Certificate)> {
    let problem = comp.problem;
    let j = jacobian_f64(comp, active, x);
    let (sel_rows, sel_cols) = select_square(&j);
    if sel_rows.is_empty() {
        return None;
    }
    let equations: Vec<usize> = sel_rows.iter().map(|&r| active[r]).collect();
    let mut implied = Vec::new();
    for (k, c) in problem.constraints.iter().enumerate() {
        if equations.contains(&k) {
            continue;
        }
        let ok =
            c.rel != Relation::Gt && equations.iter().any(|&e| is_plus_minus(&c.poly, &problem.constraints[e].poly));
        if ok {
            implied.push(k);
        } else if active.contains(&k) {
            return None;
        }
    }
    let vars = sel_cols;
    let m = equations.len();
    let jm = DMatrix::from_fn(m, m, |r, c| j[(sel_rows[r], vars[c])]);
    let inv = jm.try_inverse()?;
    let y: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|r| inv[(i, r)]).collect()).collect();
    if !y.iter().flatten().all(|v| v.is_finite()) {
        return None;
    }
    let center: Vec<f64> = vars.iter().map(|&v| x[v]).collect();
    let scale = 1.0 + center.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    for factor in [1e-12, 1e-10, 1e-8, 1e-6, 1e-4] {
        let rad = factor * scale;
        let input: Vec<Interval> =
            center.iter().map(|&c| Interval::new(next_down(c - rad), next_up(c + rad))).collect();
        let output = krawczyk_operator(comp, &equations, &vars, x, &center, &input, &y);
        if !output.iter().zip(&input).all(|(o, i)| o.is_interior_of(i)) {
            continue;
        }
        let mut wbox: Vec<Interval> = x.iter().map(|&v| Interval::point(v)).collect();
        for (i, &v) in vars.iter().enumerate() {
            wbox[v] = output[i];
        }
        let mut inequalities = Vec::new();
        for (k, c) in problem.constraints.iter().enumerate() {
            if equations.contains(&k) || implied.contains(&k) {
                continue;
            }
            let e = comp.centered(k, &wbox);
            if !c.rel.satisfied_by(e) {
                return None;
            }
            inequalities.push((k, e));
        }
        let record =
            KrawczykRecord { equations, vars, base: x.to_vec(), center, input, preconditioner: y, output, implied };
        return Some((Witness::Box(wbox), Certificate::Enclosure { inequalities, krawczyk: Some(record) }));
    }
    None
}

/// Tries to certify that a solution lies in (or near) the candidate box:
/// exact evaluation at a rational point, interval signs over the box for
/// inequality-only systems, or a Krawczyk contraction around the center.
pub fn certify_witness(problem: &Problem, candidate: &[Interval]) -> Result<(Witness, Certificate), String> {
    if candidate.len() != problem.nvars {
        return Err(format!("candidate has dimension {}, system has {}", candidate.len(), problem.nvars));
    }
    let comp = Compiled::new(problem);
    let center: Vec<f64> = candidate.iter().map(Interval::mid).collect();
    let exact_candidates = [center.iter().map(|&c| crate::poly::rational_from_f64(c)).collect::<Vec<_>>()]
        .into_iter()
        .chain(snap_point(&center));
    for p in exact_candidates {
        if problem.satisfied_exactly(&p) {
            return Ok((Witness::Point(p), Certificate::ExactPoint));
        }
    }
    let has_eq = problem.equalities().next().is_some();
    if !has_eq {
        let mut inequalities = Vec::new();
        for (k, c) in problem.constraints.iter().enumerate() {
            let e = comp.centered(k, candidate);
            if !c.rel.satisfied_by(e) {
                return Err(format!("constraint {k} does not have the required sign on the candidate box"));
            }
            inequalities.push((k, e));
        }
        return Ok((Witness::Box(candidate.to_vec()), Certificate::Enclosure { inequalities, krawczyk: None }));
    }
    let active: Vec<usize> = problem
        .constraints
        .iter()
        .enumerate()
        .filter(|(k, c)| {
            c.rel == Relation::Eq
                || (c.rel == Relation::Ge && comp.eval_f64(*k, &center).abs() <= 1e-8 * comp.scale_f64(*k, &center))
        })
        .map(|(k, _)| k)
        .collect();
    certify_candidate(&comp, &center, &active).ok_or_else(|| "Krawczyk contraction failed".to_string())
}

/// Whether the Jacobian of `h` at `point` has full rank, judged by its
/// smallest singular value exceeding `tol`.
pub fn check_regularity(h: &[Polynomial], point: &[f64], tol: f64) -> bool {
    let q = point.len();
    if h.is_empty() || q == 0 {
        return true;
    }
    let j = DMatrix::from_fn(h.len(), q, |r, c| h[r].derivative(c as u32).evaluate_f64(point));
    let svd = j.svd(false, false);
    let rank_needed = h.len().min(q);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.len() >= rank_needed && s[rank_needed - 1] > tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{replay, Constraint, Problem, SearchStats, Verdict, VerdictKind};

    fn a(i: u32) -> Polynomial {
        Polynomial::var(i)
    }

    fn as_verdict(w: Witness, c: Certificate) -> Verdict {
        Verdict {
            kind: VerdictKind::SatCertified,
            witness: Some(w),
            certificate: Some(c),
            search_box: Vec::new(),
            box_is_global: false,
            reason: None,
            stats: SearchStats::default(),
        }
    }

    #[test]
    fn inequality_only_box() {
        let p = Problem::new(1, vec![Constraint::new(a(0), Relation::Gt)]).unwrap();
        let (w, c) = certify_witness(&p, &[Interval::new(0.25, 0.75)]).unwrap();
        assert!(matches!(w, Witness::Point(_)));
        replay(&p, &as_verdict(w, c)).unwrap();
        let (w, c) = certify_witness(&p, &[Interval::new(0.1, 0.3)]).unwrap();
        replay(&p, &as_verdict(w, c)).unwrap();
    }

    #[test]
    fn krawczyk_near_sqrt_two() {
        let p = Problem::new(1, vec![Constraint::new(&a(0).pow(2) - &Polynomial::from_int(2), Relation::Eq)]).unwrap();
        let (w, c) = certify_witness(&p, &[Interval::new(1.4132, 1.4152)]).unwrap();
        let Certificate::Enclosure { krawczyk: Some(_), .. } = &c else { panic!("expected Krawczyk") };
        replay(&p, &as_verdict(w, c)).unwrap();
    }

    #[test]
    fn double_root_falls_back_to_exact() {
        let p = Problem::new(1, vec![Constraint::new(a(0).pow(2), Relation::Eq)]).unwrap();
        let (w, c) = certify_witness(&p, &[Interval::new(-1e-3, 1e-3)]).unwrap();
        assert_eq!(c, Certificate::ExactPoint);
        assert_eq!(w, Witness::Point(vec![crate::poly::int(0)]));
    }

    #[test]
    fn regularity() {
        assert!(check_regularity(&[&a(0).pow(2) - &Polynomial::from_int(2)], &[1.414], 1e-8));
        assert!(!check_regularity(&[a(0).pow(2)], &[0.0], 1e-8));
        assert!(check_regularity(&[&a(0) + &a(1), &a(0) - &a(1)], &[0.0, 0.0], 1e-8));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(0.5), Some(crate::poly::rat(1, 2)));
        assert_eq!(snap(1.0 / 3.0), Some(crate::poly::rat(1, 3)));
        assert_eq!(snap(1e-17), Some(crate::poly::int(0)));
        assert_eq!(snap(std::f64::consts::SQRT_2), None);
    }
}
