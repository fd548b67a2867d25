//! Bounds implied by the constraints themselves.

use super::roots::feasible_hull;
use super::{Problem, Relation};
use crate::poly::{Interval, Rational};

/// Result of constraint propagation over all of `R^q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Every solution lies in this bounded box.
    Bounded(Vec<Interval>),
    /// Some variables stay unbounded; bounded ones are valid globally.
    Partial(Vec<Interval>),
    /// The named constraint cannot hold anywhere.
    Empty { constraint: usize },
}

fn lower_f64(r: &Rational) -> f64 {
    Interval::from_rational(r).lo
}

fn upper_f64(r: &Rational) -> f64 {
    Interval::from_rational(r).hi
}

/// Bounds on `v` from `v^e ∈ w`.
fn power_preimage(w: Interval, e: u32) -> Option<Interval> {
    if e.is_multiple_of(2) {
        if w.hi < 0.0 {
            return None;
        }
        if w.hi.is_finite() {
            let b = Interval::root_upper(w.hi, e);
            return Some(Interval::new(-b, b));
        }
        return Some(Interval::entire());
    }
    let hi = if !w.hi.is_finite() {
        f64::INFINITY
    } else if w.hi >= 0.0 {
        Interval::root_upper(w.hi, e)
    } else {
        0.0
    };
    let lo = if !w.lo.is_finite() {
        f64::NEG_INFINITY
    } else if w.lo <= 0.0 {
        -Interval::root_upper(-w.lo, e)
    } else {
        0.0
    };
    Some(Interval::new(lo, hi))
}

fn narrowed(old: Interval, new: Interval) -> bool {
    if old.is_bounded() != new.is_bounded() || old.lo.is_finite() != new.lo.is_finite() {
        return true;
    }
    let shrink = (new.lo - old.lo).max(old.hi - new.hi);
    shrink > 1e-9 * old.width().max(1.0)
}

/// Exact bounds from univariate constraints, then term-wise propagation for
/// the rest: for a term `c v^e`, the other terms' enclosure bounds `c v^e`.
pub fn derive_region(problem: &Problem) -> Region {
    let q = problem.nvars;
    let mut dom = vec![Interval::entire(); q];

    for (k, c) in problem.constraints.iter().enumerate() {
        let vars = c.poly.vars();
        if vars.is_empty() {
            if !c.rel.holds(&c.poly.constant_term()) {
                return Region::Empty { constraint: k };
            }
            continue;
        }
        if vars.len() != 1 {
            continue;
        }
        let v = vars[0] as usize;
        let coeffs = c.poly.univariate_coeffs(vars[0]).expect("univariate");
        let Some((lo, hi)) = feasible_hull(&coeffs, c.rel) else {
            return Region::Empty { constraint: k };
        };
        let hull = Interval::new(
            lo.as_ref().map_or(f64::NEG_INFINITY, lower_f64),
            hi.as_ref().map_or(f64::INFINITY, upper_f64),
        );
        match dom[v].intersect(&hull) {
            Some(iv) => dom[v] = iv,
            None => return Region::Empty { constraint: k },
        }
    }

    let terms: Vec<Vec<(Interval, Vec<(u32, u32)>)>> = problem
        .constraints
        .iter()
        .map(|c| c.poly.terms().map(|(m, coef)| (Interval::from_rational(coef), m.pairs().to_vec())).collect())
        .collect();
    for _round in 0..32 {
        let mut changed = false;
        for (k, c) in problem.constraints.iter().enumerate() {
            let encl: Vec<Interval> = terms[k]
                .iter()
                .map(|(coef, pairs)| pairs.iter().fold(*coef, |acc, &(v, e)| acc * dom[v as usize].powi(e)))
                .collect();
            for (t, (coef, pairs)) in terms[k].iter().enumerate() {
                if pairs.len() != 1 {
                    continue;
                }
                let (v, e) = pairs[0];
                let rest =
                    encl.iter().enumerate().filter(|&(u, _)| u != t).fold(Interval::zero(), |acc, (_, iv)| acc + *iv);
                let target = match c.rel {
                    Relation::Eq => -rest,
                    Relation::Ge | Relation::Gt => Interval::new(-rest.hi, f64::INFINITY),
                };
                let Some(w) = target.div(coef) else { continue };
                let Some(pre) = power_preimage(w, e) else {
                    return Region::Empty { constraint: k };
                };
                let old = dom[v as usize];
                match old.intersect(&pre) {
                    Some(iv) => {
                        if narrowed(old, iv) {
                            changed = true;
                        }
                        dom[v as usize] = iv;
                    }
                    None => return Region::Empty { constraint: k },
                }
            }
        }
        if !changed {
            break;
        }
    }

    if dom.iter().all(Interval::is_bounded) {
        Region::Bounded(dom)
    } else {
        Region::Partial(dom)
    }
}
