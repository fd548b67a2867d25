//! Exhaustive grid search used as an independent test oracle.

use num_traits::{Signed, ToPrimitive, Zero};

use super::{Problem, Relation};
use crate::poly::{rational_from_f64, Interval, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Grid points per axis, at least 2.
    pub steps: u32,
    /// Accept `|f| <= slack` for equalities.
    pub slack: Option<f64>,
    /// Require every inequality to hold strictly.
    pub strict_only: bool,
    /// Scan only nondecreasing coordinate tuples. Sound for systems that are
    /// invariant under permuting all variables.
    pub symmetric: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { steps: 9, slack: None, strict_only: false, symmetric: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMatch {
    /// Every constraint holds exactly.
    Exact,
    /// Some equality holds only within the slack.
    Slack,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleWitness {
    pub point: Vec<Rational>,
    pub matched: OracleMatch,
}

fn grid(iv: Interval, steps: u32) -> Vec<Rational> {
    let lo = rational_from_f64(iv.lo);
    let hi = rational_from_f64(iv.hi);
    let den = Rational::from_integer((steps - 1).into());
    (0..steps).map(|i| &lo + (&hi - &lo) * Rational::from_integer(i.into()) / &den).collect()
}

fn check(problem: &Problem, point: &[Rational], opts: &OracleOptions) -> Option<OracleMatch> {
    let approx: Vec<f64> = point.iter().map(|c| c.to_f64().unwrap_or(0.0)).collect();
    let slack = opts.slack.unwrap_or(0.0);
    for c in &problem.constraints {
        let v = c.poly.evaluate_f64(&approx);
        let tol = 1e-9 * (1.0 + v.abs());
        let hopeless = match c.rel {
            Relation::Eq => v.abs() > slack + tol,
            Relation::Ge | Relation::Gt => v < -tol,
        };
        if hopeless {
            return None;
        }
    }
    let slack_q = rational_from_f64(slack);
    let mut matched = OracleMatch::Exact;
    for c in &problem.constraints {
        let v = c.poly.evaluate_exact(point).ok()?;
        let ok = match c.rel {
            Relation::Eq => {
                if !v.is_zero() {
                    matched = OracleMatch::Slack;
                }
                v.abs() <= slack_q
            }
            Relation::Ge if !opts.strict_only => !v.is_negative(),
            Relation::Ge | Relation::Gt => v.is_positive(),
        };
        if !ok {
            return None;
        }
    }
    Some(matched)
}

/// First grid point (in lexicographic index order) satisfying the system.
pub fn oracle_grid_search(problem: &Problem, bx: &[Interval], opts: &OracleOptions) -> Option<OracleWitness> {
    assert!(opts.steps >= 2, "grid needs at least two points per axis");
    let q = problem.nvars;
    let axes: Vec<Vec<Rational>> = bx.iter().map(|&iv| grid(iv, opts.steps)).collect();
    let steps = opts.steps as usize;
    let mut idx = vec![0usize; q];
    loop {
        let point: Vec<Rational> = idx.iter().enumerate().map(|(v, &i)| axes[v][i].clone()).collect();
        if let Some(matched) = check(problem, &point, opts) {
            return Some(OracleWitness { point, matched });
        }
        // advance the odometer, rightmost digit fastest
        let mut pos = q;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if idx[pos] + 1 < steps {
                idx[pos] += 1;
                if opts.symmetric {
                    for later in pos + 1..q {
                        idx[later] = idx[pos];
                    }
                } else {
                    for later in idx.iter_mut().skip(pos + 1) {
                        *later = 0;
                    }
                }
                break;
            }
        }
    }
}
