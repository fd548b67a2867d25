//! Box-relative feasibility of small polynomial systems.
//!
//! [`decide`] runs an interval branch-and-prune search. Cells are excluded
//! when some constraint provably has the wrong sign on them; witnesses are
//! certified either by exact rational evaluation, by interval signs over a
//! cell, or by a Krawczyk contraction for the equalities.

mod certify;
mod oracle;
mod region;
mod replay;
mod roots;
mod search;

pub use certify::{certify_witness, check_regularity, KrawczykRecord};
pub use oracle::{oracle_grid_search, OracleMatch, OracleOptions, OracleWitness};
pub use region::{derive_region, Region};
pub use replay::{replay, ReplayError};
pub use roots::{refine_to_width, univariate_real_roots, RootInterval};
pub use search::{CoverNode, ExclusionMethod};

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{rational_serde, Interval, Polynomial, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn holds(self, value: &Rational) -> bool {
        match self {
            Relation::Eq => value.is_zero(),
            Relation::Ge => !value.is_negative(),
            Relation::Gt => value.is_positive(),
        }
    }

    /// The enclosure proves the relation fails everywhere.
    pub fn excluded_by(self, e: Interval) -> bool {
        match self {
            Relation::Eq => e.lo > 0.0 || e.hi < 0.0,
            Relation::Ge => e.hi < 0.0,
            Relation::Gt => e.hi <= 0.0,
        }
    }

    /// The enclosure proves the inequality holds everywhere. Equalities are
    /// never certified this way.
    pub fn satisfied_by(self, e: Interval) -> bool {
        match self {
            Relation::Eq => false,
            Relation::Ge => e.lo >= 0.0,
            Relation::Gt => e.lo > 0.0,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `poly rel 0` over variables `0..nvars`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub poly: Polynomial,
    pub rel: Relation,
}

impl Constraint {
    pub fn new(poly: Polynomial, rel: Relation) -> Self {
        Constraint { poly, rel }
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        self.poly.evaluate_exact(point).map(|v| self.rel.holds(&v)).unwrap_or(false)
    }
}

/// A fully instantiated system in local variables `0..nvars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub nvars: usize,
    pub constraints: Vec<Constraint>,
}

impl Problem {
    /// Scales every polynomial to its primitive integer form (a positive
    /// multiple, so relations are unchanged).
    pub fn new(nvars: usize, constraints: Vec<Constraint>) -> Result<Self, FeasibilityError> {
        if nvars == 0 && constraints.is_empty() {
            return Err(FeasibilityError::Empty);
        }
        for c in &constraints {
            if let Some(v) = c.poly.max_var() {
                if v as usize >= nvars {
                    return Err(FeasibilityError::VariableOutOfRange { var: v, nvars });
                }
            }
        }
        let constraints = constraints
            .into_iter()
            .map(|c| Constraint::new(c.poly.primitive_part().with_nvars(nvars), c.rel))
            .collect();
        Ok(Problem { nvars, constraints })
    }

    pub fn satisfied_exactly(&self, point: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.holds_at(point))
    }

    pub fn equalities(&self) -> impl Iterator<Item = (usize, &Constraint)> {
        self.constraints.iter().enumerate().filter(|(_, c)| c.rel == Relation::Eq)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeasibilityError {
    #[error("malformed system: no variables and no constraints")]
    Empty,
    #[error("variable {var} out of range for a system in {nvars} variables")]
    VariableOutOfRange { var: u32, nvars: usize },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("box has dimension {got}, system has {expected} variables")]
    BoxDimension { expected: usize, got: usize },
    #[error("search box must be bounded")]
    UnboundedBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegionChoice {
    /// Derive bounds from the constraints, then grow a cube if needed.
    Auto,
    /// The same interval for every variable.
    Uniform(Interval),
    Fixed(Vec<Interval>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Interval,
    /// Exhaustive rational grid; never proves emptiness.
    Oracle {
        steps: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub region: RegionChoice,
    pub max_boxes: u64,
    /// Cells narrower than this (relative to the search box) are not split.
    pub min_width: f64,
    pub growth: Vec<f64>,
    pub backend: Backend,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            region: RegionChoice::Auto,
            max_boxes: 50_000,
            min_width: 1e-9,
            growth: vec![1.0, 4.0, 16.0, 64.0],
            backend: Backend::Interval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    SatCertified,
    SatNumeric,
    UnsatInBox,
    Unknown,
}

impl VerdictKind {
    pub fn is_sat(self) -> bool {
        matches!(self, VerdictKind::SatCertified | VerdictKind::SatNumeric)
    }

    /// Aggregation order: Sat beats Unknown beats UnsatInBox.
    pub fn rank(self) -> u8 {
        match self {
            VerdictKind::SatCertified => 3,
            VerdictKind::SatNumeric => 2,
            VerdictKind::Unknown => 1,
            VerdictKind::UnsatInBox => 0,
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictKind::SatCertified => "SatCertified",
            VerdictKind::SatNumeric => "SatNumeric",
            VerdictKind::UnsatInBox => "UnsatInBox",
            VerdictKind::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    Point(#[serde(with = "rational_serde::vec")] Vec<Rational>),
    Box(Vec<Interval>),
}

impl Witness {
    pub fn len(&self) -> usize {
        match self {
            Witness::Point(p) => p.len(),
            Witness::Box(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A float representative of each coordinate.
    pub fn approx(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        match self {
            Witness::Point(p) => p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
            Witness::Box(b) => b.iter().map(Interval::mid).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Certificate {
    /// Every constraint holds exactly at the rational witness point.
    ExactPoint,
    /// Interval signs over the witness box, plus a Krawczyk contraction when
    /// equalities are present.
    Enclosure { inequalities: Vec<(usize, Interval)>, krawczyk: Option<KrawczykRecord> },
    /// A cover of the search box by excluded cells, flattened in preorder.
    Cover { refuted_by_propagation: Option<usize>, nodes: Vec<CoverNode> },
    /// Newton converged but certification failed.
    Numeric { residual: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub boxes: u64,
    pub max_depth: u32,
    pub excluded: u64,
    pub unresolved: u64,
    pub newton_attempts: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: &SearchStats) {
        self.boxes += other.boxes;
        self.max_depth = self.max_depth.max(other.max_depth);
        self.excluded += other.excluded;
        self.unresolved += other.unresolved;
        self.newton_attempts += other.newton_attempts;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
    pub search_box: Vec<Interval>,
    /// The search box contains every real solution, so `UnsatInBox` proves
    /// global emptiness.
    pub box_is_global: bool,
    pub reason: Option<String>,
    pub stats: SearchStats,
}

impl Verdict {
    fn unknown(search_box: Vec<Interval>, reason: String, stats: SearchStats) -> Self {
        Verdict {
            kind: VerdictKind::Unknown,
            witness: None,
            certificate: None,
            search_box,
            box_is_global: false,
            reason: Some(reason),
            stats,
        }
    }
}

/// Decides feasibility of `problem` within the configured region.
pub fn decide(problem: &Problem, opts: &SolveOptions) -> Result<Verdict, FeasibilityError> {
    let q = problem.nvars;
    let boxes: Vec<(Vec<Interval>, bool, Option<usize>)> = match &opts.region {
        RegionChoice::Fixed(b) => {
            if b.len() != q {
                return Err(FeasibilityError::BoxDimension { expected: q, got: b.len() });
            }
            vec![(b.clone(), false, None)]
        }
        RegionChoice::Uniform(iv) => vec![(vec![*iv; q], false, None)],
        RegionChoice::Auto => match derive_region(problem) {
            Region::Empty { constraint } => vec![(Vec::new(), true, Some(constraint))],
            Region::Bounded(b) => vec![(b, true, None)],
            Region::Partial(b) => opts
                .growth
                .iter()
                .map(|&h| {
                    let cube = Interval::new(-h, h);
                    let bx = b.iter().map(|iv| iv.intersect(&cube).unwrap_or(*iv)).collect();
                    (bx, false, None)
                })
                .collect(),
        },
    };

    let mut total = SearchStats::default();
    let mut last = None;
    for (bx, global, refuted) in boxes {
        if let Some(constraint) = refuted {
            return Ok(Verdict {
                kind: VerdictKind::UnsatInBox,
                witness: None,
                certificate: Some(Certificate::Cover { refuted_by_propagation: Some(constraint), nodes: Vec::new() }),
                search_box: bx,
                box_is_global: true,
                reason: Some(format!("constraint {} has no real solution within the propagated bounds", constraint)),
                stats: total,
            });
        }
        if bx.iter().any(|iv| !iv.is_bounded()) {
            return Err(FeasibilityError::UnboundedBox);
        }
        let mut v = match opts.backend {
            Backend::Interval => search::branch_and_prune(problem, &bx, opts),
            Backend::Oracle { steps } => oracle_verdict(problem, &bx, steps),
        };
        v.box_is_global = global && v.kind == VerdictKind::UnsatInBox;
        total.absorb(&v.stats);
        v.stats = total.clone();
        if v.kind.is_sat() {
            return Ok(v);
        }
        last = Some(v);
    }
    Ok(last.unwrap_or_else(|| Verdict::unknown(Vec::new(), "no search region".into(), total)))
}

fn oracle_verdict(problem: &Problem, bx: &[Interval], steps: u32) -> Verdict {
    let opts = OracleOptions { steps, slack: None, strict_only: false, symmetric: false };
    match oracle_grid_search(problem, bx, &opts) {
        Some(w) => Verdict {
            kind: VerdictKind::SatCertified,
            witness: Some(Witness::Point(w.point)),
            certificate: Some(Certificate::ExactPoint),
            search_box: bx.to_vec(),
            box_is_global: false,
            reason: None,
            stats: SearchStats::default(),
        },
        None => Verdict::unknown(bx.to_vec(), "grid oracle found no point".into(), SearchStats::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;

    fn a(i: u32) -> Polynomial {
        Polynomial::var(i)
    }

    fn fixed(lo: f64, hi: f64, q: usize) -> SolveOptions {
        SolveOptions { region: RegionChoice::Fixed(vec![Interval::new(lo, hi); q]), ..SolveOptions::default() }
    }

    #[test]
    fn sum_of_squares_plus_one() {
        let p = Problem::new(1, vec![Constraint::new(&a(0).pow(2) + &Polynomial::one(), Relation::Eq)]).unwrap();
        let v = decide(&p, &fixed(-10.0, 10.0, 1)).unwrap();
        assert_eq!(v.kind, VerdictKind::UnsatInBox);
        replay(&p, &v).unwrap();
        let v = decide(&p, &SolveOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::UnsatInBox);
        assert!(v.box_is_global);
    }

    /// Newton slides down the valley of `(3a - 4b)^2 + 1` towards infinity
    /// where the relative residual vanishes; such points leave the box.
    #[test]
    fn valley_without_zero() {
        let l = &(&a(0) * &Polynomial::from_int(3)) - &(&a(1) * &Polynomial::from_int(4));
        let p = Problem::new(2, vec![Constraint::new(&l.pow(2) + &Polynomial::one(), Relation::Eq)]).unwrap();
        let v = decide(&p, &SolveOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::UnsatInBox);
        replay(&p, &v).unwrap();
    }

    #[test]
    fn square_root_of_two() {
        let p = Problem::new(
            1,
            vec![
                Constraint::new(&a(0).pow(2) - &Polynomial::from_int(2), Relation::Eq),
                Constraint::new(a(0), Relation::Ge),
            ],
        )
        .unwrap();
        let v = decide(&p, &fixed(0.0, 2.0, 1)).unwrap();
        assert_eq!(v.kind, VerdictKind::SatCertified);
        let w = v.witness.clone().unwrap().approx();
        assert!((w[0] - std::f64::consts::SQRT_2).abs() < 1e-7);
        replay(&p, &v).unwrap();
    }

    #[test]
    fn contradictory_strict_signs() {
        let p =
            Problem::new(1, vec![Constraint::new(a(0), Relation::Gt), Constraint::new(-&a(0), Relation::Gt)]).unwrap();
        for (lo, hi) in [(-1.0, 1.0), (-100.0, 3.0)] {
            let v = decide(&p, &fixed(lo, hi, 1)).unwrap();
            assert_eq!(v.kind, VerdictKind::UnsatInBox, "{v:#?}");
            replay(&p, &v).unwrap();
        }
    }

    #[test]
    fn touching_weak_inequalities() {
        // a^2 - 2 >= 0 and 2 - a^2 >= 0 only at a = ±sqrt(2)
        let f = &a(0).pow(2) - &Polynomial::from_int(2);
        let p = Problem::new(1, vec![Constraint::new(f.clone(), Relation::Ge), Constraint::new(-&f, Relation::Ge)])
            .unwrap();
        let v = decide(&p, &fixed(-4.0, 4.0, 1)).unwrap();
        assert_eq!(v.kind, VerdictKind::SatCertified, "{v:#?}");
        replay(&p, &v).unwrap();
    }

    #[test]
    fn malformed() {
        assert_eq!(Problem::new(0, vec![]), Err(FeasibilityError::Empty));
    }

    #[test]
    fn constant_problems() {
        let p = Problem::new(0, vec![Constraint::new(Polynomial::from_int(1), Relation::Gt)]).unwrap();
        assert_eq!(decide(&p, &SolveOptions::default()).unwrap().kind, VerdictKind::SatCertified);
        let p = Problem::new(0, vec![Constraint::new(Polynomial::constant(int(0)), Relation::Gt)]).unwrap();
        let v = decide(&p, &SolveOptions::default()).unwrap();
        assert_eq!(v.kind, VerdictKind::UnsatInBox);
        replay(&p, &v).unwrap();
    }

    #[test]
    fn circle_in_plane() {
        let f = &(&a(0).pow(2) + &a(1).pow(2)) - &Polynomial::one();
        let p = Problem::new(2, vec![Constraint::new(f, Relation::Eq), Constraint::new(&a(0) - &a(1), Relation::Gt)])
            .unwrap();
        let v = decide(&p, &SolveOptions::default()).unwrap();
        assert!(v.kind.is_sat());
        replay(&p, &v).unwrap();
    }
}
