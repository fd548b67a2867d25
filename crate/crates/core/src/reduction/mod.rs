//! Partition-based reduction of symmetric systems.
//!
//! A system with invariant equalities of degree at most `d` and an
//! equivariant inequality family is feasible iff it has a solution with at
//! most `2d - 1` distinct coordinates. Each partition of `n` into at most
//! that many blocks gives a small system in one variable per block.

mod reduce;
mod solve;

pub use reduce::{expand_witness, reduce_system, ReducedSystem};
pub use solve::{qe_decompose, solve_decomposed, solve_full, FullVerdict, PartitionOutcome, DEGRADED_NOTE};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feasibility::{Constraint, FeasibilityError, Problem, Relation};
use crate::partition::Partition;
use crate::poly::{Polynomial, Rational, VarLayout};
use crate::symmetry::{invariance_violation, EquivariantFamily, SymmetryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("system needs at least one variable")]
    NoVariables,
    #[error("{what}: {source}")]
    Symmetry { what: String, source: SymmetryError },
    #[error("{what} uses relation {rel} 0; expected >= or >")]
    Relation { what: String, rel: Relation },
    #[error("{what} uses variable index {var} outside x1..x{n} and the declared parameters")]
    Variable { what: String, var: u32, n: usize },
    #[error("equivariant family has {got} components, system has n = {n}")]
    FamilySize { n: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("system has {t} parameters; instantiate them or use the parametric decomposition")]
    HasParameters { t: usize },
    #[error("system has no parameters; use solve_full")]
    NoParameters,
    #[error("theorem hypotheses not met in parametric mode: {0}")]
    Hypotheses(String),
    #[error("expected {expected} parameter values, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("witness has {got} coordinates, partition has {expected} blocks")]
    WitnessLength { expected: usize, got: usize },
    #[error("box has dimension {got}, system has n = {expected}")]
    BoxDimension { expected: usize, got: usize },
    #[error(transparent)]
    Problem(FeasibilityError),
    #[error("partition {partition}: {source}")]
    Backend { partition: Partition, source: FeasibilityError },
}

/// A validated system `F = 0`, `G >= 0` (or `> 0`) with optional extra
/// symmetric inequalities and general constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    n: usize,
    t: usize,
    equalities: Vec<Polynomial>,
    symmetric: Vec<(Polynomial, Relation)>,
    family: Option<(EquivariantFamily, Relation)>,
    general: Vec<(Polynomial, Relation)>,
    d: u32,
    source: String,
}

#[derive(Debug, Clone)]
pub struct SpecBuilder {
    n: usize,
    t: usize,
    equalities: Vec<Polynomial>,
    symmetric: Vec<(Polynomial, Relation)>,
    family: Option<(EquivariantFamily, Relation)>,
    general: Vec<(Polynomial, Relation)>,
    source: String,
}

impl SpecBuilder {
    pub fn source(mut self, name: impl Into<String>) -> Self {
        self.source = name.into();
        self
    }

    /// Invariant equality `f = 0`.
    pub fn equality(mut self, f: Polynomial) -> Self {
        self.equalities.push(f);
        self
    }

    /// Invariant inequality `f >= 0` or `f > 0`.
    pub fn symmetric(mut self, f: Polynomial, rel: Relation) -> Self {
        self.symmetric.push((f, rel));
        self
    }

    pub fn family(mut self, g: EquivariantFamily, rel: Relation) -> Self {
        self.family = Some((g, rel));
        self
    }

    /// Constraint with no symmetry requirement.
    pub fn general(mut self, f: Polynomial, rel: Relation) -> Self {
        self.general.push((f, rel));
        self
    }

    pub fn build(self) -> Result<SystemSpec, SpecError> {
        let SpecBuilder { n, t, equalities, symmetric, family, general, source } = self;
        if n == 0 {
            return Err(SpecError::NoVariables);
        }
        let layout = VarLayout::new(n, t);
        let allowed = |v: u32| layout.is_x(v) || (layout.is_y(v) && (v as usize) < layout.width());
        let check_vars = |what: String, p: &Polynomial| match p.vars().into_iter().find(|&v| !allowed(v)) {
            Some(var) => Err(SpecError::Variable { what, var, n }),
            None => Ok(()),
        };
        let check_invariant = |what: String, p: &Polynomial| match invariance_violation(p, n) {
            Some(s) => Err(SpecError::Symmetry {
                what,
                source: SymmetryError::NotInvariant { n, generator: s.cycle_notation() },
            }),
            None => Ok(()),
        };
        let check_rel = |what: String, rel: Relation| match rel {
            Relation::Eq => Err(SpecError::Relation { what, rel }),
            _ => Ok(()),
        };
        for (i, f) in equalities.iter().enumerate() {
            check_vars(format!("equality {}", i + 1), f)?;
            check_invariant(format!("equality {}", i + 1), f)?;
        }
        for (i, (f, rel)) in symmetric.iter().enumerate() {
            let what = format!("symmetric inequality {}", i + 1);
            check_vars(what.clone(), f)?;
            check_invariant(what.clone(), f)?;
            check_rel(what, *rel)?;
        }
        if let Some((g, rel)) = &family {
            if g.n() != n {
                return Err(SpecError::FamilySize { n, got: g.n() });
            }
            for (i, c) in g.components().iter().enumerate() {
                check_vars(format!("family component {}", i + 1), c)?;
            }
            check_rel("equivariant family".into(), *rel)?;
        }
        for (i, (f, _)) in general.iter().enumerate() {
            check_vars(format!("constraint {}", i + 1), f)?;
        }
        let is_x = |v: u32| (v as usize) < n;
        let d = equalities
            .iter()
            .chain(symmetric.iter().map(|(f, _)| f))
            .chain(general.iter().map(|(f, _)| f))
            .map(|f| f.degree_where(is_x))
            .chain(family.iter().map(|(g, _)| g.degree()))
            .max()
            .unwrap_or(0);
        Ok(SystemSpec { n, t, equalities, symmetric, family, general, d, source })
    }
}

impl SystemSpec {
    pub fn builder(n: usize, t: usize) -> SpecBuilder {
        SpecBuilder {
            n,
            t,
            equalities: Vec::new(),
            symmetric: Vec::new(),
            family: None,
            general: Vec::new(),
            source: String::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parameters.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn layout(&self) -> VarLayout {
        VarLayout::new(self.n, self.t)
    }

    pub fn equalities(&self) -> &[Polynomial] {
        &self.equalities
    }

    pub fn symmetric(&self) -> &[(Polynomial, Relation)] {
        &self.symmetric
    }

    pub fn family(&self) -> Option<(&EquivariantFamily, Relation)> {
        self.family.as_ref().map(|(g, r)| (g, *r))
    }

    pub fn general(&self) -> &[(Polynomial, Relation)] {
        &self.general
    }

    /// Maximal degree in the x-variables over all constraints.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Every constraint in x (and y) variables: equalities, symmetric
    /// inequalities, family components, general constraints.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> =
            self.equalities.iter().map(|f| Constraint::new(f.clone(), Relation::Eq)).collect();
        out.extend(self.symmetric.iter().map(|(f, r)| Constraint::new(f.clone(), *r)));
        if let Some((g, rel)) = &self.family {
            out.extend(g.components().iter().map(|c| Constraint::new(c.clone(), *rel)));
        }
        out.extend(self.general.iter().map(|(f, r)| Constraint::new(f.clone(), *r)));
        out
    }

    fn parameter_map(&self, params: &[Rational]) -> Result<BTreeMap<u32, Rational>, ReductionError> {
        if params.len() != self.t {
            return Err(ReductionError::ParameterCount { expected: self.t, got: params.len() });
        }
        let layout = self.layout();
        Ok(params.iter().enumerate().map(|(j, v)| (layout.y(j), v.clone())).collect())
    }

    /// Fixes every parameter, giving a system with `t = 0`.
    pub fn instantiate(&self, params: &[Rational]) -> Result<SystemSpec, ReductionError> {
        let values = self.parameter_map(params)?;
        let inst = |p: &Polynomial| p.instantiate(&values);
        let mut b = SystemSpec::builder(self.n, 0).source(self.source.clone());
        for f in &self.equalities {
            b = b.equality(inst(f));
        }
        for (f, r) in &self.symmetric {
            b = b.symmetric(inst(f), *r);
        }
        if let Some((g, r)) = &self.family {
            let g = g.map(inst).map_err(|source| SpecError::Symmetry { what: "equivariant family".into(), source })?;
            b = b.family(g, *r);
        }
        for (f, r) in &self.general {
            b = b.general(inst(f), *r);
        }
        Ok(b.build()?)
    }

    /// The unreduced system in the `n` x-variables.
    pub fn to_problem(&self, params: &[Rational]) -> Result<Problem, ReductionError> {
        let values = self.parameter_map(params)?;
        let constraints =
            self.constraints().into_iter().map(|c| Constraint::new(c.poly.instantiate(&values), c.rel)).collect();
        Problem::new(self.n, constraints).map_err(ReductionError::Problem)
    }
}

/// A hypothesis whose failure makes the reduction bound trivial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LowDegreeFamily { degree: u32 },
    DegreeTooLarge { d: u32, n: usize },
    NonSymmetricConstraints { count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LowDegreeFamily { degree } => {
                write!(f, "inequality family has a component of degree {degree} < 2")
            }
            Violation::DegreeTooLarge { d, n } => write!(f, "2d = {} exceeds n = {n}", 2 * d),
            Violation::NonSymmetricConstraints { count } => {
                write!(f, "{count} constraints are not symmetric")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n: usize,
    pub d: u32,
    /// `2d - 1` (at least 1).
    pub nominal_bound: usize,
    /// Number of distinct coordinates searched: the nominal bound, or `n`
    /// when some hypothesis fails.
    pub bound: usize,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn degraded(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Maximal number of distinct coordinates a witness needs, with the
/// hypotheses that justify it.
pub fn distinct_coordinate_bound(spec: &SystemSpec) -> HypothesisReport {
    let (n, d) = (spec.n, spec.d);
    let mut violations = Vec::new();
    if let Some((g, _)) = &spec.family {
        if g.min_degree() < 2 {
            violations.push(Violation::LowDegreeFamily { degree: g.min_degree() });
        }
    }
    if 2 * d as usize > n {
        violations.push(Violation::DegreeTooLarge { d, n });
    }
    if !spec.general.is_empty() {
        violations.push(Violation::NonSymmetricConstraints { count: spec.general.len() });
    }
    let mut notes = Vec::new();
    if !spec.symmetric.is_empty() {
        notes.push(format!(
            "{} symmetric inequalities are reduced by block substitution alongside the equalities",
            spec.symmetric.len()
        ));
    }
    let nominal_bound = (2 * d as usize).saturating_sub(1).max(1);
    let bound = if violations.is_empty() { nominal_bound.min(n) } else { n };
    HypothesisReport { n, d, nominal_bound, bound, violations, notes }
}
