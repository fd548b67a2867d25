//! Symmetric-group invariance and equivariance.
//!
//! Both checks use the two generators of `S_n` (the transposition `(1 2)`
//! and the n-cycle) instead of enumerating the whole group.

mod decompose;
mod power_sums;

pub use decompose::{
    equivariant_decompose, fiber_zero_polynomial, EquivariantDecomposition, FiberPolynomial, FiberRootCount,
};
pub use power_sums::{symmetric_to_power_sums, PowerSumExpression};

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::poly::{int, permutation_orbit, Monomial, Permutation, Polynomial, Rational};

/// Largest `n` accepted by [`reynolds`].
pub const REYNOLDS_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("polynomial is not S_{n}-invariant: fails under generator {generator}")]
    NotInvariant { n: usize, generator: String },
    #[error("family is not S_{n}-equivariant: component {component} fails under generator {generator}")]
    NotEquivariant { n: usize, component: usize, generator: String },
    #[error("equivariant family must have exactly n components (n = {expected}, got {got})")]
    WrongLength { expected: usize, got: usize },
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("degree {degree} exceeds n = {n}; power sums p_1..p_n only generate up to degree n independently")]
    DegreeTooHigh { degree: u32, n: usize },
    #[error("polynomial involves variables other than x1..x{n}; instantiate parameters first")]
    NonXVariables { n: usize },
    #[error("reynolds operator capped at n = {cap} (got n = {n}); use orbit-sum symmetrization instead")]
    ReynoldsCap { n: usize, cap: usize },
    #[error("family is not S_n-equivariant of declared degree {degree}")]
    Inconsistent { degree: u32 },
    #[error("fiber values must have length {expected} (got {got})")]
    FiberLength { expected: usize, got: usize },
}

/// First generator under which `f` is not invariant, if any.
pub fn invariance_violation(f: &Polynomial, n: usize) -> Option<Permutation> {
    Permutation::generators(n).into_iter().find(|s| &f.apply_permutation(s) != f)
}

pub fn is_invariant(f: &Polynomial, n: usize) -> bool {
    invariance_violation(f, n).is_none()
}

/// First `(generator, component)` pair breaking `g_{σ(i)} = σ·g_i`.
pub fn equivariance_violation(components: &[Polynomial]) -> Option<(Permutation, usize)> {
    let n = components.len();
    for s in Permutation::generators(n) {
        for (i, g) in components.iter().enumerate() {
            if g.apply_permutation(&s) != components[s.image(i)] {
                return Some((s, i));
            }
        }
    }
    None
}

pub fn is_equivariant(components: &[Polynomial], n: usize) -> Result<bool, SymmetryError> {
    if components.len() != n {
        return Err(SymmetryError::WrongLength { expected: n, got: components.len() });
    }
    Ok(equivariance_violation(components).is_none())
}

/// A validated `S_n`-equivariant map `(g_1, .., g_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquivariantFamily {
    components: Vec<Polynomial>,
    n: usize,
    degree: u32,
}

impl EquivariantFamily {
    pub fn new(n: usize, components: Vec<Polynomial>) -> Result<Self, SymmetryError> {
        if components.len() != n {
            return Err(SymmetryError::WrongLength { expected: n, got: components.len() });
        }
        if let Some((s, i)) = equivariance_violation(&components) {
            return Err(SymmetryError::NotEquivariant { n, component: i + 1, generator: s.cycle_notation() });
        }
        let degree = components.iter().map(|g| g.degree_where(|v| (v as usize) < n)).max().unwrap_or(0);
        Ok(EquivariantFamily { components, n, degree })
    }

    /// Orbit of a single component: `g_i = g_1 ∘ (1 i)`.
    pub fn from_template(n: usize, g1: Polynomial) -> Result<Self, SymmetryError> {
        let components = (0..n).map(|i| g1.apply_permutation(&Permutation::transposition(n, 0, i))).collect();
        Self::new(n, components)
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Maximal total degree in the x-variables.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Smallest x-degree over the components.
    pub fn min_degree(&self) -> u32 {
        self.components.iter().map(|g| g.degree_where(|v| (v as usize) < self.n)).min().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Result<Self, SymmetryError> {
        Self::new(self.n, self.components.iter().map(f).collect())
    }
}

/// Newton power sum `p_j = Σ x_i^j`.
pub fn power_sum(j: u32, n: usize) -> Polynomial {
    Polynomial::from_terms((0..n as u32).map(|i| (Monomial::from_pairs([(i, j)]), int(1)))).with_nvars(n)
}

/// Elementary symmetric polynomial `e_j`, `1 <= j <= n`.
pub fn elementary_symmetric(j: usize, n: usize) -> Result<Polynomial, SymmetryError> {
    if j == 0 || j > n {
        return Err(SymmetryError::IndexOutOfRange { index: j, n });
    }
    let mut exps = vec![0u32; n];
    for e in exps.iter_mut().skip(n - j) {
        *e = 1;
    }
    Ok(Polynomial::from_terms(permutation_orbit(&exps).into_iter().map(|v| (Monomial::from_exponents(&v), int(1))))
        .with_nvars(n))
}

/// Orbit sum `m_λ` of the monomial `x_1^{λ_1} x_2^{λ_2} ...`.
pub fn monomial_symmetric(parts: &[u32], n: usize) -> Polynomial {
    assert!(parts.len() <= n, "partition has more parts than variables");
    let mut exps = vec![0u32; n];
    exps[..parts.len()].copy_from_slice(parts);
    exps.sort_unstable();
    Polynomial::from_terms(permutation_orbit(&exps).into_iter().map(|v| (Monomial::from_exponents(&v), int(1))))
        .with_nvars(n)
}

/// Averages every term over its `S_n` orbit. Agrees with the Reynolds
/// operator without enumerating the group.
pub fn symmetrize(f: &Polynomial, n: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    let mut orbit_cache: BTreeMap<Vec<u32>, Vec<Vec<u32>>> = BTreeMap::new();
    for (m, c) in f.terms() {
        let (xs, rest) = m.split(|v| (v as usize) < n);
        let mut exps = vec![0u32; n];
        for &(v, e) in xs.pairs() {
            exps[v as usize] = e;
        }
        exps.sort_unstable();
        let orbit = orbit_cache.entry(exps.clone()).or_insert_with(|| permutation_orbit(&exps));
        let share = c / int(orbit.len() as i64);
        for v in orbit.iter() {
            out.add_term(Monomial::from_exponents(v).mul(&rest), share.clone());
        }
    }
    out.with_nvars(f.nvars())
}

/// Reynolds operator `R(f) = (1/n!) Σ_σ σ(f)` for `n` up to [`REYNOLDS_CAP`].
pub fn reynolds(f: &Polynomial, n: usize) -> Result<Polynomial, SymmetryError> {
    reynolds_with_cap(f, n, REYNOLDS_CAP)
}

pub fn reynolds_with_cap(f: &Polynomial, n: usize, cap: usize) -> Result<Polynomial, SymmetryError> {
    if n > cap {
        return Err(SymmetryError::ReynoldsCap { n, cap });
    }
    Ok(symmetrize(f, n))
}

/// `∇f` as an equivariant family; `f` must be symmetric.
pub fn gradient_family(f: &Polynomial, n: usize) -> Result<EquivariantFamily, SymmetryError> {
    if let Some(s) = invariance_violation(f, n) {
        return Err(SymmetryError::NotInvariant { n, generator: s.cycle_notation() });
    }
    EquivariantFamily::new(n, f.gradient(n))
}

/// Sum-of-squares symmetrization `Σ_i Σ_σ σ(f_i)^2` (up to a positive
/// factor): one symmetric polynomial with the same real zero set as the
/// whole orbit of `fs`.
pub fn sum_of_squares(fs: &[Polynomial], n: usize) -> Polynomial {
    let mut out = Polynomial::zero();
    for f in fs {
        out += &symmetrize(&f.pow(2), n);
    }
    out
}

/// Exponent multiset of the x-part as a descending partition.
pub(crate) fn x_partition(m: &Monomial, n: usize) -> Vec<u32> {
    let mut parts: Vec<u32> = m.pairs().iter().filter(|&&(v, _)| (v as usize) < n).map(|&(_, e)| e).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

pub(crate) fn is_zero_rational(r: &Rational) -> bool {
    r.is_zero()
}
