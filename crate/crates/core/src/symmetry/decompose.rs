use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{monomial_symmetric, symmetric_to_power_sums, EquivariantFamily, SymmetryError};
use crate::feasibility::{univariate_real_roots, RootInterval};
use crate::linalg::solve_exact;
use crate::partition::descending_partitions;
use crate::poly::{Monomial, Polynomial, Rational};

/// `g_i = Σ_j s_j x_i^j` with symmetric `s_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantDecomposition {
    pub n: usize,
    /// `s_0, s_1, ..`, indexed by the power of `x_i`.
    pub coeffs: Vec<Polynomial>,
}

impl EquivariantDecomposition {
    /// `Σ_j s_j x_i^j` for the zero-based coordinate `i`.
    pub fn recompose(&self, i: usize) -> Polynomial {
        let xi = Polynomial::var(i as u32);
        let mut out = Polynomial::zero();
        for (j, s) in self.coeffs.iter().enumerate() {
            out += &(s * &xi.pow(j as u32));
        }
        out
    }

    /// Degree of each `s_j` in the x-variables (`None` for a zero `s_j`).
    pub fn achieved_degrees(&self) -> Vec<Option<u32>> {
        self.coeffs.iter().map(|s| (!s.is_zero()).then(|| s.degree_where(|v| (v as usize) < self.n))).collect()
    }
}

// (exponent of x_1, descending exponents of the remaining x-variables)
type RowKey = (u32, Vec<u32>);

/// Row keys touched by `x_1^j m_λ`: one per distinct exponent that `x_1`
/// can take inside the orbit of `λ`.
fn column_rows(j: u32, lambda: &[u32], n: usize) -> Vec<RowKey> {
    let mut values: BTreeSet<u32> = lambda.iter().copied().collect();
    if lambda.len() < n {
        values.insert(0);
    }
    values
        .into_iter()
        .map(|v| {
            let mut rest = lambda.to_vec();
            if v > 0 {
                let pos = rest.iter().position(|&e| e == v).expect("value present");
                rest.remove(pos);
            }
            (v + j, rest)
        })
        .collect()
}

/// Solves for the symmetric coefficients `s_j` (each of degree at most
/// `d - j` in the monomial-symmetric basis) by matching coefficients of
/// `g_1`, then checks the recomposition of every component.
pub fn equivariant_decompose(g: &EquivariantFamily) -> Result<EquivariantDecomposition, SymmetryError> {
    let n = g.n();
    let d = g.degree();
    let is_x = |v: u32| (v as usize) < n;
    let jmax = d.min(n.saturating_sub(1) as u32);

    let mut columns: Vec<(u32, Vec<u32>)> = Vec::new();
    for j in 0..=jmax {
        for k in 0..=(d - j) {
            for lambda in descending_partitions(k, n) {
                columns.push((j, lambda));
            }
        }
    }

    let g1 = &g.components()[0];
    let mut slices: BTreeMap<Monomial, BTreeMap<RowKey, Rational>> = BTreeMap::new();
    for (m, c) in g1.terms() {
        let (xs, rest) = m.split(is_x);
        let a = xs.exponent(0);
        let mut mu: Vec<u32> = xs.pairs().iter().filter(|&&(v, _)| v != 0).map(|&(_, e)| e).collect();
        mu.sort_unstable_by(|x, y| y.cmp(x));
        slices.entry(rest).or_default().insert((a, mu), c.clone());
    }

    let col_rows: Vec<Vec<RowKey>> = columns.iter().map(|(j, l)| column_rows(*j, l, n)).collect();
    let mut row_index: BTreeMap<RowKey, usize> = BTreeMap::new();
    for key in col_rows.iter().flatten().chain(slices.values().flat_map(|s| s.keys())) {
        let next = row_index.len();
        row_index.entry(key.clone()).or_insert(next);
    }

    let nrows = row_index.len();
    let slice_keys: Vec<&Monomial> = slices.keys().collect();
    let mut a = vec![vec![Rational::zero(); columns.len()]; nrows];
    for (c, rows) in col_rows.iter().enumerate() {
        for key in rows {
            a[row_index[key]][c] = Rational::from_integer(1.into());
        }
    }
    let mut b = vec![vec![Rational::zero(); slice_keys.len()]; nrows];
    for (s, rest) in slice_keys.iter().enumerate() {
        for (key, c) in &slices[*rest] {
            b[row_index[key]][s] = c.clone();
        }
    }

    let solution = solve_exact(a, b).ok_or(SymmetryError::Inconsistent { degree: d })?;

    let mut coeffs = vec![Polynomial::zero(); jmax as usize + 1];
    let mut orbit_cache: BTreeMap<Vec<u32>, Polynomial> = BTreeMap::new();
    for (c, (j, lambda)) in columns.iter().enumerate() {
        for (s, rest) in slice_keys.iter().enumerate() {
            let value = &solution[c][s];
            if value.is_zero() {
                continue;
            }
            let m = orbit_cache.entry(lambda.clone()).or_insert_with(|| monomial_symmetric(lambda, n));
            coeffs[*j as usize] += &m.mul_monomial(rest, value);
        }
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(Polynomial::is_zero) {
        coeffs.pop();
    }

    let dec = EquivariantDecomposition { n, coeffs };
    for (i, gi) in g.components().iter().enumerate() {
        if &dec.recompose(i) != gi {
            return Err(SymmetryError::Inconsistent { degree: d });
        }
    }
    Ok(dec)
}

/// `δ(U) = Σ_j b_j U^j` where `b_j` is the constant value of `s_j` on the
/// fiber `p_1 = γ_1, .., p_d = γ_d`. On that fiber `g_i` vanishes exactly
/// when `δ(x_i) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPolynomial {
    /// Univariate in variable 0.
    pub delta: Polynomial,
    pub coeffs: Vec<Rational>,
    pub family_degree: u32,
}

impl FiberPolynomial {
    /// Isolating intervals for the distinct real roots of δ, the only values
    /// a coordinate takes where some `g_i` vanishes on the fiber. `None` when
    /// δ is identically zero (every `g_i` vanishes on the whole fiber).
    pub fn real_roots(&self) -> Option<Vec<RootInterval>> {
        univariate_real_roots(&self.coeffs, None, None).ok()
    }

    /// Root count diagnostic: `t` distinct real roots against the bound
    /// `d - 1` that holds when δ has degree below `d`.
    pub fn root_count(&self) -> Option<FiberRootCount> {
        let t = self.real_roots()?.len();
        let bound = self.family_degree.saturating_sub(1) as usize;
        Some(FiberRootCount { t, bound, exceeds: t > bound })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberRootCount {
    pub t: usize,
    pub bound: usize,
    pub exceeds: bool,
}

pub fn fiber_zero_polynomial(g: &EquivariantFamily, gamma: &[Rational]) -> Result<FiberPolynomial, SymmetryError> {
    let n = g.n();
    let d = g.degree();
    if gamma.len() < d as usize {
        return Err(SymmetryError::FiberLength { expected: d as usize, got: gamma.len() });
    }
    let dec = equivariant_decompose(g)?;
    let mut coeffs = Vec::with_capacity(dec.coeffs.len());
    for s in &dec.coeffs {
        if !s.uses_only(|v| (v as usize) < n) {
            return Err(SymmetryError::NonXVariables { n });
        }
        coeffs.push(symmetric_to_power_sums(s, n)?.evaluate_at(gamma)?);
    }
    Ok(FiberPolynomial { delta: Polynomial::from_univariate(0, &coeffs), coeffs, family_degree: d })
}
