use std::collections::{BTreeMap, HashMap};

use super::{invariance_violation, is_zero_rational, power_sum, x_partition, SymmetryError};
use crate::poly::{Monomial, Polynomial, Rational};

/// A symmetric polynomial written as `q(p_1, .., p_d)`. Variable `j - 1` of
/// `q` stands for the power sum `p_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSumExpression {
    pub q: Polynomial,
    pub n: usize,
    pub degree: u32,
}

impl PowerSumExpression {
    /// Substitutes `p_j(x_1, .., x_n)` back for each `u_j`.
    pub fn compose(&self) -> Polynomial {
        let map: BTreeMap<u32, Polynomial> = self.q.vars().into_iter().map(|v| (v, power_sum(v + 1, self.n))).collect();
        self.q.substitute(&map)
    }

    /// Value of `q` at `u_j = gamma[j - 1]`.
    pub fn evaluate_at(&self, gamma: &[Rational]) -> Result<Rational, SymmetryError> {
        let needed = self.q.max_var().map_or(0, |v| v as usize + 1);
        if gamma.len() < needed {
            return Err(SymmetryError::FiberLength { expected: needed, got: gamma.len() });
        }
        self.q.evaluate_exact(gamma).map_err(|_| SymmetryError::FiberLength { expected: needed, got: gamma.len() })
    }

    /// Renders `q` with `p1, p2, ..` as variable names.
    pub fn display(&self) -> String {
        self.q.display_with(|v| format!("p{}", v + 1))
    }
}

/// Writes a symmetric polynomial of degree `<= n` in `x_1..x_n` as a
/// polynomial in the power sums `p_1..p_d`.
///
/// Repeatedly removes the leading orbit `m_λ` (most parts first) by
/// subtracting a multiple of `p_λ = Π p_{λ_i}`, whose expansion contains `m_λ`
/// plus orbits of strictly fewer parts.
pub fn symmetric_to_power_sums(f: &Polynomial, n: usize) -> Result<PowerSumExpression, SymmetryError> {
    if !f.uses_only(|v| (v as usize) < n) {
        return Err(SymmetryError::NonXVariables { n });
    }
    if let Some(s) = invariance_violation(f, n) {
        return Err(SymmetryError::NotInvariant { n, generator: s.cycle_notation() });
    }
    let degree = f.total_degree().unwrap_or(0);
    if degree as usize > n {
        return Err(SymmetryError::DegreeTooHigh { degree, n });
    }

    let mut rest = f.clone();
    let mut q = Polynomial::zero();
    let mut products: HashMap<Vec<u32>, Polynomial> = HashMap::new();
    while !rest.is_zero() {
        let lambda = rest
            .terms()
            .map(|(m, _)| x_partition(m, n))
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
            .expect("nonzero polynomial has a term");
        let canonical = Monomial::from_exponents(&lambda);
        let c = rest.coefficient(&canonical);
        debug_assert!(!is_zero_rational(&c));
        let p_lambda = products
            .entry(lambda.clone())
            .or_insert_with(|| lambda.iter().fold(Polynomial::one(), |acc, &k| &acc * &power_sum(k, n)));
        let lead = p_lambda.coefficient(&canonical);
        let factor = c / lead;
        rest -= &p_lambda.scale(&factor);
        let u = Monomial::from_pairs(lambda.iter().map(|&k| (k - 1, 1)));
        q.add_term(u, factor);
    }
    Ok(PowerSumExpression { q, n, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use crate::symmetry::{elementary_symmetric, monomial_symmetric};

    fn u(j: u32) -> Polynomial {
        Polynomial::var(j - 1)
    }

    #[test]
    fn e2_in_three_variables() {
        let e = symmetric_to_power_sums(&elementary_symmetric(2, 3).unwrap(), 3).unwrap();
        let expected = (&u(1).pow(2) - &u(2)).scale(&rat(1, 2));
        assert_eq!(e.q, expected);
    }

    #[test]
    fn p2_is_a_single_variable() {
        let e = symmetric_to_power_sums(&power_sum(2, 4), 4).unwrap();
        assert_eq!(e.q, u(2));
    }

    #[test]
    fn e3_newton_identity() {
        // e3 = p1^3/6 - p1 p2/2 + p3/3
        let e = symmetric_to_power_sums(&elementary_symmetric(3, 3).unwrap(), 3).unwrap();
        let expected = &(&u(1).pow(3).scale(&rat(1, 6)) - &(&u(1) * &u(2)).scale(&rat(1, 2))) + &u(3).scale(&rat(1, 3));
        assert_eq!(e.q, expected);
    }

    #[test]
    fn roundtrip_on_orbit_sums() {
        for n in 2..=5 {
            for lambda in [vec![1], vec![2], vec![1, 1], vec![2, 1], vec![1, 1, 1], vec![3, 1], vec![2, 2]] {
                if lambda.len() > n || lambda.iter().sum::<u32>() as usize > n {
                    continue;
                }
                let f = monomial_symmetric(&lambda, n);
                let e = symmetric_to_power_sums(&f, n).unwrap();
                assert_eq!(e.compose(), f, "n={n} lambda={lambda:?}");
            }
        }
    }

    #[test]
    fn constants_pass_through() {
        let e = symmetric_to_power_sums(&Polynomial::from_int(5), 3).unwrap();
        assert_eq!(e.q, Polynomial::from_int(5));
        assert_eq!(e.evaluate_at(&[]).unwrap(), int(5));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(symmetric_to_power_sums(&Polynomial::var(0), 3), Err(SymmetryError::NotInvariant { .. })));
        assert!(matches!(symmetric_to_power_sums(&power_sum(4, 3), 3), Err(SymmetryError::DegreeTooHigh { .. })));
        assert!(matches!(symmetric_to_power_sums(&Polynomial::var(7), 3), Err(SymmetryError::NonXVariables { .. })));
    }

    #[test]
    fn evaluation_at_power_sum_values() {
        // e2 at x = (1, 2, 3): p1 = 6, p2 = 14, e2 = 11
        let e = symmetric_to_power_sums(&elementary_symmetric(2, 3).unwrap(), 3).unwrap();
        assert_eq!(e.evaluate_at(&[int(6), int(14)]).unwrap(), int(11));
        assert!(e.evaluate_at(&[int(6)]).is_err());
    }
}
