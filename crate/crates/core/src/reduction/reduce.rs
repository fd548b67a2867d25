use std::collections::BTreeMap;

use super::{ReductionError, SystemSpec};
use crate::feasibility::{Constraint, Problem, Relation};
use crate::partition::Partition;
use crate::poly::{Polynomial, Rational, VarLayout};

/// The system obtained by setting every coordinate of block `i` to `a_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedSystem {
    pub partition: Partition,
    /// Layout of the originating system; block variables are `layout.a(i)`.
    pub layout: VarLayout,
    pub equalities: Vec<Polynomial>,
    pub inequalities: Vec<(Polynomial, Relation)>,
}

impl ReducedSystem {
    /// Number of block variables.
    pub fn q(&self) -> usize {
        self.partition.len()
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        self.equalities
            .iter()
            .map(|f| Constraint::new(f.clone(), Relation::Eq))
            .chain(self.inequalities.iter().map(|(f, r)| Constraint::new(f.clone(), *r)))
            .collect()
    }

    /// Instantiates the parameters and renames `a_i -> i`.
    pub fn to_problem(&self, params: &[Rational]) -> Result<Problem, ReductionError> {
        let layout = self.layout;
        if params.len() != layout.t {
            return Err(ReductionError::ParameterCount { expected: layout.t, got: params.len() });
        }
        let values: BTreeMap<u32, Rational> =
            params.iter().enumerate().map(|(j, v)| (layout.y(j), v.clone())).collect();
        let n = layout.n as u32;
        let constraints = self
            .constraints()
            .into_iter()
            .map(|c| Constraint::new(c.poly.instantiate(&values).rename(|v| v - n), c.rel))
            .collect();
        Problem::new(self.q(), constraints)
            .map_err(|source| ReductionError::Backend { partition: self.partition.clone(), source })
    }
}

fn push_unique<T: PartialEq>(out: &mut Vec<T>, item: T) {
    if !out.contains(&item) {
        out.push(item);
    }
}

/// `x -> a` block substitution for `gamma`.
pub(crate) fn block_map(layout: VarLayout, gamma: &Partition) -> BTreeMap<u32, Polynomial> {
    gamma
        .block_of_coordinates()
        .into_iter()
        .enumerate()
        .map(|(i, b)| (layout.x(i), Polynomial::var(layout.a(b))))
        .collect()
}

/// Substitutes `x_j = a_i` for every coordinate `j` of block `i`, keeping
/// the first occurrence of each repeated constraint. Parameters are left
/// untouched.
pub fn reduce_system(spec: &SystemSpec, gamma: &Partition) -> ReducedSystem {
    assert_eq!(gamma.total() as usize, spec.n(), "partition must sum to n");
    let layout = spec.layout();
    let map = block_map(layout, gamma);
    let mut equalities = Vec::new();
    let mut inequalities = Vec::new();
    for c in spec.constraints() {
        let p = c.poly.substitute(&map);
        match c.rel {
            Relation::Eq => push_unique(&mut equalities, p),
            rel => push_unique(&mut inequalities, (p, rel)),
        }
    }
    ReducedSystem { partition: gamma.clone(), layout, equalities, inequalities }
}

/// Repeats `w_i` once per coordinate of block `i`.
pub fn expand_witness<T: Clone>(w: &[T], gamma: &Partition) -> Result<Vec<T>, ReductionError> {
    if w.len() != gamma.len() {
        return Err(ReductionError::WitnessLength { expected: gamma.len(), got: w.len() });
    }
    Ok(gamma.block_of_coordinates().into_iter().map(|b| w[b].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::int;
    use crate::symmetry::power_sum;
    use crate::symmetry::{elementary_symmetric, EquivariantFamily};

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn sphere_collapse() {
        let n = 4;
        let spec = SystemSpec::builder(n, 0).equality(&power_sum(2, n) - &Polynomial::one()).build().unwrap();
        let r = reduce_system(&spec, &part(&[1, 3]));
        let a = |i: usize| Polynomial::var(spec.layout().a(i));
        let expected = &(&a(0).pow(2) + &a(1).pow(2).scale(&int(3))) - &Polynomial::one();
        assert_eq!(r.equalities, vec![expected]);
    }

    #[test]
    fn family_deduplicates() {
        let n = 4;
        let g = EquivariantFamily::new(n, (0..n as u32).map(|i| Polynomial::var(i).scale(&int(2))).collect()).unwrap();
        let spec = SystemSpec::builder(n, 0).family(g, Relation::Ge).build().unwrap();
        let r = reduce_system(&spec, &part(&[1, 3]));
        let a = |i: usize| Polynomial::var(spec.layout().a(i)).scale(&int(2));
        assert_eq!(r.inequalities, vec![(a(0), Relation::Ge), (a(1), Relation::Ge)]);
    }

    #[test]
    fn block_assignment_does_not_matter() {
        let n = 4;
        let f = &elementary_symmetric(2, n).unwrap() + &power_sum(3, n);
        let layout = VarLayout::new(n, 0);
        let a = |i: usize| Polynomial::var(layout.a(i));
        let first: BTreeMap<u32, Polynomial> = [(0, a(0)), (1, a(0)), (2, a(1)), (3, a(1))].into_iter().collect();
        let second: BTreeMap<u32, Polynomial> = [(0, a(0)), (2, a(0)), (1, a(1)), (3, a(1))].into_iter().collect();
        assert_eq!(f.substitute(&first), f.substitute(&second));
        let spec = SystemSpec::builder(n, 0).equality(f.clone()).build().unwrap();
        assert_eq!(reduce_system(&spec, &part(&[2, 2])).equalities, vec![f.substitute(&first)]);
    }

    #[test]
    fn e2_on_one_block() {
        let n = 3;
        let spec = SystemSpec::builder(n, 0).equality(elementary_symmetric(2, n).unwrap()).build().unwrap();
        let r = reduce_system(&spec, &Partition::trivial(3));
        assert_eq!(r.equalities, vec![Polynomial::var(3).pow(2).scale(&int(3))]);
        let p = r.to_problem(&[]).unwrap();
        assert_eq!(p.nvars, 1);
        assert_eq!(p.constraints[0].poly, Polynomial::var(0).pow(2));
    }

    #[test]
    fn expansion() {
        let w = expand_witness(&[0.5, 2.0], &part(&[1, 3])).unwrap();
        assert_eq!(w, vec![0.5, 2.0, 2.0, 2.0]);
        assert_eq!(expand_witness(&[7], &Partition::trivial(5)).unwrap(), vec![7; 5]);
        assert!(expand_witness(&[1, 2, 3], &part(&[1, 3])).is_err());
    }
}
