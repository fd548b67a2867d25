use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqsas::feasibility::{decide, Constraint, Problem, RegionChoice, Relation, SolveOptions, VerdictKind};
use eqsas::io::random_symmetric;
use eqsas::partition::Partition;
use eqsas::poly::{int, Interval, Monomial, Polynomial, Rational};
use eqsas::reduction::{expand_witness, reduce_system, SystemSpec};
use eqsas::symmetry::EquivariantFamily;

fn relation(rng: &mut ChaCha8Rng) -> Relation {
    if rng.gen_bool(0.5) {
        Relation::Ge
    } else {
        Relation::Gt
    }
}

/// Inequalities only, so that a random point satisfies the system often
/// enough for the comparison to mean something.
fn random_inequalities(n: usize, seed: u64) -> SystemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SystemSpec::builder(n, 0);
    let rel = relation(&mut rng);
    b = b.symmetric(random_symmetric(n, 2, &mut rng), rel);
    if rng.gen_bool(0.7) {
        let x1 = Polynomial::var(0);
        let g1 = &(&x1 * &random_symmetric(n, 1, &mut rng)) + &random_symmetric(n, 2, &mut rng);
        let rel = relation(&mut rng);
        b = b.family(EquivariantFamily::from_template(n, g1).unwrap(), rel);
    }
    if rng.gen_bool(0.3) {
        let exps: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        let rel = relation(&mut rng);
        b = b.general(&Polynomial::monomial(Monomial::from_exponents(&exps), int(1)) - &Polynomial::from_int(2), rel);
    }
    b.build().unwrap()
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

fn random_poly(vars: u32, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let exps: Vec<u32> = (0..vars).map(|_| rng.gen_range(0..=2)).collect();
        p += &Polynomial::monomial(Monomial::from_exponents(&exps), int(rng.gen_range(-4..=4)));
    }
    p
}

fn random_problem(seed: u64, count: usize) -> Vec<Constraint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rel = match rng.gen_range(0..3) {
                0 => Relation::Eq,
                1 => Relation::Ge,
                _ => Relation::Gt,
            };
            Constraint::new(random_poly(2, &mut rng), rel)
        })
        .collect()
}

fn decide_in(constraints: &[Constraint], bx: &[Interval]) -> VerdictKind {
    let problem = Problem::new(2, constraints.to_vec()).unwrap();
    let opts = SolveOptions { region: RegionChoice::Fixed(bx.to_vec()), max_boxes: 4000, ..SolveOptions::default() };
    decide(&problem, &opts).unwrap().kind
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// A point in block variables satisfies the reduced system exactly when
    /// its expansion satisfies the original one.
    #[test]
    fn reduction_commutes_with_expansion(
        seed in any::<u64>(),
        parts in prop::collection::vec(1u32..=2, 1..=4),
        points in prop::collection::vec(prop::collection::vec(small_rational(), 4), 16),
    ) {
        let gamma = Partition::new(parts).unwrap();
        let n = gamma.total() as usize;
        let spec = random_inequalities(n, seed);
        let reduced = reduce_system(&spec, &gamma).to_problem(&[]).unwrap();
        let original = spec.to_problem(&[]).unwrap();
        for a in &points {
            let a = &a[..gamma.len()];
            let x = expand_witness(a, &gamma).unwrap();
            prop_assert_eq!(reduced.satisfied_exactly(a), original.satisfied_exactly(&x), "at {:?}", a);
        }
    }

    #[test]
    fn verdicts_are_monotone(seed in any::<u64>(), lo in prop::collection::vec(-2.0f64..1.0, 2), w in prop::collection::vec(0.1f64..1.0, 2)) {
        let base = random_problem(seed, 2);
        let big = vec![Interval::new(-2.0, 2.0); 2];
        let small: Vec<Interval> = lo.iter().zip(&w).map(|(&l, &w)| Interval::new(l, l + w)).collect();
        let on_big = decide_in(&base, &big);
        let on_small = decide_in(&base, &small);
        // feasible in a sub-box means feasible in the box
        prop_assert!(!(on_small.is_sat() && on_big == VerdictKind::UnsatInBox), "{:?} vs {:?}", on_small, on_big);

        let mut more = base.clone();
        more.extend(random_problem(seed.wrapping_add(1), 1));
        let with_extra = decide_in(&more, &big);
        // an extra constraint never creates solutions
        prop_assert!(!(with_extra.is_sat() && on_big == VerdictKind::UnsatInBox), "{:?} vs {:?}", with_extra, on_big);
    }
}
