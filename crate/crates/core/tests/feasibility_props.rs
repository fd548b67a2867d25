use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqsas::feasibility::{
    decide, oracle_grid_search, replay, univariate_real_roots, Constraint, OracleOptions, Problem, RegionChoice,
    Relation, SolveOptions, Verdict, VerdictKind,
};
use eqsas::poly::{int, Interval, Monomial, Polynomial, Rational};

fn random_poly(vars: usize, max_exp: u32, terms: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..rng.gen_range(1..=terms) {
        let exps: Vec<u32> = (0..vars).map(|_| rng.gen_range(0..=max_exp)).collect();
        p += &Polynomial::monomial(Monomial::from_exponents(&exps), int(rng.gen_range(-5..=5)));
    }
    p
}

fn random_system(seed: u64, equalities: bool) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(1..=3);
    let count = rng.gen_range(1..=3);
    let constraints = (0..count)
        .map(|_| {
            let rel = match rng.gen_range(0..if equalities { 3 } else { 2 }) {
                0 => Relation::Ge,
                1 => Relation::Gt,
                _ => Relation::Eq,
            };
            Constraint::new(random_poly(q, 2, 4, &mut rng), rel)
        })
        .collect();
    Problem::new(q, constraints).unwrap()
}

fn in_box(problem: &Problem, half: f64, max_boxes: u64) -> Verdict {
    let opts = SolveOptions {
        region: RegionChoice::Uniform(Interval::new(-half, half)),
        max_boxes,
        ..SolveOptions::default()
    };
    decide(problem, &opts).unwrap()
}

fn grid(problem: &Problem, strict_only: bool) -> bool {
    let opts = OracleOptions { steps: 9, slack: None, strict_only, symmetric: false };
    oracle_grid_search(problem, &vec![Interval::new(-4.0, 4.0); problem.nvars], &opts).is_some()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// `Σ l_k^2 + c = 0` with affine `l_k` and `c > 0` has no real point in
    /// `[-4, 4]^q`.
    #[test]
    fn sum_of_squares_plus_constant_is_empty(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.gen_range(1..=3);
        let mut f = Polynomial::from_int(rng.gen_range(1..=5));
        for _ in 0..rng.gen_range(1..=4) {
            let mut l = Polynomial::from_int(rng.gen_range(-5..=5));
            for v in 0..q as u32 {
                l += &(&Polynomial::var(v) * &Polynomial::from_int(rng.gen_range(-5..=5)));
            }
            f += &l.pow(2);
        }
        let problem = Problem::new(q, vec![Constraint::new(f, Relation::Eq)]).unwrap();
        let v = in_box(&problem, 4.0, 50_000);
        prop_assert_eq!(v.kind, VerdictKind::UnsatInBox, "{:?}", v.reason);
        prop_assert!(replay(&problem, &v).is_ok());
    }

    #[test]
    fn oracle_agreement(seed in any::<u64>()) {
        let strict = random_system(seed, false);
        if grid(&strict, true) {
            let v = in_box(&strict, 4.0, 50_000);
            prop_assert!(v.kind.is_sat(), "oracle found a strict witness, decide said {:?}", v.kind);
            prop_assert!(replay(&strict, &v).is_ok());
        }
        let mixed = random_system(seed, true);
        if grid(&mixed, false) {
            prop_assert_ne!(in_box(&mixed, 4.0, 50_000).kind, VerdictKind::UnsatInBox);
        }
    }

    #[test]
    fn budget_never_flips_a_verdict(seed in any::<u64>()) {
        let problem = random_system(seed, true);
        let kinds: Vec<VerdictKind> = [20, 200, 2_000, 20_000].iter().map(|&b| in_box(&problem, 3.0, b).kind).collect();
        let sat = kinds.iter().any(|k| k.is_sat());
        let unsat = kinds.contains(&VerdictKind::UnsatInBox);
        prop_assert!(!(sat && unsat), "{:?}", kinds);
    }

    /// Every certificate a search emits replays.
    #[test]
    fn verdicts_replay(seed in any::<u64>()) {
        let problem = random_system(seed, true);
        let v = in_box(&problem, 3.0, 5_000);
        prop_assert!(replay(&problem, &v).is_ok(), "{:?}", v.kind);
        if let Some(w) = &v.witness {
            prop_assert_eq!(w.len(), problem.nvars);
        }
    }

    #[test]
    fn quadratic_root_count(a in -6i64..=6, b in -12i64..=12, c in -12i64..=12) {
        prop_assume!(a != 0);
        let disc = b * b - 4 * a * c;
        let expected = match disc.signum() { 1 => 2, 0 => 1, _ => 0 };
        let roots = univariate_real_roots(&[int(c), int(b), int(a)], None, None).unwrap();
        prop_assert_eq!(roots.len(), expected);
    }

    #[test]
    fn factored_root_count(
        roots in prop::collection::btree_set((-20i64..=20, 1i64..=4), 1..=4),
        extra in any::<bool>(),
        mult in 1u32..=2,
    ) {
        // distinct rationals p/q, one of them repeated, times x^2 + 1 maybe
        let values: std::collections::BTreeSet<Rational> =
            roots.iter().map(|&(p, q)| Rational::new(p.into(), q.into())).collect();
        let x = Polynomial::var(0);
        let mut f = Polynomial::one();
        for (k, r) in values.iter().enumerate() {
            let factor = &x - &Polynomial::constant(r.clone());
            f = &f * &factor.pow(if k == 0 { mult } else { 1 });
        }
        if extra {
            f = &f * &(&x.pow(2) + &Polynomial::one());
        }
        prop_assume!(f.total_degree().unwrap() <= 6);
        let coeffs = f.univariate_coeffs(0).unwrap();
        let found = univariate_real_roots(&coeffs, None, None).unwrap();
        prop_assert_eq!(found.len(), values.len());
        for (r, v) in found.iter().zip(&values) {
            prop_assert!(r.lo <= *v && *v <= r.hi);
        }
    }
}
