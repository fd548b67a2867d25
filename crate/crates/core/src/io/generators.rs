//! Random benchmark systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::feasibility::Relation;
use crate::partition::descending_partitions;
use crate::poly::{int, Polynomial};
use crate::reduction::SystemSpec;
use crate::symmetry::{gradient_family, monomial_symmetric, EquivariantFamily};

/// Identity of the generator behind every seed.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

/// Coefficients are drawn uniformly from `[-COEFF_BOUND, COEFF_BOUND]`.
pub const COEFF_BOUND: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("degree must be at least 2 (got {0})")]
    Degree(u32),
    #[error("need at least 2 variables (got {0})")]
    Variables(usize),
}

/// Dense symmetric polynomial: every monomial-symmetric orbit of degree at
/// most `deg` gets a random coefficient.
pub fn random_symmetric(n: usize, deg: u32, rng: &mut impl Rng) -> Polynomial {
    let mut out = Polynomial::zero();
    for k in 0..=deg {
        for lambda in descending_partitions(k, n) {
            let c = int(rng.gen_range(-COEFF_BOUND..=COEFF_BOUND));
            out += &monomial_symmetric(&lambda, n).scale(&c);
        }
    }
    out
}

fn check(n: usize, d: u32) -> Result<(), GenError> {
    if d < 2 {
        return Err(GenError::Degree(d));
    }
    if n < 2 {
        return Err(GenError::Variables(n));
    }
    Ok(())
}

/// No equalities; `G` is the gradient of a random dense symmetric
/// polynomial of degree `d + 1`, so the system has degree `d`.
pub fn gen_s1(n: usize, d: u32, seed: u64) -> Result<SystemSpec, GenError> {
    check(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_symmetric(n, d + 1, &mut rng);
    let g = gradient_family(&f, n).expect("orbit sums are symmetric");
    Ok(SystemSpec::builder(n, 0)
        .source(format!("s1(n={n}, d={d}, seed={seed})"))
        .family(g, Relation::Ge)
        .build()
        .expect("generated system is valid"))
}

/// `k` random symmetric equalities of degree `d` and the family
/// `g_i = Σ_j s_j x_i^j` with random symmetric `s_j` of degree `d - j`.
pub fn gen_s2(n: usize, d: u32, k: usize, seed: u64) -> Result<SystemSpec, GenError> {
    check(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SystemSpec::builder(n, 0).source(format!("s2(n={n}, d={d}, k={k}, seed={seed})"));
    for _ in 0..k {
        b = b.equality(random_symmetric(n, d, &mut rng));
    }
    let jmax = d.min(n as u32 - 1);
    let s: Vec<Polynomial> = (0..=jmax).map(|j| random_symmetric(n, d - j, &mut rng)).collect();
    let comps = (0..n as u32)
        .map(|i| {
            let xi = Polynomial::var(i);
            let mut gi = Polynomial::zero();
            for (j, sj) in s.iter().enumerate() {
                gi += &(sj * &xi.pow(j as u32));
            }
            gi
        })
        .collect();
    let g = EquivariantFamily::new(n, comps).expect("equivariant by construction");
    Ok(b.family(g, Relation::Ge).build().expect("generated system is valid"))
}
