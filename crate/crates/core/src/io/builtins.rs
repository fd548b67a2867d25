//! Named example systems.

use thiserror::Error;

use crate::feasibility::Relation;
use crate::poly::{rat, Polynomial};
use crate::reduction::SystemSpec;
use crate::symmetry::{elementary_symmetric, power_sum, EquivariantFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuiltinError {
    #[error("unknown builtin {0:?} (expected swe, rom or orthant)")]
    Unknown(String),
    #[error("builtin systems need n >= 3 (got {0})")]
    TooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RomVariant {
    /// `Σ_{i<j} x_i (x_i^2 + x_j^2)`, which is not symmetric.
    #[default]
    Verbatim,
    /// `Σ_{i<j} x_i x_j (x_i^2 + x_j^2)`.
    Classical,
}

pub fn builtin_problem(name: &str, n: usize) -> Result<SystemSpec, BuiltinError> {
    match name {
        "swe" => swe(n),
        "rom" => rom(n, RomVariant::Verbatim),
        "orthant" => orthant(n),
        other => Err(BuiltinError::Unknown(other.to_string())),
    }
}

fn check(n: usize) -> Result<(), BuiltinError> {
    if n < 3 {
        Err(BuiltinError::TooSmall(n))
    } else {
        Ok(())
    }
}

/// `m_2 > m_1^2 (a+b)^2 / (4ab)` with `a = 1`, `b = 2`, and
/// `(b - x_i)(x_i - a) >= 0`.
pub fn swe(n: usize) -> Result<SystemSpec, BuiltinError> {
    check(n)?;
    let inv_n = rat(1, n as i64);
    let m1 = power_sum(1, n).scale(&inv_n);
    let m2 = power_sum(2, n).scale(&inv_n);
    let (a, b) = (Polynomial::from_int(1), Polynomial::from_int(2));
    let ratio = rat(9, 8);
    let x1 = Polynomial::var(0);
    let g = EquivariantFamily::from_template(n, &(&b - &x1) * &(&x1 - &a)).expect("box family is equivariant");
    Ok(SystemSpec::builder(n, 0)
        .source(format!("swe({n})"))
        .symmetric(&m2 - &m1.pow(2).scale(&ratio), Relation::Gt)
        .family(g, Relation::Ge)
        .build()
        .expect("valid system"))
}

/// `Σ_{i<j} x_i (x_i^2 + x_j^2) - (Σ x_i)^4 / 8 > 0` with every `x_i > 0`.
pub fn rom(n: usize, variant: RomVariant) -> Result<SystemSpec, BuiltinError> {
    check(n)?;
    let x = |i: usize| Polynomial::var(i as u32);
    let mut lhs = Polynomial::zero();
    for i in 0..n {
        for j in i + 1..n {
            let squares = &x(i).pow(2) + &x(j).pow(2);
            let weight = match variant {
                RomVariant::Verbatim => x(i),
                RomVariant::Classical => &x(i) * &x(j),
            };
            lhs += &(&weight * &squares);
        }
    }
    let f = &lhs - &power_sum(1, n).pow(4).scale(&rat(1, 8));
    let g = EquivariantFamily::from_template(n, x(0)).expect("coordinate family is equivariant");
    let b = SystemSpec::builder(n, 0).family(g, Relation::Gt);
    let b = match variant {
        RomVariant::Verbatim => b.source(format!("rom({n})")).general(f, Relation::Gt),
        RomVariant::Classical => b.source(format!("rom-classical({n})")).symmetric(f, Relation::Gt),
    };
    Ok(b.build().expect("valid system"))
}

/// `e_1 >= 0, .., e_n >= 0`.
pub fn orthant(n: usize) -> Result<SystemSpec, BuiltinError> {
    check(n)?;
    let mut b = SystemSpec::builder(n, 0).source(format!("orthant({n})"));
    for j in 1..=n {
        b = b.symmetric(elementary_symmetric(j, n).expect("j <= n"), Relation::Ge);
    }
    Ok(b.build().expect("valid system"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::distinct_coordinate_bound;
    use crate::symmetry::is_invariant;

    #[test]
    fn swe_shape() {
        let spec = swe(3).unwrap();
        assert_eq!(spec.symmetric().len(), 1);
        assert_eq!(spec.symmetric()[0].1, Relation::Gt);
        assert_eq!(spec.family().unwrap().0.components().len(), 3);
        assert_eq!(spec.d(), 2);
        assert_eq!(distinct_coordinate_bound(&spec).bound, 3);
        let spec = swe(6).unwrap();
        let h = distinct_coordinate_bound(&spec);
        assert_eq!((h.bound, h.degraded()), (3, false));
    }

    #[test]
    fn rom_shape() {
        let spec = rom(4, RomVariant::Verbatim).unwrap();
        assert_eq!(spec.general().len(), 1);
        assert_eq!(spec.general()[0].0.degree_where(|_| true), 4);
        assert!(!is_invariant(&spec.general()[0].0, 4));
        let (g, rel) = spec.family().unwrap();
        assert_eq!((g.components().len(), rel), (4, Relation::Gt));
        let spec = rom(4, RomVariant::Classical).unwrap();
        assert_eq!(spec.symmetric().len(), 1);
        assert_eq!(spec.d(), 4);
    }

    #[test]
    fn names() {
        assert!(builtin_problem("orthant", 3).is_ok());
        assert_eq!(builtin_problem("swe", 2), Err(BuiltinError::TooSmall(2)));
        assert!(matches!(builtin_problem("nope", 4), Err(BuiltinError::Unknown(_))));
    }
}
