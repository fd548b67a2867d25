//! Parameter-grid sampling of the projection onto the parameters.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::feasibility::{decide, SolveOptions, VerdictKind};
use crate::partition::Partition;
use crate::poly::{parse_rational, rational_serde, Rational};
use crate::reduction::{qe_decompose, solve_decomposed, ReductionError, SystemSpec};

/// Values `lo, lo + step, ..` up to `hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridAxis {
    #[serde(with = "rational_serde")]
    pub lo: Rational,
    #[serde(with = "rational_serde")]
    pub hi: Rational,
    #[serde(with = "rational_serde")]
    pub step: Rational,
}

impl GridAxis {
    pub fn values(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut v = self.lo.clone();
        while v <= self.hi {
            out.push(v.clone());
            v += &self.step;
        }
        out
    }
}

/// Parses `lo:hi:step` per parameter, comma separated, each optionally
/// prefixed by `y<j>=`.
pub fn parse_grid(text: &str, t: usize) -> Result<Vec<GridAxis>, String> {
    let mut axes = Vec::new();
    for (j, item) in text.split(',').enumerate() {
        let body = match item.split_once('=') {
            Some((name, body)) => {
                if name.trim() != format!("y{}", j + 1) {
                    return Err(format!("grid axis {} must be named y{}", j + 1, j + 1));
                }
                body
            }
            None => item,
        };
        let parts: Vec<&str> = body.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("grid axis {:?} must have the form lo:hi:step", item.trim()));
        };
        let num = |s: &str| parse_rational(s).ok_or_else(|| format!("bad number {:?} in grid", s.trim()));
        let axis = GridAxis { lo: num(lo)?, hi: num(hi)?, step: num(step)? };
        if !axis.step.is_positive() || axis.hi < axis.lo {
            return Err(format!("grid axis {:?} needs lo <= hi and a positive step", item.trim()));
        }
        axes.push(axis);
    }
    if axes.len() != t {
        return Err(format!("grid has {} axes, system has {t} parameters", axes.len()));
    }
    Ok(axes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeRow {
    #[serde(with = "rational_serde::vec")]
    pub params: Vec<Rational>,
    /// Verdict on the union of reduced systems.
    pub decomposed: VerdictKind,
    pub partition: Option<Partition>,
    /// Verdict on the unreduced system, when requested.
    pub direct: Option<VerdictKind>,
}

impl QeRow {
    /// Both paths give the same verdict class (any Sat counts as Sat).
    pub fn agrees(&self) -> Option<bool> {
        self.direct.map(|d| class(d) == class(self.decomposed))
    }
}

fn class(k: VerdictKind) -> u8 {
    match k {
        VerdictKind::SatCertified | VerdictKind::SatNumeric => 0,
        VerdictKind::UnsatInBox => 1,
        VerdictKind::Unknown => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeTable {
    pub axes: Vec<GridAxis>,
    pub rows: Vec<QeRow>,
}

fn grid_points(axes: &[GridAxis]) -> Vec<Vec<Rational>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        let vals = axis.values();
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

/// Decides the decomposed system at every grid point, and the unreduced
/// system too when `direct` is set.
pub fn qe_sample(
    spec: &SystemSpec,
    axes: &[GridAxis],
    opts: &SolveOptions,
    jobs: usize,
    direct: bool,
) -> Result<QeTable, ReductionError> {
    let systems = qe_decompose(spec)?;
    if axes.len() != spec.t() {
        return Err(ReductionError::ParameterCount { expected: spec.t(), got: axes.len() });
    }
    let mut rows = Vec::new();
    for params in grid_points(axes) {
        let v = solve_decomposed(spec, &systems, &params, opts, jobs)?;
        let direct = if direct {
            let problem = spec.to_problem(&params)?;
            Some(decide(&problem, opts).map_err(ReductionError::Problem)?.kind)
        } else {
            None
        };
        rows.push(QeRow { params, decomposed: v.kind, partition: v.partition, direct });
    }
    Ok(QeTable { axes: axes.to_vec(), rows })
}

/// Formats a rational compactly: integers plainly, others as decimals when
/// exact, else as `p/q`.
pub fn format_value(r: &Rational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut den = r.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = num_bigint::BigInt::from(2);
    let five = num_bigint::BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != num_bigint::BigInt::from(1) {
        return r.to_string();
    }
    let digits = twos.max(fives);
    let scaled = (r * Rational::from_integer(num_bigint::BigInt::from(10).pow(digits))).to_integer();
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits as usize + 1);
    let (int_part, frac) = s.split_at(s.len() - digits as usize);
    format!("{}{int_part}.{frac}", if neg { "-" } else { "" })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_system;
    use crate::poly::{int, rat};

    #[test]
    fn grid_parsing() {
        let axes = parse_grid("-2:2:0.5", 1).unwrap();
        assert_eq!(axes[0].values().len(), 9);
        let axes = parse_grid("y1=0:1:1/3, y2=-1:-1:1", 2).unwrap();
        assert_eq!(axes[0].values(), vec![int(0), rat(1, 3), rat(2, 3), int(1)]);
        assert!(parse_grid("0:1", 1).is_err());
        assert!(parse_grid("0:1:0", 1).is_err());
        assert!(parse_grid("0:1:1", 2).is_err());
    }

    #[test]
    fn sphere_projection() {
        let spec = parse_system("n = 4\nparams = 1\nsym: p2 - y1 = 0").unwrap();
        let axes = parse_grid("-2:2:0.5", 1).unwrap();
        let table = qe_sample(&spec, &axes, &SolveOptions::default(), 2, true).unwrap();
        for row in &table.rows {
            let feasible = row.params[0] >= int(0);
            assert_eq!(row.decomposed.is_sat(), feasible, "{row:?}");
            assert_eq!(row.agrees(), Some(true), "{row:?}");
        }
    }

    #[test]
    fn values_print_compactly() {
        assert_eq!(format_value(&rat(-1, 4)), "-0.25");
        assert_eq!(format_value(&rat(3, 2)), "1.5");
        assert_eq!(format_value(&int(-2)), "-2");
        assert_eq!(format_value(&rat(1, 3)), "1/3");
    }
}
