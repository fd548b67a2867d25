use super::{Interval, Polynomial};

/// A polynomial flattened for repeated interval evaluation: coefficients are
/// pre-rounded to enclosing intervals and powers are cached per variable.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    vars: Vec<u32>,
    max_exp: Vec<u32>,
    // (coefficient enclosure, (slot in `vars`, exponent) pairs)
    terms: Vec<(Interval, Vec<(usize, u32)>)>,
    coeff_f64: Vec<f64>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let vars = p.vars();
        let mut max_exp = vec![0u32; vars.len()];
        let mut terms = Vec::with_capacity(p.num_terms());
        let mut coeff_f64 = Vec::with_capacity(p.num_terms());
        for (m, c) in p.terms() {
            let pairs: Vec<(usize, u32)> = m
                .pairs()
                .iter()
                .map(|&(v, e)| {
                    let slot = vars.binary_search(&v).expect("variable listed");
                    max_exp[slot] = max_exp[slot].max(e);
                    (slot, e)
                })
                .collect();
            let iv = Interval::from_rational(c);
            coeff_f64.push(iv.mid());
            terms.push((iv, pairs));
        }
        CompiledPoly { vars, max_exp, terms, coeff_f64 }
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Enclosure of the range over `bx`, indexed by variable.
    pub fn eval(&self, bx: &[Interval]) -> Interval {
        let powers: Vec<Vec<Interval>> = self
            .vars
            .iter()
            .zip(&self.max_exp)
            .map(|(&v, &k)| {
                let x = bx[v as usize];
                (0..=k).map(|e| x.powi(e)).collect()
            })
            .collect();
        let mut acc = Interval::zero();
        for (c, pairs) in &self.terms {
            let mut t = *c;
            for &(slot, e) in pairs {
                t = t * powers[slot][e as usize];
            }
            acc = acc + t;
        }
        acc
    }

    /// Plain floating point value (no rounding control).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((_, pairs), c) in self.terms.iter().zip(&self.coeff_f64) {
            let mut t = *c;
            for &(slot, e) in pairs {
                t *= point[self.vars[slot] as usize].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// `Σ |c| Π |x_v|^e`, the scale against which `eval_f64` errors are
    /// measured.
    pub fn eval_abs_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((_, pairs), c) in self.terms.iter().zip(&self.coeff_f64) {
            let mut t = c.abs();
            for &(slot, e) in pairs {
                t *= point[self.vars[slot] as usize].abs().powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, Polynomial};

    #[test]
    fn square_on_symmetric_box() {
        let p = Polynomial::var(0).pow(2);
        let r = p.evaluate_interval(&[Interval::new(-1.0, 1.0)]);
        assert!(r.lo <= 0.0 && r.hi >= 1.0);
    }

    #[test]
    fn shifted_identity() {
        let p = &Polynomial::var(0) + &Polynomial::one();
        let r = p.evaluate_interval(&[Interval::new(0.0, 1.0)]);
        assert_eq!(r, Interval::new(1.0, 2.0));
    }

    #[test]
    fn near_sqrt_two() {
        let p = &Polynomial::var(0).pow(2) - &Polynomial::constant(int(2));
        let r = p.evaluate_interval(&[Interval::new(1.4, 1.5)]);
        // exact range is [1.4^2 - 2, 1.5^2 - 2] = [-0.04, 0.25]
        assert!(r.lo <= -0.04 + 1e-15 && r.hi >= 0.25);
        assert!(r.lo > -0.05 && r.hi < 0.26);
    }
}
