//! Closed intervals over `f64` with outward rounding.
//!
//! Rounding direction is emulated: each operation computes the
//! round-to-nearest result together with its exact error (TwoSum for
//! addition, FMA for multiplication) and steps one ulp outward only when the
//! result is inexact. Exact operations therefore stay exact, which matters
//! when an enclosure has to touch zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{rational_from_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "extended")]
    pub lo: f64,
    #[serde(with = "extended")]
    pub hi: f64,
}

/// Endpoints as JSON numbers, with infinities written as `"inf"`/`"-inf"`.
mod extended {
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            Err(serde::ser::Error::custom("interval endpoint is NaN"))
        } else {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(D::Error::custom(format!("bad interval endpoint {t:?}"))),
        }
    }
}

pub fn next_up(x: f64) -> f64 {
    x.next_up()
}

pub fn next_down(x: f64) -> f64 {
    x.next_down()
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        if a.is_finite() && b.is_finite() && s > 0.0 {
            return f64::MAX;
        }
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        next_down(s)
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        if a.is_finite() && b.is_finite() && s < 0.0 {
            return f64::MIN;
        }
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        next_up(s)
    } else {
        s
    }
}

// Products where one side is zero are exactly zero, including 0 * inf.
fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        if a.is_finite() && b.is_finite() && p > 0.0 {
            return f64::MAX;
        }
        return p;
    }
    if p.abs() < 1e-290 {
        return next_down(p);
    }
    if a.mul_add(b, -p) < 0.0 {
        next_down(p)
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        if a.is_finite() && b.is_finite() && p < 0.0 {
            return f64::MIN;
        }
        return p;
    }
    if p.abs() < 1e-290 {
        return next_up(p);
    }
    if a.mul_add(b, -p) > 0.0 {
        next_up(p)
    } else {
        p
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn entire() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn zero() -> Self {
        Interval::point(0.0)
    }

    /// Tightest float interval containing the rational.
    pub fn from_rational(r: &Rational) -> Self {
        let approx = r.to_f64().unwrap_or(0.0);
        if !approx.is_finite() {
            return if approx > 0.0 {
                Interval::new(f64::MAX, f64::INFINITY)
            } else {
                Interval::new(f64::NEG_INFINITY, f64::MIN)
            };
        }
        let mut lo = approx;
        let mut hi = approx;
        while lo.is_finite() && &rational_from_f64(lo) > r {
            lo = next_down(lo);
        }
        while hi.is_finite() && &rational_from_f64(hi) < r {
            hi = next_up(hi);
        }
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    /// A float strictly inside the interval when possible.
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return match (self.lo.is_finite(), self.hi.is_finite()) {
                (false, false) => 0.0,
                (true, false) => self.lo.max(0.0) * 2.0 + 1.0,
                (false, true) => self.hi.min(0.0) * 2.0 - 1.0,
                _ => unreachable!(),
            };
        }
        let m = self.lo + (self.hi - self.lo) / 2.0;
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else {
            self.lo / 2.0 + self.hi / 2.0
        }
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn contains_rational(&self, r: &Rational) -> bool {
        let lo_ok = !self.lo.is_finite() || &rational_from_f64(self.lo) <= r;
        let hi_ok = !self.hi.is_finite() || &rational_from_f64(self.hi) >= r;
        lo_ok && hi_ok
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn is_interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    /// Integer power with the even-power rule (an even power never dips
    /// below zero).
    pub fn powi(&self, e: u32) -> Interval {
        fn pow_down(x: f64, e: u32) -> f64 {
            (0..e).fold(1.0, |acc, _| mul_down(acc, x))
        }
        fn pow_up(x: f64, e: u32) -> f64 {
            (0..e).fold(1.0, |acc, _| mul_up(acc, x))
        }
        match e {
            0 => Interval::point(1.0),
            1 => *self,
            _ if self.lo >= 0.0 => Interval { lo: pow_down(self.lo, e), hi: pow_up(self.hi, e) },
            _ if self.hi <= 0.0 => {
                let (a, b) = (pow_down(-self.hi, e), pow_up(-self.lo, e));
                if e.is_multiple_of(2) {
                    Interval { lo: a, hi: b }
                } else {
                    Interval { lo: -b, hi: -a }
                }
            }
            _ if e.is_multiple_of(2) => Interval { lo: 0.0, hi: pow_up(self.mag(), e) },
            _ => Interval { lo: -pow_up(-self.lo, e), hi: pow_up(self.hi, e) },
        }
    }

    /// Division by an interval not containing zero.
    pub fn div(&self, rhs: &Interval) -> Option<Interval> {
        if rhs.contains_zero() {
            return None;
        }
        let recip_lo = 1.0 / rhs.hi;
        let recip_hi = 1.0 / rhs.lo;
        // 1/x is monotone decreasing on either sign; widen one ulp since the
        // quotient is generally inexact.
        let recip = Interval { lo: next_down(recip_lo), hi: next_up(recip_hi) };
        Some(*self * recip)
    }

    /// A float `r >= 0` with `r^k >= bound`, i.e. a rigorous upper bound on
    /// the real k-th root of a nonnegative bound.
    pub fn root_upper(bound: f64, k: u32) -> f64 {
        if bound <= 0.0 {
            return 0.0;
        }
        if !bound.is_finite() {
            return f64::INFINITY;
        }
        let mut r = bound.powf(1.0 / k as f64);
        r = next_up(r);
        while Interval::point(r).powi(k).lo < bound {
            r = next_up(r);
        }
        r
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // adding 0.0 turns -0 into 0
        write!(f, "[{}, {}]", self.lo + 0.0, self.hi + 0.0)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval { lo: add_down(self.lo, -rhs.hi), hi: add_up(self.hi, -rhs.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat;
    use super::*;

    #[test]
    fn exact_operations_stay_exact() {
        let a = Interval::point(1.5);
        let b = Interval::point(2.0);
        assert_eq!(a + b, Interval::point(3.5));
        assert_eq!(a * b, Interval::point(3.0));
        assert_eq!(a - a, Interval::point(0.0));
    }

    #[test]
    fn inexact_sum_is_widened() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a + b;
        let exact = rational_from_f64(0.1) + rational_from_f64(0.2);
        assert!(s.contains_rational(&exact));
        assert!(s.lo < s.hi);
    }

    #[test]
    fn rational_conversion_encloses() {
        for (p, q) in [(1, 3), (-2, 7), (5, 1), (22, 7)] {
            let r = rat(p, q);
            let iv = Interval::from_rational(&r);
            assert!(iv.contains_rational(&r));
            assert!(iv.hi - iv.lo <= 2.0 * f64::EPSILON * iv.mag());
        }
        assert!(Interval::from_rational(&rat(3, 4)).is_point());
    }

    #[test]
    fn even_power_is_nonnegative() {
        let x = Interval::new(-1.0, 1.0);
        assert_eq!(x.sqr(), Interval::new(0.0, 1.0));
        assert_eq!(Interval::new(-2.0, -1.0).powi(3), Interval::new(-8.0, -1.0));
        assert_eq!(Interval::new(-2.0, 1.0).powi(3), Interval::new(-8.0, 1.0));
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        let z = Interval::point(0.0);
        assert_eq!(z * Interval::entire(), Interval::point(0.0));
    }

    #[test]
    fn root_bound_is_rigorous() {
        let r = Interval::root_upper(2.0, 2);
        assert!(r * r >= 2.0);
        assert!(r - std::f64::consts::SQRT_2 < 1e-14);
    }

    #[test]
    fn json_keeps_infinite_endpoints() {
        let iv = Interval::new(f64::NEG_INFINITY, 2.5);
        let text = serde_json::to_string(&iv).unwrap();
        assert_eq!(text, r#"{"lo":"-inf","hi":2.5}"#);
        assert_eq!(serde_json::from_str::<Interval>(&text).unwrap(), iv);
    }
}
