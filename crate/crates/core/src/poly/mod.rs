//! Exact sparse multivariate polynomials over the rationals.
//!
//! Variables are plain `u32` indices. The solver uses disjoint index ranges
//! for the original coordinates, the block variables introduced by partition
//! substitution and the free parameters (see [`VarLayout`]).

mod compiled;
mod interval;
mod permutation;

pub use compiled::CompiledPoly;
pub use interval::{next_down, next_up, Interval};
pub use permutation::{next_permutation, permutation_orbit, Permutation};

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("point has {got} coordinates but the polynomial uses variable index {needed}")]
    DimensionMismatch { needed: usize, got: usize },
    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),
}

/// Index layout shared by a system and everything derived from it.
///
/// `x` variables occupy `[0, n)`, block variables `a` occupy `[n, 2n)` and
/// parameters `y` occupy `[2n, 2n + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarLayout {
    pub n: usize,
    pub t: usize,
}

impl VarLayout {
    pub fn new(n: usize, t: usize) -> Self {
        Self { n, t }
    }

    pub fn x(&self, i: usize) -> u32 {
        debug_assert!(i < self.n);
        i as u32
    }

    pub fn a(&self, i: usize) -> u32 {
        debug_assert!(i < self.n);
        (self.n + i) as u32
    }

    pub fn y(&self, j: usize) -> u32 {
        debug_assert!(j < self.t);
        (2 * self.n + j) as u32
    }

    pub fn is_x(&self, v: u32) -> bool {
        (v as usize) < self.n
    }

    pub fn is_a(&self, v: u32) -> bool {
        (self.n..2 * self.n).contains(&(v as usize))
    }

    pub fn is_y(&self, v: u32) -> bool {
        (v as usize) >= 2 * self.n
    }

    /// Total number of indices in the layout.
    pub fn width(&self) -> usize {
        2 * self.n + self.t
    }

    /// One-based display name (`x3`, `a1`, `y2`).
    pub fn name(&self, v: u32) -> String {
        let v = v as usize;
        if v < self.n {
            format!("x{}", v + 1)
        } else if v < 2 * self.n {
            format!("a{}", v - self.n + 1)
        } else {
            format!("y{}", v - 2 * self.n + 1)
        }
    }
}

/// A power product in canonical sparse form: `(variable, exponent)` pairs
/// sorted by variable, every exponent nonzero.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary pairs; zero exponents are dropped and
    /// repeated variables merged.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    /// Dense exponent vector for variables `[0, len)`; panics if another
    /// variable occurs.
    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (v as u32, e)).collect())
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// Degree counting only variables accepted by `pred`.
    pub fn degree_where(&self, pred: impl Fn(u32) -> bool) -> u32 {
        self.0.iter().filter(|&&(v, _)| pred(v)).map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: u32) -> u32 {
        match self.0.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => self.0[i].1,
            Err(_) => 0,
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        self.0.last().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Splits into the part accepted by `pred` and the rest.
    pub fn split(&self, pred: impl Fn(u32) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|&&(v, _)| pred(v));
        (Monomial(a), Monomial(b))
    }

    /// Applies a variable renaming; the map must be injective on the
    /// variables that occur.
    pub fn rename(&self, f: impl Fn(u32) -> u32) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|&(v, e)| (f(v), e)))
    }
}

/// Sparse polynomial with nonzero rational coefficients.
///
/// Equality and hashing depend on the term map only; `nvars` is a hint for
/// the ambient variable count.
#[derive(Clone, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
    nvars: usize,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Hash for Polynomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(|v| format!("v{v}")))
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: u32) -> Self {
        Self::monomial(Monomial::var(v), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.nvars = m.max_var().map_or(0, |v| v as usize + 1);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Declares the ambient variable count.
    pub fn with_nvars(mut self, nvars: usize) -> Self {
        self.nvars = nvars;
        self
    }

    pub fn nvars(&self) -> usize {
        self.nvars.max(self.max_var().map_or(0, |v| v as usize + 1))
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        if let Some(v) = m.max_var() {
            self.nvars = self.nvars.max(v as usize + 1);
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Degree counting only the variables accepted by `pred` (0 for zero).
    pub fn degree_where(&self, pred: impl Fn(u32) -> bool) -> u32 {
        self.terms.keys().map(|m| m.degree_where(&pred)).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: u32) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::max_var).max()
    }

    /// Sorted list of variables that occur.
    pub fn vars(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = self.terms.keys().flat_map(|m| m.pairs().iter().map(|&(v, _)| v)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn uses_only(&self, pred: impl Fn(u32) -> bool) -> bool {
        self.terms.keys().all(|m| m.pairs().iter().all(|&(v, _)| pred(v)))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero().with_nvars(self.nvars);
        }
        Polynomial { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(), nvars: self.nvars }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
            nvars: self.nvars.max(m.max_var().map_or(0, |v| v as usize + 1)),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Exact value at a rational point indexed by variable.
    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if let Some(v) = self.max_var() {
            if v as usize >= point.len() {
                return Err(PolyError::DimensionMismatch { needed: v as usize, got: point.len() });
            }
        }
        let mut cache: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.pairs() {
                let pw = cache.entry((v, e)).or_insert_with(|| num_traits::pow(point[v as usize].clone(), e as usize));
                t *= &*pw;
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Simultaneous substitution `v -> map(v)`; variables without an image
    /// are left unchanged.
    pub fn substitute(&self, map: &BTreeMap<u32, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        let mut pow_cache: BTreeMap<(u32, u32), Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = Polynomial::constant(c.clone());
            for &(v, e) in m.pairs() {
                match map.get(&v) {
                    Some(img) => {
                        let pw = pow_cache.entry((v, e)).or_insert_with(|| img.pow(e));
                        factor = &factor * &*pw;
                    }
                    None => kept.push((v, e)),
                }
            }
            let kept = Monomial::from_pairs(kept);
            for (fm, fc) in factor.terms {
                out.add_term(fm.mul(&kept), fc);
            }
        }
        out
    }

    /// Replaces variables by rational values (partial evaluation).
    pub fn instantiate(&self, values: &BTreeMap<u32, Rational>) -> Polynomial {
        let map = values.iter().map(|(&v, c)| (v, Polynomial::constant(c.clone()))).collect();
        self.substitute(&map)
    }

    /// Variable renaming (must be injective on occurring variables).
    pub fn rename(&self, f: impl Fn(u32) -> u32) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.rename(&f), c.clone())))
    }

    /// Relabels `x_i -> x_{sigma(i)}` for `i < sigma.len()`; higher indices
    /// are left untouched.
    pub fn apply_permutation(&self, sigma: &Permutation) -> Polynomial {
        let n = sigma.len() as u32;
        let out = self.rename(|v| if v < n { sigma.image(v as usize) as u32 } else { v });
        out.with_nvars(self.nvars)
    }

    pub fn derivative(&self, v: u32) -> Polynomial {
        let mut out = Polynomial::zero().with_nvars(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let lowered =
                Monomial::from_pairs(m.pairs().iter().map(|&(w, k)| if w == v { (w, k - 1) } else { (w, k) }));
            out.add_term(lowered, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Partial derivatives with respect to `x_0 .. x_{n-1}`.
    pub fn gradient(&self, n: usize) -> Vec<Polynomial> {
        (0..n as u32).map(|v| self.derivative(v)).collect()
    }

    /// Positive rational multiple with coprime integer coefficients.
    pub fn primitive_part(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
        }
        let factor = Rational::new(den, num.abs());
        self.scale(&factor)
    }

    /// Coefficients of a univariate polynomial in `v`, lowest degree first.
    /// Returns `None` if another variable occurs.
    pub fn univariate_coeffs(&self, v: u32) -> Option<Vec<Rational>> {
        if !self.uses_only(|w| w == v) {
            return None;
        }
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Rational::zero(); deg + 1];
        for (m, c) in &self.terms {
            out[m.exponent(v) as usize] = c.clone();
        }
        Some(out)
    }

    pub fn from_univariate(v: u32, coeffs: &[Rational]) -> Polynomial {
        Polynomial::from_terms(coeffs.iter().enumerate().map(|(k, c)| {
            let m = if k == 0 { Monomial::one() } else { Monomial(vec![(v, k as u32)]) };
            (m, c.clone())
        }))
    }

    /// Approximate floating point evaluation.
    pub fn evaluate_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for &(v, e) in m.pairs() {
                    t *= point[v as usize].powi(e as i32);
                }
                t
            })
            .sum()
    }

    /// Rigorous enclosure of the range over a box indexed by variable.
    pub fn evaluate_interval(&self, bx: &[Interval]) -> Interval {
        CompiledPoly::new(self).eval(bx)
    }

    /// Formats with a caller-supplied variable namer, e.g. `3/2*x1^2 - x2 + 1`.
    pub fn display_with<F: Fn(u32) -> String>(&self, name: F) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        // Higher-degree terms first reads more naturally.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| a.cmp(b)));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let factors: Vec<String> =
                m.pairs().iter().map(|&(v, e)| if e == 1 { name(v) } else { format!("{}^{}", name(v), e) }).collect();
            if factors.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }

    pub fn display(&self, layout: &VarLayout) -> String {
        self.display_with(|v| layout.name(v))
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
        self.nvars = self.nvars.max(rhs.nvars);
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
        self.nvars = self.nvars.max(rhs.nvars);
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= &rhs;
        self
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(), nvars: self.nvars }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out.nvars = out.nvars.max(self.nvars).max(rhs.nvars);
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().ok()?;
        let den: BigInt = b.trim().parse().ok()?;
        return (!den.is_zero()).then(|| Rational::new(num, den));
    }
    match s.split_once('.') {
        Some((whole, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let neg = whole.starts_with('-');
            let whole = whole.trim_start_matches(['-', '+']);
            if !whole.bytes().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
            let value = Rational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
            Some(if neg { -value } else { value })
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod rational_serde {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter().map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))).collect()
        }
    }

    pub mod opt_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
            let v = Option::<Vec<String>>::deserialize(d)?;
            v.map(|v| {
                v.iter()
                    .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}"))))
                    .collect()
            })
            .transpose()
        }
    }
}
