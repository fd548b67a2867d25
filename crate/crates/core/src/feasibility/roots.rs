//! Exact real root isolation for univariate polynomials.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FeasibilityError;
use crate::poly::{rational_serde, Interval, Rational};

/// A closed interval with rational endpoints holding exactly one real root.
/// `lo == hi` means the root is the rational `lo`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootInterval {
    #[serde(with = "rational_serde")]
    pub lo: Rational,
    #[serde(with = "rational_serde")]
    pub hi: Rational,
}

impl RootInterval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// Outward float enclosure.
    pub fn enclosure(&self) -> Interval {
        Interval::new(Interval::from_rational(&self.lo).lo, Interval::from_rational(&self.hi).hi)
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub(crate) fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn sign_at(p: &[Rational], x: &Rational) -> i8 {
    let v = eval(p, x);
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn derivative(p: &[Rational]) -> Vec<Rational> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * Rational::from_integer(k.into())).collect()
}

/// Quotient and remainder of `a / b`, `b` nonzero.
fn div_rem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().expect("nonzero divisor").clone();
    let mut q = vec![Rational::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let factor = r.last().expect("nonempty") / &lead;
        for (k, c) in b.iter().enumerate() {
            r[shift + k] -= &factor * c;
        }
        q[shift] = factor;
        r.pop();
        r = trim(r);
    }
    (q, r)
}

fn monic(p: Vec<Rational>) -> Vec<Rational> {
    let lead = p.last().cloned().unwrap_or_else(Rational::one);
    p.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

/// `p / gcd(p, p')`: same real roots, all simple.
fn squarefree(p: &[Rational]) -> Vec<Rational> {
    let g = gcd(p, &derivative(p));
    if g.len() <= 1 {
        return p.to_vec();
    }
    div_rem(p, &g).0
}

fn integer_coefficients(p: &[Rational]) -> Vec<BigInt> {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|c| c / &g).collect()
}

fn divisors(v: &BigInt, limit: u64) -> Option<Vec<u64>> {
    let v = v.abs().to_u64()?;
    if v == 0 || v > limit {
        return None;
    }
    let mut out = Vec::new();
    let mut k = 1u64;
    while k * k <= v {
        if v % k == 0 {
            out.push(k);
            if k * k != v {
                out.push(v / k);
            }
        }
        k += 1;
    }
    Some(out)
}

/// Rational roots by the rational root theorem, when the extreme
/// coefficients are small enough to factor. The input is squarefree with a
/// nonzero constant term.
fn rational_roots(p: &[Rational]) -> Vec<Rational> {
    const LIMIT: u64 = 1 << 24;
    let ints = integer_coefficients(p);
    let (Some(num), Some(den)) = (divisors(&ints[0], LIMIT), divisors(ints.last().expect("nonconstant"), LIMIT)) else {
        return Vec::new();
    };
    let mut found = Vec::new();
    for &a in &num {
        for &b in &den {
            if a.gcd(&b) != 1 {
                continue;
            }
            for s in [1i64, -1] {
                let r = Rational::new(BigInt::from(a) * s, BigInt::from(b));
                if eval(p, &r).is_zero() {
                    found.push(r);
                }
            }
        }
    }
    found.sort();
    found
}

fn sign_variations(coeffs: &[Rational]) -> usize {
    let signs: Vec<bool> = coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Upper bound on the number of roots in the open interval `(a, b)`:
/// sign variations of `(x + 1)^n p((a x + b) / (x + 1))`.
fn descartes_bound(p: &[Rational], a: &Rational, b: &Rational) -> usize {
    let n = p.len() - 1;
    let lin = [b.clone(), a.clone()];
    let one_plus = [Rational::one(), Rational::one()];
    let mut out = vec![Rational::zero(); n + 1];
    for (k, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut term = vec![c.clone()];
        for _ in 0..k {
            term = poly_mul(&term, &lin);
        }
        for _ in k..n {
            term = poly_mul(&term, &one_plus);
        }
        for (i, t) in term.into_iter().enumerate() {
            out[i] += t;
        }
    }
    sign_variations(&out)
}

/// Isolates the roots of the squarefree `p` in the open interval `(a, b)`,
/// where `p(a), p(b)` are nonzero.
fn isolate_open(p: &[Rational], a: Rational, b: Rational, depth: u32, out: &mut Vec<RootInterval>) {
    match descartes_bound(p, &a, &b) {
        0 => {}
        1 => out.push(RootInterval { lo: a, hi: b }),
        _ => {
            assert!(depth < 4096, "root isolation did not terminate");
            let m = (&a + &b) / Rational::from_integer(2.into());
            let root_at_mid = eval(p, &m).is_zero();
            isolate_open(p, a, m.clone(), depth + 1, out);
            if root_at_mid {
                out.push(RootInterval { lo: m.clone(), hi: m.clone() });
            }
            isolate_open(p, m, b, depth + 1, out);
        }
    }
}

/// A power of two exceeding the modulus of every root (Cauchy bound).
fn root_bound(p: &[Rational]) -> Rational {
    let lead = p.last().expect("nonzero").abs();
    let max = p[..p.len() - 1].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero);
    let bound = Rational::one() + max;
    let mut b = Rational::one();
    while b <= bound {
        b *= Rational::from_integer(2.into());
    }
    b
}

/// Disjoint isolating intervals for the distinct real roots of `p` lying in
/// `[lo, hi]` (either end may be unbounded), sorted increasingly.
pub fn univariate_real_roots(
    p: &[Rational],
    lo: Option<&Rational>,
    hi: Option<&Rational>,
) -> Result<Vec<RootInterval>, FeasibilityError> {
    let p = trim(p.to_vec());
    if p.is_empty() {
        return Err(FeasibilityError::ZeroPolynomial);
    }
    if p.len() == 1 {
        return Ok(Vec::new());
    }
    let mut sf = monic(squarefree(&p));
    let mut exact = Vec::new();
    if sf[0].is_zero() {
        exact.push(Rational::zero());
        sf.remove(0);
    }
    if sf.len() > 1 {
        for r in rational_roots(&sf) {
            sf = div_rem(&sf, &[-r.clone(), Rational::one()]).0;
            exact.push(r);
        }
    }

    let bound = if sf.len() > 1 { root_bound(&sf) } else { Rational::one() };
    let a = lo.cloned().unwrap_or_else(|| -bound.clone()).max(-bound.clone());
    let b = hi.cloned().unwrap_or_else(|| bound.clone()).min(bound.clone());
    let mut out: Vec<RootInterval> = exact
        .into_iter()
        .filter(|r| lo.is_none_or(|l| r >= l) && hi.is_none_or(|h| r <= h))
        .map(|r| RootInterval { lo: r.clone(), hi: r })
        .collect();
    if sf.len() > 1 && a <= b {
        for end in [&a, &b] {
            if eval(&sf, end).is_zero() {
                out.push(RootInterval { lo: end.clone(), hi: end.clone() });
            }
        }
        if a < b {
            isolate_open(&sf, a, b, 0, &mut out);
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out.dedup();
    Ok(separate(&sf, out))
}

/// Shrinks neighbouring intervals until they are disjoint. Non-exact
/// intervals isolate roots of `sf`, the polynomial left after removing the
/// exact rational roots.
fn separate(sf: &[Rational], mut roots: Vec<RootInterval>) -> Vec<RootInterval> {
    for _ in 0..256 {
        let mut clash = None;
        for i in 0..roots.len().saturating_sub(1) {
            if roots[i].hi >= roots[i + 1].lo {
                clash = Some(i);
                break;
            }
        }
        let Some(i) = clash else { break };
        for k in [i, i + 1] {
            if !roots[k].is_exact() {
                roots[k] = refine(sf, &roots[k], 1);
            }
        }
    }
    roots
}

/// Halves a non-exact isolating interval `steps` times.
pub fn refine(p: &[Rational], root: &RootInterval, steps: u32) -> RootInterval {
    let mut r = root.clone();
    let sf = squarefree(&trim(p.to_vec()));
    for _ in 0..steps {
        if r.is_exact() {
            break;
        }
        let m = r.midpoint();
        let sm = sign_at(&sf, &m);
        if sm == 0 {
            return RootInterval { lo: m.clone(), hi: m };
        }
        let sl = sign_at(&sf, &r.lo);
        if sl == 0 {
            return RootInterval { lo: r.lo.clone(), hi: r.lo };
        }
        if sl != sm {
            r.hi = m;
        } else {
            r.lo = m;
        }
    }
    r
}

/// Refines until the float enclosure is at most `width` wide.
pub fn refine_to_width(p: &[Rational], root: &RootInterval, width: f64) -> RootInterval {
    let mut r = root.clone();
    for _ in 0..2048 {
        if r.is_exact() || r.enclosure().width() <= width {
            break;
        }
        r = refine(p, &r, 4);
    }
    r
}

/// Hull of `{u : p(u) rel 0}` as optional rational bounds (`None` means
/// unbounded), or `None` overall when the set is empty.
pub(crate) fn feasible_hull(p: &[Rational], rel: super::Relation) -> Option<(Option<Rational>, Option<Rational>)> {
    use super::Relation;
    let p = trim(p.to_vec());
    if p.is_empty() {
        return match rel {
            Relation::Gt => None,
            _ => Some((None, None)),
        };
    }
    let roots = univariate_real_roots(&p, None, None).expect("nonzero polynomial");
    let lead_positive = p.last().expect("nonzero").is_positive();
    let odd = (p.len() - 1) % 2 == 1;
    let left_sign_positive = lead_positive != odd;
    if roots.is_empty() {
        return match rel {
            Relation::Eq => None,
            _ if lead_positive => Some((None, None)),
            _ => None,
        };
    }
    if rel == Relation::Eq {
        return Some((Some(roots[0].lo.clone()), Some(roots[roots.len() - 1].hi.clone())));
    }
    // Sign of each gap region: gap 0 is left of the first root, gap t right
    // of the last.
    let t = roots.len();
    let mut positive = Vec::with_capacity(t + 1);
    positive.push(left_sign_positive);
    for i in 1..t {
        let m = (&roots[i - 1].hi + &roots[i].lo) / Rational::from_integer(2.into());
        positive.push(eval(&p, &m).is_positive());
    }
    positive.push(lead_positive);
    let lower = if positive[0] {
        None
    } else if rel == Relation::Ge {
        Some(roots[0].lo.clone())
    } else {
        let g = (1..=t).find(|&g| positive[g])?;
        Some(roots[g - 1].lo.clone())
    };
    let upper = if positive[t] {
        None
    } else if rel == Relation::Ge {
        Some(roots[t - 1].hi.clone())
    } else {
        let g = (0..t).rev().find(|&g| positive[g]).expect("some gap is positive");
        Some(roots[g].hi.clone())
    };
    Some((lower, upper))
}
