//! Exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::poly::Rational;

/// Solves `A X = B` for every column of `B` by Gauss-Jordan elimination.
/// Free variables are set to zero. Returns `None` when some column is
/// inconsistent.
pub fn solve_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let rhs = b.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for v in a[r].iter_mut().chain(b[r].iter_mut()) {
            *v *= &inv;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let factor = a[i][c].clone();
            for k in c..cols {
                let t = &factor * &a[r][k];
                a[i][k] -= t;
            }
            for k in 0..rhs {
                let t = &factor * &b[r][k];
                b[i][k] -= t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|row| row.iter().any(|v| !v.is_zero())) {
        return None;
    }
    let mut x = vec![vec![Rational::zero(); rhs]; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn two_by_two() {
        // x + y = 3, x - y = 1
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let b = vec![vec![int(3)], vec![int(1)]];
        let x = solve_exact(a, b).unwrap();
        assert_eq!(x, vec![vec![int(2)], vec![int(1)]]);
    }

    #[test]
    fn overdetermined_consistent_and_not() {
        let a = vec![vec![int(2)], vec![int(4)]];
        assert_eq!(solve_exact(a.clone(), vec![vec![int(1)], vec![int(2)]]).unwrap(), vec![vec![rat(1, 2)]]);
        assert!(solve_exact(a, vec![vec![int(1)], vec![int(3)]]).is_none());
    }
}
