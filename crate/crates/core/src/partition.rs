//! Integer partitions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A partition of `n` stored with nondecreasing parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Sorts the parts; rejects zero parts and the empty partition.
    pub fn new(mut parts: Vec<u32>) -> Option<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return None;
        }
        parts.sort_unstable();
        Some(Partition(parts))
    }

    pub fn trivial(n: u32) -> Self {
        Partition(vec![n])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Block index of each of the `n` coordinates, blocks laid out
    /// consecutively in part order.
    pub fn block_of_coordinates(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(b, &len)| std::iter::repeat_n(b, len as usize)).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Partitions of `n` into exactly `q` parts, each at least `min`, in
/// lexicographic order of the nondecreasing part vectors.
fn exact_parts(n: u32, q: u32, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if q == 0 {
        if n == 0 {
            out.push(Partition(prefix.clone()));
        }
        return;
    }
    if q == 1 {
        if n >= min {
            prefix.push(n);
            out.push(Partition(prefix.clone()));
            prefix.pop();
        }
        return;
    }
    let mut part = min;
    while part * q <= n {
        prefix.push(part);
        exact_parts(n - part, q - 1, part, prefix, out);
        prefix.pop();
        part += 1;
    }
}

/// Partitions of `n` into exactly `q` parts.
pub fn partitions_exact(n: u32, q: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    if q >= 1 && q <= n {
        exact_parts(n, q, 1, &mut Vec::new(), &mut out);
    }
    out
}

/// All partitions of `n` with at most `r` parts, ordered by part count and
/// then lexicographically; `[n]` comes first.
pub fn partitions_up_to(n: u32, r: u32) -> Vec<Partition> {
    (1..=r.min(n)).flat_map(|q| partitions_exact(n, q)).collect()
}

/// Number of partitions of `n` into exactly `r` parts, via
/// `p(n, r) = p(n-1, r-1) + p(n-r, r)`.
pub fn partition_count(n: u32, r: u32) -> u128 {
    if r == 0 {
        return u128::from(n == 0);
    }
    if r > n {
        return 0;
    }
    let (n, r) = (n as usize, r as usize);
    // table[m][k] = p(m, k)
    let mut table = vec![vec![0u128; r + 1]; n + 1];
    table[0][0] = 1;
    for m in 1..=n {
        for k in 1..=r.min(m) {
            table[m][k] = table[m - 1][k - 1] + table[m - k][k];
        }
    }
    table[n][r]
}

/// Descending partitions of `k` with at most `max_parts` parts, all sizes.
pub(crate) fn descending_partitions(k: u32, max_parts: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    partitions_up_to(k, max_parts as u32).into_iter().map(|p| p.0.into_iter().rev().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(list: &[Partition]) -> Vec<Vec<u32>> {
        list.iter().map(|p| p.parts().to_vec()).collect()
    }

    #[test]
    fn five_into_three() {
        assert_eq!(parts(&partitions_up_to(5, 3)), vec![vec![5], vec![1, 4], vec![2, 3], vec![1, 1, 3], vec![1, 2, 2]]);
        assert_eq!(parts(&partitions_up_to(4, 1)), vec![vec![4]]);
        assert_eq!(parts(&partitions_up_to(3, 3)), vec![vec![3], vec![1, 2], vec![1, 1, 1]]);
    }

    #[test]
    fn counts() {
        for n in 1..=30 {
            assert_eq!(partition_count(n, n), 1);
            assert_eq!(partition_count(n, 1), 1);
        }
        assert_eq!(partition_count(5, 2), 2);
        assert_eq!(partition_count(4, 5), 0);
        assert_eq!(partition_count(0, 0), 1);
    }

    #[test]
    fn blocks() {
        let p = Partition::new(vec![3, 1]).unwrap();
        assert_eq!(p.parts(), &[1, 3]);
        assert_eq!(p.block_of_coordinates(), vec![0, 1, 1, 1]);
        assert_eq!(p.to_string(), "[1,3]");
        assert!(Partition::new(vec![0, 2]).is_none());
    }
}
