use super::PolyError;

/// A permutation of `{0, .., n-1}` stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, PolyError> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(PolyError::NotAPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Swaps `i` and `j` (zero-based).
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(i, j);
        Permutation(v)
    }

    /// The n-cycle `i -> i + 1 (mod n)`.
    pub fn cycle(n: usize) -> Self {
        Permutation((0..n).map(|i| (i + 1) % n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// Generators of the symmetric group: the transposition of the first two
    /// points and the full cycle.
    pub fn generators(n: usize) -> Vec<Permutation> {
        if n < 2 {
            return Vec::new();
        }
        vec![Permutation::transposition(n, 0, 1), Permutation::cycle(n)]
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut current: Option<Vec<usize>> = Some((0..n).collect());
        std::iter::from_fn(move || {
            let out = current.clone()?;
            let mut v = out.clone();
            current = if next_permutation(&mut v) { Some(v) } else { None };
            Some(Permutation(out))
        })
    }

    /// One-based cycle notation, e.g. `(1 2 3)`; identity prints as `()`.
    pub fn cycle_notation(&self) -> String {
        let mut seen = vec![false; self.0.len()];
        let mut out = String::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push((i + 1).to_string());
                i = self.0[i];
            }
            out.push('(');
            out.push_str(&cyc.join(" "));
            out.push(')');
        }
        if out.is_empty() {
            "()".to_string()
        } else {
            out
        }
    }
}

/// Advances to the next lexicographic arrangement; false when `v` was the
/// last one. Works on multisets (repeated values are not revisited).
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every distinct arrangement of the multiset `exps`, in lexicographic order.
pub fn permutation_orbit<T: Ord + Clone>(exps: &[T]) -> Vec<Vec<T>> {
    let mut v = exps.to_vec();
    v.sort();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}
