//! Small subsets of variable indices packed into a `u64` bitmask.

use std::fmt;

use serde::{Serialize, Serializer};

pub const MAX_VARS: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(i: usize) -> Self {
        Subset(1u64 << i)
    }

    pub fn from_indices(it: impl IntoIterator<Item = usize>) -> Self {
        Subset(it.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | 1u64 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1u64 << i))
    }

    pub fn union(self, o: Subset) -> Self {
        Subset(self.0 | o.0)
    }

    pub fn intersect(self, o: Subset) -> Self {
        Subset(self.0 & o.0)
    }

    pub fn minus(self, o: Subset) -> Self {
        Subset(self.0 & !o.0)
    }

    pub fn is_subset_of(self, o: Subset) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: Subset) -> bool {
        self.0 & o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        })
    }

    /// All subsets of `self`, starting from the empty set.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let c = cur?;
            cur = if c == full {
                None
            } else {
                Some((c.wrapping_sub(full)) & full)
            };
            Some(Subset(c))
        })
    }

    pub fn label(self) -> String {
        let parts: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Every subset of `[n]` with at most `k` elements, ordered by size then lexicographically.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<Subset> {
    assert!(n <= MAX_VARS, "at most {MAX_VARS} variables");
    let mut out = vec![Subset::EMPTY];
    for size in 1..=k.min(n) {
        combinations(n, size, |c| {
            out.push(Subset::from_indices(c.iter().copied()))
        });
    }
    out
}

/// Calls `f` on every `k`-combination of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Disjoint pairs `(P, E)` of subsets of `[n]` with `|P| + |E| <= level`.
pub fn disjoint_pairs(n: usize, level: usize) -> Vec<(Subset, Subset)> {
    let mut out = Vec::new();
    for u in subsets_up_to(n, level) {
        for p in u.subsets() {
            out.push((p, u.minus(p)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::binomial_u64;

    #[test]
    fn combination_counts() {
        let mut count = 0;
        combinations(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut first = Vec::new();
        combinations(4, 2, |c| first.push(c.to_vec()));
        assert_eq!(first[0], vec![0, 1]);
        assert_eq!(first[5], vec![2, 3]);
        let mut zero = 0;
        combinations(3, 0, |c| {
            assert!(c.is_empty());
            zero += 1
        });
        assert_eq!(zero, 1);
    }

    #[test]
    fn subset_enumeration() {
        let s = Subset::from_indices([1, 3, 4]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset_of(s)));
        assert_eq!(subsets_up_to(5, 2).len(), 1 + 5 + 10);
        let pairs = disjoint_pairs(4, 2);
        // sum over |U|<=2 of 2^|U|
        let expect: u64 = (0..=2).map(|k| binomial_u64(4, k) << k).sum();
        assert_eq!(pairs.len() as u64, expect);
        assert!(pairs.iter().all(|(p, e)| p.is_disjoint(*e)));
    }

    #[test]
    fn labels() {
        assert_eq!(Subset::EMPTY.label(), "{}");
        assert_eq!(Subset::from_indices([2, 0]).label(), "{0,2}");
    }
}
