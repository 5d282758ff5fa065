use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

/// Largest spacetime dimension the engine supports.
pub const MAX_DIM: usize = 4;

/// Unordered (symmetric) multi-index of coordinate indices.
///
/// Stored as occurrence counts per coordinate, so two spellings of the same
/// multiset are the same value. Ordering is by length first, then
/// lexicographic on the sorted entries.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    counts: [u8; MAX_DIM],
}

impl MultiIndex {
    pub const fn empty() -> Self {
        MultiIndex { counts: [0; MAX_DIM] }
    }

    pub fn single(mu: usize) -> Self {
        let mut m = Self::empty();
        m.counts[mu] = 1;
        m
    }

    /// Builds a multi-index from a list of coordinate indices in any order.
    pub fn from_entries(entries: &[usize]) -> Self {
        let mut m = Self::empty();
        for &e in entries {
            assert!(e < MAX_DIM, "coordinate index {e} exceeds engine limit");
            m.counts[e] += 1;
        }
        m
    }

    pub fn from_counts(counts: [u8; MAX_DIM]) -> Self {
        MultiIndex { counts }
    }

    pub fn counts(&self) -> [u8; MAX_DIM] {
        self.counts
    }

    pub fn count(&self, mu: usize) -> u8 {
        self.counts[mu]
    }

    /// |μ|, the number of entries.
    pub fn len(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Sorted entries μ₁ ≤ … ≤ μ_l.
    pub fn entries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for (mu, &c) in self.counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(mu, c as usize));
        }
        out
    }

    pub fn raised(&self, mu: usize) -> Self {
        let mut m = *self;
        m.counts[mu] += 1;
        m
    }

    pub fn lowered(&self, mu: usize) -> Option<Self> {
        if self.counts[mu] == 0 {
            return None;
        }
        let mut m = *self;
        m.counts[mu] -= 1;
        Some(m)
    }

    /// Largest coordinate index occurring in the multi-index.
    pub fn max_entry(&self) -> Option<usize> {
        (0..MAX_DIM).rev().find(|&mu| self.counts[mu] > 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = *self;
        for mu in 0..MAX_DIM {
            m.counts[mu] += other.counts[mu];
        }
        m
    }

    /// `self − other` when `other` is a sub-multiset.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut m = *self;
        for mu in 0..MAX_DIM {
            m.counts[mu] = self.counts[mu].checked_sub(other.counts[mu])?;
        }
        Some(m)
    }

    pub fn contains(&self, other: &Self) -> bool {
        (0..MAX_DIM).all(|mu| self.counts[mu] >= other.counts[mu])
    }

    /// Every sub-multiset α ⊆ self together with the Leibniz multiplicity
    /// Π_μ C(self_μ, α_μ), i.e. ∂_(self)(gh) = Σ mult · ∂_(α)g · ∂_(self−α)h.
    pub fn splits(&self) -> Vec<(MultiIndex, BigInt)> {
        let mut out = vec![(MultiIndex::empty(), BigInt::one())];
        for mu in 0..MAX_DIM {
            let n = self.counts[mu];
            if n == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(out.len() * (n as usize + 1));
            for (alpha, mult) in &out {
                for k in 0..=n {
                    let mut a = *alpha;
                    a.counts[mu] = k;
                    next.push((a, mult * binomial(n as u64, k as u64)));
                }
            }
            out = next;
        }
        out
    }

    /// All multi-indices over `dim` coordinates with length ≤ `max_len`,
    /// in ascending order.
    pub fn all_up_to(dim: usize, max_len: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        let mut frontier = vec![MultiIndex::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for m in &frontier {
                let start = m.max_entry().unwrap_or(0);
                for mu in start..dim {
                    next.push(m.raised(mu));
                }
            }
            out.extend(next.iter().copied());
            frontier = next;
        }
        out.sort();
        out.dedup();
        out
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            // Lexicographic order of sorted entries equals descending order of
            // the count vector.
            for mu in 0..MAX_DIM {
                match other.counts[mu].cmp(&self.counts[mu]) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_length_then_lex() {
        let a = MultiIndex::from_entries(&[0, 1]);
        let b = MultiIndex::from_entries(&[1, 1]);
        let c = MultiIndex::from_entries(&[0, 0]);
        let d = MultiIndex::from_entries(&[2]);
        assert!(c < a && a < b);
        assert!(d < c);
        assert_eq!(MultiIndex::from_entries(&[1, 0]), a);
    }

    #[test]
    fn splits_carry_binomial_weights() {
        let m = MultiIndex::from_entries(&[0, 0, 1]);
        let splits = m.splits();
        assert_eq!(splits.len(), 6);
        let total: BigInt = splits.iter().map(|(_, w)| w.clone()).sum();
        // Σ over splits of Π C(n_μ, k_μ) = 2^|μ|
        assert_eq!(total, BigInt::from(8));
    }

    #[test]
    fn enumerates_bounded_indices() {
        let all = MultiIndex::all_up_to(2, 2);
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }
}
