//! Bitmask subsets of the message index range `1..=m`.
//!
//! Message `i` lives at bit `i - 1`. Every family of sets in the crate is kept
//! in [canonical order](canonical_cmp): by cardinality first, then
//! lexicographically on the ascending element lists.

use std::cmp::Ordering;
use std::fmt;

/// Largest supported message count; a set always fits one `u32`.
pub const MAX_MESSAGES: usize = 24;

/// A subset of `[1:m]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MessageSet(u32);

impl MessageSet {
    pub const EMPTY: MessageSet = MessageSet(0);

    /// Wraps a raw mask (bit `i - 1` for message `i`).
    #[inline]
    pub const fn from_bits(bits: u32) -> Self {
        MessageSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        self.0
    }

    /// `[1:m]`.
    #[inline]
    pub const fn full(m: usize) -> Self {
        if m >= 32 {
            MessageSet(u32::MAX)
        } else {
            MessageSet((1u32 << m) - 1)
        }
    }

    #[inline]
    pub const fn singleton(message: usize) -> Self {
        MessageSet(1 << (message - 1))
    }

    /// Builds a set from 1-based message indices. Indices must lie in `1..=32`.
    pub fn from_messages<I: IntoIterator<Item = usize>>(messages: I) -> Self {
        messages.into_iter().fold(Self::EMPTY, |acc, i| acc.with(i))
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn contains(self, message: usize) -> bool {
        message >= 1 && message <= 32 && self.0 & (1 << (message - 1)) != 0
    }

    #[inline]
    #[must_use]
    pub const fn with(self, message: usize) -> Self {
        MessageSet(self.0 | (1 << (message - 1)))
    }

    #[inline]
    #[must_use]
    pub const fn without(self, message: usize) -> Self {
        MessageSet(self.0 & !(1 << (message - 1)))
    }

    #[inline]
    pub const fn union(self, other: Self) -> Self {
        MessageSet(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: Self) -> Self {
        MessageSet(self.0 & other.0)
    }

    #[inline]
    pub const fn difference(self, other: Self) -> Self {
        MessageSet(self.0 & !other.0)
    }

    /// Complement within `[1:m]`.
    #[inline]
    pub const fn complement(self, m: usize) -> Self {
        MessageSet(!self.0 & Self::full(m).0)
    }

    #[inline]
    pub const fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub const fn is_strict_subset(self, other: Self) -> bool {
        self.is_subset(other) && self.0 != other.0
    }

    #[inline]
    pub const fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest message index present, or 0 for the empty set.
    #[inline]
    pub const fn max_message(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    /// Least message index present.
    #[inline]
    pub fn min_message(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Ascending 1-based message indices.
    pub fn iter(self) -> Messages {
        Messages(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self` (including `∅` and `self`), in decreasing numeric order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.0,
            next: Some(self.0),
        }
    }
}

impl fmt::Debug for MessageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for MessageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<usize> for MessageSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_messages(iter)
    }
}

impl IntoIterator for MessageSet {
    type Item = usize;
    type IntoIter = Messages;

    fn into_iter(self) -> Messages {
        self.iter()
    }
}

/// Iterator over the members of a [`MessageSet`].
#[derive(Clone)]
pub struct Messages(u32);

impl Iterator for Messages {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(i as usize + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Messages {}

/// Submask enumeration, `universe` down to `∅`.
pub struct Subsets {
    universe: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = MessageSet;

    #[inline]
    fn next(&mut self) -> Option<MessageSet> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.universe)
        };
        Some(MessageSet(cur))
    }
}

/// Canonical order: cardinality, then lexicographic on ascending element lists.
pub fn canonical_cmp(a: MessageSet, b: MessageSet) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let diff = a.0 ^ b.0;
        if diff == 0 {
            Ordering::Equal
        } else if a.0 & (diff & diff.wrapping_neg()) != 0 {
            // `a` holds the least element on which the two lists disagree.
            Ordering::Less
        } else {
            Ordering::Greater
        }
    })
}

/// Sorts a family into canonical order and removes duplicates.
pub fn normalize_family(family: &mut Vec<MessageSet>) {
    family.sort_by(|a, b| canonical_cmp(*a, *b));
    family.dedup();
}

/// Every subset of `[1:m]` of cardinality `k`, in canonical order.
pub fn subsets_of_size(m: usize, k: usize) -> impl Iterator<Item = MessageSet> {
    Combinations::new(m, k).map(|c| c.into_iter().map(|i| i + 1).collect())
}

/// All proper subsets of `[1:m]` in canonical order.
pub fn proper_subsets(m: usize) -> impl Iterator<Item = MessageSet> {
    (0..m).flat_map(move |k| subsets_of_size(m, k))
}

/// Lexicographic `k`-combinations of `0..n`.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let k = cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Binomial coefficient; saturates on overflow.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).unwrap_or(u64::MAX)
}
