//! Pliable-index-coding instances described by their absent receivers, plus
//! generators for the nested families.

use std::fmt;

use thiserror::Error;

use crate::set::{canonical_cmp, normalize_family, proper_subsets, MessageSet, MAX_MESSAGES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("message count {0} outside the supported range 2..=24")]
    MessageCount(usize),
    #[error("receiver {0} listed more than once")]
    DuplicateReceiver(MessageSet),
    #[error("the full message set cannot be a receiver")]
    FullSetListed,
    #[error("message index {index} outside 1..={m}")]
    MessageIndexOutOfRange { index: usize, m: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(&'static str),
    #[error("truncation level {t} must be at most L - 1 = {max}")]
    TOutOfRange { t: usize, max: usize },
    #[error("part index set {0} must be a strict subset of [1:L]")]
    QNotProper(MessageSet),
    #[error("{htilde} is not a strict subset of {h}")]
    HtildeNotStrictSubset { htilde: MessageSet, h: MessageSet },
    #[error("{0} is already absent in the perfectly nested family")]
    HtildeAlreadyAbsent(MessageSet),
}

/// Fixed-size bit table over all `2^m` subsets.
#[derive(Clone, PartialEq, Eq)]
struct SetTable(Vec<u64>);

impl SetTable {
    fn new(m: usize) -> Self {
        SetTable(vec![0; (1usize << m).div_ceil(64)])
    }

    #[inline]
    fn get(&self, s: MessageSet) -> bool {
        let b = s.bits() as usize;
        self.0[b >> 6] >> (b & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, s: MessageSet) {
        let b = s.bits() as usize;
        self.0[b >> 6] |= 1 << (b & 63);
    }
}

/// A pliable-index-coding instance `P_{m,U}`.
///
/// Receivers are identified by their side-information sets. The instance
/// stores the absent family; every other proper subset of `[1:m]` is present.
#[derive(Clone, PartialEq, Eq)]
pub struct PicInstance {
    m: usize,
    absent: Vec<MessageSet>,
    table: SetTable,
}

impl fmt::Debug for PicInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PicInstance")
            .field("m", &self.m)
            .field("absent", &self.absent)
            .finish()
    }
}

fn check_m(m: usize) -> Result<(), InstanceError> {
    if (2..=MAX_MESSAGES).contains(&m) {
        Ok(())
    } else {
        Err(InstanceError::MessageCount(m))
    }
}

fn check_receiver(m: usize, s: MessageSet) -> Result<(), InstanceError> {
    if s.max_message() > m {
        return Err(InstanceError::MessageIndexOutOfRange {
            index: s.max_message(),
            m,
        });
    }
    if s == MessageSet::full(m) {
        return Err(InstanceError::FullSetListed);
    }
    Ok(())
}

impl PicInstance {
    /// Builds an instance from its absent receivers.
    pub fn from_absent<I>(m: usize, absent: I) -> Result<Self, InstanceError>
    where
        I: IntoIterator<Item = MessageSet>,
    {
        check_m(m)?;
        let mut table = SetTable::new(m);
        let mut family = Vec::new();
        for s in absent {
            check_receiver(m, s)?;
            if table.get(s) {
                return Err(InstanceError::DuplicateReceiver(s));
            }
            table.set(s);
            family.push(s);
        }
        normalize_family(&mut family);
        Ok(PicInstance {
            m,
            absent: family,
            table,
        })
    }

    /// Builds an instance from its present receivers.
    pub fn from_present<I>(m: usize, present: I) -> Result<Self, InstanceError>
    where
        I: IntoIterator<Item = MessageSet>,
    {
        check_m(m)?;
        let mut seen = SetTable::new(m);
        for s in present {
            check_receiver(m, s)?;
            if seen.get(s) {
                return Err(InstanceError::DuplicateReceiver(s));
            }
            seen.set(s);
        }
        Self::from_absent(m, proper_subsets(m).filter(|s| !seen.get(*s)))
    }

    /// Instance with every receiver present.
    pub fn full_present(m: usize) -> Result<Self, InstanceError> {
        Self::from_absent(m, [])
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn full(&self) -> MessageSet {
        MessageSet::full(self.m)
    }

    /// Absent family, canonical order.
    #[inline]
    pub fn absent(&self) -> &[MessageSet] {
        &self.absent
    }

    #[inline]
    pub fn is_absent(&self, s: MessageSet) -> bool {
        self.table.get(s)
    }

    /// True for proper subsets of `[1:m]` that are not absent.
    #[inline]
    pub fn is_present(&self, s: MessageSet) -> bool {
        s.is_strict_subset(self.full()) && !self.table.get(s)
    }

    /// Present receivers in canonical order.
    pub fn present_iter(&self) -> impl Iterator<Item = MessageSet> + '_ {
        proper_subsets(self.m).filter(move |s| !self.table.get(*s))
    }

    pub fn present(&self) -> Vec<MessageSet> {
        self.present_iter().collect()
    }

    pub fn present_count(&self) -> usize {
        (1usize << self.m) - 1 - self.absent.len()
    }

    /// Union of all absent receivers.
    pub fn absent_union(&self) -> MessageSet {
        self.absent
            .iter()
            .fold(MessageSet::EMPTY, |acc, s| acc.union(*s))
    }

    /// Copy of this instance with `s` made present.
    pub fn with_present(&self, s: MessageSet) -> Self {
        Self::from_absent(self.m, self.absent.iter().copied().filter(|h| *h != s))
            .expect("subfamily of a valid family")
    }
}

/// An ordered partition `P_0, P_1, …, P_L` of `[1:m]` where only `P_0` may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<MessageSet>,
    m: usize,
}

impl Partition {
    /// `parts[0]` is `P_0`. Needs `L >= 1` and the parts must tile `[1:m]`.
    pub fn new(parts: Vec<MessageSet>) -> Result<Self, InstanceError> {
        if parts.len() < 2 {
            return Err(InstanceError::InvalidPartition(
                "needs P_0 and at least one more part",
            ));
        }
        let mut union = MessageSet::EMPTY;
        for (i, p) in parts.iter().enumerate() {
            if i > 0 && p.is_empty() {
                return Err(InstanceError::InvalidPartition("only P_0 may be empty"));
            }
            if !union.is_disjoint(*p) {
                return Err(InstanceError::InvalidPartition("parts overlap"));
            }
            union = union.union(*p);
        }
        let m = union.max_message();
        if union != MessageSet::full(m) {
            return Err(InstanceError::InvalidPartition("parts do not cover [1:m]"));
        }
        check_m(m)?;
        Ok(Partition { parts, m })
    }

    pub fn from_lists(parts: &[&[usize]]) -> Result<Self, InstanceError> {
        Self::new(
            parts
                .iter()
                .map(|p| MessageSet::from_messages(p.iter().copied()))
                .collect(),
        )
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of non-base parts.
    #[inline]
    pub fn levels(&self) -> usize {
        self.parts.len() - 1
    }

    #[inline]
    pub fn base(&self) -> MessageSet {
        self.parts[0]
    }

    /// `P_i`, `i` in `0..=L`.
    #[inline]
    pub fn part(&self, i: usize) -> MessageSet {
        self.parts[i]
    }

    pub fn parts(&self) -> &[MessageSet] {
        &self.parts
    }

    /// All part indices `[1:L]` as an index set.
    pub fn all_levels(&self) -> MessageSet {
        MessageSet::full(self.levels())
    }

    /// `H_Q = P_0 ∪ ⋃_{i∈Q} P_i` for an index set `Q ⊆ [1:L]`.
    pub fn h_q(&self, q: MessageSet) -> MessageSet {
        q.iter()
            .fold(self.base(), |acc, i| acc.union(self.parts[i]))
    }

    /// `H_Q` for every `Q ⊊ [1:L]` with `|Q| <= max_q`, canonical order.
    fn nested_family(&self, max_q: usize) -> Vec<MessageSet> {
        let l = self.levels();
        let mut family: Vec<MessageSet> = proper_subsets(l)
            .filter(|q| q.len() <= max_q)
            .map(|q| self.h_q(q))
            .collect();
        family.sort_by(|a, b| canonical_cmp(*a, *b));
        family
    }
}

/// Perfectly `L`-nested absent receivers: `{H_Q : Q ⊊ [1:L]}`.
pub fn generate_perfectly_nested(partition: &Partition) -> Result<PicInstance, InstanceError> {
    PicInstance::from_absent(partition.m(), partition.nested_family(partition.levels()))
}

/// `T`-truncated `L`-nested absent receivers: `{H_Q : |Q| <= T}`.
pub fn generate_truncated_nested(
    partition: &Partition,
    t: usize,
) -> Result<PicInstance, InstanceError> {
    let max = partition.levels() - 1;
    if t > max {
        return Err(InstanceError::TOutOfRange { t, max });
    }
    PicInstance::from_absent(partition.m(), partition.nested_family(t))
}

/// Perfectly nested family with `H_Q` replaced by a strict subset `htilde`.
pub fn generate_slightly_imperfect(
    partition: &Partition,
    q: MessageSet,
    htilde: MessageSet,
) -> Result<PicInstance, InstanceError> {
    if !q.is_strict_subset(partition.all_levels()) {
        return Err(InstanceError::QNotProper(q));
    }
    let h = partition.h_q(q);
    if !htilde.is_strict_subset(h) {
        return Err(InstanceError::HtildeNotStrictSubset { htilde, h });
    }
    let mut family = partition.nested_family(partition.levels());
    if family.contains(&htilde) {
        return Err(InstanceError::HtildeAlreadyAbsent(htilde));
    }
    family.retain(|s| *s != h);
    family.push(htilde);
    PicInstance::from_absent(partition.m(), family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::binomial;

    fn s(v: &[usize]) -> MessageSet {
        MessageSet::from_messages(v.iter().copied())
    }

    fn lists(family: &[MessageSet]) -> Vec<Vec<usize>> {
        family.iter().map(|x| x.to_vec()).collect()
    }

    #[test]
    fn example_one_present_family() {
        let inst = PicInstance::from_absent(3, [s(&[3]), s(&[1, 3])]).unwrap();
        assert_eq!(
            lists(&inst.present()),
            vec![vec![], vec![1], vec![2], vec![1, 2], vec![2, 3]]
        );
        assert!(inst.is_absent(s(&[1, 3])));
        assert!(!inst.is_present(inst.full()));
    }

    #[test]
    fn empty_absent_family() {
        let inst = PicInstance::from_absent(2, []).unwrap();
        assert_eq!(lists(&inst.present()), vec![vec![], vec![1], vec![2]]);
    }

    #[test]
    fn algorithm_walkthrough_instance_counts() {
        let inst = PicInstance::from_absent(6, [s(&[1, 2]), s(&[1, 2, 3, 4]), s(&[4, 5])]).unwrap();
        assert_eq!(inst.present_count(), 60);
        assert_eq!(inst.present().len(), 60);
    }

    #[test]
    fn from_absent_errors() {
        assert_eq!(
            PicInstance::from_absent(3, [s(&[1]), s(&[1])]),
            Err(InstanceError::DuplicateReceiver(s(&[1])))
        );
        assert_eq!(
            PicInstance::from_absent(3, [s(&[1, 2, 3])]),
            Err(InstanceError::FullSetListed)
        );
        assert_eq!(
            PicInstance::from_absent(3, [s(&[4])]),
            Err(InstanceError::MessageIndexOutOfRange { index: 4, m: 3 })
        );
        assert_eq!(
            PicInstance::from_absent(1, []),
            Err(InstanceError::MessageCount(1))
        );
    }

    #[test]
    fn from_present_round_trip() {
        let inst = PicInstance::from_absent(4, [s(&[1]), s(&[2, 3])]).unwrap();
        let back = PicInstance::from_present(4, inst.present()).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn perfectly_nested_generator() {
        let p = Partition::from_lists(&[&[3], &[1, 2], &[4, 5]]).unwrap();
        let inst = generate_perfectly_nested(&p).unwrap();
        assert_eq!(
            lists(inst.absent()),
            vec![vec![3], vec![1, 2, 3], vec![3, 4, 5]]
        );

        let p = Partition::from_lists(&[&[], &[1], &[2]]).unwrap();
        let inst = generate_perfectly_nested(&p).unwrap();
        assert_eq!(lists(inst.absent()), vec![vec![], vec![1], vec![2]]);

        let p = Partition::from_lists(&[&[1], &[2, 3], &[4, 5], &[6, 7]]).unwrap();
        assert_eq!(generate_perfectly_nested(&p).unwrap().absent().len(), 7);
    }

    #[test]
    fn truncated_generator() {
        let p = Partition::from_lists(&[&[1], &[2, 3], &[4, 5], &[6, 7]]).unwrap();
        let inst = generate_truncated_nested(&p, 1).unwrap();
        assert_eq!(inst.absent().len(), 4);
        assert_eq!(
            generate_truncated_nested(&p, 2).unwrap(),
            generate_perfectly_nested(&p).unwrap()
        );
        assert_eq!(
            generate_truncated_nested(&p, 3),
            Err(InstanceError::TOutOfRange { t: 3, max: 2 })
        );

        let p = Partition::from_lists(&[&[3], &[1, 2], &[4, 5]]).unwrap();
        let inst = generate_truncated_nested(&p, 0).unwrap();
        assert_eq!(lists(inst.absent()), vec![vec![3]]);
    }

    #[test]
    fn truncated_counts_are_binomial_sums() {
        let p = Partition::from_lists(&[&[], &[1], &[2], &[3], &[4], &[5, 6]]).unwrap();
        for t in 0..5 {
            let expected: u64 = (0..=t).map(|i| binomial(5, i)).sum();
            assert_eq!(
                generate_truncated_nested(&p, t).unwrap().absent().len() as u64,
                expected
            );
        }
    }

    #[test]
    fn slightly_imperfect_generator() {
        let p = Partition::from_lists(&[&[3, 4], &[1, 2], &[5, 6]]).unwrap();
        let inst = generate_slightly_imperfect(&p, MessageSet::EMPTY, s(&[3])).unwrap();
        assert_eq!(
            lists(inst.absent()),
            vec![vec![3], vec![1, 2, 3, 4], vec![3, 4, 5, 6]]
        );
        // Minimal perturbation: drop one element of H_Q.
        let h = p.h_q(s(&[1]));
        let inst = generate_slightly_imperfect(&p, s(&[1]), h.without(1)).unwrap();
        assert_eq!(inst.absent().len(), 3);

        assert_eq!(
            generate_slightly_imperfect(&p, s(&[1, 2]), s(&[3])),
            Err(InstanceError::QNotProper(s(&[1, 2])))
        );
        assert!(matches!(
            generate_slightly_imperfect(&p, MessageSet::EMPTY, s(&[1])),
            Err(InstanceError::HtildeNotStrictSubset { .. })
        ));
    }

    #[test]
    fn seven_message_slightly_imperfect() {
        let p = Partition::from_lists(&[&[1], &[2, 3], &[4, 5], &[6, 7]]).unwrap();
        let inst = generate_slightly_imperfect(&p, s(&[1]), s(&[1, 2])).unwrap();
        assert_eq!(inst.absent().len(), 7);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_lists(&[&[1]]).is_err());
        assert!(Partition::from_lists(&[&[1], &[]]).is_err());
        assert!(Partition::from_lists(&[&[1], &[1, 2]]).is_err());
        assert!(Partition::from_lists(&[&[1], &[3]]).is_err());
        assert!(Partition::from_lists(&[&[], &[1, 2]]).is_ok());
    }
}
