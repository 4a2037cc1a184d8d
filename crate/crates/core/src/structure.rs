//! Lower bounds read off the inclusion structure of the absent family.

use thiserror::Error;

use crate::chain::DecodingChoice;
use crate::instance::PicInstance;
use crate::set::{canonical_cmp, Combinations, MessageSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("chain length {l} outside [2:{max}]")]
    LOutOfRange { l: usize, max: usize },
    #[error("{0} is not an absent receiver")]
    ANotAbsent(MessageSet),
    #[error("look-ahead precondition violated: {0}")]
    PreconditionViolated(&'static str),
}

/// Absent receivers `H_1 ⊊ H_2 ⊊ … ⊊ H_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedChain {
    pub sets: Vec<MessageSet>,
}

impl NestedChain {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LongestChain {
    pub length: usize,
    pub witness: NestedChain,
}

/// Longest strictly increasing chain starting at each absent set (indexed like `inst.absent()`).
fn chain_lengths_upward(absent: &[MessageSet]) -> Vec<usize> {
    // Canonical order sorts by cardinality, so every strict superset comes later.
    let mut up = vec![1usize; absent.len()];
    for i in (0..absent.len()).rev() {
        for j in i + 1..absent.len() {
            if absent[i].is_strict_subset(absent[j]) {
                up[i] = up[i].max(1 + up[j]);
            }
        }
    }
    up
}

/// `L_max` together with the lexicographically least chain attaining it.
pub fn longest_nested_chain(inst: &PicInstance) -> LongestChain {
    let absent = inst.absent();
    let up = chain_lengths_upward(absent);
    let length = up.iter().copied().max().unwrap_or(0);
    let mut sets = Vec::with_capacity(length);
    let mut need = length;
    let mut last: Option<MessageSet> = None;
    for (i, &h) in absent.iter().enumerate() {
        if need == 0 {
            break;
        }
        if up[i] == need && last.is_none_or(|l| l.is_strict_subset(h)) {
            sets.push(h);
            last = Some(h);
            need -= 1;
        }
    }
    LongestChain {
        length,
        witness: NestedChain { sets },
    }
}

/// Length of the longest absent chain all of whose members contain `t`.
pub fn longest_chain_above(inst: &PicInstance, t: MessageSet) -> usize {
    let absent = inst.absent();
    let up = chain_lengths_upward(absent);
    absent
        .iter()
        .zip(&up)
        .filter(|(h, _)| t.is_subset(**h))
        .map(|(_, &u)| u)
        .max()
        .unwrap_or(0)
}

/// A breakpoint `(k, a)` for one chain: no absent chain of length `L - k`
/// contains `H_k ∪ {a}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakWitness {
    pub chain: NestedChain,
    /// 1-based position in the chain.
    pub k: usize,
    pub a: usize,
}

/// Every absent chain of exactly `l` sets, in lexicographic order.
pub fn chains_of_length(inst: &PicInstance, l: usize) -> Vec<NestedChain> {
    fn extend(
        absent: &[MessageSet],
        up: &[usize],
        from: usize,
        need: usize,
        current: &mut Vec<MessageSet>,
        out: &mut Vec<NestedChain>,
    ) {
        if need == 0 {
            out.push(NestedChain {
                sets: current.clone(),
            });
            return;
        }
        for j in from..absent.len() {
            if up[j] < need {
                continue;
            }
            if current.last().is_none_or(|l| l.is_strict_subset(absent[j])) {
                current.push(absent[j]);
                extend(absent, up, j + 1, need - 1, current, out);
                current.pop();
            }
        }
    }
    let absent = inst.absent();
    let up = chain_lengths_upward(absent);
    let mut out = Vec::new();
    if l > 0 {
        extend(absent, &up, 0, l, &mut Vec::new(), &mut out);
    }
    out
}

/// Whether `(k, a)` breaks `chain` in the sense of chain breakability.
pub fn is_break_point(inst: &PicInstance, chain: &NestedChain, k: usize, a: usize) -> bool {
    let l = chain.len();
    if k == 0 || k >= l || a == 0 || a > inst.m() {
        return false;
    }
    let hk = chain.sets[k - 1];
    !hk.contains(a) && longest_chain_above(inst, hk.with(a)) < l - k
}

/// Least breakpoint of one chain, scanning `k` then `a` upward.
pub fn find_break_point(inst: &PicInstance, chain: &NestedChain) -> Option<(usize, usize)> {
    let l = chain.len();
    (1..l).find_map(|k| {
        chain.sets[k - 1]
            .complement(inst.m())
            .iter()
            .find(|&a| is_break_point(inst, chain, k, a))
            .map(|a| (k, a))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Breakability {
    pub breakable: bool,
    /// One witness per chain when breakable; empty otherwise.
    pub witnesses: Vec<BreakWitness>,
    /// First chain without a breakpoint, when not breakable.
    pub unbroken: Option<NestedChain>,
}

/// Checks `L`-chain breakability for `L` in `[2:m-1]`.
pub fn is_l_chain_breakable(inst: &PicInstance, l: usize) -> Result<Breakability, StructureError> {
    let max = inst.m() - 1;
    if l < 2 || l > max {
        return Err(StructureError::LOutOfRange { l, max });
    }
    let mut witnesses = Vec::new();
    for chain in chains_of_length(inst, l) {
        match find_break_point(inst, &chain) {
            Some((k, a)) => witnesses.push(BreakWitness { chain, k, a }),
            None => {
                return Ok(Breakability {
                    breakable: false,
                    witnesses: Vec::new(),
                    unbroken: Some(chain),
                })
            }
        }
    }
    Ok(Breakability {
        breakable: true,
        witnesses,
        unbroken: None,
    })
}

/// Least non-vacuous breakable level `L'` and its bound `m - L' + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BreakableBound {
    pub level: usize,
    pub bound: usize,
}

pub fn smallest_breakable_bound(inst: &PicInstance) -> Option<BreakableBound> {
    let l_max = longest_nested_chain(inst).length;
    let top = l_max.min(inst.m() - 1);
    (2..=top)
        .find(|&l| {
            is_l_chain_breakable(inst, l)
                .map(|b| b.breakable)
                .unwrap_or(false)
        })
        .map(|level| BreakableBound {
            level,
            bound: inst.m() - level + 1,
        })
}

/// Both structural bounds and their maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralBound {
    pub longest_chain: LongestChain,
    /// `m - L_max`.
    pub chain_bound: usize,
    pub breakable: Option<BreakableBound>,
    pub bound: usize,
}

pub fn structural_analysis(inst: &PicInstance) -> StructuralBound {
    let longest_chain = longest_nested_chain(inst);
    let chain_bound = inst.m() - longest_chain.length;
    let breakable = smallest_breakable_bound(inst);
    let bound = breakable.map_or(chain_bound, |b| b.bound.max(chain_bound));
    StructuralBound {
        longest_chain,
        chain_bound,
        breakable,
        bound,
    }
}

/// `max(m - L_max, m - L' + 1)`.
pub fn structural_lower_bound(inst: &PicInstance) -> usize {
    structural_analysis(inst).bound
}

/// Which look-ahead condition a family of absent receivers satisfies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LookAhead {
    /// The family does not cover `[1:m]`.
    NotCover,
    /// Minimal cover with a subfamily whose intersection is present.
    MinimalCoverPresentIntersection {
        subfamily: Vec<MessageSet>,
        intersection: MessageSet,
    },
    Inapplicable,
}

fn union_of<'a, I: IntoIterator<Item = &'a MessageSet>>(sets: I) -> MessageSet {
    sets.into_iter()
        .fold(MessageSet::EMPTY, |acc, s| acc.union(*s))
}

fn normalized(
    inst: &PicInstance,
    family: &[MessageSet],
) -> Result<Vec<MessageSet>, StructureError> {
    let mut a = family.to_vec();
    if let Some(bad) = a.iter().find(|h| !inst.is_absent(**h)) {
        return Err(StructureError::ANotAbsent(*bad));
    }
    a.sort_by(|x, y| canonical_cmp(*x, *y));
    a.dedup();
    Ok(a)
}

pub fn look_ahead_applicable(
    inst: &PicInstance,
    family: &[MessageSet],
) -> Result<LookAhead, StructureError> {
    let a = normalized(inst, family)?;
    let full = inst.full();
    if union_of(&a) != full {
        return Ok(LookAhead::NotCover);
    }
    let minimal = (0..a.len()).all(|i| {
        union_of(
            a.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, h)| h),
        ) != full
    });
    if !minimal {
        return Ok(LookAhead::Inapplicable);
    }
    for size in 1..=a.len() {
        for idx in Combinations::new(a.len(), size) {
            let intersection = idx.iter().fold(full, |acc, &i| acc.intersection(a[i]));
            if inst.is_present(intersection) {
                return Ok(LookAhead::MinimalCoverPresentIntersection {
                    subfamily: idx.iter().map(|&i| a[i]).collect(),
                    intersection,
                });
            }
        }
    }
    Ok(LookAhead::Inapplicable)
}

/// Message to skip at prefix `c` so that later hits on `family` need no skip,
/// or `None` when `c` has already escaped the relevant cover.
///
/// Under the minimal-cover condition the choice depends on `D(T)` for the
/// present intersection `T`, hence the decoding choice argument.
pub fn look_ahead_skip(
    inst: &PicInstance,
    family: &[MessageSet],
    c: MessageSet,
    d: &DecodingChoice,
) -> Result<Option<usize>, StructureError> {
    let a = normalized(inst, family)?;
    let full = inst.full();
    match look_ahead_applicable(inst, &a)? {
        LookAhead::NotCover => {
            let cover = union_of(&a);
            Ok(if c.is_subset(cover) {
                full.difference(cover).min_message()
            } else {
                None
            })
        }
        LookAhead::MinimalCoverPresentIntersection {
            subfamily,
            intersection,
        } => {
            let dt = d
                .get(intersection)
                .ok_or(StructureError::PreconditionViolated(
                    "intersection is not present",
                ))?;
            let h1 = *subfamily
                .iter()
                .find(|h| !h.contains(dt))
                .expect("D(T) lies outside T, so some member misses it");
            let rest = union_of(a.iter().filter(|h| **h != h1));
            if c.is_subset(rest) {
                Ok(h1.difference(rest).min_message())
            } else {
                Ok(None)
            }
        }
        LookAhead::Inapplicable => Err(StructureError::PreconditionViolated(
            "family is neither a non-cover nor a minimal cover with present intersection",
        )),
    }
}

/// Number of pairs `J ⊊ K` in the absent family.
pub fn count_nested_pairs(inst: &PicInstance) -> usize {
    let absent = inst.absent();
    let mut n = 0;
    for (i, j) in absent.iter().enumerate() {
        n += absent[i + 1..]
            .iter()
            .filter(|k| j.is_strict_subset(**k))
            .count();
    }
    n
}
