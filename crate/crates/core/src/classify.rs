//! Maps an instance to its optimal rate for every solved absent-receiver
//! family, or to the best known bounds.

use crate::instance::{Partition, PicInstance};
use crate::oracle::{exact_linear_rate, OracleError};
use crate::set::{canonical_cmp, Combinations, MessageSet};
use crate::structure::{count_nested_pairs as nested_pairs, structural_lower_bound};

/// Which result pins the rate, with the parameters it was applied to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Every proper subset is present.
    NoAbsent,
    /// Some message lies outside every absent receiver.
    UncoveredUnion,
    PerfectlyNested {
        partition: Partition,
    },
    TruncatedNested {
        partition: Partition,
        t: usize,
    },
    SlightlyImperfect {
        partition: Partition,
        q: MessageSet,
        htilde: MessageSet,
    },
    FewAbsent {
        count: usize,
    },
    AtMostOneNestedPair {
        pairs: usize,
    },
    /// Three absent receivers, not perfectly 2-nested.
    ThreeAbsent {
        /// Some `H_1 ⊊ H_2 ∩ H_3`.
        nested_in_intersection: bool,
    },
    /// Four absent receivers; `Some` when a 3-subset is perfectly 2-nested.
    FourAbsent {
        nested_subfamily: Option<Partition>,
    },
    /// No exact result applies.
    Bounds {
        structural: usize,
    },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::NoAbsent => "no-absent",
            Provenance::UncoveredUnion => "uncovered-union",
            Provenance::PerfectlyNested { .. } => "perfectly-nested",
            Provenance::TruncatedNested { .. } => "truncated-nested",
            Provenance::SlightlyImperfect { .. } => "slightly-imperfect",
            Provenance::FewAbsent { .. } => "few-absent",
            Provenance::AtMostOneNestedPair { .. } => "at-most-one-nested-pair",
            Provenance::ThreeAbsent { .. } => "three-absent",
            Provenance::FourAbsent { .. } => "four-absent",
            Provenance::Bounds { .. } => "bounds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateResult {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub provenance: Provenance,
}

impl RateResult {
    fn exact(rate: usize, provenance: Provenance) -> Self {
        RateResult {
            lower: rate,
            upper: rate,
            exact: true,
            provenance,
        }
    }

    /// The rate when it is known exactly.
    pub fn value(&self) -> Option<usize> {
        self.exact.then_some(self.lower)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlightlyImperfectWitness {
    pub partition: Partition,
    /// Index set of the replaced receiver `H_Q`.
    pub q: MessageSet,
    pub htilde: MessageSet,
}

fn intersection_of(family: &[MessageSet], m: usize) -> MessageSet {
    family
        .iter()
        .fold(MessageSet::full(m), |acc, s| acc.intersection(*s))
}

fn sorted(mut family: Vec<MessageSet>) -> Vec<MessageSet> {
    family.sort_by(|a, b| canonical_cmp(*a, *b));
    family
}

/// Regenerates `{H_Q : Q ⊊ [1:L], |Q| <= max_q}` and compares with `family`
/// (which must be in canonical order).
fn regenerates(partition: &Partition, family: &[MessageSet], max_q: usize) -> bool {
    let l = partition.levels();
    let mut generated = Vec::new();
    for size in 0..=max_q.min(l - 1) {
        for q in Combinations::new(l, size) {
            generated.push(partition.h_q(q.iter().map(|i| i + 1).collect()));
        }
    }
    sorted(generated) == family
}

fn perfectly_nested_family(m: usize, family: &[MessageSet]) -> Option<Partition> {
    if family.is_empty() {
        return None;
    }
    let base = intersection_of(family, m);
    let maximal = family
        .iter()
        .filter(|h| !family.iter().any(|k| h.is_strict_subset(*k)));
    let parts = sorted(maximal.map(|h| h.complement(m)).collect());
    let mut all = vec![base];
    all.extend(parts);
    let partition = Partition::new(all).ok()?;
    if partition.m() != m {
        return None;
    }
    regenerates(&partition, family, partition.levels()).then_some(partition)
}

/// Recovers `P_0, …, P_L` when the absent family is perfectly `L`-nested.
pub fn detect_perfectly_nested(inst: &PicInstance) -> Option<Partition> {
    perfectly_nested_family(inst.m(), inst.absent())
}

/// Recovers `(T, partition)` for a `T`-truncated family with `T >= 1`.
///
/// A single absent receiver is the `T = 0` case, where `L` is not determined;
/// it is left to the earlier cascade steps.
pub fn detect_truncated_nested(inst: &PicInstance) -> Option<(usize, Partition)> {
    let m = inst.m();
    let family = inst.absent();
    let base = intersection_of(family, m);
    if !inst.is_absent(base) {
        return None;
    }
    let above: Vec<MessageSet> = family
        .iter()
        .copied()
        .filter(|h| base.is_strict_subset(*h))
        .collect();
    let minimal = above
        .iter()
        .filter(|h| !above.iter().any(|k| k.is_strict_subset(**h)));
    let parts = sorted(minimal.map(|h| h.difference(base)).collect());
    if parts.len() < 2 {
        return None;
    }
    let mut all = vec![base];
    all.extend(parts);
    let partition = Partition::new(all).ok()?;
    if partition.m() != m {
        return None;
    }
    let t = family
        .iter()
        .map(|h| {
            (1..=partition.levels())
                .filter(|&i| partition.part(i).is_subset(*h))
                .count()
        })
        .max()?;
    if t == 0 || t >= partition.levels() {
        return None;
    }
    regenerates(&partition, family, t).then_some((t, partition))
}

/// Least witness `(H̃, H)` in canonical order such that swapping `H̃` for a
/// present `H ⊋ H̃` yields a perfectly nested family with `L >= 2`.
pub fn detect_slightly_imperfect(inst: &PicInstance) -> Option<SlightlyImperfectWitness> {
    let m = inst.m();
    let family = inst.absent();
    let n = family.len() + 1;
    // A perfectly L-nested family with L >= 2 has 2^L - 1 members.
    if n < 4 || !n.is_power_of_two() {
        return None;
    }
    let full = MessageSet::full(m);
    for &htilde in family {
        let mut candidates: Vec<MessageSet> = full
            .difference(htilde)
            .subsets()
            .filter(|extra| !extra.is_empty())
            .map(|extra| htilde.union(extra))
            .filter(|h| *h != full && inst.is_present(*h))
            .collect();
        candidates.sort_by(|a, b| canonical_cmp(*a, *b));
        for h in candidates {
            let swapped: Vec<MessageSet> = family
                .iter()
                .map(|s| if *s == htilde { h } else { *s })
                .collect();
            let Some(partition) = perfectly_nested_family(m, &sorted(swapped)) else {
                continue;
            };
            if partition.levels() < 2 {
                continue;
            }
            let q: MessageSet = (1..=partition.levels())
                .filter(|&i| partition.part(i).is_subset(h))
                .collect();
            return Some(SlightlyImperfectWitness {
                partition,
                q,
                htilde,
            });
        }
    }
    None
}

/// Pairs `J ⊊ K` within the absent family.
pub fn count_nested_pairs(inst: &PicInstance) -> usize {
    nested_pairs(inst)
}

fn some_nested_in_intersection(family: &[MessageSet]) -> bool {
    (0..3).any(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        family[i].is_strict_subset(family[j].intersection(family[k]))
    })
}

fn nested_three_subset(m: usize, family: &[MessageSet]) -> Option<Partition> {
    Combinations::new(family.len(), 3).find_map(|idx| {
        let sub: Vec<MessageSet> = idx.iter().map(|&i| family[i]).collect();
        perfectly_nested_family(m, &sub)
    })
}

/// Rate cascade over the solved families; the first matching rule wins.
pub fn classify(inst: &PicInstance) -> RateResult {
    let m = inst.m();
    let absent = inst.absent();
    if absent.is_empty() {
        return RateResult::exact(m, Provenance::NoAbsent);
    }
    if inst.absent_union() != inst.full() {
        return RateResult::exact(m - 1, Provenance::UncoveredUnion);
    }
    if let Some(partition) = detect_perfectly_nested(inst) {
        return RateResult::exact(
            m - partition.levels(),
            Provenance::PerfectlyNested { partition },
        );
    }
    if let Some((t, partition)) = detect_truncated_nested(inst) {
        return RateResult::exact(m - t - 1, Provenance::TruncatedNested { partition, t });
    }
    if let Some(w) = detect_slightly_imperfect(inst) {
        let rate = m - w.partition.levels() + 1;
        return RateResult::exact(
            rate,
            Provenance::SlightlyImperfect {
                partition: w.partition,
                q: w.q,
                htilde: w.htilde,
            },
        );
    }
    if absent.len() <= 2 {
        return RateResult::exact(
            m - 1,
            Provenance::FewAbsent {
                count: absent.len(),
            },
        );
    }
    let pairs = nested_pairs(inst);
    if pairs <= 1 {
        return RateResult::exact(m - 1, Provenance::AtMostOneNestedPair { pairs });
    }
    if absent.len() == 3 {
        // The perfectly 2-nested case was taken by the detector above.
        return RateResult::exact(
            m - 1,
            Provenance::ThreeAbsent {
                nested_in_intersection: some_nested_in_intersection(absent),
            },
        );
    }
    if absent.len() == 4 {
        let nested_subfamily = nested_three_subset(m, absent);
        let rate = if nested_subfamily.is_some() {
            m - 2
        } else {
            m - 1
        };
        return RateResult::exact(rate, Provenance::FourAbsent { nested_subfamily });
    }
    let structural = structural_lower_bound(inst);
    RateResult {
        lower: structural,
        upper: m - 1,
        exact: structural == m - 1,
        provenance: Provenance::Bounds { structural },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Augmentation {
    pub receiver: MessageSet,
    pub rate: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalityReport {
    pub rate: usize,
    pub augmentations: Vec<Augmentation>,
    /// Every single-receiver augmentation strictly raises the rate.
    pub critical: bool,
}

/// Linear-oracle rate over `F_q` after making each absent receiver present in turn.
pub fn criticality_probe(inst: &PicInstance, q: u32) -> Result<CriticalityReport, OracleError> {
    let rate = exact_linear_rate(inst, q)?.rate;
    let augmentations = inst
        .absent()
        .iter()
        .map(|&h| {
            exact_linear_rate(&inst.with_present(h), q).map(|r| Augmentation {
                receiver: h,
                rate: r.rate,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let critical = augmentations.iter().all(|a| a.rate > rate);
    Ok(CriticalityReport {
        rate,
        augmentations,
        critical,
    })
}
