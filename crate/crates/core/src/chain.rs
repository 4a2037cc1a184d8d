//! Decoding chains with skipped messages.
//!
//! A realisation grows an ordered message set `C` from `∅` to `[1:m]`. When
//! receiver `C` is present it decodes `D(C)`. When `C` is absent the chain
//! either skips an arbitrary message (counted in `S`) or borrows `D(B)` from a
//! present `B ⊊ C` with `D(B) ∉ C`. Because the continuation depends only on
//! the current set, the best and worst skip counts for a fixed `D` are
//! dynamic programs over the `2^m` subsets.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::instance::PicInstance;
use crate::set::MessageSet;
use crate::structure::longest_nested_chain;

/// Default work limit for [`l_star`], in DP state evaluations.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("receiver {0} has no demanded message")]
    MissingDemand(MessageSet),
    #[error("receiver {receiver} cannot demand message {message}")]
    InvalidDemand {
        receiver: MessageSet,
        message: usize,
    },
    #[error("policy violation at prefix {prefix}: {reason}")]
    PolicyViolation { prefix: MessageSet, reason: String },
    #[error("enumeration needs {required} state evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

/// Total map from present receivers to a demanded message outside their side information.
#[derive(Clone, PartialEq, Eq)]
pub struct DecodingChoice {
    m: usize,
    // Indexed by mask; 0 for absent receivers and the full set.
    demand: Vec<u8>,
}

impl std::fmt::Debug for DecodingChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut map = f.debug_map();
        for (mask, &d) in self.demand.iter().enumerate() {
            if d != 0 {
                map.entry(&MessageSet::from_bits(mask as u32), &d);
            }
        }
        map.finish()
    }
}

impl DecodingChoice {
    /// Builds `D` from a closure evaluated at every present receiver.
    pub fn from_fn<F>(inst: &PicInstance, mut f: F) -> Result<Self, ChainError>
    where
        F: FnMut(MessageSet) -> Option<usize>,
    {
        let m = inst.m();
        let mut demand = vec![0u8; 1 << m];
        for h in inst.present_iter() {
            let msg = f(h).ok_or(ChainError::MissingDemand(h))?;
            if msg == 0 || msg > m || h.contains(msg) {
                return Err(ChainError::InvalidDemand {
                    receiver: h,
                    message: msg,
                });
            }
            demand[h.bits() as usize] = msg as u8;
        }
        Ok(DecodingChoice { m, demand })
    }

    pub fn from_map(
        inst: &PicInstance,
        map: &HashMap<MessageSet, usize>,
    ) -> Result<Self, ChainError> {
        Self::from_fn(inst, |h| map.get(&h).copied())
    }

    /// Every present receiver demands its least missing message.
    pub fn least(inst: &PicInstance) -> Self {
        Self::from_fn(inst, |h| h.complement(inst.m()).min_message()).expect("always valid")
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// `D(H)`, or `None` when `H` is not a present receiver.
    #[inline]
    pub fn get(&self, h: MessageSet) -> Option<usize> {
        match self.demand[h.bits() as usize] {
            0 => None,
            d => Some(d as usize),
        }
    }
}

/// Decision at an absent prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Option 1: add `a ∉ C` to the chain and to `S`.
    Skip(usize),
    /// Option 2: add `D(B)` for a present `B ⊊ C` with `D(B) ∉ C`.
    Borrow(MessageSet),
}

/// Chooses what to do whenever the chain prefix is an absent receiver.
pub trait SkipPolicy {
    fn choose(&mut self, prefix: MessageSet, chain: &[usize]) -> Step;
}

impl<F: FnMut(MessageSet, &[usize]) -> Step> SkipPolicy for F {
    fn choose(&mut self, prefix: MessageSet, chain: &[usize]) -> Step {
        self(prefix, chain)
    }
}

/// Fixed decisions per prefix; unlisted prefixes skip their least missing message.
#[derive(Clone, Debug, Default)]
pub struct ScriptedPolicy {
    m: usize,
    script: HashMap<MessageSet, Step>,
}

impl ScriptedPolicy {
    pub fn new(m: usize) -> Self {
        ScriptedPolicy {
            m,
            script: HashMap::new(),
        }
    }

    #[must_use]
    pub fn at(mut self, prefix: MessageSet, step: Step) -> Self {
        self.script.insert(prefix, step);
        self
    }
}

impl SkipPolicy for ScriptedPolicy {
    fn choose(&mut self, prefix: MessageSet, _chain: &[usize]) -> Step {
        self.script.get(&prefix).copied().unwrap_or_else(|| {
            Step::Skip(
                prefix
                    .complement(self.m)
                    .min_message()
                    .expect("prefix is proper"),
            )
        })
    }
}

/// Outcome of one run of the chain construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realisation {
    /// Messages in the order they joined the chain.
    pub chain: Vec<usize>,
    pub skipped: MessageSet,
    /// Absent receivers hit, in order.
    pub absent_hits: Vec<MessageSet>,
}

/// Messages `D(B)` reachable by borrowing at prefix `c`.
fn borrowable(d: &DecodingChoice, c: MessageSet) -> MessageSet {
    let mut out = MessageSet::EMPTY;
    for b in c.subsets().skip(1) {
        if let Some(x) = d.get(b) {
            if !c.contains(x) {
                out = out.with(x);
            }
        }
    }
    out
}

/// Runs the chain construction under `policy`.
pub fn run_realisation<P: SkipPolicy + ?Sized>(
    inst: &PicInstance,
    d: &DecodingChoice,
    policy: &mut P,
) -> Result<Realisation, ChainError> {
    let m = inst.m();
    let full = inst.full();
    let mut c = MessageSet::EMPTY;
    let mut chain = Vec::with_capacity(m);
    let mut skipped = MessageSet::EMPTY;
    let mut absent_hits = Vec::new();
    while c != full {
        let a = if let Some(x) = d.get(c) {
            x
        } else {
            absent_hits.push(c);
            let violation = |reason: String| ChainError::PolicyViolation { prefix: c, reason };
            match policy.choose(c, &chain) {
                Step::Skip(a) => {
                    if a == 0 || a > m || c.contains(a) {
                        return Err(violation(format!("cannot skip message {a}")));
                    }
                    skipped = skipped.with(a);
                    a
                }
                Step::Borrow(b) => {
                    if !b.is_strict_subset(c) {
                        return Err(violation(format!("{b} is not a strict subset")));
                    }
                    match d.get(b) {
                        Some(x) if !c.contains(x) => x,
                        Some(x) => return Err(violation(format!("D({b}) = {x} already in chain"))),
                        None => return Err(violation(format!("{b} is not present"))),
                    }
                }
            }
        };
        c = c.with(a);
        chain.push(a);
    }
    Ok(Realisation {
        chain,
        skipped,
        absent_hits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Objective {
    Min,
    Max,
}

/// Skip count of the best (or worst) continuation from every prefix.
fn skip_table(inst: &PicInstance, d: &DecodingChoice, objective: Objective) -> Vec<u8> {
    let m = inst.m();
    let full = inst.full().bits();
    let mut cost = vec![0u8; 1 << m];
    // Supersets have larger masks, so a descending sweep sees successors first.
    for mask in (0..full).rev() {
        let c = MessageSet::from_bits(mask);
        cost[mask as usize] = if let Some(x) = d.get(c) {
            cost[c.with(x).bits() as usize]
        } else {
            let skip = c
                .complement(m)
                .iter()
                .map(|a| 1 + cost[c.with(a).bits() as usize]);
            let borrow = borrowable(d, c)
                .iter()
                .map(|x| cost[c.with(x).bits() as usize]);
            let all = skip.chain(borrow);
            match objective {
                Objective::Min => all.min(),
                Objective::Max => all.max(),
            }
            .expect("a proper prefix can always skip")
        };
    }
    cost
}

/// Fewest skipped messages over all realisations for this `D`.
pub fn min_skips(inst: &PicInstance, d: &DecodingChoice) -> usize {
    skip_table(inst, d, Objective::Min)[0] as usize
}

/// Most skipped messages over all realisations for this `D`.
pub fn max_skips(inst: &PicInstance, d: &DecodingChoice) -> usize {
    skip_table(inst, d, Objective::Max)[0] as usize
}

/// Policy that follows the minimum-skip table: borrows when that is optimal
/// (least `B` in canonical order), otherwise skips the least optimal message.
pub struct MinSkipPolicy<'a> {
    inst: &'a PicInstance,
    d: &'a DecodingChoice,
    cost: Vec<u8>,
}

impl<'a> MinSkipPolicy<'a> {
    pub fn new(inst: &'a PicInstance, d: &'a DecodingChoice) -> Self {
        MinSkipPolicy {
            inst,
            d,
            cost: skip_table(inst, d, Objective::Min),
        }
    }
}

impl SkipPolicy for MinSkipPolicy<'_> {
    fn choose(&mut self, prefix: MessageSet, _chain: &[usize]) -> Step {
        let target = self.cost[prefix.bits() as usize];
        let mut witnesses: Vec<MessageSet> = prefix
            .subsets()
            .skip(1)
            .filter(|b| {
                self.d.get(*b).is_some_and(|x| {
                    !prefix.contains(x) && self.cost[prefix.with(x).bits() as usize] == target
                })
            })
            .collect();
        witnesses.sort_by(|a, b| crate::set::canonical_cmp(*a, *b));
        if let Some(b) = witnesses.first() {
            return Step::Borrow(*b);
        }
        let a = prefix
            .complement(self.inst.m())
            .iter()
            .find(|&a| 1 + self.cost[prefix.with(a).bits() as usize] == target)
            .expect("table minimum is attained");
        Step::Skip(a)
    }
}

/// Exact `L* = max_D min |S|` with the lexicographically least maximising `D`.
#[derive(Clone, Debug)]
pub struct LStar {
    pub value: usize,
    pub witness: DecodingChoice,
    /// Number of decoding choices in the full enumeration.
    pub choices: u128,
}

/// Size of the decoding-choice space and the state evaluations it costs.
pub fn enumeration_cost(inst: &PicInstance) -> (u128, u128) {
    let m = inst.m();
    let choices = inst
        .present_iter()
        .map(|h| (m - h.len()) as u128)
        .fold(1u128, |acc, k| acc.saturating_mul(k));
    (choices, choices.saturating_mul(1u128 << m))
}

pub fn l_star(inst: &PicInstance, budget: u128) -> Result<LStar, ChainError> {
    let (choices, required) = enumeration_cost(inst);
    if required > budget {
        return Err(ChainError::BudgetExceeded { required, budget });
    }
    let m = inst.m();
    let receivers = inst.present();
    let options: Vec<Vec<u8>> = receivers
        .iter()
        .map(|h| h.complement(m).iter().map(|x| x as u8).collect())
        .collect();
    let ceiling = longest_nested_chain(inst).length;

    // Mixed radix, first receiver most significant: index order is lexicographic on D.
    let decode = |mut index: u128, demand: &mut Vec<u8>| {
        for (h, opts) in receivers.iter().zip(&options).rev() {
            let k = opts.len() as u128;
            demand[h.bits() as usize] = opts[(index % k) as usize];
            index /= k;
        }
    };

    let chunk = 4096u128;
    let chunks = choices.div_ceil(chunk);
    let best = (0..chunks as u64)
        .into_par_iter()
        .map(|ci| {
            let start = ci as u128 * chunk;
            let end = (start + chunk).min(choices);
            let mut d = DecodingChoice {
                m,
                demand: vec![0u8; 1 << m],
            };
            let mut best: Option<(usize, u128)> = None;
            for index in start..end {
                decode(index, &mut d.demand);
                let v = min_skips(inst, &d);
                if best.is_none_or(|(bv, _)| v > bv) {
                    best = Some((v, index));
                    if v == ceiling {
                        break;
                    }
                }
            }
            best.expect("nonempty chunk")
        })
        .reduce_with(|a, b| {
            if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                a
            } else {
                b
            }
        })
        .expect("at least one decoding choice");

    let mut witness = DecodingChoice {
        m,
        demand: vec![0u8; 1 << m],
    };
    decode(best.1, &mut witness.demand);
    Ok(LStar {
        value: best.0,
        witness,
        choices,
    })
}

/// `m - L*`.
pub fn chain_lower_bound(inst: &PicInstance, budget: u128) -> Result<usize, ChainError> {
    Ok(inst.m() - l_star(inst, budget)?.value)
}
