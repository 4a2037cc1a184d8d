//! Exhaustive ground truth for small instances: optimal linear rate by
//! subspace enumeration, optimal rate over arbitrary encoders, and a
//! cross-check of every bound against both.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{enumeration_cost, l_star, ChainError};
use crate::classify::{classify, RateResult};
use crate::codes::{
    binary_satisfies_all, construct_for, decodable_messages, CodeError, CodeMatrix,
    DEFAULT_FIELD_CAP,
};
use crate::field::{FieldError, PrimeField};
use crate::instance::PicInstance;
use crate::set::{Combinations, MessageSet};
use crate::structure::{longest_nested_chain, structural_lower_bound};

/// Largest number of encoder tables the general oracle will scan.
pub const GENERAL_GUARD: u128 = 1 << 22;
/// Largest `q^m` for the functional decodability check.
pub const FUNCTIONAL_GUARD: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of {required} exceeds the limit {limit}")]
    SearchSpaceTooLarge { required: u128, limit: u128 },
    #[error("bound violated on {instance}: {detail}")]
    TheoremViolation { instance: String, detail: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// An arbitrary encoder `F_q^m -> F_q^ℓ`, one output per input (inputs in base `q`,
/// message 1 least significant; outputs packed the same way).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderTable {
    pub q: u32,
    pub m: usize,
    pub len: usize,
    pub values: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Linear(CodeMatrix),
    Table(EncoderTable),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub rate: usize,
    pub witness: Witness,
    /// Candidates in the enumeration up to and including the optimal length.
    pub search_space: u128,
}

/// `[n choose k]_q`, the number of `k`-dimensional subspaces of `F_q^n`.
pub fn gaussian_binomial(n: usize, k: usize, q: u32) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..k {
        num *= q.pow((n - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

fn max_linear_m(q: u32) -> usize {
    match q {
        2 => 7,
        3 | 5 => 5,
        _ => 4,
    }
}

fn total_subspaces(m: usize, q: u32) -> u128 {
    (0..=m).map(|k| gaussian_binomial(m, k, q)).sum()
}

/// Free coordinates of an RREF basis with the given pivot columns, row by row.
fn free_positions(m: usize, pivots: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (r, &p) in pivots.iter().enumerate() {
        for c in p + 1..m {
            if !pivots.contains(&c) {
                out.push((r, c));
            }
        }
    }
    out
}

/// Number of RREF bases the enumerator visits for dimension `k`.
pub fn subspace_count(m: usize, k: usize, q: u32) -> u128 {
    Combinations::new(m, k)
        .map(|p| (q as u128).pow(free_positions(m, &p).len() as u32))
        .sum()
}

/// Visits every fill of one pivot pattern; stops at the first accepted basis.
fn search_pattern<F>(m: usize, q: u32, pivots: &[usize], mut accept: F) -> Option<Vec<Vec<u32>>>
where
    F: FnMut(&[Vec<u32>]) -> bool,
{
    let free = free_positions(m, pivots);
    let mut rows = vec![vec![0u32; m]; pivots.len()];
    for (r, &p) in pivots.iter().enumerate() {
        rows[r][p] = 1;
    }
    let mut digits = vec![0u32; free.len()];
    loop {
        if accept(&rows) {
            return Some(rows);
        }
        // Odometer over the free entries, last position fastest.
        let mut i = free.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            digits[i] += 1;
            let (r, c) = free[i];
            if digits[i] < q {
                rows[r][c] = digits[i];
                break;
            }
            digits[i] = 0;
            rows[r][c] = 0;
        }
    }
}

fn row_mask(row: &[u32]) -> u32 {
    row.iter()
        .enumerate()
        .fold(0, |acc, (j, &x)| acc | ((x & 1) << j))
}

/// Least `ℓ` such that some `ℓ`-dimensional subspace of `F_q^m` serves every
/// present receiver. The witness is the first basis in pivot-pattern order.
pub fn exact_linear_rate(inst: &PicInstance, q: u32) -> Result<OracleResult, OracleError> {
    let field = PrimeField::new(q)?;
    let m = inst.m();
    let max_m = max_linear_m(q);
    if m > max_m {
        return Err(OracleError::SearchSpaceTooLarge {
            required: total_subspaces(m, q),
            limit: total_subspaces(max_m, q),
        });
    }
    let present = inst.present();
    let mut search_space = 0u128;
    for len in 0..=m {
        search_space += gaussian_binomial(m, len, q);
        let patterns: Vec<Vec<usize>> = Combinations::new(m, len).collect();
        let found = patterns.par_iter().find_map_first(|pivots| {
            if q == 2 {
                let mut scratch = Vec::with_capacity(len);
                let mut masks = Vec::with_capacity(len);
                search_pattern(m, q, pivots, |rows| {
                    masks.clear();
                    masks.extend(rows.iter().map(|r| row_mask(r)));
                    binary_satisfies_all(&masks, inst, &mut scratch)
                })
            } else {
                search_pattern(m, q, pivots, |rows| {
                    let code = CodeMatrix::from_rows(field, m, rows.to_vec());
                    present
                        .iter()
                        .all(|&h| !decodable_messages(&code, h).is_empty())
                })
            }
        });
        if let Some(rows) = found {
            return Ok(OracleResult {
                rate: len,
                witness: Witness::Linear(CodeMatrix::from_rows(field, m, rows)),
                search_space,
            });
        }
    }
    unreachable!("the identity code serves every receiver")
}

#[inline]
fn digit(x: u64, j: usize, q: u64) -> u64 {
    x / q.pow(j as u32) % q
}

fn project(x: u64, h: MessageSet, q: u64) -> u64 {
    h.iter()
        .map(|i| digit(x, i - 1, q) * q.pow((i - 1) as u32))
        .sum()
}

/// Messages `j ∉ h` that are a function of `(E(x), x_h)` for the encoder
/// given as one output per input.
fn functional_decodable(outputs: &[u64], m: usize, q: u64, h: MessageSet) -> MessageSet {
    let n = outputs.len() as u64;
    let mut decodable = MessageSet::full(m).difference(h);
    let mut rep: HashMap<(u64, u64), u64> = HashMap::new();
    for x in 0..n {
        let key = (outputs[x as usize], project(x, h, q));
        match rep.get(&key) {
            Some(&y) => {
                for j in decodable {
                    if digit(x, j - 1, q) != digit(y, j - 1, q) {
                        decodable = decodable.without(j);
                    }
                }
                if decodable.is_empty() {
                    break;
                }
            }
            None => {
                rep.insert(key, x);
            }
        }
    }
    decodable
}

fn linear_outputs(code: &CodeMatrix) -> Vec<u64> {
    let q = code.field().modulus() as u64;
    let m = code.m();
    let n = q.pow(m as u32);
    (0..n)
        .map(|x| {
            code.rows().iter().rev().fold(0u64, |acc, row| {
                let s: u64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, &g)| g as u64 * digit(x, j, q))
                    .sum();
                acc * q + s % q
            })
        })
        .collect()
}

/// For each present receiver, the messages it can decode from the code by
/// exhaustive search over all `q^m` message tuples.
pub fn functional_decodability(
    inst: &PicInstance,
    code: &CodeMatrix,
) -> Result<Vec<(MessageSet, MessageSet)>, OracleError> {
    let q = code.field().modulus() as u64;
    let n = (q as u128).pow(inst.m() as u32);
    if n > FUNCTIONAL_GUARD as u128 {
        return Err(OracleError::SearchSpaceTooLarge {
            required: n,
            limit: FUNCTIONAL_GUARD as u128,
        });
    }
    let outputs = linear_outputs(code);
    Ok(inst
        .present_iter()
        .map(|h| (h, functional_decodable(&outputs, inst.m(), q, h)))
        .collect())
}

/// Least `ℓ` admitting any encoder table; lengths below `m` are searched
/// exhaustively, and `ℓ = m` is always achieved by sending everything.
pub fn exact_general_rate(inst: &PicInstance, q: u32) -> Result<OracleResult, OracleError> {
    PrimeField::new(q)?;
    let m = inst.m();
    let qq = q as u128;
    let n = qq.checked_pow(m as u32).unwrap_or(u128::MAX);
    let tables = |len: usize| -> u128 {
        let outputs = qq.pow(len as u32);
        u32::try_from(n)
            .ok()
            .and_then(|n| outputs.checked_pow(n))
            .unwrap_or(u128::MAX)
    };
    let required = (0..m).fold(0u128, |acc, l| acc.saturating_add(tables(l)));
    if required > GENERAL_GUARD {
        return Err(OracleError::SearchSpaceTooLarge {
            required,
            limit: GENERAL_GUARD,
        });
    }
    let n = n as u64;
    let q64 = q as u64;
    let present = inst.present();
    let mut search_space = 0u128;
    for len in 0..m {
        let count = tables(len);
        search_space += count;
        let radix = q64.pow(len as u32);
        let decode = |index: u64| -> Vec<u64> {
            let mut idx = index;
            (0..n)
                .map(|_| {
                    let v = idx % radix;
                    idx /= radix;
                    v
                })
                .collect()
        };
        let found = (0..count as u64).into_par_iter().find_first(|&index| {
            let outputs = decode(index);
            present
                .iter()
                .all(|&h| !functional_decodable(&outputs, m, q64, h).is_empty())
        });
        if let Some(index) = found {
            return Ok(OracleResult {
                rate: len,
                witness: Witness::Table(EncoderTable {
                    q,
                    m,
                    len,
                    values: decode(index),
                }),
                search_space,
            });
        }
    }
    search_space += 1;
    Ok(OracleResult {
        rate: m,
        witness: Witness::Table(EncoderTable {
            q,
            m,
            len: m,
            values: (0..n).collect(),
        }),
        search_space,
    })
}

/// Every value the cross-check compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    pub structural: usize,
    pub classification: RateResult,
    pub linear_rate: usize,
    pub code_length: usize,
    pub code_field: u32,
    /// `None` when the decoding-choice enumeration exceeds the budget.
    pub l_star: Option<usize>,
}

/// Checks `structural <= lower <= linear <= upper = code length`, equality
/// when the classification is exact, and `m - L* <= linear <= ...` when `L*`
/// fits in `chain_budget`.
///
/// When the construction needs a larger field than `q`, the linear rate is
/// only compared against the lower bounds.
pub fn crosscheck(
    inst: &PicInstance,
    q: u32,
    chain_budget: u128,
) -> Result<CrossCheck, OracleError> {
    let m = inst.m();
    let field = PrimeField::new(q)?;
    let structural = structural_lower_bound(inst);
    let classification = classify(inst);
    let linear_rate = exact_linear_rate(inst, q)?.rate;
    let construction = construct_for(inst, &classification, field, DEFAULT_FIELD_CAP)?;
    let code_length = construction.code.len();
    let code_field = construction.code.field().modulus();
    let l_star = if enumeration_cost(inst).1 <= chain_budget {
        Some(l_star(inst, chain_budget)?.value)
    } else {
        None
    };

    let violation = |detail: String| OracleError::TheoremViolation {
        instance: format!("{inst:?}"),
        detail,
    };
    let c = &classification;
    if structural > c.lower {
        return Err(violation(format!(
            "structural {structural} > lower {}",
            c.lower
        )));
    }
    if c.lower > linear_rate {
        return Err(violation(format!(
            "lower {} > linear rate {linear_rate}",
            c.lower
        )));
    }
    if code_length != c.upper {
        return Err(violation(format!(
            "code length {code_length} != upper {}",
            c.upper
        )));
    }
    if code_field == q {
        if linear_rate > c.upper {
            return Err(violation(format!(
                "linear rate {linear_rate} > upper {}",
                c.upper
            )));
        }
        if c.exact && linear_rate != c.lower {
            return Err(violation(format!(
                "exact {} != linear rate {linear_rate}",
                c.lower
            )));
        }
    }
    if let Some(ls) = l_star {
        if m - ls > linear_rate {
            return Err(violation(format!(
                "m - L* = {} > linear rate {linear_rate}",
                m - ls
            )));
        }
        let l_max = longest_nested_chain(inst).length;
        if ls > l_max {
            return Err(violation(format!("L* = {ls} > L_max = {l_max}")));
        }
    }
    Ok(CrossCheck {
        structural,
        classification,
        linear_rate,
        code_length,
        code_field,
        l_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> MessageSet {
        MessageSet::from_messages(v.iter().copied())
    }

    /// Recurrence `[n,k] = [n-1,k-1] + q^k [n-1,k]`, independent of the product formula.
    fn gaussian_recurrence(n: usize, k: usize, q: u128) -> u128 {
        if k == 0 || k == n {
            return 1;
        }
        if k > n {
            return 0;
        }
        gaussian_recurrence(n - 1, k - 1, q) + q.pow(k as u32) * gaussian_recurrence(n - 1, k, q)
    }

    #[test]
    fn enumerator_matches_gaussian_binomial() {
        for (q, max_m) in [(2u32, 7usize), (3, 5), (5, 4), (7, 3)] {
            for m in 1..=max_m {
                for k in 0..=m {
                    let expected = gaussian_recurrence(m, k, q as u128);
                    assert_eq!(subspace_count(m, k, q), expected, "m={m} k={k} q={q}");
                    assert_eq!(gaussian_binomial(m, k, q), expected);
                }
            }
        }
    }

    #[test]
    fn linear_oracle_small_cases() {
        let full = PicInstance::full_present(3).unwrap();
        assert_eq!(exact_linear_rate(&full, 2).unwrap().rate, 3);
        let p1 =
            PicInstance::from_absent(5, [s(&[1, 2]), s(&[1, 2, 4]), s(&[1, 3]), s(&[1, 3, 5])])
                .unwrap();
        let r = exact_linear_rate(&p1, 2).unwrap();
        assert_eq!(r.rate, 4);
        let Witness::Linear(code) = r.witness else {
            panic!()
        };
        assert!(crate::codes::verify_code(&p1, &code).unwrap().passed());

        let nested = PicInstance::from_absent(4, [s(&[1]), s(&[1, 2]), s(&[1, 3, 4])]).unwrap();
        assert_eq!(exact_linear_rate(&nested, 2).unwrap().rate, 2);
        assert_eq!(exact_linear_rate(&nested, 3).unwrap().rate, 2);
    }

    #[test]
    fn linear_oracle_guards() {
        let big = PicInstance::full_present(8).unwrap();
        assert!(matches!(
            exact_linear_rate(&big, 2),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
        let six = PicInstance::full_present(6).unwrap();
        assert!(exact_linear_rate(&six, 3).is_err());
        assert!(matches!(
            exact_linear_rate(&six, 4),
            Err(OracleError::Field(_))
        ));
    }

    #[test]
    fn general_oracle_small_cases() {
        let inst = PicInstance::from_absent(2, [s(&[1])]).unwrap();
        assert_eq!(exact_general_rate(&inst, 2).unwrap().rate, 1);
        let full = PicInstance::full_present(3).unwrap();
        assert_eq!(exact_general_rate(&full, 2).unwrap().rate, 3);
        let ex1 = PicInstance::from_absent(3, [s(&[3]), s(&[1, 3])]).unwrap();
        assert_eq!(
            exact_general_rate(&ex1, 2).unwrap().rate,
            exact_linear_rate(&ex1, 2).unwrap().rate
        );
        assert!(exact_general_rate(&PicInstance::full_present(4).unwrap(), 2).is_err());
    }

    #[test]
    fn functional_check_on_cyclic_code() {
        let inst = PicInstance::full_present(3).unwrap();
        let code = crate::codes::cyclic_code(&[1, 2, 3], PrimeField::binary(), 3).unwrap();
        let f = functional_decodability(&inst, &code).unwrap();
        let by_h: HashMap<_, _> = f.into_iter().collect();
        assert_eq!(by_h[&s(&[1])], s(&[2, 3]));
        assert!(by_h[&MessageSet::EMPTY].is_empty());
    }

    #[test]
    fn crosscheck_example_five() {
        for (family, rate) in [
            (vec![s(&[1, 2, 3]), s(&[3]), s(&[3, 4])], 4),
            (vec![s(&[3]), s(&[1, 2, 3]), s(&[3, 4, 5])], 3),
            (vec![s(&[1, 2, 3]), s(&[2, 3, 4]), s(&[3, 4, 5])], 4),
        ] {
            let inst = PicInstance::from_absent(5, family).unwrap();
            let c = crosscheck(&inst, 2, 1_000_000).unwrap();
            assert_eq!(c.linear_rate, rate);
        }
    }
}
