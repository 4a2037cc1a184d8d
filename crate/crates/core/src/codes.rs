//! Linear pliable index codes: the uncoded/cyclic constructions, the
//! truncated-nested construction with primitive-element coefficients, and a
//! rank-based decodability verifier.

use thiserror::Error;

use crate::classify::{Provenance, RateResult};
use crate::field::{primes_between, Field, PrimeField};
use crate::instance::{generate_truncated_nested, InstanceError, Partition, PicInstance};
use crate::linalg::Matrix;
use crate::set::MessageSet;

/// Default upper end of the prime search for the truncated construction.
pub const DEFAULT_FIELD_CAP: u32 = 211;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("message {0} appears twice")]
    DuplicateIndex(usize),
    #[error("{0} is not an absent receiver")]
    HNotAbsent(MessageSet),
    #[error("part {k} is in Q or outside [1:L]")]
    KInQ { k: usize },
    #[error("no prime q <= {cap} makes the truncated construction decodable")]
    FieldSearchExhausted { cap: u32 },
    #[error("code has {code} columns but the instance has {instance} messages")]
    DimensionMismatch { code: usize, instance: usize },
    #[error("constructed code fails verification for {0} receivers")]
    VerificationFailed(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// An `ℓ × m` matrix over `F_q`; row `r` is the coded symbol `Σ_j rows[r][j] X_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeMatrix {
    field: PrimeField,
    m: usize,
    rows: Vec<Vec<u32>>,
}

impl CodeMatrix {
    pub fn empty(field: PrimeField, m: usize) -> Self {
        CodeMatrix {
            field,
            m,
            rows: Vec::new(),
        }
    }

    /// Entries are reduced mod `q`. Panics on ragged rows.
    pub fn from_rows(field: PrimeField, m: usize, rows: Vec<Vec<u32>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), m, "row width must equal m");
                r.into_iter().map(|x| field.reduce(x as u64)).collect()
            })
            .collect();
        CodeMatrix { field, m, rows }
    }

    pub fn identity(field: PrimeField, m: usize) -> Self {
        let mut code = Self::empty(field, m);
        for i in 1..=m {
            code.push_unit(i);
        }
        code
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Code length `ℓ`.
    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    fn push_unit(&mut self, message: usize) {
        let mut row = vec![0; self.m];
        row[message - 1] = 1;
        self.rows.push(row);
    }

    fn push_pair(&mut self, a: usize, b: usize) {
        let mut row = vec![0; self.m];
        row[a - 1] = 1;
        row[b - 1] = 1;
        self.rows.push(row);
    }

    fn append(&mut self, other: CodeMatrix) {
        debug_assert_eq!(self.m, other.m);
        self.rows.extend(other.rows);
    }

    /// Same rows over another field (entries must already be valid there).
    fn over(mut self, field: PrimeField) -> Self {
        self.field = field;
        for r in &mut self.rows {
            for x in r.iter_mut() {
                *x = field.reduce(*x as u64);
            }
        }
        self
    }

    pub fn to_matrix(&self) -> Matrix<PrimeField> {
        Matrix::from_rows(self.field, self.m, &self.rows)
    }

    /// Row masks over `F_2`; `None` for other fields.
    fn binary_masks(&self) -> Option<Vec<u32>> {
        (self.field.modulus() == 2).then(|| {
            self.rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .fold(0u32, |acc, (j, &x)| acc | ((x & 1) << j))
                })
                .collect()
        })
    }
}

/// `(X_{a_1}+X_{a_2}, …, X_{a_{k-1}}+X_{a_k})`; nothing for a single message.
pub fn cyclic_code(
    messages: &[usize],
    field: PrimeField,
    m: usize,
) -> Result<CodeMatrix, CodeError> {
    let mut seen = MessageSet::EMPTY;
    for &a in messages {
        if a == 0 || a > m {
            return Err(InstanceError::MessageIndexOutOfRange { index: a, m }.into());
        }
        if seen.contains(a) {
            return Err(CodeError::DuplicateIndex(a));
        }
        seen = seen.with(a);
    }
    let mut code = CodeMatrix::empty(field, m);
    for w in messages.windows(2) {
        code.push_pair(w[0], w[1]);
    }
    Ok(code)
}

fn cyclic_over(set: MessageSet, field: PrimeField, m: usize) -> CodeMatrix {
    cyclic_code(&set.to_vec(), field, m).expect("distinct in-range messages")
}

fn uncoded(set: MessageSet, field: PrimeField, m: usize) -> CodeMatrix {
    let mut code = CodeMatrix::empty(field, m);
    for i in set {
        code.push_unit(i);
    }
    code
}

/// `X_H` uncoded plus a cyclic code over the rest; length `m - 1`.
pub fn scheme_uncoded_plus_cyclic(
    inst: &PicInstance,
    h: MessageSet,
    field: PrimeField,
) -> Result<CodeMatrix, CodeError> {
    if !inst.is_absent(h) {
        return Err(CodeError::HNotAbsent(h));
    }
    let m = inst.m();
    let mut code = uncoded(h, field, m);
    code.append(cyclic_over(h.complement(m), field, m));
    Ok(code)
}

/// `X_{P_0}` uncoded plus a cyclic code per part; length `m - L`.
pub fn scheme_perfectly_nested(partition: &Partition, field: PrimeField) -> CodeMatrix {
    let m = partition.m();
    let mut code = uncoded(partition.base(), field, m);
    for i in 1..=partition.levels() {
        code.append(cyclic_over(partition.part(i), field, m));
    }
    code
}

/// Perfectly nested code plus `X_a` for the least `a ∈ P_k`; length `m - L + 1`.
pub fn scheme_slightly_imperfect(
    partition: &Partition,
    q: MessageSet,
    k: usize,
    field: PrimeField,
) -> Result<CodeMatrix, CodeError> {
    if k == 0 || k > partition.levels() || q.contains(k) {
        return Err(CodeError::KInQ { k });
    }
    let mut code = scheme_perfectly_nested(partition, field);
    let a = partition
        .part(k)
        .min_message()
        .expect("parts beyond P_0 are nonempty");
    code.push_unit(a);
    Ok(code)
}

/// Truncated-nested rows over `field`: the perfectly nested code plus
/// `V_{L-k} = Σ_i γ^{(k-1)i} Z_{i,1}` for `k ∈ [1:L-1-T]`, where `Z_{i,1}` is
/// the least message of `P_i`.
pub fn truncated_rows(partition: &Partition, t: usize, field: PrimeField) -> CodeMatrix {
    let m = partition.m();
    let l = partition.levels();
    let mut code = scheme_perfectly_nested(partition, field);
    let gamma = field.gamma();
    for k in 1..l.saturating_sub(t) {
        let step = field.pow(gamma, (k - 1) as u64);
        let mut row = vec![0u32; m];
        for i in 1..=l {
            let z = partition.part(i).min_message().expect("nonempty part");
            row[z - 1] = field.pow(step, i as u64);
        }
        code.rows.push(row);
    }
    code
}

/// Searches primes upward from 2 to `cap` for a field where the truncated
/// construction satisfies every present receiver; length `m - T - 1`.
pub fn scheme_truncated(
    partition: &Partition,
    t: usize,
    cap: u32,
) -> Result<CodeMatrix, CodeError> {
    let inst = generate_truncated_nested(partition, t)?;
    for q in primes_between(2, cap) {
        let field = PrimeField::new(q).expect("prime");
        let code = truncated_rows(partition, t, field);
        if verify_code(&inst, &code)?.passed() {
            return Ok(code);
        }
    }
    Err(CodeError::FieldSearchExhausted { cap })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceiverReport {
    pub receiver: MessageSet,
    /// Messages outside the side information this receiver can decode.
    pub decodable: MessageSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub receivers: Vec<ReceiverReport>,
    pub unsatisfied: Vec<MessageSet>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.unsatisfied.is_empty()
    }
}

/// RREF over `F_2` on bitmask rows; returns the single-bit reduced rows.
fn binary_unit_vectors(rows: &mut [u32], m: usize) -> MessageSet {
    let mut rank = 0;
    for bit in 0..m {
        let mask = 1u32 << bit;
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows[..rank]
        .iter()
        .filter(|r| r.count_ones() == 1)
        .fold(MessageSet::EMPTY, |acc, r| {
            acc.union(MessageSet::from_bits(*r))
        })
}

/// Messages `j ∉ h` with `e_j ∈ rowspace(G ∪ {e_i : i ∈ h})`.
///
/// Adding `e_i` for `i ∈ h` is the same as deleting those columns, so the
/// check runs on the code projected onto the complement of `h`.
pub fn decodable_messages(code: &CodeMatrix, h: MessageSet) -> MessageSet {
    let m = code.m();
    if let Some(masks) = code.binary_masks() {
        let mut rows: Vec<u32> = masks
            .iter()
            .map(|r| r & !h.bits())
            .filter(|r| *r != 0)
            .collect();
        return binary_unit_vectors(&mut rows, m);
    }
    let field = code.field();
    let projected: Vec<Vec<u32>> = code
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, &x)| if h.contains(j + 1) { field.zero() } else { x })
                .collect()
        })
        .collect();
    Matrix::from_rows(field, m, &projected)
        .unit_vectors_in_row_space()
        .into_iter()
        .map(|c| c + 1)
        .collect()
}

/// Fast pass/fail over `F_2` on raw row masks (used by the subspace oracle).
pub(crate) fn binary_satisfies_all(
    rows: &[u32],
    inst: &PicInstance,
    scratch: &mut Vec<u32>,
) -> bool {
    inst.present_iter().all(|h| {
        scratch.clear();
        scratch.extend(rows.iter().map(|r| r & !h.bits()).filter(|r| *r != 0));
        !binary_unit_vectors(scratch, inst.m()).is_empty()
    })
}

/// Decodability of every present receiver.
pub fn verify_code(inst: &PicInstance, code: &CodeMatrix) -> Result<VerifyReport, CodeError> {
    if code.m() != inst.m() {
        return Err(CodeError::DimensionMismatch {
            code: code.m(),
            instance: inst.m(),
        });
    }
    let receivers: Vec<ReceiverReport> = inst
        .present_iter()
        .map(|h| ReceiverReport {
            receiver: h,
            decodable: decodable_messages(code, h),
        })
        .collect();
    let unsatisfied = receivers
        .iter()
        .filter(|r| r.decodable.is_empty())
        .map(|r| r.receiver)
        .collect();
    Ok(VerifyReport {
        receivers,
        unsatisfied,
    })
}

/// Which construction produced a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Uncoded,
    UncodedPlusCyclic,
    PerfectlyNested,
    SlightlyImperfect,
    Truncated,
    /// No optimality claim; `m - 1` code for a least absent receiver.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub code: CodeMatrix,
    pub scheme: Scheme,
}

/// Builds the code matching a classification and checks it.
///
/// `field` is used by every scheme except the truncated one, which searches
/// primes up to `field_cap` itself.
pub fn construct_for(
    inst: &PicInstance,
    classification: &RateResult,
    field: PrimeField,
    field_cap: u32,
) -> Result<Construction, CodeError> {
    let m = inst.m();
    let least_absent = || {
        *inst
            .absent()
            .first()
            .expect("classified with absent receivers")
    };
    let (code, scheme) = match &classification.provenance {
        Provenance::NoAbsent => (CodeMatrix::identity(field, m), Scheme::Uncoded),
        Provenance::PerfectlyNested { partition } => (
            scheme_perfectly_nested(partition, field),
            Scheme::PerfectlyNested,
        ),
        Provenance::TruncatedNested { partition, t } => (
            scheme_truncated(partition, *t, field_cap)?,
            Scheme::Truncated,
        ),
        Provenance::SlightlyImperfect { partition, q, .. } => {
            let k = partition
                .all_levels()
                .difference(*q)
                .min_message()
                .expect("Q is a strict subset of [1:L]");
            (
                scheme_slightly_imperfect(partition, *q, k, field)?,
                Scheme::SlightlyImperfect,
            )
        }
        Provenance::FourAbsent {
            nested_subfamily: Some(partition),
        } => {
            // The code for the smaller absent family serves the larger one.
            (
                scheme_perfectly_nested(partition, field),
                Scheme::PerfectlyNested,
            )
        }
        Provenance::Bounds { .. } => (
            scheme_uncoded_plus_cyclic(inst, least_absent(), field)?,
            Scheme::Fallback,
        ),
        _ => (
            scheme_uncoded_plus_cyclic(inst, least_absent(), field)?,
            Scheme::UncodedPlusCyclic,
        ),
    };
    let report = verify_code(inst, &code)?;
    if !report.passed() {
        return Err(CodeError::VerificationFailed(report.unsatisfied.len()));
    }
    Ok(Construction { code, scheme })
}

impl CodeMatrix {
    /// Lifts a code into `field` (used when re-checking at other field sizes).
    pub fn reinterpret(self, field: PrimeField) -> Self {
        self.over(field)
    }
}
