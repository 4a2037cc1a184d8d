//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fail or exceed their time limit.

use std::collections::{BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pliable_core::chain::{l_star, run_realisation, DecodingChoice, ScriptedPolicy, Step};
use pliable_core::classify::{classify, criticality_probe, Provenance};
use pliable_core::codes::{
    construct_for, scheme_truncated, verify_code, CodeMatrix, DEFAULT_FIELD_CAP,
};
use pliable_core::instance::{
    generate_perfectly_nested, generate_truncated_nested, Partition, PicInstance,
};
use pliable_core::oracle::{
    crosscheck, exact_general_rate, exact_linear_rate, functional_decodability,
};
use pliable_core::set::{proper_subsets, Combinations, MessageSet};
use pliable_core::structure::{is_l_chain_breakable, longest_nested_chain, structural_analysis};
use pliable_core::PrimeField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn s(v: &[usize]) -> MessageSet {
    MessageSet::from_messages(v.iter().copied())
}

fn f2() -> PrimeField {
    PrimeField::binary()
}

fn p1() -> PicInstance {
    PicInstance::from_absent(5, [s(&[1, 2]), s(&[1, 2, 4]), s(&[1, 3]), s(&[1, 3, 5])]).unwrap()
}

fn p2() -> PicInstance {
    PicInstance::from_absent(6, [s(&[3]), s(&[1, 2, 3, 4]), s(&[3, 4, 5, 6])]).unwrap()
}

fn linear_rate(inst: &PicInstance) -> Result<usize, String> {
    exact_linear_rate(inst, 2)
        .map(|r| r.rate)
        .map_err(|e| e.to_string())
}

/// Every family `{P_0 ∪ ⋃_{i∈Q} P_i : |Q| <= max_q}` over partitions of
/// `[1:m]` into a base and `levels` nonempty parts, built by labelling each
/// message with its part.
fn nested_families(m: usize, levels: usize, max_q: usize) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    let labels = (levels + 1).pow(m as u32);
    for code in 0..labels {
        let mut parts = vec![0u32; levels + 1];
        let mut c = code;
        for msg in 0..m {
            parts[c % (levels + 1)] |= 1 << msg;
            c /= levels + 1;
        }
        if parts[1..].contains(&0) {
            continue;
        }
        let mut family = Vec::new();
        for q in 0u32..(1 << levels) {
            if q.count_ones() as usize > max_q || q.count_ones() as usize == levels {
                continue;
            }
            let mut h = parts[0];
            for i in 0..levels {
                if q >> i & 1 == 1 {
                    h |= parts[i + 1];
                }
            }
            family.push(h);
        }
        family.sort_unstable();
        out.insert(family);
    }
    out
}

fn key(family: &[MessageSet]) -> Vec<u32> {
    let mut k: Vec<u32> = family.iter().map(|h| h.bits()).collect();
    k.sort_unstable();
    k
}

fn criterion_1() -> Check {
    let inst = p1();
    let c = classify(&inst);
    ensure!(c.value() == Some(4), "classify gave {c:?}");
    let st = structural_analysis(&inst);
    ensure!(
        st.longest_chain.length == 2,
        "L_max = {}",
        st.longest_chain.length
    );
    ensure!(
        is_l_chain_breakable(&inst, 2).unwrap().breakable,
        "2-chain not breakable"
    );
    let b = st.breakable.ok_or("no breakable level")?;
    ensure!(b.level == 2 && b.bound == 4, "breakable bound {b:?}");
    let lin = linear_rate(&inst)?;
    ensure!(lin == 4, "linear rate {lin}");
    let code = CodeMatrix::from_rows(
        f2(),
        5,
        vec![
            vec![0, 0, 1, 0, 1],
            vec![1, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 0],
        ],
    );
    ensure!(
        verify_code(&inst, &code).unwrap().passed(),
        "explicit code rejected"
    );
    Ok(())
}

fn criterion_2() -> Check {
    let inst = p2();
    let c = classify(&inst);
    ensure!(c.value() == Some(5), "classify gave {c:?}");
    ensure!(
        matches!(c.provenance, Provenance::SlightlyImperfect { .. }),
        "provenance {:?}",
        c.provenance
    );
    let built = construct_for(&inst, &c, f2(), DEFAULT_FIELD_CAP).map_err(|e| e.to_string())?;
    ensure!(built.code.len() == 5, "code length {}", built.code.len());
    ensure!(
        verify_code(&inst, &built.code).unwrap().passed(),
        "code rejected"
    );
    let st = structural_analysis(&inst).bound;
    ensure!(st == 4, "structural bound {st}");
    Ok(())
}

fn criterion_3() -> Check {
    let inst = PicInstance::from_absent(6, [s(&[1, 2]), s(&[1, 2, 3, 4]), s(&[4, 5])]).unwrap();
    let script: HashMap<MessageSet, usize> = [
        (s(&[]), 2),
        (s(&[2]), 1),
        (s(&[1, 2, 4]), 3),
        (s(&[2, 3]), 5),
        (s(&[1, 2, 3, 4, 5]), 6),
    ]
    .into_iter()
    .collect();
    let d = DecodingChoice::from_fn(&inst, |h| {
        script
            .get(&h)
            .copied()
            .or_else(|| h.complement(6).min_message())
    })
    .map_err(|e| e.to_string())?;
    let mut policy = ScriptedPolicy::new(6)
        .at(s(&[1, 2]), Step::Skip(4))
        .at(s(&[1, 2, 3, 4]), Step::Borrow(s(&[2, 3])));
    let r = run_realisation(&inst, &d, &mut policy).map_err(|e| e.to_string())?;
    ensure!(r.chain == vec![2, 1, 4, 3, 5, 6], "chain {:?}", r.chain);
    ensure!(r.skipped == s(&[4]), "S = {}", r.skipped);
    Ok(())
}

fn criterion_4() -> Check {
    for m in [2, 3] {
        let full = PicInstance::full_present(m).unwrap();
        let g = exact_general_rate(&full, 2)
            .map_err(|e| e.to_string())?
            .rate;
        ensure!(g == m, "general rate {g} at m={m}");
        for h in proper_subsets(m) {
            let inst = PicInstance::from_absent(m, [h]).unwrap();
            let lin = linear_rate(&inst)?;
            ensure!(lin == m - 1, "removing {h} at m={m} gives {lin}");
        }
    }
    Ok(())
}

/// Candidate receivers for the sweeps: nonempty proper subsets, optionally with `∅`.
fn universe(m: usize, with_empty: bool) -> Vec<MessageSet> {
    proper_subsets(m)
        .filter(|h| with_empty || !h.is_empty())
        .collect()
}

fn sweep(k: usize, with_empty: bool, expect_low: &BTreeSet<Vec<u32>>) -> Result<usize, String> {
    let m = 4;
    let all = universe(m, with_empty);
    let families: Vec<Vec<MessageSet>> = Combinations::new(all.len(), k)
        .map(|idx| idx.iter().map(|&i| all[i]).collect())
        .collect();
    use rayon::prelude::*;
    let failures: Vec<String> = families
        .par_iter()
        .filter_map(|family| {
            let inst = PicInstance::from_absent(m, family.iter().copied()).unwrap();
            let check = || -> Check {
                let cc = crosscheck(&inst, 2, 1 << 24).map_err(|e| e.to_string())?;
                let want = if expect_low.contains(&key(family)) {
                    m - 2
                } else {
                    m - 1
                };
                let got = cc.classification.value();
                ensure!(got == Some(want), "classify {got:?}, expected {want}");
                ensure!(
                    cc.linear_rate == want,
                    "linear rate {}, expected {want}",
                    cc.linear_rate
                );
                Ok(())
            };
            check().err().map(|e| format!("{family:?}: {e}"))
        })
        .collect();
    if let Some(first) = failures.first() {
        return Err(format!("{} failures, first {first}", failures.len()));
    }
    Ok(families.len())
}

fn criterion_5() -> Check {
    let nested = nested_families(4, 2, 1);
    let n = sweep(3, false, &nested)?;
    ensure!(n == 364, "{n} triples");
    // The same dichotomy holds once the empty receiver may be absent too.
    let n = sweep(3, true, &nested)?;
    ensure!(n == 455, "{n} triples including the empty receiver");
    Ok(())
}

fn criterion_6() -> Check {
    let triples = nested_families(4, 2, 1);
    let truncated = nested_families(4, 3, 1);
    let all = universe(4, true);
    let mut low = BTreeSet::new();
    for idx in Combinations::new(all.len(), 4) {
        let family: Vec<MessageSet> = idx.iter().map(|&i| all[i]).collect();
        let has_triple = Combinations::new(4, 3).any(|t| {
            let sub: Vec<MessageSet> = t.iter().map(|&i| family[i]).collect();
            triples.contains(&key(&sub))
        });
        if has_triple || truncated.contains(&key(&family)) {
            low.insert(key(&family));
        }
    }
    let n = sweep(4, false, &low)?;
    ensure!(n == 1001, "{n} quadruples");
    let n = sweep(4, true, &low)?;
    ensure!(n == 1365, "{n} quadruples including the empty receiver");
    Ok(())
}

fn criterion_7() -> Check {
    let p = Partition::from_lists(&[&[1], &[2, 3], &[4, 5], &[6, 7]]).unwrap();
    let inst = generate_truncated_nested(&p, 1).unwrap();
    ensure!(inst.absent().len() == 4, "{} absent", inst.absent().len());
    let code = scheme_truncated(&p, 1, DEFAULT_FIELD_CAP).map_err(|e| e.to_string())?;
    ensure!(
        code.field().modulus() == 2,
        "field q = {}",
        code.field().modulus()
    );
    ensure!(code.len() == 5, "length {}", code.len());
    let report = verify_code(&inst, &code).unwrap();
    ensure!(
        report.receivers.len() == 128 - 1 - 4,
        "{} receivers",
        report.receivers.len()
    );
    ensure!(report.passed(), "unsatisfied {:?}", report.unsatisfied);
    let l = longest_nested_chain(&inst).length;
    ensure!(l == 2 && inst.m() - l == 5, "L_max = {l}");
    Ok(())
}

fn criterion_8() -> Check {
    let seq = [
        vec![s(&[1, 2, 3]), s(&[3]), s(&[3, 4])],
        vec![s(&[1, 2, 3]), s(&[3]), s(&[3, 4, 5])],
        vec![s(&[1, 2, 3]), s(&[2, 3, 4]), s(&[3, 4, 5])],
    ];
    let mut classified = Vec::new();
    let mut linear = Vec::new();
    for family in seq {
        let inst = PicInstance::from_absent(5, family).unwrap();
        classified.push(classify(&inst).value());
        linear.push(linear_rate(&inst)?);
    }
    ensure!(
        classified == [Some(4), Some(3), Some(4)],
        "classify {classified:?}"
    );
    ensure!(linear == [4, 3, 4], "linear {linear:?}");
    Ok(())
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, p: f64) -> PicInstance {
    let absent: Vec<MessageSet> = proper_subsets(m).filter(|_| rng.gen_bool(p)).collect();
    PicInstance::from_absent(m, absent).unwrap()
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..50 {
        let inst = random_instance(&mut rng, 4, 0.35);
        let ls = l_star(&inst, u128::MAX).map_err(|e| e.to_string())?.value;
        let lin = linear_rate(&inst)?;
        let l_max = longest_nested_chain(&inst).length;
        ensure!(4 - ls <= lin, "instance {i}: m - L* = {} > {lin}", 4 - ls);
        ensure!(ls <= l_max, "instance {i}: L* = {ls} > L_max = {l_max}");
    }
    Ok(())
}

fn criterion_10() -> Check {
    let p = Partition::from_lists(&[&[1], &[2], &[3, 4]]).unwrap();
    let inst = generate_perfectly_nested(&p).unwrap();
    let report = criticality_probe(&inst, 2).map_err(|e| e.to_string())?;
    ensure!(report.rate == 2, "base rate {}", report.rate);
    ensure!(
        report.augmentations.len() == 3,
        "{} augmentations",
        report.augmentations.len()
    );
    ensure!(
        report.augmentations.iter().all(|a| a.rate == 3),
        "{:?}",
        report.augmentations
    );
    ensure!(report.critical, "not critical");
    Ok(())
}

fn criterion_11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes = [(2u32, 3usize..=6usize), (3, 2..=5), (5, 2..=4)];
    for i in 0..30 {
        let (q, ms) = shapes[i % shapes.len()].clone();
        let m = rng.gen_range(ms);
        let field = PrimeField::new(q).unwrap();
        let inst = random_instance(&mut rng, m, 0.3);
        let len = rng.gen_range(0..=m);
        let rows = (0..len)
            .map(|_| (0..m).map(|_| rng.gen_range(0..q)).collect())
            .collect();
        let code = CodeMatrix::from_rows(field, m, rows);
        let rank_based: Vec<(MessageSet, MessageSet)> = verify_code(&inst, &code)
            .unwrap()
            .receivers
            .into_iter()
            .map(|r| (r.receiver, r.decodable))
            .collect();
        let functional = functional_decodability(&inst, &code).map_err(|e| e.to_string())?;
        ensure!(
            rank_based == functional,
            "pair {i} (q={q}, m={m}) disagrees"
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "P1 example: exact rate 4, breakable bound, explicit code",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            "P2 example: slightly imperfect, rate 5, structural 4",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            "scripted chain realisation",
            Duration::from_secs(1),
            criterion_3,
        ),
        (
            "full-present rate m, single removal gives m-1",
            Duration::from_secs(10),
            criterion_4,
        ),
        (
            "all 364 absent triples at m=4",
            Duration::from_secs(120),
            criterion_5,
        ),
        (
            "all 1001 absent quadruples at m=4",
            Duration::from_secs(300),
            criterion_6,
        ),
        (
            "1-truncated 3-nested code over F_2",
            Duration::from_secs(5),
            criterion_7,
        ),
        (
            "rates 4, 3, 4 under side-information edits",
            Duration::from_secs(30),
            criterion_8,
        ),
        (
            "chain bound soundness on 50 random instances",
            Duration::from_secs(120),
            criterion_9,
        ),
        (
            "perfectly 2-nested instance is critical",
            Duration::from_secs(30),
            criterion_10,
        ),
        (
            "rank verifier matches functional decoding",
            Duration::from_secs(60),
            criterion_11,
        ),
    ];
    let mut failed = 0;
    for (i, (title, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(()) if elapsed > *limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(()) => println!("criterion {:>2}: PASS  {title} ({elapsed:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {title} ({elapsed:.2?}): {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
