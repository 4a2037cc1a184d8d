use std::collections::BTreeMap;

use pliable_core::classify::{Provenance, RateResult};
use pliable_core::codes::{Construction, Scheme, VerifyReport};
use pliable_core::instance::Partition;
use pliable_core::oracle::crosscheck;
use pliable_core::set::{Combinations, MessageSet};
use pliable_core::structure::{count_nested_pairs, StructuralBound};
use pliable_core::PicInstance;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{CliError, SCHEMA};

fn set(s: MessageSet) -> Value {
    json!(s.to_vec())
}

fn family(sets: &[MessageSet]) -> Value {
    Value::Array(sets.iter().map(|s| set(*s)).collect())
}

fn partition(p: &Partition) -> Value {
    family(p.parts())
}

pub fn structure(inst: &PicInstance, s: &StructuralBound) -> Value {
    json!({
        "longest_chain": s.longest_chain.length,
        "chain_witness": family(&s.longest_chain.witness.sets),
        "chain_bound": s.chain_bound,
        "breakable": s.breakable.map(|b| json!({ "level": b.level, "bound": b.bound })),
        "bound": s.bound,
        "nested_pairs": count_nested_pairs(inst),
    })
}

fn provenance(p: &Provenance) -> Value {
    let mut v = json!({ "tag": p.tag() });
    match p {
        Provenance::PerfectlyNested { partition: part } => {
            v["levels"] = json!(part.levels());
            v["partition"] = partition(part);
        }
        Provenance::TruncatedNested { partition: part, t } => {
            v["levels"] = json!(part.levels());
            v["t"] = json!(t);
            v["partition"] = partition(part);
        }
        Provenance::SlightlyImperfect {
            partition: part,
            q,
            htilde,
        } => {
            v["levels"] = json!(part.levels());
            v["partition"] = partition(part);
            v["q"] = set(*q);
            v["htilde"] = set(*htilde);
        }
        Provenance::FewAbsent { count } => v["count"] = json!(count),
        Provenance::AtMostOneNestedPair { pairs } => v["pairs"] = json!(pairs),
        Provenance::ThreeAbsent {
            nested_in_intersection,
        } => v["nested_in_intersection"] = json!(nested_in_intersection),
        Provenance::FourAbsent { nested_subfamily } => {
            v["nested_subfamily"] = nested_subfamily.as_ref().map_or(Value::Null, partition)
        }
        Provenance::Bounds { structural } => v["structural"] = json!(structural),
        Provenance::NoAbsent | Provenance::UncoveredUnion => {}
    }
    v
}

pub fn classification(c: &RateResult) -> Value {
    json!({
        "lower": c.lower,
        "upper": c.upper,
        "exact": c.exact,
        "provenance": provenance(&c.provenance),
    })
}

pub fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Uncoded => "uncoded",
        Scheme::UncodedPlusCyclic => "uncoded-plus-cyclic",
        Scheme::PerfectlyNested => "perfectly-nested",
        Scheme::SlightlyImperfect => "slightly-imperfect",
        Scheme::Truncated => "truncated",
        Scheme::Fallback => "fallback",
    }
}

pub fn construction(c: &Construction) -> Value {
    json!({
        "scheme": scheme_name(c.scheme),
        "length": c.code.len(),
        "q": c.code.field().modulus(),
        "verified": true,
        "rows": c.code.rows(),
    })
}

pub fn verification(r: &VerifyReport) -> Value {
    let receivers: Vec<Value> = r
        .receivers
        .iter()
        .map(|x| json!({ "receiver": set(x.receiver), "decodable": set(x.decodable) }))
        .collect();
    json!({
        "passed": r.passed(),
        "receivers": receivers,
        "unsatisfied": family(&r.unsatisfied),
    })
}

/// Cross-checks every `k`-subset of `universe` as an absent family.
pub fn sweep(
    m: usize,
    k: usize,
    universe: &[MessageSet],
    q: u32,
    budget: u128,
) -> Result<Value, CliError> {
    let families: Vec<Vec<MessageSet>> = Combinations::new(universe.len(), k)
        .map(|idx| idx.iter().map(|&i| universe[i]).collect())
        .collect();
    let results: Vec<(Vec<MessageSet>, Result<_, _>)> = families
        .into_par_iter()
        .map(|f| {
            let inst =
                PicInstance::from_absent(m, f.iter().copied()).expect("distinct proper subsets");
            let r = crosscheck(&inst, q, budget);
            (inst.absent().to_vec(), r)
        })
        .collect();

    let mut rates: BTreeMap<String, usize> = BTreeMap::new();
    let mut provenances: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut failed = Vec::new();
    let mut passed = 0;
    for (absent, r) in &results {
        match r {
            Ok(c) => {
                passed += 1;
                *rates.entry(c.linear_rate.to_string()).or_default() += 1;
                *provenances
                    .entry(c.classification.provenance.tag())
                    .or_default() += 1;
            }
            Err(e @ pliable_core::oracle::OracleError::TheoremViolation { .. }) => {
                failed.push(json!({ "absent": family(absent), "error": e.to_string() }));
            }
            Err(e) => return Err(e.clone().into()),
        }
    }
    Ok(json!({
        "schema": SCHEMA,
        "m": m,
        "k": k,
        "q": q,
        "include_empty": universe.first().is_some_and(|h| h.is_empty()),
        "instances": results.len(),
        "passed": passed,
        "failed": failed,
        "rates": rates,
        "provenance": provenances,
    }))
}
