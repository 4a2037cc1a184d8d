use pliable_core::chain::{l_star, max_skips, min_skips, DecodingChoice, DEFAULT_BUDGET};
use pliable_core::classify::{classify, Provenance};
use pliable_core::codes::{construct_for, verify_code, CodeMatrix, Scheme, DEFAULT_FIELD_CAP};
use pliable_core::oracle::{exact_general_rate, exact_linear_rate};
use pliable_core::set::{proper_subsets, MessageSet};
use pliable_core::structure::{longest_nested_chain, structural_lower_bound};
use pliable_core::{PicInstance, PrimeField};
use proptest::prelude::*;

fn instance(m: usize, mask: u64) -> PicInstance {
    let absent = proper_subsets(m)
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, h)| h);
    PicInstance::from_absent(m, absent).unwrap()
}

fn arb_instance(ms: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = PicInstance> {
    ms.prop_flat_map(|m| any::<u64>().prop_map(move |mask| instance(m, mask)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructed_codes_verify(inst in arb_instance(2..=6)) {
        let c = classify(&inst);
        prop_assert!(c.lower <= c.upper);
        prop_assert_eq!(c.exact, c.lower == c.upper);
        let built = construct_for(&inst, &c, PrimeField::binary(), DEFAULT_FIELD_CAP).unwrap();
        prop_assert_eq!(built.code.len(), c.upper);
        prop_assert!(verify_code(&inst, &built.code).unwrap().passed());
    }

    #[test]
    fn bounds_below_oracle(inst in arb_instance(2..=5)) {
        let lin = exact_linear_rate(&inst, 2).unwrap().rate;
        prop_assert!(structural_lower_bound(&inst) <= lin);
        let c = classify(&inst);
        prop_assert!(c.lower <= lin && lin <= c.upper);
    }

    #[test]
    fn skips_bounded_by_longest_chain(inst in arb_instance(2..=6), seed in any::<u64>()) {
        let m = inst.m();
        let d = DecodingChoice::from_fn(&inst, |h| {
            let missing = h.complement(m).to_vec();
            Some(missing[(seed as usize ^ h.bits() as usize) % missing.len()])
        })
        .unwrap();
        let l_max = longest_nested_chain(&inst).length;
        prop_assert!(min_skips(&inst, &d) <= max_skips(&inst, &d));
        prop_assert!(max_skips(&inst, &d) <= l_max);
    }

    #[test]
    fn linear_rate_monotone_in_receivers(inst in arb_instance(2..=4)) {
        let rate = exact_linear_rate(&inst, 2).unwrap().rate;
        for &h in inst.absent() {
            let more = inst.with_present(h);
            prop_assert!(exact_linear_rate(&more, 2).unwrap().rate >= rate);
        }
    }

    #[test]
    fn codes_stay_valid_for_fewer_receivers(inst in arb_instance(2..=5), drop in any::<u64>()) {
        let c = classify(&inst);
        let code = construct_for(&inst, &c, PrimeField::binary(), DEFAULT_FIELD_CAP).unwrap().code;
        let extra: Vec<MessageSet> = inst
            .present_iter()
            .enumerate()
            .filter(|(i, _)| drop >> (i % 64) & 1 == 1)
            .map(|(_, h)| h)
            .collect();
        let fewer = PicInstance::from_absent(inst.m(), inst.absent().iter().copied().chain(extra)).unwrap();
        prop_assert!(verify_code(&fewer, &code).unwrap().passed());
    }
}

#[test]
fn general_rate_never_exceeds_linear() {
    for m in 2..=3 {
        let count = (1u64 << m) - 1;
        for mask in 0..(1u64 << count) {
            let inst = instance(m, mask);
            let g = exact_general_rate(&inst, 2).unwrap().rate;
            let l = exact_linear_rate(&inst, 2).unwrap().rate;
            assert!(g <= l, "{inst:?}: general {g} > linear {l}");
        }
    }
}

#[test]
fn example_one_chain_value() {
    let s = |v: &[usize]| MessageSet::from_messages(v.iter().copied());
    let inst = PicInstance::from_absent(3, [s(&[3]), s(&[1, 3])]).unwrap();
    let v = l_star(&inst, DEFAULT_BUDGET).unwrap();
    assert!(v.value <= longest_nested_chain(&inst).length);
    assert!(3 - v.value <= classify(&inst).lower);
    assert_eq!(v.choices, 3 * 2 * 2);
}

#[test]
fn five_absent_fallback() {
    let s = |v: &[usize]| MessageSet::from_messages(v.iter().copied());
    let inst =
        PicInstance::from_absent(5, [s(&[1]), s(&[1, 2]), s(&[1, 2, 3]), s(&[4]), s(&[4, 5])])
            .unwrap();
    let c = classify(&inst);
    assert!(matches!(c.provenance, Provenance::Bounds { .. }));
    let built = construct_for(&inst, &c, PrimeField::binary(), DEFAULT_FIELD_CAP).unwrap();
    assert_eq!(built.scheme, Scheme::Fallback);
    assert_eq!(built.code.len(), 4);
    assert!(verify_code(&inst, &built.code).unwrap().passed());
}

#[test]
fn no_absent_gets_identity() {
    let inst = PicInstance::full_present(3).unwrap();
    let built = construct_for(
        &inst,
        &classify(&inst),
        PrimeField::binary(),
        DEFAULT_FIELD_CAP,
    )
    .unwrap();
    assert_eq!(built.code, CodeMatrix::identity(PrimeField::binary(), 3));
}

#[test]
fn exact_classifications_match_oracle_at_m5() {
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let all: Vec<MessageSet> = proper_subsets(5).collect();
    for _ in 0..200 {
        let k = rng.gen_range(1..=6);
        let family: Vec<MessageSet> = all.choose_multiple(&mut rng, k).copied().collect();
        let inst = PicInstance::from_absent(5, family).unwrap();
        let c = classify(&inst);
        let lin = exact_linear_rate(&inst, 2).unwrap().rate;
        if let Some(v) = c.value() {
            assert_eq!(v, lin, "{inst:?} classified as {:?}", c.provenance);
        }
        assert!(c.lower <= lin && lin <= c.upper);
    }
}
