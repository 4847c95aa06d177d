use num_bigint::BigInt;
use proptest::prelude::*;
use theta_core::expansion::{build_cylinder, digit_stream, verify_metric, DigitWord};
use theta_core::FieldSpec;

fn word() -> impl Strategy<Value = DigitWord> {
    prop_oneof![Just(2u64), Just(3), Just(5)].prop_flat_map(|m| {
        prop::collection::vec(m..m + 40, 1..=12)
            .prop_map(move |d| DigitWord::new(d, FieldSpec::new(m).unwrap()).unwrap())
    })
}

proptest! {
    #[test]
    fn metric_bounds_hold(w in word()) {
        prop_assert!(verify_metric::<BigInt>(&w).unwrap().all_ok());
    }

    #[test]
    fn machine_and_big_integers_agree(w in word()) {
        let small = build_cylinder::<i128>(&w).unwrap();
        let big = build_cylinder::<BigInt>(&w).unwrap();
        prop_assert_eq!(small.length.to_big(), big.length);
    }

    #[test]
    fn cylinder_midpoint_expands_to_word(w in word()) {
        let mid = build_cylinder::<BigInt>(&w).unwrap().midpoint();
        let e = digit_stream(&mid, w.len()).unwrap();
        prop_assert_eq!(e.word.digits(), w.digits());
    }
}
