//! Poset constructions against brute-force oracles.

mod common;

use common::*;
use physduo::poset::TypedPoset;
use physduo::zetless::{decode, encode, enumerate, inclusion_exists, synthesize_structure_map};
use proptest::prelude::*;

#[test]
fn exhaustive_oracle_suite() {
    assert_eq!(poset_suite(300, 7), Ok(()));
}

#[test]
fn exhaustive_counts_match_known_values() {
    // labelled posets on 0..=4 points
    let counts: Vec<usize> = (0..=4).map(|n| all_posets(&vec!["A"; n]).len()).collect();
    assert_eq!(counts, [1, 1, 3, 19, 219]);
}

#[test]
fn enumeration_counts_isomorphism_classes() {
    let a = ["A".to_string()];
    let ab = ["A".to_string(), "B".to_string()];
    assert_eq!(enumerate(2, &ab).unwrap().len(), 7);
    assert_eq!(enumerate(1, &a).unwrap().len(), 1);
    assert_eq!(enumerate(3, &a).unwrap().len(), 5);
    // untyped posets on four points: 16 classes, one of which is the zigzag
    assert_eq!(enumerate(4, &a).unwrap().len(), 15);
    // brute force: classes of zetless posets among all labelled posets
    for n in 0..=4 {
        let mut classes: Vec<TypedPoset> = Vec::new();
        for p in all_posets(&vec!["A"; n]) {
            if !oracle_has_zigzag(&p) && !classes.iter().any(|q| q.is_isomorphic(&p)) {
                classes.push(p);
            }
        }
        assert_eq!(enumerate(n, &a).unwrap().len(), classes.len(), "size {n}");
    }
}

#[test]
fn zigzag_counterexample_to_the_converse() {
    // every connected pair has a span or cospan, yet the poset has a zigzag
    let p = TypedPoset::from_generators(
        ["X", "U", "Y", "V", "W"].map(String::from).to_vec(),
        &[(0, 1), (2, 1), (2, 3), (0, 4), (3, 4)],
    )
    .unwrap();
    assert!(!p.is_zetless());
    assert!(oracle_has_zigzag(&p));
    assert!((0..5).all(|x| (0..5).all(|y| p.has_span_or_cospan(x, y).unwrap())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_posets_agree_with_oracles(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 5 + (seed % 2) as usize;
        let p = random_poset(&mut r, n, &["A", "B"]);
        prop_assert_eq!(poset_properties(&p, None), Ok(()));
    }

    #[test]
    fn substitution_is_an_operad(seed in any::<u64>()) {
        prop_assert_eq!(operad_laws(&mut rng(seed)), Ok(()));
    }

    #[test]
    fn inclusion_is_a_preorder(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e1 = random_expression(&mut r, &["A", "B"], 0, 5);
        let e2 = coarsen(&mut r, &e1);
        let e3 = coarsen(&mut r, &e2);
        let (p1, p2, p3) = (encode(&e1), encode(&e2), encode(&e3));
        prop_assert!(inclusion_exists(&p1, &p1).is_some());
        prop_assert!(inclusion_exists(&p1, &p2).is_some());
        prop_assert!(inclusion_exists(&p2, &p3).is_some());
        prop_assert!(inclusion_exists(&p1, &p3).is_some());
    }

    #[test]
    fn synthesized_maps_have_the_right_type(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e1 = random_expression(&mut r, &["A", "B", "C"], 0, 6);
        let e2 = coarsen(&mut r, &e1);
        let inc = inclusion_exists(&encode(&e1), &encode(&e2)).unwrap();
        let t = synthesize_structure_map(&inc).unwrap();
        let (s, tg) = t.typing().unwrap();
        prop_assert!(s.sym_equal(&decode(inc.source()).unwrap()));
        prop_assert!(tg.sym_equal(&decode(inc.target()).unwrap()));
    }
}
