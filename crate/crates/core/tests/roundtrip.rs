//! Serialization and decomposition round trips.

mod common;

use common::*;
use physduo::Expression;
use proptest::prelude::*;

fn expression() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![Just(Expression::Unit), "[A-D][a-z0-9]{0,2}".prop_map(Expression::atom)];
    leaf.prop_recursive(4, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expression::seq_all),
            prop::collection::vec(inner, 2..4).prop_map(Expression::par_all),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn expressions_round_trip(seed in any::<u64>()) {
        prop_assert_eq!(expression_round_trip(seed), Ok(()));
    }

    #[test]
    fn printing_then_parsing_is_the_identity(e in expression()) {
        let back: Expression = e.to_string().parse().unwrap();
        prop_assert_eq!(back, e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn diagrams_round_trip(seed in any::<u64>()) {
        prop_assert_eq!(diagram_round_trip(seed), Ok(()));
    }
}
