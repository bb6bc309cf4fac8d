//! Category and duoidal laws on random diagrams.

mod common;

use common::*;
use physduo::zetless::encode;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn compose_is_associative(seed in any::<u64>()) {
        prop_assert_eq!(law_compose_associative(seed), Ok(()));
    }

    #[test]
    fn identities_are_units(seed in any::<u64>()) {
        prop_assert_eq!(law_compose_unital(seed), Ok(()));
    }

    #[test]
    fn tensor_and_sequence_are_associative(seed in any::<u64>()) {
        prop_assert_eq!(law_products_associative(seed), Ok(()));
    }

    #[test]
    fn tensor_and_sequence_share_a_unit(seed in any::<u64>()) {
        prop_assert_eq!(law_shared_unit(seed), Ok(()));
    }

    #[test]
    fn composition_interchanges_with_tensor(seed in any::<u64>()) {
        prop_assert_eq!(law_interchange_tensor(seed), Ok(()));
    }

    #[test]
    fn composition_interchanges_with_sequence(seed in any::<u64>()) {
        prop_assert_eq!(law_interchange_sequence(seed), Ok(()));
    }

    #[test]
    fn distributor_is_natural(seed in any::<u64>()) {
        prop_assert_eq!(law_dist_natural(seed), Ok(()));
    }

    #[test]
    fn symmetry_is_natural(seed in any::<u64>()) {
        prop_assert_eq!(law_symmetry_natural(seed), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_diagrams_are_valid(seed in any::<u64>()) {
        let d = diagram_from_seed(seed, 5);
        prop_assert_eq!(d.validate(), Ok(()));
        let p = d.derived_poset().unwrap();
        let target = encode(d.target());
        let outs = d.output_wires();
        for (a, &x) in outs.iter().enumerate() {
            for (b, &y) in outs.iter().enumerate() {
                prop_assert!(!p.leq(x, y) || target.leq(a, b));
            }
        }
    }

    #[test]
    fn output_order_ignores_node_order(seed in any::<u64>()) {
        let d = diagram_from_seed(seed, 4);
        let outs = d.output_wires();
        let first = d.derived_poset().unwrap().restrict(outs);
        for order in feasible_orders(&d).unwrap() {
            prop_assert_eq!(&d.derived_poset_along(&order).unwrap().restrict(outs), &first);
        }
    }

    #[test]
    fn inputs_sit_below_outputs(seed in any::<u64>()) {
        let d = diagram_from_seed(seed, 4);
        let p = d.derived_poset().unwrap();
        for n in d.generator_nodes() {
            let node = &d.nodes()[n];
            let (live, level) = d.level_before(n).unwrap();
            let pos = node.inputs.iter().map(|w| live.binary_search(w).unwrap());
            prop_assert!(level.subset(pos).unwrap().is_interval());
            for &i in &node.inputs {
                for &o in &node.outputs {
                    prop_assert!(p.lt(i, o));
                }
            }
        }
    }

    #[test]
    fn relabelling_is_functorial(seed in any::<u64>()) {
        use physduo::SignatureHom;
        let s = signature();
        let mut r = rng(seed);
        let a = random_diagram(&mut r, &s, 3);
        let b = random_diagram_from(&mut r, &s, a.target(), 3);
        let id = SignatureHom::identity(&s);
        prop_assert!(a.relabel(&id).equal(&a));
        let ab = a.compose(&b).unwrap();
        prop_assert!(ab.relabel(&id).equal(&a.relabel(&id).compose(&b.relabel(&id)).unwrap()));
    }
}
