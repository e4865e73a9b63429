mod support;

use proptest::prelude::*;
use walkgroups::classify::{self, CensusMode, CensusOptions};
use walkgroups::group::{self, Arithmetic, Order, OrbitConfig};
use walkgroups::rational::q;
use walkgroups::{catalog, WeightedModel};

fn order(m: &WeightedModel) -> Order {
    group::group_order(m, &OrbitConfig::default()).unwrap().order
}

#[test]
fn catalogue_orders() {
    for (name, expected) in [("simple-walk", 4), ("kreweras", 6), ("king", 4)] {
        assert_eq!(order(&catalog::by_name(name).unwrap()), Order::Finite(expected), "{name}");
    }
    for (name, m) in support::figure1() {
        let exact = OrbitConfig { arithmetic: Arithmetic::Rational, ..Default::default() };
        assert_eq!(group::group_order(&m, &exact).unwrap().order, order(&m), "{name}");
    }
}

#[test]
fn three_dimensional_orders() {
    assert_eq!(order(&catalog::a3_family1(&q(1, 1))), Order::Finite(24));
    assert_eq!(order(&catalog::b3_model1()), Order::Finite(48));
    assert_eq!(order(&catalog::simple_walk_3d()), Order::Finite(8));
}

#[test]
fn census_is_deterministic() {
    let opts = CensusOptions { elliptic: false, ..Default::default() };
    let a = classify::enumerate_2d_unweighted(CensusMode::Reduced, &opts);
    let b = classify::enumerate_2d_unweighted(CensusMode::Reduced, &CensusOptions { jobs: Some(3), ..opts.clone() });
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!((a.classes, a.finite), (79, 23));
}

#[test]
fn order10_supports_are_closed_under_reflection() {
    let canon = catalog::order10_canonical();
    for m in &canon {
        for axes in [&[0usize][..], &[1], &[0, 1]] {
            assert!(classify::verify_order10_models(&m.reflect_axes(axes)));
        }
        assert_eq!(order(m), Order::Finite(10));
    }
    // the diagonal symmetry maps the x- and y-reflections onto each other
    assert!(classify::verify_order10_models(&canon[1].permute_axes(&[1, 0]).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn central_weighting_preserves_the_order(seed in 0u64..1000, class in 0usize..4) {
        let mut rng = support::rng(seed);
        let base = support::figure1()[class].1.clone();
        let w = support::random_central_weighting(&mut rng, &base);
        prop_assert_eq!(order(&w), order(&base));
    }

    #[test]
    fn relabelling_preserves_the_order(seed in 0u64..1000) {
        let mut rng = support::rng(seed);
        let m = support::random_h1_model_2d(&mut rng);
        let o = order(&m);
        prop_assert_eq!(order(&m.permute_axes(&[1, 0]).unwrap()), o);
        prop_assert_eq!(order(&m.reflect_axes(&[0, 1]).reflect_axes(&[0, 1])), o);
    }

    #[test]
    fn finite_orders_are_even_and_small(seed in 0u64..1000) {
        let mut rng = support::rng(seed);
        let m = support::random_h1_model_2d(&mut rng);
        if let Order::Finite(n) = order(&m) {
            prop_assert!([4, 6, 8, 10].contains(&n));
        }
    }
}
