//! Shared fixtures: the golden set of 2D models and random model generators.
#![allow(dead_code)]

use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walkgroups::classify::{self, CensusMode, CensusOptions};
use walkgroups::group::{self, Order, OrbitConfig};
use walkgroups::rational::{q, Q};
use walkgroups::{catalog, Step, WeightedModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_q(rng: &mut ChaCha8Rng, max: i64) -> Q {
    q(rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Random weights `p/q` (`1 <= p, q <= 6`) on a random support of the square
/// satisfying H1.
pub fn random_h1_model_2d(rng: &mut ChaCha8Rng) -> WeightedModel {
    loop {
        let mask: u8 = rng.gen_range(1..=255);
        let steps: Vec<(Step, Q)> = classify::SQUARE_STEPS
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, s)| (Step::new(s.to_vec()).unwrap(), small_q(rng, 6)))
            .collect();
        let m = WeightedModel::new(2, steps).unwrap();
        if m.check_h1().is_satisfied() {
            return m;
        }
    }
}

/// Random weights on a random support in `{-1,0,1}^d` satisfying H1.
pub fn random_h1_model(rng: &mut ChaCha8Rng, d: usize) -> WeightedModel {
    let all = Step::all(d);
    loop {
        let mut steps: Vec<(Step, Q)> = Vec::new();
        for s in &all {
            if rng.gen_bool(if d == 2 { 0.5 } else { 0.3 }) {
                steps.push((s.clone(), small_q(rng, 6)));
            }
        }
        if steps.len() <= d {
            continue;
        }
        let m = WeightedModel::new(d, steps).unwrap();
        if m.check_h1().is_satisfied() {
            return m;
        }
    }
}

pub fn random_central_weighting(rng: &mut ChaCha8Rng, m: &WeightedModel) -> WeightedModel {
    let mu = small_q(rng, 5);
    let alpha: Vec<Q> = (0..m.dim()).map(|_| small_q(rng, 5)).collect();
    m.central_weighting(&mu, &alpha).unwrap()
}

pub fn figure1() -> Vec<(&'static str, WeightedModel)> {
    vec![
        ("fig1-order4", catalog::fig1_order4()),
        ("fig1-order6", catalog::fig1_order6()),
        ("fig1-order8", catalog::fig1_order8()),
        ("fig1-order10", catalog::fig1_order10()),
    ]
}

/// Ten random central weightings of finite unweighted census classes.
pub fn random_finite(seed: u64) -> Vec<WeightedModel> {
    let census = classify::enumerate_2d_unweighted(CensusMode::Reduced, &CensusOptions { elliptic: false, ..Default::default() });
    let finite: Vec<WeightedModel> = census
        .entries
        .iter()
        .filter(|e| e.order.is_some_and(Order::is_finite))
        .map(|e| classify::mask_model(e.mask))
        .collect();
    let mut r = rng(seed);
    (0..10)
        .map(|_| {
            let base = &finite[r.gen_range(0..finite.len())];
            random_central_weighting(&mut r, base)
        })
        .collect()
}

/// Ten random weighted models whose group exceeds the default bound.
pub fn random_infinite(seed: u64) -> Vec<WeightedModel> {
    let mut r = rng(seed);
    let cfg = OrbitConfig::default();
    let mut out = Vec::new();
    while out.len() < 10 {
        let m = random_h1_model_2d(&mut r);
        if matches!(group::group_order(&m, &cfg).unwrap().order, Order::ExceedsBound(_)) {
            out.push(m);
        }
    }
    out
}

/// Figure 1 models, Kreweras, the simple walk, 10 random finite and 10
/// random infinite models.
pub fn golden_2d() -> Vec<(String, WeightedModel)> {
    let mut v: Vec<(String, WeightedModel)> = figure1().into_iter().map(|(n, m)| (n.to_string(), m)).collect();
    v.push(("kreweras".into(), catalog::kreweras()));
    v.push(("simple-walk".into(), catalog::simple_walk()));
    for (k, m) in random_finite(11).into_iter().enumerate() {
        v.push((format!("random-finite-{k}"), m));
    }
    for (k, m) in random_infinite(12).into_iter().enumerate() {
        v.push((format!("random-infinite-{k}"), m));
    }
    v
}

pub fn golden_3d_finite() -> Vec<(String, WeightedModel)> {
    let mut v = Vec::new();
    for c in [q(0, 1), Q::one(), q(7, 2)] {
        v.push((format!("A3-family1 c={c}"), catalog::a3_family1(&c)));
    }
    for (a, b, c) in [(1, 1, 1), (0, 0, 1), (2, 1, 0)] {
        let m = catalog::a3_family2(&q(a, 1), &q(b, 1), &q(c, 1)).unwrap();
        v.push((format!("A3-family2 {a},{b},{c}"), m));
    }
    v.push(("B3-model1".into(), catalog::b3_model1()));
    v.push(("B3-model2".into(), catalog::b3_model2()));
    v.push(("simple-walk-3d".into(), catalog::simple_walk_3d()));
    v
}
