//! Named models used throughout the tests, the classifiers and the CLI.

use num_traits::{One, Zero};

use crate::model::{Step, WeightedModel};
use crate::rational::Q;

fn build(dim: usize, steps: &[(&[i8], i64)]) -> WeightedModel {
    let v = steps.iter().map(|(c, w)| (Step::new(c.to_vec()).unwrap(), crate::rational::qi(*w)));
    WeightedModel::new(dim, v).unwrap()
}

/// `{E, W, N, S}` with unit weights.
pub fn simple_walk() -> WeightedModel {
    build(2, &[(&[1, 0], 1), (&[-1, 0], 1), (&[0, 1], 1), (&[0, -1], 1)])
}

/// `{E, N, SW}` with unit weights.
pub fn kreweras() -> WeightedModel {
    build(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, -1], 1)])
}

/// Leftmost weighted model of the order-4/6/8/10 quartet.
pub fn fig1_order4() -> WeightedModel {
    build(
        2,
        &[
            (&[-1, 0], 3),
            (&[1, 1], 15),
            (&[-1, -1], 2),
            (&[0, 1], 13),
            (&[1, 0], 9),
            (&[1, -1], 6),
            (&[-1, 1], 5),
        ],
    )
}

pub fn fig1_order6() -> WeightedModel {
    build(
        2,
        &[(&[-1, -1], 1), (&[1, 1], 7), (&[0, -1], 2), (&[0, 1], 7), (&[1, 0], 5), (&[1, -1], 1)],
    )
}

pub fn fig1_order8() -> WeightedModel {
    build(2, &[(&[1, 1], 4), (&[1, 0], 2), (&[-1, 0], 6), (&[-1, -1], 3)])
}

pub fn fig1_order10() -> WeightedModel {
    build(
        2,
        &[
            (&[-1, 0], 1),
            (&[1, 1], 1),
            (&[0, -1], 1),
            (&[0, 1], 2),
            (&[1, 0], 2),
            (&[1, -1], 1),
            (&[-1, 1], 1),
        ],
    )
}

/// The four order-10 supports up to the diagonal symmetry: the rightmost
/// quartet model, its reflection `y -> 1/y`, its reflection `x -> 1/x` and
/// its reflection through the origin.
pub fn order10_canonical() -> Vec<WeightedModel> {
    let base = fig1_order10();
    vec![
        base.clone(),
        base.reflect_axes(&[1]),
        base.reflect_axes(&[0]),
        base.reflect_axes(&[0, 1]),
    ]
}

/// `1/(yz) + 2/y + z/y + x/z + x + y/(xz) + y/x + c/z`, `c >= 0`.
pub fn a3_family1(c: &Q) -> WeightedModel {
    let mut steps: Vec<(Step, Q)> = [
        (&[0i8, -1, -1][..], 1),
        (&[0, -1, 0], 2),
        (&[0, -1, 1], 1),
        (&[1, 0, -1], 1),
        (&[1, 0, 0], 1),
        (&[-1, 1, -1], 1),
        (&[-1, 1, 0], 1),
    ]
    .iter()
    .map(|(s, w)| (Step::new(s.to_vec()).unwrap(), crate::rational::qi(*w)))
    .collect();
    if !c.is_zero() {
        steps.push((Step::new(vec![0, 0, -1]).unwrap(), c.clone()));
    }
    WeightedModel::new(3, steps).unwrap()
}

/// `a(x + y/x + z/y + 1/z) + b(1/x + x/y + y/z + z)
///  + c(y + 1/y + xz/y + y/(xz) + z/x + x/z)`, `a, b, c >= 0` not all zero.
pub fn a3_family2(a: &Q, b: &Q, c: &Q) -> Option<WeightedModel> {
    let groups: [(&Q, &[&[i8]]); 3] = [
        (a, &[&[1, 0, 0], &[-1, 1, 0], &[0, -1, 1], &[0, 0, -1]]),
        (b, &[&[-1, 0, 0], &[1, -1, 0], &[0, 1, -1], &[0, 0, 1]]),
        (c, &[&[0, 1, 0], &[0, -1, 0], &[1, -1, 1], &[-1, 1, -1], &[-1, 0, 1], &[1, 0, -1]]),
    ];
    let mut steps = Vec::new();
    for (w, list) in groups {
        if w.is_zero() {
            continue;
        }
        for s in list {
            steps.push((Step::new(s.to_vec()).unwrap(), w.clone()));
        }
    }
    WeightedModel::new(3, steps).ok()
}

/// `y/z + z/y + x/y + y/x + 1/x + x`.
pub fn b3_model1() -> WeightedModel {
    build(
        3,
        &[(&[0, 1, -1], 1), (&[0, -1, 1], 1), (&[1, -1, 0], 1), (&[-1, 1, 0], 1), (&[-1, 0, 0], 1), (&[1, 0, 0], 1)],
    )
}

/// `x/z + z/x + y/z + z/y + y/(xz) + xz/y + z + 1/z`.
pub fn b3_model2() -> WeightedModel {
    build(
        3,
        &[
            (&[1, 0, -1], 1),
            (&[-1, 0, 1], 1),
            (&[0, 1, -1], 1),
            (&[0, -1, 1], 1),
            (&[-1, 1, -1], 1),
            (&[1, -1, 1], 1),
            (&[0, 0, 1], 1),
            (&[0, 0, -1], 1),
        ],
    )
}

/// Simple walk in three dimensions: `Z/2 x D4` with all `m_ij = 2`.
pub fn simple_walk_3d() -> WeightedModel {
    build(
        3,
        &[(&[1, 0, 0], 1), (&[-1, 0, 0], 1), (&[0, 1, 0], 1), (&[0, -1, 0], 1), (&[0, 0, 1], 1), (&[0, 0, -1], 1)],
    )
}

/// Family 4a: support `{(1,-1), (-1,1), (1,0), (-1,0)}`.
pub fn family_4a(w_se: &Q, w_nw: &Q, w_e: &Q, w_w: &Q) -> Option<WeightedModel> {
    let steps = [
        (vec![1, -1], w_se.clone()),
        (vec![-1, 1], w_nw.clone()),
        (vec![1, 0], w_e.clone()),
        (vec![-1, 0], w_w.clone()),
    ];
    WeightedModel::new(2, steps.into_iter().map(|(s, w)| (Step::new(s).unwrap(), w))).ok()
}

/// Support `{(1,1), (1,0), (-1,0), (-1,-1)}` of the order-8 quartet model.
pub fn order8_family(w_ne: &Q, w_e: &Q, w_w: &Q, w_sw: &Q) -> Option<WeightedModel> {
    let steps = [
        (vec![1, 1], w_ne.clone()),
        (vec![1, 0], w_e.clone()),
        (vec![-1, 0], w_w.clone()),
        (vec![-1, -1], w_sw.clone()),
    ];
    WeightedModel::new(2, steps.into_iter().map(|(s, w)| (Step::new(s).unwrap(), w))).ok()
}

/// All eight steps of the square with unit weights.
pub fn king_walk() -> WeightedModel {
    let steps = Step::all(2).into_iter().map(|s| (s, Q::one()));
    WeightedModel::new(2, steps).unwrap()
}

/// Named models available to the CLI.
pub fn by_name(name: &str) -> Option<WeightedModel> {
    Some(match name {
        "simple-walk" => simple_walk(),
        "kreweras" => kreweras(),
        "fig1-order4" | "fig1-left" => fig1_order4(),
        "fig1-order6" => fig1_order6(),
        "fig1-order8" | "fig1-third" => fig1_order8(),
        "fig1-order10" | "fig1-right" => fig1_order10(),
        "b3-model1" => b3_model1(),
        "b3-model2" => b3_model2(),
        "simple-walk-3d" => simple_walk_3d(),
        "king" => king_walk(),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "simple-walk",
    "kreweras",
    "fig1-order4",
    "fig1-order6",
    "fig1-order8",
    "fig1-order10",
    "b3-model1",
    "b3-model2",
    "simple-walk-3d",
    "king",
];
