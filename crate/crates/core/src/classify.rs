//! Census of unweighted 2D models, weighted family checks and the 3D
//! Weyl-property drivers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::elliptic;
use crate::error::{Error, Result};
use crate::geometry::{self, canonical_triplet, label_for_triplet, CoxeterLabel, DEFAULT_ANGLE_TOL};
use crate::group::{self, Order, OrbitConfig, DEFAULT_PAIR_BOUND};
use crate::model::{Step, WeightedModel};
use crate::rational::{self, format_rational, Q};

/// Runs `f` on a dedicated pool of `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

// ---------------------------------------------------------------------------
// 2D census

/// The eight nonzero steps of the square, in the bit order used by masks.
pub const SQUARE_STEPS: [[i8; 2]; 8] = [[-1, -1], [-1, 0], [-1, 1], [0, -1], [0, 1], [1, -1], [1, 0], [1, 1]];

fn steps_of(mask: u8) -> impl Iterator<Item = [i8; 2]> {
    SQUARE_STEPS.into_iter().enumerate().filter(move |(k, _)| mask >> k & 1 == 1).map(|(_, s)| s)
}

pub fn mask_model(mask: u8) -> WeightedModel {
    let steps: Vec<(Step, Q)> = steps_of(mask).map(|s| (Step::new(s.to_vec()).unwrap(), Q::one())).collect();
    WeightedModel::new(2, steps).expect("nonempty mask")
}

/// Image of a mask under `(i, j) -> (j, i)`.
pub fn swap_mask(mask: u8) -> u8 {
    steps_of(mask).fold(0u8, |m, [i, j]| {
        let k = SQUARE_STEPS.iter().position(|s| *s == [j, i]).unwrap();
        m | 1 << k
    })
}

/// Representative of the diagonal-symmetry class.
pub fn diagonal_class(mask: u8) -> u8 {
    mask.min(swap_mask(mask))
}

/// Some step moves in each of the four directions.
pub fn uses_all_directions(mask: u8) -> bool {
    let s: Vec<[i8; 2]> = steps_of(mask).collect();
    [(0, 1), (0, -1), (1, 1), (1, -1)].iter().all(|&(axis, sign)| s.iter().any(|st| st[axis] == sign))
}

/// Rejects supports inside `{i >= j}` or `{i <= j}`: there `x - y` is
/// monotone and one of the two constraints is implied by the other, so the
/// model is really a half-plane model.
pub fn not_diagonal_half_plane(mask: u8) -> bool {
    let s: Vec<[i8; 2]> = steps_of(mask).collect();
    !(s.iter().all(|[i, j]| i >= j) || s.iter().all(|[i, j]| i <= j))
}

/// Rejects supports inside `{i + j <= 0}`, whose walks stay in a bounded
/// triangle.
pub fn not_bounded(mask: u8) -> bool {
    !steps_of(mask).all(|[i, j]| i + j <= 0)
}

pub const CENSUS_FILTERS: [(&str, fn(u8) -> bool); 3] = [
    ("all-directions", uses_all_directions),
    ("not-diagonal-half-plane", not_diagonal_half_plane),
    ("not-bounded", not_bounded),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusMode {
    Raw,
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterStage {
    pub name: String,
    pub subsets: usize,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub mask: u8,
    pub steps: Vec<String>,
    /// Number of subsets in the class (1 in raw mode).
    pub members: usize,
    pub h1: bool,
    pub order: Option<Order>,
    /// Group order `2q` predicted by a constant `r(t) = p/q`, when the curve
    /// is elliptic at the sampled `t`.
    pub elliptic_order: Option<usize>,
    pub elliptic_agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classify2DReport {
    pub mode: CensusMode,
    pub total_subsets: usize,
    pub stages: Vec<FilterStage>,
    pub classes: usize,
    pub singular: usize,
    pub finite: usize,
    pub finite_orders: BTreeMap<usize, usize>,
    pub entries: Vec<CensusEntry>,
}

impl Classify2DReport {
    pub fn summary_line(&self) -> String {
        let orders: Vec<String> = self.finite_orders.iter().map(|(o, n)| format!("{o}:{n}")).collect();
        format!(
            "{} classes, {} finite ({} singular; orders {})",
            self.classes,
            self.finite,
            self.singular,
            orders.join(" ")
        )
    }
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub bound: usize,
    pub seed: u64,
    pub elliptic: bool,
    pub jobs: Option<usize>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { bound: 32, seed: 0, elliptic: true, jobs: None }
    }
}

fn census_entry(mask: u8, members: usize, opts: &CensusOptions) -> CensusEntry {
    let model = mask_model(mask);
    let steps = steps_of(mask).map(|[i, j]| format!("{i},{j}")).collect();
    let h1 = model.check_h1().is_satisfied();
    if !h1 {
        return CensusEntry { mask, steps, members, h1, order: None, elliptic_order: None, elliptic_agrees: None };
    }
    // the seed depends only on the model, never on scheduling
    let cfg = OrbitConfig { bound: opts.bound, seed: opts.seed ^ mask as u64, ..Default::default() };
    let order = group::group_order(&model, &cfg).ok().map(|v| v.order);
    let (elliptic_order, elliptic_agrees) = if opts.elliptic {
        match elliptic::rationality_probe(&model, &elliptic::DEFAULT_T_SAMPLES, elliptic::DEFAULT_QMAX, 1e-9) {
            Ok(p) => {
                let predicted = p.predicted_order();
                let agrees = order.map(|o| o.finite() == predicted);
                (predicted, agrees)
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    CensusEntry { mask, steps, members, h1, order, elliptic_order, elliptic_agrees }
}

/// Census of the nonempty unweighted step sets of the square.
pub fn enumerate_2d_unweighted(mode: CensusMode, opts: &CensusOptions) -> Classify2DReport {
    let all: Vec<u8> = (1..=255u8).collect();
    let count_classes = |v: &[u8]| {
        let mut c: Vec<u8> = v.iter().map(|&m| diagonal_class(m)).collect();
        c.sort_unstable();
        c.dedup();
        c.len()
    };
    let mut stages = vec![FilterStage { name: "all".into(), subsets: all.len(), classes: count_classes(&all) }];
    let groups: Vec<(u8, usize)> = match mode {
        CensusMode::Raw => all.iter().map(|&m| (m, 1)).collect(),
        CensusMode::Reduced => {
            let mut kept = all.clone();
            for (name, f) in CENSUS_FILTERS {
                kept.retain(|&m| f(m));
                stages.push(FilterStage { name: name.into(), subsets: kept.len(), classes: count_classes(&kept) });
            }
            let mut classes: BTreeMap<u8, usize> = BTreeMap::new();
            for m in kept {
                *classes.entry(diagonal_class(m)).or_default() += 1;
            }
            classes.into_iter().collect()
        }
    };
    let entries: Vec<CensusEntry> =
        with_jobs(opts.jobs, || groups.par_iter().map(|&(m, n)| census_entry(m, n, opts)).collect());
    let singular = entries.iter().filter(|e| !e.h1).count();
    let mut finite_orders = BTreeMap::new();
    for e in &entries {
        if let Some(Order::Finite(n)) = e.order {
            *finite_orders.entry(n).or_default() += 1;
        }
    }
    Classify2DReport {
        mode,
        total_subsets: all.len(),
        stages,
        classes: entries.len(),
        singular,
        finite: finite_orders.values().sum(),
        finite_orders,
        entries,
    }
}

// ---------------------------------------------------------------------------
// weighted 2D families

fn w(m: &WeightedModel, i: i8, j: i8) -> Q {
    m.weight_at(&[i, j])
}

fn support_within(m: &WeightedModel, allowed: &[[i8; 2]]) -> bool {
    m.steps().all(|s| allowed.iter().any(|a| a[..] == *s.coords()))
}

/// Family 4a: `w(1,1) = w(0,1) = w(0,-1) = w(-1,-1) = 0` and
/// `w(1,-1) w(-1,1) = w(1,0) w(-1,0) != 0`.
pub fn verify_family_4a(model: &WeightedModel) -> bool {
    if model.dim() != 2 || !support_within(model, &[[1, -1], [-1, 1], [1, 0], [-1, 0]]) {
        return false;
    }
    let lhs = w(model, 1, -1) * w(model, -1, 1);
    !lhs.is_zero() && lhs == w(model, 1, 0) * w(model, -1, 0)
}

/// Support in `{(1,1), (1,0), (-1,0), (-1,-1)}` and
/// `w(1,0) w(-1,0) = w(1,1) w(-1,-1) != 0`.
pub fn verify_order8_family(model: &WeightedModel) -> bool {
    if model.dim() != 2 || !support_within(model, &[[1, 1], [1, 0], [-1, 0], [-1, -1]]) {
        return false;
    }
    let lhs = w(model, 1, 0) * w(model, -1, 0);
    !lhs.is_zero() && lhs == w(model, 1, 1) * w(model, -1, -1)
}

/// `a^e` for an integer exponent.
fn qpow(a: &Q, e: &BigInt) -> Q {
    let n: u32 = e.abs().try_into().expect("small exponent");
    let p = num_traits::pow(a.clone(), n as usize);
    if e.is_negative() {
        p.recip()
    } else {
        p
    }
}

/// Whether `model` is `mu * base(s) * alpha^s` for some positive `mu`,
/// `alpha`. Taking logarithms the condition is that `log(w / w_base)` lies
/// in the row space of `(1, s)`, i.e. `prod rho_s^{c_s} = 1` for every
/// integer relation `c` among the vectors `(1, s)`.
pub fn is_central_weighting_of(model: &WeightedModel, base: &WeightedModel) -> bool {
    if model.dim() != base.dim() || model.len() != base.len() {
        return false;
    }
    if !model.steps().zip(base.steps()).all(|(a, b)| a == b) {
        return false;
    }
    let rows: Vec<Vec<Q>> = model
        .steps()
        .map(|s| std::iter::once(Q::one()).chain(s.coords().iter().map(|&c| rational::qi(c as i64))).collect())
        .collect();
    // relations c with sum_s c_s (1, s) = 0: kernel of the transpose
    let d1 = model.dim() + 1;
    let cols: Vec<Vec<Q>> = (0..d1).map(|k| rows.iter().map(|r| r[k].clone()).collect()).collect();
    let ratios: Vec<Q> = model.weights().values().zip(base.weights().values()).map(|(a, b)| a / b).collect();
    rational::nullspace(&cols, rows.len()).iter().all(|rel| {
        let c = rational::primitive_integer(rel);
        let prod = c.iter().zip(&ratios).fold(Q::one(), |acc, (e, r)| acc * qpow(r, e));
        prod.is_one()
    })
}

/// Central weightings of the order-10 supports (the rightmost quartet model
/// and its reflections).
pub fn verify_order10_models(model: &WeightedModel) -> bool {
    model.dim() == 2 && catalog::order10_canonical().iter().any(|b| is_central_weighting_of(model, b))
}

// ---------------------------------------------------------------------------
// 3D

pub const SLICE_VALUES: [(i64, i64); 3] = [(1, 2), (1, 1), (2, 1)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    /// Frozen coordinate (0 = x, 1 = y, 2 = z).
    pub axis: usize,
    pub value: String,
    pub order: Option<Order>,
    /// `2 m` for the pair of remaining generators, when the triplet is known.
    pub expected: Option<usize>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport3D {
    pub model: String,
    /// `(m12, m13, m23)`.
    pub triplet: Option<[usize; 3]>,
    pub canonical_triplet: Option<[usize; 3]>,
    /// `(a12, a13, a23)`.
    pub a: [f64; 3],
    pub weyl: bool,
    pub reasons: Vec<String>,
    pub label: String,
    pub group_order: Option<Order>,
    pub slices: Vec<SliceReport>,
    /// Slice orders match the triplet, `a_ij = -cos(2 pi / |G_slice|)`,
    /// and no slice group has order 10.
    pub slice_condition: bool,
    pub list_entry: Option<String>,
}

/// Entry `(D_{2 m12}, D_{2 m13}, D_{2 m23})` of the list of admissible slice
/// groups, for a canonical triplet.
pub fn slice_list_entry(t: [usize; 3]) -> Option<String> {
    let ok = matches!(t, [2, 2, k] if (1..=4).contains(&k)) || t == [3, 2, 3] || t == [3, 2, 4];
    ok.then(|| format!("(D{}, D{}, D{})", 2 * t[0], 2 * t[1], 2 * t[2]))
}

#[derive(Clone, Debug)]
pub struct Check3DOptions {
    pub pair_bound: usize,
    pub group_bound: usize,
    pub seed: u64,
    pub tol: f64,
    pub slices: bool,
    pub full_order: bool,
}

impl Default for Check3DOptions {
    fn default() -> Self {
        Check3DOptions {
            pair_bound: DEFAULT_PAIR_BOUND,
            group_bound: 128,
            seed: 0,
            tol: DEFAULT_ANGLE_TOL,
            slices: true,
            full_order: true,
        }
    }
}

/// Triplet, Weyl verdict, slice groups and (optionally) the group order of a
/// 3D model.
pub fn classify3d_check(model: &WeightedModel, opts: &Check3DOptions) -> Result<WeylReport3D> {
    if model.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: model.dim() });
    }
    if let crate::H1Verdict::Violated { witness } = model.check_h1() {
        let w: Vec<String> = witness.iter().map(format_rational).collect();
        return Err(Error::H1Violated { witness: format!("({})", w.join(",")) });
    }
    let pcfg = OrbitConfig { bound: opts.pair_bound, seed: opts.seed, ..Default::default() };
    let pairs = group::pair_orders_3d(model, &pcfg)?;
    let wc = geometry::weyl_check(model, &pairs, opts.tol)?;
    let canonical = wc.triplet.map(canonical_triplet);
    let label = wc.triplet.map(label_for_triplet).unwrap_or(CoxeterLabel::Unrecognized);
    let group_order = if opts.full_order {
        let cfg = OrbitConfig { bound: opts.group_bound, seed: opts.seed, ..Default::default() };
        Some(group::group_order(model, &cfg)?.order)
    } else {
        None
    };
    let mut slices = Vec::new();
    let mut slice_condition = wc.triplet.is_some();
    if opts.slices {
        // freezing axis k leaves the pair of the other two generators
        let pair_of_axis = [2usize, 1, 0];
        for axis in [2usize, 1, 0] {
            for (p, q) in SLICE_VALUES {
                let z = rational::q(p, q);
                let s = model.slice(axis, &z)?;
                let order = if s.model.check_h1().is_satisfied() {
                    let cfg = OrbitConfig { bound: 2 * opts.pair_bound, seed: opts.seed, ..Default::default() };
                    group::group_order(&s.model, &cfg).ok().map(|v| v.order)
                } else {
                    None
                };
                let k = pair_of_axis[axis];
                let expected = wc.triplet.map(|t| 2 * t[k]);
                let mut consistent = expected.is_some() && order.and_then(Order::finite) == expected;
                if let Some(n) = order.and_then(Order::finite) {
                    let target = -(2.0 * std::f64::consts::PI / n as f64).cos();
                    consistent &= (wc.a[k] - target).abs() <= opts.tol;
                    // order-10 slices are excluded
                    consistent &= n != 10;
                }
                slice_condition &= consistent;
                slices.push(SliceReport { axis, value: format_rational(&z), order, expected, consistent });
            }
        }
    }
    let list_entry = if wc.weyl { canonical.and_then(slice_list_entry) } else { None };
    Ok(WeylReport3D {
        model: model.summary(),
        triplet: wc.triplet,
        canonical_triplet: canonical,
        a: wc.a,
        weyl: wc.weyl,
        reasons: wc.reasons,
        label: label.to_string(),
        group_order,
        slices,
        slice_condition,
        list_entry,
    })
}

// ---------------------------------------------------------------------------
// families

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "4a")]
    F4a,
    #[serde(rename = "order8-third-model")]
    Order8Third,
    #[serde(rename = "order10-triple")]
    Order10Triple,
    #[serde(rename = "A3-family1")]
    A3Family1,
    #[serde(rename = "A3-family2")]
    A3Family2,
    #[serde(rename = "B3-model1")]
    B3Model1,
    #[serde(rename = "B3-model2")]
    B3Model2,
    #[serde(rename = "Z2xD2k")]
    Z2xD2k,
}

impl FamilyId {
    pub const ALL: [FamilyId; 8] = [
        FamilyId::F4a,
        FamilyId::Order8Third,
        FamilyId::Order10Triple,
        FamilyId::A3Family1,
        FamilyId::A3Family2,
        FamilyId::B3Model1,
        FamilyId::B3Model2,
        FamilyId::Z2xD2k,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FamilyId::F4a => "4a",
            FamilyId::Order8Third => "order8-third-model",
            FamilyId::Order10Triple => "order10-triple",
            FamilyId::A3Family1 => "A3-family1",
            FamilyId::A3Family2 => "A3-family2",
            FamilyId::B3Model1 => "B3-model1",
            FamilyId::B3Model2 => "B3-model2",
            FamilyId::Z2xD2k => "Z2xD2k",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family id {s:?}")))
    }

    pub fn expected_order(self) -> Option<usize> {
        match self {
            FamilyId::F4a | FamilyId::Order8Third => Some(8),
            FamilyId::Order10Triple => Some(10),
            FamilyId::A3Family1 | FamilyId::A3Family2 => Some(24),
            FamilyId::B3Model1 | FamilyId::B3Model2 => Some(48),
            FamilyId::Z2xD2k => None,
        }
    }

    pub fn expected_triplet(self) -> Option<[usize; 3]> {
        match self {
            FamilyId::A3Family1 | FamilyId::A3Family2 => Some([3, 2, 3]),
            FamilyId::B3Model1 | FamilyId::B3Model2 => Some([3, 2, 4]),
            _ => None,
        }
    }
}

/// Parameters for [`verify_family`]. Unused fields are ignored; empty lists
/// fall back to the canonical instances.
#[derive(Clone, Debug, Default)]
pub struct FamilyParams {
    /// Weight quadruples: `(w(1,-1), w(-1,1), w(1,0), w(-1,0))` for 4a,
    /// `(w(1,1), w(1,0), w(-1,0), w(-1,-1))` for the order-8 family.
    pub weights: Vec<[Q; 4]>,
    pub c: Vec<Q>,
    pub abc: Vec<[Q; 3]>,
    /// Base 2D models for `Z2xD2k` (product with a simple step in `z`).
    pub base: Vec<WeightedModel>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCase {
    pub family: String,
    pub instance: String,
    pub model: Option<String>,
    pub accepted: bool,
    pub order: Option<Order>,
    pub expected_order: Option<usize>,
    pub triplet: Option<[usize; 3]>,
    pub weyl: Option<bool>,
    pub passed: bool,
    pub note: Option<String>,
}

fn fmt_params(p: &[Q]) -> String {
    p.iter().map(format_rational).collect::<Vec<_>>().join(",")
}

fn order_case(family: FamilyId, instance: String, model: Option<WeightedModel>, accepted: bool, expected: Option<usize>, seed: u64) -> FamilyCase {
    let Some(model) = model else {
        return FamilyCase {
            family: family.id().into(),
            instance,
            model: None,
            accepted: false,
            order: None,
            expected_order: expected,
            triplet: None,
            weyl: None,
            passed: false,
            note: Some("parameters do not define a model".into()),
        };
    };
    let cfg = OrbitConfig { bound: 32, seed, ..Default::default() };
    let (order, note) = match group::group_order(&model, &cfg) {
        Ok(v) => (Some(v.order), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let passed = accepted && order.is_some() && order.and_then(Order::finite) == expected;
    FamilyCase {
        family: family.id().into(),
        instance,
        model: Some(model.summary()),
        accepted,
        order,
        expected_order: expected,
        triplet: None,
        weyl: None,
        passed,
        note,
    }
}

fn weyl_case(family: FamilyId, instance: String, model: Option<WeightedModel>, seed: u64) -> FamilyCase {
    let expected = family.expected_order();
    let Some(model) = model else {
        return order_case(family, instance, None, false, expected, seed);
    };
    let opts = Check3DOptions { seed, ..Default::default() };
    match classify3d_check(&model, &opts) {
        Ok(r) => {
            let passed = r.weyl
                && r.canonical_triplet == family.expected_triplet()
                && r.group_order.and_then(Order::finite) == expected
                && r.slice_condition;
            FamilyCase {
                family: family.id().into(),
                instance,
                model: Some(model.summary()),
                accepted: r.weyl,
                order: r.group_order,
                expected_order: expected,
                triplet: r.canonical_triplet,
                weyl: Some(r.weyl),
                passed,
                note: (!r.reasons.is_empty()).then(|| r.reasons.join("; ")),
            }
        }
        Err(e) => FamilyCase {
            family: family.id().into(),
            instance,
            model: Some(model.summary()),
            accepted: false,
            order: None,
            expected_order: expected,
            triplet: None,
            weyl: None,
            passed: false,
            note: Some(e.to_string()),
        },
    }
}

/// Product of a 2D model with the simple step pair `z, 1/z`.
pub fn product_with_z(base: &WeightedModel) -> Result<WeightedModel> {
    if base.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: base.dim() });
    }
    let mut steps: Vec<(Step, Q)> =
        base.weights().iter().map(|(s, w)| (Step::new(vec![s.get(0), s.get(1), 0]).unwrap(), w.clone())).collect();
    steps.push((Step::new(vec![0, 0, 1])?, Q::one()));
    steps.push((Step::new(vec![0, 0, -1])?, Q::one()));
    WeightedModel::new(3, steps)
}

/// Instantiates a family and checks every instance against the orbit oracle
/// (and, in 3D, the Weyl conditions and expected triplet).
pub fn verify_family(family: FamilyId, params: &FamilyParams) -> Vec<FamilyCase> {
    let seed = params.seed;
    match family {
        FamilyId::F4a => {
            let ws = if params.weights.is_empty() {
                vec![[rational::qi(2), rational::qi(2), rational::qi(4), rational::qi(1)]]
            } else {
                params.weights.clone()
            };
            ws.iter()
                .map(|[a, b, c, d]| {
                    let m = catalog::family_4a(a, b, c, d);
                    let acc = m.as_ref().is_some_and(verify_family_4a);
                    order_case(family, fmt_params(&[a.clone(), b.clone(), c.clone(), d.clone()]), m, acc, Some(8), seed)
                })
                .collect()
        }
        FamilyId::Order8Third => {
            let ws = if params.weights.is_empty() {
                vec![[rational::qi(4), rational::qi(2), rational::qi(6), rational::qi(3)]]
            } else {
                params.weights.clone()
            };
            ws.iter()
                .map(|[a, b, c, d]| {
                    let m = catalog::order8_family(a, b, c, d);
                    let acc = m.as_ref().is_some_and(verify_order8_family);
                    order_case(family, fmt_params(&[a.clone(), b.clone(), c.clone(), d.clone()]), m, acc, Some(8), seed)
                })
                .collect()
        }
        FamilyId::Order10Triple => {
            let names = ["base", "reflect-y", "reflect-x", "reflect-xy"];
            catalog::order10_canonical()
                .into_iter()
                .zip(names)
                .map(|(m, n)| {
                    let acc = verify_order10_models(&m);
                    order_case(family, n.into(), Some(m), acc, Some(10), seed)
                })
                .collect()
        }
        FamilyId::A3Family1 => {
            let cs = if params.c.is_empty() { vec![rational::qi(0), rational::qi(1), rational::q(7, 2)] } else { params.c.clone() };
            cs.iter()
                .map(|c| {
                    let m = (!c.is_negative()).then(|| catalog::a3_family1(c));
                    weyl_case(family, format!("c={}", format_rational(c)), m, seed)
                })
                .collect()
        }
        FamilyId::A3Family2 => {
            let abc = if params.abc.is_empty() {
                [(1, 1, 1), (0, 0, 1), (2, 1, 0)].map(|(a, b, c)| [rational::qi(a), rational::qi(b), rational::qi(c)]).to_vec()
            } else {
                params.abc.clone()
            };
            abc.iter()
                .map(|[a, b, c]| {
                    let valid = ![a, b, c].iter().any(|x| x.is_negative());
                    let m = if valid { catalog::a3_family2(a, b, c) } else { None };
                    weyl_case(family, format!("a,b,c={}", fmt_params(&[a.clone(), b.clone(), c.clone()])), m, seed)
                })
                .collect()
        }
        FamilyId::B3Model1 => vec![weyl_case(family, "unweighted".into(), Some(catalog::b3_model1()), seed)],
        FamilyId::B3Model2 => vec![weyl_case(family, "unweighted".into(), Some(catalog::b3_model2()), seed)],
        FamilyId::Z2xD2k => {
            let bases = if params.base.is_empty() { vec![catalog::simple_walk()] } else { params.base.clone() };
            bases
                .iter()
                .map(|b| {
                    let cfg = OrbitConfig { bound: 32, seed, ..Default::default() };
                    let base_order = group::group_order(b, &cfg).ok().and_then(|v| v.order.finite());
                    let m = product_with_z(b).ok();
                    let mut case = order_case(family, b.summary(), m.clone(), true, base_order.map(|n| 2 * n), seed);
                    if let (Some(m), Some(n)) = (m, base_order) {
                        let pcfg = OrbitConfig { bound: DEFAULT_PAIR_BOUND, seed, ..Default::default() };
                        if let Ok(p) = group::pair_orders_3d(&m, &pcfg) {
                            if let [Order::Finite(a), Order::Finite(b2), Order::Finite(c)] = p {
                                let t = canonical_triplet([a, b2, c]);
                                case.triplet = Some(t);
                                case.passed &= t == [2, 2, n / 2];
                            } else {
                                case.passed = false;
                            }
                        }
                        let cfg = OrbitConfig { bound: 4 * n + 1, seed, ..Default::default() };
                        case.order = group::group_order(&m, &cfg).ok().map(|v| v.order);
                        case.passed &= case.order == Some(Order::Finite(2 * n));
                        case.expected_order = Some(2 * n);
                    } else {
                        case.passed = false;
                    }
                    case
                })
                .collect()
        }
    }
}

/// All instances of an A3/B3 family pass: Weyl, expected triplet and order.
#[allow(non_snake_case)]
pub fn verify_A3_B3_families(family: FamilyId, params: &FamilyParams) -> bool {
    matches!(family, FamilyId::A3Family1 | FamilyId::A3Family2 | FamilyId::B3Model1 | FamilyId::B3Model2)
        && verify_family(family, params).iter().all(|c| c.passed)
}

// ---------------------------------------------------------------------------
// 3D search

pub const SEARCH_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug)]
pub struct SearchSpec {
    /// Candidate weights per step; a zero weight means the step is absent.
    pub candidates: Vec<(Step, Vec<Q>)>,
    pub max_steps: Option<usize>,
    /// Keep one model per orbit of the coordinate permutations.
    pub symmetry_quotient: bool,
    pub pair_bound: usize,
    pub tol: f64,
    pub seed: u64,
    pub jobs: Option<usize>,
}

impl SearchSpec {
    /// Unweighted subsets of `support` (all 26 steps when `None`).
    pub fn unweighted(support: Option<Vec<Step>>, max_steps: Option<usize>) -> Self {
        let support = support.unwrap_or_else(|| Step::all(3));
        SearchSpec {
            candidates: support.into_iter().map(|s| (s, vec![Q::zero(), Q::one()])).collect(),
            max_steps,
            symmetry_quotient: false,
            pair_bound: DEFAULT_PAIR_BOUND,
            tol: DEFAULT_ANGLE_TOL,
            seed: 0,
            jobs: None,
        }
    }

    /// Number of weight assignments with at most `max_steps` present steps.
    pub fn space_size(&self) -> u128 {
        let n = self.candidates.len();
        let cap = self.max_steps.unwrap_or(n).min(n);
        // by[k] = assignments with k nonzero weights
        let mut by = vec![0u128; n + 1];
        by[0] = 1;
        for (_, ws) in &self.candidates {
            let zeros = ws.iter().filter(|w| w.is_zero()).count() as u128;
            let nonzero = ws.len() as u128 - zeros;
            for k in (0..=n).rev() {
                let keep = by[k].saturating_mul(zeros);
                let add = if k > 0 { by[k - 1].saturating_mul(nonzero) } else { 0 };
                by[k] = keep.saturating_add(add);
            }
        }
        by[..=cap].iter().fold(0u128, |a, b| a.saturating_add(*b))
    }
}

fn canonical_key(model: &WeightedModel) -> Vec<(Vec<i8>, Q)> {
    model.weights().iter().map(|(s, w)| (s.coords().to_vec(), w.clone())).collect()
}

fn is_permutation_canonical(model: &WeightedModel) -> bool {
    let own = canonical_key(model);
    const PERMS: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().all(|p| model.permute_axes(p).map(|m| canonical_key(&m) >= own).unwrap_or(true))
}

/// Enumerates the models of `spec` and returns the Weyl hits in canonical
/// (step, weight) order.
pub fn search3d(spec: &SearchSpec) -> Result<Vec<WeylReport3D>> {
    if spec.candidates.iter().any(|(s, _)| s.dim() != 3) {
        return Err(Error::InvalidArgument("search steps must be three-dimensional".into()));
    }
    let size = spec.space_size();
    if size > SEARCH_LIMIT {
        return Err(Error::SearchOverflow(size));
    }
    let cap = spec.max_steps.unwrap_or(usize::MAX);
    let mut models: Vec<WeightedModel> = Vec::new();
    let mut current: Vec<(Step, Q)> = Vec::new();
    fn rec(spec: &SearchSpec, k: usize, cap: usize, cur: &mut Vec<(Step, Q)>, out: &mut Vec<WeightedModel>) {
        if k == spec.candidates.len() {
            // H1 needs at least d + 1 steps
            if cur.len() >= 4 {
                if let Ok(m) = WeightedModel::new(3, cur.iter().cloned()) {
                    out.push(m);
                }
            }
            return;
        }
        let (step, ws) = &spec.candidates[k];
        for w in ws {
            if w.is_zero() {
                rec(spec, k + 1, cap, cur, out);
            } else if w.is_positive() && cur.len() < cap {
                cur.push((step.clone(), w.clone()));
                rec(spec, k + 1, cap, cur, out);
                cur.pop();
            }
        }
    }
    rec(spec, 0, cap, &mut current, &mut models);
    models.sort_by_key(canonical_key);
    models.dedup();
    let hits: Vec<Option<WeylReport3D>> = with_jobs(spec.jobs, || {
        models
            .par_iter()
            .map(|m| {
                if spec.symmetry_quotient && !is_permutation_canonical(m) {
                    return None;
                }
                if !m.check_h1().is_satisfied() {
                    return None;
                }
                let cp = geometry::critical_point(m, geometry::DEFAULT_GRADIENT_TOL).ok()?;
                let cov = geometry::covariance(m, &cp).ok()?;
                if cov.pairs().iter().any(|p| p.2 > spec.tol) {
                    return None;
                }
                let cfg = OrbitConfig { bound: spec.pair_bound, seed: spec.seed, ..Default::default() };
                let pairs = group::pair_orders_3d(m, &cfg).ok()?;
                if !geometry::weyl_check_with(&cov, &pairs, spec.tol).weyl {
                    return None;
                }
                let opts = Check3DOptions { pair_bound: spec.pair_bound, seed: spec.seed, tol: spec.tol, ..Default::default() };
                classify3d_check(m, &opts).ok()
            })
            .collect()
    });
    Ok(hits.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_an_involution() {
        for m in 1..=255u8 {
            assert_eq!(swap_mask(swap_mask(m)), m);
        }
        // {E, N, SW} is symmetric
        let k = SQUARE_STEPS.iter().position(|s| *s == [1, 0]).unwrap();
        let n = SQUARE_STEPS.iter().position(|s| *s == [0, 1]).unwrap();
        let sw = SQUARE_STEPS.iter().position(|s| *s == [-1, -1]).unwrap();
        let m = 1u8 << k | 1 << n | 1 << sw;
        assert_eq!(swap_mask(m), m);
    }

    #[test]
    fn family_constraints() {
        let q = rational::qi;
        assert!(verify_family_4a(&catalog::family_4a(&q(2), &q(2), &q(4), &q(1)).unwrap()));
        assert!(!verify_family_4a(&catalog::family_4a(&q(2), &q(2), &q(4), &q(2)).unwrap()));
        assert!(verify_order8_family(&catalog::fig1_order8()));
        assert!(!verify_order8_family(&catalog::order8_family(&q(1), &q(1), &q(1), &q(2)).unwrap()));
        assert!(!verify_order8_family(&catalog::kreweras()));
    }

    #[test]
    fn order10_membership() {
        let base = catalog::fig1_order10();
        assert!(verify_order10_models(&base));
        let moved = base.central_weighting(&rational::q(1, 5), &[rational::qi(2), rational::qi(3)]).unwrap();
        assert!(verify_order10_models(&moved));
        assert!(!verify_order10_models(&catalog::kreweras()));
        let mut ws: Vec<(Step, Q)> = base.weights().iter().map(|(s, w)| (s.clone(), w.clone())).collect();
        ws[0].1 += rational::q(1, 100);
        assert!(!verify_order10_models(&WeightedModel::new(2, ws).unwrap()));
    }

    #[test]
    fn search_space_counting() {
        let spec = SearchSpec::unweighted(None, Some(3));
        assert_eq!(spec.space_size(), 1 + 26 + 325 + 2600);
        assert!(matches!(search3d(&SearchSpec::unweighted(None, None)), Err(Error::SearchOverflow(_))));
    }
}
