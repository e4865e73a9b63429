//! The group of the walk: birational involutions, exact orbit search and the
//! Jacobian representation at the critical point.
//!
//! Group elements are never expanded as rational functions. Two words are
//! identified when their images agree at a handful of random rational test
//! points, and every finite verdict is confirmed with a second, independent
//! point set before it is returned.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::WeightedModel;
use crate::rational::{self, Q};

/// Field in which words are evaluated.
pub trait Scalar: Clone + Eq + Hash + Debug {
    fn from_q(r: &Q) -> Option<Self>;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
}

impl Scalar for Q {
    fn from_q(r: &Q) -> Option<Self> {
        Some(r.clone())
    }
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Residues modulo the Mersenne prime `2^61 - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModP(u64);

impl ModP {
    pub const P: u64 = (1 << 61) - 1;

    pub fn new(v: u64) -> Self {
        ModP(v % Self::P)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn reduce(x: u128) -> u64 {
        let p = Self::P as u128;
        let folded = (x & p) + (x >> 61);
        let folded = (folded & p) + (folded >> 61);
        let r = folded as u64;
        if r >= Self::P {
            r - Self::P
        } else {
            r
        }
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = ModP(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl Scalar for ModP {
    fn from_q(r: &Q) -> Option<Self> {
        let p = num_bigint::BigInt::from(Self::P);
        let modp = |x: &num_bigint::BigInt| {
            let m = ((x % &p) + &p) % &p;
            ModP(m.to_u64().expect("residue fits"))
        };
        let den = modp(r.denom());
        Some(modp(r.numer()).mul(&den.inv()?))
    }
    fn zero() -> Self {
        ModP(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, other: &Self) -> Self {
        let s = self.0 + other.0;
        ModP(if s >= Self::P { s - Self::P } else { s })
    }
    fn mul(&self, other: &Self) -> Self {
        ModP(Self::reduce(self.0 as u128 * other.0 as u128))
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(Self::P - 2))
        }
    }
}

/// Laurent polynomial in `d` variables with exponents in `{-1,0,1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    pub terms: Vec<(Vec<i8>, Q)>,
}

impl LaurentPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval_exact(&self, x: &[Q]) -> Result<Q> {
        let inv = invert_all(x)?;
        Ok(eval_terms(&self.terms, x, &inv))
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, w)| rational::to_f64(w) * crate::model::monomial(e, x))
            .sum()
    }

    /// Partial derivative along coordinate `j`, evaluated in double precision.
    pub fn partial_f64(&self, j: usize, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e[j] != 0)
            .map(|(e, w)| rational::to_f64(w) * e[j] as f64 * crate::model::monomial(e, x) / x[j])
            .sum()
    }
}

/// `phi_i`: replaces `x_i` by `C_i / (A_i x_i)`, where
/// `chi = x_i A_i + B_i + C_i / x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BirationalGenerator {
    pub index: usize,
    pub dim: usize,
    pub a: LaurentPoly,
    pub b: LaurentPoly,
    pub c: LaurentPoly,
}

impl BirationalGenerator {
    pub fn apply_exact(&self, point: &[Q]) -> Result<Vec<Q>> {
        let compiled = Compiled::<Q>::new(self).ok_or(Error::Pole { index: self.index })?;
        compiled.apply(point).ok_or(Error::Pole { index: self.index })
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        let a = self.a.eval_f64(x);
        let c = self.c.eval_f64(x);
        let mut out = x.to_vec();
        out[self.index] = c / (a * x[self.index]);
        out
    }

    /// Jacobian matrix at `x` (closed-form derivative of the rational map).
    pub fn jacobian_f64(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let i = self.index;
        let a = self.a.eval_f64(x);
        let c = self.c.eval_f64(x);
        let mut m = DMatrix::<f64>::identity(d, d);
        for j in 0..d {
            m[(i, j)] = if j == i {
                -c / (a * x[i] * x[i])
            } else {
                let da = self.a.partial_f64(j, x);
                let dc = self.c.partial_f64(j, x);
                (dc * a - c * da) / (a * a * x[i])
            };
        }
        m
    }
}

/// Decomposes the inventory along every axis and returns `phi_1 .. phi_d`.
pub fn build_generators(model: &WeightedModel) -> Result<Vec<BirationalGenerator>> {
    let d = model.dim();
    let mut gens = Vec::with_capacity(d);
    for i in 0..d {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for (s, w) in model.weights() {
            let mut e = s.coords().to_vec();
            let k = e[i];
            e[i] = 0;
            match k {
                1 => a.push((e, w.clone())),
                -1 => c.push((e, w.clone())),
                _ => b.push((e, w.clone())),
            }
        }
        if a.is_empty() || c.is_empty() {
            return Err(Error::DegenerateGenerator { index: i });
        }
        gens.push(BirationalGenerator {
            index: i,
            dim: d,
            a: LaurentPoly { terms: a },
            b: LaurentPoly { terms: b },
            c: LaurentPoly { terms: c },
        });
    }
    Ok(gens)
}

/// Exact image of a point; `Err(Pole)` when a denominator vanishes.
pub fn apply_generator(gen: &BirationalGenerator, point: &[Q]) -> Result<Vec<Q>> {
    if point.len() != gen.dim {
        return Err(Error::DimensionMismatch { expected: gen.dim, got: point.len() });
    }
    gen.apply_exact(point)
}

fn invert_all<F: Scalar>(x: &[F]) -> Result<Vec<F>> {
    x.iter()
        .enumerate()
        .map(|(k, v)| v.inv().ok_or(Error::ZeroCoordinate(k)))
        .collect()
}

fn eval_terms<F: Scalar>(terms: &[(Vec<i8>, F)], x: &[F], inv: &[F]) -> F
where
    F: Scalar,
{
    let mut acc = F::zero();
    for (e, w) in terms {
        let mut t = w.clone();
        for (k, &p) in e.iter().enumerate() {
            match p {
                1 => t = t.mul(&x[k]),
                -1 => t = t.mul(&inv[k]),
                _ => {}
            }
        }
        acc = acc.add(&t);
    }
    acc
}

struct Compiled<F: Scalar> {
    index: usize,
    a: Vec<(Vec<i8>, F)>,
    c: Vec<(Vec<i8>, F)>,
}

impl<F: Scalar> Compiled<F> {
    fn new(g: &BirationalGenerator) -> Option<Self> {
        let conv = |p: &LaurentPoly| -> Option<Vec<(Vec<i8>, F)>> {
            p.terms.iter().map(|(e, w)| Some((e.clone(), F::from_q(w)?))).collect()
        };
        Some(Compiled { index: g.index, a: conv(&g.a)?, c: conv(&g.c)? })
    }

    /// `None` on a pole, including images with a zero coordinate.
    fn apply(&self, x: &[F]) -> Option<Vec<F>> {
        let inv: Vec<F> = x.iter().map(|v| v.inv()).collect::<Option<_>>()?;
        let a = eval_terms(&self.a, x, &inv);
        let c = eval_terms(&self.c, x, &inv);
        let denom = a.mul(&x[self.index]).inv()?;
        let v = c.mul(&denom);
        if v.is_zero() {
            return None;
        }
        let mut out = x.to_vec();
        out[self.index] = v;
        Some(out)
    }
}

/// Finite order or "more than `bound`".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Finite(usize),
    ExceedsBound(usize),
}

impl Order {
    pub fn finite(self) -> Option<usize> {
        match self {
            Order::Finite(n) => Some(n),
            Order::ExceedsBound(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Order::Finite(_))
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::ExceedsBound(b) => write!(f, ">{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub word_length: usize,
    pub orbit_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupVerdict {
    pub order: Order,
    pub certificate: Vec<Milestone>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    /// Exact rationals.
    Rational,
    /// Exact residues modulo `2^61 - 1`.
    Modular,
    /// Search modulo `2^61 - 1`, then confirm finite verdicts over the
    /// rationals. A spurious collision mod p can only shrink an orbit, so
    /// unbounded verdicts need no confirmation.
    Checked,
}

#[derive(Clone, Debug)]
pub struct OrbitConfig {
    pub bound: usize,
    pub test_points: usize,
    pub seed: u64,
    pub max_retries: usize,
    pub arithmetic: Arithmetic,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig { bound: 64, test_points: 3, seed: 0, max_retries: 8, arithmetic: Arithmetic::Checked }
    }
}

impl OrbitConfig {
    pub fn with_bound(bound: usize) -> Self {
        OrbitConfig { bound, ..Default::default() }
    }
}

pub const DEFAULT_GROUP_BOUND: usize = 64;
pub const DEFAULT_PAIR_BOUND: usize = 32;

fn mix(seed: u64, attempt: u64, lane: u64) -> u64 {
    let mut z = seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ lane.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Test points with coordinates `p/q`, `1 <= p, q <= 50`.
pub fn sample_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| rational::q(rng.gen_range(1..=50), rng.gen_range(1..=50)))
                .collect()
        })
        .collect()
}

enum Run {
    Done(Order, Vec<Milestone>),
    Pole,
}

fn to_field<F: Scalar>(points: &[Vec<Q>]) -> Option<Vec<F>> {
    points.iter().flatten().map(F::from_q).collect()
}

fn apply_all<F: Scalar>(g: &Compiled<F>, state: &[F], dim: usize) -> Option<Vec<F>> {
    let mut out = Vec::with_capacity(state.len());
    for chunk in state.chunks(dim) {
        out.extend(g.apply(chunk)?);
    }
    Some(out)
}

fn bfs_orbit<F: Scalar>(gens: &[Compiled<F>], start: Vec<F>, dim: usize, bound: usize) -> Run {
    let mut seen: HashSet<Vec<F>> = HashSet::new();
    seen.insert(start.clone());
    let mut frontier: VecDeque<(Vec<F>, usize)> = VecDeque::new();
    frontier.push_back((start, usize::MAX));
    let mut certificate = vec![Milestone { word_length: 0, orbit_size: 1 }];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = VecDeque::new();
        for (state, last) in frontier.drain(..) {
            for (gi, g) in gens.iter().enumerate() {
                if gi == last {
                    continue;
                }
                let Some(img) = apply_all(g, &state, dim) else {
                    return Run::Pole;
                };
                if seen.insert(img.clone()) {
                    if seen.len() > bound {
                        certificate.push(Milestone { word_length: depth, orbit_size: seen.len() });
                        return Run::Done(Order::ExceedsBound(bound), certificate);
                    }
                    next.push_back((img, gi));
                }
            }
        }
        if !next.is_empty() {
            certificate.push(Milestone { word_length: depth, orbit_size: seen.len() });
        }
        frontier = next;
    }
    Run::Done(Order::Finite(seen.len()), certificate)
}

fn cycle_length<F: Scalar>(first: &Compiled<F>, second: &Compiled<F>, start: Vec<F>, dim: usize, bound: usize) -> Run {
    let mut state = start.clone();
    for m in 1..=bound {
        let Some(s) = apply_all(second, &state, dim) else { return Run::Pole };
        let Some(s) = apply_all(first, &s, dim) else { return Run::Pole };
        if s == start {
            return Run::Done(Order::Finite(m), vec![Milestone { word_length: 2 * m, orbit_size: m }]);
        }
        state = s;
    }
    Run::Done(Order::ExceedsBound(bound), Vec::new())
}

fn verified<R>(cfg: &OrbitConfig, dim: usize, mut run: R) -> Result<GroupVerdict>
where
    R: FnMut(&[Vec<Q>]) -> Run,
{
    if cfg.test_points < 1 {
        return Err(Error::InvalidArgument("need at least one test point".into()));
    }
    let mut last_reason = String::from("evaluation poles");
    for attempt in 0..cfg.max_retries as u64 {
        let first = sample_points(dim, cfg.test_points, mix(cfg.seed, attempt, 1));
        let Run::Done(o1, cert) = run(&first) else { continue };
        let second = sample_points(dim, cfg.test_points, mix(cfg.seed, attempt, 2));
        let Run::Done(o2, _) = run(&second) else { continue };
        if o1 == o2 {
            return Ok(GroupVerdict { order: o1, certificate: cert });
        }
        last_reason = format!("inconsistent orders {o1} and {o2} across point sets");
    }
    Err(Error::SamplingFailure { attempts: cfg.max_retries, reason: last_reason })
}

fn compile_all<F: Scalar>(gens: &[BirationalGenerator]) -> Result<Vec<Compiled<F>>> {
    gens.iter()
        .map(|g| Compiled::new(g).ok_or(Error::Pole { index: g.index }))
        .collect()
}

fn group_order_in<F: Scalar>(gens: &[BirationalGenerator], dim: usize, cfg: &OrbitConfig) -> Result<GroupVerdict> {
    let compiled = compile_all::<F>(gens)?;
    verified(cfg, dim, |pts| match to_field::<F>(pts) {
        Some(start) => bfs_orbit(&compiled, start, dim, cfg.bound),
        None => Run::Pole,
    })
}

/// Order of the group generated by `phi_1, ..., phi_d`, by breadth-first
/// search over reduced words.
pub fn group_order(model: &WeightedModel, cfg: &OrbitConfig) -> Result<GroupVerdict> {
    if cfg.bound < 2 {
        return Err(Error::InvalidArgument("bound must be at least 2".into()));
    }
    let gens = build_generators(model)?;
    match cfg.arithmetic {
        Arithmetic::Rational => group_order_in::<Q>(&gens, model.dim(), cfg),
        Arithmetic::Modular => group_order_in::<ModP>(&gens, model.dim(), cfg),
        Arithmetic::Checked => {
            let fast = group_order_in::<ModP>(&gens, model.dim(), cfg)?;
            if fast.order.is_finite() {
                group_order_in::<Q>(&gens, model.dim(), cfg)
            } else {
                Ok(fast)
            }
        }
    }
}

fn pair_order_in<F: Scalar>(gens: &[BirationalGenerator], i: usize, j: usize, dim: usize, cfg: &OrbitConfig) -> Result<GroupVerdict> {
    let compiled = compile_all::<F>(gens)?;
    verified(cfg, dim, |pts| match to_field::<F>(pts) {
        Some(start) => cycle_length(&compiled[i], &compiled[j], start, dim, cfg.bound),
        None => Run::Pole,
    })
}

/// Order of `phi_i o phi_j` (0-based indices).
pub fn pair_order(model: &WeightedModel, i: usize, j: usize, cfg: &OrbitConfig) -> Result<Order> {
    let d = model.dim();
    if i == j || i >= d || j >= d {
        return Err(Error::InvalidArgument(format!("invalid generator pair ({i}, {j})")));
    }
    let gens = build_generators(model)?;
    let v = match cfg.arithmetic {
        Arithmetic::Rational => pair_order_in::<Q>(&gens, i, j, d, cfg)?,
        Arithmetic::Modular => pair_order_in::<ModP>(&gens, i, j, d, cfg)?,
        Arithmetic::Checked => {
            let fast = pair_order_in::<ModP>(&gens, i, j, d, cfg)?;
            if fast.order.is_finite() {
                pair_order_in::<Q>(&gens, i, j, d, cfg)?
            } else {
                fast
            }
        }
    };
    Ok(v.order)
}

/// `(m12, m13, m23)` for a 3D model.
pub fn pair_orders_3d(model: &WeightedModel, cfg: &OrbitConfig) -> Result<[Order; 3]> {
    Ok([pair_order(model, 0, 1, cfg)?, pair_order(model, 0, 2, cfg)?, pair_order(model, 1, 2, cfg)?])
}

#[derive(Clone, Debug)]
pub struct JacobianRep {
    pub base_point: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
}

/// Jacobians of the generators at `x0`, which must be fixed by each of them.
pub fn jacobians_at(model: &WeightedModel, x0: &[f64]) -> Result<JacobianRep> {
    jacobians_at_tol(model, x0, 1e-7)
}

pub fn jacobians_at_tol(model: &WeightedModel, x0: &[f64], fix_tol: f64) -> Result<JacobianRep> {
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: x0.len() });
    }
    let gens = build_generators(model)?;
    let mut matrices = Vec::with_capacity(gens.len());
    for g in &gens {
        let img = g.apply_f64(x0);
        let deviation = img
            .iter()
            .zip(x0)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        if !(deviation <= fix_tol) {
            return Err(Error::NotFixed { index: g.index, deviation });
        }
        matrices.push(g.jacobian_f64(x0));
    }
    Ok(JacobianRep { base_point: x0.to_vec(), matrices })
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Order of the group generated by `generators`, deduplicating products by
/// entrywise distance below `tol`.
pub fn matrix_group_order_of(generators: &[DMatrix<f64>], bound: usize, tol: f64) -> Result<Order> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let Some(first) = generators.first() else {
        return Ok(Order::Finite(1));
    };
    let n = first.nrows();
    let mut elements = vec![DMatrix::<f64>::identity(n, n)];
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &idx in &frontier {
            for g in generators {
                let prod = g * &elements[idx];
                let mut found = false;
                for e in &elements {
                    let dist = max_abs_diff(e, &prod);
                    if dist < tol {
                        found = true;
                        break;
                    }
                    if dist < 2.0 * tol {
                        return Err(Error::AmbiguousDedup { distance: dist });
                    }
                }
                if !found {
                    if !prod.iter().all(|v| v.is_finite()) {
                        return Ok(Order::ExceedsBound(bound));
                    }
                    elements.push(prod);
                    if elements.len() > bound {
                        return Ok(Order::ExceedsBound(bound));
                    }
                    next.push(elements.len() - 1);
                }
            }
        }
        frontier = next;
    }
    Ok(Order::Finite(elements.len()))
}

pub fn matrix_group_order(rep: &JacobianRep, bound: usize, tol: f64) -> Result<Order> {
    matrix_group_order_of(&rep.matrices, bound, tol)
}

/// Matrix-group order per element in a cyclic subgroup, used for cross-checks.
pub fn matrix_order(m: &DMatrix<f64>, bound: usize, tol: f64) -> Order {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut p = m.clone();
    for k in 1..=bound {
        if max_abs_diff(&p, &id) < tol {
            return Order::Finite(k);
        }
        p = m * &p;
    }
    Order::ExceedsBound(bound)
}

/// Histogram helper used by sweeps.
pub fn order_histogram<I: IntoIterator<Item = Order>>(orders: I) -> HashMap<String, usize> {
    let mut h = HashMap::new();
    for o in orders {
        *h.entry(o.to_string()).or_insert(0) += 1;
    }
    h
}

/// Exact identity check of a word at the given points (used by tests).
pub fn word_is_identity(model: &WeightedModel, word: &[usize], points: &[Vec<Q>]) -> Result<bool> {
    let gens = build_generators(model)?;
    for p in points {
        let mut x = p.clone();
        for &g in word.iter().rev() {
            x = gens[g].apply_exact(&x)?;
        }
        if &x != p {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::{q, qi};

    #[test]
    fn simple_walk_generators() {
        let gens = build_generators(&catalog::simple_walk()).unwrap();
        let p = vec![qi(2), qi(5)];
        assert_eq!(apply_generator(&gens[0], &p).unwrap(), vec![q(1, 2), qi(5)]);
        assert_eq!(apply_generator(&gens[1], &p).unwrap(), vec![qi(2), q(1, 5)]);
    }

    #[test]
    fn kreweras_generators() {
        let gens = build_generators(&catalog::kreweras()).unwrap();
        let p = vec![qi(2), qi(3)];
        assert_eq!(apply_generator(&gens[0], &p).unwrap(), vec![q(1, 6), qi(3)]);
        assert_eq!(apply_generator(&gens[1], &p).unwrap(), vec![qi(2), q(1, 6)]);
    }

    #[test]
    fn generators_ignore_normalization() {
        let m = catalog::fig1_order10();
        let a = build_generators(&m).unwrap();
        let b = build_generators(&m.normalize()).unwrap();
        let p = vec![q(3, 7), q(11, 5)];
        for (ga, gb) in a.iter().zip(&b) {
            assert_eq!(ga.apply_exact(&p).unwrap(), gb.apply_exact(&p).unwrap());
        }
    }

    #[test]
    fn involution_law_on_samples() {
        for m in [catalog::fig1_order4(), catalog::fig1_order10(), catalog::b3_model2()] {
            let gens = build_generators(&m).unwrap();
            for p in sample_points(m.dim(), 5, 7) {
                for g in &gens {
                    let once = g.apply_exact(&p).unwrap();
                    assert_eq!(g.apply_exact(&once).unwrap(), p);
                }
            }
        }
    }

    #[test]
    fn pole_is_reported() {
        let gens = build_generators(&catalog::simple_walk()).unwrap();
        assert!(matches!(apply_generator(&gens[0], &[qi(0), qi(1)]), Err(Error::ZeroCoordinate(0)) | Err(Error::Pole { .. })));
    }

    #[test]
    fn degenerate_generator_rejected() {
        let m = WeightedModel::unweighted(2, &[&[1, 0], &[0, 1], &[0, -1]]).unwrap();
        assert!(matches!(build_generators(&m), Err(Error::DegenerateGenerator { index: 0 })));
    }

    #[test]
    fn small_orders() {
        let cfg = OrbitConfig::default();
        assert_eq!(group_order(&catalog::simple_walk(), &cfg).unwrap().order, Order::Finite(4));
        assert_eq!(group_order(&catalog::kreweras(), &cfg).unwrap().order, Order::Finite(6));
        assert_eq!(group_order(&catalog::fig1_order8(), &cfg).unwrap().order, Order::Finite(8));
        assert_eq!(group_order(&catalog::fig1_order10(), &cfg).unwrap().order, Order::Finite(10));
        let cfg = OrbitConfig::with_bound(32);
        assert_eq!(pair_order(&catalog::simple_walk(), 0, 1, &cfg).unwrap(), Order::Finite(2));
        assert_eq!(pair_order(&catalog::kreweras(), 0, 1, &cfg).unwrap(), Order::Finite(3));
    }

    #[test]
    fn modular_matches_rational() {
        let rat = OrbitConfig { arithmetic: Arithmetic::Rational, ..Default::default() };
        let modular = OrbitConfig { arithmetic: Arithmetic::Modular, ..Default::default() };
        for m in [catalog::fig1_order6(), catalog::king_walk(), catalog::b3_model1()] {
            assert_eq!(group_order(&m, &rat).unwrap().order, group_order(&m, &modular).unwrap().order);
        }
    }

    #[test]
    fn modp_arithmetic() {
        let a = ModP::new(123456789);
        let inv = a.inv().unwrap();
        assert_eq!(a.mul(&inv), ModP(1));
        assert_eq!(ModP::from_q(&q(1, 2)).unwrap().mul(&ModP::new(2)), ModP(1));
        assert_eq!(ModP::new(ModP::P - 1).add(&ModP::new(1)), ModP(0));
    }

    #[test]
    fn jacobian_examples() {
        let rep = jacobians_at(&catalog::simple_walk(), &[1.0, 1.0]).unwrap();
        assert_eq!(rep.matrices[0], DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        let rep = jacobians_at(&catalog::kreweras(), &[1.0, 1.0]).unwrap();
        let j = &rep.matrices[0];
        let expected = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 0.0, 1.0]);
        assert!(max_abs_diff(j, &expected) < 1e-14);
        assert!(matches!(jacobians_at(&catalog::kreweras(), &[2.0, 1.0]), Err(Error::NotFixed { .. })));
    }

    #[test]
    fn matrix_orders() {
        let rep = jacobians_at(&catalog::simple_walk(), &[1.0, 1.0]).unwrap();
        assert_eq!(matrix_group_order(&rep, 64, 1e-8).unwrap(), Order::Finite(4));
        let rep = jacobians_at(&catalog::kreweras(), &[1.0, 1.0]).unwrap();
        assert_eq!(matrix_group_order(&rep, 64, 1e-8).unwrap(), Order::Finite(6));
        for m in &rep.matrices {
            let sq = m * m;
            assert!(max_abs_diff(&sq, &DMatrix::identity(2, 2)) < 1e-9);
        }
    }

    #[test]
    fn ambiguous_dedup_detected() {
        let a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let b = DMatrix::from_row_slice(1, 1, &[-1.0 - 1.5e-8]);
        assert!(matches!(matrix_group_order_of(&[a, b], 16, 1e-8), Err(Error::AmbiguousDedup { .. })));
    }

    #[test]
    fn identity_words() {
        let m = catalog::kreweras();
        let pts = sample_points(2, 3, 11);
        assert!(word_is_identity(&m, &[0, 1, 0, 1, 0, 1], &pts).unwrap());
        assert!(!word_is_identity(&m, &[0, 1], &pts).unwrap());
    }
}
