//! The kernel curve `1 - t chi(x, y) = 0` of a two-dimensional model, its
//! periods, the ratio `r(t) = omega_3 / omega_2` and the theta-series
//! identities.
//!
//! Branch points are labelled cyclically around the critical point `x0`:
//! `x2 < x0 < x3` bound the real oval on which the discriminant is positive,
//! `x4` follows `x3` and `x1` precedes `x2` on the projective line (so `x4`
//! may be negative or infinite). All integrals are evaluated in a Möbius
//! chart `u = 1/(x - p)` in which the integration arc is a finite interval,
//! and reduced to Carlson's `R_F`.

use std::f64::consts::PI;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{critical_point, DEFAULT_GRADIENT_TOL};
use crate::model::WeightedModel;
use crate::poly;
use crate::rational::{self, Q};
use crate::special::{self, best_rational, ellip_k_from_complement, jacobi_sn, theta, theta12_imaginary};

/// A point of the real projective line; `None` is infinity.
pub type Pt = Option<f64>;

pub const DEFAULT_T_SAMPLES: [f64; 3] = [0.05, 0.1, 0.2];
pub const DEFAULT_QMAX: i64 = 16;
pub const DEFAULT_T_SMALL: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];
pub const DEFAULT_PRECISION_BITS: u64 = 256;
pub const PRECISION_ENV: &str = "WALKGROUPS_PRECISION";

/// Candidate limits of `r(t)` as `t -> 0`.
pub const R0_VALUES: [(i64, i64); 13] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 5),
    (2, 7),
    (3, 4),
    (3, 5),
    (3, 7),
    (3, 8),
    (4, 7),
    (5, 7),
    (5, 8),
];

#[derive(Clone, Debug)]
pub struct KernelCurve {
    pub t: f64,
    pub t_exact: Q,
    /// `K = alpha(x) y^2 + beta(x) y + gamma(x)`; coefficients low to high.
    pub alpha: Vec<Q>,
    pub beta: Vec<Q>,
    pub gamma: Vec<Q>,
    /// `K = alpha~(y) x^2 + beta~(y) x + gamma~(y)`.
    pub alpha_t: Vec<Q>,
    pub beta_t: Vec<Q>,
    pub gamma_t: Vec<Q>,
    /// `D = beta^2 - 4 alpha gamma` and `E = beta~^2 - 4 alpha~ gamma~`, trimmed.
    pub disc_x: Vec<Q>,
    pub disc_y: Vec<Q>,
    pub base: [f64; 2],
    /// `[x1, x2, x3, x4]`.
    pub x_branch: [Pt; 4],
    pub y_branch: [Pt; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticInvariants {
    pub t: f64,
    pub x_branch: [Pt; 4],
    pub y_branch: [Pt; 4],
    pub k2: f64,
    pub kp2: f64,
    pub big_k: f64,
    pub big_kp: f64,
    /// Imaginary part of `omega_1`.
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub r: f64,
    /// `X(y*)`, the end of the `omega_3` path.
    pub x_star: f64,
    /// `w` from the algebraic data and its complement `1 - w^2`.
    pub w_alg: f64,
    pub one_minus_w2: f64,
    /// `sn(r K(k), k)`.
    pub w: f64,
    /// Nome `exp(-pi K(k) / K(k'))` and `tau = K(k) / K(k')`.
    pub q: f64,
    pub tau: f64,
}

fn to_f64s(c: &[Q]) -> Vec<f64> {
    c.iter().map(rational::to_f64).collect()
}

/// Roots of `alpha y^2 + beta y + gamma` style discriminants, labelled
/// cyclically around `c`.
fn branch_points(disc: &[Q], parts: [&[Q]; 3], c: f64, which: &str) -> Result<[Pt; 4]> {
    let deg = disc.len().saturating_sub(1);
    if deg < 3 {
        return Err(Error::GenusDegenerate(format!("{which}-discriminant has degree {deg}")));
    }
    let df = to_f64s(disc);
    let [a, b, g] = parts.map(to_f64s);
    let (da, db, dg) = (poly::derivative(&a), poly::derivative(&b), poly::derivative(&g));
    let eval = |x: f64| {
        let (av, bv, gv) = (poly::eval(&a, x), poly::eval(&b, x), poly::eval(&g, x));
        let v = bv * bv - 4.0 * av * gv;
        let dv = 2.0 * bv * poly::eval(&db, x) - 4.0 * (poly::eval(&da, x) * gv + av * poly::eval(&dg, x));
        (v, dv)
    };
    let mut pts: Vec<Pt> = Vec::new();
    for z in poly::roots(&df) {
        if z.im.abs() > 1e-7 * z.norm().max(1e-300) {
            return Err(Error::GenusDegenerate(format!("complex {which}-branch point {z}")));
        }
        pts.push(Some(poly::polish(z.re, eval)));
    }
    if deg == 3 {
        pts.push(None);
    }
    if eval(c).0 <= 0.0 {
        return Err(Error::GenusDegenerate(format!("{which}-discriminant is not positive at the base point")));
    }
    let mut keyed: Vec<(f64, Pt)> = pts.into_iter().map(|p| (uc(p, c), p)).collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
    // the u chart compresses distant clusters, so compare in x
    for w in keyed.windows(2) {
        let close = match (w[0].1, w[1].1) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12 * a.abs().max(b.abs()),
            _ => false,
        };
        if close {
            return Err(Error::GenusDegenerate(format!("colliding {which}-branch points")));
        }
    }
    // ascending u: x2, x1, x4, x3
    Ok([keyed[1].1, keyed[0].1, keyed[3].1, keyed[2].1])
}

/// The same labelling as [`branch_points`], over the rationals. Roots that
/// are too close to separate in `f64` are isolated exactly.
fn exact_branch_points(disc: &[Q], c: f64, bits: u64, which: &str) -> Result<[Option<Q>; 4]> {
    let deg = disc.len().saturating_sub(1);
    if deg < 3 {
        return Err(Error::GenusDegenerate(format!("{which}-discriminant has degree {deg}")));
    }
    let roots = poly::real_roots_exact(disc, bits)
        .ok_or_else(|| Error::GenusDegenerate(format!("repeated {which}-branch point")))?;
    if roots.len() != deg {
        return Err(Error::GenusDegenerate(format!("complex {which}-branch points")));
    }
    let cq = rational::from_f64(c).ok_or_else(|| Error::Elliptic(format!("base point {c}")))?;
    if !poly::eval_exact(disc, &cq).is_positive() {
        return Err(Error::GenusDegenerate(format!("{which}-discriminant is not positive at the base point")));
    }
    let mut keyed: Vec<(Q, Option<Q>)> = roots.into_iter().map(|x| ((&x - &cq).recip(), Some(x))).collect();
    if deg == 3 {
        keyed.push((Q::zero(), None));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let mut it = keyed.into_iter().map(|k| k.1);
    let (k0, k1, k2, k3) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    Ok([k1, k0, k3, k2])
}

fn uc(p: Pt, c: f64) -> f64 {
    match p {
        Some(x) => 1.0 / (x - c),
        None => 0.0,
    }
}

/// Builds the kernel curve of the normalized model at `t`.
pub fn kernel_curve(model: &WeightedModel, t: f64) -> Result<KernelCurve> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    let cp = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    kernel_curve_at(model, t, [cp.x0[0], cp.x0[1]])
}

/// The exact coefficient data of the curve at `t`.
struct CurvePolys {
    te: Q,
    alpha: Vec<Q>,
    beta: Vec<Q>,
    gamma: Vec<Q>,
    alpha_t: Vec<Q>,
    beta_t: Vec<Q>,
    gamma_t: Vec<Q>,
    disc_x: Vec<Q>,
    disc_y: Vec<Q>,
}

fn curve_polys(model: &WeightedModel, t: f64) -> Result<CurvePolys> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} outside (0, 1)")));
    }
    let te = rational::from_f64(t).ok_or_else(|| Error::InvalidArgument(format!("t = {t}")))?;
    let m = model.normalize();
    let w = |i: i8, j: i8| -> Q { -(&te * m.weight_at(&[i, j])) };
    let alpha = vec![w(-1, 1), w(0, 1), w(1, 1)];
    let beta = vec![w(-1, 0), Q::one(), w(1, 0)];
    let gamma = vec![w(-1, -1), w(0, -1), w(1, -1)];
    let alpha_t = vec![w(1, -1), w(1, 0), w(1, 1)];
    let beta_t = vec![w(0, -1), Q::one(), w(0, 1)];
    let gamma_t = vec![w(-1, -1), w(-1, 0), w(-1, 1)];
    let disc = |a: &[Q], b: &[Q], g: &[Q]| {
        let bb = poly::mul_exact(b, b);
        let ag = poly::mul_exact(a, g);
        let four = rational::qi(4);
        poly::trim_exact(bb.iter().zip(&ag).map(|(x, y)| x - &four * y).collect())
    };
    let disc_x = disc(&alpha, &beta, &gamma);
    let disc_y = disc(&alpha_t, &beta_t, &gamma_t);
    Ok(CurvePolys { te, alpha, beta, gamma, alpha_t, beta_t, gamma_t, disc_x, disc_y })
}

fn kernel_curve_at(model: &WeightedModel, t: f64, base: [f64; 2]) -> Result<KernelCurve> {
    let p = curve_polys(model, t)?;
    let x_branch = branch_points(&p.disc_x, [&p.alpha, &p.beta, &p.gamma], base[0], "x")?;
    let y_branch = branch_points(&p.disc_y, [&p.alpha_t, &p.beta_t, &p.gamma_t], base[1], "y")?;
    Ok(KernelCurve {
        t,
        t_exact: p.te,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        alpha_t: p.alpha_t,
        beta_t: p.beta_t,
        gamma_t: p.gamma_t,
        disc_x: p.disc_x,
        disc_y: p.disc_y,
        base,
        x_branch,
        y_branch,
    })
}

#[derive(Clone, Copy)]
enum End {
    Root(usize),
    At(f64),
}

/// `(x - xj)/(x - p) = 1 + (p - xj) u` at the point `x`, without cancellation.
fn factor(xj: Pt, x: Pt, p: f64) -> f64 {
    match (xj, x) {
        (Some(xj), Some(x)) => (x - xj) / (x - p),
        (Some(_), None) => 1.0,
        (None, Some(x)) => 1.0 / (x - p),
        (None, None) => 0.0,
    }
}

/// `u(b) - u(a)` in the chart `u = 1/(x - p)`.
fn du(a: Pt, b: Pt, p: f64) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (a - b) / ((b - p) * (a - p)),
        (None, Some(b)) => 1.0 / (b - p),
        (Some(a), None) => -1.0 / (a - p),
        (None, None) => 0.0,
    }
}

/// Signed difference `a - b` of two projective points, with an infinite
/// endpoint replaced by its sign (it cancels in every cross-ratio used here).
fn pdiff(a: Pt, b: Pt) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => a - b,
        (None, _) => 1.0,
        (_, None) => -1.0,
    }
}

struct Periods<'a> {
    roots: &'a [Pt; 4],
    lead: f64,
}

impl Periods<'_> {
    fn point(&self, e: End) -> Pt {
        match e {
            End::Root(i) => self.roots[i],
            End::At(x) => Some(x),
        }
    }

    /// `int |dx| / sqrt|D|` along the arc from `a` to `b` avoiding `p`.
    fn arc(&self, p: f64, a: End, b: End) -> Result<f64> {
        let (mut lo, mut hi) = (self.point(a), self.point(b));
        let mut d = du(lo, hi, p);
        if d < 0.0 {
            std::mem::swap(&mut lo, &mut hi);
            d = -d;
        }
        if !(d > 0.0) {
            return Err(Error::Elliptic("empty integration arc".into()));
        }
        let mut xs = [0.0; 4];
        let mut ys = [0.0; 4];
        for (j, &r) in self.roots.iter().enumerate() {
            let mut fl = factor(r, lo, p);
            let mut fh = factor(r, hi, p);
            let s = if fl.abs() > fh.abs() { fl.signum() } else { fh.signum() };
            fl *= s;
            fh *= s;
            ys[j] = fl.max(0.0).sqrt();
            xs[j] = fh.max(0.0).sqrt();
        }
        let u = |i: usize, j: usize, k: usize, l: usize| (xs[i] * xs[j] * ys[k] * ys[l] + ys[i] * ys[j] * xs[k] * xs[l]) / d;
        let u12 = u(0, 1, 2, 3);
        let u13 = u(0, 2, 1, 3);
        let u14 = u(0, 3, 1, 2);
        Ok(2.0 * special::carlson_rf(u12 * u12, u13 * u13, u14 * u14)? / self.lead.abs().sqrt())
    }
}

/// Chart centre on the arc `x4 -> x1`, opposite to the real oval.
fn opposite_point(roots: &[Pt; 4], c: f64) -> f64 {
    let u1 = uc(roots[0], c);
    let u4 = uc(roots[3], c);
    let mut best = u1 + 0.5 * (u4 - u1);
    for f in [0.25, 0.75] {
        let m = u1 + f * (u4 - u1);
        if m.abs() > best.abs() {
            best = m;
        }
    }
    c + 1.0 / best
}

fn between(p: f64, a: Pt, b: Pt, x: f64) -> bool {
    let ua = match a {
        Some(a) => 1.0 / (a - p),
        None => 0.0,
    };
    let ub = match b {
        Some(b) => 1.0 / (b - p),
        None => 0.0,
    };
    let ux = 1.0 / (x - p);
    (ua.min(ub)..=ua.max(ub)).contains(&ux)
}

impl KernelCurve {
    /// `X(y*) = -beta~(y*) / (2 alpha~(y*))`, with `y* = y2` the branch point
    /// below `y0`, where `K(x, y*)` has a double root in `x`.
    pub fn x_star(&self) -> Result<f64> {
        let Some(ys) = self.y_branch[1] else {
            return Err(Error::Elliptic("y-branch point below the base point is infinite".into()));
        };
        let a = poly::eval(&to_f64s(&self.alpha_t), ys);
        let b = poly::eval(&to_f64s(&self.beta_t), ys);
        Ok(-b / (2.0 * a))
    }

    pub fn periods(&self) -> Result<EllipticInvariants> {
        let roots = &self.x_branch;
        let c = self.base[0];
        let lead = rational::to_f64(self.disc_x.last().expect("nonempty discriminant"));
        let pr = Periods { roots, lead };
        let p = opposite_point(roots, c);
        let omega2 = 2.0 * pr.arc(p, End::Root(1), End::Root(2))?;
        let omega1 = 2.0 * pr.arc(c, End::Root(0), End::Root(1))?;
        let xs = self.x_star()?;
        if !between(p, roots[1], roots[2], xs) {
            return Err(Error::Elliptic(format!("X(y*) = {xs} lies outside the real oval")));
        }
        let omega3 = 2.0 * pr.arc(p, End::Root(1), End::At(xs))?;
        let r = omega3 / omega2;
        let [x1, x2, x3, x4] = *roots;
        let kp2 = pdiff(x2, x1) * pdiff(x4, x3) / (pdiff(x3, x1) * pdiff(x4, x2));
        let k2 = pdiff(x3, x2) * pdiff(x4, x1) / (pdiff(x3, x1) * pdiff(x4, x2));
        if !(kp2 > 0.0 && k2 > 0.0) {
            return Err(Error::Elliptic(format!("modulus out of range: k^2 = {k2}, k'^2 = {kp2}")));
        }
        let xp = Some(xs);
        let w2 = pdiff(xp, x2) * pdiff(x3, x1) / (pdiff(xp, x1) * pdiff(x3, x2));
        let one_minus_w2 = pdiff(x3, xp) * pdiff(x2, x1) / (pdiff(xp, x1) * pdiff(x3, x2));
        let big_k = ellip_k_from_complement(kp2);
        let big_kp = ellip_k_from_complement(k2);
        let w = jacobi_sn(r * big_k, kp2);
        let tau = big_k / big_kp;
        Ok(EllipticInvariants {
            t: self.t,
            x_branch: self.x_branch,
            y_branch: self.y_branch,
            k2,
            kp2,
            big_k,
            big_kp,
            omega1,
            omega2,
            omega3,
            r,
            x_star: xs,
            w_alg: w2.max(0.0).sqrt(),
            one_minus_w2,
            w,
            q: (-PI * tau).exp(),
            tau,
        })
    }
}

pub fn periods(curve: &KernelCurve) -> Result<EllipticInvariants> {
    curve.periods()
}

pub fn r_of_t(model: &WeightedModel, t: f64) -> Result<f64> {
    Ok(kernel_curve(model, t)?.periods()?.r)
}

/// Invariants at several `t`, sharing one critical point computation.
pub fn invariants_at(model: &WeightedModel, ts: &[f64]) -> Result<Vec<EllipticInvariants>> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.dim() });
    }
    let cp = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    ts.iter()
        .map(|&t| {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidArgument(format!("t = {t} outside (0, 1)")));
            }
            kernel_curve_at(model, t, [cp.x0[0], cp.x0[1]])?.periods()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ProbeVerdict {
    Rational { p: i64, q: i64, values: Vec<f64> },
    NonConstant { values: Vec<f64>, spread: f64 },
}

impl ProbeVerdict {
    /// Group order `2q` implied by a constant rational ratio.
    pub fn predicted_order(&self) -> Option<usize> {
        match self {
            ProbeVerdict::Rational { q, .. } => Some(2 * *q as usize),
            ProbeVerdict::NonConstant { .. } => None,
        }
    }
}

/// `Rational(p/q)` iff `r(t)` is within `tol` of the same `p/q`
/// (`q <= qmax`) at every sample.
pub fn rationality_probe(model: &WeightedModel, t_samples: &[f64], qmax: i64, tol: f64) -> Result<ProbeVerdict> {
    if t_samples.len() < 3 {
        return Err(Error::InvalidArgument("need at least three t samples".into()));
    }
    if t_samples.iter().any(|&t| !(t > 0.0 && t <= 0.25)) {
        return Err(Error::InvalidArgument("t samples must lie in (0, 1/4]".into()));
    }
    if qmax < 2 {
        return Err(Error::InvalidArgument("qmax must be at least 2".into()));
    }
    let values: Vec<f64> = invariants_at(model, t_samples)?.iter().map(|i| i.r).collect();
    let fits: Vec<Option<(i64, i64)>> = values
        .iter()
        .map(|&r| {
            let (p, q) = best_rational(r, qmax);
            ((r - p as f64 / q as f64).abs() <= tol).then_some((p, q))
        })
        .collect();
    if let Some(first) = fits[0] {
        if fits.iter().all(|f| *f == Some(first)) {
            return Ok(ProbeVerdict::Rational { p: first.0, q: first.1, values });
        }
    }
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    Ok(ProbeVerdict::NonConstant { values, spread })
}

/// Precision (in bits) requested through the environment, if any.
pub fn precision_from_env() -> Option<u64> {
    std::env::var(PRECISION_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|b| *b >= 53)
}

/// Exact branch data at high precision.
#[derive(Clone, Debug)]
pub struct PreciseComplements {
    pub t: f64,
    pub bits: u64,
    /// `1 - w^2`.
    pub u: Q,
    /// `1 - k^2`.
    pub v: Q,
}

fn pdiff_exact(a: &Option<Q>, b: &Option<Q>) -> Q {
    match (a, b) {
        (Some(a), Some(b)) => a - b,
        (None, _) => Q::one(),
        (_, None) => -Q::one(),
    }
}

/// `1 - w^2` and `1 - k^2` with every branch point isolated over the
/// rationals to `bits` bits (the polynomial coefficients are exact).
pub fn precise_complements(model: &WeightedModel, t: f64, bits: u64) -> Result<PreciseComplements> {
    let cp = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    precise_complements_at(model, t, [cp.x0[0], cp.x0[1]], bits)
}

fn precise_complements_at(model: &WeightedModel, t: f64, base: [f64; 2], bits: u64) -> Result<PreciseComplements> {
    let p = curve_polys(model, t)?;
    let xr = exact_branch_points(&p.disc_x, base[0], bits, "x")?;
    let yr = exact_branch_points(&p.disc_y, base[1], bits, "y")?;
    let ys = yr[1].clone().ok_or_else(|| Error::Elliptic("y-branch point below the base point is infinite".into()))?;
    let a = poly::eval_exact(&p.alpha_t, &ys);
    let b = poly::eval_exact(&p.beta_t, &ys);
    if a.is_zero() {
        return Err(Error::Elliptic("alpha~ vanishes at y*".into()));
    }
    let xs = Some(-b / (rational::qi(2) * a));
    let (x1, x2, x3, x4) = (&xr[0], &xr[1], &xr[2], &xr[3]);
    let v = pdiff_exact(x2, x1) * pdiff_exact(x4, x3) / (pdiff_exact(x3, x1) * pdiff_exact(x4, x2));
    let u = pdiff_exact(x3, &xs) * pdiff_exact(x2, x1) / (pdiff_exact(&xs, x1) * pdiff_exact(x3, x2));
    if !u.is_positive() || !v.is_positive() {
        return Err(Error::Elliptic("complements out of range".into()));
    }
    Ok(PreciseComplements { t, bits, u, v })
}

/// Natural logarithm of a positive rational of any size.
pub fn ln_q(x: &Q) -> f64 {
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = nb - db;
    let scaled = if shift >= 0 {
        x / Q::from_integer(num_bigint::BigInt::one() << shift as usize)
    } else {
        x * Q::from_integer(num_bigint::BigInt::one() << (-shift) as usize)
    };
    rational::to_f64(&scaled).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct R0Estimate {
    pub estimate: f64,
    pub t_values: Vec<f64>,
    /// `log(1 - w^2) / log(1 - k^2)`.
    pub raw_ratios: Vec<f64>,
    /// `log((1 - w^2)/4) / log((1 - k^2)/16)`.
    pub normalized_ratios: Vec<f64>,
    pub nearest: (i64, i64),
    pub distance: f64,
    pub precision_bits: Option<u64>,
}

/// Small-`t` limit of `log(1 - w^2) / log(1 - k^2)`.
///
/// Both complements behave like `4 q^r` and `16 q` in the nome, so the ratio
/// of `log` of the rescaled complements converges much faster than the raw
/// ratio; an Aitken step over the last three samples removes most of the
/// remaining geometric error. Samples with `t <= 1e-4` (or all samples when
/// a precision is requested) use exact branch points.
pub fn estimate_r0(model: &WeightedModel, t_small: &[f64], bits: Option<u64>) -> Result<R0Estimate> {
    if t_small.is_empty() {
        return Err(Error::InvalidArgument("need at least one t value".into()));
    }
    if t_small.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("t values must decrease".into()));
    }
    let cp = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    let base = [cp.x0[0], cp.x0[1]];
    let mut used_bits = None;
    let mut raw = Vec::new();
    let mut normalized = Vec::new();
    for &t in t_small {
        let (lu, lv) = if bits.is_some() || t <= 1e-4 {
            let b = bits.unwrap_or(DEFAULT_PRECISION_BITS);
            used_bits = Some(b);
            let pc = precise_complements_at(model, t, base, b)?;
            (ln_q(&pc.u), ln_q(&pc.v))
        } else {
            let inv = kernel_curve_at(model, t, base)?.periods()?;
            if !(inv.kp2 > 1e-300 && inv.one_minus_w2 > 1e-300) {
                return Err(Error::Elliptic(format!("1 - k^2 underflows at t = {t}; use a high precision")));
            }
            (inv.one_minus_w2.ln(), inv.kp2.ln())
        };
        raw.push(lu / lv);
        normalized.push((lu - 4f64.ln()) / (lv - 16f64.ln()));
    }
    let n = normalized.len();
    let estimate = if n >= 3 {
        let (a, b, c) = (normalized[n - 3], normalized[n - 2], normalized[n - 1]);
        let den = (c - b) - (b - a);
        if den.abs() > 1e-15 && ((c - b) / (b - a)).abs() < 1.0 {
            c - (c - b) * (c - b) / den
        } else {
            c
        }
    } else {
        normalized[n - 1]
    };
    let (nearest, distance) = R0_VALUES
        .iter()
        .map(|&(p, q)| ((p, q), (estimate - p as f64 / q as f64).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty list");
    Ok(R0Estimate {
        estimate,
        t_values: t_small.to_vec(),
        raw_ratios: raw,
        normalized_ratios: normalized,
        nearest,
        distance,
        precision_bits: used_bits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NomeConvention {
    /// `q = exp(-pi K(k') / K(k))`.
    Standard,
    /// `q = exp(-pi K(k) / K(k'))`.
    Complementary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCheck {
    pub convention: NomeConvention,
    pub q: f64,
    /// `|k^2 - theta_4^4 / theta_3^4|`.
    pub k2_residual: f64,
    /// `|w^2 + theta_3^2 theta_1(z)^2 / (theta_4^2 theta_2(z)^2)|`, `z = r tau / 2`.
    pub w2_residual: f64,
    /// `|sn(rK, k)^2 - w_alg^2|`.
    pub sn_residual: f64,
    /// `k^2` residual of the convention that was not selected.
    pub other_k2_residual: f64,
}

/// Theta-series prediction of `w^2`: with `z = i y`, `y = -(r/2) ln q`, the
/// quotient `theta_1(z)/theta_2(z)` is purely imaginary.
pub fn w2_from_theta(r: f64, q: f64) -> Result<f64> {
    let t3 = theta(3, 0.0, q, None)?;
    let t4 = theta(4, 0.0, q, None)?;
    let y = -0.5 * r * q.ln();
    let (s, c) = theta12_imaginary(y, q);
    Ok((t3 / t4).powi(2) * (s / c).powi(2))
}

pub fn k2_from_theta(q: f64) -> Result<f64> {
    let t3 = theta(3, 0.0, q, None)?;
    let t4 = theta(4, 0.0, q, None)?;
    Ok((t4 / t3).powi(4))
}

/// Checks both theta identities, trying the standard nome first and the
/// complementary one when the modulus identity fails.
pub fn verify_theta_identities(model: &WeightedModel, t: f64, tol: f64) -> Result<ThetaCheck> {
    let inv = kernel_curve(model, t)?.periods()?;
    theta_check_of(&inv, tol)
}

pub fn theta_check_of(inv: &EllipticInvariants, tol: f64) -> Result<ThetaCheck> {
    let q_std = (-PI * inv.big_kp / inv.big_k).exp();
    let q_cmp = (-PI * inv.big_k / inv.big_kp).exp();
    let res_std = (inv.k2 - k2_from_theta(q_std)?).abs();
    let res_cmp = (inv.k2 - k2_from_theta(q_cmp)?).abs();
    let (convention, q, k2_residual, other) = if res_std <= tol {
        (NomeConvention::Standard, q_std, res_std, res_cmp)
    } else if res_cmp <= tol {
        (NomeConvention::Complementary, q_cmp, res_cmp, res_std)
    } else {
        return Err(Error::NomeConvention(res_std, res_cmp));
    };
    let w2_alg = inv.w_alg * inv.w_alg;
    let w2_residual = (w2_alg - w2_from_theta(inv.r, q)?).abs();
    let sn_residual = (inv.w * inv.w - w2_alg).abs();
    Ok(ThetaCheck { convention, q, k2_residual, w2_residual, sn_residual, other_k2_residual: other })
}

/// `(385w^6 - 1415w^4 + 1835w^2 - 869)/(w^2-1)^3
///  + 32(k^2-1)(8w^2-13)/(w^2-1)^6 - 256(k^2-1)^2/(w^2-1)^8`.
pub fn order10_residual(w: f64, k2: f64) -> Result<f64> {
    let w2 = w * w;
    let d = w2 - 1.0;
    if d == 0.0 {
        return Err(Error::InvalidArgument("w^2 = 1 is a pole".into()));
    }
    let e = k2 - 1.0;
    Ok((385.0 * w2.powi(3) - 1415.0 * w2 * w2 + 1835.0 * w2 - 869.0) / d.powi(3)
        + 32.0 * e * (8.0 * w2 - 13.0) / d.powi(6)
        - 256.0 * e * e / d.powi(8))
}

/// The same expression in the complements `u = 1 - w^2`, `v = 1 - k^2`:
/// `64/u^3 + 160/u^2 + 260/u + 385 + 160 v/u^6 + 256 v/u^5 - 256 v^2/u^8`.
pub fn order10_residual_complement(u: &Q, v: &Q) -> Result<Q> {
    if u.is_zero() {
        return Err(Error::InvalidArgument("w^2 = 1 is a pole".into()));
    }
    let inv = u.recip();
    let p = |k: i32| num_traits::pow(inv.clone(), k as usize);
    let c = |n: i64| rational::qi(n);
    Ok(c(64) * p(3) + c(160) * p(2) + c(260) * p(1) + c(385) + c(160) * v * p(6) + c(256) * v * p(5)
        - c(256) * v * v * p(8))
}

/// Order-10 residual along decreasing `t`, with exact branch points.
pub fn order10_residuals(model: &WeightedModel, ts: &[f64], bits: u64) -> Result<Vec<f64>> {
    ts.iter()
        .map(|&t| {
            let pc = precise_complements(model, t, bits)?;
            Ok(rational::to_f64(&order10_residual_complement(&pc.u, &pc.v)?))
        })
        .collect()
}
