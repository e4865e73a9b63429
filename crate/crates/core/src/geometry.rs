//! Critical point, covariance matrix, the cone `T = Delta^{-1/2} R_+^d` and
//! its reflection group.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{self, Order};
use crate::model::{monomial, WeightedModel};
use crate::special::best_rational;

pub const DEFAULT_GRADIENT_TOL: f64 = 1e-12;
pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x0: Vec<f64>,
    /// `max_i |x_i d chi / d x_i|` for the normalized inventory.
    pub residual: f64,
    pub iterations: usize,
}

/// Gradient of the inventory in the original coordinates.
pub fn chi_gradient(model: &WeightedModel, x: &[f64]) -> Vec<f64> {
    let d = model.dim();
    let mut g = vec![0.0; d];
    for (s, w) in model.weights_f64() {
        let m = w * monomial(&s, x);
        for i in 0..d {
            if s[i] != 0 {
                g[i] += s[i] as f64 * m / x[i];
            }
        }
    }
    g
}

/// Hessian of the inventory in the original coordinates.
pub fn chi_hessian(model: &WeightedModel, x: &[f64]) -> DMatrix<f64> {
    let d = model.dim();
    let mut h = DMatrix::zeros(d, d);
    for (s, w) in model.weights_f64() {
        let m = w * monomial(&s, x);
        for i in 0..d {
            for j in 0..d {
                let si = s[i] as f64;
                let sj = s[j] as f64 - if i == j { 1.0 } else { 0.0 };
                h[(i, j)] += si * sj * m / (x[i] * x[j]);
            }
        }
    }
    h
}

/// Value, gradient and Hessian of `u -> chi(e^u)`.
fn log_derivatives(terms: &[(Vec<i8>, f64)], u: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let d = u.len();
    let mut f = 0.0;
    let mut g = DVector::zeros(d);
    let mut h = DMatrix::zeros(d, d);
    for (s, w) in terms {
        let e: f64 = s.iter().zip(u).map(|(&si, &ui)| si as f64 * ui).sum();
        let m = w * e.exp();
        f += m;
        for i in 0..d {
            g[i] += s[i] as f64 * m;
            for j in 0..d {
                h[(i, j)] += (s[i] * s[j]) as f64 * m;
            }
        }
    }
    (f, g, h)
}

/// Unique positive critical point of the inventory. Newton's method on
/// `u = log x`, where the inventory is strictly convex under (H1), started at
/// the origin with Armijo backtracking.
pub fn critical_point(model: &WeightedModel, tol: f64) -> Result<CriticalPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let terms = model.normalize().weights_f64();
    let d = model.dim();
    let mut u = DVector::<f64>::zeros(d);
    for it in 0..MAX_NEWTON {
        let (f, g, h) = log_derivatives(&terms, u.as_slice());
        let residual = g.amax();
        if residual <= tol {
            return Ok(CriticalPoint { x0: u.iter().map(|v| v.exp()).collect(), residual, iterations: it });
        }
        let Some(chol) = h.clone().cholesky() else {
            return Err(Error::NoConvergence { iterations: it, residual });
        };
        let p = -chol.solve(&g);
        let slope = g.dot(&p);
        let mut step = 1.0;
        loop {
            let trial = &u + &p * step;
            let (ft, gt, _) = log_derivatives(&terms, trial.as_slice());
            // Near the minimum f stalls at rounding level; accept a gradient decrease there.
            if ft <= f + 1e-4 * step * slope || (ft <= f * (1.0 + 1e-15) && gt.amax() < residual) {
                u = trial;
                break;
            }
            step /= 2.0;
            if step < 1e-20 {
                return Err(Error::NoConvergence { iterations: it, residual });
            }
        }
    }
    let (_, g, _) = log_derivatives(&terms, u.as_slice());
    Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: g.amax() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceData {
    pub delta: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
}

impl CovarianceData {
    pub fn dim(&self) -> usize {
        self.delta.nrows()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.delta[(i, j)]
    }

    /// Off-diagonal entries `a_ij`, `i < j`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let d = self.dim();
        let mut v = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                v.push((i, j, self.delta[(i, j)]));
            }
        }
        v
    }
}

/// `a_ij = chi_ij / sqrt(chi_ii chi_jj)` at `x0`, with exact unit diagonal.
pub fn covariance(model: &WeightedModel, x0: &CriticalPoint) -> Result<CovarianceData> {
    let d = model.dim();
    let h = chi_hessian(&model.normalize(), &x0.x0);
    for i in 0..d {
        if !(h[(i, i)] > 0.0) {
            return Err(Error::DegenerateAxis(i));
        }
    }
    let mut delta = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let v = 0.5 * (h[(i, j)] + h[(j, i)]) / (h[(i, i)] * h[(j, j)]).sqrt();
                delta[(i, j)] = v;
            }
        }
    }
    let inv = inv_sqrt(&delta)?;
    Ok(CovarianceData { delta, inv_sqrt: inv })
}

fn spectral_power(m: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Symmetric positive definite `Delta^{-1/2}`.
pub fn inv_sqrt(delta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral_power(delta, -0.5)
}

pub fn sqrt_spd(delta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral_power(delta, 0.5)
}

/// Angle class of the dihedral angle `arccos(-a_ij) = theta * pi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleOrder {
    /// `theta = 1/m`.
    Integer { m: usize },
    /// `theta = p/q` with `p > 1`.
    Rational { p: i64, q: i64 },
    Irrational,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAngle {
    pub i: usize,
    pub j: usize,
    pub a: f64,
    pub theta: f64,
    pub order: AngleOrder,
}

impl PairAngle {
    /// Order of the rotation `r_i r_j` when the angle is a rational multiple of pi.
    pub fn rotation_order(&self) -> Option<usize> {
        match self.order {
            AngleOrder::Integer { m } => Some(m),
            AngleOrder::Rational { q, .. } => Some(q as usize),
            AngleOrder::Irrational => None,
        }
    }
}

pub fn classify_angle(a: f64, qmax: usize, tol: f64) -> (f64, AngleOrder) {
    let theta = (-a).clamp(-1.0, 1.0).acos() / PI;
    for m in 2..=qmax.max(2) {
        if (theta - 1.0 / m as f64).abs() <= tol {
            return (theta, AngleOrder::Integer { m });
        }
    }
    let (p, q) = best_rational(theta, qmax as i64);
    if q > 0 && (theta - p as f64 / q as f64).abs() <= tol {
        let order = if p == 1 { AngleOrder::Integer { m: q as usize } } else { AngleOrder::Rational { p, q } };
        return (theta, order);
    }
    (theta, AngleOrder::Irrational)
}

pub fn dihedral_orders(cov: &CovarianceData, qmax: usize, tol: f64) -> Vec<PairAngle> {
    cov.pairs()
        .into_iter()
        .map(|(i, j, a)| {
            let (theta, order) = classify_angle(a, qmax, tol);
            PairAngle { i, j, a, theta, order }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoxeterLabel {
    /// Dihedral group of the given order (d = 2).
    Dihedral(usize),
    A3,
    B3,
    H3,
    /// `Z/2 x D_{2k}`, stored as `2k`.
    Z2xD(usize),
    Unrecognized,
}

impl CoxeterLabel {
    pub fn order(&self) -> Option<usize> {
        match self {
            CoxeterLabel::Dihedral(n) => Some(*n),
            CoxeterLabel::A3 => Some(24),
            CoxeterLabel::B3 => Some(48),
            CoxeterLabel::H3 => Some(120),
            CoxeterLabel::Z2xD(n) => Some(2 * n),
            CoxeterLabel::Unrecognized => None,
        }
    }
}

impl std::fmt::Display for CoxeterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoxeterLabel::Dihedral(n) => write!(f, "D{n}"),
            CoxeterLabel::A3 => write!(f, "A3"),
            CoxeterLabel::B3 => write!(f, "B3"),
            CoxeterLabel::H3 => write!(f, "H3"),
            CoxeterLabel::Z2xD(n) => write!(f, "Z2xD{n}"),
            CoxeterLabel::Unrecognized => write!(f, "unrecognized"),
        }
    }
}

/// Label of a rank-3 Coxeter triplet, matched as a multiset.
pub fn label_for_triplet(t: [usize; 3]) -> CoxeterLabel {
    let mut s = t;
    s.sort_unstable();
    match s {
        [2, 2, k] => CoxeterLabel::Z2xD(2 * k),
        [2, 3, 3] => CoxeterLabel::A3,
        [2, 3, 4] => CoxeterLabel::B3,
        [2, 3, 5] => CoxeterLabel::H3,
        _ => CoxeterLabel::Unrecognized,
    }
}

/// `(a, 2, b)` with `a <= b` when the triplet contains a 2, else sorted.
pub fn canonical_triplet(t: [usize; 3]) -> [usize; 3] {
    let mut s = t;
    s.sort_unstable();
    match s {
        [2, 2, _] => s,
        [2, a, b] => [a, 2, b],
        _ => s,
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionData {
    pub normals: Vec<DVector<f64>>,
    pub reflections: Vec<DMatrix<f64>>,
    pub angles: Vec<PairAngle>,
    pub label: CoxeterLabel,
    /// `|H|` when finite and determined.
    pub order: Option<usize>,
    pub weyl: bool,
}

/// Reflections in the facets of `T`. The facet `Delta^{-1/2} {x_i = 0}` has
/// unit normal `n_i = Delta^{1/2} e_i`, and `n_i . n_j = a_ij`.
pub fn reflection_group(cov: &CovarianceData, angles: &[PairAngle]) -> Result<ReflectionData> {
    let d = cov.dim();
    let root = sqrt_spd(&cov.delta)?;
    let normals: Vec<DVector<f64>> = (0..d).map(|i| root.column(i).into_owned()).collect();
    let reflections: Vec<DMatrix<f64>> = normals
        .iter()
        .map(|n| DMatrix::identity(d, d) - n * n.transpose() * 2.0)
        .collect();
    let all_integer = angles.iter().all(|a| matches!(a.order, AngleOrder::Integer { .. }));
    let all_rational = angles.iter().all(|a| a.rotation_order().is_some());
    let (label, order) = match d {
        1 => (CoxeterLabel::Dihedral(2), Some(2)),
        2 => match angles[0].rotation_order() {
            Some(q) => (CoxeterLabel::Dihedral(2 * q), Some(2 * q)),
            None => (CoxeterLabel::Unrecognized, None),
        },
        3 if all_integer => {
            let t = triplet_from_angles(angles).expect("three integer angles");
            let label = label_for_triplet(t);
            let order = match label.order() {
                Some(n) => Some(n),
                None => group::matrix_group_order_of(&reflections, 1000, 1e-8).ok().and_then(Order::finite),
            };
            (label, order)
        }
        _ if all_rational => (
            CoxeterLabel::Unrecognized,
            group::matrix_group_order_of(&reflections, 1000, 1e-8).ok().and_then(Order::finite),
        ),
        _ => (CoxeterLabel::Unrecognized, None),
    };
    let weyl = all_integer && label != CoxeterLabel::Unrecognized;
    Ok(ReflectionData { normals, reflections, angles: angles.to_vec(), label, order, weyl })
}

fn triplet_from_angles(angles: &[PairAngle]) -> Option<[usize; 3]> {
    let m = |i: usize, j: usize| {
        angles.iter().find(|a| a.i == i && a.j == j).and_then(|a| match a.order {
            AngleOrder::Integer { m } => Some(m),
            _ => None,
        })
    };
    Some([m(0, 1)?, m(0, 2)?, m(1, 2)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub weyl: bool,
    /// `(m12, m13, m23)` from the exact pair orders.
    pub triplet: Option<[usize; 3]>,
    /// `(a12, a13, a23)`.
    pub a: [f64; 3],
    pub reasons: Vec<String>,
}

/// Two conditions: the triplet is in `{(2,2,k), (3,2,3), (3,2,4), (3,2,5)}`
/// up to permutation, and `a_ij = -cos(pi / m_ij)` within `tol`.
pub fn weyl_check(model: &WeightedModel, pair_orders: &[Order; 3], tol: f64) -> Result<WeylCheck> {
    if model.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: model.dim() });
    }
    let cp = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    let cov = covariance(model, &cp)?;
    Ok(weyl_check_with(&cov, pair_orders, tol))
}

pub fn weyl_check_with(cov: &CovarianceData, pair_orders: &[Order; 3], tol: f64) -> WeylCheck {
    let a = [cov.a(0, 1), cov.a(0, 2), cov.a(1, 2)];
    let mut reasons = Vec::new();
    let triplet = match (pair_orders[0], pair_orders[1], pair_orders[2]) {
        (Order::Finite(x), Order::Finite(y), Order::Finite(z)) => Some([x, y, z]),
        _ => None,
    };
    let Some(t) = triplet else {
        reasons.push("pair order exceeded bound".to_string());
        return WeylCheck { weyl: false, triplet: None, a, reasons };
    };
    if label_for_triplet(t) == CoxeterLabel::Unrecognized {
        reasons.push(format!("condition 1: triplet {t:?} not in the list"));
    }
    let names = ["a12", "a13", "a23"];
    for k in 0..3 {
        let target = -(PI / t[k] as f64).cos();
        if !((a[k] - target).abs() <= tol) {
            reasons.push(format!("condition 2: {} = {:.12} differs from -cos(pi/{}) = {:.12}", names[k], a[k], t[k], target));
        }
    }
    WeylCheck { weyl: reasons.is_empty(), triplet, a, reasons }
}

#[derive(Clone, Debug)]
pub struct GeometryReport {
    pub critical: CriticalPoint,
    pub covariance: CovarianceData,
    pub reflections: ReflectionData,
}

pub fn analyze_geometry(model: &WeightedModel, qmax: usize, angle_tol: f64) -> Result<GeometryReport> {
    let critical = critical_point(model, DEFAULT_GRADIENT_TOL)?;
    let covariance = covariance(model, &critical)?;
    let angles = dihedral_orders(&covariance, qmax, angle_tol);
    let reflections = reflection_group(&covariance, &angles)?;
    Ok(GeometryReport { critical, covariance, reflections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn critical_points() {
        let cp = critical_point(&catalog::simple_walk(), 1e-12).unwrap();
        assert!(close(cp.x0[0], 1.0, 1e-12) && close(cp.x0[1], 1.0, 1e-12));
        let cp = critical_point(&catalog::kreweras(), 1e-12).unwrap();
        assert!(close(cp.x0[0], 1.0, 1e-12) && close(cp.x0[1], 1.0, 1e-12));
        let m = WeightedModel::from_pairs(2, &[(&[1, 0], (2, 1)), (&[-1, 0], (1, 1)), (&[0, 1], (1, 1)), (&[0, -1], (1, 1))]).unwrap();
        let cp = critical_point(&m, 1e-12).unwrap();
        assert!(close(cp.x0[0], 1.0 / 2f64.sqrt(), 1e-11));
        assert!(close(cp.x0[1], 1.0, 1e-11));
        assert!(cp.iterations <= 30);
    }

    #[test]
    fn covariance_examples() {
        let g = analyze_geometry(&catalog::simple_walk(), 16, 1e-9).unwrap();
        assert!(close(g.covariance.a(0, 1), 0.0, 1e-15));
        assert_eq!(g.reflections.label, CoxeterLabel::Dihedral(4));
        let g = analyze_geometry(&catalog::kreweras(), 16, 1e-9).unwrap();
        assert!(close(g.covariance.a(0, 1), 0.5, 1e-12));
        assert_eq!(g.reflections.angles[0].order, AngleOrder::Rational { p: 2, q: 3 });
        assert_eq!(g.reflections.order, Some(6));
        let s = &g.covariance.inv_sqrt;
        let r = s * s * &g.covariance.delta;
        assert!((r - DMatrix::identity(2, 2)).amax() < 1e-10);
    }

    #[test]
    fn inv_sqrt_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let s = inv_sqrt(&d).unwrap();
        assert!((s - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0])).amax() < 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(inv_sqrt(&bad), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn angle_classes() {
        assert_eq!(classify_angle(0.0, 16, 1e-9).1, AngleOrder::Integer { m: 2 });
        assert_eq!(classify_angle(-0.5, 16, 1e-9).1, AngleOrder::Integer { m: 3 });
        assert_eq!(classify_angle(0.5, 16, 1e-9).1, AngleOrder::Rational { p: 2, q: 3 });
        assert_eq!(classify_angle(0.3, 16, 1e-9).1, AngleOrder::Irrational);
    }

    #[test]
    fn reflections_are_involutions() {
        let g = analyze_geometry(&catalog::b3_model1(), 16, 1e-9).unwrap();
        for (r, n) in g.reflections.reflections.iter().zip(&g.reflections.normals) {
            assert!((r * r - DMatrix::identity(3, 3)).amax() < 1e-10);
            assert!(((r * n) + n).amax() < 1e-10);
        }
        assert_eq!(g.reflections.label, CoxeterLabel::B3);
        assert_eq!(g.reflections.order, Some(48));
    }

    #[test]
    fn triplet_canonical_form() {
        assert_eq!(canonical_triplet([4, 2, 3]), [3, 2, 4]);
        assert_eq!(canonical_triplet([3, 3, 2]), [3, 2, 3]);
        assert_eq!(canonical_triplet([2, 5, 2]), [2, 2, 5]);
        assert_eq!(label_for_triplet([3, 2, 4]), CoxeterLabel::B3);
        assert_eq!(label_for_triplet([2, 2, 2]), CoxeterLabel::Z2xD(4));
    }

    #[test]
    fn weyl_condition_two_detected() {
        let cov = CovarianceData { delta: DMatrix::identity(3, 3), inv_sqrt: DMatrix::identity(3, 3) };
        let w = weyl_check_with(&cov, &[Order::Finite(3), Order::Finite(2), Order::Finite(4)], 1e-9);
        assert!(!w.weyl);
        assert!(w.reasons.iter().any(|r| r.starts_with("condition 2")));
    }
}
