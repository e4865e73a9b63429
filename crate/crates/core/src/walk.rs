//! Exact counts of weighted walks confined to the orthant, and the
//! zero-drift reweighting at the critical point.

use std::collections::{BTreeMap, HashMap};
use std::ops::{AddAssign, Mul};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, DEFAULT_GRADIENT_TOL};
use crate::model::{monomial, WeightedModel};
use crate::rational::Q;

fn check_query(model: &WeightedModel, p: &[i64], q: &[i64]) -> Result<()> {
    for pt in [p, q] {
        if pt.len() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: pt.len() });
        }
        if pt.iter().any(|&c| c < 0) {
            return Err(Error::InvalidArgument("points must lie in the orthant".into()));
        }
    }
    Ok(())
}

/// Forward DP over layers; `record(k, layer)` sees the layer after `k` steps.
fn run<T, F>(steps: &[(Vec<i8>, T)], p: &[i64], q: &[i64], n: usize, mut record: F)
where
    T: Clone + Zero + One + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    F: FnMut(usize, &HashMap<Vec<i64>, T>),
{
    let mut layer: HashMap<Vec<i64>, T> = HashMap::new();
    layer.insert(p.to_vec(), T::one());
    record(0, &layer);
    for k in 1..=n {
        let remaining = (n - k) as i64;
        let mut next: HashMap<Vec<i64>, T> = HashMap::with_capacity(layer.len() * 2);
        for (pos, v) in &layer {
            for (s, w) in steps {
                let np: Vec<i64> = pos.iter().zip(s).map(|(&a, &b)| a + b as i64).collect();
                if np.iter().any(|&c| c < 0) {
                    continue;
                }
                // too far from the target to come back in time
                if np.iter().zip(q).any(|(&a, &b)| (a - b).abs() > remaining) {
                    continue;
                }
                *next.entry(np).or_insert_with(T::zero) += &(v * w);
            }
        }
        layer = next;
        record(k, &layer);
    }
}

fn integer_weights(model: &WeightedModel) -> Option<Vec<(Vec<i8>, BigInt)>> {
    model
        .weights()
        .iter()
        .map(|(s, w)| w.is_integer().then(|| (s.coords().to_vec(), w.to_integer())))
        .collect()
}

fn rational_weights(model: &WeightedModel) -> Vec<(Vec<i8>, Q)> {
    model.weights().iter().map(|(s, w)| (s.coords().to_vec(), w.clone())).collect()
}

/// Coefficients of `t^0 .. t^N` in `sum_n e(P, Q; n) t^n`.
pub fn series_terms(model: &WeightedModel, p: &[i64], q: &[i64], n: usize) -> Result<Vec<Q>> {
    check_query(model, p, q)?;
    let mut out = Vec::with_capacity(n + 1);
    if let Some(steps) = integer_weights(model) {
        run(&steps, p, q, n, |_, layer| {
            out.push(layer.get(q).map(|v| Q::from_integer(v.clone())).unwrap_or_else(Q::zero))
        });
    } else {
        run(&rational_weights(model), p, q, n, |_, layer| out.push(layer.get(q).cloned().unwrap_or_else(Q::zero)));
    }
    Ok(out)
}

/// Weighted number of walks of length `n` from `P` to `Q` in the orthant.
pub fn count_walks(model: &WeightedModel, p: &[i64], q: &[i64], n: usize) -> Result<Q> {
    Ok(series_terms(model, p, q, n)?.pop().expect("n + 1 terms"))
}

/// Total weight of the confined walks of each length `0..=n` from `P`,
/// whatever their endpoint.
pub fn layer_sums(model: &WeightedModel, p: &[i64], n: usize) -> Result<Vec<Q>> {
    check_query(model, p, p)?;
    let steps = rational_weights(model);
    let mut out = Vec::with_capacity(n + 1);
    let mut layer: HashMap<Vec<i64>, Q> = HashMap::new();
    layer.insert(p.to_vec(), Q::one());
    out.push(Q::one());
    for _ in 0..n {
        let mut next: HashMap<Vec<i64>, Q> = HashMap::new();
        for (pos, v) in &layer {
            for (s, w) in &steps {
                let np: Vec<i64> = pos.iter().zip(s).map(|(&a, &b)| a + b as i64).collect();
                if np.iter().all(|&c| c >= 0) {
                    *next.entry(np).or_insert_with(Q::zero) += v * w;
                }
            }
        }
        layer = next;
        out.push(layer.values().fold(Q::zero(), |a, b| a + b));
    }
    Ok(out)
}

/// Reference counts by visiting every one of the `|S|^n` step sequences,
/// keyed by endpoint. Sequences are grouped by their step histogram, whose
/// weight is a single product, so the per-sequence work is integer only.
/// Exponential; meant for small `n`.
pub fn brute_force_counts(model: &WeightedModel, p: &[i64], n: usize) -> Result<BTreeMap<Vec<i64>, Q>> {
    check_query(model, p, p)?;
    let steps = rational_weights(model);
    struct Walker<'a> {
        steps: &'a [(Vec<i8>, Q)],
        pos: Vec<i64>,
        hist: Vec<u8>,
        seen: HashMap<(Vec<i64>, Vec<u8>), u64>,
    }
    impl Walker<'_> {
        fn go(&mut self, left: usize, valid: bool) {
            if left == 0 {
                if valid {
                    *self.seen.entry((self.pos.clone(), self.hist.clone())).or_default() += 1;
                }
                return;
            }
            for k in 0..self.steps.len() {
                let mut ok = valid;
                for (c, &d) in self.pos.iter_mut().zip(&self.steps[k].0) {
                    *c += d as i64;
                    ok &= *c >= 0;
                }
                self.hist[k] += 1;
                self.go(left - 1, ok);
                self.hist[k] -= 1;
                for (c, &d) in self.pos.iter_mut().zip(&self.steps[k].0) {
                    *c -= d as i64;
                }
            }
        }
    }
    let mut w = Walker { steps: &steps, pos: p.to_vec(), hist: vec![0; steps.len()], seen: HashMap::new() };
    w.go(n, true);
    let mut out: BTreeMap<Vec<i64>, Q> = BTreeMap::new();
    for ((end, hist), count) in w.seen {
        let weight = hist
            .iter()
            .zip(&steps)
            .fold(Q::one(), |acc, (&e, (_, wt))| acc * num_traits::pow(wt.clone(), e as usize));
        *out.entry(end).or_insert_with(Q::zero) += weight * Q::from_integer(BigInt::from(count));
    }
    Ok(out)
}

pub fn brute_force_count(model: &WeightedModel, p: &[i64], q: &[i64], n: usize) -> Result<Q> {
    check_query(model, p, q)?;
    Ok(brute_force_counts(model, p, n)?.remove(q).unwrap_or_else(Q::zero))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroDriftReport {
    pub x0: Vec<f64>,
    /// `max_i |sum_s w'(s) s_i|` for `w'(s) = w(s) x0^s / chi(x0)`.
    pub drift: f64,
    /// `max |Delta^{-1/2} D C D Delta^{-1/2} - I|` with `C` the step
    /// covariance of the reweighted model and `D = diag(C_ii^{-1/2})`.
    pub covariance_residual: f64,
    pub passed: bool,
}

/// Reweights the model at its critical point and measures the drift and the
/// covariance of the whitened steps.
pub fn zero_drift_check(model: &WeightedModel, tol: f64) -> Result<ZeroDriftReport> {
    let d = model.dim();
    let cp = geometry::critical_point(model, DEFAULT_GRADIENT_TOL)?;
    let cov = geometry::covariance(model, &cp)?;
    let terms: Vec<(Vec<i8>, f64)> =
        model.weights_f64().into_iter().map(|(s, w)| {
            let m = w * monomial(&s, &cp.x0);
            (s, m)
        }).collect();
    let total: f64 = terms.iter().map(|t| t.1).sum();
    let mut mean = vec![0.0; d];
    let mut c = DMatrix::<f64>::zeros(d, d);
    for (s, m) in &terms {
        let p = m / total;
        for i in 0..d {
            mean[i] += p * s[i] as f64;
            for j in 0..d {
                c[(i, j)] += p * (s[i] * s[j]) as f64;
            }
        }
    }
    let drift = mean.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for i in 0..d {
        for j in 0..d {
            c[(i, j)] -= mean[i] * mean[j];
        }
    }
    let scale = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 / c[(i, i)].sqrt() } else { 0.0 });
    let whitened = &cov.inv_sqrt * &scale * &c * &scale * &cov.inv_sqrt;
    let covariance_residual = (whitened - DMatrix::identity(d, d)).amax();
    Ok(ZeroDriftReport {
        x0: cp.x0,
        drift,
        covariance_residual,
        passed: drift <= tol && covariance_residual <= tol,
    })
}
