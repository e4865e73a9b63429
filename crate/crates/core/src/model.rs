//! Weighted small-step models in the orthant.
//!
//! Weights are exact rationals throughout this module. A step is present iff
//! its weight is strictly positive; zero weights are dropped on construction.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, parse_rational, Q};

/// An element of `{-1,0,1}^d \ {0}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step(Vec<i8>);

impl Step {
    pub fn new(coords: Vec<i8>) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || coords.iter().any(|c| !(-1..=1).contains(c)) || coords.iter().all(|&c| c == 0) {
            return Err(Error::StepOutOfRange {
                step: coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                dim,
            });
        }
        Ok(Step(coords))
    }

    pub fn coords(&self) -> &[i8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    /// Every nonzero vector of `{-1,0,1}^d`, in lexicographic order.
    pub fn all(dim: usize) -> Vec<Step> {
        let mut out = Vec::new();
        let total = 3usize.pow(dim as u32);
        for code in 0..total {
            let mut c = code;
            let mut coords = vec![0i8; dim];
            for k in (0..dim).rev() {
                coords[k] = (c % 3) as i8 - 1;
                c /= 3;
            }
            if coords.iter().any(|&x| x != 0) {
                out.push(Step(coords));
            }
        }
        out
    }

    /// Parses `"i,j,..."`.
    pub fn parse(text: &str) -> Result<Self> {
        let coords: std::result::Result<Vec<i64>, _> =
            text.split(',').map(|p| p.trim().parse::<i64>()).collect();
        let coords = coords.map_err(|_| Error::Malformed(format!("bad step {text:?}")))?;
        if coords.iter().any(|c| !(-1..=1).contains(c)) || coords.iter().all(|&c| c == 0) {
            return Err(Error::StepOutOfRange { step: text.to_string(), dim: coords.len() });
        }
        Ok(Step(coords.into_iter().map(|c| c as i8).collect()))
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedModel {
    dim: usize,
    weights: BTreeMap<Step, Q>,
    normalized: bool,
}

/// Outcome of the half-space test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum H1Verdict {
    Satisfied,
    Violated { witness: Vec<Q> },
}

impl H1Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, H1Verdict::Satisfied)
    }
}

/// Serialized form: `{"d": 2, "steps": [["1,0", "1/3"], ...], "normalized": true}`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub d: usize,
    pub steps: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
}

impl WeightedModel {
    pub fn new<I>(dim: usize, steps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Step, Q)>,
    {
        if dim == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        let mut weights = BTreeMap::new();
        for (step, w) in steps {
            if step.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: step.dim() });
            }
            if weights.contains_key(&step) {
                return Err(Error::DuplicateStep(step.to_string()));
            }
            if w.is_negative() {
                return Err(Error::NonPositiveWeight {
                    step: step.to_string(),
                    weight: format_rational(&w),
                });
            }
            if !w.is_zero() {
                weights.insert(step, w);
            }
        }
        if weights.is_empty() {
            return Err(Error::EmptyModel);
        }
        let normalized = weights.values().fold(Q::zero(), |a, w| a + w).is_one();
        Ok(WeightedModel { dim, weights, normalized })
    }

    /// Convenience constructor from integer coordinates and `(num, den)` weights.
    pub fn from_pairs(dim: usize, steps: &[(&[i8], (i64, i64))]) -> Result<Self> {
        let mut v = Vec::with_capacity(steps.len());
        for (coords, (n, d)) in steps {
            v.push((Step::new(coords.to_vec())?, rational::q(*n, *d)));
        }
        Self::new(dim, v)
    }

    /// Unit weights on the given steps.
    pub fn unweighted(dim: usize, steps: &[&[i8]]) -> Result<Self> {
        let mut v = Vec::with_capacity(steps.len());
        for coords in steps {
            v.push((Step::new(coords.to_vec())?, Q::one()));
        }
        Self::new(dim, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &BTreeMap<Step, Q> {
        &self.weights
    }

    pub fn weight(&self, step: &Step) -> Option<&Q> {
        self.weights.get(step)
    }

    /// Weight at integer coordinates; zero when the step is absent.
    pub fn weight_at(&self, coords: &[i8]) -> Q {
        Step::new(coords.to_vec())
            .ok()
            .and_then(|s| self.weights.get(&s).cloned())
            .unwrap_or_else(Q::zero)
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.weights.keys()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_weight(&self) -> Q {
        self.weights.values().fold(Q::zero(), |a, w| a + w)
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.values().all(|w| w.is_one())
    }

    pub fn normalize(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let total = self.total_weight();
        let weights = self.weights.iter().map(|(s, w)| (s.clone(), w / &total)).collect();
        WeightedModel { dim: self.dim, weights, normalized: true }
    }

    /// Exact Laurent evaluation `sum w(s) x^s`.
    pub fn inventory_eval_exact(&self, point: &[Q]) -> Result<Q> {
        self.check_point_dim(point.len())?;
        if let Some(i) = point.iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroCoordinate(i));
        }
        let inv: Vec<Q> = point.iter().map(|x| x.recip()).collect();
        let mut acc = Q::zero();
        for (s, w) in &self.weights {
            let mut term = w.clone();
            for (k, &e) in s.coords().iter().enumerate() {
                match e {
                    1 => term *= &point[k],
                    -1 => term *= &inv[k],
                    _ => {}
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn inventory_eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point_dim(point.len())?;
        if let Some(i) = point.iter().position(|&x| x == 0.0) {
            return Err(Error::ZeroCoordinate(i));
        }
        Ok(self
            .weights_f64()
            .iter()
            .map(|(s, w)| w * monomial(s, point))
            .sum())
    }

    /// Steps with their weights converted to doubles.
    pub fn weights_f64(&self) -> Vec<(Vec<i8>, f64)> {
        self.weights
            .iter()
            .map(|(s, w)| (s.coords().to_vec(), rational::to_f64(w)))
            .collect()
    }

    /// Exact decision of (H1): no nonzero `x` with `<x, s> >= 0` for every step.
    ///
    /// If the steps do not span, any vector of the orthogonal complement is a
    /// witness. Otherwise the cone `{x : <x,s> >= 0}` is pointed, so it is
    /// nontrivial iff one of its extreme rays is, and every extreme ray is the
    /// normal of `d - 1` independent steps.
    pub fn check_h1(&self) -> H1Verdict {
        let d = self.dim;
        let rows: Vec<Vec<Q>> = self
            .weights
            .keys()
            .map(|s| s.coords().iter().map(|&c| rational::qi(c as i64)).collect())
            .collect();
        let kernel = rational::nullspace(&rows, d);
        if let Some(v) = kernel.into_iter().next() {
            return H1Verdict::Violated { witness: v };
        }
        let satisfies = |x: &[Q]| {
            rows.iter().all(|r| {
                let dot = r.iter().zip(x).fold(Q::zero(), |a, (u, v)| a + u * v);
                !dot.is_negative()
            })
        };
        let mut candidates: Vec<Vec<Q>> = Vec::new();
        for i in 0..d {
            let mut e = vec![Q::zero(); d];
            e[i] = Q::one();
            candidates.push(e.clone());
            e[i] = -Q::one();
            candidates.push(e);
        }
        for subset in combinations(rows.len(), d - 1) {
            let sub: Vec<Vec<Q>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let ns = rational::nullspace(&sub, d);
            if ns.len() == 1 {
                let v = ns.into_iter().next().unwrap();
                let neg: Vec<Q> = v.iter().map(|x| -x.clone()).collect();
                candidates.push(v);
                candidates.push(neg);
            }
        }
        // The sum of the distinct extreme rays is a witness in the relative
        // interior of the (pointed) cone, which gives a canonical answer.
        let mut rays: Vec<Vec<num_bigint::BigInt>> = Vec::new();
        for c in candidates {
            if satisfies(&c) {
                let ints = rational::primitive_integer(&c);
                if !rays.contains(&ints) {
                    rays.push(ints);
                }
            }
        }
        if rays.is_empty() {
            return H1Verdict::Satisfied;
        }
        let sum: Vec<Q> = (0..d)
            .map(|k| BigRational::from_integer(rays.iter().map(|r| r[k].clone()).sum()))
            .collect();
        H1Verdict::Violated {
            witness: rational::primitive_integer(&sum).into_iter().map(BigRational::from_integer).collect(),
        }
    }

    /// `w(s) -> mu * w(s) * alpha^s`.
    pub fn central_weighting(&self, mu: &Q, alpha: &[Q]) -> Result<Self> {
        self.check_point_dim(alpha.len())?;
        if !mu.is_positive() || alpha.iter().any(|a| !a.is_positive()) {
            return Err(Error::InvalidArgument("central weighting parameters must be positive".into()));
        }
        let inv: Vec<Q> = alpha.iter().map(|a| a.recip()).collect();
        let steps = self.weights.iter().map(|(s, w)| {
            let mut nw = mu * w;
            for (k, &e) in s.coords().iter().enumerate() {
                match e {
                    1 => nw *= &alpha[k],
                    -1 => nw *= &inv[k],
                    _ => {}
                }
            }
            (s.clone(), nw)
        });
        Self::new(self.dim, steps)
    }

    pub fn drift(&self) -> Vec<Q> {
        let mut acc = vec![Q::zero(); self.dim];
        for (s, w) in &self.weights {
            for (k, &e) in s.coords().iter().enumerate() {
                if e != 0 {
                    acc[k] += w * rational::qi(e as i64);
                }
            }
        }
        acc
    }

    /// Model in the remaining coordinates with `x_axis` frozen at `z`:
    /// `w'(i,j) = w(..,1,..) z + w(..,0,..) + w(..,-1,..) / z`, axis-only steps dropped.
    pub fn slice(&self, axis: usize, z: &Q) -> Result<SliceModel> {
        if self.dim != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: self.dim });
        }
        if axis >= 3 {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        if !z.is_positive() {
            return Err(Error::InvalidArgument("slice value must be positive".into()));
        }
        let zinv = z.recip();
        let mut acc: BTreeMap<Vec<i8>, Q> = BTreeMap::new();
        for (s, w) in &self.weights {
            let rest: Vec<i8> =
                s.coords().iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, &c)| c).collect();
            if rest.iter().all(|&c| c == 0) {
                continue;
            }
            let factor = match s.get(axis) {
                1 => z.clone(),
                -1 => zinv.clone(),
                _ => Q::one(),
            };
            *acc.entry(rest).or_insert_with(Q::zero) += w * factor;
        }
        if acc.is_empty() {
            return Err(Error::EmptyModel);
        }
        let mut steps = Vec::with_capacity(acc.len());
        for (c, w) in acc {
            steps.push((Step::new(c)?, w));
        }
        let mut model = Self::new(2, steps)?;
        // constant term removed: not a probability model any more
        model.normalized = false;
        Ok(SliceModel { axis, z: z.clone(), model })
    }

    /// Relabels coordinates: new coordinate `k` is old coordinate `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.dim).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        let steps = self.weights.iter().map(|(s, w)| {
            (Step(perm.iter().map(|&p| s.get(p)).collect()), w.clone())
        });
        let mut m = Self::new(self.dim, steps)?;
        m.normalized = self.normalized;
        Ok(m)
    }

    /// Negates the listed coordinates of every step (`x_i -> 1/x_i`).
    pub fn reflect_axes(&self, axes: &[usize]) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|(s, w)| {
                let mut c = s.0.clone();
                for &a in axes {
                    c[a] = -c[a];
                }
                (Step(c), w.clone())
            })
            .collect();
        WeightedModel { dim: self.dim, weights, normalized: self.normalized }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            d: self.dim,
            steps: self.weights.iter().map(|(s, w)| (s.to_string(), format_rational(w))).collect(),
            normalized: Some(self.normalized),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("model serializes")
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let mut steps = Vec::with_capacity(doc.steps.len());
        for (s, w) in &doc.steps {
            let step = Step::parse(s)?;
            if step.dim() != doc.d {
                return Err(Error::StepOutOfRange { step: s.clone(), dim: doc.d });
            }
            let weight = parse_rational(w)?;
            if !weight.is_positive() {
                if weight.is_zero() {
                    continue;
                }
                return Err(Error::NonPositiveWeight { step: s.clone(), weight: w.clone() });
            }
            steps.push((step, weight));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (s, _) in &steps {
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateStep(s.to_string()));
            }
        }
        let model = Self::new(doc.d, steps)?;
        if doc.normalized == Some(true) && !model.normalized {
            return Err(Error::Malformed("document claims normalized weights that do not sum to 1".into()));
        }
        Ok(model)
    }

    /// Parses the JSON model format. Duplicate steps are rejected even when a
    /// later entry has zero weight.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for (s, _) in &doc.steps {
            let step = Step::parse(s)?;
            if !seen.insert(step) {
                return Err(Error::DuplicateStep(s.clone()));
            }
        }
        Self::from_document(&doc)
    }

    /// Compact human-readable form, e.g. `{1,0:1, 0,1:1, -1,-1:1}`.
    pub fn summary(&self) -> String {
        let parts: Vec<String> =
            self.weights.iter().map(|(s, w)| format!("({s}):{}", format_rational(w))).collect();
        format!("{{{}}}", parts.join(" "))
    }

    fn check_point_dim(&self, n: usize) -> Result<()> {
        if n != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: n });
        }
        Ok(())
    }
}

impl fmt::Display for WeightedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

/// A 2D model obtained from a 3D one by freezing one coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceModel {
    pub axis: usize,
    pub z: Q,
    pub model: WeightedModel,
}

pub(crate) fn monomial(s: &[i8], x: &[f64]) -> f64 {
    s.iter()
        .zip(x)
        .map(|(&e, &v)| match e {
            1 => v,
            -1 => 1.0 / v,
            _ => 1.0,
        })
        .product()
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}
