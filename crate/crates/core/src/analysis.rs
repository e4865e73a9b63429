//! One-shot analysis of a model: hypothesis, group, geometry and (in the
//! plane) the elliptic probe, or (in space) the Weyl check.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::elliptic::{self, ProbeVerdict};
use crate::geometry::{self, AngleOrder};
use crate::group::{self, GroupVerdict, Order, OrbitConfig};
use crate::model::{H1Verdict, ModelDocument, WeightedModel};
use crate::rational::format_rational;

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub bound: usize,
    pub pair_bound: usize,
    pub seed: u64,
    pub tol: f64,
    pub qmax: usize,
    pub t_samples: Vec<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            bound: group::DEFAULT_GROUP_BOUND,
            pair_bound: group::DEFAULT_PAIR_BOUND,
            seed: 0,
            tol: geometry::DEFAULT_ANGLE_TOL,
            qmax: 16,
            t_samples: elliptic::DEFAULT_T_SAMPLES.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub a: f64,
    pub theta: f64,
    pub angle: AngleOrder,
    /// Order of `phi_i phi_j` from the orbit search.
    pub m: Option<Order>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticSummary {
    pub t: Vec<f64>,
    pub probe: Option<ProbeVerdict>,
    pub predicted_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelDocument,
    pub h1: H1Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<Vec<f64>>>,
    pub pairs: Vec<PairReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coxeter_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coxeter_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weyl: Option<geometry::WeylCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticSummary>,
    pub errors: Vec<String>,
    pub timing_ms: f64,
}

impl AnalysisReport {
    /// Whether some order search hit its bound.
    pub fn inconclusive(&self) -> bool {
        matches!(self.group.as_ref().map(|g| g.order), Some(Order::ExceedsBound(_)))
            || self.pairs.iter().any(|p| matches!(p.m, Some(Order::ExceedsBound(_))))
    }
}

pub fn analyze(model: &WeightedModel, opts: &AnalysisOptions) -> AnalysisReport {
    let start = Instant::now();
    let d = model.dim();
    let mut errors = Vec::new();
    let h1 = match model.check_h1() {
        H1Verdict::Satisfied => H1Report { satisfied: true, witness: None },
        H1Verdict::Violated { witness } => {
            H1Report { satisfied: false, witness: Some(witness.iter().map(format_rational).collect()) }
        }
    };
    let mut report = AnalysisReport {
        model: model.to_document(),
        h1,
        group: None,
        x0: None,
        delta: None,
        pairs: Vec::new(),
        coxeter_label: None,
        coxeter_order: None,
        weyl: None,
        elliptic: None,
        errors: Vec::new(),
        timing_ms: 0.0,
    };
    if !report.h1.satisfied {
        report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
        return report;
    }
    let cfg = OrbitConfig { bound: opts.bound, seed: opts.seed, ..Default::default() };
    match group::group_order(model, &cfg) {
        Ok(v) => report.group = Some(v),
        Err(e) => errors.push(format!("group: {e}")),
    }
    let pcfg = OrbitConfig { bound: opts.pair_bound, seed: opts.seed, ..Default::default() };
    let mut pair_orders = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            pair_orders.push(group::pair_order(model, i, j, &pcfg).ok());
        }
    }
    match geometry::analyze_geometry(model, opts.qmax, opts.tol) {
        Ok(g) => {
            report.x0 = Some(g.critical.x0.clone());
            report.delta = Some((0..d).map(|i| (0..d).map(|j| g.covariance.delta[(i, j)]).collect()).collect());
            report.pairs = g
                .reflections
                .angles
                .iter()
                .zip(&pair_orders)
                .map(|(a, m)| PairReport { i: a.i, j: a.j, a: a.a, theta: a.theta, angle: a.order, m: *m })
                .collect();
            report.coxeter_label = Some(g.reflections.label.to_string());
            report.coxeter_order = g.reflections.order;
            if d == 3 {
                let orders = [pair_orders[0], pair_orders[1], pair_orders[2]];
                if let [Some(a), Some(b), Some(c)] = orders {
                    report.weyl = Some(geometry::weyl_check_with(&g.covariance, &[a, b, c], opts.tol));
                }
            }
        }
        Err(e) => errors.push(format!("geometry: {e}")),
    }
    if d == 2 {
        let probe = elliptic::rationality_probe(model, &opts.t_samples, opts.qmax as i64, 1e-9);
        report.elliptic = Some(match probe {
            Ok(p) => EllipticSummary {
                t: opts.t_samples.clone(),
                predicted_order: p.predicted_order(),
                probe: Some(p),
                error: None,
            },
            Err(e) => EllipticSummary { t: opts.t_samples.clone(), probe: None, predicted_order: None, error: Some(e.to_string()) },
        });
    }
    report.errors = errors;
    report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}
