//! Per-instance choice between candidate policies by regime.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::harness::PolicySpec;
use crate::error::{Error, Result};
use crate::model::{Action, Instance, MatchingState};
use crate::policy::{BoundPolicy, Policy};
use crate::rng::Rng;

pub const DEFAULT_RATIO_THRESHOLD: f64 = 1.5;

fn default_ratio() -> f64 {
    DEFAULT_RATIO_THRESHOLD
}

pub const SUMMARY_FEATURES: [&str; 5] = ["m", "n", "m_over_n", "edge_density", "mean_weight"];

/// `[m, n, m/n, |E|/(mn), mean weight]`.
pub fn summary_features(inst: &Instance) -> [f64; 5] {
    let (m, n) = (inst.n_online as f64, inst.n_offline as f64);
    let e = inst.edges.len() as f64;
    let mean_w = if e > 0.0 { inst.edges.iter().map(|e| e.weight).sum::<f64>() / e } else { 0.0 };
    let density = if m * n > 0.0 { e / (m * n) } else { 0.0 };
    [m, n, if n > 0.0 { m / n } else { 0.0 }, density, mean_w]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum MetaSelector {
    /// Candidate 1 (online-heavy) iff `m/n > ratio_thr`, else candidate 0.
    Threshold {
        #[serde(default = "default_ratio")]
        ratio_thr: f64,
    },
    /// One linear model per candidate: intercept then the summary features.
    Regressor { weights: Vec<Vec<f64>> },
}

impl MetaSelector {
    pub fn threshold() -> Self {
        MetaSelector::Threshold { ratio_thr: DEFAULT_RATIO_THRESHOLD }
    }

    pub fn validate(&self, candidates: usize) -> Result<()> {
        match self {
            MetaSelector::Threshold { ratio_thr } => {
                if !(*ratio_thr > 0.0) {
                    return Err(Error::InvalidConfig(format!("ratio threshold {ratio_thr} must be positive")));
                }
                if candidates != 2 {
                    return Err(Error::InvalidConfig("threshold selector needs exactly two candidates".into()));
                }
            }
            MetaSelector::Regressor { weights } => {
                if weights.len() != candidates || weights.iter().any(|w| w.len() != SUMMARY_FEATURES.len() + 1) {
                    return Err(Error::InvalidConfig("regressor weights do not match the candidates".into()));
                }
            }
        }
        Ok(())
    }

    /// Predicted CR of each candidate (regressor only).
    pub fn predictions(&self, inst: &Instance) -> Option<Vec<f64>> {
        match self {
            MetaSelector::Threshold { .. } => None,
            MetaSelector::Regressor { weights } => {
                let f = summary_features(inst);
                Some(weights.iter().map(|w| w[0] + w[1..].iter().zip(&f).map(|(a, b)| a * b).sum::<f64>()).collect())
            }
        }
    }

    /// Index of the candidate to use for the whole episode on `inst`.
    pub fn select(&self, inst: &Instance) -> usize {
        match self {
            MetaSelector::Threshold { ratio_thr } => {
                let ratio = inst.n_online as f64 / inst.n_offline.max(1) as f64;
                usize::from(ratio > *ratio_thr)
            }
            MetaSelector::Regressor { .. } => {
                let p = self.predictions(inst).unwrap();
                let mut best = 0;
                for i in 1..p.len() {
                    if p[i] > p[best] {
                        best = i;
                    }
                }
                best
            }
        }
    }
}

/// Bench-config form: the selector plus its candidate policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaSelectorSpec {
    #[serde(flatten)]
    pub selector: MetaSelector,
    pub candidates: Vec<PolicySpec>,
}

impl MetaSelectorSpec {
    pub fn candidates_mut(&mut self) -> impl Iterator<Item = &mut PolicySpec> {
        self.candidates.iter_mut()
    }
}

pub struct MetaPolicy {
    pub id: String,
    pub selector: MetaSelector,
    pub candidates: Vec<Arc<dyn Policy>>,
}

impl MetaPolicy {
    pub fn new(id: impl Into<String>, selector: MetaSelector, candidates: Vec<Arc<dyn Policy>>) -> Result<Self> {
        selector.validate(candidates.len())?;
        Ok(MetaPolicy { id: id.into(), selector, candidates })
    }

    pub fn from_spec(id: String, spec: &MetaSelectorSpec, base: &Path) -> Result<Self> {
        let candidates = spec.candidates.iter().map(|c| c.build(base)).collect::<Result<_>>()?;
        Self::new(id, spec.selector.clone(), candidates)
    }
}

impl Policy for MetaPolicy {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        self.candidates[self.selector.select(inst)].bind(inst)
    }
}

/// The action the selected candidate takes in `state`.
pub fn meta_action(
    selector: &MetaSelector,
    inst: &Instance,
    state: &MatchingState,
    candidates: &[Arc<dyn Policy>],
    rng: &mut Rng,
) -> Result<Action> {
    selector.validate(candidates.len())?;
    candidates[selector.select(inst)].bind(inst)?.act(state, rng)
}

/// Ridge penalty per record on standardized features.
pub const REGRESSOR_RIDGE: f64 = 0.1;

/// Ridge fit of each candidate's CR on the standardized summary features,
/// mapped back to raw-feature weights. Records with an undefined CR for a
/// candidate are left out of that fit. Features that are constant over the
/// records get weight 0.
pub fn fit_regressor(records: &[([f64; 5], Vec<Option<f64>>)]) -> Result<MetaSelector> {
    let k = records.first().map_or(0, |r| r.1.len());
    if k == 0 || records.iter().any(|r| r.1.len() != k) {
        return Err(Error::InvalidParameter("regressor needs records with one CR per candidate".into()));
    }
    let weights = (0..k)
        .map(|c| {
            let data: Vec<(&[f64; 5], f64)> = records.iter().filter_map(|(f, crs)| crs[c].map(|y| (f, y))).collect();
            if data.is_empty() {
                return Err(Error::InvalidParameter(format!("candidate {c} has no defined CR")));
            }
            let n = data.len() as f64;
            let mean: Vec<f64> = (0..5).map(|j| data.iter().map(|d| d.0[j]).sum::<f64>() / n).collect();
            let sd: Vec<f64> =
                (0..5).map(|j| (data.iter().map(|d| (d.0[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt()).collect();
            let y_mean = data.iter().map(|d| d.1).sum::<f64>() / n;
            let z = |f: &[f64; 5]| -> Vec<f64> {
                (0..5).map(|j| if sd[j] > 1e-12 { (f[j] - mean[j]) / sd[j] } else { 0.0 }).collect()
            };
            let rows: Vec<(Vec<f64>, f64)> = data.iter().map(|(f, y)| (z(f), y - y_mean)).collect();
            let beta = ridge_least_squares(&rows, REGRESSOR_RIDGE * n)?;
            let raw: Vec<f64> = (0..5).map(|j| if sd[j] > 1e-12 { beta[j] / sd[j] } else { 0.0 }).collect();
            let intercept = y_mean - (0..5).map(|j| raw[j] * mean[j]).sum::<f64>();
            Ok(std::iter::once(intercept).chain(raw).collect())
        })
        .collect::<Result<_>>()?;
    Ok(MetaSelector::Regressor { weights })
}

/// Minimize `Σ (xᵀβ − y)²` via the normal equations with a tiny ridge, so
/// collinear features (m, n and m/n on a fixed grid) stay solvable.
pub fn least_squares(rows: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
    let trace: f64 = rows.iter().map(|r| r.0.iter().map(|x| x * x).sum::<f64>()).sum();
    ridge_least_squares(rows, 1e-9 * trace.max(1.0))
}

/// Minimize `Σ (xᵀβ − y)² + λ‖β‖²`.
pub fn ridge_least_squares(rows: &[(Vec<f64>, f64)], lambda: f64) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, |r| r.0.len());
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no data to fit".into()));
    }
    let mut a = vec![vec![0.0; p + 1]; p];
    for (x, y) in rows {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += x[i] * x[j];
            }
            a[i][p] += x[i] * y;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += lambda;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::InvalidParameter("singular least-squares system".into()));
        }
        a.swap(col, piv);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Ok((0..p).map(|i| a[i][p] / a[i][i]).collect())
}
