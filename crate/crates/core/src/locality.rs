//! Random shifted grid partitions of the latent space, the decomposed graph
//! `G(π)`, component-wise VTG and Monte Carlo checks of the locality bounds.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dp::{self, VtgTable, DEFAULT_DP_LIMIT};
use crate::error::{Error, Result};
use crate::generators::SmoothSpec;
use crate::model::{Edge, Instance};
use crate::rng::{self, tags, Rng};

/// A `(k, s)`-partition of `[0,1]^d`: `k` cells per axis, shifted by `s`
/// modulo 1. Cells wrap around and need not be contiguous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub k: usize,
    pub shift: Vec<f64>,
}

impl Partition {
    pub fn new(k: usize, shift: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("partition needs k >= 1".into()));
        }
        let max = 1.0 / k as f64;
        if let Some(s) = shift.iter().find(|&&s| !(0.0..=max).contains(&s)) {
            return Err(Error::InvalidParameter(format!("shift {s} outside [0, 1/{k}]")));
        }
        Ok(Partition { k, shift })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn cell_index(&self, x: &[f64]) -> Vec<usize> {
        x.iter().zip(&self.shift).map(|(&xi, &si)| self.axis_cell(xi, si)).collect()
    }

    fn axis_cell(&self, x: f64, s: f64) -> usize {
        let c = ((x - s).rem_euclid(1.0) * self.k as f64).floor() as usize;
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
        c.min(self.k - 1)
    }

    /// Row-major linear cell id. Panics if `k^d` overflows `u64`.
    pub fn cell_id(&self, x: &[f64]) -> u64 {
        let k = self.k as u64;
        x.iter()
            .zip(&self.shift)
            .fold(0u64, |acc, (&xi, &si)| acc.checked_mul(k).unwrap() + self.axis_cell(xi, si) as u64)
    }

    pub fn same_cell(&self, x: &[f64], y: &[f64]) -> bool {
        x.iter()
            .zip(y)
            .zip(&self.shift)
            .all(|((&a, &b), &s)| self.axis_cell(a, s) == self.axis_cell(b, s))
    }
}

pub fn sample_partition(k: usize, d: usize, seed: u64) -> Result<Partition> {
    sample_partition_with(k, d, &mut rng::rng(seed))
}

pub fn sample_partition_with(k: usize, d: usize, rng: &mut Rng) -> Result<Partition> {
    if k == 0 {
        return Err(Error::InvalidParameter("partition needs k >= 1".into()));
    }
    let max = 1.0 / k as f64;
    Partition::new(k, (0..d).map(|_| rng.random::<f64>() * max).collect())
}

/// `k = ⌈ε / (2dΔ)⌉`, guarded against float noise just above an integer.
pub fn cells_per_axis(epsilon: f64, dim: usize, radius: f64) -> Result<usize> {
    if !(epsilon > 0.0) || !(radius > 0.0) || dim == 0 {
        return Err(Error::InvalidParameter(format!(
            "cells per axis needs epsilon > 0, radius > 0, d >= 1 (got {epsilon}, {radius}, {dim})"
        )));
    }
    let raw = epsilon / (2.0 * dim as f64 * radius);
    let k = (raw - 1e-9 * raw.max(1.0)).ceil().max(1.0);
    Ok(k as usize)
}

/// One connected component of `G(π)` with at least one edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub online: Vec<usize>,
    pub offline: Vec<usize>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.online.len() + self.offline.len()
    }
}

#[derive(Clone, Debug)]
pub struct DecomposedGraph<'a> {
    pub source: &'a Instance,
    pub partition: Partition,
    /// Surviving edges, in source order.
    pub edges: Vec<Edge>,
    /// Components with at least one edge; isolated nodes are omitted since
    /// they contribute nothing.
    pub components: Vec<Component>,
}

impl DecomposedGraph<'_> {
    pub fn dropped(&self) -> usize {
        self.source.edges.len() - self.edges.len()
    }

    /// `G(π)` as an instance on the full node set.
    pub fn instance(&self) -> Instance {
        let mut out = self.source.clone();
        out.edges = self.edges.clone();
        out
    }

    /// Each component as a standalone instance. Online order and all weights
    /// and probabilities are kept; offline nodes are renumbered ascending.
    pub fn component_instances(&self) -> Vec<Instance> {
        let adj_online = |t: usize| self.edges.iter().filter(move |e| e.online == t);
        self.components
            .iter()
            .map(|c| {
                let mut edges = Vec::new();
                for (i, &t) in c.online.iter().enumerate() {
                    for e in adj_online(t) {
                        let u = c.offline.binary_search(&e.offline).expect("edge inside component");
                        edges.push(Edge::new(i, u, e.weight));
                    }
                }
                let probs = c.online.iter().map(|&t| self.source.arrival_probs[t]).collect();
                Instance::new(c.offline.len(), c.online.len(), edges, probs)
            })
            .collect()
    }

    pub fn max_component_offline(&self) -> usize {
        self.components.iter().map(|c| c.offline.len()).max().unwrap_or(0)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Remove every edge whose endpoints fall in different cells of `π`, then
/// split the surviving graph into connected components.
pub fn decompose<'a>(inst: &'a Instance, partition: &Partition) -> Result<DecomposedGraph<'a>> {
    let emb = inst.embeddings.as_ref().ok_or(Error::MissingEmbeddings)?;
    if inst.dimension() != Some(partition.dim()) {
        return Err(Error::ShapeMismatch(format!(
            "partition has dimension {} but embeddings have {:?}",
            partition.dim(),
            inst.dimension()
        )));
    }
    let m = inst.n_online;
    let cells: Vec<Vec<usize>> = emb.iter().map(|x| partition.cell_index(x)).collect();
    let edges: Vec<Edge> = inst
        .edges
        .iter()
        .copied()
        .filter(|e| cells[e.online] == cells[m + e.offline])
        .collect();

    // Online nodes are 0..m, offline nodes m..m+n.
    let mut parent: Vec<usize> = (0..inst.n_nodes()).collect();
    for e in &edges {
        let (a, b) = (find(&mut parent, e.online), find(&mut parent, m + e.offline));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
    let mut touched = vec![false; inst.n_nodes()];
    for e in &edges {
        touched[e.online] = true;
        touched[m + e.offline] = true;
    }
    for v in (0..inst.n_nodes()).filter(|&v| touched[v]) {
        let root = find(&mut parent, v);
        let c = groups.entry(root).or_insert_with(|| Component { online: vec![], offline: vec![] });
        if v < m {
            c.online.push(v);
        } else {
            c.offline.push(v - m);
        }
    }
    Ok(DecomposedGraph {
        source: inst,
        partition: partition.clone(),
        edges,
        components: groups.into_values().collect(),
    })
}

/// `V(G(π))` as a sum of per-component values. Fails if a component has
/// more than `limit` offline nodes.
pub fn component_vtg(decomp: &DecomposedGraph, limit: usize) -> Result<f64> {
    let size = decomp.max_component_offline();
    if size > limit {
        return Err(Error::OversizedComponent { size, limit });
    }
    decomp
        .component_instances()
        .iter()
        .map(|c| Ok(VtgTable::with_limit(c, limit)?.root()))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalityParams {
    /// Approximation slack `ε ∈ (0, 1/2]`.
    pub epsilon: f64,
    /// Failure probability `δ ∈ (0, 1]`.
    pub fail_prob: f64,
    /// Number of sampled partitions `ℓ`.
    pub samples: usize,
    /// Edge radius `Δ` of the geometric graph.
    pub radius: f64,
    pub dim: usize,
    /// Largest component (in offline nodes) solved exactly; larger ones are
    /// skipped and counted.
    pub component_limit: usize,
}

impl LocalityParams {
    pub fn new(epsilon: f64, fail_prob: f64, samples: usize, radius: f64, dim: usize) -> Result<Self> {
        let p = LocalityParams { epsilon, fail_prob, samples, radius, dim, component_limit: DEFAULT_DP_LIMIT };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for a b-RGG instance, reading `Δ` and `d` from its metadata.
    pub fn for_instance(inst: &Instance, epsilon: f64, fail_prob: f64, samples: usize) -> Result<Self> {
        let radius = inst.meta.get("radius").and_then(|v| v.as_f64());
        let dim = inst.dimension();
        match (radius, dim) {
            (Some(r), Some(d)) => Self::new(epsilon, fail_prob, samples, r, d),
            _ => Err(Error::InvalidParameter("instance lacks radius metadata or embeddings".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside (0, 1/2]", self.epsilon)));
        }
        if !(self.fail_prob > 0.0 && self.fail_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta {} outside (0, 1]", self.fail_prob)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("need at least one partition sample".into()));
        }
        cells_per_axis(self.epsilon, self.dim, self.radius).map(|_| ())
    }

    pub fn k(&self) -> usize {
        cells_per_axis(self.epsilon, self.dim, self.radius).expect("validated")
    }

    /// `⌈(2/ε²) ln(4/δ)⌉`.
    pub fn required_samples(epsilon: f64, fail_prob: f64) -> usize {
        (2.0 / (epsilon * epsilon) * (4.0 / fail_prob).ln()).ceil() as usize
    }

    pub fn certifies(&self) -> bool {
        self.samples >= Self::required_samples(self.epsilon, self.fail_prob)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Mean of `V(G(π_i))` over the samples that were solved.
    pub estimate: f64,
    /// Per-sample values; `None` for a skipped (oversized) sample.
    pub values: Vec<Option<f64>>,
    pub skipped: usize,
    /// Largest component seen, in offline nodes.
    pub max_component: usize,
    pub k: usize,
}

fn partition_rng(seed: u64, i: usize) -> Rng {
    rng::stream(seed, &[tags::PARTITION, i as u64])
}

/// Average `V(G(π))` over `ℓ` independent partitions.
pub fn mc_local_estimate(inst: &Instance, params: &LocalityParams, seed: u64) -> Result<McEstimate> {
    params.validate()?;
    if inst.embeddings.is_none() {
        return Err(Error::MissingEmbeddings);
    }
    let k = params.k();
    let per_sample: Vec<(Option<f64>, usize)> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let pi = sample_partition_with(k, params.dim, &mut partition_rng(seed, i))?;
            let dg = decompose(inst, &pi)?;
            let size = dg.max_component_offline();
            match component_vtg(&dg, params.component_limit) {
                Ok(v) => Ok((Some(v), size)),
                Err(Error::OversizedComponent { .. }) => Ok((None, size)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let values: Vec<Option<f64>> = per_sample.iter().map(|p| p.0).collect();
    let solved: Vec<f64> = values.iter().flatten().copied().collect();
    Ok(McEstimate {
        estimate: if solved.is_empty() { 0.0 } else { solved.iter().sum::<f64>() / solved.len() as f64 },
        skipped: values.len() - solved.len(),
        values,
        max_component: per_sample.iter().map(|p| p.1).max().unwrap_or(0),
        k,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    pub lemma: String,
    pub params: serde_json::Value,
    pub trials: usize,
    pub statistic: f64,
    pub bound: f64,
    pub pass: bool,
}

impl VerifierReport {
    pub fn line(&self) -> String {
        format!(
            "{} {}: statistic {:.6} vs bound {:.6} over {} trials",
            if self.pass { "PASS" } else { "FAIL" },
            self.lemma,
            self.statistic,
            self.bound,
            self.trials
        )
    }
}

fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Fraction of point pairs at ℓ∞ distance exactly `radius` on every axis
/// (the extremal case) that a random `(k, s)`-partition separates.
pub fn separation_rate(k: usize, dim: usize, radius: f64, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rng = rng::stream(seed, &[tags::POINTS]);
    let mut cut = 0usize;
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for _ in 0..trials {
        let pi = sample_partition_with(k, dim, &mut rng)?;
        for i in 0..dim {
            x[i] = rng.random::<f64>();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            y[i] = (x[i] + sign * radius).rem_euclid(1.0);
        }
        if !pi.same_cell(&x, &y) {
            cut += 1;
        }
    }
    Ok(cut as f64 / trials as f64)
}

/// Probability that a pair at distance `radius` on every axis is separated:
/// `1 − (1 − kΔ)^d`.
pub fn separation_closed_form(k: usize, dim: usize, radius: f64) -> f64 {
    1.0 - (1.0 - (k as f64 * radius).min(1.0)).powi(dim as i32)
}

/// Empirical separation rate against `ε + 3σ`, with `k` derived from
/// `(ε, d, Δ)`. In one dimension the rate must also match `kΔ` within `3σ`.
pub fn verify_cut_probability(
    radius: f64,
    dim: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<VerifierReport> {
    if !(radius > 0.0) || radius > epsilon / (2.0 * dim as f64) + 1e-15 {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} must lie in (0, epsilon/(2d)] = (0, {}]",
            epsilon / (2.0 * dim as f64)
        )));
    }
    let k = cells_per_axis(epsilon, dim, radius)?;
    let rate = separation_rate(k, dim, radius, trials, seed)?;
    let bound = epsilon + 3.0 * binomial_sigma(epsilon, trials);
    let closed = separation_closed_form(k, dim, radius);
    let closed_ok = dim != 1 || (rate - closed).abs() <= 3.0 * binomial_sigma(closed, trials).max(1e-12);
    Ok(VerifierReport {
        lemma: "cut-probability".into(),
        params: json!({"radius": radius, "dim": dim, "epsilon": epsilon, "k": k, "closed_form": closed, "seed": seed}),
        trials,
        statistic: rate,
        bound,
        pass: rate <= bound && closed_ok,
    })
}

/// Exceedance threshold `3β ln N / ln ln N`; infinite when `N < 3` or the
/// density is unbounded.
pub fn max_load_threshold(n: usize, beta: f64) -> f64 {
    let ln = (n as f64).ln();
    if n < 3 || !beta.is_finite() {
        return f64::INFINITY;
    }
    3.0 * beta * ln / ln.ln()
}

/// Allowed exceedance rate is `MAX_LOAD_CONSTANT / N`.
pub const MAX_LOAD_CONSTANT: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxLoadReport {
    /// Max cell occupancy → number of trials.
    pub histogram: BTreeMap<usize, usize>,
    pub threshold: f64,
    pub exceed_rate: f64,
    /// `exceed_rate · N`, the constant the rate would need.
    pub empirical_constant: f64,
    pub report: VerifierReport,
}

/// Throw `N` points from `smooth` into the cells of a random partition and
/// record the maximum occupancy, `trials` times.
pub fn verify_max_load(
    n: usize,
    dim: usize,
    k: usize,
    smooth: &SmoothSpec,
    trials: usize,
    seed: u64,
) -> Result<MaxLoadReport> {
    smooth.validate(dim)?;
    let cells = (k as f64).powi(dim as i32);
    if cells < n as f64 {
        return Err(Error::InvalidParameter(format!("k^d = {cells} must be at least N = {n}")));
    }
    if trials == 0 || n == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and at least one trial".into()));
    }
    let dense = cells <= (1u64 << 22) as f64;
    let loads: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, &[tags::POINTS, i as u64]);
            let pi = sample_partition_with(k, dim, &mut rng)?;
            let ids = (0..n).map(|_| pi.cell_id(&smooth.sample(dim, &mut rng)));
            Ok(if dense {
                let mut counts = vec![0u32; cells as usize];
                ids.map(|c| {
                    counts[c as usize] += 1;
                    counts[c as usize] as usize
                })
                .max()
                .unwrap_or(0)
            } else {
                let mut counts: FxHashMap<u64, usize> = FxHashMap::default();
                ids.map(|c| {
                    let e = counts.entry(c).or_insert(0);
                    *e += 1;
                    *e
                })
                .max()
                .unwrap_or(0)
            })
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    for &l in &loads {
        *histogram.entry(l).or_insert(0) += 1;
    }
    let threshold = max_load_threshold(n, smooth.beta());
    let exceed = loads.iter().filter(|&&l| l as f64 > threshold).count();
    let exceed_rate = exceed as f64 / trials as f64;
    let bound = MAX_LOAD_CONSTANT / n as f64;
    Ok(MaxLoadReport {
        report: VerifierReport {
            lemma: "max-load".into(),
            params: json!({"n": n, "dim": dim, "k": k, "beta": smooth.beta().is_finite().then(|| smooth.beta()), "threshold": threshold, "seed": seed}),
            trials,
            statistic: exceed_rate,
            bound,
            pass: exceed_rate <= bound,
        },
        histogram,
        threshold,
        exceed_rate,
        empirical_constant: exceed_rate * n as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub vtg: f64,
    pub k: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// Samples with `V(G(π)) > V(G)`.
    pub upper_violations: usize,
    /// Samples with `V(G(π)) < Σ α_e w_e 1{e ∈ G(π)}`.
    pub edge_bound_violations: usize,
    pub reports: Vec<VerifierReport>,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

const SANDWICH_TOL: f64 = 1e-9;

/// Over `trials` partitions, check `V(G(π)) ≤ V(G)` and the per-edge lower
/// bound on every sample, and `mean ≥ (1−ε)V(G) − 3·SE` overall.
pub fn verify_vtg_sandwich(inst: &Instance, epsilon: f64, trials: usize, seed: u64) -> Result<SandwichReport> {
    if inst.n_online > 10 {
        return Err(Error::SizeCap { what: "online nodes for the sandwich check", cap: 10, got: inst.n_online });
    }
    let params = LocalityParams::for_instance(inst, epsilon, 1.0, trials.max(1))?;
    let k = params.k();
    let vtg = dp::value(inst)?;
    let alpha = dp::edge_contributions(inst)?;
    let values: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let pi = sample_partition_with(k, params.dim, &mut partition_rng(seed, i))?;
            let dg = decompose(inst, &pi)?;
            let v = component_vtg(&dg, params.component_limit)?;
            let kept: f64 = alpha
                .iter()
                .filter(|a| pi.same_cell(inst.online_embedding(a.online).unwrap(), inst.offline_embedding(a.offline).unwrap()))
                .map(|a| a.contribution())
                .sum();
            Ok((v, kept))
        })
        .collect::<Result<_>>()?;
    let upper_violations = values.iter().filter(|(v, _)| *v > vtg + SANDWICH_TOL).count();
    let edge_bound_violations = values.iter().filter(|(v, kept)| *v < kept - SANDWICH_TOL).count();
    let vs: Vec<f64> = values.iter().map(|p| p.0).collect();
    let (mean, std_error) = mean_se(&vs);
    let lower = (1.0 - epsilon) * vtg - 3.0 * std_error;
    let base = json!({"epsilon": epsilon, "k": k, "radius": params.radius, "dim": params.dim, "seed": seed});
    let reports = vec![
        VerifierReport {
            lemma: "removal-upper-bound".into(),
            params: base.clone(),
            trials,
            statistic: upper_violations as f64,
            bound: 0.0,
            pass: upper_violations == 0,
        },
        VerifierReport {
            lemma: "edge-decomposition".into(),
            params: base.clone(),
            trials,
            statistic: edge_bound_violations as f64,
            bound: 0.0,
            pass: edge_bound_violations == 0,
        },
        VerifierReport {
            lemma: "partition-lower-bound".into(),
            params: base,
            trials,
            statistic: mean,
            bound: lower,
            pass: mean >= lower - SANDWICH_TOL,
        },
    ];
    Ok(SandwichReport { vtg, k, values: vs, mean, std_error, upper_violations, edge_bound_violations, reports })
}

/// Sample mean and standard error (`s / √n`).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// End-to-end check of the sampling estimator: over `draws` joint draws of an
/// instance (from `make_instance`) and `ℓ ≥ (2/ε²) ln(4/δ)` partitions, count
/// how often the estimate falls below `(1−ε)² V(G)`. Draws with a skipped
/// (oversized) sample are excluded, conditioning on the locality event.
pub fn verify_local_approximation<F>(
    make_instance: F,
    epsilon: f64,
    fail_prob: f64,
    draws: usize,
    seed: u64,
) -> Result<VerifierReport>
where
    F: Fn(u64) -> Result<Instance> + Sync,
{
    let samples = LocalityParams::required_samples(epsilon, fail_prob);
    let outcomes: Vec<Option<bool>> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let inst = make_instance(rng::derive(seed, &[tags::INSTANCE, i as u64]))?;
            let params = LocalityParams::for_instance(&inst, epsilon, fail_prob, samples)?;
            let est = mc_local_estimate(&inst, &params, rng::derive(seed, &[tags::PARTITION, i as u64]))?;
            if est.skipped > 0 {
                return Ok(None);
            }
            let v = dp::value(&inst)?;
            Ok(Some(est.estimate < (1.0 - epsilon).powi(2) * v - SANDWICH_TOL))
        })
        .collect::<Result<_>>()?;
    let counted: Vec<bool> = outcomes.iter().flatten().copied().collect();
    let failures = counted.iter().filter(|&&f| f).count();
    let trials = counted.len();
    let rate = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
    let bound = fail_prob + 3.0 * binomial_sigma(fail_prob.min(1.0), trials.max(1));
    Ok(VerifierReport {
        lemma: "local-approximation".into(),
        params: json!({"epsilon": epsilon, "delta": fail_prob, "samples": samples, "draws": draws, "excluded": draws - trials, "seed": seed}),
        trials,
        statistic: rate,
        bound,
        pass: trials > 0 && rate <= bound,
    })
}
