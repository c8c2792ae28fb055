//! JSON job descriptions for the command-line workflows, with defaults
//! matching the desk-scale experiments.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::competitive_ratio;
use super::harness::PolicySpec;
use super::meta::{fit_regressor, summary_features, MetaSelector};
use crate::baselines::{default_threshold_grid, tune_threshold, ThresholdTuning};
use crate::error::{Error, Result};
use crate::generators::{add_noise, Generator, GeneratorConfig, SmoothSpec};
use crate::locality::{self, VerifierReport};
use crate::neural::train::generate_training_set_with;
use crate::neural::{Model, ModelConfig, TrainConfig, TrainOutcome};
use crate::policy::Policy;
use crate::rng::{self, tags};

fn d_instances() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainJob {
    pub configs: Vec<GeneratorConfig>,
    #[serde(default = "d_instances")]
    pub instances: usize,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    /// Train on features of noisy instances (targets stay exact).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_rho: Option<f64>,
}

impl TrainJob {
    pub fn new(configs: Vec<GeneratorConfig>) -> Self {
        TrainJob {
            configs,
            instances: d_instances(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            noise_rho: None,
        }
    }

    pub fn run(&self, seed: u64) -> Result<TrainOutcome> {
        let data_seed = rng::derive(seed, &[tags::INSTANCE]);
        let samples = generate_training_set_with(&self.configs, self.instances, data_seed, |inst, i| match self.noise_rho {
            Some(rho) => add_noise(inst, rho, rng::derive(seed, &[tags::NOISE, i as u64])),
            None => Ok(inst.clone()),
        })?;
        let model = Model::init(self.model, rng::derive(seed, &[tags::INIT]))?;
        crate::neural::train(model, &samples, &self.train, rng::derive(seed, &[tags::SHUFFLE]))
    }
}

fn d_per_config() -> usize {
    50
}

fn d_realizations() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneJob {
    pub configs: Vec<GeneratorConfig>,
    #[serde(default = "d_per_config")]
    pub instances_per_config: usize,
    #[serde(default = "d_realizations")]
    pub realizations: usize,
    #[serde(default = "default_threshold_grid")]
    pub grid: Vec<f64>,
}

impl TuneJob {
    pub fn run(&self, seed: u64) -> Result<ThresholdTuning> {
        tune_threshold(&self.configs, self.instances_per_config, &self.grid, self.realizations, seed)
    }
}

fn d_cut_eps() -> Vec<f64> {
    vec![0.1, 0.25]
}

fn d_cut_dims() -> Vec<usize> {
    vec![1, 2, 3]
}

fn d_cut_trials() -> usize {
    100_000
}

fn d_load_n() -> usize {
    4096
}

fn d_load_trials() -> usize {
    2000
}

fn d_two() -> usize {
    2
}

fn d_sandwich_instances() -> usize {
    20
}

fn d_six() -> usize {
    6
}

fn d_radius() -> f64 {
    0.03
}

fn d_eps() -> f64 {
    0.25
}

fn d_partitions() -> usize {
    400
}

/// Equal-weight clusters spread over the square, dense enough that a
/// small radius still yields edges.
pub fn default_clusters() -> SmoothSpec {
    SmoothSpec::clusters(&[vec![0.1, 0.1], vec![0.55, 0.3], vec![0.3, 0.7]], 0.06)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyJob {
    #[serde(default = "d_cut_eps")]
    pub cut_epsilons: Vec<f64>,
    #[serde(default = "d_cut_dims")]
    pub cut_dims: Vec<usize>,
    #[serde(default = "d_cut_trials")]
    pub cut_trials: usize,
    #[serde(default = "d_load_n")]
    pub load_points: usize,
    #[serde(default = "d_two")]
    pub load_dim: usize,
    #[serde(default = "d_load_trials")]
    pub load_trials: usize,
    #[serde(default = "d_sandwich_instances")]
    pub sandwich_instances: usize,
    #[serde(default = "d_six")]
    pub sandwich_online: usize,
    #[serde(default = "d_six")]
    pub sandwich_offline: usize,
    #[serde(default = "d_two")]
    pub sandwich_dim: usize,
    #[serde(default = "d_radius")]
    pub sandwich_radius: f64,
    #[serde(default = "d_eps")]
    pub sandwich_epsilon: f64,
    #[serde(default = "d_partitions")]
    pub sandwich_partitions: usize,
    #[serde(default = "default_clusters")]
    pub sandwich_smooth: SmoothSpec,
}

impl Default for VerifyJob {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl VerifyJob {
    /// Cut probability for every `(d, ε)` with `Δ = ε/(4d)`, max load with
    /// `k = ⌈√N⌉`-style grids, and the VTG sandwich on clustered b-RGGs.
    pub fn run(&self, seed: u64) -> Result<Vec<VerifierReport>> {
        let mut out = Vec::new();
        for (i, &d) in self.cut_dims.iter().enumerate() {
            for (j, &eps) in self.cut_epsilons.iter().enumerate() {
                let s = rng::derive(seed, &[tags::POINTS, i as u64, j as u64]);
                out.push(locality::verify_cut_probability(eps / (4.0 * d as f64), d, eps, self.cut_trials, s)?);
            }
        }
        let k = (self.load_points as f64).powf(1.0 / self.load_dim as f64).ceil() as usize;
        let load = locality::verify_max_load(
            self.load_points,
            self.load_dim,
            k,
            &SmoothSpec::Uniform,
            self.load_trials,
            rng::derive(seed, &[tags::PARTITION]),
        )?;
        out.push(load.report);
        for i in 0..self.sandwich_instances {
            let inst = crate::generators::gen_brgg_theory(
                self.sandwich_online,
                self.sandwich_offline,
                self.sandwich_dim,
                self.sandwich_radius,
                &self.sandwich_smooth,
                rng::derive(seed, &[tags::INSTANCE, i as u64]),
            )?;
            let rep = locality::verify_vtg_sandwich(
                &inst,
                self.sandwich_epsilon,
                self.sandwich_partitions,
                rng::derive(seed, &[tags::PARTITION, i as u64]),
            )?;
            out.extend(rep.reports);
        }
        Ok(out)
    }
}

/// Record each candidate's per-instance CR on `per_config` instances of every
/// shape, for fitting a regressor.
pub fn collect_records(
    candidates: &[Arc<dyn Policy>],
    shapes: &[GeneratorConfig],
    per_config: usize,
    realizations: usize,
    seed: u64,
) -> Result<Vec<([f64; 5], Vec<Option<f64>>)>> {
    let gens: Vec<Generator> = shapes.iter().map(Generator::new).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..shapes.len()).flat_map(|c| (0..per_config).map(move |i| (c, i))).collect();
    cells
        .par_iter()
        .map(|&(c, i)| {
            let s = rng::derive(seed, &[tags::INSTANCE, c as u64, i as u64]);
            let inst = gens[c].sample(s)?;
            let crs = candidates
                .iter()
                .map(|p| competitive_ratio(&inst, p.as_ref(), realizations, s).map(|o| o.cr))
                .collect::<Result<_>>()?;
            Ok((summary_features(&inst), crs))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaComparison {
    pub regressor: MetaSelector,
    /// `(n_offline, n_online, threshold choice, regressor choice)` per shape.
    pub choices: Vec<(usize, usize, usize, usize)>,
    pub agreement: f64,
}

/// Fit a regressor on `train_shapes` and compare its per-instance choices
/// with the threshold rule on `heldout_shapes`.
pub fn compare_meta(
    candidates: &[Arc<dyn Policy>],
    train_shapes: &[GeneratorConfig],
    heldout_shapes: &[GeneratorConfig],
    per_config: usize,
    realizations: usize,
    seed: u64,
) -> Result<MetaComparison> {
    if candidates.len() != 2 {
        return Err(Error::InvalidParameter("comparison with the threshold rule needs two candidates".into()));
    }
    let records = collect_records(candidates, train_shapes, per_config, realizations, seed)?;
    let regressor = fit_regressor(&records)?;
    let threshold = MetaSelector::threshold();
    let mut choices = Vec::new();
    for (c, shape) in heldout_shapes.iter().enumerate() {
        let gen = Generator::new(shape)?;
        for i in 0..per_config {
            let inst = gen.sample(rng::derive(seed, &[tags::INSTANCE, 1 << 20 | c as u64, i as u64]))?;
            choices.push((inst.n_offline, inst.n_online, threshold.select(&inst), regressor.select(&inst)));
        }
    }
    let agree = choices.iter().filter(|c| c.2 == c.3).count();
    let agreement = if choices.is_empty() { 0.0 } else { agree as f64 / choices.len() as f64 };
    Ok(MetaComparison { regressor, choices, agreement })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaJob {
    /// Offline-heavy candidate first, online-heavy second.
    pub candidates: Vec<PolicySpec>,
    pub train_shapes: Vec<GeneratorConfig>,
    pub heldout_shapes: Vec<GeneratorConfig>,
    #[serde(default = "d_per_config")]
    pub instances_per_config: usize,
    #[serde(default = "d_realizations")]
    pub realizations: usize,
}

impl MetaJob {
    pub fn run(&self, base: &Path, seed: u64) -> Result<MetaComparison> {
        let candidates: Vec<Arc<dyn Policy>> = self.candidates.iter().map(|c| c.build(base)).collect::<Result<_>>()?;
        compare_meta(
            &candidates,
            &self.train_shapes,
            &self.heldout_shapes,
            self.instances_per_config,
            self.realizations,
            seed,
        )
    }
}
