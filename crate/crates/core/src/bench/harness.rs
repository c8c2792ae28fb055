//! The instance × policy × realization grid, CSV rows and summary report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_trials, EpisodeResult};
use super::meta::{MetaPolicy, MetaSelectorSpec};
use crate::baselines::{Greedy, GreedyThreshold, LpRound};
use crate::dp::{OptOn, DEFAULT_DP_LIMIT};
use crate::error::{Error, Result};
use crate::generators::{add_noise, Family, Generator, GeneratorConfig};
use crate::model::Instance;
use crate::neural::{load_model, EstimatorPolicy};
use crate::policy::{AlwaysSkip, Policy};
use crate::rng::{self, tags};

pub const DEFAULT_INSTANCES: usize = 500;
pub const DEFAULT_REALIZATIONS: usize = 5;

fn default_instances() -> usize {
    DEFAULT_INSTANCES
}

fn default_realizations() -> usize {
    DEFAULT_REALIZATIONS
}

fn default_dp_limit() -> usize {
    DEFAULT_DP_LIMIT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Greedy,
    GreedyT {
        threshold: f64,
    },
    LpRound,
    OptOn {
        #[serde(default = "default_dp_limit")]
        dp_limit: usize,
    },
    Neural {
        model: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Skip,
    Meta {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        selector: MetaSelectorSpec,
    },
}

impl PolicySpec {
    /// Build the policy; relative model paths are resolved against `base`.
    pub fn build(&self, base: &Path) -> Result<Arc<dyn Policy>> {
        Ok(match self {
            PolicySpec::Greedy => Arc::new(Greedy),
            PolicySpec::GreedyT { threshold } => {
                if !(0.0..=1.0).contains(threshold) {
                    return Err(Error::InvalidConfig(format!("greedy-t threshold {threshold} outside [0,1]")));
                }
                Arc::new(GreedyThreshold { threshold: *threshold })
            }
            // Observed probabilities may be perturbed, so rounding never
            // treats a zero observed probability as fatal.
            PolicySpec::LpRound => Arc::new(LpRound { strict: false }),
            PolicySpec::OptOn { dp_limit } => Arc::new(OptOn { dp_limit: *dp_limit }),
            PolicySpec::Neural { model, name } => {
                let m = load_model(base.join(model))?;
                Arc::new(EstimatorPolicy::new(name.clone().unwrap_or_else(|| "neural".into()), Arc::new(m)))
            }
            PolicySpec::Skip => Arc::new(AlwaysSkip),
            PolicySpec::Meta { name, selector } => {
                Arc::new(MetaPolicy::from_spec(name.clone().unwrap_or_else(|| "meta".into()), selector, base)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEntry {
    pub id: String,
    #[serde(flatten)]
    pub generator: GeneratorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub run_seed: u64,
    #[serde(default = "default_instances")]
    pub instances_per_config: usize,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    pub configs: Vec<ConfigEntry>,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
}

impl BenchConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg: BenchConfig = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.validate()?;
        Ok(cfg)
    }

    /// Make relative data and model paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for c in &mut self.configs {
            match &mut c.generator.family {
                Family::Rideshare { roads, nodes, .. } => {
                    *roads = base.join(&*roads);
                    if let Some(n) = nodes {
                        *n = base.join(&*n);
                    }
                }
                Family::Basegraph { path } => *path = base.join(&*path),
                _ => {}
            }
        }
        for p in &mut self.policies {
            resolve_policy(p, base);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be at least 1".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for c in &self.configs {
            if !ids.insert(&c.id) {
                return Err(Error::InvalidConfig(format!("duplicate config id {}", c.id)));
            }
            c.generator.validate()?;
        }
        Ok(())
    }
}

fn resolve_policy(p: &mut PolicySpec, base: &Path) {
    match p {
        PolicySpec::Neural { model, .. } => *model = base.join(&*model),
        PolicySpec::Meta { selector, .. } => {
            for c in selector.candidates_mut() {
                resolve_policy(c, base);
            }
        }
        _ => {}
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub config_id: String,
    pub family: String,
    pub params: String,
    pub m: usize,
    pub n: usize,
    pub policy: String,
    pub instance_seed: u64,
    pub trial: usize,
    pub matched_weight: f64,
    pub offline_opt: f64,
    pub cr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p05: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

impl Quantiles {
    /// Linear-interpolation quantiles of a nonempty sample.
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Quantiles { p05: q(0.05), p25: q(0.25), p50: q(0.5), p75: q(0.75), p95: q(0.95) })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub config_id: String,
    pub policy: String,
    /// Mean over instances of the per-instance competitive ratio.
    pub mean_cr: Option<f64>,
    pub quantiles: Option<Quantiles>,
    pub instances: usize,
    /// Instances with at least one non-degenerate realization.
    pub defined_instances: usize,
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub version: String,
    pub run_seed: u64,
    pub instances_per_config: usize,
    pub realizations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_rho: Option<f64>,
    pub summaries: Vec<PolicySummary>,
}

impl BenchReport {
    pub fn summary(&self, config_id: &str, policy: &str) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.config_id == config_id && s.policy == policy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRun {
    pub rows: Vec<BenchRow>,
    pub report: BenchReport,
}

pub fn instance_seed(run_seed: u64, config: usize, instance: usize) -> u64 {
    rng::derive(run_seed, &[tags::INSTANCE, config as u64, instance as u64])
}

/// Seed of the noise applied to one instance at sweep position `rho_index`.
pub fn noise_seed(instance_seed: u64, rho_index: usize) -> u64 {
    rng::derive(instance_seed, &[tags::NOISE, rho_index as u64])
}

/// Run `f` on a pool with `jobs` workers, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run_bench(cfg: &BenchConfig, base: &Path, jobs: Option<usize>) -> Result<BenchRun> {
    run_bench_noisy(cfg, base, jobs, None)
}

/// Run the grid. With `noise = Some((rho, index))`, policies observe
/// `add_noise(instance, rho)` while arrivals and scoring use the clean one.
pub fn run_bench_noisy(
    cfg: &BenchConfig,
    base: &Path,
    jobs: Option<usize>,
    noise: Option<(f64, usize)>,
) -> Result<BenchRun> {
    cfg.validate()?;
    let policies: Vec<Arc<dyn Policy>> = cfg.policies.iter().map(|p| p.build(base)).collect::<Result<_>>()?;
    let ids: Vec<String> = policies.iter().map(|p| p.id()).collect();
    if policies.is_empty() {
        return Ok(BenchRun { rows: vec![], report: summarize(cfg, &[], &[], noise.map(|n| n.0)) });
    }
    let gens: Vec<Generator> = cfg.configs.iter().map(|c| Generator::new(&c.generator)).collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..cfg.configs.len())
        .flat_map(|c| (0..cfg.instances_per_config).map(move |i| (c, i)))
        .collect();

    let per_cell = with_jobs(jobs, || {
        cells
            .par_iter()
            .map(|&(c, i)| {
                let seed = instance_seed(cfg.run_seed, c, i);
                let inst = gens[c].sample(seed)?;
                let observed = match noise {
                    Some((rho, k)) => add_noise(&inst, rho, noise_seed(seed, k))?,
                    None => inst.clone(),
                };
                policies
                    .iter()
                    .map(|p| {
                        let out = run_trials(&inst, &observed, p.as_ref(), cfg.realizations, seed)?;
                        Ok((out.cr, out.episodes))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(|r| (c, seed, inst, r))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut rows = Vec::new();
    let mut crs: Vec<Vec<Vec<Option<f64>>>> = vec![vec![Vec::new(); ids.len()]; cfg.configs.len()];
    for (c, seed, inst, results) in &per_cell {
        let entry = &cfg.configs[*c];
        for (pi, (cr, episodes)) in results.iter().enumerate() {
            crs[*c][pi].push(*cr);
            rows.extend(episodes.iter().map(|ep| row(entry, inst, *seed, ep)));
        }
    }
    let report = summarize(cfg, &ids, &crs, noise.map(|n| n.0));
    Ok(BenchRun { rows, report })
}

fn row(entry: &ConfigEntry, inst: &Instance, seed: u64, ep: &EpisodeResult) -> BenchRow {
    BenchRow {
        config_id: entry.id.clone(),
        family: entry.generator.family.tag().into(),
        params: entry.generator.family.params(),
        m: inst.n_online,
        n: inst.n_offline,
        policy: ep.policy.clone(),
        instance_seed: seed,
        trial: ep.trial,
        matched_weight: ep.matched_weight,
        offline_opt: ep.offline_opt,
        cr: ep.ratio(),
    }
}

fn summarize(cfg: &BenchConfig, ids: &[String], crs: &[Vec<Vec<Option<f64>>>], rho: Option<f64>) -> BenchReport {
    let mut summaries = Vec::new();
    for (c, entry) in cfg.configs.iter().enumerate() {
        for (pi, id) in ids.iter().enumerate() {
            let all = &crs[c][pi];
            let defined: Vec<f64> = all.iter().flatten().copied().collect();
            summaries.push(PolicySummary {
                config_id: entry.id.clone(),
                policy: id.clone(),
                mean_cr: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
                quantiles: Quantiles::of(&defined),
                instances: all.len(),
                defined_instances: defined.len(),
                realizations: cfg.realizations,
            });
        }
    }
    BenchReport {
        version: env!("CARGO_PKG_VERSION").into(),
        run_seed: cfg.run_seed,
        instances_per_config: cfg.instances_per_config,
        realizations: cfg.realizations,
        noise_rho: rho,
        summaries,
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "config_id",
    "family",
    "params",
    "m",
    "n",
    "policy",
    "instance_seed",
    "trial",
    "matched_weight",
    "offline_opt",
    "cr",
];

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.config_id.clone(),
            r.family.clone(),
            r.params.clone(),
            r.m.to_string(),
            r.n.to_string(),
            r.policy.clone(),
            r.instance_seed.to_string(),
            r.trial.to_string(),
            r.matched_weight.to_string(),
            r.offline_opt.to_string(),
            r.cr.map_or_else(String::new, |c| c.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[BenchRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Write `results.csv` and `report.json` into `dir`.
pub fn write_outputs(run: &BenchRun, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(&run.rows, std::fs::File::create(&csv_path)?)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(&run.report)? + "\n")?;
    Ok((csv_path, json_path))
}

/// One report per noise level. `rho = 0` reproduces [`run_bench`] exactly.
pub fn noise_sweep(cfg: &BenchConfig, base: &Path, rhos: &[f64], jobs: Option<usize>) -> Result<Vec<BenchRun>> {
    if let Some(r) = rhos.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::InvalidParameter(format!("noise level {r} must be nonnegative")));
    }
    rhos.iter()
        .enumerate()
        .map(|(k, &rho)| run_bench_noisy(cfg, base, jobs, Some((rho, k))))
        .collect()
}
