//! Seeded instance generators.
//!
//! Synthetic families (Erdős–Rényi, Barabási–Albert, geometric), the
//! latent-space bipartite random geometric graph used by the locality
//! machinery, and two file-backed families: rideshare over precomputed
//! travel times and node-induced subgraphs of a worker/task base graph.
//!
//! Every family draws arrival probabilities `p_t ~ U(0,1)` after the graph
//! itself, from the same stream. Output is a pure function of
//! `(config, seed)`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{Edge, Instance};
use crate::rng::{self, Rng};

/// Default rideshare travel-time threshold, in minutes.
pub const DEFAULT_RIDESHARE_THRESHOLD: f64 = 15.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxComponent {
    pub weight: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxComponent {
    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| l <= v && v <= h)
    }
}

/// A distribution over `[0,1]^d` with a known density bound β.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothSpec {
    /// Uniform on the cube, β = 1.
    Uniform,
    /// Mixture of uniforms on axis-aligned boxes inside the cube. `beta` is
    /// the declared density bound and must dominate the true maximum density.
    BoxMixture { components: Vec<BoxComponent>, beta: f64 },
    /// Degenerate point mass (unbounded density). Only useful to show what
    /// goes wrong without smoothness.
    PointMass { point: Vec<f64> },
}

impl SmoothSpec {
    /// Box mixture with β set to its exact maximum density.
    pub fn box_mixture(components: Vec<BoxComponent>) -> Self {
        let beta = max_mixture_density(&components).max(1.0);
        SmoothSpec::BoxMixture { components, beta }
    }

    /// Equal-weight mixture of cubes of side `side` with the given corners.
    pub fn clusters(corners: &[Vec<f64>], side: f64) -> Self {
        let w = 1.0 / corners.len() as f64;
        Self::box_mixture(
            corners
                .iter()
                .map(|c| BoxComponent {
                    weight: w,
                    lo: c.clone(),
                    hi: c.iter().map(|v| v + side).collect(),
                })
                .collect(),
        )
    }

    pub fn beta(&self) -> f64 {
        match self {
            SmoothSpec::Uniform => 1.0,
            SmoothSpec::BoxMixture { beta, .. } => *beta,
            SmoothSpec::PointMass { .. } => f64::INFINITY,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            SmoothSpec::Uniform => Ok(()),
            SmoothSpec::PointMass { point } => {
                if point.len() != dim || point.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return bad("point mass must be a point of the unit cube".into());
                }
                Ok(())
            }
            SmoothSpec::BoxMixture { components, beta } => {
                if components.is_empty() {
                    return bad("box mixture needs at least one component".into());
                }
                for c in components {
                    if c.lo.len() != dim || c.hi.len() != dim {
                        return bad(format!("box component has wrong dimension (want {dim})"));
                    }
                    let inside = c
                        .lo
                        .iter()
                        .zip(&c.hi)
                        .all(|(&l, &h)| 0.0 <= l && l < h && h <= 1.0);
                    if !inside || !(c.weight > 0.0) {
                        return bad("box components must be nonempty, inside the cube, with positive weight".into());
                    }
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("mixture weights sum to {total}, not 1"));
                }
                if !(*beta >= 1.0) {
                    return bad(format!("beta must be at least 1, got {beta}"));
                }
                let actual = max_mixture_density(components);
                if actual > beta * (1.0 + 1e-9) {
                    return bad(format!("declared beta {beta} is below the true density bound {actual}"));
                }
                Ok(())
            }
        }
    }

    pub fn sample(&self, dim: usize, rng: &mut Rng) -> Vec<f64> {
        match self {
            SmoothSpec::Uniform => (0..dim).map(|_| rng.random::<f64>()).collect(),
            SmoothSpec::PointMass { point } => point.clone(),
            SmoothSpec::BoxMixture { components, .. } => {
                let r: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if r < acc {
                        pick = i;
                        break;
                    }
                }
                let c = &components[pick];
                c.lo.iter()
                    .zip(&c.hi)
                    .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
                    .collect()
            }
        }
    }
}

/// Exact maximum of a box-mixture density: the density is constant on the
/// cells cut out by all box faces, so checking each cell's midpoint suffices.
fn max_mixture_density(components: &[BoxComponent]) -> f64 {
    let Some(first) = components.first() else { return 0.0 };
    let dim = first.lo.len();
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|k| {
            let mut cuts: Vec<f64> = components.iter().flat_map(|c| [c.lo[k], c.hi[k]]).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
        })
        .collect();
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; dim];
    loop {
        let x: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| axes[k][i]).collect();
        let density: f64 = components
            .iter()
            .filter(|c| c.contains(&x))
            .map(|c| c.weight / c.volume())
            .sum();
        best = best.max(density);
        let mut k = 0;
        loop {
            if k == dim {
                return best;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Er { p: f64 },
    Ba { b: usize },
    Geom { q: f64 },
    BrggTheory { dim: usize, radius: f64, smooth: SmoothSpec },
    Rideshare {
        roads: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<PathBuf>,
        #[serde(default = "default_threshold")]
        threshold_min: f64,
    },
    Basegraph { path: PathBuf },
}

fn default_threshold() -> f64 {
    DEFAULT_RIDESHARE_THRESHOLD
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Er { .. } => "er",
            Family::Ba { .. } => "ba",
            Family::Geom { .. } => "geom",
            Family::BrggTheory { .. } => "brgg_theory",
            Family::Rideshare { .. } => "rideshare",
            Family::Basegraph { .. } => "basegraph",
        }
    }

    /// Compact parameter string, e.g. `p=0.25`.
    pub fn params(&self) -> String {
        match self {
            Family::Er { p } => format!("p={p}"),
            Family::Ba { b } => format!("b={b}"),
            Family::Geom { q } => format!("q={q}"),
            Family::BrggTheory { dim, radius, smooth } => {
                format!("d={dim};radius={radius};beta={}", smooth.beta())
            }
            Family::Rideshare { roads, threshold_min, .. } => {
                format!("roads={};threshold={threshold_min}", file_name(roads))
            }
            Family::Basegraph { path } => format!("base={}", file_name(path)),
        }
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub family: Family,
    pub n_offline: usize,
    pub n_online: usize,
}

impl GeneratorConfig {
    pub fn new(family: Family, n_offline: usize, n_online: usize) -> Self {
        GeneratorConfig { family, n_offline, n_online }
    }

    pub fn er(n_offline: usize, n_online: usize, p: f64) -> Self {
        Self::new(Family::Er { p }, n_offline, n_online)
    }

    pub fn ba(n_offline: usize, n_online: usize, b: usize) -> Self {
        Self::new(Family::Ba { b }, n_offline, n_online)
    }

    pub fn geom(n_offline: usize, n_online: usize, q: f64) -> Self {
        Self::new(Family::Geom { q }, n_offline, n_online)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match &self.family {
            Family::Er { p } if !(0.0..=1.0).contains(p) => bad(format!("ER p={p} outside [0,1]")),
            Family::Ba { b } if *b > self.n_offline => {
                bad(format!("BA b={b} exceeds n_offline={}", self.n_offline))
            }
            Family::Geom { q } if !(*q > 0.0 && *q <= 1.0) => bad(format!("GEOM q={q} outside (0,1]")),
            Family::BrggTheory { dim, radius, smooth } => {
                if *dim == 0 {
                    return bad("b-RGG dimension must be positive".into());
                }
                if !(*radius > 0.0) {
                    return bad(format!("b-RGG radius {radius} must be positive"));
                }
                smooth.validate(*dim)
            }
            Family::Rideshare { threshold_min, .. } if !(*threshold_min > 0.0) => {
                bad(format!("rideshare threshold {threshold_min} must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// A validated config with any backing file already loaded.
#[derive(Clone, Debug)]
pub struct Generator {
    config: GeneratorConfig,
    source: Source,
}

#[derive(Clone, Debug)]
enum Source {
    Synthetic,
    Roads(RoadGraph),
    Base(BaseGraph),
}

impl Generator {
    pub fn new(config: &GeneratorConfig) -> Result<Self> {
        config.validate()?;
        let source = match &config.family {
            Family::Rideshare { roads, nodes, .. } => {
                Source::Roads(RoadGraph::load(roads, nodes.as_deref())?)
            }
            Family::Basegraph { path } => Source::Base(BaseGraph::load(path)?),
            _ => Source::Synthetic,
        };
        Ok(Generator { config: config.clone(), source })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn sample(&self, seed: u64) -> Result<Instance> {
        let (n, m) = (self.config.n_offline, self.config.n_online);
        let mut inst = match (&self.config.family, &self.source) {
            (Family::Er { p }, _) => gen_er(m, n, *p, seed),
            (Family::Ba { b }, _) => gen_ba(m, n, *b, seed)?,
            (Family::Geom { q }, _) => gen_geom(m, n, *q, seed)?,
            (Family::BrggTheory { dim, radius, smooth }, _) => {
                gen_brgg_theory(m, n, *dim, *radius, smooth, seed)?
            }
            (Family::Rideshare { threshold_min, .. }, Source::Roads(roads)) => {
                gen_rideshare(roads, m, n, *threshold_min, seed)?
            }
            (Family::Basegraph { .. }, Source::Base(base)) => gen_basegraph(base, m, n, seed)?,
            _ => unreachable!("source matches family by construction"),
        };
        inst.meta.insert("params".into(), json!(self.config.family.params()));
        Ok(inst)
    }
}

/// Convenience: build a generator and draw one instance.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<Instance> {
    Generator::new(config)?.sample(seed)
}

fn finish(
    n: usize,
    m: usize,
    edges: Vec<Edge>,
    rng: &mut Rng,
    family: &str,
    seed: u64,
) -> Instance {
    let probs = (0..m).map(|_| rng.random::<f64>()).collect();
    let mut inst = Instance::new(n, m, edges, probs);
    inst.meta.insert("family".into(), json!(family));
    inst.meta.insert("seed".into(), json!(seed));
    inst
}

/// Erdős–Rényi: each of the `m·n` pairs is an edge independently with
/// probability `p`, weight `U(0,1)`.
pub fn gen_er(m: usize, n: usize, p: f64, seed: u64) -> Instance {
    let mut rng = rng::rng(seed);
    let mut edges = Vec::new();
    for t in 0..m {
        for u in 0..n {
            if rng.random::<f64>() < p {
                edges.push(Edge::new(t, u, rng.random()));
            }
        }
    }
    finish(n, m, edges, &mut rng, "er", seed)
}

/// Barabási–Albert style preferential attachment. Each online node attaches to
/// `b` distinct offline nodes, drawn one at a time without replacement with
/// probability proportional to `degree + 1`.
pub fn gen_ba(m: usize, n: usize, b: usize, seed: u64) -> Result<Instance> {
    if b > n {
        return Err(Error::InvalidConfig(format!("BA b={b} exceeds n_offline={n}")));
    }
    let mut rng = rng::rng(seed);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(m * b);
    for t in 0..m {
        let mut chosen: Vec<usize> = Vec::with_capacity(b);
        let mut pool: Vec<usize> = (0..n).collect();
        for _ in 0..b {
            let total: usize = pool.iter().map(|&u| degree[u] + 1).sum();
            let mut r = rng.random_range(0..total);
            let mut pick = pool.len() - 1;
            for (i, &u) in pool.iter().enumerate() {
                let w = degree[u] + 1;
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            chosen.push(pool.swap_remove(pick));
        }
        chosen.sort_unstable();
        for &u in &chosen {
            edges.push(Edge::new(t, u, rng.random()));
        }
        for &u in &chosen {
            degree[u] += 1;
        }
    }
    Ok(finish(n, m, edges, &mut rng, "ba", seed))
}

/// Number of edges kept by the geometric family: `⌈q·m·n⌉`, guarding against
/// products like `0.15·200 = 30.000000000000004`.
pub fn geom_edge_count(m: usize, n: usize, q: f64) -> usize {
    let raw = q * (m * n) as f64;
    let rounded = raw.round();
    let k = if (raw - rounded).abs() < 1e-9 { rounded } else { raw.ceil() };
    (k as usize).min(m * n)
}

/// Geometric: positions uniform in the unit square, candidate weight
/// `1 − dist/√2` on every pair, keep the `⌈q·m·n⌉` heaviest. Positions are
/// stored as embeddings.
pub fn gen_geom(m: usize, n: usize, q: f64, seed: u64) -> Result<Instance> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidConfig(format!("GEOM q={q} outside (0,1]")));
    }
    let mut rng = rng::rng(seed);
    let pos: Vec<Vec<f64>> = (0..m + n).map(|_| vec![rng.random(), rng.random()]).collect();
    let mut candidates = geom_candidates(&pos, m, n);
    let keep = geom_edge_count(m, n, q);
    // Stable sort keeps (online, offline) order among equal weights.
    candidates.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    candidates.truncate(keep);
    candidates.sort_by_key(|e| (e.online, e.offline));
    let mut inst = finish(n, m, candidates, &mut rng, "geom", seed);
    inst.embeddings = Some(pos);
    Ok(inst)
}

/// All `m·n` geometric candidate edges in `(online, offline)` order.
pub fn geom_candidates(pos: &[Vec<f64>], m: usize, n: usize) -> Vec<Edge> {
    let mut out = Vec::with_capacity(m * n);
    for t in 0..m {
        for u in 0..n {
            let (a, b) = (&pos[t], &pos[m + u]);
            let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            out.push(Edge::new(t, u, 1.0 - dist / std::f64::consts::SQRT_2));
        }
    }
    out
}

pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Bipartite random geometric graph: embeddings i.i.d. from `smooth`, edge iff
/// the ℓ∞ distance is at most `radius`, weights `U(0,1)`.
pub fn gen_brgg_theory(
    m: usize,
    n: usize,
    dim: usize,
    radius: f64,
    smooth: &SmoothSpec,
    seed: u64,
) -> Result<Instance> {
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig(format!("b-RGG radius {radius} must be positive")));
    }
    smooth.validate(dim)?;
    let mut rng = rng::rng(seed);
    let emb: Vec<Vec<f64>> = (0..m + n).map(|_| smooth.sample(dim, &mut rng)).collect();
    let mut edges = Vec::new();
    for t in 0..m {
        for u in 0..n {
            if linf_distance(&emb[t], &emb[m + u]) <= radius {
                edges.push(Edge::new(t, u, rng.random()));
            }
        }
    }
    let mut inst = finish(n, m, edges, &mut rng, "brgg_theory", seed);
    inst.embeddings = Some(emb);
    inst.meta.insert("radius".into(), json!(radius));
    inst.meta.insert("dim".into(), json!(dim));
    inst.meta.insert("beta".into(), beta_json(smooth.beta()));
    Ok(inst)
}

fn beta_json(beta: f64) -> Value {
    if beta.is_finite() {
        json!(beta)
    } else {
        Value::Null
    }
}

/// Precomputed travel times between intersections.
#[derive(Clone, Debug, Default)]
pub struct RoadGraph {
    pub ids: Vec<String>,
    /// `(from, to) → minutes`. Missing pairs are unreachable.
    pub minutes: HashMap<(usize, usize), f64>,
}

#[derive(Deserialize)]
struct TimeRow {
    from_id: String,
    to_id: String,
    minutes: f64,
}

#[derive(Deserialize)]
struct NodeRow {
    id: String,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedFile { path: path.to_path_buf(), reason: reason.into() }
}

impl RoadGraph {
    /// Load `from_id,to_id,minutes` and optionally a node list `id`. Without
    /// a node list the intersections are the ids seen in the times file, in
    /// first-seen order.
    pub fn load(times: &Path, nodes: Option<&Path>) -> Result<Self> {
        let mut g = RoadGraph::default();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |g: &mut RoadGraph, id: &str| -> usize {
            *index.entry(id.to_string()).or_insert_with(|| {
                g.ids.push(id.to_string());
                g.ids.len() - 1
            })
        };
        let with_list = nodes.is_some();
        if let Some(path) = nodes {
            let mut rdr = csv::Reader::from_path(path).map_err(|e| malformed(path, e.to_string()))?;
            for row in rdr.deserialize::<NodeRow>() {
                let row = row.map_err(|e| malformed(path, e.to_string()))?;
                intern(&mut g, &row.id);
            }
        }
        let known = g.ids.len();
        let mut rdr = csv::Reader::from_path(times).map_err(|e| malformed(times, e.to_string()))?;
        for row in rdr.deserialize::<TimeRow>() {
            let row = row.map_err(|e| malformed(times, e.to_string()))?;
            if !(row.minutes >= 0.0) {
                return Err(malformed(times, format!("negative travel time {}", row.minutes)));
            }
            let a = intern(&mut g, &row.from_id);
            let b = intern(&mut g, &row.to_id);
            if with_list && (a >= known || b >= known) {
                return Err(malformed(times, format!("unknown intersection in {}→{}", row.from_id, row.to_id)));
            }
            g.minutes.insert((a, b), row.minutes);
        }
        Ok(g)
    }

    pub fn time(&self, from: usize, to: usize) -> Option<f64> {
        self.minutes.get(&(from, to)).copied()
    }
}

/// Rideshare edges for fixed driver/rider intersections: rider `t` and driver
/// `u` are adjacent iff the driver reaches the rider within `threshold`
/// minutes, with weight `(threshold − time)/threshold`.
pub fn rideshare_edges(roads: &RoadGraph, drivers: &[usize], riders: &[usize], threshold: f64) -> Vec<Edge> {
    let mut edges = Vec::new();
    for (t, &r) in riders.iter().enumerate() {
        for (u, &d) in drivers.iter().enumerate() {
            if let Some(time) = roads.time(d, r) {
                if time <= threshold {
                    edges.push(Edge::new(t, u, (threshold - time) / threshold));
                }
            }
        }
    }
    edges
}

pub fn gen_rideshare(roads: &RoadGraph, m: usize, n: usize, threshold: f64, seed: u64) -> Result<Instance> {
    if roads.ids.len() < m + n {
        return Err(Error::InvalidConfig(format!(
            "road graph has {} intersections, need {}",
            roads.ids.len(),
            m + n
        )));
    }
    let mut rng = rng::rng(seed);
    let picks = index::sample(&mut rng, roads.ids.len(), m + n).into_vec();
    let (drivers, riders) = picks.split_at(n);
    let edges = rideshare_edges(roads, drivers, riders, threshold);
    let mut inst = finish(n, m, edges, &mut rng, "rideshare", seed);
    inst.meta.insert("threshold_min".into(), json!(threshold));
    Ok(inst)
}

/// Worker/task payoff base graph.
#[derive(Clone, Debug, Default)]
pub struct BaseGraph {
    pub workers: Vec<String>,
    pub tasks: Vec<String>,
    pub payoff: HashMap<(usize, usize), f64>,
    pub max_payoff: f64,
}

#[derive(Deserialize)]
struct PayoffRow {
    worker_id: String,
    task_id: String,
    payoff: f64,
}

impl BaseGraph {
    pub fn load(path: &Path) -> Result<Self> {
        let mut g = BaseGraph::default();
        let mut workers: BTreeMap<String, usize> = BTreeMap::new();
        let mut tasks: BTreeMap<String, usize> = BTreeMap::new();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| malformed(path, e.to_string()))?;
        for row in rdr.deserialize::<PayoffRow>() {
            let row = row.map_err(|e| malformed(path, e.to_string()))?;
            if !(row.payoff >= 0.0 && row.payoff.is_finite()) {
                return Err(malformed(path, format!("invalid payoff {}", row.payoff)));
            }
            let next = workers.len();
            let w = *workers.entry(row.worker_id.clone()).or_insert_with(|| {
                g.workers.push(row.worker_id.clone());
                next
            });
            let next = tasks.len();
            let t = *tasks.entry(row.task_id.clone()).or_insert_with(|| {
                g.tasks.push(row.task_id.clone());
                next
            });
            if g.payoff.insert((w, t), row.payoff).is_some() {
                return Err(malformed(path, format!("duplicate pair {},{}", row.worker_id, row.task_id)));
            }
            g.max_payoff = g.max_payoff.max(row.payoff);
        }
        Ok(g)
    }
}

/// Induced subgraph on the given base-graph workers (offline) and tasks
/// (online, in the given arrival order), weights rescaled by the base graph's
/// global maximum payoff.
pub fn basegraph_edges(base: &BaseGraph, workers: &[usize], tasks: &[usize]) -> Vec<Edge> {
    let scale = if base.max_payoff > 0.0 { 1.0 / base.max_payoff } else { 0.0 };
    let mut edges = Vec::new();
    for (t, &task) in tasks.iter().enumerate() {
        for (u, &worker) in workers.iter().enumerate() {
            if let Some(&p) = base.payoff.get(&(worker, task)) {
                edges.push(Edge::new(t, u, p * scale));
            }
        }
    }
    edges
}

pub fn gen_basegraph(base: &BaseGraph, m: usize, n: usize, seed: u64) -> Result<Instance> {
    if base.workers.len() < n || base.tasks.len() < m {
        return Err(Error::InvalidConfig(format!(
            "base graph has {} workers and {} tasks, need {n} and {m}",
            base.workers.len(),
            base.tasks.len()
        )));
    }
    let mut rng = rng::rng(seed);
    let workers = index::sample(&mut rng, base.workers.len(), n).into_vec();
    let tasks = index::sample(&mut rng, base.tasks.len(), m).into_vec();
    let edges = basegraph_edges(base, &workers, &tasks);
    Ok(finish(n, m, edges, &mut rng, "basegraph", seed))
}

/// Perturbed copy: `w ← max(0, w + N(0, ρ²))`, `p ← clamp(p + N(0, ρ²), 0, 1)`.
pub fn add_noise(inst: &Instance, rho: f64, seed: u64) -> Result<Instance> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level {rho} must be nonnegative")));
    }
    let mut out = inst.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    let mut rng = rng::rng(seed);
    let normal = Normal::new(0.0, rho).expect("finite positive sd");
    for e in &mut out.edges {
        e.weight = (e.weight + normal.sample(&mut rng)).max(0.0);
    }
    for p in &mut out.arrival_probs {
        *p = (*p + normal.sample(&mut rng)).clamp(0.0, 1.0);
    }
    out.meta.insert("noise_rho".into(), json!(rho));
    Ok(out)
}
