//! The OBBM data model: instances, matching states, actions and arrival
//! sequences.
//!
//! Online nodes are indexed `0..n_online` in arrival order and offline nodes
//! `0..n_offline`. When embeddings are present they are stored online nodes
//! first, then offline nodes, so node `j` of the offline side lives at
//! `embeddings[n_online + j]`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng;

/// A weighted edge between an online and an offline node.
///
/// Serialized as the triple `[online, offline, weight]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Edge {
    pub online: usize,
    pub offline: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(online: usize, offline: usize, weight: f64) -> Self {
        Edge { online, offline, weight }
    }
}

impl From<(usize, usize, f64)> for Edge {
    fn from((online, offline, weight): (usize, usize, f64)) -> Self {
        Edge { online, offline, weight }
    }
}

impl From<Edge> for (usize, usize, f64) {
    fn from(e: Edge) -> Self {
        (e.online, e.offline, e.weight)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n_offline: usize,
    pub n_online: usize,
    pub edges: Vec<Edge>,
    pub arrival_probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OnlineOutOfRange { edge: usize, online: usize },
    OfflineOutOfRange { edge: usize, offline: usize },
    DuplicateEdge { online: usize, offline: usize },
    NegativeWeight { edge: usize, weight: f64 },
    ProbabilityOutOfRange { online: usize, p: f64 },
    ProbabilityCount { expected: usize, got: usize },
    EmbeddingCount { expected: usize, got: usize },
    EmbeddingOutOfRange { node: usize },
    EmbeddingDimension { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::OnlineOutOfRange { edge, online } => {
                write!(f, "index out of range: edge {edge} has online endpoint {online}")
            }
            Violation::OfflineOutOfRange { edge, offline } => {
                write!(f, "index out of range: edge {edge} has offline endpoint {offline}")
            }
            Violation::DuplicateEdge { online, offline } => {
                write!(f, "duplicate edge ({online}, {offline})")
            }
            Violation::NegativeWeight { edge, weight } => {
                write!(f, "negative weight: edge {edge} has weight {weight}")
            }
            Violation::ProbabilityOutOfRange { online, p } => {
                write!(f, "probability out of range: p[{online}] = {p}")
            }
            Violation::ProbabilityCount { expected, got } => {
                write!(f, "expected {expected} arrival probabilities, got {got}")
            }
            Violation::EmbeddingCount { expected, got } => {
                write!(f, "expected {expected} embeddings, got {got}")
            }
            Violation::EmbeddingOutOfRange { node } => {
                write!(f, "embedding of node {node} leaves the unit cube")
            }
            Violation::EmbeddingDimension { node } => {
                write!(f, "embedding of node {node} has inconsistent dimension")
            }
        }
    }
}

/// Check every structural invariant of an instance, collecting all violations.
pub fn validate_instance(inst: &Instance) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut seen = HashSet::with_capacity(inst.edges.len());
    for (i, e) in inst.edges.iter().enumerate() {
        if e.online >= inst.n_online {
            out.push(Violation::OnlineOutOfRange { edge: i, online: e.online });
        }
        if e.offline >= inst.n_offline {
            out.push(Violation::OfflineOutOfRange { edge: i, offline: e.offline });
        }
        if !seen.insert((e.online, e.offline)) {
            out.push(Violation::DuplicateEdge { online: e.online, offline: e.offline });
        }
        // NaN fails this test too.
        if !(e.weight >= 0.0 && e.weight.is_finite()) {
            out.push(Violation::NegativeWeight { edge: i, weight: e.weight });
        }
    }
    if inst.arrival_probs.len() != inst.n_online {
        out.push(Violation::ProbabilityCount {
            expected: inst.n_online,
            got: inst.arrival_probs.len(),
        });
    }
    for (t, &p) in inst.arrival_probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            out.push(Violation::ProbabilityOutOfRange { online: t, p });
        }
    }
    if let Some(emb) = &inst.embeddings {
        let n = inst.n_nodes();
        if emb.len() != n {
            out.push(Violation::EmbeddingCount { expected: n, got: emb.len() });
        }
        let dim = emb.first().map_or(0, Vec::len);
        for (node, x) in emb.iter().enumerate() {
            if x.len() != dim {
                out.push(Violation::EmbeddingDimension { node });
            } else if x.iter().any(|c| !(0.0..=1.0).contains(c)) {
                out.push(Violation::EmbeddingOutOfRange { node });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

impl Instance {
    pub fn new(n_offline: usize, n_online: usize, edges: Vec<Edge>, arrival_probs: Vec<f64>) -> Self {
        Instance {
            n_offline,
            n_online,
            edges,
            arrival_probs,
            embeddings: None,
            meta: BTreeMap::new(),
        }
    }

    /// Total node count `N = m + n`.
    pub fn n_nodes(&self) -> usize {
        self.n_online + self.n_offline
    }

    pub fn validate(&self) -> Result<()> {
        validate_instance(self).map_err(Error::InvalidInstance)
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(self)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.embeddings.as_ref().and_then(|e| e.first()).map(Vec::len)
    }

    pub fn online_embedding(&self, t: usize) -> Option<&[f64]> {
        self.embeddings.as_ref().map(|e| e[t].as_slice())
    }

    pub fn offline_embedding(&self, u: usize) -> Option<&[f64]> {
        self.embeddings.as_ref().map(|e| e[self.n_online + u].as_slice())
    }

    pub fn weight(&self, online: usize, offline: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.online == online && e.offline == offline)
            .map(|e| e.weight)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Per-online-node neighbor lists, sorted by offline index.
#[derive(Clone, Debug)]
pub struct Adjacency {
    online: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn new(inst: &Instance) -> Self {
        let mut online = vec![Vec::new(); inst.n_online];
        for e in &inst.edges {
            online[e.online].push((e.offline, e.weight));
        }
        for list in &mut online {
            list.sort_by_key(|&(u, _)| u);
        }
        Adjacency { online }
    }

    pub fn neighbors(&self, t: usize) -> &[(usize, f64)] {
        &self.online[t]
    }

    pub fn weight(&self, t: usize, u: usize) -> Option<f64> {
        let list = &self.online[t];
        list.binary_search_by_key(&u, |&(v, _)| v).ok().map(|i| list[i].1)
    }
}

/// Set of available offline nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OfflineSet {
    words: Vec<u64>,
    len: usize,
}

impl OfflineSet {
    pub fn empty(n: usize) -> Self {
        OfflineSet { words: vec![0; n.div_ceil(64)], len: n }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for u in 0..n {
            s.insert(u);
        }
        s
    }

    pub fn from_mask(mask: u64, n: usize) -> Self {
        let mut s = Self::empty(n);
        if !s.words.is_empty() {
            s.words[0] = mask;
        }
        s
    }

    /// The set as a single 64-bit mask, if the universe fits.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Size of the universe (number of offline nodes).
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn contains(&self, u: usize) -> bool {
        u < self.len && self.words[u / 64] >> (u % 64) & 1 == 1
    }

    pub fn insert(&mut self, u: usize) {
        self.words[u / 64] |= 1 << (u % 64);
    }

    pub fn remove(&mut self, u: usize) {
        self.words[u / 64] &= !(1 << (u % 64));
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&u| self.contains(u))
    }
}

/// A decision point: which offline nodes are free, which online node is up,
/// and whether it showed up.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingState {
    pub available: OfflineSet,
    /// Zero-based online index; `t == n_online` means the episode is over.
    pub t: usize,
    pub arrived: bool,
}

impl MatchingState {
    pub fn initial(inst: &Instance) -> Self {
        MatchingState {
            available: OfflineSet::full(inst.n_offline),
            t: 0,
            arrived: false,
        }
    }

    pub fn arriving(available: OfflineSet, t: usize) -> Self {
        MatchingState { available, t, arrived: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Match(usize),
    Skip,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Match(u) => write!(f, "Match({u})"),
            Action::Skip => f.write_str("Skip"),
        }
    }
}

impl Action {
    /// Whether this action is legal in `state`: the target must be both
    /// available and adjacent to the arriving node.
    pub fn is_legal(&self, adj: &Adjacency, state: &MatchingState) -> bool {
        match *self {
            Action::Skip => true,
            Action::Match(u) => {
                state.arrived && state.available.contains(u) && adj.weight(state.t, u).is_some()
            }
        }
    }
}

/// Realized arrivals `a ∈ {0,1}^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrivalSequence(pub Vec<bool>);

impl ArrivalSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bits of the integer `code`, online node `t` taking bit `t`.
    pub fn from_code(code: u64, m: usize) -> Self {
        ArrivalSequence((0..m).map(|t| code >> t & 1 == 1).collect())
    }

    pub fn arrived(&self, t: usize) -> bool {
        self.0[t]
    }
}

/// Draw each arrival bit independently with its probability.
pub fn sample_arrivals(inst: &Instance, seed: u64) -> ArrivalSequence {
    let mut rng = rng::rng(seed);
    sample_arrivals_with(inst, &mut rng)
}

pub fn sample_arrivals_with(inst: &Instance, rng: &mut rng::Rng) -> ArrivalSequence {
    ArrivalSequence(
        inst.arrival_probs
            .iter()
            // One draw per node even for degenerate p keeps streams aligned.
            .map(|&p| rng.random::<f64>() < p)
            .collect(),
    )
}

/// `Pr[a] = Π_t (p_t a_t + (1 − p_t)(1 − a_t))`.
pub fn arrival_probability(inst: &Instance, a: &ArrivalSequence) -> Result<f64> {
    if a.len() != inst.n_online {
        return Err(Error::LengthMismatch { expected: inst.n_online, got: a.len() });
    }
    Ok(inst
        .arrival_probs
        .iter()
        .zip(&a.0)
        .map(|(&p, &bit)| if bit { p } else { 1.0 - p })
        .product())
}
