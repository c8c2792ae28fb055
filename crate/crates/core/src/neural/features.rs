//! Encoding of a matching state as a small graph with per-node features.
//!
//! Node order: available offline nodes (ascending), the skip node, then the
//! current and future online nodes in arrival order. Past online nodes and
//! matched offline nodes are dropped.
//!
//! Feature layout (version 1), one row per node:
//!
//! | col | meaning |
//! |-----|---------|
//! | 0 | offline side (the skip node counts as offline) |
//! | 1 | skip node |
//! | 2 | current arrival |
//! | 3 | arrival status: `p_j` for future online nodes, 1 for the current one and for offline/skip |
//! | 4 | remaining time `(m − j) / m` for online node `j`, else 0 |
//! | 5 | remaining online nodes over available offline nodes |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Adjacency, Instance, MatchingState};

pub const FEATURE_DIM: usize = 6;
pub const FEATURE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRef {
    Offline(usize),
    Skip,
    Online(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureGraph {
    pub features: Vec<[f64; FEATURE_DIM]>,
    /// Undirected edges `(a, b, weight)` between node positions.
    pub edges: Vec<(usize, usize, f64)>,
    pub nodes: Vec<NodeRef>,
    pub skip: usize,
    pub current: usize,
}

impl FeatureGraph {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn position(&self, node: NodeRef) -> Option<usize> {
        self.nodes.iter().position(|&n| n == node)
    }

    /// Neighbor lists `(node, weight)`, each sorted by node position.
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut nb = vec![Vec::new(); self.len()];
        for &(a, b, w) in &self.edges {
            nb[a].push((b, w));
            nb[b].push((a, w));
        }
        for l in &mut nb {
            l.sort_by_key(|&(v, _)| v);
        }
        nb
    }

    /// Relabel nodes: node `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<FeatureGraph> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::ShapeMismatch("not a permutation of the node set".into()));
        }
        let mut features = vec![[0.0; FEATURE_DIM]; n];
        let mut nodes = vec![NodeRef::Skip; n];
        for i in 0..n {
            features[perm[i]] = self.features[i];
            nodes[perm[i]] = self.nodes[i];
        }
        Ok(FeatureGraph {
            features,
            edges: self.edges.iter().map(|&(a, b, w)| (perm[a], perm[b], w)).collect(),
            nodes,
            skip: perm[self.skip],
            current: perm[self.current],
        })
    }
}

pub fn encode_state(inst: &Instance, state: &MatchingState) -> Result<FeatureGraph> {
    encode_with(inst, &inst.adjacency(), state)
}

pub fn encode_with(inst: &Instance, adj: &Adjacency, state: &MatchingState) -> Result<FeatureGraph> {
    let m = inst.n_online;
    if !state.arrived || state.t >= m {
        return Err(Error::InvalidParameter(format!("no arrival to encode at t = {}", state.t)));
    }
    let avail: Vec<usize> = state.available.iter().collect();
    let global = (m - state.t) as f64 / avail.len().max(1) as f64;
    let mf = m as f64;

    let mut features = Vec::with_capacity(avail.len() + 1 + m - state.t);
    let mut nodes = Vec::with_capacity(features.capacity());
    let mut offline_pos = vec![usize::MAX; inst.n_offline];
    for &u in &avail {
        offline_pos[u] = features.len();
        features.push([1.0, 0.0, 0.0, 1.0, 0.0, global]);
        nodes.push(NodeRef::Offline(u));
    }
    let skip = features.len();
    features.push([1.0, 1.0, 0.0, 1.0, 0.0, global]);
    nodes.push(NodeRef::Skip);
    let current = features.len();
    let mut edges = Vec::new();
    for j in state.t..m {
        let pos = features.len();
        let now = j == state.t;
        let status = if now { 1.0 } else { inst.arrival_probs[j] };
        features.push([0.0, 0.0, if now { 1.0 } else { 0.0 }, status, (m - j) as f64 / mf, global]);
        nodes.push(NodeRef::Online(j));
        edges.push((skip, pos, 0.0));
        for &(u, w) in adj.neighbors(j) {
            if offline_pos[u] != usize::MAX {
                edges.push((offline_pos[u], pos, w));
            }
        }
    }
    Ok(FeatureGraph { features, edges, nodes, skip, current })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, OfflineSet};

    #[test]
    fn first_arrival_global_ratio() {
        let inst = crate::generators::gen_er(7, 4, 0.5, 2);
        let fg = encode_state(&inst, &MatchingState::arriving(OfflineSet::full(4), 0)).unwrap();
        assert!(fg.features.iter().all(|f| f[5] == 7.0 / 4.0));
        assert_eq!(fg.len(), 4 + 1 + 7);
    }

    #[test]
    fn one_offline_left() {
        let inst = crate::generators::gen_er(5, 4, 0.5, 2);
        let mut s = OfflineSet::empty(4);
        s.insert(2);
        let fg = encode_state(&inst, &MatchingState::arriving(s, 1)).unwrap();
        let offline = fg.features.iter().filter(|f| f[0] == 1.0).count();
        assert_eq!(offline, 2);
        assert_eq!(fg.nodes[..2], [NodeRef::Offline(2), NodeRef::Skip]);
    }

    #[test]
    fn skip_touches_every_online_node() {
        let inst = Instance::new(1, 3, vec![Edge::new(1, 0, 0.4)], vec![0.2, 0.3, 0.9]);
        let fg = encode_state(&inst, &MatchingState::arriving(OfflineSet::full(1), 0)).unwrap();
        let nb = fg.neighbors();
        assert_eq!(nb[fg.skip].len(), 3);
        assert!(nb[fg.skip].iter().all(|&(_, w)| w == 0.0));
    }

    #[test]
    fn not_arrived_is_rejected() {
        let inst = Instance::new(1, 1, vec![], vec![0.5]);
        let mut s = MatchingState::initial(&inst);
        s.arrived = false;
        assert!(encode_state(&inst, &s).is_err());
    }
}
