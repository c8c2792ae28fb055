//! Exact value-to-go and the optimal online policy.
//!
//! `V(S, t)` is the expected weight the optimal online algorithm collects from
//! online nodes `t..m` when only the offline nodes in `S` remain:
//!
//! ```text
//! V(S, t) = (1 − p_t)·V(S, t+1) + p_t·max{ V(S, t+1), max_{u ∈ N(t) ∩ S} w_tu + V(S \ {u}, t+1) }
//! ```
//!
//! with `V(∅, t) = V(S, m) = 0` (zero-based `t`). [`VtgTable`] memoizes this
//! recurrence over `(S, t)` with `S` packed into a 64-bit mask. The table is
//! confined to one evaluation and dropped with it.

use std::collections::HashMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, Adjacency, Instance, MatchingState, OfflineSet};
use crate::policy::{BoundPolicy, Policy};

pub const DEFAULT_DP_LIMIT: usize = 20;
pub const HARD_DP_LIMIT: usize = 64;
/// Size cap for the enumeration-based routines (brute force, policy
/// evaluation, edge contributions).
pub const ENUMERATION_CAP: usize = 12;

pub struct VtgTable {
    adj: Vec<Vec<(usize, f64)>>,
    probs: Vec<f64>,
    /// Offline nodes adjacent to some online node `≥ t`. `V(S, t)` only
    /// depends on `S ∩ relevant[t]`, which canonicalizes memo keys.
    relevant: Vec<u64>,
    memo: Vec<FxHashMap<u64, f64>>,
    n_offline: usize,
}

impl VtgTable {
    pub fn new(inst: &Instance) -> Result<Self> {
        Self::with_limit(inst, DEFAULT_DP_LIMIT)
    }

    pub fn with_limit(inst: &Instance, limit: usize) -> Result<Self> {
        let limit = limit.min(HARD_DP_LIMIT);
        if inst.n_offline > limit {
            return Err(Error::DpLimit { n_offline: inst.n_offline, limit });
        }
        let m = inst.n_online;
        let mut adj = vec![Vec::new(); m];
        for e in &inst.edges {
            adj[e.online].push((e.offline, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(u, _)| u);
        }
        let mut relevant = vec![0u64; m + 1];
        for t in (0..m).rev() {
            relevant[t] = relevant[t + 1] | adj[t].iter().fold(0, |acc, &(u, _)| acc | 1 << u);
        }
        Ok(VtgTable {
            adj,
            probs: inst.arrival_probs.clone(),
            relevant,
            memo: vec![FxHashMap::default(); m],
            n_offline: inst.n_offline,
        })
    }

    pub fn n_online(&self) -> usize {
        self.probs.len()
    }

    pub fn full_mask(&self) -> u64 {
        if self.n_offline == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_offline) - 1
        }
    }

    /// `V(S, t)` for zero-based `t` in `0..=m`.
    pub fn value(&mut self, s: u64, t: usize) -> f64 {
        if t >= self.probs.len() {
            return 0.0;
        }
        let s = s & self.relevant[t];
        if s == 0 {
            return 0.0;
        }
        if let Some(&v) = self.memo[t].get(&s) {
            return v;
        }
        let skip = self.value(s, t + 1);
        let mut best = skip;
        for i in 0..self.adj[t].len() {
            let (u, w) = self.adj[t][i];
            if s >> u & 1 == 1 {
                best = best.max(w + self.value(s & !(1 << u), t + 1));
            }
        }
        let p = self.probs[t];
        let v = (1.0 - p) * skip + p * best;
        self.memo[t].insert(s, v);
        v
    }

    /// `V(G) = V(L, 0)`.
    pub fn root(&mut self) -> f64 {
        let full = self.full_mask();
        self.value(full, 0)
    }

    /// `V(S, t, u) = w_tu + V(S \ {u}, t+1)`.
    pub fn match_value(&mut self, s: u64, t: usize, u: usize, w: f64) -> f64 {
        w + self.value(s & !(1 << u), t + 1)
    }

    /// Skip value `V(S, t+1)` and the match value of every available neighbor
    /// of `t`, in increasing offline index.
    pub fn action_values(&mut self, s: u64, t: usize) -> (f64, Vec<(usize, f64)>) {
        let skip = self.value(s, t + 1);
        let mut out = Vec::with_capacity(self.adj[t].len());
        for i in 0..self.adj[t].len() {
            let (u, w) = self.adj[t][i];
            if s >> u & 1 == 1 {
                out.push((u, self.match_value(s, t, u, w)));
            }
        }
        (skip, out)
    }

    /// OPT_on's decision for an arrival at `t` with free set `s`.
    ///
    /// Ties between neighbors go to the lowest offline index; a match whose
    /// value equals the skip value is taken.
    pub fn action(&mut self, s: u64, t: usize) -> Action {
        let (skip, matches) = self.action_values(s, t);
        let mut best: Option<(usize, f64)> = None;
        for (u, v) in matches {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((u, v));
            }
        }
        match best {
            Some((u, v)) if v >= skip => Action::Match(u),
            _ => Action::Skip,
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.iter().map(|m| m.len()).sum()
    }
}

fn state_mask(state: &MatchingState) -> Result<u64> {
    state.available.as_mask().ok_or(Error::DpLimit {
        n_offline: state.available.universe(),
        limit: HARD_DP_LIMIT,
    })
}

/// `V(S, t)` for an arbitrary free set and zero-based online index.
pub fn vtg(inst: &Instance, available: &OfflineSet, t: usize) -> Result<f64> {
    if t > inst.n_online {
        return Err(Error::InvalidParameter(format!(
            "online index {t} outside 0..={}",
            inst.n_online
        )));
    }
    let mut table = VtgTable::new(inst)?;
    let mask = available.as_mask().ok_or(Error::DpLimit {
        n_offline: inst.n_offline,
        limit: HARD_DP_LIMIT,
    })?;
    Ok(table.value(mask, t))
}

/// `V(G)`: the expected weight of OPT_on's matching.
pub fn value(inst: &Instance) -> Result<f64> {
    Ok(VtgTable::new(inst)?.root())
}

pub fn opt_on_action(inst: &Instance, state: &MatchingState) -> Result<Action> {
    if !state.arrived {
        return Ok(Action::Skip);
    }
    let mut table = VtgTable::new(inst)?;
    Ok(table.action(state_mask(state)?, state.t))
}

/// The optimal online policy, backed by a lazily filled VTG table.
#[derive(Clone, Copy, Debug)]
pub struct OptOn {
    pub dp_limit: usize,
}

impl Default for OptOn {
    fn default() -> Self {
        OptOn { dp_limit: DEFAULT_DP_LIMIT }
    }
}

impl Policy for OptOn {
    fn id(&self) -> String {
        "opt-on".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(BoundOptOn { table: VtgTable::with_limit(inst, self.dp_limit)? }))
    }
}

struct BoundOptOn {
    table: VtgTable,
}

impl BoundPolicy for BoundOptOn {
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        let a = if state.arrived {
            self.table.action(state_mask(state)?, state.t)
        } else {
            Action::Skip
        };
        Ok(vec![(a, 1.0)])
    }
}

fn check_enumeration_cap(inst: &Instance, check_offline: bool) -> Result<()> {
    if inst.n_online > ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "online nodes for enumeration",
            cap: ENUMERATION_CAP,
            got: inst.n_online,
        });
    }
    if check_offline && inst.n_offline > ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "offline nodes for enumeration",
            cap: ENUMERATION_CAP,
            got: inst.n_offline,
        });
    }
    Ok(())
}

/// Independent oracle for `V(G)`: plain recursion over the edge list with a
/// boolean availability vector and no memoization. Exponential; tests only.
pub fn brute_force_value(inst: &Instance) -> Result<f64> {
    check_enumeration_cap(inst, true)?;
    let mut avail = vec![true; inst.n_offline];
    Ok(brute_force(inst, &mut avail, 0))
}

fn brute_force(inst: &Instance, avail: &mut [bool], t: usize) -> f64 {
    if t == inst.n_online || !avail.iter().any(|&a| a) {
        return 0.0;
    }
    let skip = brute_force(inst, avail, t + 1);
    let mut best = skip;
    for e in inst.edges.iter().filter(|e| e.online == t) {
        if avail[e.offline] {
            avail[e.offline] = false;
            best = best.max(e.weight + brute_force(inst, avail, t + 1));
            avail[e.offline] = true;
        }
    }
    let p = inst.arrival_probs[t];
    (1.0 - p) * skip + p * best
}

/// Walk every arrival sequence (as a binary tree over `t`, sharing prefixes)
/// and every branch of the policy's action distribution. `on_match` receives
/// `(t, u, w, mass)` where `mass` is the probability of reaching that match.
fn enumerate_matches(
    inst: &Instance,
    policy: &mut dyn BoundPolicy,
    policy_id: &str,
    on_match: &mut dyn FnMut(usize, usize, f64, f64),
) -> Result<()> {
    let adj = inst.adjacency();
    let mut available = OfflineSet::full(inst.n_offline);
    walk(inst, &adj, policy, policy_id, &mut available, 0, 1.0, on_match)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    inst: &Instance,
    adj: &Adjacency,
    policy: &mut dyn BoundPolicy,
    policy_id: &str,
    available: &mut OfflineSet,
    t: usize,
    mass: f64,
    on_match: &mut dyn FnMut(usize, usize, f64, f64),
) -> Result<()> {
    if t == inst.n_online {
        return Ok(());
    }
    let p = inst.arrival_probs[t];
    if p < 1.0 {
        walk(inst, adj, policy, policy_id, available, t + 1, mass * (1.0 - p), on_match)?;
    }
    if p > 0.0 {
        let state = MatchingState::arriving(available.clone(), t);
        let dist = policy.distribution(&state)?;
        for (action, q) in dist {
            if q <= 0.0 {
                continue;
            }
            if !action.is_legal(adj, &state) {
                return Err(Error::InvalidAction {
                    policy: policy_id.to_string(),
                    t,
                    action: action.to_string(),
                });
            }
            let branch = mass * p * q;
            match action {
                Action::Skip => {
                    walk(inst, adj, policy, policy_id, available, t + 1, branch, on_match)?
                }
                Action::Match(u) => {
                    let w = adj.weight(t, u).unwrap_or(0.0);
                    on_match(t, u, w, branch);
                    available.remove(u);
                    walk(inst, adj, policy, policy_id, available, t + 1, branch, on_match)?;
                    available.insert(u);
                }
            }
        }
    }
    Ok(())
}

/// Exact expected matching weight of `policy`, enumerating all `2^m` arrival
/// sequences (and the policy's own randomization, if any).
pub fn policy_expected_value(inst: &Instance, policy: &dyn Policy) -> Result<f64> {
    check_enumeration_cap(inst, false)?;
    let mut bound = policy.bind(inst)?;
    let mut total = 0.0;
    enumerate_matches(inst, bound.as_mut(), &policy.id(), &mut |_, _, w, mass| {
        total += mass * w
    })?;
    Ok(total)
}

/// Probability mass `α_e` of the arrival sequences on which OPT_on's matching
/// contains edge `e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeContribution {
    pub online: usize,
    pub offline: usize,
    pub weight: f64,
    pub alpha: f64,
}

impl EdgeContribution {
    pub fn contribution(&self) -> f64 {
        self.alpha * self.weight
    }
}

/// `α_e` for every edge, in the instance's edge order. `Σ α_e w_e = V(G)`.
pub fn edge_contributions(inst: &Instance) -> Result<Vec<EdgeContribution>> {
    check_enumeration_cap(inst, false)?;
    let index: HashMap<(usize, usize), usize> = inst
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.online, e.offline), i))
        .collect();
    let mut alpha = vec![0.0; inst.edges.len()];
    let policy = OptOn::default();
    let mut bound = policy.bind(inst)?;
    enumerate_matches(inst, bound.as_mut(), "opt-on", &mut |t, u, _, mass| {
        alpha[index[&(t, u)]] += mass;
    })?;
    Ok(inst
        .edges
        .iter()
        .zip(alpha)
        .map(|(e, alpha)| EdgeContribution {
            online: e.online,
            offline: e.offline,
            weight: e.weight,
            alpha,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Edge;
    use crate::policy::{AlwaysSkip, FnPolicy};

    fn two_step() -> Instance {
        // n=1, m=2, p=(1,1), w=(1,2)
        Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0])
    }

    #[test]
    fn terminal_values_are_zero() {
        let inst = two_step();
        let mut table = VtgTable::new(&inst).unwrap();
        assert_eq!(table.value(0, 0), 0.0);
        assert_eq!(table.value(1, 2), 0.0);
    }

    #[test]
    fn single_edge_value() {
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.5]);
        assert_eq!(value(&inst).unwrap(), 0.5);
        assert_eq!(brute_force_value(&inst).unwrap(), 0.5);
    }

    #[test]
    fn empty_graph_is_worth_nothing() {
        let inst = Instance::new(3, 2, vec![], vec![0.5, 0.9]);
        assert_eq!(value(&inst).unwrap(), 0.0);
        assert_eq!(brute_force_value(&inst).unwrap(), 0.0);
    }

    #[test]
    fn opt_on_waits_for_the_heavier_edge() {
        let inst = two_step();
        let state = MatchingState::arriving(OfflineSet::full(1), 0);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Skip);
        let state = MatchingState::arriving(OfflineSet::full(1), 1);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Match(0));
        assert_eq!(value(&inst).unwrap(), 2.0);
    }

    #[test]
    fn single_arrival_matches_any_available_neighbor() {
        let inst = Instance::new(2, 1, vec![Edge::new(0, 1, 0.3)], vec![0.4]);
        let state = MatchingState::arriving(OfflineSet::full(2), 0);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Match(1));
        let mut gone = OfflineSet::full(2);
        gone.remove(1);
        let state = MatchingState::arriving(gone, 0);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Skip);
    }

    #[test]
    fn exact_tie_prefers_match_and_lowest_index() {
        // Two equal edges with no future: both match values equal 0.5 > 0.
        let inst = Instance::new(3, 1, vec![Edge::new(0, 2, 0.5), Edge::new(0, 1, 0.5)], vec![1.0]);
        let state = MatchingState::arriving(OfflineSet::full(3), 0);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Match(1));
        // A zero-weight edge ties with skipping; the match is taken.
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 0.0)], vec![1.0]);
        let state = MatchingState::arriving(OfflineSet::full(1), 0);
        assert_eq!(opt_on_action(&inst, &state).unwrap(), Action::Match(0));
    }

    #[test]
    fn dp_limit_is_enforced() {
        let inst = Instance::new(21, 1, vec![], vec![0.5]);
        assert!(matches!(value(&inst), Err(Error::DpLimit { n_offline: 21, limit: 20 })));
        assert!(VtgTable::with_limit(&inst, 30).is_ok());
        let big = Instance::new(65, 1, vec![], vec![0.5]);
        assert!(matches!(
            VtgTable::with_limit(&big, 100),
            Err(Error::DpLimit { limit: 64, .. })
        ));
    }

    #[test]
    fn brute_force_respects_cap() {
        let inst = Instance::new(13, 1, vec![], vec![0.5]);
        assert!(matches!(brute_force_value(&inst), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn policy_values_on_two_step() {
        let inst = two_step();
        assert_eq!(policy_expected_value(&inst, &OptOn::default()).unwrap(), 2.0);
        assert_eq!(policy_expected_value(&inst, &AlwaysSkip).unwrap(), 0.0);
        let greedy = FnPolicy::new("first-fit", |inst: &Instance, s: &MatchingState| {
            Ok(inst
                .adjacency()
                .neighbors(s.t)
                .iter()
                .find(|&&(u, _)| s.available.contains(u))
                .map_or(Action::Skip, |&(u, _)| Action::Match(u)))
        });
        assert_eq!(policy_expected_value(&inst, &greedy).unwrap(), 1.0);
    }

    #[test]
    fn illegal_actions_are_rejected() {
        let inst = Instance::new(2, 1, vec![Edge::new(0, 0, 1.0)], vec![1.0]);
        let bad = FnPolicy::new("bad", |_: &Instance, _: &MatchingState| Ok(Action::Match(1)));
        assert!(matches!(
            policy_expected_value(&inst, &bad),
            Err(Error::InvalidAction { t: 0, .. })
        ));
    }

    #[test]
    fn single_edge_alpha_is_its_probability() {
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.7]);
        let c = edge_contributions(&inst).unwrap();
        assert!((c[0].alpha - 0.7).abs() < 1e-15);
    }

    #[test]
    fn unused_edge_has_zero_alpha() {
        let c = edge_contributions(&two_step()).unwrap();
        assert_eq!(c[0].alpha, 0.0);
        assert_eq!(c[1].alpha, 1.0);
    }
}
