//! Acting greedily on predicted values-to-go.

use std::sync::Arc;

use super::features::{encode_with, NodeRef};
use super::network::Model;
use crate::dp::VtgTable;
use crate::error::{Error, Result};
use crate::model::{Action, Adjacency, Instance, MatchingState};
use crate::policy::{BoundPolicy, Policy};

/// Predicted value of each candidate action at an arrival: the skip value
/// first, then one entry per available neighbor in increasing offline index.
pub trait VtgEstimator: Send + Sync {
    fn name(&self) -> String;

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundEstimator + 'a>>;
}

pub trait BoundEstimator {
    fn estimate(&mut self, state: &MatchingState) -> Result<(f64, Vec<(usize, f64)>)>;
}

/// Highest predicted value wins; Skip wins ties, then the lowest index.
pub fn choose(skip: f64, matches: &[(usize, f64)]) -> Action {
    let mut best = (Action::Skip, skip);
    for &(u, v) in matches {
        if v > best.1 {
            best = (Action::Match(u), v);
        }
    }
    best.0
}

impl VtgEstimator for Model {
    fn name(&self) -> String {
        "neural".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundEstimator + 'a>> {
        Ok(Box::new(BoundModel { model: self, inst, adj: inst.adjacency() }))
    }
}

struct BoundModel<'a> {
    model: &'a Model,
    inst: &'a Instance,
    adj: Adjacency,
}

impl BoundEstimator for BoundModel<'_> {
    fn estimate(&mut self, state: &MatchingState) -> Result<(f64, Vec<(usize, f64)>)> {
        let fg = encode_with(self.inst, &self.adj, state)?;
        let y = self.model.forward(&fg)?;
        let mut matches = Vec::new();
        for &(u, _) in self.adj.neighbors(state.t) {
            if state.available.contains(u) {
                let pos = fg.position(NodeRef::Offline(u)).expect("available node is encoded");
                matches.push((u, y[pos]));
            }
        }
        Ok((y[fg.skip], matches))
    }
}

/// Exact values from the DP, standing in for a perfect model.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactEstimator;

impl VtgEstimator for ExactEstimator {
    fn name(&self) -> String {
        "exact".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundEstimator + 'a>> {
        Ok(Box::new(BoundExact(VtgTable::new(inst)?)))
    }
}

struct BoundExact(VtgTable);

impl BoundEstimator for BoundExact {
    fn estimate(&mut self, state: &MatchingState) -> Result<(f64, Vec<(usize, f64)>)> {
        let s = state.available.as_mask().ok_or_else(|| Error::InvalidParameter("free set too large".into()))?;
        Ok(self.0.action_values(s, state.t))
    }
}

pub fn neural_action(model: &Model, inst: &Instance, state: &MatchingState) -> Result<Action> {
    if !state.arrived {
        return Ok(Action::Skip);
    }
    let (skip, matches) = model.bind(inst)?.estimate(state)?;
    Ok(choose(skip, &matches))
}

/// Greedy-over-predictions policy around any estimator.
#[derive(Clone)]
pub struct EstimatorPolicy {
    pub id: String,
    pub estimator: Arc<dyn VtgEstimator>,
}

impl EstimatorPolicy {
    pub fn new(id: impl Into<String>, estimator: Arc<dyn VtgEstimator>) -> Self {
        EstimatorPolicy { id: id.into(), estimator }
    }

    pub fn neural(model: Model) -> Self {
        Self::new("neural", Arc::new(model))
    }
}

impl Policy for EstimatorPolicy {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(BoundEstimatorPolicy(self.estimator.bind(inst)?)))
    }
}

struct BoundEstimatorPolicy<'a>(Box<dyn BoundEstimator + 'a>);

impl BoundPolicy for BoundEstimatorPolicy<'_> {
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        if !state.arrived {
            return Ok(vec![(Action::Skip, 1.0)]);
        }
        let (skip, matches) = self.0.estimate(state)?;
        Ok(vec![(choose(skip, &matches), 1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, OfflineSet};
    use crate::neural::network::ModelConfig;

    #[test]
    fn tie_rules() {
        assert_eq!(choose(1.0, &[(0, 1.0), (1, 1.0)]), Action::Skip);
        assert_eq!(choose(0.5, &[(3, 1.0), (1, 1.0)]), Action::Match(3));
        assert_eq!(choose(0.5, &[]), Action::Skip);
    }

    #[test]
    fn constant_model_skips() {
        let inst = Instance::new(2, 2, vec![Edge::new(0, 0, 0.9), Edge::new(0, 1, 0.2)], vec![1.0, 0.5]);
        let m = Model::zeros(ModelConfig::default()).unwrap();
        let s = MatchingState::arriving(OfflineSet::full(2), 0);
        assert_eq!(neural_action(&m, &inst, &s).unwrap(), Action::Skip);
        let none = MatchingState::arriving(OfflineSet::empty(2), 0);
        let m = Model::init(ModelConfig::default(), 5).unwrap();
        assert_eq!(neural_action(&m, &inst, &none).unwrap(), Action::Skip);
    }
}
