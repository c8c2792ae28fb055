//! Single-episode simulation and the per-instance competitive ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_arrivals_with, Action, ArrivalSequence, Edge, Instance, MatchingState};
use crate::offline::offline_optimum;
use crate::policy::{BoundPolicy, Policy};
use crate::rng::{self, tags, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub instance_id: String,
    pub policy: String,
    pub trial: usize,
    pub arrivals: Vec<bool>,
    pub matched: Vec<Edge>,
    pub matched_weight: f64,
    pub offline_opt: f64,
}

impl EpisodeResult {
    /// `M / OPT`, undefined when the offline optimum is zero.
    pub fn ratio(&self) -> Option<f64> {
        (self.offline_opt > 0.0).then(|| self.matched_weight / self.offline_opt)
    }
}

/// Play one episode on `inst` with arrivals `a`. Every action is checked
/// against the true instance; an illegal one aborts with an error.
pub fn simulate_episode(
    inst: &Instance,
    policy: &mut dyn BoundPolicy,
    policy_id: &str,
    a: &ArrivalSequence,
    rng: &mut Rng,
) -> Result<EpisodeResult> {
    if a.len() != inst.n_online {
        return Err(Error::LengthMismatch { expected: inst.n_online, got: a.len() });
    }
    let adj = inst.adjacency();
    let mut state = MatchingState::initial(inst);
    let mut matched = Vec::new();
    let mut weight = 0.0;
    for t in 0..inst.n_online {
        state.t = t;
        state.arrived = a.arrived(t);
        if !state.arrived {
            continue;
        }
        let action = policy.act(&state, rng)?;
        if !action.is_legal(&adj, &state) {
            return Err(Error::InvalidAction { policy: policy_id.to_string(), t, action: action.to_string() });
        }
        if let Action::Match(u) = action {
            let w = adj.weight(t, u).expect("legal match has an edge");
            state.available.remove(u);
            matched.push(Edge::new(t, u, w));
            weight += w;
        }
    }
    let opt = offline_optimum(inst, a)?.weight;
    if weight > opt + 1e-9 * opt.max(1.0) {
        return Err(Error::InconsistentState(format!(
            "online weight {weight} exceeds offline optimum {opt}"
        )));
    }
    Ok(EpisodeResult {
        instance_id: instance_id(inst),
        policy: policy_id.to_string(),
        trial: 0,
        arrivals: a.0.clone(),
        matched,
        matched_weight: weight,
        offline_opt: opt,
    })
}

pub(crate) fn instance_id(inst: &Instance) -> String {
    match (inst.meta.get("family"), inst.meta.get("seed")) {
        (Some(f), Some(s)) => format!("{}-{}", f.as_str().unwrap_or("?"), s),
        _ => "instance".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrOutcome {
    /// Mean ratio over realizations with a positive offline optimum; `None`
    /// when every realization was degenerate.
    pub cr: Option<f64>,
    pub episodes: Vec<EpisodeResult>,
}

pub fn arrival_seed(seed: u64, trial: usize) -> u64 {
    rng::derive(seed, &[tags::ARRIVALS, trial as u64])
}

pub fn policy_seed(seed: u64, policy_id: &str, trial: usize) -> u64 {
    rng::derive(seed, &[tags::POLICY, rng::name_tag(policy_id), trial as u64])
}

/// Run `realizations` episodes. `observed` is what the policy sees; arrivals
/// and scoring always use `truth`.
pub fn run_trials(
    truth: &Instance,
    observed: &Instance,
    policy: &dyn Policy,
    realizations: usize,
    seed: u64,
) -> Result<CrOutcome> {
    if realizations == 0 {
        return Err(Error::InvalidParameter("at least one realization is required".into()));
    }
    let id = policy.id();
    let mut bound = policy.bind(observed)?;
    let mut episodes = Vec::with_capacity(realizations);
    for trial in 0..realizations {
        let a = sample_arrivals_with(truth, &mut rng::rng(arrival_seed(seed, trial)));
        let mut prng = rng::rng(policy_seed(seed, &id, trial));
        let mut ep = simulate_episode(truth, bound.as_mut(), &id, &a, &mut prng)?;
        ep.trial = trial;
        episodes.push(ep);
    }
    let ratios: Vec<f64> = episodes.iter().filter_map(EpisodeResult::ratio).collect();
    let cr = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    Ok(CrOutcome { cr, episodes })
}

pub fn competitive_ratio(inst: &Instance, policy: &dyn Policy, realizations: usize, seed: u64) -> Result<CrOutcome> {
    run_trials(inst, inst, policy, realizations, seed)
}
