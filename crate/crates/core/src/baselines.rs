//! Classical online baselines: greedy, threshold greedy and LP rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::competitive_ratio;
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorConfig};
use crate::lp;
use crate::model::{Action, Adjacency, Instance, MatchingState};
use crate::policy::{BoundPolicy, Policy};
use crate::rng::{self, tags};

/// Heaviest available neighbor, lowest offline index on ties.
fn best_available(adj: &Adjacency, state: &MatchingState) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(u, w) in adj.neighbors(state.t) {
        if state.available.contains(u) && best.is_none_or(|(_, b)| w > b) {
            best = Some((u, w));
        }
    }
    best
}

pub fn greedy_action(inst: &Instance, state: &MatchingState) -> Action {
    greedy_with(&inst.adjacency(), state)
}

fn greedy_with(adj: &Adjacency, state: &MatchingState) -> Action {
    if !state.arrived {
        return Action::Skip;
    }
    best_available(adj, state).map_or(Action::Skip, |(u, _)| Action::Match(u))
}

/// Greedy, but only when the best available weight reaches `threshold`
/// (inclusive).
pub fn greedy_t_action(inst: &Instance, state: &MatchingState, threshold: f64) -> Action {
    greedy_t_with(&inst.adjacency(), state, threshold)
}

fn greedy_t_with(adj: &Adjacency, state: &MatchingState, threshold: f64) -> Action {
    if !state.arrived {
        return Action::Skip;
    }
    match best_available(adj, state) {
        Some((u, w)) if w >= threshold => Action::Match(u),
        _ => Action::Skip,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl Policy for Greedy {
    fn id(&self) -> String {
        "greedy".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(BoundGreedy { adj: inst.adjacency(), threshold: None }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParam {
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct GreedyThreshold {
    pub threshold: f64,
}

impl Policy for GreedyThreshold {
    fn id(&self) -> String {
        "greedy-t".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        Ok(Box::new(BoundGreedy { adj: inst.adjacency(), threshold: Some(self.threshold) }))
    }
}

struct BoundGreedy {
    adj: Adjacency,
    threshold: Option<f64>,
}

impl BoundPolicy for BoundGreedy {
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        let a = match self.threshold {
            None => greedy_with(&self.adj, state),
            Some(thr) => greedy_t_with(&self.adj, state, thr),
        };
        Ok(vec![(a, 1.0)])
    }
}

/// Threshold grid `0.00, 0.05, …, 0.95`.
pub fn default_threshold_grid() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 0.05).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTuning {
    pub threshold: f64,
    /// `(threshold, mean CR)` for every grid point, in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Pick the grid threshold maximizing greedy-t's mean competitive ratio over
/// `validation` instances. Ties go to the smaller threshold.
pub fn tune_threshold_on(
    validation: &[Instance],
    grid: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<ThresholdTuning> {
    if validation.is_empty() || grid.is_empty() {
        return Err(Error::InvalidParameter("threshold tuning needs a grid and validation instances".into()));
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &thr in grid {
        let policy = GreedyThreshold { threshold: thr };
        let crs: Vec<Option<f64>> = validation
            .par_iter()
            .enumerate()
            .map(|(i, inst)| {
                let s = rng::derive(seed, &[tags::ARRIVALS, i as u64]);
                competitive_ratio(inst, &policy, realizations, s).map(|o| o.cr)
            })
            .collect::<Result<_>>()?;
        let defined: Vec<f64> = crs.into_iter().flatten().collect();
        let mean = if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        };
        scores.push((thr, mean));
    }
    let mut best = scores[0];
    for &(thr, score) in &scores[1..] {
        if score > best.1 || (score == best.1 && thr < best.0) {
            best = (thr, score);
        }
    }
    Ok(ThresholdTuning { threshold: best.0, scores })
}

/// Generate `per_config` validation instances from each config, then tune.
pub fn tune_threshold(
    configs: &[GeneratorConfig],
    per_config: usize,
    grid: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<ThresholdTuning> {
    let mut validation = Vec::with_capacity(configs.len() * per_config);
    for (c, cfg) in configs.iter().enumerate() {
        let gen = Generator::new(cfg)?;
        for i in 0..per_config {
            validation.push(gen.sample(rng::derive(seed, &[tags::INSTANCE, c as u64, i as u64]))?);
        }
    }
    tune_threshold_on(&validation, grid, realizations, seed)
}

/// Optimal solution of the matching LP
/// `max Σ w_tu x_tu  s.t.  Σ_u x_tu ≤ p_t,  Σ_t x_tu ≤ 1,  x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// Fractional mass per edge, in the instance's edge order.
    pub x: Vec<f64>,
    pub objective: f64,
}

const LP_FEAS_TOL: f64 = 1e-8;

impl LpSolution {
    /// Check the packing constraints with the usual slack.
    pub fn check(&self, inst: &Instance) -> Result<()> {
        let mut online = vec![0.0; inst.n_online];
        let mut offline = vec![0.0; inst.n_offline];
        for (e, &x) in inst.edges.iter().zip(&self.x) {
            if x < -1e-10 {
                return Err(Error::InconsistentState(format!("negative LP mass {x}")));
            }
            online[e.online] += x;
            offline[e.offline] += x;
        }
        for (t, (&s, &p)) in online.iter().zip(&inst.arrival_probs).enumerate() {
            if s > p + LP_FEAS_TOL {
                return Err(Error::InconsistentState(format!("LP row {t} sums to {s} > p = {p}")));
            }
        }
        if let Some((u, s)) = offline.iter().enumerate().find(|(_, &s)| s > 1.0 + LP_FEAS_TOL) {
            return Err(Error::InconsistentState(format!("LP column {u} sums to {s} > 1")));
        }
        Ok(())
    }
}

pub fn solve_matching_lp(inst: &Instance) -> Result<LpSolution> {
    let k = inst.edges.len();
    let (m, n) = (inst.n_online, inst.n_offline);
    let mut a = vec![vec![0.0; k]; m + n];
    for (j, e) in inst.edges.iter().enumerate() {
        a[e.online][j] = 1.0;
        a[m + e.offline][j] = 1.0;
    }
    let mut b = inst.arrival_probs.clone();
    b.extend(std::iter::repeat_n(1.0, n));
    let c: Vec<f64> = inst.edges.iter().map(|e| e.weight).collect();
    let out = lp::maximize(&c, &a, &b)?;
    let sol = LpSolution {
        x: out.x.into_iter().map(|v| v.max(0.0)).collect(),
        objective: out.objective,
    };
    sol.check(inst)?;
    Ok(sol)
}

/// Per-online-node rows of an LP solution: `(offline, x_tu)` with `x_tu > 0`.
fn lp_rows(inst: &Instance, lp: &LpSolution) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); inst.n_online];
    for (e, &x) in inst.edges.iter().zip(&lp.x) {
        if x > 0.0 {
            rows[e.online].push((e.offline, x));
        }
    }
    for r in &mut rows {
        r.sort_by_key(|&(u, _)| u);
    }
    rows
}

fn lp_round_distribution(
    row: &[(usize, f64)],
    p: f64,
    state: &MatchingState,
    strict: bool,
) -> Result<Vec<(Action, f64)>> {
    if !state.arrived || (!strict && p <= 0.0) {
        return Ok(vec![(Action::Skip, 1.0)]);
    }
    if p <= 0.0 {
        return Err(Error::InconsistentState(format!(
            "online node {} arrived with p = 0",
            state.t
        )));
    }
    let total: f64 = row.iter().map(|&(_, x)| x / p).sum();
    // Absorb rounding overshoot within the LP's feasibility slack.
    let scale = if total > 1.0 { 1.0 / total } else { 1.0 };
    let mut dist = Vec::with_capacity(row.len() + 1);
    let mut matched = 0.0;
    for &(u, x) in row {
        let q = x / p * scale;
        if state.available.contains(u) && q > 0.0 {
            dist.push((Action::Match(u), q));
            matched += q;
        }
    }
    let skip = 1.0 - matched;
    if skip > 0.0 {
        dist.push((Action::Skip, skip));
    }
    Ok(dist)
}

/// Propose offline node `u` with probability `x_tu / p_t`; skip with the
/// remaining mass or when the proposal is already taken.
pub fn lp_round_action(
    inst: &Instance,
    lp: &LpSolution,
    state: &MatchingState,
    rng: &mut rng::Rng,
) -> Result<Action> {
    let rows = lp_rows(inst, lp);
    let dist = lp_round_distribution(&rows[state.t], inst.arrival_probs[state.t], state, true)?;
    Ok(crate::policy::sample_action(&dist, rng))
}

/// LP-rounding policy. A non-strict instance skips an arrival whose (observed)
/// probability is zero instead of reporting it, which noisy inputs need.
#[derive(Clone, Copy, Debug)]
pub struct LpRound {
    pub strict: bool,
}

impl Default for LpRound {
    fn default() -> Self {
        LpRound { strict: true }
    }
}

impl Policy for LpRound {
    fn id(&self) -> String {
        "lp-round".into()
    }

    fn bind<'a>(&'a self, inst: &'a Instance) -> Result<Box<dyn BoundPolicy + 'a>> {
        let lp = solve_matching_lp(inst)?;
        Ok(Box::new(BoundLpRound { rows: lp_rows(inst, &lp), probs: &inst.arrival_probs, strict: self.strict }))
    }
}

struct BoundLpRound<'a> {
    rows: Vec<Vec<(usize, f64)>>,
    probs: &'a [f64],
    strict: bool,
}

impl BoundPolicy for BoundLpRound<'_> {
    fn distribution(&mut self, state: &MatchingState) -> Result<Vec<(Action, f64)>> {
        lp_round_distribution(&self.rows[state.t], self.probs[state.t], state, self.strict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, OfflineSet};

    fn star() -> Instance {
        Instance::new(
            6,
            1,
            vec![Edge::new(0, 2, 0.5), Edge::new(0, 5, 0.5), Edge::new(0, 1, 0.3), Edge::new(0, 3, 0.7)],
            vec![1.0],
        )
    }

    fn state(avail: &[usize], n: usize, t: usize) -> MatchingState {
        let mut s = OfflineSet::empty(n);
        for &u in avail {
            s.insert(u);
        }
        MatchingState::arriving(s, t)
    }

    #[test]
    fn greedy_takes_heaviest_then_lowest_index() {
        let inst = star();
        assert_eq!(greedy_action(&inst, &state(&[1, 3], 6, 0)), Action::Match(3));
        assert_eq!(greedy_action(&inst, &state(&[2, 5], 6, 0)), Action::Match(2));
        assert_eq!(greedy_action(&inst, &state(&[0, 4], 6, 0)), Action::Skip);
    }

    #[test]
    fn greedy_t_boundaries() {
        let inst = star();
        assert_eq!(greedy_t_action(&inst, &state(&[1], 6, 0), 0.5), Action::Skip);
        assert_eq!(greedy_t_action(&inst, &state(&[2], 6, 0), 0.5), Action::Match(2));
        for avail in [&[1usize][..], &[2, 5], &[1, 3], &[]] {
            let s = state(avail, 6, 0);
            assert_eq!(greedy_t_action(&inst, &s, 0.0), greedy_action(&inst, &s));
        }
    }

    #[test]
    fn lp_single_edge() {
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![1.0]);
        let sol = solve_matching_lp(&inst).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.objective - 1.0).abs() < 1e-12);
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 0.8)], vec![0.3]);
        let sol = solve_matching_lp(&inst).unwrap();
        assert!((sol.x[0] - 0.3).abs() < 1e-12);
        assert!((sol.objective - 0.24).abs() < 1e-12);
    }

    #[test]
    fn lp_round_full_mass_always_proposes() {
        let inst = Instance::new(2, 1, vec![Edge::new(0, 1, 1.0)], vec![0.4]);
        let sol = solve_matching_lp(&inst).unwrap();
        let mut rng = rng::rng(0);
        for _ in 0..20 {
            let a = lp_round_action(&inst, &sol, &state(&[0, 1], 2, 0), &mut rng).unwrap();
            assert_eq!(a, Action::Match(1));
        }
        let empty = LpSolution { x: vec![0.0], objective: 0.0 };
        let a = lp_round_action(&inst, &empty, &state(&[0, 1], 2, 0), &mut rng).unwrap();
        assert_eq!(a, Action::Skip);
    }

    #[test]
    fn lp_round_rejects_impossible_arrival() {
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 1.0)], vec![0.0]);
        let sol = LpSolution { x: vec![0.0], objective: 0.0 };
        let mut rng = rng::rng(0);
        assert!(lp_round_action(&inst, &sol, &state(&[0], 1, 0), &mut rng).is_err());
    }

    #[test]
    fn lp_round_waits_on_two_step() {
        let inst = Instance::new(1, 2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 2.0)], vec![1.0, 1.0]);
        let sol = solve_matching_lp(&inst).unwrap();
        assert_eq!(sol.x, vec![0.0, 1.0]);
        let v = crate::dp::policy_expected_value(&inst, &LpRound::default()).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn tuning_degenerate_grid() {
        let inst = crate::generators::gen_er(4, 3, 0.7, 1);
        let out = tune_threshold_on(&[inst], &[0.0], 2, 5).unwrap();
        assert_eq!(out.threshold, 0.0);
        assert!(tune_threshold_on(&[], &[0.0], 2, 5).is_err());
    }
}
