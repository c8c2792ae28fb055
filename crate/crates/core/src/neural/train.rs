//! Teacher-forced training data and minibatch Adam on a masked MSE.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{encode_with, FeatureGraph, NodeRef};
use super::network::Model;
use crate::dp::VtgTable;
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorConfig};
use crate::model::{sample_arrivals_with, Action, ArrivalSequence, Instance, MatchingState};
use crate::rng::{self, tags};

/// One arrival state with exact targets: the skip node is trained towards
/// `V(S, t+1)` and each available neighbor `u` towards `w_tu + V(S\u, t+1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub graph: FeatureGraph,
    /// `(node position, target)`; the skip node is always present.
    pub targets: Vec<(usize, f64)>,
}

/// Walk one episode following OPT_on on `truth` and record every arrival.
/// Features come from `observed` (same graph structure, possibly perturbed
/// weights and probabilities); targets always come from `truth`.
pub fn teacher_forced_samples(
    truth: &Instance,
    observed: &Instance,
    a: &ArrivalSequence,
) -> Result<Vec<TrainingSample>> {
    if truth.n_online != observed.n_online || truth.n_offline != observed.n_offline {
        return Err(Error::ShapeMismatch("observed instance differs in size".into()));
    }
    let mut table = VtgTable::new(truth)?;
    let adj = observed.adjacency();
    let mut state = MatchingState::initial(truth);
    let mut mask = table.full_mask();
    let mut out = Vec::new();
    for t in 0..truth.n_online {
        if !a.arrived(t) {
            continue;
        }
        state.t = t;
        state.arrived = true;
        let graph = encode_with(observed, &adj, &state)?;
        let (skip, matches) = table.action_values(mask, t);
        let mut targets = vec![(graph.skip, skip)];
        for (u, v) in matches {
            let pos = graph.position(NodeRef::Offline(u)).expect("available node is encoded");
            targets.push((pos, v));
        }
        out.push(TrainingSample { graph, targets });
        if let Action::Match(u) = table.action(mask, t) {
            mask &= !(1u64 << u);
            state.available.remove(u);
        }
    }
    Ok(out)
}

pub fn samples_for_instance(inst: &Instance, a: &ArrivalSequence) -> Result<Vec<TrainingSample>> {
    teacher_forced_samples(inst, inst, a)
}

/// `count` instances drawn round-robin from `configs`, one arrival
/// realization each.
pub fn generate_training_set(configs: &[GeneratorConfig], count: usize, seed: u64) -> Result<Vec<TrainingSample>> {
    generate_training_set_with(configs, count, seed, |inst, _| Ok(inst.clone()))
}

/// Like [`generate_training_set`], but features are computed on
/// `observe(instance, i)`.
pub fn generate_training_set_with<F>(
    configs: &[GeneratorConfig],
    count: usize,
    seed: u64,
    observe: F,
) -> Result<Vec<TrainingSample>>
where
    F: Fn(&Instance, usize) -> Result<Instance> + Sync,
{
    if configs.is_empty() {
        return Err(Error::InvalidParameter("no training configurations".into()));
    }
    let gens: Vec<Generator> = configs.iter().map(Generator::new).collect::<Result<_>>()?;
    let per: Vec<Vec<TrainingSample>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let inst = gens[i % gens.len()].sample(rng::derive(seed, &[tags::INSTANCE, i as u64]))?;
            let a = sample_arrivals_with(&inst, &mut rng::stream(seed, &[tags::ARRIVALS, i as u64]));
            teacher_forced_samples(&inst, &observe(&inst, i)?, &a)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Sum of squared errors, number of masked entries, and the gradient of the
/// sum. Divide by the count for the mean.
fn sse_and_grad(model: &Model, samples: &[&TrainingSample], grad: &mut [f64]) -> Result<(f64, usize)> {
    let mut sse = 0.0;
    let mut count = 0;
    for s in samples {
        let cache = model.forward_cached(&s.graph)?;
        let mut dy = vec![0.0; s.graph.len()];
        for &(v, target) in &s.targets {
            let r = cache.output[v] - target;
            sse += r * r;
            dy[v] += 2.0 * r;
            count += 1;
        }
        model.backward(&s.graph, &cache, &dy, grad);
    }
    Ok((sse, count))
}

fn sse(model: &Model, samples: &[TrainingSample]) -> Result<(f64, usize)> {
    let mut sse = 0.0;
    let mut count = 0;
    for s in samples {
        let y = model.forward(&s.graph)?;
        for &(v, target) in &s.targets {
            sse += (y[v] - target).powi(2);
            count += 1;
        }
    }
    Ok((sse, count))
}

/// Fixed chunk size for parallel reductions, so results never depend on the
/// number of worker threads.
const CHUNK: usize = 4;

/// Mean squared error over all masked entries of `batch` and its gradient.
pub fn loss_and_grad(model: &Model, batch: &[TrainingSample]) -> Result<(f64, Vec<f64>)> {
    loss_and_grad_refs(model, &batch.iter().collect::<Vec<_>>())
}

fn loss_and_grad_refs(model: &Model, batch: &[&TrainingSample]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::InvalidParameter("empty batch".into()));
    }
    let parts: Vec<(f64, usize, Vec<f64>)> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; model.num_params()];
            let (s, c) = sse_and_grad(model, chunk, &mut g)?;
            Ok((s, c, g))
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; model.num_params()];
    let mut total = 0.0;
    let mut count = 0;
    for (s, c, g) in parts {
        total += s;
        count += c;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let inv = 1.0 / count.max(1) as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    Ok((total * inv, grad))
}

pub fn loss(model: &Model, samples: &[TrainingSample]) -> Result<f64> {
    let parts: Vec<(f64, usize)> = samples.par_chunks(CHUNK).map(|c| sse(model, c)).collect::<Result<_>>()?;
    let (s, c) = parts.iter().fold((0.0, 0), |(s, c), &(a, b)| (s + a, c + b));
    Ok(s / c.max(1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 64, batch_size: 32, learning_rate: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: Model,
    /// Mean minibatch loss per epoch.
    pub curve: Vec<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Minibatch Adam. The sample order is reshuffled every epoch from `seed`.
pub fn train(mut model: Model, samples: &[TrainingSample], cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no training samples".into()));
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be positive".into()));
    }
    let initial_loss = loss(&model, samples)?;
    let np = model.num_params();
    let mut m1 = vec![0.0; np];
    let mut m2 = vec![0.0; np];
    let mut step = 0i32;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng::stream(seed, &[tags::SHUFFLE, epoch as u64]));
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for idx in order.chunks(cfg.batch_size) {
            let batch: Vec<&TrainingSample> = idx.iter().map(|&i| &samples[i]).collect();
            let (l, grad) = loss_and_grad_refs(&model, &batch)?;
            if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, loss: l });
            }
            step += 1;
            let c1 = 1.0 - BETA1.powi(step);
            let c2 = 1.0 - BETA2.powi(step);
            for i in 0..np {
                m1[i] = BETA1 * m1[i] + (1.0 - BETA1) * grad[i];
                m2[i] = BETA2 * m2[i] + (1.0 - BETA2) * grad[i] * grad[i];
                model.params[i] -= cfg.learning_rate * (m1[i] / c1) / ((m2[i] / c2).sqrt() + ADAM_EPS);
            }
            epoch_loss += l;
            batches += 1;
        }
        curve.push(epoch_loss / batches as f64);
    }
    let final_loss = loss(&model, samples)?;
    if !final_loss.is_finite() {
        return Err(Error::Divergence { epoch: cfg.epochs, loss: final_loss });
    }
    Ok(TrainOutcome { model, curve, initial_loss, final_loss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Instance};
    use crate::neural::network::ModelConfig;

    #[test]
    fn impossible_arrivals_give_no_samples() {
        let mut inst = crate::generators::gen_er(4, 3, 0.8, 1);
        inst.arrival_probs = vec![0.0; 4];
        let a = crate::model::sample_arrivals(&inst, 3);
        assert!(samples_for_instance(&inst, &a).unwrap().is_empty());
    }

    #[test]
    fn single_arrival_single_sample() {
        let inst = Instance::new(2, 1, vec![Edge::new(0, 1, 0.6)], vec![1.0]);
        let s = samples_for_instance(&inst, &ArrivalSequence(vec![true])).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].targets[0], (s[0].graph.skip, 0.0));
        assert_eq!(s[0].targets[1].1, 0.6);
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let inst = crate::generators::gen_er(5, 3, 0.7, 2);
        let s = samples_for_instance(&inst, &ArrivalSequence(vec![true; 5])).unwrap();
        let m = Model::init(ModelConfig { hidden: 4, mp_layers: 1, mlp_layers: 2 }, 1).unwrap();
        let cfg = TrainConfig { epochs: 1, batch_size: 2, learning_rate: 0.0 };
        let out = train(m.clone(), &s, &cfg, 0).unwrap();
        assert_eq!(out.model.params, m.params);
    }

    #[test]
    fn exact_predictions_have_zero_loss() {
        let inst = Instance::new(1, 1, vec![Edge::new(0, 0, 0.5)], vec![1.0]);
        let s = samples_for_instance(&inst, &ArrivalSequence(vec![true])).unwrap();
        // A zero model predicts 0 everywhere; make every target 0.
        let mut s0 = s.clone();
        s0[0].targets.iter_mut().for_each(|t| t.1 = 0.0);
        let m = Model::zeros(ModelConfig::default()).unwrap();
        let (l, g) = loss_and_grad(&m, &s0).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
        // One masked entry: the loss is its squared error.
        s0[0].targets.truncate(1);
        s0[0].targets[0].1 = 0.3;
        assert!((loss_and_grad(&m, &s0).unwrap().0 - 0.09).abs() < 1e-15);
    }
}
