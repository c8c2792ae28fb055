//! Message-passing network over a [`FeatureGraph`] with hand-written
//! reverse-mode gradients.
//!
//! ```text
//! h⁰_v   = W_in x_v + b_in
//! m_vu   = ReLU(h_u + w_vu · e_k)
//! h^k+1_v = MLP_k(h^k_v + max_u m_vu)      (empty max = 0)
//! y_v    = r · h^L_v + c
//! ```
//!
//! Parameters live in one flat vector; [`Layout`] gives the offsets.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::features::{FeatureGraph, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::rng::{self, tags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub mp_layers: usize,
    /// Linear layers per update MLP (ReLU between them, none after the last).
    pub mlp_layers: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { hidden: 32, mp_layers: 2, mlp_layers: 2 }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.mlp_layers == 0 {
            return Err(Error::InvalidConfig("hidden size and MLP depth must be positive".into()));
        }
        Ok(())
    }
}

/// Offsets of each parameter block in the flat vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub hidden: usize,
    pub in_w: usize,
    pub in_b: usize,
    /// Per message-passing layer: edge vector offset and `(W, b)` per MLP layer.
    pub layers: Vec<(usize, Vec<(usize, usize)>)>,
    pub out_w: usize,
    pub out_b: usize,
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &ModelConfig) -> Self {
        let h = cfg.hidden;
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let in_w = take(h * FEATURE_DIM);
        let in_b = take(h);
        let layers = (0..cfg.mp_layers)
            .map(|_| {
                let e = take(h);
                let mlp = (0..cfg.mlp_layers).map(|_| (take(h * h), take(h))).collect();
                (e, mlp)
            })
            .collect();
        let out_w = take(h);
        let out_b = take(1);
        Layout { hidden: h, in_w, in_b, layers, out_w, out_b, total: at }
    }

    /// `(name, offset, rows, cols)` for every block, in storage order.
    pub fn blocks(&self) -> Vec<(String, usize, usize, usize)> {
        let h = self.hidden;
        let mut out = vec![
            ("input.weight".to_string(), self.in_w, h, FEATURE_DIM),
            ("input.bias".to_string(), self.in_b, h, 1),
        ];
        for (k, (e, mlp)) in self.layers.iter().enumerate() {
            out.push((format!("mp{k}.edge"), *e, h, 1));
            for (j, &(w, b)) in mlp.iter().enumerate() {
                out.push((format!("mp{k}.mlp{j}.weight"), w, h, h));
                out.push((format!("mp{k}.mlp{j}.bias"), b, h, 1));
            }
        }
        out.push(("readout.weight".to_string(), self.out_w, 1, h));
        out.push(("readout.bias".to_string(), self.out_b, 1, 1));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Vec<f64>,
    layout: Layout,
}

/// `y = W x + b` for a row-major `rows × cols` matrix.
fn affine(p: &[f64], w: usize, b: usize, rows: usize, cols: usize, x: &[f64], y: &mut [f64]) {
    for r in 0..rows {
        let row = &p[w + r * cols..w + (r + 1) * cols];
        y[r] = p[b + r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

struct LayerCache {
    /// `h_u + w·e` per (node, neighbor slot), flattened per node.
    agg: Vec<Vec<f64>>,
    /// Winning neighbor slot per node and dimension, if any.
    arg: Vec<Vec<Option<usize>>>,
    /// MLP activations: `acts[j]` is the input to linear layer `j`.
    acts: Vec<Vec<Vec<f64>>>,
    /// Pre-activations of each linear layer.
    pres: Vec<Vec<Vec<f64>>>,
}

pub struct ForwardCache {
    neighbors: Vec<Vec<(usize, f64)>>,
    hs: Vec<Vec<Vec<f64>>>,
    layers: Vec<LayerCache>,
    pub output: Vec<f64>,
}

impl Model {
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        Ok(Model { params: vec![0.0; layout.total], config, layout })
    }

    /// Glorot-uniform weights, zero biases, unit-scale edge vectors.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = rng::stream(seed, &[tags::INIT]);
        for (name, off, rows, cols) in model.layout.blocks() {
            let scale = if name.ends_with(".weight") {
                (6.0 / (rows + cols) as f64).sqrt()
            } else if name.ends_with(".edge") {
                1.0
            } else {
                0.0
            };
            for v in &mut model.params[off..off + rows * cols] {
                *v = if scale > 0.0 { rng.random_range(-scale..scale) } else { 0.0 };
            }
        }
        Ok(model)
    }

    pub fn from_params(config: ModelConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                layout.total,
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("non-finite model parameter".into()));
        }
        Ok(Model { config, params, layout })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, fg: &FeatureGraph) -> Result<Vec<f64>> {
        Ok(self.forward_cached(fg)?.output)
    }

    pub fn forward_cached(&self, fg: &FeatureGraph) -> Result<ForwardCache> {
        let n = fg.len();
        if fg.edges.iter().any(|&(a, b, _)| a >= n || b >= n) {
            return Err(Error::ShapeMismatch("edge endpoint outside the node set".into()));
        }
        let h = self.config.hidden;
        let p = &self.params;
        let ly = &self.layout;
        let neighbors = fg.neighbors();

        let mut cur: Vec<Vec<f64>> = fg
            .features
            .iter()
            .map(|x| {
                let mut y = vec![0.0; h];
                affine(p, ly.in_w, ly.in_b, h, FEATURE_DIM, x, &mut y);
                y
            })
            .collect();
        let mut hs = vec![cur.clone()];
        let mut layers = Vec::with_capacity(ly.layers.len());

        for (e, mlp) in &ly.layers {
            let edge = &p[*e..*e + h];
            let mut agg = Vec::with_capacity(n);
            let mut arg = Vec::with_capacity(n);
            let mut z = Vec::with_capacity(n);
            for v in 0..n {
                let mut best = vec![0.0; h];
                let mut who: Vec<Option<usize>> = vec![None; h];
                let mut pre_all = Vec::with_capacity(neighbors[v].len() * h);
                for (slot, &(u, w)) in neighbors[v].iter().enumerate() {
                    for d in 0..h {
                        let pre = cur[u][d] + w * edge[d];
                        pre_all.push(pre);
                        let msg = pre.max(0.0);
                        if who[d].is_none() || msg > best[d] {
                            best[d] = msg;
                            who[d] = Some(slot);
                        }
                    }
                }
                z.push(cur[v].iter().zip(&best).map(|(a, b)| a + b).collect::<Vec<f64>>());
                agg.push(pre_all);
                arg.push(who);
            }
            let mut acts = Vec::with_capacity(mlp.len());
            let mut pres = Vec::with_capacity(mlp.len());
            let mut a = z;
            for (j, &(w, b)) in mlp.iter().enumerate() {
                let pre: Vec<Vec<f64>> = a
                    .iter()
                    .map(|x| {
                        let mut y = vec![0.0; h];
                        affine(p, w, b, h, h, x, &mut y);
                        y
                    })
                    .collect();
                let next = if j + 1 < mlp.len() {
                    pre.iter().map(|r| r.iter().map(|v| v.max(0.0)).collect()).collect()
                } else {
                    pre.clone()
                };
                acts.push(std::mem::replace(&mut a, next));
                pres.push(pre);
            }
            cur = a;
            hs.push(cur.clone());
            layers.push(LayerCache { agg, arg, acts, pres });
        }

        let rw = &p[ly.out_w..ly.out_w + h];
        let output = cur
            .iter()
            .map(|x| p[ly.out_b] + rw.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        Ok(ForwardCache { neighbors, hs, layers, output })
    }

    /// Accumulate `∂L/∂θ` into `grad` given `∂L/∂y` per node. ReLU and max
    /// use subgradient 0 at kinks; max ties went to the lowest node position.
    pub fn backward(&self, fg: &FeatureGraph, cache: &ForwardCache, dy: &[f64], grad: &mut [f64]) {
        let h = self.config.hidden;
        let p = &self.params;
        let ly = &self.layout;
        let n = fg.len();

        let last = cache.hs.last().unwrap();
        let mut dh = vec![vec![0.0; h]; n];
        for v in 0..n {
            if dy[v] == 0.0 {
                continue;
            }
            grad[ly.out_b] += dy[v];
            for d in 0..h {
                grad[ly.out_w + d] += dy[v] * last[v][d];
                dh[v][d] = dy[v] * p[ly.out_w + d];
            }
        }

        for (k, (e, mlp)) in ly.layers.iter().enumerate().rev() {
            let lc = &cache.layers[k];
            let mut da = dh;
            for (j, &(w, b)) in mlp.iter().enumerate().rev() {
                let relu = j + 1 < mlp.len();
                let mut prev = vec![vec![0.0; h]; n];
                for v in 0..n {
                    let input = &lc.acts[j][v];
                    for r in 0..h {
                        let mut g = da[v][r];
                        if relu && !(lc.pres[j][v][r] > 0.0) {
                            g = 0.0;
                        }
                        if g == 0.0 {
                            continue;
                        }
                        grad[b + r] += g;
                        let row = w + r * h;
                        for c in 0..h {
                            grad[row + c] += g * input[c];
                            prev[v][c] += g * p[row + c];
                        }
                    }
                }
                da = prev;
            }
            // da is now ∂L/∂z with z = h + agg.
            let mut dnext = da.clone();
            for v in 0..n {
                for d in 0..h {
                    let g = da[v][d];
                    if g == 0.0 {
                        continue;
                    }
                    if let Some(slot) = lc.arg[v][d] {
                        if lc.agg[v][slot * h + d] > 0.0 {
                            let (u, wt) = cache.neighbors[v][slot];
                            dnext[u][d] += g;
                            grad[e + d] += g * wt;
                        }
                    }
                }
            }
            dh = dnext;
        }

        for v in 0..n {
            let x = &fg.features[v];
            for r in 0..h {
                let g = dh[v][r];
                if g == 0.0 {
                    continue;
                }
                grad[ly.in_b + r] += g;
                for c in 0..FEATURE_DIM {
                    grad[ly.in_w + r * FEATURE_DIM + c] += g * x[c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MatchingState, OfflineSet};
    use crate::neural::features::encode_state;

    fn graph() -> FeatureGraph {
        let inst = crate::generators::gen_er(5, 3, 0.6, 4);
        encode_state(&inst, &MatchingState::arriving(OfflineSet::full(3), 1)).unwrap()
    }

    #[test]
    fn zero_model_outputs_readout_bias() {
        let mut m = Model::zeros(ModelConfig::default()).unwrap();
        let ob = m.layout().out_b;
        m.params[ob] = 0.75;
        assert!(m.forward(&graph()).unwrap().iter().all(|&y| y == 0.75));
    }

    #[test]
    fn isolated_node_sees_only_itself() {
        let fg = FeatureGraph {
            features: vec![[1.0, 0.0, 0.0, 1.0, 0.0, 1.0]],
            edges: vec![],
            nodes: vec![super::super::features::NodeRef::Skip],
            skip: 0,
            current: 0,
        };
        let m = Model::init(ModelConfig { hidden: 4, mp_layers: 1, mlp_layers: 1 }, 3).unwrap();
        // Manual: h0 = W_in x + b; h1 = W h0 + b; y = r·h1 + c.
        let p = &m.params;
        let ly = m.layout();
        let mut h0 = vec![0.0; 4];
        affine(p, ly.in_w, ly.in_b, 4, FEATURE_DIM, &fg.features[0], &mut h0);
        let (w, b) = ly.layers[0].1[0];
        let mut h1 = vec![0.0; 4];
        affine(p, w, b, 4, 4, &h0, &mut h1);
        let y = p[ly.out_b] + (0..4).map(|d| p[ly.out_w + d] * h1[d]).sum::<f64>();
        assert_eq!(m.forward(&fg).unwrap(), vec![y]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Model::from_params(ModelConfig::default(), vec![0.0; 3]).is_err());
        let mut fg = graph();
        fg.edges.push((0, 999, 1.0));
        assert!(Model::zeros(ModelConfig::default()).unwrap().forward(&fg).is_err());
    }
}
