#![allow(dead_code)]

use obbm::generators::{gen_ba, gen_er, gen_geom};
use obbm::model::{Edge, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Arbitrary small instance: each pair is an edge with probability `density`.
pub fn random_instance(seed: u64, m: usize, n: usize, density: f64) -> Instance {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for t in 0..m {
        for u in 0..n {
            if r.random::<f64>() < density {
                edges.push(Edge::new(t, u, r.random()));
            }
        }
    }
    let probs = (0..m).map(|_| r.random()).collect();
    Instance::new(n, m, edges, probs)
}

/// Rotate through the synthetic families (and a hand-rolled random one).
pub fn family_instance(i: usize, m: usize, n: usize, seed: u64) -> Instance {
    match i % 4 {
        0 => gen_er(m, n, 0.5, seed),
        1 => gen_ba(m, n, 2.min(n), seed).unwrap(),
        2 => gen_geom(m, n, 0.4, seed).unwrap(),
        _ => random_instance(seed, m, n, 0.6),
    }
}

/// Maximum matching weight by trying every assignment of online nodes.
pub fn exhaustive_matching(n_offline: usize, n_online: usize, w: &dyn Fn(usize, usize) -> Option<f64>) -> f64 {
    fn go(t: usize, used: &mut Vec<bool>, m: usize, w: &dyn Fn(usize, usize) -> Option<f64>) -> f64 {
        if t == m {
            return 0.0;
        }
        let mut best = go(t + 1, used, m, w);
        for u in 0..used.len() {
            if !used[u] {
                if let Some(x) = w(t, u) {
                    used[u] = true;
                    best = best.max(x + go(t + 1, used, m, w));
                    used[u] = false;
                }
            }
        }
        best
    }
    go(0, &mut vec![false; n_offline], n_online, w)
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
