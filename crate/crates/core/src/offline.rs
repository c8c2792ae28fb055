//! Offline optimum: maximum-weight matching on the realized arrival graph.

use crate::error::{Error, Result};
use crate::model::{ArrivalSequence, Edge, Instance};

/// The subgraph induced by the offline nodes and the online nodes that
/// actually arrived. Edges keep their original online indices.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedGraph {
    pub n_offline: usize,
    pub online: Vec<usize>,
    pub edges: Vec<Edge>,
}

pub fn realize(inst: &Instance, a: &ArrivalSequence) -> Result<RealizedGraph> {
    if a.len() != inst.n_online {
        return Err(Error::LengthMismatch { expected: inst.n_online, got: a.len() });
    }
    Ok(RealizedGraph {
        n_offline: inst.n_offline,
        online: (0..inst.n_online).filter(|&t| a.arrived(t)).collect(),
        edges: inst.edges.iter().copied().filter(|e| a.arrived(e.online)).collect(),
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Matching {
    pub edges: Vec<Edge>,
    pub weight: f64,
}

/// Maximum-weight (not necessarily maximum-cardinality) matching.
///
/// Only nodes with at least one edge take part. The compressed problem is
/// padded to a square matrix where non-edges cost nothing, so every matching
/// of the graph extends to a perfect assignment of equal weight.
pub fn max_weight_matching(g: &RealizedGraph) -> Matching {
    let mut rows: Vec<usize> = g.edges.iter().map(|e| e.online).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<usize> = g.edges.iter().map(|e| e.offline).collect();
    cols.sort_unstable();
    cols.dedup();
    if rows.is_empty() {
        return Matching::default();
    }
    let k = rows.len().max(cols.len());
    let mut weight = vec![vec![0.0; k]; k];
    let mut is_edge = vec![vec![false; k]; k];
    for e in &g.edges {
        let r = rows.binary_search(&e.online).unwrap();
        let c = cols.binary_search(&e.offline).unwrap();
        weight[r][c] = e.weight;
        is_edge[r][c] = true;
    }
    let assignment = hungarian_max(&weight);
    let mut out = Matching::default();
    for (r, &c) in assignment.iter().enumerate() {
        if r < rows.len() && c < cols.len() && is_edge[r][c] {
            let w = weight[r][c];
            out.edges.push(Edge::new(rows[r], cols[c], w));
            out.weight += w;
        }
    }
    out
}

/// Solve the square assignment problem maximizing total weight. Returns the
/// column assigned to each row.
///
/// Shortest augmenting paths with row/column potentials, `O(k³)`.
pub fn hungarian_max(weight: &[Vec<f64>]) -> Vec<usize> {
    let k = weight.len();
    // 1-based internally; index 0 is the virtual root column.
    let cost = |i: usize, j: usize| -weight[i - 1][j - 1];
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut p = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; k];
    for j in 1..=k {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// `OPT(G, a)`: weight of the offline optimum on the realized graph.
pub fn offline_optimum(inst: &Instance, a: &ArrivalSequence) -> Result<Matching> {
    Ok(max_weight_matching(&realize(inst, a)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst3() -> Instance {
        Instance::new(
            2,
            3,
            vec![Edge::new(0, 0, 0.5), Edge::new(1, 1, 0.4), Edge::new(2, 0, 0.9)],
            vec![0.5; 3],
        )
    }

    #[test]
    fn realize_keeps_arrived_nodes() {
        let inst = inst3();
        let none = realize(&inst, &ArrivalSequence(vec![false; 3])).unwrap();
        assert!(none.online.is_empty() && none.edges.is_empty());
        let all = realize(&inst, &ArrivalSequence(vec![true; 3])).unwrap();
        assert_eq!(all.edges, inst.edges);
        let some = realize(&inst, &ArrivalSequence(vec![true, false, true])).unwrap();
        assert_eq!(some.online, vec![0, 2]);
        assert_eq!(some.edges.len(), 2);
    }

    #[test]
    fn realize_checks_length() {
        assert!(realize(&inst3(), &ArrivalSequence(vec![true])).is_err());
    }

    #[test]
    fn empty_and_single_edge() {
        let empty = RealizedGraph { n_offline: 3, online: vec![], edges: vec![] };
        assert_eq!(max_weight_matching(&empty), Matching::default());
        let one = RealizedGraph { n_offline: 1, online: vec![0], edges: vec![Edge::new(0, 0, 0.7)] };
        assert_eq!(max_weight_matching(&one).weight, 0.7);
    }

    #[test]
    fn prefers_weight_over_cardinality() {
        // Path a-x (1), b-x (3), b-y (1): best is {b-x} = 3, not {a-x, b-y} = 2.
        let g = RealizedGraph {
            n_offline: 2,
            online: vec![0, 1],
            edges: vec![Edge::new(0, 0, 1.0), Edge::new(1, 0, 3.0), Edge::new(1, 1, 1.0)],
        };
        let m = max_weight_matching(&g);
        assert_eq!(m.weight, 3.0);
        assert_eq!(m.edges, vec![Edge::new(1, 0, 3.0)]);
    }
}
