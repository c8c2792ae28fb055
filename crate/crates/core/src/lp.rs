//! Dense tableau simplex for small packing LPs: `max cᵀx s.t. Ax ≤ b, x ≥ 0`
//! with `b ≥ 0`, so the slack basis is an immediate feasible start.
//!
//! Entering columns follow Dantzig's most-negative-reduced-cost rule. After
//! `10·(rows + cols)` consecutive degenerate pivots the solver switches to
//! Bland's rule for the rest of the solve, which guarantees termination.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const CLEAN_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Optimal dual prices, one per constraint row.
    pub duals: Vec<f64>,
    pub pivots: usize,
    pub bland_pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome> {
    let rows = a.len();
    let nv = c.len();
    if b.len() != rows {
        return Err(Error::LengthMismatch { expected: rows, got: b.len() });
    }
    if let Some(r) = a.iter().find(|r| r.len() != nv) {
        return Err(Error::LengthMismatch { expected: nv, got: r.len() });
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidParameter("right-hand side must be nonnegative".into()));
    }

    let width = nv + rows + 1;
    let rhs = nv + rows;
    let mut tab: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut row = vec![0.0; width];
            row[..nv].copy_from_slice(&a[i]);
            row[nv + i] = 1.0;
            row[rhs] = b[i];
            row
        })
        .collect();
    let mut z = vec![0.0; width];
    for j in 0..nv {
        z[j] = -c[j];
    }
    let mut basis: Vec<usize> = (nv..nv + rows).collect();

    let degenerate_budget = 10 * (rows + nv);
    let mut degenerate_run = 0;
    let mut bland = false;
    let mut pivots = 0;
    let mut bland_pivots = 0;

    loop {
        let entering = if bland {
            (0..rhs).find(|&j| z[j] < -COST_TOL)
        } else {
            (0..rhs)
                .filter(|&j| z[j] < -COST_TOL)
                .min_by(|&i, &j| z[i].total_cmp(&z[j]).then(i.cmp(&j)))
        };
        let Some(col) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = tab[i][col];
            if coef > PIVOT_TOL {
                let ratio = tab[i][rhs] / coef;
                let better = match leave {
                    None => true,
                    Some((l, best)) => ratio < best || (ratio == best && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(Error::Unbounded);
        };

        pivot(&mut tab, &mut z, row, col);
        basis[row] = col;
        pivots += 1;
        if bland {
            bland_pivots += 1;
        }
        if ratio <= PIVOT_TOL {
            degenerate_run += 1;
            if degenerate_run > degenerate_budget {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }

    let mut x = vec![0.0; nv];
    for (i, &j) in basis.iter().enumerate() {
        if j < nv {
            x[j] = tab[i][rhs];
        }
    }
    Ok(LpOutcome {
        x,
        objective: z[rhs],
        duals: z[nv..nv + rows].to_vec(),
        pivots,
        bland_pivots,
    })
}

fn pivot(tab: &mut [Vec<f64>], z: &mut [f64], row: usize, col: usize) {
    let inv = 1.0 / tab[row][col];
    for v in tab[row].iter_mut() {
        *v *= inv;
    }
    tab[row][col] = 1.0;
    let pivot_row = tab[row].clone();
    let eliminate = |target: &mut [f64]| {
        let factor = target[col];
        if factor != 0.0 {
            for (t, &p) in target.iter_mut().zip(&pivot_row) {
                *t -= factor * p;
                if t.abs() < CLEAN_TOL {
                    *t = 0.0;
                }
            }
            target[col] = 0.0;
        }
    };
    for (i, r) in tab.iter_mut().enumerate() {
        if i != row {
            eliminate(r);
        }
    }
    eliminate(z);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), 36
        let out = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!((out.objective - 36.0).abs() < 1e-12);
        assert!((out.x[0] - 2.0).abs() < 1e-12 && (out.x[1] - 6.0).abs() < 1e-12);
        // Duals of the textbook problem: (0, 3/2, 1).
        assert!((out.duals[1] - 1.5).abs() < 1e-12 && (out.duals[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        assert!(matches!(
            maximize(&[1.0, 1.0], &[vec![1.0, -1.0]], &[1.0]),
            Err(Error::Unbounded)
        ));
    }

    #[test]
    fn zero_objective_stays_at_origin() {
        let out = maximize(&[0.0, -1.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert_eq!(out.objective, 0.0);
        assert_eq!(out.pivots, 0);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example (for textbook Dantzig with lowest-index ties).
        let c = [0.75, -20.0, 0.5, -6.0];
        let a = vec![
            vec![0.25, -8.0, -1.0, 9.0],
            vec![0.5, -12.0, -0.5, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let out = maximize(&c, &a, &[0.0, 0.0, 1.0]).unwrap();
        assert!((out.objective - 1.25).abs() < 1e-12);
    }
}
