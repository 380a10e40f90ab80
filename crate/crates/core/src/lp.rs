//! Dense primal simplex for max c'x, Ax ≤ b, x ≥ 0 with b ≥ 0.
//!
//! Small problems only: the direction-finding step of the feasible
//! directions method has a few dozen rows. Bland's rule keeps degenerate
//! pivots from cycling.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    Unbounded,
    NegativeRhs,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// `a` is row-major with `c.len()` columns.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let n = c.len();
    let m = b.len();
    if b.iter().any(|v| *v < 0.0) {
        return Err(LpError::NegativeRhs);
    }
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&a[i]);
        row[n + i] = 1.0;
        row[width - 1] = b[i];
    }
    let obj = m * width;
    for j in 0..n {
        t[obj + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;

    for _ in 0..50 * (n + m + 10) {
        let Some(enter) = (0..n + m).find(|&j| t[obj + j] < -eps) else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i * width + width - 1];
                }
            }
            return Ok(LpSolution { x, objective: t[obj + width - 1] });
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let p = t[i * width + enter];
            if p > eps {
                let ratio = t[i * width + width - 1] / p;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(LpError::Unbounded);
        };
        let p = t[r * width + enter];
        for j in 0..width {
            t[r * width + j] /= p;
        }
        for i in 0..=m {
            if i == r {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for j in 0..width {
                    t[i * width + j] -= f * t[r * width + j];
                }
            }
        }
        basis[r] = enter;
    }
    Err(LpError::IterationLimit)
}
