//! Symmetric positive definite solvers: dense for trusses, banded for plates.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    /// Keeps only the listed rows and columns, in order.
    pub fn submatrix(&self, keep: &[usize]) -> Dense {
        let mut out = Dense::zeros(keep.len());
        for (r, &i) in keep.iter().enumerate() {
            for (c, &j) in keep.iter().enumerate() {
                out.a[r * keep.len() + c] = self.get(i, j);
            }
        }
        out
    }
}

/// Cholesky solve in place. On a non-positive pivot returns its row index.
pub fn cholesky_solve(mut k: Dense, b: &[f64]) -> Result<Vec<f64>, usize> {
    let n = k.n;
    let scale = (0..n).map(|i| k.get(i, i).abs()).fold(0.0, f64::max);
    let tol = 1e-10 * if scale > 0.0 { scale } else { 1.0 };
    for j in 0..n {
        let mut d = k.get(j, j);
        for p in 0..j {
            d -= k.get(j, p) * k.get(j, p);
        }
        if !(d > tol) {
            return Err(j);
        }
        let d = libm::sqrt(d);
        k.a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = k.get(i, j);
            for p in 0..j {
                s -= k.get(i, p) * k.get(j, p);
            }
            k.a[i * n + j] = s / d;
        }
    }
    Ok(substitute(n, n, b, |i, j| k.get(i, j)))
}

fn substitute(n: usize, bw: usize, b: &[f64], l: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for p in i.saturating_sub(bw)..i {
            s -= l(i, p) * y[p];
        }
        y[i] = s / l(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for p in i + 1..(i + bw + 1).min(n) {
            s -= l(p, i) * y[p];
        }
        y[i] = s / l(i, i);
    }
    y
}

/// Lower band storage: row i keeps columns i-bw..=i.
#[derive(Clone, Debug)]
pub struct Banded {
    pub n: usize,
    pub bw: usize,
    a: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Banded { n, bw, a: vec![0.0; n * (bw + 1)] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (self.bw + j - i)
    }

    /// Adds to the symmetric entry (i, j); either triangle may be named.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.a[self.idx(i, j)]
        }
    }

    /// Factor and solve. On a non-positive pivot returns its row index.
    pub fn solve(mut self, b: &[f64]) -> Result<Vec<f64>, usize> {
        let (n, bw) = (self.n, self.bw);
        let scale = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max);
        let tol = 1e-12 * if scale > 0.0 { scale } else { 1.0 };
        let w = bw + 1;
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let rj = j * w + bw - j;
            let mut d = self.a[rj + j];
            for p in lo..j {
                let v = self.a[rj + p];
                d -= v * v;
            }
            if !(d > tol) {
                return Err(j);
            }
            let d = libm::sqrt(d);
            self.a[rj + j] = d;
            for i in j + 1..(j + bw + 1).min(n) {
                let ri = i * w + bw - i;
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = self.a[ri + j];
                for p in lo_i..j {
                    s -= self.a[ri + p] * self.a[rj + p];
                }
                self.a[ri + j] = s / d;
            }
        }
        let l = |i: usize, j: usize| self.a[i * w + bw - i + j];
        Ok(substitute(n, bw, b, l))
    }
}
