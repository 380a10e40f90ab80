//! SIMP compliance minimization with a mesh-independency filter on the
//! sensitivities and optimality-criteria updates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::plate::{element_energies, solve_scaled, Ke, PlateProblem};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopOptParams {
    pub volfrac: f64,
    pub penal: f64,
    /// Filter radius in element widths.
    pub rmin: f64,
    pub move_limit: f64,
    pub max_iters: usize,
    /// Stop once the largest density change is at most this.
    pub tol: f64,
    pub xmin: f64,
}

impl Default for TopOptParams {
    fn default() -> Self {
        TopOptParams { volfrac: 0.5, penal: 3.0, rmin: 1.5, move_limit: 0.2, max_iters: 200, tol: 0.01, xmin: 0.001 }
    }
}

impl TopOptParams {
    pub fn with_volfrac(volfrac: f64) -> Self {
        TopOptParams { volfrac, ..Default::default() }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.volfrac > 0.0 && self.volfrac <= 1.0) {
            return bad("volfrac must lie in (0, 1]");
        }
        if !(self.penal >= 1.0) {
            return bad("penal must be at least 1");
        }
        if !(self.rmin >= 1.0) {
            return bad("rmin must be at least 1");
        }
        if !(self.move_limit > 0.0 && self.move_limit < 1.0) {
            return bad("move must lie in (0, 1)");
        }
        if !(self.xmin > 0.0 && self.xmin < self.volfrac.min(1.0)) {
            return bad("xmin must lie in (0, volfrac)");
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return bad("tol and max_iters must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterRecord {
    /// Compliance of the design analysed in this iteration.
    pub compliance: f64,
    /// Mean density after the update.
    pub volume: f64,
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityField {
    pub nelx: usize,
    pub nely: usize,
    /// Column-major, e = nely·ex + ey, ey = 0 on the top row.
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Compliance of the returned field.
    pub compliance: f64,
    pub converged: bool,
    pub history: Vec<IterRecord>,
}

impl DensityField {
    #[inline]
    pub fn get(&self, ex: usize, ey: usize) -> f64 {
        self.x[self.nely * ex + ey]
    }

    pub fn mean(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.x.len() as f64
    }

    /// Mean |x(ex, ey) − x(nelx−1−ex, ey)|.
    pub fn mirror_asymmetry(&self) -> f64 {
        self.mirror_difference(self)
    }

    /// Mean |x(ex, ey) − other(nelx−1−ex, ey)|.
    pub fn mirror_difference(&self, other: &DensityField) -> f64 {
        assert_eq!((self.nelx, self.nely), (other.nelx, other.nely));
        let mut s = 0.0;
        for ex in 0..self.nelx {
            for ey in 0..self.nely {
                s += (self.get(ex, ey) - other.get(self.nelx - 1 - ex, ey)).abs();
            }
        }
        s / self.x.len() as f64
    }
}

/// Compliance f'u and its derivative for each element density.
pub fn compliance_and_sensitivity(problem: &PlateProblem, ke: &Ke, x: &[f64], penal: f64) -> Result<(f64, Vec<f64>)> {
    let scale: Vec<f64> = x.iter().map(|&v| libm::pow(v, penal)).collect();
    let u = solve_scaled(problem, ke, &scale)?;
    let energy = element_energies(problem, ke, &u);
    let c = scale.iter().zip(&energy).map(|(s, e)| s * e).sum();
    let dc = x.iter().zip(&energy).map(|(&v, e)| -penal * libm::pow(v, penal - 1.0) * e).collect();
    Ok((c, dc))
}

/// Density-weighted cone filter of radius `rmin` element widths.
pub fn sensitivity_filter(nelx: usize, nely: usize, x: &[f64], dc: &[f64], rmin: f64) -> Vec<f64> {
    let r = libm::floor(rmin) as isize;
    let mut out = vec![0.0; dc.len()];
    for i in 0..nelx as isize {
        for j in 0..nely as isize {
            let mut sum = 0.0;
            let mut acc = 0.0;
            for k in (i - r).max(0)..=(i + r).min(nelx as isize - 1) {
                for l in (j - r).max(0)..=(j + r).min(nely as isize - 1) {
                    let d = libm::sqrt(((i - k) * (i - k) + (j - l) * (j - l)) as f64);
                    let fac = (rmin - d).max(0.0);
                    let f = nely * k as usize + l as usize;
                    sum += fac;
                    acc += fac * x[f] * dc[f];
                }
            }
            let e = nely * i as usize + j as usize;
            out[e] = acc / (x[e] * sum);
        }
    }
    out
}

/// Optimality-criteria step with a bisected volume multiplier.
pub fn oc_update(x: &[f64], dc: &[f64], volfrac: f64, move_limit: f64, xmin: f64) -> Result<Vec<f64>> {
    let n = x.len() as f64;
    let target = volfrac * n;
    let lo: Vec<f64> = x.iter().map(|&v| (v - move_limit).max(xmin)).collect();
    let hi: Vec<f64> = x.iter().map(|&v| (v + move_limit).min(1.0)).collect();
    let slack = 1e-9 * n;
    if hi.iter().sum::<f64>() < target - slack || lo.iter().sum::<f64>() > target + slack {
        return Err(Error::BisectionBracket);
    }
    let grad: Vec<f64> = dc.iter().map(|&d| (-d).max(0.0)).collect();
    let step = |lambda: f64| -> Vec<f64> {
        (0..x.len()).map(|e| (x[e] * libm::sqrt(grad[e] / lambda)).clamp(lo[e], hi[e])).collect()
    };

    let mut l1 = 0.0;
    let mut l2 = (0..x.len()).map(|e| grad[e] * x[e] * x[e] / (lo[e] * lo[e])).fold(0.0, f64::max);
    if !(l2 > 0.0) {
        l2 = 1.0;
    }
    l2 *= 1.0 + 1e-12;
    if step(l2).iter().sum::<f64>() > target + slack {
        return Err(Error::BisectionBracket);
    }
    for _ in 0..200 {
        let mid = 0.5 * (l1 + l2);
        if step(mid).iter().sum::<f64>() > target {
            l1 = mid;
        } else {
            l2 = mid;
        }
        if l2 - l1 <= 1e-13 * (l1 + l2) {
            break;
        }
    }
    let out = step(0.5 * (l1 + l2));
    if (out.iter().sum::<f64>() - target).abs() > 1e-4 * n {
        return Err(Error::BisectionBracket);
    }
    Ok(out)
}

pub fn optimize(problem: &PlateProblem, params: &TopOptParams) -> Result<DensityField> {
    params.check()?;
    let ke = problem.element_stiffness()?;
    let (nelx, nely) = (problem.nelx, problem.nely);
    let n = problem.element_count();
    let mut field = DensityField {
        nelx,
        nely,
        x: vec![params.volfrac; n],
        iterations: 0,
        compliance: 0.0,
        converged: false,
        history: Vec::new(),
    };

    if params.volfrac >= 1.0 {
        let (c, _) = compliance_and_sensitivity(problem, &ke, &field.x, params.penal)?;
        field.compliance = c;
        field.iterations = 1;
        field.converged = true;
        field.history.push(IterRecord { compliance: c, volume: 1.0, change: 0.0 });
        return Ok(field);
    }

    for _ in 0..params.max_iters {
        let (c, dc) = compliance_and_sensitivity(problem, &ke, &field.x, params.penal)?;
        let dc = sensitivity_filter(nelx, nely, &field.x, &dc, params.rmin);
        let xnew = oc_update(&field.x, &dc, params.volfrac, params.move_limit, params.xmin)?;
        let change = field.x.iter().zip(&xnew).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        field.x = xnew;
        field.iterations += 1;
        field.history.push(IterRecord { compliance: c, volume: field.mean(), change });
        if change <= params.tol {
            field.converged = true;
            break;
        }
    }
    field.compliance = compliance_and_sensitivity(problem, &ke, &field.x, params.penal)?.0;
    Ok(field)
}
