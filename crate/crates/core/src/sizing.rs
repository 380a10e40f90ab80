//! Weight minimization over member areas with stress and slenderness
//! constraints, solved by the method of feasible directions.
//!
//! Areas are total member areas in mm² (both angles of a double-angle
//! member). The radius of gyration of a continuous area is modelled as
//! κ·sqrt(A) with κ fitted to the section library per configuration.

use alloc::vec;
use alloc::vec::Vec;

use crate::design::{
    configurations, Configuration, DesignReport, SectionLibrary, COMPRESSION_SLENDERNESS_LIMIT,
    TENSION_SLENDERNESS_LIMIT, ZERO_FORCE,
};
use crate::error::{Error, Result};
use crate::lp::maximize;
use crate::model::TrussModel;
use crate::truss::{axial_stiffness, load_vector, solve_with};

/// Steel density used for the reported weight, kg/m per mm².
pub const KG_PER_MM2_M: f64 = 7.85e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadiusModel {
    pub single: f64,
    pub double: f64,
}

impl RadiusModel {
    /// Least-squares κ through the origin: r_min against sqrt(Ag) for single
    /// angles, r_pair against sqrt(2Ag) for pairs.
    pub fn fit(lib: &SectionLibrary) -> Self {
        let (mut ss, mut sr, mut ds, mut dr) = (0.0, 0.0, 0.0, 0.0);
        for s in lib.sections() {
            ss += s.area;
            sr += libm::sqrt(s.area) * s.r_min;
            ds += 2.0 * s.area;
            dr += libm::sqrt(2.0 * s.area) * s.r_pair;
        }
        RadiusModel { single: sr / ss, double: dr / ds }
    }

    pub fn kappa(&self, c: Configuration) -> f64 {
        match c {
            Configuration::Single => self.single,
            Configuration::Double => self.double,
        }
    }

    /// Radius in mm for a total member area in mm².
    pub fn radius(&self, c: Configuration, area: f64) -> f64 {
        self.kappa(c) * libm::sqrt(area)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeOptProblem {
    pub model: TrussModel,
    pub start: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub configs: Vec<Configuration>,
    /// Slenderness limit per member.
    pub limits: Vec<f64>,
    pub radius: RadiusModel,
    pub max_iters: usize,
    /// Final active-set width on normalized constraints.
    pub constraint_tol: f64,
    pub convergence_tol: f64,
}

impl SizeOptProblem {
    /// Starts from the designed areas, bounds [10 mm², 10× start].
    pub fn from_design(model: &TrussModel, report: &DesignReport, lib: &SectionLibrary) -> Result<Self> {
        let cfg = configurations(model);
        let mut start = Vec::new();
        let mut configs = Vec::new();
        let mut limits = Vec::new();
        for m in &model.members {
            let e = report.entry(m.id).ok_or(Error::UnknownMember(m.id))?;
            start.push(e.total_area());
            configs.push(cfg[&m.id]);
            limits.push(if e.force < -ZERO_FORCE { COMPRESSION_SLENDERNESS_LIMIT } else { TENSION_SLENDERNESS_LIMIT });
        }
        let mut p = SizeOptProblem {
            model: model.clone(),
            lower: vec![10.0; start.len()],
            upper: Vec::new(),
            start,
            configs,
            limits,
            radius: RadiusModel::fit(lib),
            max_iters: 500,
            constraint_tol: 1e-4,
            convergence_tol: 1e-7,
        };
        p.start = p.lift_to_feasible(p.start.clone())?;
        p.upper = p.start.iter().map(|a| 10.0 * a).collect();
        Ok(p)
    }

    /// Raises areas until every constraint holds. A catalog section can be
    /// slender under the κ·sqrt(A) radius model while its real radius passes.
    /// Slenderness has a closed form; stresses are re-solved because the
    /// forces of an indeterminate truss move with the areas.
    pub fn lift_to_feasible(&self, mut areas: Vec<f64>) -> Result<Vec<f64>> {
        let margin = 1.0 + 1e-6;
        let lengths = self.lengths()?;
        for i in 0..areas.len() {
            let r = lengths[i] * 1000.0 / (self.radius.kappa(self.configs[i]) * self.limits[i]);
            areas[i] = areas[i].max(r * r * margin);
        }
        for _ in 0..50 {
            let forces = self.forces(&areas)?;
            let mut raised = false;
            for (i, m) in self.model.members.iter().enumerate() {
                let fy = self.model.member_material(m)?.fy;
                let need = forces.iter().map(|f| f[i].abs()).fold(0.0, f64::max) * 1000.0 / fy * margin;
                if need > areas[i] {
                    areas[i] = need;
                    raised = true;
                }
            }
            if !raised {
                break;
            }
        }
        Ok(areas)
    }

    fn lengths(&self) -> Result<Vec<f64>> {
        self.model.members.iter().map(|m| self.model.length(m)).collect()
    }

    /// Member forces (kN) for every combination at the given areas.
    pub fn forces(&self, areas: &[f64]) -> Result<Vec<Vec<f64>>> {
        let a_m2: Vec<f64> = areas.iter().map(|a| a * 1e-6).collect();
        let k = axial_stiffness(&self.model, Some(&a_m2))?;
        self.model
            .combinations
            .iter()
            .map(|c| Ok(solve_with(&self.model, &k, &load_vector(&self.model, c))?.forces))
            .collect()
    }

    /// |F|/A − fy then Le/r − limit per member, for one combination.
    pub fn constraint_values(&self, areas: &[f64], combination: usize) -> Result<Vec<f64>> {
        let forces = self.forces(areas)?;
        let f = forces.get(combination).ok_or_else(|| Error::UnknownCombination(alloc::format!("#{combination}")))?;
        let lengths = self.lengths()?;
        let mut g = Vec::with_capacity(2 * areas.len());
        for (i, m) in self.model.members.iter().enumerate() {
            let fy = self.model.member_material(m)?.fy;
            g.push(f[i].abs() * 1000.0 / areas[i] - fy);
        }
        for i in 0..areas.len() {
            g.push(lengths[i] * 1000.0 / self.radius.radius(self.configs[i], areas[i]) - self.limits[i]);
        }
        Ok(g)
    }

    /// Normalized constraints: every combination's stress ratios − 1, then
    /// slenderness ratios − 1.
    fn normalized(&self, areas: &[f64], lengths: &[f64], fy: &[f64]) -> Result<Vec<f64>> {
        let forces = self.forces(areas)?;
        let n = areas.len();
        let mut g = Vec::with_capacity((forces.len() + 1) * n);
        for f in &forces {
            for i in 0..n {
                g.push(f[i].abs() * 1000.0 / (areas[i] * fy[i]) - 1.0);
            }
        }
        for i in 0..n {
            let r = self.radius.radius(self.configs[i], areas[i]);
            g.push(lengths[i] * 1000.0 / (r * self.limits[i]) - 1.0);
        }
        Ok(g)
    }

    fn is_determinate(&self) -> bool {
        let restrained: usize = self.model.nodes.iter().map(|n| n.support.restrained_count()).sum();
        self.model.members.len() + restrained == 2 * self.model.nodes.len()
    }
}

/// W = Σ ρ·A·L in kg and its gradient.
pub fn objective_weight(model: &TrussModel, areas: &[f64]) -> Result<(f64, Vec<f64>)> {
    let grad: Vec<f64> = model.members.iter().map(|m| Ok(KG_PER_MM2_M * model.length(m)?)).collect::<Result<_>>()?;
    Ok((grad.iter().zip(areas).map(|(g, a)| g * a).sum(), grad))
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActiveFlags {
    pub stress: bool,
    pub slenderness: bool,
    pub lower: bool,
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SizeOptResult {
    /// mm², model member order.
    pub areas: Vec<f64>,
    /// kg
    pub weight: f64,
    pub active: Vec<ActiveFlags>,
    /// Weight after each iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub radius: RadiusModel,
}

pub fn optimize_sizes(p: &SizeOptProblem) -> Result<SizeOptResult> {
    let n = p.start.len();
    if n != p.model.members.len() || p.lower.iter().zip(&p.upper).any(|(l, u)| !(*l > 0.0 && l <= u)) {
        return Err(Error::InvalidParameter("size bounds must satisfy 0 < lower ≤ upper".into()));
    }
    let lengths = p.lengths()?;
    let fy: Vec<f64> = p.model.members.iter().map(|m| Ok(p.model.member_material(m)?.fy)).collect::<Result<_>>()?;
    let (_, wgrad) = objective_weight(&p.model, &p.start)?;
    let determinate = p.is_determinate();

    // Work in x = A / A0 so the direction box is well scaled.
    let a0: Vec<f64> = p.start.iter().zip(&p.lower).map(|(a, l)| a.max(*l)).collect();
    let to_area = |x: &[f64]| -> Vec<f64> { x.iter().zip(&a0).map(|(x, a)| x * a).collect() };
    let xl: Vec<f64> = p.lower.iter().zip(&a0).map(|(l, a)| l / a).collect();
    let xu: Vec<f64> = p.upper.iter().zip(&a0).map(|(u, a)| u / a).collect();
    let w0: f64 = wgrad.iter().zip(&a0).map(|(g, a)| g * a).sum();
    let c: Vec<f64> = wgrad.iter().zip(&a0).map(|(g, a)| g * a / w0).collect();
    let feasible = |g: &[f64]| g.iter().all(|v| *v <= 1e-9);

    let mut x: Vec<f64> = a0.iter().map(|_| 1.0).collect();
    for i in 0..n {
        x[i] = x[i].clamp(xl[i], xu[i]);
    }
    let mut g = p.normalized(&to_area(&x), &lengths, &fy)?;
    if !feasible(&g) {
        return Err(Error::InfeasibleStart);
    }

    let mut eps = 0.1_f64;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut stall = 0;
    while iterations < p.max_iters {
        iterations += 1;
        let areas = to_area(&x);
        let active: Vec<usize> = (0..g.len()).filter(|&j| g[j] >= -eps).collect();
        let grads = constraint_gradients(p, &areas, &g, &active, &lengths, &fy, determinate)?;
        // d g / d x = d g / d A · A0
        let grads: Vec<Vec<f64>> =
            grads.into_iter().map(|row| row.iter().zip(&a0).map(|(d, a)| d * a).collect()).collect();

        let at_lower: Vec<bool> = (0..n).map(|i| x[i] <= xl[i] * (1.0 + 1e-12)).collect();
        let at_upper: Vec<bool> = (0..n).map(|i| x[i] >= xu[i] * (1.0 - 1e-12)).collect();
        let (s, beta) = direction(&c, &grads, &active, &g, eps, &at_lower, &at_upper)?;

        if beta <= 1e-9 {
            if eps > p.constraint_tol {
                eps = (eps * 0.25).max(p.constraint_tol);
                iterations -= 1;
                continue;
            }
            converged = true;
            history.push(w0 * dot(&c, &x));
            break;
        }

        // Largest feasible step along s; the objective is linear so the
        // best point on the ray is where it leaves the feasible set.
        let mut amax = f64::INFINITY;
        for i in 0..n {
            if s[i] < 0.0 {
                amax = amax.min((xl[i] - x[i]) / s[i]);
            } else if s[i] > 0.0 {
                amax = amax.min((xu[i] - x[i]) / s[i]);
            }
        }
        let trial = |a: f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let xt: Vec<f64> = (0..n).map(|i| (x[i] + a * s[i]).clamp(xl[i], xu[i])).collect();
            let gt = p.normalized(&to_area(&xt), &lengths, &fy)?;
            Ok((xt, gt))
        };
        let (mut xt, mut gt) = trial(amax)?;
        if !feasible(&gt) {
            let (mut lo, mut hi) = (0.0, amax);
            let mut best = (x.clone(), g.clone());
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (xm, gm) = trial(mid)?;
                if feasible(&gm) {
                    lo = mid;
                    best = (xm, gm);
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * hi.max(1.0) {
                    break;
                }
            }
            (xt, gt) = best;
        }
        let f_old = dot(&c, &x);
        let f_new = dot(&c, &xt);
        x = xt;
        g = gt;
        history.push(w0 * f_new);
        if f_old - f_new <= p.convergence_tol * f_old.abs() {
            stall += 1;
            if stall >= 3 {
                if eps > p.constraint_tol {
                    eps = (eps * 0.25).max(p.constraint_tol);
                    stall = 0;
                } else {
                    converged = true;
                    break;
                }
            }
        } else {
            stall = 0;
        }
    }

    let areas = to_area(&x);
    let ncomb = p.model.combinations.len();
    let tol = 10.0 * p.constraint_tol;
    let active = (0..n)
        .map(|i| ActiveFlags {
            stress: (0..ncomb).any(|k| g[k * n + i] >= -tol),
            slenderness: g[ncomb * n + i] >= -tol,
            lower: areas[i] <= p.lower[i] * (1.0 + tol),
            upper: areas[i] >= p.upper[i] * (1.0 - tol),
        })
        .collect();
    Ok(SizeOptResult {
        weight: objective_weight(&p.model, &areas)?.0,
        areas,
        active,
        history,
        iterations,
        converged,
        radius: p.radius,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rows d g_j / d A for the listed constraints.
fn constraint_gradients(
    p: &SizeOptProblem,
    areas: &[f64],
    g: &[f64],
    active: &[usize],
    lengths: &[f64],
    fy: &[f64],
    determinate: bool,
) -> Result<Vec<Vec<f64>>> {
    let n = areas.len();
    let nstress = g.len() - n;
    let need_fd = !determinate && active.iter().any(|&j| j < nstress);
    let fd: Vec<Vec<f64>> = if need_fd {
        (0..n)
            .map(|k| {
                let h = 1e-6 * areas[k];
                let mut a = areas.to_vec();
                a[k] += h;
                let gp = p.normalized(&a, lengths, fy)?;
                Ok(gp[..nstress].iter().zip(&g[..nstress]).map(|(u, v)| (u - v) / h).collect())
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(active
        .iter()
        .map(|&j| {
            let mut row = vec![0.0; n];
            if j < nstress {
                let i = j % n;
                if need_fd {
                    for k in 0..n {
                        row[k] = fd[k][j];
                    }
                } else {
                    // Forces do not depend on the areas.
                    row[i] = -(g[j] + 1.0) / areas[i];
                }
            } else {
                let i = j - nstress;
                row[i] = -0.5 * (g[j] + 1.0) / areas[i];
            }
            row
        })
        .collect())
}

/// Solves max β: c·s + β ≤ 0, ∇g_j·s + θ_j β ≤ 0, −1 ≤ s ≤ 1 with s
/// split as p − q so the origin is a basic feasible point.
fn direction(
    c: &[f64],
    grads: &[Vec<f64>],
    active: &[usize],
    g: &[f64],
    eps: f64,
    at_lower: &[bool],
    at_upper: &[bool],
) -> Result<(Vec<f64>, f64)> {
    let n = c.len();
    let nv = 2 * n + 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut row = vec![0.0; nv];
    for i in 0..n {
        row[i] = c[i];
        row[n + i] = -c[i];
    }
    row[2 * n] = 1.0;
    a.push(row);
    b.push(0.0);
    for (grad, &j) in grads.iter().zip(active) {
        let theta = {
            let t = 1.0 - g[j] / eps;
            (t * t).max(1e-3)
        };
        let mut row = vec![0.0; nv];
        for i in 0..n {
            row[i] = grad[i];
            row[n + i] = -grad[i];
        }
        row[2 * n] = theta;
        a.push(row);
        b.push(0.0);
    }
    for i in 0..n {
        let mut up = vec![0.0; nv];
        up[i] = 1.0;
        a.push(up);
        b.push(if at_upper[i] { 0.0 } else { 1.0 });
        let mut down = vec![0.0; nv];
        down[n + i] = 1.0;
        a.push(down);
        b.push(if at_lower[i] { 0.0 } else { 1.0 });
    }
    let mut cap = vec![0.0; nv];
    cap[2 * n] = 1.0;
    a.push(cap);
    b.push(1.0e6);
    let mut obj = vec![0.0; nv];
    obj[2 * n] = 1.0;
    let sol = maximize(&obj, &a, &b).map_err(|_| Error::InvalidParameter("direction-finding LP failed".into()))?;
    let s = (0..n).map(|i| sol.x[i] - sol.x[n + i]).collect();
    Ok((s, sol.x[2 * n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;
    use crate::Axis;

    fn bar(p: f64) -> TrussModel {
        TrussModel {
            nodes: vec![
                Node::new(1, 0.0, 0.0).with_support(Support::Hinged),
                Node::new(2, 1.0, 0.0).with_support(Support::Roller(Axis::X)).with_load(LoadCase::Dead, p, 0.0),
            ],
            members: vec![Member {
                id: 1,
                node_i: 1,
                node_j: 2,
                material: "steel".into(),
                section: "default".into(),
                classification: Classification::Peripheral,
            }],
            materials: vec![Material::steel()],
            sections: vec![CrossSection::default_section()],
            combinations: vec![LoadCombination::new("DL", 1.0, 0.0, 0.0)],
        }
    }

    fn problem(model: TrussModel, start: f64) -> SizeOptProblem {
        SizeOptProblem {
            model,
            start: vec![start],
            lower: vec![10.0],
            upper: vec![10.0 * start],
            configs: vec![Configuration::Double],
            limits: vec![350.0],
            radius: RadiusModel { single: 0.43, double: 0.66 },
            max_iters: 200,
            constraint_tol: 1e-5,
            convergence_tol: 1e-9,
        }
    }

    #[test]
    fn single_bar_reaches_stress_limit() {
        let r = optimize_sizes(&problem(bar(50.0), 600.0)).unwrap();
        assert!(r.converged);
        assert!((r.areas[0] - 200.0).abs() / 200.0 < 1e-4, "{:?}", r.areas);
        assert!(r.active[0].stress);
    }

    #[test]
    fn weight_gradient_and_scaling() {
        let m = bar(1.0);
        let (w, g) = objective_weight(&m, &[100.0]).unwrap();
        assert!((w - KG_PER_MM2_M * 100.0).abs() < 1e-15);
        assert_eq!(g, vec![KG_PER_MM2_M]);
        let (w2, _) = objective_weight(&m, &[300.0]).unwrap();
        assert!((w2 - 3.0 * w).abs() < 1e-12);
    }

    #[test]
    fn active_stress_constraint_is_zero() {
        let p = problem(bar(50.0), 600.0);
        let g = p.constraint_values(&[200.0], 0).unwrap();
        assert!(g[0].abs() < 1e-9);
    }

    #[test]
    fn infeasible_start_rejected() {
        assert_eq!(optimize_sizes(&problem(bar(50.0), 100.0)), Err(Error::InfeasibleStart));
    }

    #[test]
    fn lift_reaches_both_limits() {
        let p = problem(bar(50.0), 100.0);
        let a = p.lift_to_feasible(vec![100.0]).unwrap();
        assert!(a[0] >= 200.0 && a[0] < 200.001, "{a:?}");
        // A 20 m bar is slenderness-bound: r = 20000/350.
        let mut long = problem(bar(50.0), 100.0);
        long.model.nodes[1].x = 20.0;
        let a = long.lift_to_feasible(vec![100.0]).unwrap();
        let r = 20000.0 / 350.0 / 0.66;
        assert!(a[0] >= r * r && a[0] < r * r * 1.00001, "{a:?}");
        let g = long.constraint_values(&a, 0).unwrap();
        assert!(g.iter().all(|v| *v <= 0.0), "{g:?}");
    }
}
