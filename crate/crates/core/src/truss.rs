//! Direct stiffness analysis of pin-jointed plane trusses.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Axis, Error, Result};
use crate::linalg::{cholesky_solve, Dense};
use crate::model::{LoadCombination, Member, TrussModel};

/// E in N/mm² times A in m² gives kN after this factor.
pub const EA_KN: f64 = 1.0e3;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Reaction {
    pub node: u32,
    pub axis: Axis,
    /// kN
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalysisResult {
    pub combination: String,
    /// (ux, uy) in m, in model node order.
    pub displacements: Vec<[f64; 2]>,
    /// Axial force in kN, tension positive, in model member order.
    pub forces: Vec<f64>,
    pub reactions: Vec<Reaction>,
}

impl AnalysisResult {
    pub fn force(&self, model: &TrussModel, member_id: u32) -> Option<f64> {
        model.member_index(member_id).map(|i| self.forces[i])
    }
}

/// 4×4 global stiffness block for DOFs (xi, yi, xj, yj), in kN/m.
pub fn element_stiffness(member: &Member, model: &TrussModel) -> Result<[[f64; 4]; 4]> {
    let ea = model.member_material(member)?.e * model.member_area(member)? * EA_KN;
    let (d, l) = model.direction(member)?;
    Ok(bar_stiffness(ea / l, d))
}

pub(crate) fn bar_stiffness(k: f64, d: [f64; 2]) -> [[f64; 4]; 4] {
    let (c, s) = (d[0], d[1]);
    let b = [[c * c, c * s], [c * s, s * s]];
    let mut out = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let v = k * b[i][j];
            out[i][j] = v;
            out[i + 2][j + 2] = v;
            out[i][j + 2] = -v;
            out[i + 2][j] = -v;
        }
    }
    out
}

pub fn solve_static(model: &TrussModel, combination: &str) -> Result<AnalysisResult> {
    let combo = model.combination(combination).ok_or_else(|| Error::UnknownCombination(combination.into()))?;
    solve_combination(model, combo)
}

pub fn solve_combination(model: &TrussModel, combo: &LoadCombination) -> Result<AnalysisResult> {
    let stiff = axial_stiffness(model, None)?;
    let loads = load_vector(model, combo);
    let mut r = solve_with(model, &stiff, &loads)?;
    r.combination = combo.name.clone();
    Ok(r)
}

/// Every combination of the model, in order.
pub fn solve_all(model: &TrussModel) -> Result<Vec<AnalysisResult>> {
    model.combinations.iter().map(|c| solve_combination(model, c)).collect()
}

/// EA/L per member (kN/m). `areas_m2` overrides the section areas.
pub fn axial_stiffness(model: &TrussModel, areas_m2: Option<&[f64]>) -> Result<Vec<f64>> {
    model
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let a = match areas_m2 {
                Some(a) => a[i],
                None => model.member_area(m)?,
            };
            let (_, l) = model.direction(m)?;
            Ok(model.member_material(m)?.e * a * EA_KN / l)
        })
        .collect()
}

pub fn load_vector(model: &TrussModel, combo: &LoadCombination) -> Vec<f64> {
    let mut f = vec![0.0; 2 * model.nodes.len()];
    for (i, n) in model.nodes.iter().enumerate() {
        let p = TrussModel::factored_load(n, combo);
        f[2 * i] = p[0];
        f[2 * i + 1] = p[1];
    }
    f
}

/// Core solve with explicit member stiffnesses and a full nodal load vector.
pub fn solve_with(model: &TrussModel, stiffness: &[f64], loads: &[f64]) -> Result<AnalysisResult> {
    let ndof = 2 * model.nodes.len();
    let mut k = Dense::zeros(ndof);
    let mut geo = Vec::with_capacity(model.members.len());
    for (m, &kl) in model.members.iter().zip(stiffness) {
        let (d, _) = model.direction(m)?;
        let a = model.node_index(m.node_i).ok_or(Error::UnknownNode(m.node_i))?;
        let b = model.node_index(m.node_j).ok_or(Error::UnknownNode(m.node_j))?;
        let dofs = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        let ke = bar_stiffness(kl, d);
        for (r, &i) in dofs.iter().enumerate() {
            for (c, &j) in dofs.iter().enumerate() {
                k.add(i, j, ke[r][c]);
            }
        }
        geo.push((dofs, d, kl));
    }

    let mut free = Vec::new();
    let mut fixed = Vec::new();
    for (i, n) in model.nodes.iter().enumerate() {
        let r = n.support.restrained();
        for ax in 0..2 {
            if r[ax] {
                fixed.push(2 * i + ax);
            } else {
                free.push(2 * i + ax);
            }
        }
    }

    let kff = k.submatrix(&free);
    let ff: Vec<f64> = free.iter().map(|&i| loads[i]).collect();
    let uf = cholesky_solve(kff, &ff).map_err(|p| {
        let dof = free[p];
        Error::Unstable { node: model.nodes[dof / 2].id, axis: if dof % 2 == 0 { Axis::X } else { Axis::Y } }
    })?;
    let mut u = vec![0.0; ndof];
    for (&i, v) in free.iter().zip(uf) {
        u[i] = v;
    }

    let forces = geo
        .iter()
        .map(|(dofs, d, kl)| {
            let elong = d[0] * (u[dofs[2]] - u[dofs[0]]) + d[1] * (u[dofs[3]] - u[dofs[1]]);
            kl * elong
        })
        .collect();

    let ku = k.mul_vec(&u);
    let reactions = fixed
        .iter()
        .map(|&i| Reaction {
            node: model.nodes[i / 2].id,
            axis: if i % 2 == 0 { Axis::X } else { Axis::Y },
            value: ku[i] - loads[i],
        })
        .collect();

    Ok(AnalysisResult {
        combination: String::new(),
        displacements: u.chunks(2).map(|c| [c[0], c[1]]).collect(),
        forces,
        reactions,
    })
}

/// Node positions displaced by `scale` times the computed displacements.
pub fn deflected_shape(model: &TrussModel, result: &AnalysisResult, scale: f64) -> Vec<[f64; 2]> {
    model.nodes.iter().zip(&result.displacements).map(|(n, u)| [n.x + scale * u[0], n.y + scale * u[1]]).collect()
}

/// Per member, the force of largest magnitude over all results, keeping its sign.
pub fn envelope(results: &[AnalysisResult]) -> Vec<f64> {
    let n = results.first().map_or(0, |r| r.forces.len());
    (0..n)
        .map(|i| results.iter().map(|r| r.forces[i]).fold(0.0, |acc: f64, f| if f.abs() > acc.abs() { f } else { acc }))
        .collect()
}
