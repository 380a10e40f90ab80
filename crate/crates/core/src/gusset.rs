//! Gusset plate topology problems built from a solved truss joint.
//!
//! The plate is a square centred on the joint. Each member is welded over a
//! strip of the plate aligned with its axis, running from a stand-off
//! distance out to the plate edge, so that strips of neighbouring members
//! never overlap. Member forces are shared equally by the grid nodes inside
//! the strip. When the grid nodes of an inclined strip sit lopsided about the
//! member axis the shares get a linear tilt across the strip so that the
//! resultant stays on the axis and the joint carries no spurious moment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Material, TrussModel};
use crate::plate::{reactions, solve_scaled, PlateProblem};
use crate::topopt::{optimize, DensityField, TopOptParams};
use crate::truss::AnalysisResult;

/// Plate thickness used when none is given, m.
pub const DEFAULT_THICKNESS: f64 = 0.010;
pub const DEFAULT_MESH: usize = 60;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GussetMember {
    pub member: u32,
    /// Unit vector from the joint along the member.
    pub direction: [f64; 2],
    /// kN, tension positive.
    pub force: f64,
    /// Width of the welded footprint, m.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GussetProblem {
    pub node: u32,
    pub side: f64,
    pub nel: usize,
    /// Distance from the centroid at which the weld strips start, m.
    pub standoff: f64,
    pub members: Vec<GussetMember>,
    /// Applied joint load plus support reaction, kN; acts at the centroid.
    pub external: [f64; 2],
    pub thickness: f64,
    pub material: Material,
}

/// Stand-off keeping every pair of strips disjoint, plus one element of gap.
fn standoff(members: &[GussetMember], element: f64) -> f64 {
    let mut s: f64 = 0.0;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            let cos = (a.direction[0] * b.direction[0] + a.direction[1] * b.direction[1]).clamp(-1.0, 1.0);
            let sin = libm::sqrt(1.0 - cos * cos);
            if sin < 1e-9 {
                if cos > 0.0 {
                    s = f64::INFINITY;
                }
                continue;
            }
            let (ha, hb) = (a.width / 2.0, b.width / 2.0);
            s = s.max((ha * cos + hb) / sin).max((hb * cos + ha) / sin);
        }
    }
    s + element
}

impl GussetProblem {
    /// Builds the plate for joint `node` from one analysis result.
    /// `widths` gives the footprint width (m) per member id.
    pub fn from_joint(
        model: &TrussModel,
        result: &AnalysisResult,
        node: u32,
        widths: &BTreeMap<u32, f64>,
        nel: usize,
        thickness: f64,
    ) -> Result<Self> {
        let idx = model.node_index(node).ok_or(Error::UnknownNode(node))?;
        let mut members = Vec::new();
        for (k, m) in model.members.iter().enumerate() {
            if m.node_i != node && m.node_j != node {
                continue;
            }
            let (d, _) = model.direction(m)?;
            let direction = if m.node_i == node { d } else { [-d[0], -d[1]] };
            let width = *widths.get(&m.id).ok_or(Error::UnknownMember(m.id))?;
            members.push(GussetMember { member: m.id, direction, force: result.forces[k], width });
        }
        if members.len() < 2 {
            return Err(Error::InvalidParameter(format!("joint {node} has fewer than two members")));
        }
        let combo = model
            .combination(&result.combination)
            .ok_or_else(|| Error::UnknownCombination(result.combination.clone()))?;
        let mut external = TrussModel::factored_load(&model.nodes[idx], combo);
        for r in result.reactions.iter().filter(|r| r.node == node) {
            match r.axis {
                crate::Axis::X => external[0] += r.value,
                crate::Axis::Y => external[1] += r.value,
            }
        }
        let material = model.member_material(model.member(members[0].member).unwrap())?.clone();
        Self::with_members(node, members, external, nel, thickness, material)
    }

    /// Sizes the square plate to fit every strip.
    pub fn with_members(
        node: u32,
        members: Vec<GussetMember>,
        external: [f64; 2],
        nel: usize,
        thickness: f64,
        material: Material,
    ) -> Result<Self> {
        if nel < 2 {
            return Err(Error::InvalidParameter("gusset mesh needs at least 2 elements per side".into()));
        }
        if members.iter().any(|m| !(m.width > 0.0)) {
            return Err(Error::InvalidParameter("footprint widths must be positive".into()));
        }
        let wmax = members.iter().map(|m| m.width).fold(0.0, f64::max);
        // Grow the plate until the stand-off, which includes one element of
        // gap, leaves a strip at least as long as it is wide.
        let mut side = 3.0 * wmax;
        let mut s0 = standoff(&members, side / nel as f64);
        if !s0.is_finite() {
            return Err(Error::InvalidParameter(format!("joint {node}: two members share a direction")));
        }
        for _ in 0..50 {
            let need = 2.0 * (s0 + wmax);
            if side >= need {
                break;
            }
            side = need;
            s0 = standoff(&members, side / nel as f64);
        }
        Ok(GussetProblem { node, side, nel, standoff: s0, members, external, thickness, material })
    }

    pub fn element_size(&self) -> f64 {
        self.side / self.nel as f64
    }

    fn blank_plate(&self) -> PlateProblem {
        let h = self.element_size();
        PlateProblem::steel_units(self.nel, self.nel, h, h, self.thickness, &self.material)
    }

    /// Node position relative to the centroid, exactly antisymmetric in ix.
    fn relative(&self, ix: usize, iy: usize) -> [f64; 2] {
        let h = self.element_size();
        let n = self.nel as f64;
        [(2.0 * ix as f64 - n) * h / 2.0, (n - 2.0 * iy as f64) * h / 2.0]
    }

    /// Grid nodes inside the weld strip of member `k`.
    pub fn weld_nodes(&self, k: usize) -> Result<Vec<usize>> {
        let m = &self.members[k];
        let plate = self.blank_plate();
        let tol = 1e-9 * self.side;
        let (d, n) = (m.direction, [-m.direction[1], m.direction[0]]);
        let mut out = Vec::new();
        for ix in 0..=self.nel {
            for iy in 0..=self.nel {
                let p = self.relative(ix, iy);
                let along = p[0] * d[0] + p[1] * d[1];
                let across = p[0] * n[0] + p[1] * n[1];
                if along >= self.standoff - tol && across.abs() <= m.width / 2.0 + tol {
                    out.push(plate.node(ix, iy));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::MeshTooCoarse { member: m.member });
        }
        Ok(out)
    }

    pub fn centroid_node(&self) -> (usize, usize) {
        // Nearest node, ties to the lower left: smaller ix, larger iy.
        let c = self.nel as f64 / 2.0;
        let ix = libm::ceil(c - 0.5) as usize;
        let iy = libm::floor(c + 0.5) as usize;
        (ix, iy.min(self.nel))
    }

    /// Centroid pinned in both directions, the node below it in x.
    pub fn minimal_bcs(&self) -> Vec<usize> {
        let plate = self.blank_plate();
        let (ix, iy) = self.centroid_node();
        let c = plate.node(ix, iy);
        let below = plate.node(ix, (iy + 1).min(self.nel));
        let below = if below == c { plate.node(ix, iy - 1) } else { below };
        alloc::vec![2 * c, 2 * c + 1, 2 * below]
    }

    /// Member forces spread over their weld nodes plus the external load at
    /// the centroid, as (node, Fx, Fy) in kN.
    pub fn distribute_forces(&self) -> Result<Vec<(usize, f64, f64)>> {
        let mut loads = Vec::new();
        let mut used = BTreeSet::new();
        for (k, m) in self.members.iter().enumerate() {
            let nodes = self.weld_nodes(k)?;
            for &n in &nodes {
                if !used.insert(n) {
                    return Err(Error::InvalidParameter(format!("weld strips overlap at joint {}", self.node)));
                }
            }
            if m.force != 0.0 {
                let shares = self.shares(k, &nodes);
                for (n, w) in nodes.into_iter().zip(shares) {
                    let f = m.force * w;
                    loads.push((n, f * m.direction[0], f * m.direction[1]));
                }
            }
        }
        let (ix, iy) = self.centroid_node();
        if self.external != [0.0, 0.0] {
            loads.push((self.blank_plate().node(ix, iy), self.external[0], self.external[1]));
        }
        Ok(loads)
    }

    /// Fractions of the member force taken by each weld node. Equal unless
    /// the nodes' mean offset from the axis is nonzero; then tilted linearly
    /// across the strip to cancel it, if that keeps every share positive.
    pub fn shares(&self, k: usize, nodes: &[usize]) -> Vec<f64> {
        let m = &self.members[k];
        let count = nodes.len() as f64;
        let equal = alloc::vec![1.0 / count; nodes.len()];
        let rows = self.nel + 1;
        let across: Vec<f64> = nodes
            .iter()
            .map(|&n| {
                let p = self.relative(n / rows, n % rows);
                -p[0] * m.direction[1] + p[1] * m.direction[0]
            })
            .collect();
        let mean = across.iter().sum::<f64>() / count;
        let var = across.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / count;
        if mean.abs() <= 1e-12 * self.side || var <= 1e-12 * self.side * self.side {
            return equal;
        }
        let beta = -mean / var;
        let tilted: Vec<f64> = across.iter().map(|a| (1.0 + beta * (a - mean)) / count).collect();
        if tilted.iter().all(|w| *w > 0.0) {
            tilted
        } else {
            equal
        }
    }

    pub fn plate(&self) -> Result<PlateProblem> {
        let mut p = self.blank_plate();
        p.loads = self.distribute_forces()?;
        p.fixed = self.minimal_bcs();
        Ok(p)
    }

    /// Reactions at the three fixed DOFs of the solid plate, kN.
    pub fn solid_reactions(&self) -> Result<Vec<f64>> {
        let p = self.plate()?;
        let ke = p.element_stiffness()?;
        let scale = alloc::vec![1.0; p.element_count()];
        let u = solve_scaled(&p, &ke, &scale)?;
        Ok(reactions(&p, &ke, &scale, &u))
    }

    pub fn largest_force(&self) -> f64 {
        self.members.iter().map(|m| m.force.abs()).fold(0.0, f64::max)
    }
}

pub fn optimize_gusset(problem: &GussetProblem, params: &TopOptParams) -> Result<DensityField> {
    optimize(&problem.plate()?, params)
}
