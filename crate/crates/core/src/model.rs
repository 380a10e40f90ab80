//! Structural model shared by every solver.
//!
//! Geometry is in m, loads in kN, stresses and moduli in N/mm², section
//! areas in m². Node and member ids are user-facing positive integers and
//! need not be contiguous.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Axis, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Support {
    #[default]
    Free,
    /// Free to roll along the given axis, restrained across it.
    Roller(Axis),
    Hinged,
}

impl Support {
    /// Restrained directions, x first.
    pub fn restrained(self) -> [bool; 2] {
        match self {
            Support::Free => [false, false],
            Support::Roller(Axis::X) => [false, true],
            Support::Roller(Axis::Y) => [true, false],
            Support::Hinged => [true, true],
        }
    }

    pub fn restrained_count(self) -> usize {
        self.restrained().iter().filter(|r| **r).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LoadCase {
    Dead,
    Live,
    Wind,
}

impl LoadCase {
    pub const ALL: [LoadCase; 3] = [LoadCase::Dead, LoadCase::Live, LoadCase::Wind];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub support: Support,
    /// (Fx, Fy) in kN for dead, live and wind cases.
    pub loads: [[f64; 2]; 3],
}

impl Node {
    pub fn new(id: u32, x: f64, y: f64) -> Self {
        Node { id, x, y, support: Support::Free, loads: [[0.0; 2]; 3] }
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn with_load(mut self, case: LoadCase, fx: f64, fy: f64) -> Self {
        self.loads[case.index()] = [fx, fy];
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Material {
    pub name: String,
    pub e: f64,
    pub nu: f64,
    pub fy: f64,
    pub fu: f64,
}

impl Material {
    /// Mild steel, E 200 GPa, fy 250, fu 410.
    pub fn steel() -> Self {
        Material { name: "steel".to_string(), e: 2.0e5, nu: 0.3, fy: 250.0, fu: 410.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossSection {
    pub name: String,
    pub area: f64,
}

impl CrossSection {
    pub const DEFAULT_AREA: f64 = 0.01;

    pub fn default_section() -> Self {
        CrossSection { name: "default".to_string(), area: Self::DEFAULT_AREA }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Classification {
    Peripheral,
    Interior,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Member {
    pub id: u32,
    pub node_i: u32,
    pub node_j: u32,
    pub material: String,
    pub section: String,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoadCombination {
    pub name: String,
    pub factor_dl: f64,
    pub factor_ll: f64,
    pub factor_wl: f64,
}

impl LoadCombination {
    pub fn new(name: &str, factor_dl: f64, factor_ll: f64, factor_wl: f64) -> Self {
        LoadCombination { name: name.to_string(), factor_dl, factor_ll, factor_wl }
    }

    pub fn factors(&self) -> [f64; 3] {
        [self.factor_dl, self.factor_ll, self.factor_wl]
    }

    /// 1.5(DL+LL), 1.2(DL+LL+WL) and 1.5WL+0.9DL.
    pub fn is800_defaults() -> Vec<LoadCombination> {
        vec![
            LoadCombination::new("1.5(DL+LL)", 1.5, 1.5, 0.0),
            LoadCombination::new("1.2(DL+LL+WL)", 1.2, 1.2, 1.2),
            LoadCombination::new("1.5WL+0.9DL", 0.9, 0.0, 1.5),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrussModel {
    pub nodes: Vec<Node>,
    pub members: Vec<Member>,
    pub materials: Vec<Material>,
    pub sections: Vec<CrossSection>,
    pub combinations: Vec<LoadCombination>,
}

impl TrussModel {
    pub fn node(&self, id: u32) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_index(&self, id: u32) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn member(&self, id: u32) -> Option<&Member> {
        self.members.iter().find(|m| m.id == id)
    }

    pub fn member_index(&self, id: u32) -> Option<usize> {
        self.members.iter().position(|m| m.id == id)
    }

    pub fn material(&self, name: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.name == name)
    }

    pub fn section(&self, name: &str) -> Option<&CrossSection> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn combination(&self, name: &str) -> Option<&LoadCombination> {
        self.combinations.iter().find(|c| c.name == name)
    }

    pub fn member_nodes(&self, m: &Member) -> Result<(&Node, &Node)> {
        let a = self.node(m.node_i).ok_or(Error::UnknownNode(m.node_i))?;
        let b = self.node(m.node_j).ok_or(Error::UnknownNode(m.node_j))?;
        Ok((a, b))
    }

    /// Member length in m.
    pub fn length(&self, m: &Member) -> Result<f64> {
        let (a, b) = self.member_nodes(m)?;
        Ok(libm::hypot(b.x - a.x, b.y - a.y))
    }

    /// Unit vector from node_i to node_j and the length.
    pub fn direction(&self, m: &Member) -> Result<([f64; 2], f64)> {
        let (a, b) = self.member_nodes(m)?;
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let l = libm::hypot(dx, dy);
        if !(l > 0.0) {
            return Err(Error::ZeroLength(m.id));
        }
        Ok(([dx / l, dy / l], l))
    }

    pub fn member_material(&self, m: &Member) -> Result<&Material> {
        self.material(&m.material).ok_or_else(|| Error::UnknownMaterial(m.material.clone()))
    }

    pub fn member_area(&self, m: &Member) -> Result<f64> {
        self.section(&m.section).map(|s| s.area).ok_or_else(|| Error::UnknownSection(m.section.clone()))
    }

    /// Factored nodal load (kN) for one combination.
    pub fn factored_load(node: &Node, combo: &LoadCombination) -> [f64; 2] {
        let f = combo.factors();
        let mut p = [0.0; 2];
        for (case, fac) in f.iter().enumerate() {
            p[0] += fac * node.loads[case][0];
            p[1] += fac * node.loads[case][1];
        }
        p
    }

    pub fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id).max().unwrap_or(0) + 1
    }

    pub fn next_member_id(&self) -> u32 {
        self.members.iter().map(|m| m.id).max().unwrap_or(0) + 1
    }

    pub fn total_length(&self) -> Result<f64> {
        self.members.iter().map(|m| self.length(m)).sum()
    }
}

/// Lists every broken invariant. An empty list means the model can be handed
/// to the solver; nonsingularity itself is only detected during factorization.
pub fn validate(model: &TrussModel) -> Vec<String> {
    let mut out = Vec::new();
    if model.members.is_empty() {
        out.push("structure has no members".to_string());
    }

    let mut seen = BTreeSet::new();
    for n in &model.nodes {
        if n.id == 0 {
            out.push("node ids must be positive".to_string());
        }
        if !seen.insert(n.id) {
            out.push(format!("duplicate node id {}", n.id));
        }
        if !(n.x.is_finite() && n.y.is_finite()) {
            out.push(format!("node {}: non-finite coordinates", n.id));
        }
        if n.loads.iter().flatten().any(|v| !v.is_finite()) {
            out.push(format!("node {}: non-finite load", n.id));
        }
    }

    let mut names = BTreeSet::new();
    for m in &model.materials {
        if !names.insert(m.name.as_str()) {
            out.push(format!("duplicate material {:?}", m.name));
        }
        if !(m.e > 0.0) {
            out.push(format!("material {:?}: E must be positive", m.name));
        }
        if !(m.nu >= 0.0 && m.nu < 0.5) {
            out.push(format!("material {:?}: nu must lie in [0, 0.5)", m.name));
        }
        if !(m.fy > 0.0 && m.fy < m.fu) {
            out.push(format!("material {:?}: require 0 < fy < fu", m.name));
        }
    }
    let mut names = BTreeSet::new();
    for s in &model.sections {
        if !names.insert(s.name.as_str()) {
            out.push(format!("duplicate section {:?}", s.name));
        }
        if !(s.area > 0.0) {
            out.push(format!("section {:?}: area must be positive", s.name));
        }
    }

    let mut refs_ok = true;
    let mut seen = BTreeSet::new();
    for m in &model.members {
        if m.id == 0 {
            out.push("member ids must be positive".to_string());
        }
        if !seen.insert(m.id) {
            out.push(format!("duplicate member id {}", m.id));
        }
        let mut ends_ok = true;
        for nid in [m.node_i, m.node_j] {
            if model.node(nid).is_none() {
                out.push(format!("member {}: unknown node {}", m.id, nid));
                ends_ok = false;
                refs_ok = false;
            }
        }
        if m.node_i == m.node_j {
            out.push(format!("member {}: both ends on node {}", m.id, m.node_i));
        } else if ends_ok && !(model.length(m).unwrap_or(0.0) > 0.0) {
            out.push(format!("member {}: zero length", m.id));
        }
        if model.material(&m.material).is_none() {
            out.push(format!("member {}: unknown material {:?}", m.id, m.material));
        }
        if model.section(&m.section).is_none() {
            out.push(format!("member {}: unknown section {:?}", m.id, m.section));
        }
    }

    for c in &model.combinations {
        if c.factors().iter().all(|f| *f == 0.0) {
            out.push(format!("combination {:?}: all factors are zero", c.name));
        }
        if c.factors().iter().any(|f| !f.is_finite()) {
            out.push(format!("combination {:?}: non-finite factor", c.name));
        }
    }

    let constrained: usize = model.nodes.iter().map(|n| n.support.restrained_count()).sum();
    if constrained < 3 {
        out.push("insufficient supports".to_string());
    }

    if !model.members.is_empty() && refs_ok && !is_connected(model) {
        out.push("structure is not connected".to_string());
    }
    out
}

fn is_connected(model: &TrussModel) -> bool {
    let n = model.nodes.len();
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for m in &model.members {
        if let (Some(a), Some(b)) = (model.node_index(m.node_i), model.node_index(m.node_j)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Replaces a member by two halves meeting at a new free, unloaded midpoint
/// node. The first half keeps the original id.
pub fn split_member(model: &TrussModel, member_id: u32) -> Result<TrussModel> {
    let idx = model.member_index(member_id).ok_or(Error::UnknownMember(member_id))?;
    let m = model.members[idx].clone();
    let (a, b) = model.member_nodes(&m)?;
    let mid = Node::new(model.next_node_id(), 0.5 * (a.x + b.x), 0.5 * (a.y + b.y));

    let mut out = model.clone();
    let second = Member { id: model.next_member_id(), node_i: mid.id, node_j: m.node_j, ..m.clone() };
    out.members[idx].node_j = mid.id;
    out.members.insert(idx + 1, second);
    out.nodes.push(mid);
    Ok(out)
}

/// Peripheral/interior split from the outer boundary of the drawing. User
/// classifications win over the computed one.
pub fn classify_members(model: &TrussModel) -> BTreeMap<u32, Classification> {
    let boundary = boundary_edges(model);
    model
        .members
        .iter()
        .map(|m| {
            let c = match m.classification {
                Classification::Auto => {
                    let key = (m.node_i.min(m.node_j), m.node_i.max(m.node_j));
                    if boundary.contains(&key) {
                        Classification::Peripheral
                    } else {
                        Classification::Interior
                    }
                }
                user => user,
            };
            (m.id, c)
        })
        .collect()
}

// Walks the outer face counter-clockwise, starting at the lowest (then
// leftmost) node with the outward normal pointing down. At each node the
// next edge is the first one met turning counter-clockwise from the edge we
// arrived on.
fn boundary_edges(model: &TrussModel) -> BTreeSet<(u32, u32)> {
    use core::f64::consts::PI;

    let mut out = BTreeSet::new();
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for m in &model.members {
        if m.node_i == m.node_j || model.node(m.node_i).is_none() || model.node(m.node_j).is_none() {
            continue;
        }
        adj.entry(m.node_i).or_default().push(m.node_j);
        adj.entry(m.node_j).or_default().push(m.node_i);
    }
    let Some(start) = adj
        .keys()
        .filter_map(|id| model.node(*id))
        .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
        .map(|n| n.id)
    else {
        return out;
    };

    let pos = |id: u32| {
        let n = model.node(id).unwrap();
        (n.x, n.y)
    };
    let angle = |from: u32, to: u32| {
        let (x0, y0) = pos(from);
        let (x1, y1) = pos(to);
        libm::atan2(y1 - y0, x1 - x0)
    };

    let mut cur = start;
    let mut back = -PI / 2.0;
    let mut first_edge = None;
    let limit = 2 * model.members.len() + 2;
    for _ in 0..limit {
        let next = adj[&cur]
            .iter()
            .copied()
            .map(|w| {
                let mut turn = angle(cur, w) - back;
                while turn <= 1e-12 {
                    turn += 2.0 * PI;
                }
                (turn, w)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, w)| w);
        let Some(next) = next else { break };
        if first_edge == Some((cur, next)) {
            break;
        }
        if first_edge.is_none() {
            first_edge = Some((cur, next));
        }
        out.insert((cur.min(next), cur.max(next)));
        back = angle(next, cur);
        cur = next;
    }
    out
}
