//! Reference structures used by tests, the CLI and the service demo.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Axis;
use crate::model::*;

fn member(id: u32, node_i: u32, node_j: u32) -> Member {
    Member {
        id,
        node_i,
        node_j,
        material: "steel".into(),
        section: "default".into(),
        classification: Classification::Auto,
    }
}

fn frame(nodes: Vec<Node>, bars: &[(u32, u32)]) -> TrussModel {
    TrussModel {
        nodes,
        members: bars.iter().enumerate().map(|(i, &(a, b))| member(i as u32 + 1, a, b)).collect(),
        materials: vec![Material::steel()],
        sections: vec![CrossSection::default_section()],
        combinations: vec![LoadCombination::new("DL", 1.0, 0.0, 0.0)],
    }
}

/// 8 m span, 2.31 m rise triangular Pratt truss with 2 kN uplift at the
/// three top-chord joints. Members 1-4 bottom chord, 5 centre post, 6-9 top
/// chord, 10 and 13 side posts, 11 and 12 diagonals.
pub fn pratt_verification() -> TrussModel {
    let h = 2.31;
    let nodes = vec![
        Node::new(1, 0.0, 0.0).with_support(Support::Hinged),
        Node::new(2, 2.0, 0.0),
        Node::new(3, 4.0, 0.0),
        Node::new(4, 6.0, 0.0),
        Node::new(5, 8.0, 0.0).with_support(Support::Roller(Axis::X)),
        Node::new(6, 2.0, h / 2.0).with_load(LoadCase::Dead, 0.0, 2.0),
        Node::new(7, 4.0, h).with_load(LoadCase::Dead, 0.0, 2.0),
        Node::new(8, 6.0, h / 2.0).with_load(LoadCase::Dead, 0.0, 2.0),
    ];
    let bars = [(1, 2), (2, 3), (3, 4), (4, 5), (3, 7), (1, 6), (6, 7), (5, 8), (8, 7), (2, 6), (6, 3), (8, 3), (4, 8)];
    frame(nodes, &bars)
}

/// 5 m span, 1 m rise roof truss with `p` kN hanging from each of the three
/// top-chord joints (5, 6, 7). Node 1 hinged, node 4 on rollers.
pub fn roof_truss(p: f64) -> TrussModel {
    let nodes = vec![
        Node::new(1, 0.0, 0.0).with_support(Support::Hinged),
        Node::new(2, 5.0 / 3.0, 0.0),
        Node::new(3, 10.0 / 3.0, 0.0),
        Node::new(4, 5.0, 0.0).with_support(Support::Roller(Axis::X)),
        Node::new(5, 1.25, 0.5).with_load(LoadCase::Dead, 0.0, -p),
        Node::new(6, 2.5, 1.0).with_load(LoadCase::Dead, 0.0, -p),
        Node::new(7, 3.75, 0.5).with_load(LoadCase::Dead, 0.0, -p),
    ];
    let bars = [(1, 2), (2, 3), (3, 4), (1, 5), (5, 6), (5, 2), (6, 2), (6, 7), (6, 3), (7, 3), (7, 4)];
    frame(nodes, &bars)
}

/// Member pairs of `roof_truss` mirrored about midspan.
pub const ROOF_MIRROR_MEMBERS: [(u32, u32); 5] = [(1, 3), (4, 11), (5, 8), (6, 10), (7, 9)];
/// Joint pairs of `roof_truss` mirrored about midspan; node 6 maps to itself.
pub const ROOF_MIRROR_NODES: [(u32, u32); 3] = [(1, 4), (2, 3), (5, 7)];

/// Cantilever plate 1.8 m long, 0.15 m deep and 0.12 m thick, clamped on
/// the left edge, with `n` elements through the depth and `10n` along the
/// length. 20 kN acts downward on the free end, lumped over the end nodes
/// with the trapezoidal rule. Returns the problem and the end-edge nodes.
pub fn cantilever(n: usize, nu: f64) -> (crate::plate::PlateProblem, Vec<usize>) {
    use crate::plate::PlateProblem;
    let (len, depth, t, p) = (1.8, 0.15, 0.12, 20.0);
    let mat = Material { nu, ..Material::steel() };
    let mut prob = PlateProblem::steel_units(10 * n, n, len / (10 * n) as f64, depth / n as f64, t, &mat);
    for iy in 0..=n {
        let a = prob.node(0, iy);
        prob.fixed.extend([2 * a, 2 * a + 1]);
    }
    let tip: Vec<usize> = (0..=n).map(|iy| prob.node(10 * n, iy)).collect();
    for (k, &node) in tip.iter().enumerate() {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        prob.loads.push((node, 0.0, -p * w / n as f64));
    }
    (prob, tip)
}

/// PL³/(3EI) for `cantilever`, in m.
pub fn cantilever_beam_theory() -> f64 {
    let (len, depth, t, p) = (1.8_f64, 0.15_f64, 0.12, 20.0);
    let i = t * depth * depth * depth / 12.0;
    p * len * len * len / (3.0 * Material::steel().e * 1.0e3 * i)
}
