//! Generators and checks shared by the property tests and the acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;

use trussweb_core::model::{Classification, LoadCase, Member, Node, Support, TrussModel};
use trussweb_core::plate::{self, PlateProblem};
use trussweb_core::topopt::compliance_and_sensitivity;
use trussweb_core::{fixtures, truss, Axis};

/// Analytical member forces of the verification truss, kN.
pub const PRATT_FORCES: [f64; 13] = [-5.2, -5.2, -5.2, -5.2, -2.0, 6.0, 4.0, 6.0, 4.0, 0.0, 2.0, 2.0, 0.0];

/// Relative error of the mean tip deflection of the n × 10n cantilever
/// against PL³/(3EI). Negative is too stiff.
pub fn tip_error(n: usize, nu: f64) -> f64 {
    let (p, tip) = fixtures::cantilever(n, nu);
    let u = plate::solve_plate(&p).unwrap().flat();
    let mean = tip.iter().map(|&k| u[2 * k + 1]).sum::<f64>() / tip.len() as f64;
    -mean / fixtures::cantilever_beam_theory() - 1.0
}

fn member(id: u32, i: u32, j: u32) -> Member {
    Member {
        id,
        node_i: i,
        node_j: j,
        material: "steel".into(),
        section: "default".into(),
        classification: Classification::Auto,
    }
}

/// Triangulated strip with `panels` panels, jittered nodes, a few redundant
/// members and random loads. Always stable.
pub fn strip_truss(panels: usize, jitter: &[f64], loads: &[f64], extra: &[bool], areas: &[f64]) -> TrussModel {
    let mut m = fixtures::pratt_verification();
    m.nodes.clear();
    m.members.clear();
    m.sections.clear();
    let mut id = 0;
    let mut jit = jitter.iter().cycle();
    let mut ld = loads.iter().cycle();
    for k in 0..=panels {
        for (row, y) in [(0u32, 0.0), (1, 1.5)] {
            id += 1;
            let x = k as f64 * 2.0 + 0.4 * jit.next().unwrap();
            let y = y + 0.3 * jit.next().unwrap();
            let support = match (k, row) {
                (0, 0) => Support::Hinged,
                (k, 0) if k == panels => Support::Roller(Axis::X),
                _ => Support::Free,
            };
            let node = Node::new(id, x, y)
                .with_support(support)
                .with_load(LoadCase::Dead, *ld.next().unwrap(), *ld.next().unwrap())
                .with_load(LoadCase::Live, *ld.next().unwrap(), *ld.next().unwrap());
            m.nodes.push(node);
        }
    }
    let bottom = |k: usize| 2 * k as u32 + 1;
    let top = |k: usize| 2 * k as u32 + 2;
    let mut pairs = vec![(bottom(0), top(0))];
    for k in 0..panels {
        pairs.push((bottom(k), bottom(k + 1)));
        pairs.push((top(k), top(k + 1)));
        pairs.push((bottom(k + 1), top(k + 1)));
        pairs.push((bottom(k), top(k + 1)));
        if extra[k % extra.len()] {
            pairs.push((top(k), bottom(k + 1)));
        }
    }
    let mut ar = areas.iter().cycle();
    for (n, (i, j)) in pairs.into_iter().enumerate() {
        let mut mem = member(n as u32 + 1, i, j);
        let name = format!("s{n}");
        m.sections.push(trussweb_core::model::CrossSection { name: name.clone(), area: *ar.next().unwrap() });
        mem.section = name;
        m.members.push(mem);
    }
    m
}

pub fn strip_strategy() -> impl Strategy<Value = TrussModel> {
    (
        2usize..7,
        prop::collection::vec(-1.0f64..1.0, 8),
        prop::collection::vec(-50.0f64..50.0, 12),
        prop::collection::vec(any::<bool>(), 3),
        prop::collection::vec(1e-4f64..1e-2, 5),
    )
        .prop_map(|(p, j, l, e, a)| strip_truss(p, &j, &l, &e, &a))
}

pub fn residuals(m: &TrussModel, r: &truss::AnalysisResult) -> (f64, f64) {
    let combo = m.combination(&r.combination).unwrap();
    let mut net = vec![[0.0f64; 2]; m.nodes.len()];
    let mut scale: f64 = 0.0;
    for (k, n) in m.nodes.iter().enumerate() {
        let p = TrussModel::factored_load(n, combo);
        net[k][0] += p[0];
        net[k][1] += p[1];
        scale = scale.max(p[0].abs()).max(p[1].abs());
    }
    for (k, mem) in m.members.iter().enumerate() {
        let (d, _) = m.direction(mem).unwrap();
        let (i, j) = (m.node_index(mem.node_i).unwrap(), m.node_index(mem.node_j).unwrap());
        let f = r.forces[k];
        scale = scale.max(f.abs());
        for a in 0..2 {
            net[i][a] += f * d[a];
            net[j][a] -= f * d[a];
        }
    }
    let mut global = [0.0f64; 2];
    for re in &r.reactions {
        let k = m.node_index(re.node).unwrap();
        let a = match re.axis {
            Axis::X => 0,
            Axis::Y => 1,
        };
        net[k][a] += re.value;
        global[a] += re.value;
    }
    for n in &m.nodes {
        let p = TrussModel::factored_load(n, combo);
        global[0] += p[0];
        global[1] += p[1];
    }
    let nodal = net.iter().flat_map(|v| v.iter()).fold(0.0f64, |s, v| s.max(v.abs()));
    let scale = scale.max(1e-300);
    (nodal / scale, global[0].abs().max(global[1].abs()) / scale)
}

pub fn small_plate(nelx: usize, nely: usize) -> PlateProblem {
    let mut p = PlateProblem::steel_units(nelx, nely, 0.1, 0.1, 0.01, &trussweb_core::model::Material::steel());
    for iy in 0..=nely {
        let n = p.node(0, iy);
        p.fixed.push(2 * n);
        p.fixed.push(2 * n + 1);
    }
    p.loads.push((p.node(nelx, nely), 3.0, -10.0));
    p.loads.push((p.node(nelx, 0), 0.0, -4.0));
    p
}

/// Largest relative gap between central differences and the analytic
/// compliance sensitivities of `small_plate(4, 4)` at densities `x`.
pub fn sensitivity_error(x: &[f64]) -> f64 {
    let p = small_plate(4, 4);
    let ke = p.element_stiffness().unwrap();
    let (_, dc) = compliance_and_sensitivity(&p, &ke, x, 3.0).unwrap();
    let mut worst: f64 = 0.0;
    for e in 0..x.len() {
        let h = 1e-5 * x[e];
        let mut up = x.to_vec();
        let mut dn = x.to_vec();
        up[e] += h;
        dn[e] -= h;
        let cu = compliance_and_sensitivity(&p, &ke, &up, 3.0).unwrap().0;
        let cd = compliance_and_sensitivity(&p, &ke, &dn, 3.0).unwrap().0;
        let fd = (cu - cd) / (2.0 * h);
        worst = worst.max((fd - dc[e]).abs() / dc[e].abs());
    }
    worst
}
