//! Fixtures shared by the integration tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::time::Duration;

use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::na::DMatrix;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use proptest::prelude::*;
use serde_json::Value;
use trussweb::image::Gray;
use trussweb_core::model::{
    Classification, CrossSection, LoadCombination, Material, Member, Node, Support, TrussModel,
};
use trussweb_core::plate::{Idealization, PlateProblem};
use trussweb_core::topopt::DensityField;
use trussweb_core::Axis;

// ---------------------------------------------------------------------------
// Published values

/// Member, force (compression positive), length truncated to 2 dp,
/// designation, area, optimized area.
pub const DEMO_TABLE: [(u32, f64, f64, &str, f64, f64); 11] = [
    (1, -37.50, 1.66, "2 x ISA 20 x 20 x 4", 290.0, 150.00),
    (2, -24.99, 1.66, "2 x ISA 20 x 20 x 4", 290.0, 100.00),
    (3, -37.49, 1.66, "2 x ISA 20 x 20 x 4", 290.0, 150.00),
    (4, 40.38, 1.34, "2 x ISA 25 x 25 x 5", 450.0, 161.55),
    (5, 33.64, 1.34, "2 x ISA 40 x 25 x 3", 376.0, 134.59),
    (6, 9.76, 0.65, "1 x ISA 20 x 20 x 4", 145.0, 44.35),
    (7, -9.75, 1.30, "1 x ISA 20 x 20 x 4", 145.0, 45.59),
    (8, 33.64, 1.34, "2 x ISA 40 x 25 x 3", 376.0, 134.59),
    (9, -9.75, 1.30, "1 x ISA 20 x 20 x 4", 145.0, 45.59),
    (10, 9.76, 0.65, "1 x ISA 20 x 20 x 4", 145.0, 44.35),
    (11, 40.38, 1.34, "2 x ISA 25 x 25 x 5", 450.0, 161.55),
];

/// Members whose optimum is set by the stress limit.
pub const STRESS_GOVERNED: [u32; 7] = [1, 2, 3, 4, 5, 8, 11];
/// Members whose optimum is set by the slenderness limit.
pub const SLENDERNESS_GOVERNED: [u32; 4] = [6, 7, 9, 10];

/// Lines that must appear in the member 1 block at demo loads.
pub const MEMBER1_LINES: [&str; 8] = [
    "Steel Design of Member No:1 (Tension Member)",
    "Strength of Weld= weld_size*0.7*0.462*fu: 530.38 N/mm",
    "(0.91*Ag*fy)/1000=32.99 kN",
    "(0.8*0.8*An*fu)/1000=38.05 kN",
    "Tb1=((0.525*Avg*fy+0.72*Atn*fu)/1000): 56.27 kN",
    "Tb2=(0.416*Avn*fu+0.91*Atg*fy)/1000: 60.63 kN",
    "Strength due to Block Shear:56.27 kN",
    "Provide 2 angle 20 x 20 x 4 with weld size 4 mm all",
];

/// Lines that must appear in the member 4 block (its 20 x 20 x 4 trial).
pub const MEMBER4_LINES: [&str; 9] = [
    "Steel Design of Member No:4 (Compression Member)",
    "lambda_vv=((Lo/r)/(e*sqrt(pi^2*E/fy)))= 1.19",
    "lambda_eh=sqrt(k1+k2*lambda_vv^2+k3*lambda_phi^2)= 1.25",
    "phi=0.5*[1+alpha*(lambda_eh-0.2)+lambda_eh^2]= 1.54",
    "f_cd=(fy/gamma_m0)/c= 93.24 N/mm^2",
    "lambda_ef=sqrt(k1+k2*lambda_vv^2+k3*lambda_phi^2)= 0.87",
    "f_cd=(fy/gamma_m0)/c= 140.42 N/mm^2",
    "f_cd=(fy/gamma_m0)/c= 111.52 N/mm^2",
    "Design Compressive Force:(f_cd*A)=16.17 kN",
];

/// Two decimals, half away from zero, ignoring noise below 1e-9.
pub fn r2(v: f64) -> f64 {
    ((v * 1e9).round() / 1e7).round() / 100.0
}

/// Text of one member's block in a design report.
pub fn member_block(report: &str, member: u32) -> &str {
    let head = format!("Steel Design of Member No:{member} ");
    let start = report.find(&head).unwrap_or(report.len());
    let rest = &report[start..];
    let end = rest[1..].find("Steel Design of Member No:").map(|k| k + 1).unwrap_or(rest.len());
    &rest[..end]
}

/// Checks a comparison CSV against the published table. Forces are
/// compared with the sign convention flipped, lengths after truncation.
pub fn compare_demo_table(csv: &str) -> Vec<String> {
    let mut bad = Vec::new();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    if rows.len() != DEMO_TABLE.len() {
        bad.push(format!("{} rows, expected {}", rows.len(), DEMO_TABLE.len()));
        return bad;
    }
    for (r, &(id, force, length, des, area, opt)) in rows.iter().zip(&DEMO_TABLE) {
        let num = |k: usize| r.get(k).and_then(|v| v.parse::<f64>().ok()).unwrap_or(f64::NAN);
        if num(0) != id as f64 {
            bad.push(format!("row for member {id} reads {:?}", r.first()));
        }
        if (-num(1) - force).abs() > 2e-3 * force.abs() + 1e-9 {
            bad.push(format!("member {id}: force {} vs {force}", num(1)));
        }
        let ours_len = num(2);
        if (ours_len - length).abs() > 0.0101 {
            bad.push(format!("member {id}: length {ours_len} vs {length}"));
        }
        if r.get(3).copied() != Some(des) {
            bad.push(format!("member {id}: {:?} vs {des}", r.get(3)));
        }
        if num(4) != area {
            bad.push(format!("member {id}: area {} vs {area}", num(4)));
        }
        if STRESS_GOVERNED.contains(&id) && (num(5) - opt).abs() > 2e-3 * opt {
            bad.push(format!("member {id}: optimized {} vs {opt}", num(5)));
        }
    }
    bad
}

// ---------------------------------------------------------------------------
// MBB beam

/// Half MBB beam in the 99-line setup: unit elements, E = 1, ν = 0.3,
/// unit load down at the top-left node, symmetry on the left edge and a
/// roller at the bottom-right corner.
pub fn mbb_problem(nelx: usize, nely: usize) -> PlateProblem {
    let mut p = PlateProblem {
        nelx,
        nely,
        dx: 1.0,
        dy: 1.0,
        thickness: 1.0,
        youngs: 1.0,
        nu: 0.3,
        idealization: Idealization::PlaneStress,
        loads: Vec::new(),
        fixed: Vec::new(),
    };
    for iy in 0..=nely {
        p.fixed.push(2 * p.node(0, iy));
    }
    p.fixed.push(2 * p.node(nelx, nely) + 1);
    p.loads.push((p.node(0, 0), 0.0, -1.0));
    p
}

pub struct Reference {
    /// Element e = nely·ex + ey, ey = 0 at the top.
    pub x: Vec<f64>,
    pub compliance: f64,
    pub iterations: usize,
}

impl Reference {
    pub fn field(&self, nelx: usize, nely: usize) -> DensityField {
        DensityField {
            nelx,
            nely,
            x: self.x.clone(),
            iterations: self.iterations,
            compliance: self.compliance,
            converged: true,
            history: vec![],
        }
    }
}

fn ke99(nu: f64) -> [[f64; 8]; 8] {
    let k = [
        0.5 - nu / 6.0,
        0.125 + nu / 8.0,
        -0.25 - nu / 12.0,
        -0.125 + 3.0 * nu / 8.0,
        -0.25 + nu / 12.0,
        -0.125 - nu / 8.0,
        nu / 6.0,
        0.125 - 3.0 * nu / 8.0,
    ];
    let idx = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 0, 7, 6, 5, 4, 3, 2],
        [2, 7, 0, 5, 6, 3, 4, 1],
        [3, 6, 5, 0, 7, 2, 1, 4],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 4, 3, 2, 1, 0, 7, 6],
        [6, 3, 4, 1, 2, 7, 0, 5],
        [7, 2, 1, 4, 3, 6, 5, 0],
    ];
    let mut ke = [[0.0; 8]; 8];
    for a in 0..8 {
        for b in 0..8 {
            ke[a][b] = k[idx[a][b]] / (1.0 - nu * nu);
        }
    }
    ke
}

/// Straight transliteration of the 99-line MATLAB code (x indexed [ely][elx],
/// sparse Cholesky for the solve).
pub fn reference_mbb(nelx: usize, nely: usize, volfrac: f64, penal: f64, rmin: f64) -> Reference {
    let ke = ke99(0.3);
    let edof = |elx: usize, ely: usize| {
        let n1 = (nely + 1) * elx + ely;
        let n2 = (nely + 1) * (elx + 1) + ely;
        [2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1, 2 * n2 + 2, 2 * n2 + 3, 2 * n1 + 2, 2 * n1 + 3]
    };
    let ndof = 2 * (nelx + 1) * (nely + 1);
    let mut fixed: Vec<usize> = (0..=nely).map(|k| 2 * k).collect();
    fixed.push(ndof - 1);
    let mut map = vec![usize::MAX; ndof];
    let mut nfree = 0;
    for (d, m) in map.iter_mut().enumerate() {
        if !fixed.contains(&d) {
            *m = nfree;
            nfree += 1;
        }
    }

    let fe = |x: &Vec<Vec<f64>>| -> Vec<f64> {
        let mut coo = CooMatrix::new(nfree, nfree);
        for elx in 0..nelx {
            for ely in 0..nely {
                let s = x[ely][elx].powf(penal);
                let ed = edof(elx, ely);
                for a in 0..8 {
                    for b in 0..8 {
                        let (i, j) = (map[ed[a]], map[ed[b]]);
                        if i != usize::MAX && j != usize::MAX {
                            coo.push(i, j, s * ke[a][b]);
                        }
                    }
                }
            }
        }
        let k = CscMatrix::from(&coo);
        let mut f = DMatrix::zeros(nfree, 1);
        f[(map[1], 0)] = -1.0;
        let u = CscCholesky::factor(&k).expect("reference stiffness is positive definite").solve(&f);
        let mut full = vec![0.0; ndof];
        for d in 0..ndof {
            if map[d] != usize::MAX {
                full[d] = u[(map[d], 0)];
            }
        }
        full
    };
    let energy = |u: &[f64], elx: usize, ely: usize| {
        let ed = edof(elx, ely);
        let mut e = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                e += u[ed[a]] * ke[a][b] * u[ed[b]];
            }
        }
        e
    };
    let compliance = |x: &Vec<Vec<f64>>| {
        let u = fe(x);
        let mut c = 0.0;
        for elx in 0..nelx {
            for ely in 0..nely {
                c += x[ely][elx].powf(penal) * energy(&u, elx, ely);
            }
        }
        c
    };

    let mut x = vec![vec![volfrac; nelx]; nely];
    let mut change: f64 = 1.0;
    let mut iterations = 0;
    while change > 0.01 && iterations < 200 {
        iterations += 1;
        let u = fe(&x);
        let mut dc = vec![vec![0.0; nelx]; nely];
        for elx in 0..nelx {
            for ely in 0..nely {
                dc[ely][elx] = -penal * x[ely][elx].powf(penal - 1.0) * energy(&u, elx, ely);
            }
        }
        // check.m
        let r = rmin.floor() as isize;
        let mut dcn = vec![vec![0.0; nelx]; nely];
        for i in 0..nelx as isize {
            for j in 0..nely as isize {
                let mut sum = 0.0;
                for k in (i - r).max(0)..=(i + r).min(nelx as isize - 1) {
                    for l in (j - r).max(0)..=(j + r).min(nely as isize - 1) {
                        let fac = rmin - (((i - k).pow(2) + (j - l).pow(2)) as f64).sqrt();
                        sum += fac.max(0.0);
                        dcn[j as usize][i as usize] +=
                            fac.max(0.0) * x[l as usize][k as usize] * dc[l as usize][k as usize];
                    }
                }
                dcn[j as usize][i as usize] /= x[j as usize][i as usize] * sum;
            }
        }
        // OC.m
        let (mut l1, mut l2, mv) = (0.0, 100000.0, 0.2);
        let mut xnew = x.clone();
        while l2 - l1 > 1e-4 {
            let lmid = 0.5 * (l2 + l1);
            let mut total = 0.0;
            for ely in 0..nely {
                for elx in 0..nelx {
                    let v = x[ely][elx];
                    let oc = v * (-dcn[ely][elx] / lmid).sqrt();
                    let nv = f64::max(0.001, f64::max(v - mv, f64::min(1.0, f64::min(v + mv, oc))));
                    xnew[ely][elx] = nv;
                    total += nv;
                }
            }
            if total - volfrac * (nelx * nely) as f64 > 0.0 {
                l1 = lmid;
            } else {
                l2 = lmid;
            }
        }
        change = 0.0;
        for ely in 0..nely {
            for elx in 0..nelx {
                change = change.max((xnew[ely][elx] - x[ely][elx]).abs());
            }
        }
        x = xnew;
    }
    let c = compliance(&x);
    let mut flat = vec![0.0; nelx * nely];
    for elx in 0..nelx {
        for ely in 0..nely {
            flat[nely * elx + ely] = x[ely][elx];
        }
    }
    Reference { x: flat, compliance: c, iterations }
}

// ---------------------------------------------------------------------------
// Random model documents

fn name_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9_]{0,8}",
        "[A-Za-z ,\"\\[\\]#;é-]{1,12}".prop_filter("non-blank", |s| !s.trim().is_empty()),
    ]
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
        Just(0.1),
    ]
}

fn support() -> impl Strategy<Value = Support> {
    prop_oneof![
        Just(Support::Free),
        Just(Support::Hinged),
        Just(Support::Roller(Axis::X)),
        Just(Support::Roller(Axis::Y)),
    ]
}

fn classification() -> impl Strategy<Value = Classification> {
    prop_oneof![Just(Classification::Auto), Just(Classification::Peripheral), Just(Classification::Interior)]
}

/// Arbitrary models, valid or not: the format must carry anything the
/// editor can hold.
pub fn model_strategy() -> impl Strategy<Value = TrussModel> {
    let node = (any::<u32>(), number(), number(), support(), prop::array::uniform6(number()));
    let material = (name_strategy(), number(), number(), number(), number());
    let section = (name_strategy(), number());
    let member = (any::<u32>(), any::<u32>(), any::<u32>(), name_strategy(), name_strategy(), classification());
    let combo = (name_strategy(), number(), number(), number());
    (
        prop::collection::vec(node, 0..8),
        prop::collection::vec(material, 0..3),
        prop::collection::vec(section, 0..3),
        prop::collection::vec(member, 0..8),
        prop::collection::vec(combo, 0..4),
    )
        .prop_map(|(nodes, materials, sections, members, combos)| TrussModel {
            nodes: nodes
                .into_iter()
                .map(|(id, x, y, s, l)| {
                    let mut n = Node::new(id, x, y).with_support(s);
                    n.loads = [[l[0], l[1]], [l[2], l[3]], [l[4], l[5]]];
                    n
                })
                .collect(),
            materials: materials.into_iter().map(|(name, e, nu, fy, fu)| Material { name, e, nu, fy, fu }).collect(),
            sections: sections.into_iter().map(|(name, area)| CrossSection { name, area }).collect(),
            members: members
                .into_iter()
                .map(|(id, node_i, node_j, material, section, classification)| Member {
                    id,
                    node_i,
                    node_j,
                    material,
                    section,
                    classification,
                })
                .collect(),
            combinations: combos.into_iter().map(|(name, d, l, w)| LoadCombination::new(&name, d, l, w)).collect(),
        })
}

/// Bitwise model equality, so -0.0 and NaN payloads count.
pub fn same_bits(a: &TrussModel, b: &TrussModel) -> bool {
    let f = |x: f64, y: f64| x.to_bits() == y.to_bits();
    a.nodes.len() == b.nodes.len()
        && a.nodes.iter().zip(&b.nodes).all(|(p, q)| {
            p.id == q.id
                && f(p.x, q.x)
                && f(p.y, q.y)
                && p.support == q.support
                && p.loads.iter().flatten().zip(q.loads.iter().flatten()).all(|(u, v)| f(*u, *v))
        })
        && a.materials.len() == b.materials.len()
        && a.materials
            .iter()
            .zip(&b.materials)
            .all(|(p, q)| p.name == q.name && f(p.e, q.e) && f(p.nu, q.nu) && f(p.fy, q.fy) && f(p.fu, q.fu))
        && a.sections.len() == b.sections.len()
        && a.sections.iter().zip(&b.sections).all(|(p, q)| p.name == q.name && f(p.area, q.area))
        && a.members == b.members
        && a.combinations.len() == b.combinations.len()
        && a.combinations.iter().zip(&b.combinations).all(|(p, q)| {
            p.name == q.name
                && f(p.factor_dl, q.factor_dl)
                && f(p.factor_ll, q.factor_ll)
                && f(p.factor_wl, q.factor_wl)
        })
}

// ---------------------------------------------------------------------------
// HTTP

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(60)))
        .build()
        .into()
}

/// (status, body)
pub fn get(agent: &ureq::Agent, url: &str) -> (u16, Vec<u8>) {
    let mut resp = agent.get(url).call().expect("request reaches the server");
    let status = resp.status().as_u16();
    let body = resp.body_mut().with_config().limit(64 << 20).read_to_vec().expect("body is readable");
    (status, body)
}

pub fn post_json(agent: &ureq::Agent, url: &str, body: &Value) -> (u16, Value) {
    let mut resp = agent
        .post(url)
        .header("Content-Type", "application/json")
        .send(serde_json::to_vec(body).unwrap().as_slice())
        .expect("request reaches the server");
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap_or_default();
    (status, serde_json::from_str(&text).unwrap_or(Value::Null))
}

/// Polls a job until it leaves the queue, returning its final record.
pub fn wait_for(agent: &ureq::Agent, base: &str, id: &str, limit: Duration) -> Value {
    let start = std::time::Instant::now();
    loop {
        let (status, body) = get(agent, &format!("{base}/api/jobs/{id}"));
        assert_eq!(status, 200, "job record for {id}");
        let v: Value = serde_json::from_slice(&body).unwrap();
        match v["status"].as_str() {
            Some("done") | Some("failed") => return v,
            _ => {}
        }
        assert!(start.elapsed() < limit, "job {id} still {} after {:?}", v["status"], limit);
        std::thread::sleep(Duration::from_millis(100));
    }
}

/// Request for the demonstration truss with every analysis selected.
pub fn demo_request(nel: usize) -> Value {
    serde_json::json!({
        "model": trussweb::model_csv::serialize(&trussweb_core::fixtures::roof_truss(10.0)),
        "analyses": ["static", "is800_design", "size_opt", "gusset_topopt"],
        "topopt": { "volfrac": 0.5, "nelx": nel, "nely": nel, "thickness": 0.01 },
    })
}

/// Submits a request and waits for it, returning the id and final record.
pub fn run_job(agent: &ureq::Agent, base: &str, request: &Value, limit: Duration) -> (String, Value) {
    let (status, body) = post_json(agent, &format!("{base}/api/jobs"), request);
    assert_eq!(status, 202, "{body}");
    let id = body["id"].as_str().expect("job id").to_string();
    let rec = wait_for(agent, base, &id, limit);
    assert_eq!(rec["status"], "done", "{rec}");
    (id, rec)
}

/// Every artifact listed in a finished job's record, by name.
pub fn artifacts(agent: &ureq::Agent, base: &str, id: &str, record: &Value) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for name in record["artifacts"].as_array().expect("artifact list") {
        let name = name.as_str().unwrap();
        let (status, bytes) = get(agent, &format!("{base}/api/jobs/{id}/{name}"));
        assert_eq!(status, 200, "{name}");
        out.insert(name.to_string(), bytes);
    }
    out
}

/// Gusset rasters of a finished job, fetched through the image endpoint.
pub fn gusset_images(agent: &ureq::Agent, base: &str, id: &str, record: &Value) -> BTreeMap<u32, Gray> {
    let mut out = BTreeMap::new();
    for g in record["results"]["gussets"].as_array().expect("gusset summaries") {
        let node = g["node"].as_u64().unwrap() as u32;
        let (status, bytes) = get(agent, &format!("{base}/api/jobs/{id}/gusset/{node}.img"));
        assert_eq!(status, 200, "gusset {node}");
        out.insert(node, Gray::from_pgm(&bytes).expect("gusset image is a PGM"));
    }
    out
}

/// Mean |ρa(x, y) − ρb(w−1−x, y)|.
pub fn mirror_difference(a: &Gray, b: &Gray) -> f64 {
    assert_eq!((a.width, a.height), (b.width, b.height));
    let mut s = 0.0;
    for y in 0..a.height {
        for x in 0..a.width {
            s += (a.density(x, y) - b.density(a.width - 1 - x, y)).abs();
        }
    }
    s / a.pixels.len().max(1) as f64
}

/// Symmetry checks on the demonstration plates: node 6 against itself and
/// the mirrored joint pairs against each other. Returns the metrics by name.
pub fn gusset_symmetry(images: &BTreeMap<u32, Gray>) -> Vec<(String, f64)> {
    let mut out = vec![("node 6".to_string(), images[&6].mirror_asymmetry())];
    for (a, b) in trussweb_core::fixtures::ROOF_MIRROR_NODES {
        out.push((format!("nodes {a}/{b}"), mirror_difference(&images[&a], &images[&b])));
    }
    out
}
