use trussweb_core::{fixtures, truss};

mod support;
use support::{tip_error, PRATT_FORCES};

#[test]
fn pratt_forces_match_hand_solution() {
    let m = fixtures::pratt_verification();
    let r = truss::solve_static(&m, "DL").unwrap();
    for (k, (got, want)) in r.forces.iter().zip(PRATT_FORCES).enumerate() {
        if want == 0.0 {
            assert!(got.abs() < 1e-9, "member {}: {got}", k + 1);
        } else {
            assert!((got - want).abs() <= 0.005 * want.abs(), "member {}: {got} vs {want}", k + 1);
        }
    }
}

#[test]
fn pratt_closed_form() {
    // Method of joints. Each support takes 3 kN of the 6 kN uplift.
    let h: f64 = 2.31;
    let m = fixtures::pratt_verification();
    let r = truss::solve_static(&m, "DL").unwrap();
    // Moments about node 6 give the bottom chord.
    let chord = -3.0 * 2.0 / (h / 2.0);
    for k in 0..4 {
        assert!((r.forces[k] - chord).abs() < 1e-9, "member {}: {}", k + 1, r.forces[k]);
    }
    let rafter = 3.0 * (4.0 + h * h / 4.0).sqrt() / (h / 2.0);
    assert!((r.forces[5] - rafter).abs() < 1e-9);
}

#[test]
fn cantilever_converges_to_beam_theory() {
    let errs: Vec<f64> = (3..=13).map(|n| tip_error(n, 0.27)).collect();
    for w in errs.windows(2) {
        assert!(w[1].abs() < w[0].abs(), "{errs:?}");
    }
    assert!(errs[10].abs() <= 1e-4, "n = 13: {}", errs[10]);
    // Coarse meshes are too stiff.
    assert!(errs[0] < -0.05);
}

#[test]
fn cantilever_error_depends_weakly_on_poisson() {
    let a = tip_error(13, 0.27);
    let b = tip_error(13, 0.3);
    assert!(b < a && (a - b).abs() < 5e-4, "{a} {b}");
}
