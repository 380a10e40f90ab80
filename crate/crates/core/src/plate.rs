//! Bilinear quadrilateral (Q4) plane elasticity on a structured grid.
//!
//! Nodes are numbered column by column from the top-left corner:
//! node(ix, iy) = (nely + 1)·ix + iy with iy = 0 on the top edge. Elements
//! follow the same column-major order, e = nely·ex + ey. DOF 2n is x, 2n+1
//! is y, y pointing up.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Banded;
use crate::model::Material;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Idealization {
    #[default]
    PlaneStress,
    PlaneStrain,
}

pub type Ke = [[f64; 8]; 8];

#[derive(Clone, Debug, PartialEq)]
pub struct PlateProblem {
    pub nelx: usize,
    pub nely: usize,
    /// Element width and height.
    pub dx: f64,
    pub dy: f64,
    pub thickness: f64,
    /// Young's modulus in the caller's force/length² units.
    pub youngs: f64,
    pub nu: f64,
    pub idealization: Idealization,
    /// (node, Fx, Fy)
    pub loads: Vec<(usize, f64, f64)>,
    pub fixed: Vec<usize>,
}

impl PlateProblem {
    /// Plate in m and kN cut from a material given in N/mm².
    pub fn steel_units(nelx: usize, nely: usize, dx: f64, dy: f64, thickness: f64, mat: &Material) -> Self {
        PlateProblem {
            nelx,
            nely,
            dx,
            dy,
            thickness,
            youngs: mat.e * 1.0e3,
            nu: mat.nu,
            idealization: Idealization::PlaneStress,
            loads: Vec::new(),
            fixed: Vec::new(),
        }
    }

    #[inline]
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        (self.nely + 1) * ix + iy
    }

    pub fn node_count(&self) -> usize {
        (self.nelx + 1) * (self.nely + 1)
    }

    pub fn element_count(&self) -> usize {
        self.nelx * self.nely
    }

    /// Global DOFs of element (ex, ey) in the order LL, LR, UR, UL.
    pub fn element_dofs(&self, ex: usize, ey: usize) -> [usize; 8] {
        let ul = self.node(ex, ey);
        let ur = self.node(ex + 1, ey);
        let ll = ul + 1;
        let lr = ur + 1;
        [2 * ll, 2 * ll + 1, 2 * lr, 2 * lr + 1, 2 * ur, 2 * ur + 1, 2 * ul, 2 * ul + 1]
    }

    /// Node position (x right, y up) with the bottom-left corner at the origin.
    pub fn node_position(&self, n: usize) -> [f64; 2] {
        let ix = n / (self.nely + 1);
        let iy = n % (self.nely + 1);
        [ix as f64 * self.dx, (self.nely - iy) as f64 * self.dy]
    }

    pub fn load_vector(&self) -> Vec<f64> {
        let mut f = vec![0.0; 2 * self.node_count()];
        for &(n, fx, fy) in &self.loads {
            f[2 * n] += fx;
            f[2 * n + 1] += fy;
        }
        f
    }

    pub fn element_stiffness(&self) -> Result<Ke> {
        q4_stiffness(self.youngs, self.nu, self.thickness, self.idealization, self.dx, self.dy)
    }

    fn check(&self) -> Result<()> {
        if self.nelx == 0 || self.nely == 0 {
            return Err(Error::InvalidParameter("nelx and nely must be at least 1".into()));
        }
        if !(self.thickness > 0.0 && self.dx > 0.0 && self.dy > 0.0 && self.youngs > 0.0) {
            return Err(Error::InvalidParameter("plate dimensions and modulus must be positive".into()));
        }
        let ndof = 2 * self.node_count();
        if self.fixed.iter().any(|&d| d >= ndof) || self.loads.iter().any(|l| l.0 >= self.node_count()) {
            return Err(Error::InvalidParameter("load or support outside the mesh".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField {
    /// (ux, uy) per node.
    pub u: Vec<[f64; 2]>,
}

impl DisplacementField {
    pub fn flat(&self) -> Vec<f64> {
        self.u.iter().flatten().copied().collect()
    }
}

fn constitutive(e: f64, nu: f64, idealization: Idealization) -> Result<[[f64; 3]; 3]> {
    match idealization {
        Idealization::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            Ok([[c, c * nu, 0.0], [c * nu, c, 0.0], [0.0, 0.0, c * (1.0 - nu) / 2.0]])
        }
        Idealization::PlaneStrain => {
            if nu >= 0.5 {
                return Err(Error::SingularConstitutive);
            }
            let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
            Ok([[c * (1.0 - nu), c * nu, 0.0], [c * nu, c * (1.0 - nu), 0.0], [0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0]])
        }
    }
}

/// Stiffness of an a×b rectangle, nodes LL, LR, UR, UL, 2×2 Gauss rule.
pub fn q4_stiffness(e: f64, nu: f64, thickness: f64, idealization: Idealization, a: f64, b: f64) -> Result<Ke> {
    let d = constitutive(e, nu, idealization)?;
    let g = 1.0 / libm::sqrt(3.0);
    let xi_n = [-1.0, 1.0, 1.0, -1.0];
    let eta_n = [-1.0, -1.0, 1.0, 1.0];
    let det_j = a * b / 4.0;
    let mut k = [[0.0; 8]; 8];
    for (xi, eta) in [(-g, -g), (g, -g), (g, g), (-g, g)] {
        let mut bm = [[0.0; 8]; 3];
        for i in 0..4 {
            let dndx = xi_n[i] * (1.0 + eta_n[i] * eta) / 4.0 * 2.0 / a;
            let dndy = eta_n[i] * (1.0 + xi_n[i] * xi) / 4.0 * 2.0 / b;
            bm[0][2 * i] = dndx;
            bm[1][2 * i + 1] = dndy;
            bm[2][2 * i] = dndy;
            bm[2][2 * i + 1] = dndx;
        }
        let mut db = [[0.0; 8]; 3];
        for r in 0..3 {
            for c in 0..8 {
                db[r][c] = (0..3).map(|s| d[r][s] * bm[s][c]).sum();
            }
        }
        for r in 0..8 {
            for c in 0..8 {
                let v: f64 = (0..3).map(|s| bm[s][r] * db[s][c]).sum();
                k[r][c] += v * det_j * thickness;
            }
        }
    }
    Ok(k)
}

/// Solves with element stiffness `ke` scaled per element by `scale`.
pub fn solve_scaled(problem: &PlateProblem, ke: &Ke, scale: &[f64]) -> Result<Vec<f64>> {
    problem.check()?;
    let ndof = 2 * problem.node_count();
    let mut map = vec![usize::MAX; ndof];
    let mut fixed = vec![false; ndof];
    for &d in &problem.fixed {
        fixed[d] = true;
    }
    let mut free = Vec::with_capacity(ndof);
    for d in 0..ndof {
        if !fixed[d] {
            map[d] = free.len();
            free.push(d);
        }
    }
    let bw = 2 * problem.nely + 5;
    let mut k = Banded::zeros(free.len(), bw);
    for ex in 0..problem.nelx {
        for ey in 0..problem.nely {
            let s = scale[problem.nely * ex + ey];
            let dofs = problem.element_dofs(ex, ey);
            for r in 0..8 {
                let i = map[dofs[r]];
                if i == usize::MAX {
                    continue;
                }
                for c in 0..8 {
                    let j = map[dofs[c]];
                    if j == usize::MAX || j > i {
                        continue;
                    }
                    k.add(i, j, s * ke[r][c]);
                }
            }
        }
    }
    let f = problem.load_vector();
    let ff: Vec<f64> = free.iter().map(|&d| f[d]).collect();
    let uf = k.solve(&ff).map_err(|p| Error::UnstablePlate { dof: free[p] })?;
    let mut u = vec![0.0; ndof];
    for (&d, v) in free.iter().zip(uf) {
        u[d] = v;
    }
    Ok(u)
}

pub fn solve_plate(problem: &PlateProblem) -> Result<DisplacementField> {
    let ke = problem.element_stiffness()?;
    let u = solve_scaled(problem, &ke, &vec![1.0; problem.element_count()])?;
    Ok(DisplacementField { u: u.chunks(2).map(|c| [c[0], c[1]]).collect() })
}

/// K·u − f at the fixed DOFs, in `problem.fixed` order.
pub fn reactions(problem: &PlateProblem, ke: &Ke, scale: &[f64], u: &[f64]) -> Vec<f64> {
    let mut ku = vec![0.0; u.len()];
    for ex in 0..problem.nelx {
        for ey in 0..problem.nely {
            let s = scale[problem.nely * ex + ey];
            let dofs = problem.element_dofs(ex, ey);
            for r in 0..8 {
                ku[dofs[r]] += s * (0..8).map(|c| ke[r][c] * u[dofs[c]]).sum::<f64>();
            }
        }
    }
    let f = problem.load_vector();
    problem.fixed.iter().map(|&d| ku[d] - f[d]).collect()
}

/// u_e' ke u_e for every element, column-major.
pub fn element_energies(problem: &PlateProblem, ke: &Ke, u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(problem.element_count());
    for ex in 0..problem.nelx {
        for ey in 0..problem.nely {
            let dofs = problem.element_dofs(ex, ey);
            let ue: [f64; 8] = core::array::from_fn(|i| u[dofs[i]]);
            let mut s = 0.0;
            for r in 0..8 {
                let kr: f64 = (0..8).map(|c| ke[r][c] * ue[c]).sum();
                s += ue[r] * kr;
            }
            out.push(s);
        }
    }
    out
}
