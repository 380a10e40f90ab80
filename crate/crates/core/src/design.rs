//! Limit-state design of welded angle members to IS 800:2007.
//!
//! Section dimensions and radii are in mm, areas in mm², forces in kN and
//! stresses in N/mm². Double angles are designed as two single angles each
//! carrying half the member force.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{classify_members, Classification, Material, TrussModel};
use crate::truss::{envelope, AnalysisResult};

pub const GAMMA_M0: f64 = 1.1;
/// Imperfection factor of buckling class c.
pub const ALPHA: f64 = 0.49;
/// Fillet weld size used for every connection, mm.
pub const WELD_SIZE: f64 = 4.0;
pub const TENSION_SLENDERNESS_LIMIT: f64 = 350.0;
pub const COMPRESSION_SLENDERNESS_LIMIT: f64 = 180.0;
/// Below this |F| (kN) a member is treated as carrying no force.
pub const ZERO_FORCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AngleSection {
    pub designation: String,
    /// Longer leg.
    pub l: f64,
    /// Shorter leg.
    pub b: f64,
    pub t: f64,
    pub area: f64,
    pub r_min: f64,
    /// kg/m
    pub weight: f64,
    /// Radius of gyration of two angles back to back on a 10 mm gusset,
    /// about the axis lying in the gusset plane.
    pub r_pair: f64,
}

impl AngleSection {
    /// "20 x 20 x 4"
    pub fn size_label(&self) -> String {
        format!("{} x {} x {}", fmt_dim(self.l), fmt_dim(self.b), fmt_dim(self.t))
    }
}

fn fmt_dim(v: f64) -> String {
    if v == libm::trunc(v) {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Sections ordered by ascending gross area; ties keep their input order.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionLibrary {
    sections: Vec<AngleSection>,
}

impl SectionLibrary {
    pub fn new(mut sections: Vec<AngleSection>) -> Result<Self> {
        if sections.is_empty() {
            return Err(Error::InvalidParameter("section library is empty".into()));
        }
        for s in &sections {
            if !(s.l >= s.b && s.b > 0.0 && s.t > 0.0 && s.area > 0.0 && s.r_min > 0.0 && s.r_pair > 0.0) {
                return Err(Error::InvalidParameter(format!("section {:?} has invalid dimensions", s.designation)));
            }
        }
        sections.sort_by(|a, b| a.area.total_cmp(&b.area));
        Ok(SectionLibrary { sections })
    }

    pub fn sections(&self) -> &[AngleSection] {
        &self.sections
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn find(&self, designation: &str) -> Option<&AngleSection> {
        self.sections.iter().find(|s| s.designation == designation)
    }

    pub fn lightest(&self) -> &AngleSection {
        self.sections
            .iter()
            .min_by(|a, b| a.weight.total_cmp(&b.weight).then(a.area.total_cmp(&b.area)))
            .expect("library is never empty")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Configuration {
    Single,
    Double,
}

impl Configuration {
    pub fn count(self) -> usize {
        match self {
            Configuration::Single => 1,
            Configuration::Double => 2,
        }
    }

    pub fn radius(self, s: &AngleSection) -> f64 {
        match self {
            Configuration::Single => s.r_min,
            Configuration::Double => s.r_pair,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Mode {
    Tension,
    Compression,
    ZeroForce,
}

impl Mode {
    pub fn of(force: f64) -> Mode {
        if force.abs() < ZERO_FORCE {
            Mode::ZeroForce
        } else if force > 0.0 {
            Mode::Tension
        } else {
            Mode::Compression
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connection {
    Hinged,
    Fixed,
    Interpolated,
}

impl Connection {
    /// (k1, k2, k3)
    pub fn constants(self) -> Option<[f64; 3]> {
        match self {
            Connection::Hinged => Some([0.7, 0.6, 5.0]),
            Connection::Fixed => Some([0.2, 0.35, 20.0]),
            Connection::Interpolated => None,
        }
    }
}

pub fn epsilon(fy: f64) -> f64 {
    libm::sqrt(250.0 / fy)
}

/// Design strength of a fillet weld per mm run, N/mm.
pub fn weld_strength(weld_size: f64, fu: f64) -> f64 {
    weld_size * 0.7 * 0.462 * fu
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensionChecks {
    pub weld_strength: f64,
    /// Weld run needed to develop the yield strength, mm.
    pub weld_length: f64,
    pub avg: f64,
    pub avn: f64,
    pub atg: f64,
    pub atn: f64,
    pub yield_strength: f64,
    pub rupture_strength: f64,
    pub tb1: f64,
    pub tb2: f64,
    pub block_shear: f64,
    pub governing: f64,
}

/// Strengths of one angle welded along the longer leg, kN.
pub fn tension_checks(s: &AngleSection, mat: &Material, weld_size: f64) -> TensionChecks {
    let ws = weld_strength(weld_size, mat.fu);
    let an = s.area;
    let yield_strength = 0.91 * s.area * mat.fy / 1000.0;
    let rupture_strength = 0.8 * 0.8 * an * mat.fu / 1000.0;
    let weld_length = if ws > 0.0 { yield_strength * 1000.0 / ws } else { 0.0 };
    let avg = weld_length * s.t;
    let avn = avg;
    let atg = s.l * s.t;
    let atn = atg;
    let tb1 = (0.525 * avg * mat.fy + 0.72 * atn * mat.fu) / 1000.0;
    let tb2 = (0.416 * avn * mat.fu + 0.91 * atg * mat.fy) / 1000.0;
    let block_shear = tb1.min(tb2);
    TensionChecks {
        weld_strength: ws,
        weld_length,
        avg,
        avn,
        atg,
        atn,
        yield_strength,
        rupture_strength,
        tb1,
        tb2,
        block_shear,
        governing: yield_strength.min(rupture_strength).min(block_shear),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SectionClass {
    FullyEffective,
    Slender,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationChecks {
    pub epsilon: f64,
    pub b_t: f64,
    pub l_t: f64,
    pub lb_t: f64,
    /// 15.7ε
    pub leg_limit: f64,
    /// 25ε
    pub sum_limit: f64,
    pub class: SectionClass,
}

pub fn section_classification(s: &AngleSection, eps: f64) -> ClassificationChecks {
    let (b_t, l_t, lb_t) = (s.b / s.t, s.l / s.t, (s.l + s.b) / s.t);
    let (leg_limit, sum_limit) = (15.7 * eps, 25.0 * eps);
    let ok = b_t <= leg_limit && l_t <= leg_limit && lb_t <= sum_limit;
    ClassificationChecks {
        epsilon: eps,
        b_t,
        l_t,
        lb_t,
        leg_limit,
        sum_limit,
        class: if ok { SectionClass::FullyEffective } else { SectionClass::Slender },
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BucklingCurve {
    pub lambda: f64,
    pub phi: f64,
    /// φ + sqrt(φ² − λ²)
    pub c: f64,
    pub fcd: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BucklingChain {
    pub lambda_vv: f64,
    pub lambda_phi: f64,
    pub hinged: BucklingCurve,
    pub fixed: BucklingCurve,
    pub interpolated: BucklingCurve,
}

impl BucklingChain {
    pub fn curve(&self, c: Connection) -> &BucklingCurve {
        match c {
            Connection::Hinged => &self.hinged,
            Connection::Fixed => &self.fixed,
            Connection::Interpolated => &self.interpolated,
        }
    }
}

fn curve(lambda: f64, fy: f64) -> Result<BucklingCurve> {
    let phi = 0.5 * (1.0 + ALPHA * (lambda - 0.2) + lambda * lambda);
    let disc = phi * phi - lambda * lambda;
    if disc < 0.0 {
        return Err(Error::InvalidParameter("buckling curve: phi² < lambda²".into()));
    }
    let c = phi + libm::sqrt(disc);
    Ok(BucklingCurve { lambda, phi, c, fcd: fy / GAMMA_M0 / c })
}

/// Equivalent slenderness chain for an angle of length `lo` (m) buckling
/// with radius `r` (mm).
pub fn buckling_chain(s: &AngleSection, lo: f64, r: f64, mat: &Material) -> Result<BucklingChain> {
    if !(lo > 0.0 && r > 0.0) {
        return Err(Error::InvalidParameter("length and radius must be positive".into()));
    }
    let scale = epsilon(mat.fy) * core::f64::consts::PI * libm::sqrt(mat.e / mat.fy);
    let lambda_vv = lo * 1000.0 / r / scale;
    let lambda_phi = (s.l + s.b) / (2.0 * s.t) / scale;
    let eq = |k: [f64; 3]| libm::sqrt(k[0] + k[1] * lambda_vv * lambda_vv + k[2] * lambda_phi * lambda_phi);
    let lh = eq(Connection::Hinged.constants().unwrap());
    let lf = eq(Connection::Fixed.constants().unwrap());
    let le = lh - (lh - lf) * (0.15 / 0.35);
    Ok(BucklingChain {
        lambda_vv,
        lambda_phi,
        hinged: curve(lh, mat.fy)?,
        fixed: curve(lf, mat.fy)?,
        interpolated: curve(le, mat.fy)?,
    })
}

/// Design compressive stress f_cd (N/mm²) of one angle of the configuration.
pub fn compression_fcd(
    s: &AngleSection,
    config: Configuration,
    lo: f64,
    mat: &Material,
    conn: Connection,
) -> Result<f64> {
    Ok(buckling_chain(s, lo, config.radius(s), mat)?.curve(conn).fcd)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompressionChecks {
    pub classification: ClassificationChecks,
    pub chain: BucklingChain,
    /// f_cd·Ag of one angle, kN.
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trial {
    pub section: AngleSection,
    pub tension: Option<TensionChecks>,
    pub compression: Option<CompressionChecks>,
    pub radius: f64,
    /// Le·1000/r
    pub slenderness: f64,
    pub slenderness_limit: f64,
    /// Per-angle capacity, kN.
    pub capacity: f64,
    pub strength_ok: bool,
    pub slenderness_ok: bool,
}

impl Trial {
    pub fn passes(&self) -> bool {
        self.strength_ok && self.slenderness_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignEntry {
    pub member: u32,
    /// Design force, kN, tension positive.
    pub force: f64,
    /// m
    pub length: f64,
    pub mode: Mode,
    pub configuration: Configuration,
    pub material: Material,
    pub weld_size: f64,
    pub section: AngleSection,
    /// Every section examined, the accepted one last. Empty for zero-force members.
    pub trials: Vec<Trial>,
}

impl DesignEntry {
    pub fn per_angle_force(&self) -> f64 {
        self.force.abs() / self.configuration.count() as f64
    }

    pub fn total_area(&self) -> f64 {
        self.section.area * self.configuration.count() as f64
    }

    pub fn accepted(&self) -> Option<&Trial> {
        self.trials.last()
    }

    /// "2 x ISA 20 x 20 x 4"
    pub fn designation(&self) -> String {
        format!("{} x {}", self.configuration.count(), self.section.designation)
    }
}

fn trial(
    s: &AngleSection,
    mode: Mode,
    config: Configuration,
    per_angle: f64,
    lo: f64,
    mat: &Material,
    weld: f64,
) -> Result<Trial> {
    let radius = config.radius(s);
    let slenderness = lo * 1000.0 / radius;
    if mode == Mode::Compression {
        let classification = section_classification(s, epsilon(mat.fy));
        let chain = buckling_chain(s, lo, radius, mat)?;
        let capacity = chain.interpolated.fcd * s.area / 1000.0;
        Ok(Trial {
            section: s.clone(),
            strength_ok: classification.class == SectionClass::FullyEffective && capacity >= per_angle,
            compression: Some(CompressionChecks { classification, chain, capacity }),
            tension: None,
            radius,
            slenderness,
            slenderness_limit: COMPRESSION_SLENDERNESS_LIMIT,
            slenderness_ok: slenderness <= COMPRESSION_SLENDERNESS_LIMIT,
            capacity,
        })
    } else {
        let t = tension_checks(s, mat, weld);
        Ok(Trial {
            section: s.clone(),
            capacity: t.governing,
            strength_ok: t.governing >= per_angle,
            tension: Some(t),
            compression: None,
            radius,
            slenderness,
            slenderness_limit: TENSION_SLENDERNESS_LIMIT,
            slenderness_ok: slenderness <= TENSION_SLENDERNESS_LIMIT,
        })
    }
}

/// Picks the first section, by ascending area, that passes every check.
pub fn design_member(
    member: u32,
    force: f64,
    lo: f64,
    mat: &Material,
    config: Configuration,
    lib: &SectionLibrary,
) -> Result<DesignEntry> {
    let mode = Mode::of(force);
    let mut entry = DesignEntry {
        member,
        force,
        length: lo,
        mode,
        configuration: config,
        material: mat.clone(),
        weld_size: WELD_SIZE,
        section: lib.lightest().clone(),
        trials: Vec::new(),
    };
    if mode == Mode::ZeroForce {
        return Ok(entry);
    }
    let per_angle = entry.per_angle_force();
    for s in lib.sections() {
        let t = trial(s, mode, config, per_angle, lo, mat, WELD_SIZE)?;
        let ok = t.passes();
        entry.trials.push(t);
        if ok {
            entry.section = s.clone();
            return Ok(entry);
        }
    }
    Err(Error::DesignInfeasible { member })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignReport {
    pub entries: Vec<DesignEntry>,
}

impl DesignReport {
    pub fn entry(&self, member: u32) -> Option<&DesignEntry> {
        self.entries.iter().find(|e| e.member == member)
    }

    /// Σ Ag·L over members, mm²·m.
    pub fn area_length(&self) -> f64 {
        self.entries.iter().map(|e| e.total_area() * e.length).sum()
    }
}

/// Peripheral members get double angles, interior members single angles.
pub fn configurations(model: &TrussModel) -> BTreeMap<u32, Configuration> {
    classify_members(model)
        .into_iter()
        .map(|(id, c)| {
            let cfg = if c == Classification::Peripheral { Configuration::Double } else { Configuration::Single };
            (id, cfg)
        })
        .collect()
}

/// Designs every member for its envelope force over `results`.
pub fn design_truss(model: &TrussModel, results: &[AnalysisResult], lib: &SectionLibrary) -> Result<DesignReport> {
    let forces = if results.is_empty() { alloc::vec![0.0; model.members.len()] } else { envelope(results) };
    let configs = configurations(model);
    let entries = model
        .members
        .iter()
        .zip(forces)
        .map(|(m, f)| {
            let lo = model.length(m)?;
            design_member(m.id, f, lo, model.member_material(m)?, configs[&m.id], lib)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignReport { entries })
}
