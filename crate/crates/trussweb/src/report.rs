//! Human-readable reports: per-member IS 800 design text, the code versus
//! optimum comparison table, and static analysis tables.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use trussweb_core::design::{
    CompressionChecks, Configuration, DesignEntry, DesignReport, Mode, SectionClass, TensionChecks, Trial, GAMMA_M0,
};
use trussweb_core::model::TrussModel;
use trussweb_core::sizing::SizeOptResult;
use trussweb_core::truss::AnalysisResult;
use trussweb_core::Axis;

use crate::error::{Error, Result};

/// Stress assumed when sizing the first compression trial, N/mm².
const ASSUMED_FCD: f64 = 90.0;

/// Fixed-point display rounding half away from zero after dropping noise
/// below nine significant digits, so 3.75/2 prints as 1.88 like a hand
/// calculation.
struct R(f64);

impl std::fmt::Display for R {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let p = f.precision().unwrap_or(2);
        let mut v = self.0;
        if v != 0.0 && v.is_finite() {
            let k = 10f64.powi(8 - v.abs().log10().floor() as i32);
            v = (v * k).round() / k;
            let d = 10f64.powi(p as i32);
            v = (v * d).round() / d;
        }
        if v == 0.0 {
            v = 0.0;
        }
        let s = format!("{v:.p$}");
        let w = f.width().unwrap_or(0);
        match f.align() {
            Some(std::fmt::Alignment::Left) => write!(f, "{s:<w$}"),
            Some(std::fmt::Alignment::Center) => write!(f, "{s:^w$}"),
            _ => write!(f, "{s:>w$}"),
        }
    }
}

fn config_word(c: Configuration) -> &'static str {
    match c {
        Configuration::Single => "single",
        Configuration::Double => "double",
    }
}

fn cmp(ok: bool) -> &'static str {
    if ok {
        ">"
    } else {
        "<"
    }
}

pub fn design_report_text(report: &DesignReport) -> String {
    let mut out = String::from("Steel design of truss members as per IS 800:2007\n");
    for e in &report.entries {
        out.push('\n');
        member_block(&mut out, e);
    }
    out
}

fn member_block(o: &mut String, e: &DesignEntry) {
    let kind = match e.mode {
        Mode::Tension => "Tension Member",
        Mode::Compression => "Compression Member",
        Mode::ZeroForce => "Zero Force Member",
    };
    let m = &e.material;
    let _ = writeln!(o, "Steel Design of Member No:{} ({kind})\n", e.member);
    let _ = writeln!(o, "Yield Strength of Steel(fy): {:.2} N/mm^2", R(m.fy));
    let _ = writeln!(o, "Ultimate Strength of Steel(fu): {:.2} N/mm^2", R(m.fu));
    let _ = writeln!(o, "Force in the member(F): {:.2} kN", R(e.force.abs()));
    let _ = writeln!(o, "Length of the member(Lo): {:.2} m", R(e.length));
    let _ = writeln!(o, "Providing {} angle section", config_word(e.configuration));

    if e.mode == Mode::ZeroForce {
        let _ = writeln!(o, "Member carries no force; the minimum weight section is assigned.");
        closing(o, e);
        return;
    }

    let per_angle = e.per_angle_force();
    match e.mode {
        Mode::Tension => {
            let req = R(per_angle * 1000.0 / (m.fy / GAMMA_M0));
            let _ = writeln!(o, "Area of each Section Required to resist the force: {req:.2} mm^2");
            let _ = writeln!(o, "Assuming Weld Size: {} mm", e.weld_size);
            if let Some(t) = e.trials.first().and_then(|t| t.tension.as_ref()) {
                let _ = writeln!(o, "  Strength of Weld= weld_size*0.7*0.462*fu: {:.2} N/mm", R(t.weld_strength));
            }
        }
        _ => {
            let req = R(per_angle * 1000.0 / ASSUMED_FCD);
            let _ = writeln!(
                o,
                "Area of each Section Required to resist the force (assuming f_cd = {ASSUMED_FCD:.0} N/mm^2): {req:.2} mm^2"
            );
        }
    }

    let last = e.trials.len().saturating_sub(1);
    for (k, t) in e.trials.iter().enumerate() {
        o.push('\n');
        let _ = writeln!(o, "Section Selected: {} mm", t.section.size_label());
        if let Some(c) = &t.tension {
            tension_block(o, t, c, per_angle);
        }
        if let Some(c) = &t.compression {
            compression_block(o, t, c, per_angle);
        }
        slenderness_block(o, e, t);
        if k != last || !t.passes() {
            let _ = writeln!(o, "\nSection {} is not adequate; trying the next section.", t.section.size_label());
        }
    }
    closing(o, e);
}

fn tension_block(o: &mut String, t: &Trial, c: &TensionChecks, per_angle: f64) {
    let s = &t.section;
    let _ = writeln!(o, "  Gross Area of Section(Ag): {:.2} mm^2", R(s.area));
    let _ = writeln!(o, "  Net Area of Section(An): {:.2} mm^2\n", R(s.area));
    let _ = writeln!(o, "Strength of Selected Section:-");
    let _ = writeln!(o, "  Strength due to yielding of Gross Area=");
    let _ = writeln!(o, "  (0.91*Ag*fy)/1000={:.2} kN", R(c.yield_strength));
    let _ = writeln!(o, "  Strength due to rupture of Net Area=");
    let _ = writeln!(o, "  (0.8*0.8*An*fu)/1000={:.2} kN", R(c.rupture_strength));
    let _ = writeln!(o, "  Strength due to Block Shear:");
    let _ = writeln!(o, "    Weld length Lw=(0.91*Ag*fy)/weld strength: {:.2} mm", R(c.weld_length));
    let _ = writeln!(o, "    Avg=Avn=Lw*t: {:.2} mm^2  Atg=Atn=L*t: {:.2} mm^2", R(c.avg), R(c.atg));
    let _ = writeln!(o, "    Tb1=((0.525*Avg*fy+0.72*Atn*fu)/1000): {:.2} kN", R(c.tb1));
    let _ = writeln!(o, "    Tb2=(0.416*Avn*fu+0.91*Atg*fy)/1000: {:.2} kN", R(c.tb2));
    let _ = writeln!(o, "  Strength due to Block Shear:{:.2} kN\n", R(c.block_shear));
    let _ = writeln!(
        o,
        "Tensile Strength of Selected Section:{:.2} kN {} {:.2} kN",
        R(c.governing),
        cmp(t.strength_ok),
        R(per_angle)
    );
}

fn compression_block(o: &mut String, t: &Trial, c: &CompressionChecks, per_angle: f64) {
    let cl = &c.classification;
    let _ = writeln!(o, "  Area of Section(Ag): {:.2} mm^2\n", R(t.section.area));
    let _ = writeln!(o, "Check For Section Classification:-");
    let lim = |v: f64, l: f64| if v <= l { "<" } else { ">" };
    let _ = writeln!(o, "  Shorter Arm to thickness ratio");
    let _ = writeln!(o, "  b/t={:.2} {} (15.7*e={:.2})", R(cl.b_t), lim(cl.b_t, cl.leg_limit), R(cl.leg_limit));
    let _ = writeln!(o, "  Longer Arm to thickness ratio");
    let _ = writeln!(o, "  L/t={:.2} {} (15.7*e={:.2})", R(cl.l_t), lim(cl.l_t, cl.leg_limit), R(cl.leg_limit));
    let _ = writeln!(o, "  Sum of Shorter Arm and Longer Arm to thickness");
    let _ =
        writeln!(o, "  ratio: (L+B)/t={:.2} {} (25*e={:.2})", R(cl.lb_t), lim(cl.lb_t, cl.sum_limit), R(cl.sum_limit));
    if cl.class == SectionClass::FullyEffective {
        let _ = writeln!(o, "Hence full area of section is effective.\n");
    } else {
        let _ = writeln!(o, "Section is slender and is not used.\n");
    }

    let ch = &c.chain;
    let _ = writeln!(o, "Strength of Selected Section using equations:");
    let _ = writeln!(o, "  (Design Compressive Strength)");
    let _ = writeln!(o, "  f_cd=(fy/gamma_m0)/(phi+sqrt(phi^2-lambda^2))");
    let _ = writeln!(o, "  lambda_vv=((Lo/r)/(e*sqrt(pi^2*E/fy)))= {:.2}", R(ch.lambda_vv));
    let _ = writeln!(o, "  lambda_phi=(((L+B)/(2*t))/(e*sqrt(pi^2*E/fy)))= {:.2}", R(ch.lambda_phi));

    let curves = [
        ("Assuming Hinged Connection:", Some("k1=0.7 k2=0.6 k3=5"), "lambda_eh", &ch.hinged),
        ("Assuming Fixed Connection:", Some("k1=0.2 k2=0.35 k3=20"), "lambda_ef", &ch.fixed),
        ("Interpolating values for hinged and fixed connection:", None, "lambda_e", &ch.interpolated),
    ];
    for (title, ks, name, cv) in curves {
        let _ = writeln!(o, "\n{title}");
        match ks {
            Some(k) => {
                let _ = writeln!(o, "  {k}");
                let _ = writeln!(o, "  {name}=sqrt(k1+k2*lambda_vv^2+k3*lambda_phi^2)= {:.2}", R(cv.lambda));
            }
            None => {
                let _ = writeln!(o, "  {name}=lambda_eh-[(lambda_eh-lambda_ef)*(0.15/0.35)]= {:.2}", R(cv.lambda));
            }
        }
        let _ = writeln!(o, "  phi=0.5*[1+alpha*({name}-0.2)+{name}^2]= {:.2}", R(cv.phi));
        let _ = writeln!(o, "  c=(phi+sqrt(phi^2-{name}^2))= {:.2}", R(cv.c));
        let _ = writeln!(o, "  f_cd=(fy/gamma_m0)/c= {:.2} N/mm^2", R(cv.fcd));
    }
    let _ = writeln!(
        o,
        "\nDesign Compressive Force:(f_cd*A)={:.2} kN {} {:.2} kN",
        R(c.capacity),
        cmp(c.capacity >= per_angle),
        R(per_angle)
    );
}

fn slenderness_block(o: &mut String, e: &DesignEntry, t: &Trial) {
    let _ = writeln!(o, "\nCheck For Slenderness Ratio Limits:-");
    let _ = writeln!(o, "  Effective Length of the member=Le=(Lo*1.0):{:.2} m", R(e.length));
    let which = match e.configuration {
        Configuration::Single => "Minimum Radius of Gyration=Rmin",
        Configuration::Double => "Radius of Gyration of the pair=R",
    };
    let _ = writeln!(o, "  {which}:{:.2} mm", R(t.radius));
    let _ = writeln!(o, "  Slenderness Ratio of the member=");
    let sign = if t.slenderness_ok { "<" } else { ">" };
    let _ = writeln!(o, "  (Le*1000)/R:{:.2} {sign} {}", R(t.slenderness), t.slenderness_limit);
}

fn closing(o: &mut String, e: &DesignEntry) {
    let _ = writeln!(
        o,
        "\nProvide {} angle {} with weld size {} mm all\nalong all three edges.",
        e.configuration.count(),
        e.section.size_label(),
        e.weld_size
    );
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub member: u32,
    /// kN, tension positive.
    pub force: f64,
    /// m
    pub length: f64,
    pub designation: String,
    /// Total gross area of the chosen angles, mm².
    pub area: f64,
    /// mm²
    pub optimized_area: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

pub fn comparison_table(model: &TrussModel, report: &DesignReport, opt: &SizeOptResult) -> Result<ComparisonTable> {
    let ids: Vec<u32> = model.members.iter().map(|m| m.id).collect();
    let design_ids: Vec<u32> = report.entries.iter().map(|e| e.member).collect();
    if ids != design_ids || opt.areas.len() != ids.len() {
        return Err(Error::Request("design report, optimum and model cover different members".into()));
    }
    let rows = report
        .entries
        .iter()
        .zip(&opt.areas)
        .map(|(e, a)| ComparisonRow {
            member: e.member,
            force: e.force,
            length: e.length,
            designation: e.designation(),
            area: e.total_area(),
            optimized_area: *a,
        })
        .collect();
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    pub const HEADER: [&'static str; 6] =
        ["Member", "Force (kN, +tension)", "Length (m)", "ISA L x B x t (mm)", "Area (mm^2)", "Optimized Area (mm^2)"];

    pub fn to_text(&self) -> String {
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.member.to_string(),
                    format!("{:.2}", R(r.force)),
                    format!("{:.2}", R(r.length)),
                    r.designation.clone(),
                    format!("{:.0}", R(r.area)),
                    format!("{:.2}", R(r.optimized_area)),
                ]
            })
            .collect();
        let mut width = Self::HEADER.map(str::len);
        for c in &cells {
            for k in 0..6 {
                width[k] = width[k].max(c[k].len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, c: &[String; 6]| {
            for k in 0..6 {
                if k == 3 {
                    let _ = write!(out, "  {:<w$}", c[k], w = width[k]);
                } else {
                    let _ = write!(out, "{}{:>w$}", if k == 0 { "" } else { "  " }, c[k], w = width[k]);
                }
            }
            out.push('\n');
        };
        line(&mut out, &Self::HEADER.map(String::from));
        for c in &cells {
            line(&mut out, c);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["member", "force_kN", "length_m", "designation", "area_mm2", "optimized_area_mm2"])
            .expect("in-memory csv write");
        for r in &self.rows {
            w.write_record([
                r.member.to_string(),
                format!("{:.2}", R(r.force)),
                format!("{:.2}", R(r.length)),
                r.designation.clone(),
                format!("{:.0}", R(r.area)),
                format!("{:.2}", R(r.optimized_area)),
            ])
            .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8")
    }
}

/// Forces, displacements and reactions for each combination.
pub fn analysis_text(model: &TrussModel, results: &[AnalysisResult]) -> String {
    let mut o = String::from("Static analysis (forces in kN, tension positive; displacements in mm)\n");
    for r in results {
        let _ = writeln!(o, "\nLoad combination: {}\n", r.combination);
        let _ = writeln!(o, "{:>8} {:>8} {:>8} {:>14}", "Member", "Node i", "Node j", "Force");
        for (m, f) in model.members.iter().zip(&r.forces) {
            let _ = writeln!(o, "{:>8} {:>8} {:>8} {:>14.4}", m.id, m.node_i, m.node_j, R(*f));
        }
        let _ = writeln!(o, "\n{:>8} {:>14} {:>14}", "Node", "ux", "uy");
        for (n, d) in model.nodes.iter().zip(&r.displacements) {
            let _ = writeln!(o, "{:>8} {:>14.6} {:>14.6}", n.id, R(d[0] * 1000.0), R(d[1] * 1000.0));
        }
        let _ = writeln!(o, "\n{:>8} {:>6} {:>14}", "Node", "Axis", "Reaction");
        for re in &r.reactions {
            let axis = match re.axis {
                Axis::X => "x",
                Axis::Y => "y",
            };
            let _ = writeln!(o, "{:>8} {:>6} {:>14.4}", re.node, axis, R(re.value));
        }
    }
    o
}
