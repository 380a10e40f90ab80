//! Request validation and the analysis pipeline behind a job.
//!
//! `run` is a pure function of the request: identical requests produce
//! byte-identical artifacts.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use trussweb_core::design::{design_truss, DesignReport, Mode, SectionLibrary};
use trussweb_core::gusset::{optimize_gusset, GussetProblem, DEFAULT_MESH, DEFAULT_THICKNESS};
use trussweb_core::model::{validate, TrussModel};
use trussweb_core::sizing::{optimize_sizes, SizeOptProblem, SizeOptResult, KG_PER_MM2_M};
use trussweb_core::topopt::TopOptParams;
use trussweb_core::truss::{solve_all, AnalysisResult};

use crate::catalog;
use crate::error::{Error, Result};
use crate::image::Gray;
use crate::model_csv;
use crate::report::{analysis_text, comparison_table, design_report_text, ComparisonTable};

/// Largest gusset mesh accepted from a request, elements per side.
pub const MAX_MESH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Static,
    Is800Design,
    SizeOpt,
    GussetTopopt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Catalog {
    #[default]
    Default,
    Full,
}

impl Catalog {
    pub fn library(self) -> SectionLibrary {
        match self {
            Catalog::Default => catalog::default_library(),
            Catalog::Full => catalog::full_library(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopOptSettings {
    pub volfrac: f64,
    pub nelx: usize,
    pub nely: usize,
    /// Plate thickness, m.
    pub thickness: f64,
}

impl Default for TopOptSettings {
    fn default() -> Self {
        TopOptSettings { volfrac: 0.5, nelx: DEFAULT_MESH, nely: DEFAULT_MESH, thickness: DEFAULT_THICKNESS }
    }
}

fn default_analyses() -> BTreeSet<Analysis> {
    BTreeSet::from([Analysis::Static])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisRequest {
    /// Model document.
    pub model: String,
    #[serde(default = "default_analyses")]
    pub analyses: BTreeSet<Analysis>,
    #[serde(default)]
    pub topopt: TopOptSettings,
    #[serde(default)]
    pub catalog: Catalog,
}

impl AnalysisRequest {
    pub fn new(model: &TrussModel, analyses: &[Analysis]) -> Self {
        AnalysisRequest {
            model: model_csv::serialize(model),
            analyses: analyses.iter().copied().collect(),
            topopt: TopOptSettings::default(),
            catalog: Catalog::Default,
        }
    }

    /// Parses and checks everything that can be checked without solving.
    /// The error lists every violation found.
    pub fn check(&self) -> std::result::Result<TrussModel, Vec<String>> {
        let mut v = Vec::new();
        if self.analyses.is_empty() {
            v.push("select at least one analysis".to_string());
        }
        for (a, name) in [(Analysis::SizeOpt, "size_opt"), (Analysis::GussetTopopt, "gusset_topopt")] {
            if self.analyses.contains(&a) && !self.analyses.contains(&Analysis::Static) {
                v.push(format!("{name} requires static"));
            }
        }
        let t = &self.topopt;
        if let Err(e) = TopOptParams::with_volfrac(t.volfrac).check() {
            v.push(format!("topopt: {e}"));
        }
        if t.nelx != t.nely {
            v.push("topopt: gusset plates are square, nelx must equal nely".into());
        }
        if !(2..=MAX_MESH).contains(&t.nelx) {
            v.push(format!("topopt: nelx must lie in 2..={MAX_MESH}"));
        }
        if !(t.thickness > 0.0 && t.thickness.is_finite()) {
            v.push("topopt: thickness must be positive".into());
        }
        let model = match model_csv::parse(&self.model) {
            Ok(m) => {
                v.extend(validate(&m));
                Some(m)
            }
            Err(e) => {
                v.push(format!("model: {e}"));
                None
            }
        };
        match model {
            Some(m) if v.is_empty() => Ok(m),
            _ => Err(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub member: u32,
    pub force: f64,
    pub length: f64,
    pub mode: Mode,
    pub designation: String,
    pub area: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeOptSummary {
    pub areas: Vec<f64>,
    /// kg
    pub weight: f64,
    /// kg, the IS 800 design's angles.
    pub code_weight: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kappa_single: f64,
    pub kappa_double: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GussetSummary {
    pub node: u32,
    pub combination: String,
    /// m
    pub side: f64,
    pub standoff: f64,
    pub nel: usize,
    pub iterations: usize,
    pub converged: bool,
    pub compliance: f64,
    pub volume: f64,
    pub mirror_asymmetry: f64,
    pub image: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub analyses: Vec<Analysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<AnalysisResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<Vec<DesignRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_opt: Option<SizeOptSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonTable>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub gussets: Vec<GussetSummary>,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub summary: Summary,
    /// Artifact name to bytes. Names may contain one '/'.
    pub files: BTreeMap<String, Vec<u8>>,
}

pub const MODEL_FILE: &str = "model.csv";
pub const ANALYSIS_FILE: &str = "analysis.txt";
pub const REPORT_FILE: &str = "report.txt";
pub const COMPARISON_TEXT: &str = "comparison.txt";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const RESULTS_FILE: &str = "results.json";

pub fn gusset_file(node: u32) -> String {
    format!("gusset/{node}.pgm")
}

pub fn run(request: &AnalysisRequest, threads: usize) -> Result<Outcome> {
    let model = request.check().map_err(Error::Invalid)?;
    let mut out = Outcome::default();
    let want = |a| request.analyses.contains(&a);
    out.summary.analyses = request.analyses.iter().copied().collect();
    out.files.insert(MODEL_FILE.into(), model_csv::serialize(&model).into_bytes());

    let results = solve_all(&model)?;
    out.files.insert(ANALYSIS_FILE.into(), analysis_text(&model, &results).into_bytes());

    let needs_design = want(Analysis::Is800Design) || want(Analysis::SizeOpt) || want(Analysis::GussetTopopt);
    let lib = request.catalog.library();
    let design = if needs_design { Some(design_truss(&model, &results, &lib)?) } else { None };

    if let (true, Some(d)) = (want(Analysis::Is800Design), &design) {
        out.files.insert(REPORT_FILE.into(), design_report_text(d).into_bytes());
        out.summary.design = Some(
            d.entries
                .iter()
                .map(|e| DesignRow {
                    member: e.member,
                    force: e.force,
                    length: e.length,
                    mode: e.mode,
                    designation: e.designation(),
                    area: e.total_area(),
                    trials: e.trials.len(),
                })
                .collect(),
        );
    }

    if let (true, Some(d)) = (want(Analysis::SizeOpt), &design) {
        let opt = size_opt(&model, d, &lib)?;
        let table = comparison_table(&model, d, &opt)?;
        out.files.insert(COMPARISON_TEXT.into(), table.to_text().into_bytes());
        out.files.insert(COMPARISON_CSV.into(), table.to_csv().into_bytes());
        let code_weight = d.area_length() * KG_PER_MM2_M;
        out.summary.size_opt = Some(SizeOptSummary {
            areas: opt.areas.clone(),
            weight: opt.weight,
            code_weight,
            iterations: opt.iterations,
            converged: opt.converged,
            kappa_single: opt.radius.single,
            kappa_double: opt.radius.double,
        });
        out.summary.comparison = Some(table);
    }

    if let (true, Some(d)) = (want(Analysis::GussetTopopt), &design) {
        for (g, bytes) in gussets(&model, &results, d, &request.topopt, threads)? {
            out.files.insert(g.image.clone(), bytes);
            out.summary.gussets.push(g);
        }
    }

    if want(Analysis::Static) {
        out.summary.results = Some(results);
    }
    let json = serde_json::to_vec_pretty(&out.summary)?;
    out.files.insert(RESULTS_FILE.into(), json);
    Ok(out)
}

pub fn size_opt(model: &TrussModel, design: &DesignReport, lib: &SectionLibrary) -> Result<SizeOptResult> {
    Ok(optimize_sizes(&SizeOptProblem::from_design(model, design, lib)?)?)
}

/// Combination with the largest member force at the joint; first wins ties.
fn governing(model: &TrussModel, results: &[AnalysisResult], node: u32) -> usize {
    let mut best = (0, -1.0);
    for (k, r) in results.iter().enumerate() {
        let f = model
            .members
            .iter()
            .zip(&r.forces)
            .filter(|(m, _)| m.node_i == node || m.node_j == node)
            .map(|(_, f)| f.abs())
            .fold(0.0, f64::max);
        if f > best.1 {
            best = (k, f);
        }
    }
    best.0
}

/// Joints with at least two members.
pub fn gusset_problems(
    model: &TrussModel,
    results: &[AnalysisResult],
    design: &DesignReport,
    settings: &TopOptSettings,
) -> Result<Vec<(GussetProblem, String)>> {
    // The connected (longer) leg sets the footprint width.
    let widths: BTreeMap<u32, f64> = design.entries.iter().map(|e| (e.member, e.section.l / 1000.0)).collect();
    let mut out = Vec::new();
    for n in &model.nodes {
        let degree = model.members.iter().filter(|m| m.node_i == n.id || m.node_j == n.id).count();
        if degree < 2 {
            continue;
        }
        let r = &results[governing(model, results, n.id)];
        let g = GussetProblem::from_joint(model, r, n.id, &widths, settings.nelx, settings.thickness)?;
        out.push((g, r.combination.clone()));
    }
    Ok(out)
}

fn gussets(
    model: &TrussModel,
    results: &[AnalysisResult],
    design: &DesignReport,
    settings: &TopOptSettings,
    threads: usize,
) -> Result<Vec<(GussetSummary, Vec<u8>)>> {
    let problems = gusset_problems(model, results, design, settings)?;
    let params = TopOptParams::with_volfrac(settings.volfrac);
    let solve = |(g, combination): &(GussetProblem, String)| -> Result<(GussetSummary, Vec<u8>)> {
        let f = optimize_gusset(g, &params)?;
        let summary = GussetSummary {
            node: g.node,
            combination: combination.clone(),
            side: g.side,
            standoff: g.standoff,
            nel: g.nel,
            iterations: f.iterations,
            converged: f.converged,
            compliance: f.compliance,
            volume: f.mean(),
            mirror_asymmetry: f.mirror_asymmetry(),
            image: gusset_file(g.node),
        };
        Ok((summary, Gray::from_field(&f, 1).to_pgm()))
    };
    let threads = threads.max(1);
    let mut out = Vec::with_capacity(problems.len());
    for chunk in problems.chunks(threads) {
        let done: Vec<Result<_>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|p| s.spawn(|| solve(p))).collect();
            handles.into_iter().map(|h| h.join().expect("gusset worker panicked")).collect()
        });
        for d in done {
            out.push(d?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use trussweb_core::fixtures;

    #[test]
    fn request_checks_collect_every_violation() {
        let mut r = AnalysisRequest::new(&TrussModel::default(), &[Analysis::SizeOpt]);
        r.topopt.volfrac = 1.2;
        let v = r.check().unwrap_err();
        assert!(v.iter().any(|s| s.contains("size_opt requires static")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("volfrac")), "{v:?}");
        assert!(v.iter().any(|s| s.contains("no members")), "{v:?}");
    }

    #[test]
    fn json_defaults() {
        let r: AnalysisRequest = serde_json::from_str(r#"{"model": "x"}"#).unwrap();
        assert_eq!(r.analyses, BTreeSet::from([Analysis::Static]));
        assert_eq!(r.topopt, TopOptSettings::default());
        let bad = serde_json::from_str::<AnalysisRequest>(r#"{"model": "x", "analyses": ["dance"]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn static_only_job() {
        let r = AnalysisRequest::new(&fixtures::pratt_verification(), &[Analysis::Static]);
        let o = run(&r, 1).unwrap();
        let names: Vec<&str> = o.files.keys().map(String::as_str).collect();
        assert_eq!(names, [ANALYSIS_FILE, MODEL_FILE, RESULTS_FILE]);
        let res = o.summary.results.unwrap();
        // Height 2.31 m rather than 4/√3, so the diagonals are just under 6.
        assert!((res[0].forces[5] - 6.0).abs() < 0.01);
        assert!(res[0].forces[9].abs() < 1e-9);
    }

    #[test]
    fn coarse_gussets_cover_every_joint() {
        let mut r = AnalysisRequest::new(&fixtures::roof_truss(10.0), &[Analysis::Static, Analysis::GussetTopopt]);
        r.topopt.nelx = 16;
        r.topopt.nely = 16;
        let o = run(&r, 2).unwrap();
        assert_eq!(o.summary.gussets.len(), 7);
        for g in &o.summary.gussets {
            assert!(o.files.contains_key(&g.image));
            assert!((g.volume - 0.5).abs() < 1e-3);
        }
        let again = run(&r, 1).unwrap();
        assert_eq!(o.files, again.files);
    }
}
