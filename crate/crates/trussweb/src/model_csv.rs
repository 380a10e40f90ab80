//! Sectioned CSV document holding a complete truss model.
//!
//! ```text
//! #trussweb-model,1
//! [NODES]
//! id,x,y,support,roller_axis,DLx,DLy,LLx,LLy,WLx,WLy
//! 1,0,0,hinged,,0,0,0,0,0,0
//! [MATERIALS]
//! name,E,nu,fy,fu
//! [SECTIONS]
//! name,area
//! [MEMBERS]
//! id,ni,nj,material,section,classification
//! [COMBOS]
//! name,fdl,fll,fwl
//! ```
//!
//! Units follow the core model: m, kN, N/mm², m². `support` is one of
//! free, hinged, roller; a roller names the axis it rolls along in
//! `roller_axis` (x or y). Classification is auto, peripheral or interior.
//! Fields may be quoted per RFC 4180. Blank lines are ignored.

use std::collections::BTreeSet;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use trussweb_core::model::{
    Classification, CrossSection, LoadCombination, Material, Member, Node, Support, TrussModel,
};
use trussweb_core::Axis;

use crate::error::{Error, Result};

pub const MAGIC: &str = "#trussweb-model";
pub const VERSION: &str = "1";

const NODES: [&str; 11] = ["id", "x", "y", "support", "roller_axis", "DLx", "DLy", "LLx", "LLy", "WLx", "WLy"];
const MATERIALS: [&str; 5] = ["name", "E", "nu", "fy", "fu"];
const SECTIONS: [&str; 2] = ["name", "area"];
const MEMBERS: [&str; 6] = ["id", "ni", "nj", "material", "section", "classification"];
const COMBOS: [&str; 4] = ["name", "fdl", "fll", "fwl"];

/// Shortest text that parses back to the same value.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn support_text(s: Support) -> (&'static str, &'static str) {
    match s {
        Support::Free => ("free", ""),
        Support::Hinged => ("hinged", ""),
        Support::Roller(Axis::X) => ("roller", "x"),
        Support::Roller(Axis::Y) => ("roller", "y"),
    }
}

fn classification_text(c: Classification) -> &'static str {
    match c {
        Classification::Auto => "auto",
        Classification::Peripheral => "peripheral",
        Classification::Interior => "interior",
    }
}

pub fn serialize(model: &TrussModel) -> String {
    let mut w = WriterBuilder::new().flexible(true).terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    let mut row = |fields: &[String]| w.write_record(fields).expect("in-memory csv write");
    let s = |v: &str| v.to_string();
    row(&[s(MAGIC), s(VERSION)]);

    row(&[s("[NODES]")]);
    row(&NODES.map(s));
    for n in &model.nodes {
        let (sup, axis) = support_text(n.support);
        let mut f = vec![n.id.to_string(), fmt_num(n.x), fmt_num(n.y), s(sup), s(axis)];
        f.extend(n.loads.iter().flatten().map(|v| fmt_num(*v)));
        row(&f);
    }

    row(&[s("[MATERIALS]")]);
    row(&MATERIALS.map(s));
    for m in &model.materials {
        row(&[m.name.clone(), fmt_num(m.e), fmt_num(m.nu), fmt_num(m.fy), fmt_num(m.fu)]);
    }

    row(&[s("[SECTIONS]")]);
    row(&SECTIONS.map(s));
    for c in &model.sections {
        row(&[c.name.clone(), fmt_num(c.area)]);
    }

    row(&[s("[MEMBERS]")]);
    row(&MEMBERS.map(s));
    for m in &model.members {
        row(&[
            m.id.to_string(),
            m.node_i.to_string(),
            m.node_j.to_string(),
            m.material.clone(),
            m.section.clone(),
            s(classification_text(m.classification)),
        ]);
    }

    row(&[s("[COMBOS]")]);
    row(&COMBOS.map(s));
    for c in &model.combinations {
        row(&[c.name.clone(), fmt_num(c.factor_dl), fmt_num(c.factor_ll), fmt_num(c.factor_wl)]);
    }

    let bytes = w.into_inner().expect("in-memory csv flush");
    String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8")
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Section {
    Nodes,
    Materials,
    Sections,
    Members,
    Combos,
}

impl Section {
    fn from_marker(s: &str) -> Option<Section> {
        Some(match s {
            "[NODES]" => Section::Nodes,
            "[MATERIALS]" => Section::Materials,
            "[SECTIONS]" => Section::Sections,
            "[MEMBERS]" => Section::Members,
            "[COMBOS]" => Section::Combos,
            _ => return None,
        })
    }

    fn columns(self) -> &'static [&'static str] {
        match self {
            Section::Nodes => &NODES,
            Section::Materials => &MATERIALS,
            Section::Sections => &SECTIONS,
            Section::Members => &MEMBERS,
            Section::Combos => &COMBOS,
        }
    }
}

struct Row<'a> {
    rec: &'a StringRecord,
    line: u64,
}

impl Row<'_> {
    fn text(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("")
    }

    fn err(&self, col: usize, message: impl Into<String>) -> Error {
        Error::parse(self.line, Some(col + 1), message)
    }

    fn num(&self, col: usize, name: &str) -> Result<f64> {
        let t = self.text(col).trim();
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(col, format!("{name}: expected a finite number, found {t:?}"))),
        }
    }

    fn id(&self, col: usize, name: &str) -> Result<u32> {
        let t = self.text(col).trim();
        t.parse::<u32>().map_err(|_| self.err(col, format!("{name}: expected a non-negative integer, found {t:?}")))
    }

    fn name(&self, col: usize, what: &str) -> Result<String> {
        let t = self.text(col);
        if t.is_empty() {
            return Err(self.err(col, format!("{what} must not be empty")));
        }
        Ok(t.to_string())
    }
}

fn blank(rec: &StringRecord) -> bool {
    rec.iter().all(|f| f.trim().is_empty())
}

/// 1-based line of the first content at or after a byte offset. Record
/// positions from the reader include any skipped empty lines.
fn line_at(text: &str, byte: u64) -> u64 {
    let b = text.as_bytes();
    let mut end = (byte as usize).min(b.len());
    while end < b.len() && (b[end] == b'\n' || b[end] == b'\r') {
        end += 1;
    }
    b[..end].iter().filter(|b| **b == b'\n').count() as u64 + 1
}

pub fn parse(text: &str) -> Result<TrussModel> {
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut model = TrussModel::default();
    let mut seen = BTreeSet::new();
    let mut current: Option<Section> = None;
    let mut expect_header = false;
    let mut marker_line = 0;
    let mut magic = false;
    let mut rec = StringRecord::new();
    loop {
        let more = rdr.read_record(&mut rec).map_err(|e| {
            let line = e.position().map(|p| line_at(text, p.byte())).unwrap_or(0);
            Error::parse(line, None, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = rec.position().map(|p| line_at(text, p.byte())).unwrap_or(0);
        if blank(&rec) {
            continue;
        }
        let first = rec.get(0).unwrap_or("").trim();
        if !magic {
            if first != MAGIC {
                return Err(Error::parse(line, Some(1), format!("document must start with {MAGIC},{VERSION}")));
            }
            let v = rec.get(1).unwrap_or("").trim();
            if v != VERSION {
                return Err(Error::parse(line, Some(2), format!("unsupported format version {v:?}")));
            }
            magic = true;
            continue;
        }
        // Data rows always have several fields, so a name like "[x]" in the
        // first column is not a marker.
        if first.starts_with('[') && rec.iter().skip(1).all(|f| f.trim().is_empty()) {
            let s = Section::from_marker(first)
                .ok_or_else(|| Error::parse(line, Some(1), format!("unknown section header {first}")))?;
            if !seen.insert(s) {
                return Err(Error::parse(line, Some(1), format!("section {first} appears twice")));
            }
            current = Some(s);
            expect_header = true;
            marker_line = line;
            continue;
        }
        let Some(section) = current else {
            return Err(Error::parse(line, Some(1), "row outside any section"));
        };
        let cols = section.columns();
        if expect_header {
            for (k, want) in cols.iter().enumerate() {
                let got = rec.get(k).unwrap_or("").trim();
                if got != *want {
                    return Err(Error::parse(line, Some(k + 1), format!("expected column {want:?}, found {got:?}")));
                }
            }
            if rec.len() != cols.len() {
                return Err(Error::parse(line, Some(cols.len() + 1), "unexpected extra column"));
            }
            expect_header = false;
            continue;
        }
        if rec.len() != cols.len() {
            return Err(Error::parse(
                line,
                Some(rec.len().min(cols.len()) + 1),
                format!("expected {} fields, found {}", cols.len(), rec.len()),
            ));
        }
        let r = Row { rec: &rec, line };
        match section {
            Section::Nodes => model.nodes.push(parse_node(&r)?),
            Section::Materials => model.materials.push(Material {
                name: r.name(0, "material name")?,
                e: r.num(1, "E")?,
                nu: r.num(2, "nu")?,
                fy: r.num(3, "fy")?,
                fu: r.num(4, "fu")?,
            }),
            Section::Sections => {
                model.sections.push(CrossSection { name: r.name(0, "section name")?, area: r.num(1, "area")? })
            }
            Section::Members => {
                let classification = match r.text(5).trim() {
                    "auto" | "" => Classification::Auto,
                    "peripheral" => Classification::Peripheral,
                    "interior" => Classification::Interior,
                    other => return Err(r.err(5, format!("unknown classification {other:?}"))),
                };
                model.members.push(Member {
                    id: r.id(0, "id")?,
                    node_i: r.id(1, "ni")?,
                    node_j: r.id(2, "nj")?,
                    material: r.name(3, "material")?,
                    section: r.name(4, "section")?,
                    classification,
                });
            }
            Section::Combos => model.combinations.push(LoadCombination {
                name: r.name(0, "combination name")?,
                factor_dl: r.num(1, "fdl")?,
                factor_ll: r.num(2, "fll")?,
                factor_wl: r.num(3, "fwl")?,
            }),
        }
    }
    if !magic {
        return Err(Error::parse(1, Some(1), format!("document must start with {MAGIC},{VERSION}")));
    }
    if expect_header {
        return Err(Error::parse(marker_line, None, "section header without column header"));
    }
    Ok(model)
}

fn parse_node(r: &Row) -> Result<Node> {
    let axis = match r.text(4).trim() {
        "" => None,
        "x" | "X" => Some(Axis::X),
        "y" | "Y" => Some(Axis::Y),
        other => return Err(r.err(4, format!("roller_axis must be x or y, found {other:?}"))),
    };
    let support = match r.text(3).trim() {
        "free" | "" => Support::Free,
        "hinged" => Support::Hinged,
        "roller" => Support::Roller(axis.ok_or_else(|| r.err(4, "roller needs roller_axis x or y"))?),
        other => return Err(r.err(3, format!("unknown support {other:?}"))),
    };
    if axis.is_some() && !matches!(support, Support::Roller(_)) {
        return Err(r.err(4, "roller_axis given for a node that is not a roller"));
    }
    let mut loads = [[0.0; 2]; 3];
    let names = ["DLx", "DLy", "LLx", "LLy", "WLx", "WLy"];
    for (k, name) in names.iter().enumerate() {
        loads[k / 2][k % 2] = r.num(5 + k, name)?;
    }
    Ok(Node { id: r.id(0, "id")?, x: r.num(1, "x")?, y: r.num(2, "y")?, support, loads })
}
