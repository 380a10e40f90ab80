//! Equal and unequal angle catalogs.
//!
//! CSV columns: `designation,L,B,t,Ag,r_min,weight,r_pair` with legs and
//! thickness in mm, Ag in mm², radii in mm and weight in kg/m. `r_pair` is
//! the radius of two angles back to back on a 10 mm gusset about the axis
//! in the plane of the gusset.

use serde::Deserialize;
use trussweb_core::design::{AngleSection, SectionLibrary};

use crate::error::{Error, Result};

pub const DEFAULT_CSV: &str = include_str!("../data/isa_default.csv");
pub const FULL_CSV: &str = include_str!("../data/isa_full.csv");

#[derive(Deserialize)]
struct Row {
    designation: String,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "B")]
    b: f64,
    t: f64,
    #[serde(rename = "Ag")]
    area: f64,
    r_min: f64,
    weight: f64,
    r_pair: f64,
}

pub fn parse(text: &str) -> Result<SectionLibrary> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut sections = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let r = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(line, None, e.to_string())
        })?;
        sections.push(AngleSection {
            designation: r.designation,
            l: r.l,
            b: r.b,
            t: r.t,
            area: r.area,
            r_min: r.r_min,
            weight: r.weight,
            r_pair: r.r_pair,
        });
    }
    Ok(SectionLibrary::new(sections)?)
}

/// Catalog matching the sections available to the published design tables.
pub fn default_library() -> SectionLibrary {
    parse(DEFAULT_CSV).expect("bundled catalog parses")
}

/// Every rolled angle size from 25 x 25 x 3 up.
pub fn full_library() -> SectionLibrary {
    parse(FULL_CSV).expect("bundled catalog parses")
}

/// "default", "full", or a path to a catalog CSV.
pub fn load(name: &str) -> Result<SectionLibrary> {
    match name {
        "default" => Ok(default_library()),
        "full" => Ok(full_library()),
        path => parse(&std::fs::read_to_string(path)?),
    }
}
