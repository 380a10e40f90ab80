//! Parametric truss layouts suggested for a given span.
//!
//! Rule table: spans up to 10 m get Fink, Pratt and Howe roof trusses,
//! spans up to 20 m a Pratt and a parallel-chord Warren with verticals,
//! longer spans a parallel-chord compound Pratt. Panel count is
//! ceil(span / 2 m), at least 2, and the height is span / 6. Generated
//! models carry a unit dead load at each top-chord joint, a hinge at the
//! left support, a roller at the right, and the default IS 800 load
//! combinations.

use serde::Serialize;
use trussweb_core::model::{
    Classification, CrossSection, LoadCase, LoadCombination, Material, Member, Node, Support, TrussModel,
};
use trussweb_core::Axis;

use crate::error::{Error, Result};
use crate::model_csv;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrussType {
    Fink,
    Pratt,
    Howe,
    WarrenWithVerticals,
    CompoundPratt,
}

impl TrussType {
    pub fn label(self) -> &'static str {
        match self {
            TrussType::Fink => "Fink",
            TrussType::Pratt => "Pratt",
            TrussType::Howe => "Howe",
            TrussType::WarrenWithVerticals => "Warren with verticals",
            TrussType::CompoundPratt => "Compound Pratt",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Suggestion {
    pub kind: TrussType,
    pub name: &'static str,
    pub span: f64,
    pub panels: usize,
    pub height: f64,
    /// Model document, see `model_csv`.
    pub model: String,
    #[serde(skip)]
    pub truss: TrussModel,
}

pub fn panel_count(span: f64) -> usize {
    ((span / 2.0).ceil() as usize).max(2)
}

pub fn suggest(span: f64) -> Result<Vec<Suggestion>> {
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::Request(format!("span must be a positive number of metres, got {span}")));
    }
    let kinds: &[TrussType] = if span <= 10.0 {
        &[TrussType::Fink, TrussType::Pratt, TrussType::Howe]
    } else if span <= 20.0 {
        &[TrussType::Pratt, TrussType::WarrenWithVerticals]
    } else {
        &[TrussType::CompoundPratt]
    };
    Ok(kinds.iter().map(|&k| build(k, span)).collect())
}

pub fn build(kind: TrussType, span: f64) -> Suggestion {
    let height = span / 6.0;
    let (truss, panels) = match kind {
        TrussType::Fink => (fink(span, height), 3),
        TrussType::Pratt => {
            let n = panel_count(span);
            (pitched(span, height, n, false), n)
        }
        TrussType::Howe => {
            let n = panel_count(span);
            (pitched(span, height, n, true), n)
        }
        TrussType::WarrenWithVerticals => {
            let n = panel_count(span);
            (parallel(span, height, n, false), n)
        }
        TrussType::CompoundPratt => {
            let n = panel_count(span);
            (parallel(span, height, n, true), n)
        }
    };
    Suggestion { kind, name: kind.label(), span, panels, height, model: model_csv::serialize(&truss), truss }
}

struct Builder {
    m: TrussModel,
}

impl Builder {
    fn new() -> Self {
        Builder {
            m: TrussModel {
                materials: vec![Material::steel()],
                sections: vec![CrossSection::default_section()],
                combinations: LoadCombination::is800_defaults(),
                ..Default::default()
            },
        }
    }

    fn node(&mut self, x: f64, y: f64, support: Support, loaded: bool) -> u32 {
        let id = self.m.nodes.len() as u32 + 1;
        let mut n = Node::new(id, x, y).with_support(support);
        if loaded {
            n = n.with_load(LoadCase::Dead, 0.0, -1.0);
        }
        self.m.nodes.push(n);
        id
    }

    fn bar(&mut self, i: u32, j: u32) {
        let id = self.m.members.len() as u32 + 1;
        self.m.members.push(Member {
            id,
            node_i: i,
            node_j: j,
            material: Material::steel().name,
            section: CrossSection::default_section().name,
            classification: Classification::Auto,
        });
    }
}

fn bottom_support(k: usize, n: usize) -> Support {
    if k == 0 {
        Support::Hinged
    } else if k == n {
        Support::Roller(Axis::X)
    } else {
        Support::Free
    }
}

/// Fink roof truss: three bottom panels, rafters split at their midpoints.
fn fink(span: f64, h: f64) -> TrussModel {
    let mut b = Builder::new();
    let b0 = b.node(0.0, 0.0, Support::Hinged, false);
    let b1 = b.node(span / 3.0, 0.0, Support::Free, false);
    let b2 = b.node(2.0 * span / 3.0, 0.0, Support::Free, false);
    let b3 = b.node(span, 0.0, Support::Roller(Axis::X), false);
    let q1 = b.node(span / 4.0, h / 2.0, Support::Free, true);
    let apex = b.node(span / 2.0, h, Support::Free, true);
    let q3 = b.node(3.0 * span / 4.0, h / 2.0, Support::Free, true);
    for (i, j) in [
        (b0, b1),
        (b1, b2),
        (b2, b3),
        (b0, q1),
        (q1, apex),
        (q1, b1),
        (apex, b1),
        (apex, q3),
        (apex, b2),
        (q3, b2),
        (q3, b3),
    ] {
        b.bar(i, j);
    }
    b.m
}

/// Triangular truss with verticals. Pratt diagonals run down towards the
/// middle, Howe diagonals up towards it. An odd panel count leaves a flat
/// middle panel.
fn pitched(span: f64, h: f64, n: usize, howe: bool) -> TrussModel {
    let mut b = Builder::new();
    let p = span / n as f64;
    let half = n / 2;
    let bottom: Vec<u32> = (0..=n).map(|k| b.node(k as f64 * p, 0.0, bottom_support(k, n), false)).collect();
    let mut top = vec![0u32; n + 1];
    for k in 1..n {
        let y = h * k.min(n - k) as f64 / half as f64;
        top[k] = b.node(k as f64 * p, y, Support::Free, true);
    }
    let top_at = |k: usize| if k == 0 || k == n { bottom[k] } else { top[k] };
    for k in 0..n {
        b.bar(bottom[k], bottom[k + 1]);
    }
    for k in 0..n {
        b.bar(top_at(k), top_at(k + 1));
    }
    for k in 1..n {
        b.bar(bottom[k], top[k]);
    }
    for k in 0..n {
        // Panel k spans k..k+1; the end panels are triangles already.
        if k == 0 || k == n - 1 {
            continue;
        }
        let left_half = k < half || (n % 2 == 1 && k == half);
        let (i, j) = match (left_half, howe) {
            (true, false) => (top[k], bottom[k + 1]),
            (true, true) => (bottom[k], top[k + 1]),
            (false, false) => (top[k + 1], bottom[k]),
            (false, true) => (bottom[k + 1], top[k]),
        };
        b.bar(i, j);
    }
    b.m
}

/// Parallel-chord truss with end and intermediate verticals. Warren
/// diagonals alternate; compound Pratt diagonals run down towards the middle.
fn parallel(span: f64, h: f64, n: usize, pratt: bool) -> TrussModel {
    let mut b = Builder::new();
    let p = span / n as f64;
    let bottom: Vec<u32> = (0..=n).map(|k| b.node(k as f64 * p, 0.0, bottom_support(k, n), false)).collect();
    let top: Vec<u32> = (0..=n).map(|k| b.node(k as f64 * p, h, Support::Free, true)).collect();
    for k in 0..n {
        b.bar(bottom[k], bottom[k + 1]);
        b.bar(top[k], top[k + 1]);
    }
    for k in 0..=n {
        b.bar(bottom[k], top[k]);
    }
    for k in 0..n {
        let down_right = if pratt { 2 * k + 1 < n } else { k % 2 == 0 };
        if down_right {
            b.bar(top[k], bottom[k + 1]);
        } else {
            b.bar(bottom[k], top[k + 1]);
        }
    }
    b.m
}
