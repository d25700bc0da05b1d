//! Chart documents and their SVG rendering.
//!
//! Schema (version 1). Every document is a JSON object with a `"schema"`
//! field. Borel pages:
//!
//! ```text
//! { "schema": 1, "kind": "borel-page", "coweight": c,
//!   "stem_min": 0, "stem_max": 30, "s_max": 15,
//!   "entries": [ { "stem", "s", "w", "t", "dimension",
//!                  "classes": [ { "label", "name", "cell", "summand"? } ],
//!                  "certified"? } ],
//!   "rho_lines": [ { "s", "source_stem", "source_index", "source",
//!                    "target_stem", "target_index", "target" } ],
//!   "provenance": { "version", "window", "naming", "splitting",
//!                   "certificates": [ … ], "uncertified": [ [stem, s] ] } }
//! ```
//!
//! `ext` charts use `"kind": "ext"` with `entries` of `{ "s", "t", "stem",
//! "dimension" }`. Entries are sorted, classes inside an entry are sorted by
//! label, and maps serialize in key order, so equal inputs give equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::borel::{BorelError, BorelExt, SPLITTING};
use crate::module::Summand;
use crate::resolution::limit::ColumnLimit;
use crate::resolution::ExtChart;
use crate::VERSION;

pub const CHART_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartClass {
    pub label: String,
    pub name: String,
    pub cell: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summand: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub stem: i32,
    pub s: u32,
    pub w: i32,
    pub t: i32,
    pub dimension: usize,
    pub classes: Vec<ChartClass>,
    /// `Some(false)` marks a bidegree whose limit certificate failed; absent
    /// when no certificate was computed there.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChartRhoLine {
    pub s: u32,
    pub source_stem: i32,
    pub source_index: usize,
    pub source: String,
    pub target_stem: i32,
    pub target_index: usize,
    pub target: String,
}

/// Limit certificate of one column, summarized.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCertificate {
    pub w: i32,
    pub depth: i32,
    pub deep: i32,
    pub s_max: u32,
    pub stabilized: bool,
    /// Bidegrees `(s, t')` that failed.
    pub failed: Vec<(u32, i32)>,
}

impl ColumnCertificate {
    pub fn from_limit(limit: &ColumnLimit, s_max: u32) -> Self {
        ColumnCertificate {
            w: limit.w,
            depth: limit.depth,
            deep: limit.deep,
            s_max,
            stabilized: limit.stabilized(),
            failed: limit.unstabilized(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub window: String,
    pub naming: String,
    pub splitting: String,
    pub certificates: Vec<ColumnCertificate>,
    pub uncertified: Vec<(i32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDocument {
    pub schema: u32,
    pub kind: String,
    pub coweight: i32,
    pub stem_min: i32,
    pub stem_max: i32,
    pub s_max: u32,
    pub entries: Vec<ChartEntry>,
    pub rho_lines: Vec<ChartRhoLine>,
    pub provenance: Provenance,
}

impl ChartDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("chart documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn entry(&self, stem: i32, s: u32) -> Option<&ChartEntry> {
        self.entries.iter().find(|e| e.stem == stem && e.s == s)
    }

    /// Internal consistency: entries in range with `w = stem − coweight`,
    /// every ρ-line joining existing classes.
    pub fn check(&self) -> Result<(), String> {
        for e in &self.entries {
            if !(self.stem_min..=self.stem_max).contains(&e.stem) || e.s > self.s_max {
                return Err(format!("entry ({}, {}) outside the declared range", e.stem, e.s));
            }
            if e.w != e.stem - self.coweight || e.t != e.stem + e.s as i32 {
                return Err(format!("entry ({}, {}) breaks the grading", e.stem, e.s));
            }
            if e.dimension != e.classes.len() {
                return Err(format!("entry ({}, {}) has {} classes for dimension {}", e.stem, e.s, e.classes.len(), e.dimension));
            }
        }
        for l in &self.rho_lines {
            let ok = |stem, index: usize, label: &str| {
                self.entry(stem, l.s)
                    .and_then(|e| e.classes.get(index))
                    .is_some_and(|c| c.label == label)
            };
            if !ok(l.source_stem, l.source_index, &l.source) || !ok(l.target_stem, l.target_index, &l.target) {
                return Err(format!("rho line {} -> {} references a missing class", l.source, l.target));
            }
            if l.target_stem != l.source_stem - 1 {
                return Err(format!("rho line {} -> {} does not lower the stem by one", l.source, l.target));
            }
        }
        Ok(())
    }
}

/// One coweight page for stems `0..=stem_max`. `certificates` holds limit
/// certificates by column, if any were computed.
pub fn borel_page(
    borel: &BorelExt<'_>,
    coweight: i32,
    stem_max: i32,
    certificates: &BTreeMap<i32, ColumnCertificate>,
) -> Result<ChartDocument, BorelError> {
    let s_max = borel.window().s_max;
    let mut entries = Vec::new();
    let mut rho_lines = Vec::new();
    let mut uncertified = Vec::new();
    for stem in 0..=stem_max {
        let w = stem - coweight;
        for s in 0..=s_max {
            let t = stem + s as i32;
            let g = borel.group(s, t, w)?;
            if g.dim == 0 {
                continue;
            }
            // Sorted by label; remember where each basis index went.
            let mut order: Vec<usize> = (0..g.dim).collect();
            order.sort_by(|&a, &b| g.basis[a].label().cmp(&g.basis[b].label()).then(a.cmp(&b)));
            let classes = order
                .iter()
                .map(|&i| {
                    let c = &g.basis[i].class;
                    ChartClass {
                        label: c.label(),
                        name: c.name.clone(),
                        cell: c.cell,
                        summand: c.summand.map(|s| Summand::tag(s).to_string()),
                    }
                })
                .collect();
            let tp = t - w - 1;
            let certified = certificates.get(&w).and_then(|c| {
                (s <= c.s_max).then(|| !c.failed.contains(&(s, tp)))
            });
            if certified == Some(false) {
                uncertified.push((stem, s));
            }
            entries.push(ChartEntry {
                stem,
                s,
                w,
                t,
                dimension: g.dim,
                classes,
                certified,
            });
            if stem >= 1 && borel.window().contains(s, t - 1, w - 1) {
                let target_order = {
                    let tg = borel.group(s, t - 1, w - 1)?;
                    let mut o: Vec<usize> = (0..tg.dim).collect();
                    o.sort_by(|&a, &b| tg.basis[a].label().cmp(&tg.basis[b].label()).then(a.cmp(&b)));
                    let mut pos = vec![0; tg.dim];
                    for (p, &i) in o.iter().enumerate() {
                        pos[i] = p;
                    }
                    pos
                };
                let mut source_pos = vec![0; g.dim];
                for (p, &i) in order.iter().enumerate() {
                    source_pos[i] = p;
                }
                for line in borel.rho_lines(s, t, w)? {
                    rho_lines.push(ChartRhoLine {
                        s,
                        source_stem: stem,
                        source_index: source_pos[line.source_index],
                        source: line.source,
                        target_stem: stem - 1,
                        target_index: target_order[line.target_index],
                        target: line.target,
                    });
                }
            }
        }
    }
    rho_lines.sort();
    let relevant: Vec<ColumnCertificate> = certificates
        .values()
        .filter(|c| (0..=stem_max).contains(&(c.w + coweight)))
        .cloned()
        .collect();
    Ok(ChartDocument {
        schema: CHART_SCHEMA_VERSION,
        kind: "borel-page".into(),
        coweight,
        stem_min: 0,
        stem_max,
        s_max,
        entries,
        rho_lines,
        provenance: Provenance {
            version: VERSION.to_string(),
            window: borel.window().to_string(),
            naming: "minimal cell".into(),
            splitting: SPLITTING.into(),
            certificates: relevant,
            uncertified,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtEntry {
    pub s: u32,
    pub t: i32,
    pub stem: i32,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtDocument {
    pub schema: u32,
    pub kind: String,
    pub module: String,
    pub s_max: u32,
    pub t_min: i32,
    pub t_max: i32,
    pub entries: Vec<ExtEntry>,
    pub version: String,
}

impl ExtDocument {
    pub fn from_chart(chart: &ExtChart) -> Self {
        ExtDocument {
            schema: CHART_SCHEMA_VERSION,
            kind: "ext".into(),
            module: chart.module.clone(),
            s_max: chart.s_max,
            t_min: chart.t_min,
            t_max: chart.t_max,
            entries: chart
                .dims
                .iter()
                .filter(|(_, &d)| d > 0)
                .map(|(&(s, t), &d)| ExtEntry {
                    s,
                    t,
                    stem: t - s as i32,
                    dimension: d,
                })
                .collect(),
            version: VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ext documents serialize");
        s.push('\n');
        s
    }
}

const CELL: f64 = 36.0;
const MARGIN: f64 = 48.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Stems run left to right, filtration bottom to top; the dots of one
/// bidegree sit side by side in label order. ρ-lines are red.
pub fn render_svg(doc: &ChartDocument) -> String {
    let cols = (doc.stem_max - doc.stem_min + 1) as f64;
    let rows = doc.s_max as f64 + 1.0;
    let width = 2.0 * MARGIN + cols * CELL;
    let height = 2.0 * MARGIN + rows * CELL;
    let x0 = |stem: i32| MARGIN + (stem - doc.stem_min) as f64 * CELL + CELL / 2.0;
    let y0 = |s: u32| height - MARGIN - s as f64 * CELL - CELL / 2.0;
    let dot = |stem: i32, s: u32, i: usize, n: usize| {
        let spread = (CELL * 0.7) / n.max(1) as f64;
        let x = x0(stem) + (i as f64 - (n as f64 - 1.0) / 2.0) * spread;
        (x, y0(s))
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN:.0}" y="24" font-size="14">coweight {}</text>"#,
        doc.coweight
    );
    for stem in doc.stem_min..=doc.stem_max {
        let x = x0(stem);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#eee"/>"##,
            MARGIN,
            height - MARGIN
        );
        if stem % 2 == 0 {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{stem}</text>"#,
                height - MARGIN + 14.0
            );
        }
    }
    for s in 0..=doc.s_max {
        let y = y0(s);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/>"##,
            MARGIN,
            width - MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{s}</text>"#,
            MARGIN - 6.0,
            y + 3.0
        );
    }
    let sizes: BTreeMap<(i32, u32), usize> = doc.entries.iter().map(|e| ((e.stem, e.s), e.dimension)).collect();
    for l in &doc.rho_lines {
        let (x1, y1) = dot(l.source_stem, l.s, l.source_index, sizes[&(l.source_stem, l.s)]);
        let (x2, y2) = dot(l.target_stem, l.s, l.target_index, sizes[&(l.target_stem, l.s)]);
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="red" stroke-width="1"/>"#
        );
    }
    for e in &doc.entries {
        for (i, c) in e.classes.iter().enumerate() {
            let (x, y) = dot(e.stem, e.s, i, e.dimension);
            let fill = if c.summand.as_deref() == Some(Summand::Sphere.tag()) { "#1f5fbf" } else { "black" };
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{fill}"><title>{}</title></circle>"#,
                esc(&c.label)
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{ly:.1}" font-size="6" transform="rotate(-50 {x:.1} {ly:.1})">{}</text>"#,
                esc(&c.label),
                ly = y - 5.0
            );
        }
        if e.certified == Some(false) {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" fill="orange" text-anchor="middle">⚠</text>"#,
                x0(e.stem),
                y0(e.s) + 14.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
