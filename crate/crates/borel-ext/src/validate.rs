//! Validation suites shared by the `validate` command and the acceptance
//! test. Every check yields a [`CheckReport`]; a suite passes when all do.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::borel::{lin_check, BorelExt, BorelWindow};
use crate::cobar::{check_d_squared, cobar_ext, dualize, COBAR_S_MAX, COBAR_T_MAX};
use crate::engine::Engine;
use crate::module::{dictionary_model, stunted_module, GradedModule, Variant};
use crate::resolution::limit::{certified_limit, DEPTH_CAP};
use crate::sseq::{structure_check, Ahss};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckReport {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>, started: Instant) -> Self {
        CheckReport {
            name: name.into(),
            passed,
            detail: detail.into(),
            seconds: (started.elapsed().as_secs_f64() * 100.0).round() / 100.0,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} ({:.1}s)", self.name, self.detail, self.seconds)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Cobar,
    Lin,
    PoswNegw,
    Parity,
    Remarks,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Cobar, Suite::Lin, Suite::PoswNegw, Suite::Parity, Suite::Remarks];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cobar => "cobar",
            Suite::Lin => "lin",
            Suite::PoswNegw => "posw-negw",
            Suite::Parity => "parity",
            Suite::Remarks => "remarks",
        }
    }

    pub fn run(self, engine: &Engine) -> Vec<CheckReport> {
        match self {
            Suite::Cobar => cobar_suite(engine),
            Suite::Lin => vec![lin_suite(engine)],
            Suite::PoswNegw => column_suite(engine, -2..=13),
            Suite::Parity => parity_suite(engine),
            Suite::Remarks => {
                let started = Instant::now();
                match BorelExt::new(engine, BorelWindow::default()) {
                    Ok(b) => remark_checks(&b),
                    Err(e) => vec![CheckReport::new("remarks", false, e.to_string(), started)],
                }
            }
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                format!("unknown suite {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// The modules the cobar oracle is compared on.
pub fn oracle_modules() -> Vec<GradedModule> {
    vec![
        GradedModule::sphere(0),
        stunted_module(1, 8).expect("nonempty"),
        stunted_module(-5, -1).expect("nonempty"),
        dictionary_model(Variant::B, 4, 4),
    ]
}

/// Resolution against cobar dims for `s ≤ 3`, `t ≤ 14`, plus `d² = 0`.
pub fn cobar_suite(engine: &Engine) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for m in oracle_modules() {
        let started = Instant::now();
        let name = format!("cobar {}", m.name());
        let c = match dualize(&m) {
            Ok(c) => c,
            Err(e) => {
                out.push(CheckReport::new(name, false, e.to_string(), started));
                continue;
            }
        };
        let oracle = cobar_ext(&c, COBAR_S_MAX, COBAR_T_MAX).expect("within the caps");
        let res = engine.resolve(&m, COBAR_S_MAX, COBAR_T_MAX);
        let mut bad = Vec::new();
        let mut cells = 0;
        for s in 0..=COBAR_S_MAX {
            for t in oracle.t_min..=COBAR_T_MAX {
                cells += 1;
                if oracle.dim(s, t) != res.ext_dim(s, t) {
                    bad.push(format!("({s},{t}): cobar {} vs {}", oracle.dim(s, t), res.ext_dim(s, t)));
                }
            }
        }
        let dd = check_d_squared(&c, COBAR_S_MAX, COBAR_T_MAX);
        let passed = bad.is_empty() && dd.is_ok();
        let detail = match (&dd, bad.is_empty()) {
            (Ok(n), true) => format!("{cells} bidegrees agree, d∘d = 0 on {n} composites"),
            (Ok(_), false) => format!("mismatches {}", bad.join("; ")),
            (Err(e), _) => e.clone(),
        };
        out.push(CheckReport::new(name, passed, detail, started));
    }
    out
}

/// Depth, window and comparison cap of the Lin check.
pub const LIN_DEPTH: i32 = 16;
pub const LIN_S_MAX: u32 = 6;
pub const LIN_T_MAX: i32 = 10;
pub const LIN_CAP: i32 = 64;

pub fn lin_suite(engine: &Engine) -> CheckReport {
    let started = Instant::now();
    match lin_check(engine, LIN_DEPTH, LIN_S_MAX, LIN_T_MAX, LIN_CAP) {
        Ok(rep) => {
            let failures = rep.failures();
            let detail = if failures.is_empty() {
                format!(
                    "A: E∞ = 0, B: E∞ = Ext(S^-1) on {} bidegrees (K = {}, s <= {LIN_S_MAX}, t <= {LIN_T_MAX}, compared with depth {})",
                    rep.cells.len(),
                    rep.depth,
                    rep.deep
                )
            } else {
                format!("failed at {failures:?} (K = {}, deep = {})", rep.depth, rep.deep)
            };
            CheckReport::new("lin", failures.is_empty(), detail, started)
        }
        Err(e) => CheckReport::new("lin", false, e.to_string(), started),
    }
}

/// Filtration bound of the column certificates.
pub const COLUMN_S_MAX: u32 = 4;

/// Chart window in classical coordinates `(s, t')` for column `w`: coweight
/// `t' + 1 − s` in `−2..=13` and stem `w + coweight` in `0..=30`.
pub fn chart_window(w: i32) -> impl Fn(u32, i32) -> bool + Sync {
    move |s, tp| {
        let c = tp + 1 - s as i32;
        (-2..=13).contains(&c) && (0..=30).contains(&(w + c))
    }
}

/// Limit certificates for each column: the eventual image of the
/// truncations equals the column model, with the `s`-shift for `w > 0` and
/// the `S^{−1}` summand for `w ≤ 0`.
pub fn column_suite(engine: &Engine, ws: impl IntoIterator<Item = i32>) -> Vec<CheckReport> {
    let t_max = COLUMN_S_MAX as i32 + 12;
    let mut out = Vec::new();
    for w in ws {
        let started = Instant::now();
        let window = chart_window(w);
        let name = format!("column w={w}");
        let report = match certified_limit(engine, w, COLUMN_S_MAX, t_max, &window, DEPTH_CAP) {
            Ok(limit) => {
                let cells = limit.cells.values().filter(|c| c.in_window).count();
                let bad = limit.unstabilized();
                let detail = if bad.is_empty() {
                    format!("{cells} bidegrees certified at K = {}, deep = {}", limit.depth, limit.deep)
                } else {
                    format!("uncertified {bad:?} at K = {}, deep = {}", limit.depth, limit.deep)
                };
                CheckReport::new(name, bad.is_empty(), detail, started)
            }
            Err(e) => CheckReport::new(name, false, e.to_string(), started),
        };
        out.push(report);
        engine.clear();
    }
    out
}

/// Structural checks on the AHSS of a stunted module and a dictionary model.
pub fn parity_suite(engine: &Engine) -> Vec<CheckReport> {
    let cases = [
        (stunted_module(1, 8).expect("nonempty"), 6, 20),
        (dictionary_model(Variant::B, 6, 6), 5, 12),
    ];
    let mut out = Vec::new();
    for (m, s_max, t_max) in cases {
        let started = Instant::now();
        let ahss = Ahss::new(engine, &m, s_max, t_max);
        let result = ahss
            .pages(ahss.span())
            .and_then(|pages| Ok((structure_check(&ahss, &pages)?, ahss.convergence_check()?)));
        let report = match result {
            Ok((st, conv)) => {
                let passed = st.passed() && conv.passed();
                let detail = format!(
                    "d∘d: {} composites, {} failures; E(r+1) = H(E(r)): {} entries, {} failures; parity: {} cells, {} failures; convergence: {} bidegrees, {} mismatches",
                    st.compositions_checked,
                    st.dd_failures.len(),
                    st.homology_checked,
                    st.homology_failures.len(),
                    st.parity_checked,
                    st.parity_failures.len(),
                    conv.checked,
                    conv.mismatches.len()
                );
                CheckReport::new(format!("ahss {}", m.name()), passed, detail, started)
            }
            Err(e) => CheckReport::new(format!("ahss {}", m.name()), false, e.to_string(), started),
        };
        out.push(report);
    }
    out
}

fn membership(b: &BorelExt<'_>, (s, t, w): (u32, i32, i32), label: &str) -> CheckReport {
    let started = Instant::now();
    let name = format!("({s},{t},{w}) contains {label}");
    match b.group(s, t, w) {
        Ok(g) => CheckReport::new(name, g.contains(label), format!("basis {:?}", g.labels()), started),
        Err(e) => CheckReport::new(name, false, e.to_string(), started),
    }
}

/// `ρ` applied to the named class at `(s, t, w)`, expanded in the basis of
/// `(s, t − 1, w − 1)`.
pub fn rho_of(b: &BorelExt<'_>, (s, t, w): (u32, i32, i32), label: &str) -> Result<Vec<String>, String> {
    let g = b.group(s, t, w).map_err(|e| e.to_string())?;
    let class = g
        .basis
        .iter()
        .find(|c| c.label() == label)
        .ok_or_else(|| format!("no class {label} at ({s},{t},{w}); basis {:?}", g.labels()))?;
    let image = b.rho_power(s, t, w, 1, &class.vector).map_err(|e| e.to_string())?;
    b.expand(s, t - 1, w - 1, &image).map_err(|e| e.to_string())
}

/// The quoted E₂ values: one vanishing group, three named classes and the
/// ρ-connection from `h0h2[0]` at `w = 1` to `h1^2[1]` at `w = 0`.
pub fn remark_checks(b: &BorelExt<'_>) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let started = Instant::now();
    out.push(match b.dim(9, 23, 11) {
        Ok(d) => CheckReport::new("(9,23,11) = 0", d == 0, format!("dimension {d}"), started),
        Err(e) => CheckReport::new("(9,23,11) = 0", false, e.to_string(), started),
    });
    out.push(membership(b, (5, 16, 8), "h0^3h3[-4]"));
    out.push(membership(b, (3, 7, 1), "h0h2[0]"));
    out.push(membership(b, (3, 6, 0), "h1^2[1]"));
    out.push(rho_check(b));
    out
}

pub fn rho_check(b: &BorelExt<'_>) -> CheckReport {
    let started = Instant::now();
    let name = "rho h0h2[0] (w=1) -> h1^2[1] (w=0)";
    match rho_of(b, (3, 7, 1), "h0h2[0]") {
        Ok(image) => {
            let passed = image == ["h1^2[1]"];
            let shown = if image.is_empty() { "0".to_string() } else { image.join(" + ") };
            CheckReport::new(name, passed, format!("image {shown}"), started)
        }
        Err(e) => CheckReport::new(name, false, e, started),
    }
}
