//! Browser bindings: an Ext chart for a module spec, one Borel coweight
//! page as SVG, and algebraic Mahowald invariants. Everything runs
//! client-side and single-threaded, so windows are capped to stay
//! responsive.

use std::collections::BTreeMap;

use wasm_bindgen::prelude::*;

use borel_ext::borel::{mahowald, BorelExt, BorelWindow};
use borel_ext::catalog::{SphereCatalog, CATALOG_STEM_MAX};
use borel_ext::chart::{borel_page, render_svg, ExtDocument};
use borel_ext::engine::Engine;
use borel_ext::module::ModuleSpec;

pub const MAX_S: u32 = 8;
pub const MAX_T: i32 = 24;
pub const MAX_STEM: i32 = 20;

fn capped(name: &str, value: i64, max: i64) -> Result<(), String> {
    if value > max {
        Err(format!("{name} is capped at {max} in the browser; use the command-line tool for more"))
    } else {
        Ok(())
    }
}

/// Ext chart of `spec` (`S:n`, `P:a:b`, `M:w`, `DA:K:T`, `DB:K:T`) as JSON.
pub fn ext_json(spec: &str, s_max: u32, t_max: i32) -> Result<String, String> {
    capped("s", s_max.into(), MAX_S.into())?;
    capped("t", t_max.into(), MAX_T.into())?;
    let parsed: ModuleSpec = spec.parse().map_err(|e| format!("{spec}: {e}"))?;
    let res = Engine::new(None).resolve(&parsed.module(t_max), s_max, t_max);
    let mut doc = ExtDocument::from_chart(&res.chart());
    doc.module = parsed.to_string();
    Ok(doc.to_json())
}

/// Coweight page for stems `0..=stem_max` as `(json, svg)`.
pub fn page(coweight: i32, stem_max: i32, s_max: u32) -> Result<(String, String), String> {
    capped("s", s_max.into(), MAX_S.into())?;
    capped("the stem", stem_max.into(), MAX_STEM.into())?;
    if stem_max < 0 {
        return Err("the stem range must be nonempty".into());
    }
    let engine = Engine::new(None);
    let window = BorelWindow::chart(s_max, stem_max, coweight..=coweight);
    let b = BorelExt::new(&engine, window).map_err(|e| e.to_string())?;
    let doc = borel_page(&b, coweight, stem_max, &BTreeMap::new()).map_err(|e| e.to_string())?;
    Ok((doc.to_json(), render_svg(&doc)))
}

/// `class -> invariant`, e.g. `h1 -> h2[-3]`.
pub fn mahowald_text(class: &str, depth: i32) -> Result<String, String> {
    capped("the depth", depth.into(), 32)?;
    let engine = Engine::new(None);
    let catalog = SphereCatalog::build(&engine, 6, CATALOG_STEM_MAX.min(MAX_T)).map_err(|e| e.to_string())?;
    let m = mahowald(&engine, &catalog, class, depth).map_err(|e| e.to_string())?;
    let note = if m.certified { "" } else { " (not confirmed at K + 8)" };
    Ok(format!("{} -> {}{note}", m.class, m.invariant.label()))
}

#[wasm_bindgen(js_name = extChart)]
pub fn ext_chart(spec: &str, s_max: u32, t_max: i32) -> Result<String, JsError> {
    ext_json(spec, s_max, t_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = borelPageSvg)]
pub fn borel_page_svg(coweight: i32, stem_max: i32, s_max: u32) -> Result<String, JsError> {
    page(coweight, stem_max, s_max).map(|(_, svg)| svg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = borelPageJson)]
pub fn borel_page_json(coweight: i32, stem_max: i32, s_max: u32) -> Result<String, JsError> {
    page(coweight, stem_max, s_max).map(|(json, _)| json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mahowaldInvariant)]
pub fn mahowald_invariant(class: &str, depth: i32) -> Result<String, JsError> {
    mahowald_text(class, depth).map_err(|e| JsError::new(&e))
}
