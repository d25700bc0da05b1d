//! The trigraded Borel Ext, assembled column by column.
//!
//! Column `w` of `Ext^{s,t,w}` is computed from a bounded-below model at
//! classical internal degree `t' = t − w − 1`:
//!
//! * `w > 0`: `Ext^{s−1,t'}(M_w)`, where `M_w` has cells `n ≥ −w`, `n ≠ −1`;
//! * `w ≤ 0`: `Ext^{s−1,t'}(P_{−w}) ⊕ Ext^{s,t'}(S^{−1})`.
//!
//! Every `M_w` and `P_{−w}` is an upper piece `N_n` of one master module, so a
//! single [`Detector`] names every column.
//!
//! ρ lowers `w` by one at fixed `s` and `t'`. Naturality of the connecting
//! maps under the kill-top-cell maps of truncations gives it in closed form:
//! restriction `N_{−w} → N_{−w+1}` for `w ≥ 2`; restriction on `P` and the
//! identity on `S^{−1}` for `w ≤ 0`; and `x ↦ (x, ∂x)` from `w = 1` to
//! `w = 0`, with `∂` the connecting map of `0 → P_0 → P_{−1} → S^{−1} → 0`.
//! [`rho_truncation_check`] tests the closed form against the truncations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, SphereCatalog, CATALOG_STEM_MAX};
use crate::engine::Engine;
use crate::f2::{BitMatrix, BitVector, Reducer};
use crate::module::{deleted_model, dictionary_model, GradedModule, ModuleMap, ShortExactSeq, Summand, Variant};
use crate::resolution::limit::{ext_of_limit, Column, DEPTH_STEP};
use crate::resolution::{connecting, induced_map, ExtMap, Resolution, ResolutionError};
use crate::sseq::{block_or_zero, Ahss, Detector, NamedClass};

/// How the `S^{−1}` summand of a `w ≤ 0` column is embedded.
pub const SPLITTING: &str = "S^-1 summand embedded through the projection of the variant-B model onto cell -1";

/// Default chart window: stems `0..=30`, coweights `−2..=13`, `s ≤ 15`.
pub const DEFAULT_STEM_MAX: i32 = 30;
pub const DEFAULT_COWEIGHTS: RangeInclusive<i32> = -2..=13;
pub const DEFAULT_S_MAX: u32 = 15;

#[derive(Debug, Error)]
pub enum BorelError {
    #[error("Ext^({s},{t},{w}) is outside the window {window}; {hint}")]
    OutOfWindow {
        s: u32,
        t: i32,
        w: i32,
        window: String,
        hint: String,
    },
    #[error("unknown sphere class {0:?}")]
    UnknownClass(String),
    #[error("{class} maps to zero at depth {depth}; raise the depth to at least {suggest}")]
    ZeroImage { class: String, depth: i32, suggest: i32 },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

/// Which `(s, t, w)` a [`BorelExt`] answers for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorelWindow {
    pub s_max: u32,
    pub w_min: i32,
    pub w_max: i32,
    /// Largest classical internal degree `t' = t − w − 1`.
    pub t_top: i32,
}

impl Default for BorelWindow {
    fn default() -> Self {
        BorelWindow::chart(DEFAULT_S_MAX, DEFAULT_STEM_MAX, DEFAULT_COWEIGHTS)
    }
}

impl BorelWindow {
    /// The window covering coweight pages with stems `0..=stem_max`.
    pub fn chart(s_max: u32, stem_max: i32, coweights: RangeInclusive<i32>) -> Self {
        let (c_min, c_max) = (*coweights.start(), *coweights.end());
        BorelWindow {
            s_max,
            w_min: -c_max,
            w_max: stem_max - c_min,
            t_top: s_max as i32 + c_max - 1,
        }
    }

    pub fn contains(&self, s: u32, t: i32, w: i32) -> bool {
        s <= self.s_max && (self.w_min..=self.w_max).contains(&w) && t - w - 1 <= self.t_top
    }

    fn hint(&self, s: u32, t: i32, w: i32) -> String {
        let mut need = Vec::new();
        if s > self.s_max {
            need.push(format!("--smax {s}"));
        }
        if w > self.w_max {
            let c = t - s as i32 - w;
            need.push(format!("--stem-max {}", w + c.max(0)));
        }
        if w < self.w_min {
            need.push(format!("coweight up to {}", -w));
        }
        if t - w - 1 > self.t_top {
            need.push(format!("--tmax {}", t - w - 1));
        }
        format!("enlarge with {}", need.join(", "))
    }
}

impl fmt::Display for BorelWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s<={}, w in {}..={}, t-w-1<={}",
            self.s_max, self.w_min, self.w_max, self.t_top
        )
    }
}

/// One named basis element of a Borel group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorelClass {
    pub class: NamedClass,
    /// Coordinates in the column model: the `P` piece, then `S^{−1}`.
    #[serde(skip)]
    pub vector: BitVector,
}

impl BorelClass {
    pub fn label(&self) -> String {
        self.class.label()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BorelGroup {
    pub s: u32,
    pub t: i32,
    pub w: i32,
    pub dim: usize,
    pub basis: Vec<BorelClass>,
}

impl BorelGroup {
    pub fn stem(&self) -> i32 {
        self.t - self.s as i32
    }

    pub fn coweight(&self) -> i32 {
        self.t - self.s as i32 - self.w
    }

    /// Classical internal degree of the column model, `s + coweight − 1`.
    pub fn classical_t(&self) -> i32 {
        self.t - self.w - 1
    }

    pub fn contains(&self, label: &str) -> bool {
        self.basis.iter().any(|c| c.label() == label)
    }

    pub fn labels(&self) -> Vec<String> {
        self.basis.iter().map(BorelClass::label).collect()
    }
}

/// A ρ-multiplication line `(s, t, w) → (s, t − 1, w − 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RhoLine {
    pub s: u32,
    pub t: i32,
    pub w: i32,
    pub source: String,
    pub target: String,
    pub source_index: usize,
    pub target_index: usize,
}

/// ρ from column `w` to column `w − 1` in piece coordinates.
pub struct RhoMap {
    w: i32,
    /// Restriction on the `P` piece; absent when it is the identity (`w = 1`)
    /// or the target piece is empty.
    restrict: Option<ExtMap>,
    /// `∂: Ext^{k}(P_0) → Ext^{k+1}(S^{−1})`, for `w = 1` only.
    boundary: Option<ExtMap>,
}

impl RhoMap {
    /// `from` resolves the `P` piece of column `w`, `to` that of column
    /// `w − 1` (if nonempty), `sphere` resolves `S^{−1}`.
    pub fn new(
        w: i32,
        from: &Resolution,
        to: Option<&Resolution>,
        sphere: &Resolution,
        t_max: i32,
    ) -> Result<RhoMap, ResolutionError> {
        if w == 1 {
            let p0 = from.module().at_most(t_max);
            let p_minus = GradedModule::from_cells(-1..=t_max);
            let ses = ShortExactSeq::new(&p0, &p_minus).expect("P_0 sits in P_-1");
            return Ok(RhoMap {
                w,
                restrict: None,
                boundary: Some(connecting(&ses, from, sphere, t_max)?),
            });
        }
        let restrict = match to {
            Some(to) => {
                let incl = ModuleMap::on_common_cells(&to.module().at_most(t_max), &from.module().at_most(t_max))
                    .expect("upper cells form a submodule");
                Some(induced_map(&incl, to, from, t_max)?)
            }
            None => None,
        };
        Ok(RhoMap {
            w,
            restrict,
            boundary: None,
        })
    }

    /// The matrix at Borel `s` and `t'`, for pieces of the given sizes.
    /// `src_p` and `tgt_p` count `Ext^{s−1,t'}` of the `P` pieces, `src_s`
    /// and `tgt_s` count `Ext^{s,t'}(S^{−1})` (zero for `w > 0`).
    pub fn matrix(&self, s: u32, t: i32, (src_p, src_s): (usize, usize), (tgt_p, tgt_s): (usize, usize)) -> BitMatrix {
        let mut m = BitMatrix::zeros(src_p + src_s, tgt_p + tgt_s);
        if s >= 1 && src_p > 0 {
            let p = if self.w == 1 {
                BitMatrix::identity(src_p)
            } else {
                match &self.restrict {
                    Some(r) => block_or_zero(r, s - 1, t, src_p, tgt_p),
                    None => BitMatrix::zeros(src_p, tgt_p),
                }
            };
            paste(&mut m, &p, 0, 0);
            if let Some(b) = &self.boundary {
                paste(&mut m, &block_or_zero(b, s - 1, t, src_p, tgt_s), 0, tgt_p);
            }
        }
        if self.w <= 0 {
            paste(&mut m, &BitMatrix::identity(src_s), src_p, tgt_p);
        }
        m
    }
}

fn paste(m: &mut BitMatrix, block: &BitMatrix, r0: usize, c0: usize) {
    for r in 0..block.rows() {
        for c in block.row(r).iter_ones() {
            m.set(r0 + r, c0 + c, true);
        }
    }
}

/// Borel Ext groups, named bases and ρ over a window.
pub struct BorelExt<'e> {
    engine: &'e Engine,
    window: BorelWindow,
    catalog: Arc<SphereCatalog>,
    detector: Detector,
    sphere: Arc<Resolution>,
    rho: Mutex<HashMap<i32, Arc<RhoMap>>>,
}

impl<'e> BorelExt<'e> {
    pub fn new(engine: &'e Engine, window: BorelWindow) -> Result<Self, BorelError> {
        let catalog = Arc::new(SphereCatalog::build(engine, window.s_max, CATALOG_STEM_MAX)?);
        Self::with_catalog(engine, window, catalog)
    }

    pub fn with_catalog(engine: &'e Engine, window: BorelWindow, catalog: Arc<SphereCatalog>) -> Result<Self, BorelError> {
        let lowest = window.w_max.max(1);
        let master = deleted_model(lowest, window.t_top);
        let detector = Detector::new(engine, &master, -lowest, window.s_max.saturating_sub(1), window.t_top)?;
        let sphere = engine.resolve(&GradedModule::sphere(-1), window.s_max, window.t_top);
        Ok(BorelExt {
            engine,
            window,
            catalog,
            detector,
            sphere,
            rho: Mutex::new(HashMap::new()),
        })
    }

    pub fn window(&self) -> &BorelWindow {
        &self.window
    }

    pub fn catalog(&self) -> &Arc<SphereCatalog> {
        &self.catalog
    }

    pub fn engine(&self) -> &Engine {
        self.engine
    }

    /// The detector level holding the `P` piece of column `w`.
    fn level(&self, w: i32) -> Option<i32> {
        // The deleted model of w = 1 starts at cell 0.
        let bound = if w == 1 { 0 } else { -w };
        (bound..=self.window.t_top).find(|&n| self.detector.has_level(n))
    }

    fn check(&self, s: u32, t: i32, w: i32) -> Result<(), BorelError> {
        if self.window.contains(s, t, w) {
            Ok(())
        } else {
            Err(BorelError::OutOfWindow {
                s,
                t,
                w,
                window: self.window.to_string(),
                hint: self.window.hint(s, t, w),
            })
        }
    }

    /// Sizes of the `P` and `S^{−1}` pieces at Borel `(s, t, w)`.
    pub fn piece_dims(&self, s: u32, t: i32, w: i32) -> (usize, usize) {
        let tp = t - w - 1;
        let p = match (s, self.level(w)) {
            (1.., Some(n)) => self.detector.resolution(n).ext_dim(s - 1, tp),
            _ => 0,
        };
        let q = if w <= 0 { self.sphere.ext_dim(s, tp) } else { 0 };
        (p, q)
    }

    pub fn dim(&self, s: u32, t: i32, w: i32) -> Result<usize, BorelError> {
        self.check(s, t, w)?;
        let (p, q) = self.piece_dims(s, t, w);
        Ok(p + q)
    }

    fn sphere_classes(&self, s: u32, tp: i32) -> Vec<(BitVector, NamedClass)> {
        let dim = self.sphere.ext_dim(s, tp);
        let stem = tp + 1 - s as i32;
        let named = self.catalog.basis(s, stem);
        let vectors: Vec<BitVector> = if named.len() == dim {
            named.iter().map(|v| v.vector.clone()).collect()
        } else {
            (0..dim).map(|i| BitVector::unit(dim, i)).collect()
        };
        vectors
            .into_iter()
            .map(|v| {
                let name = self.catalog.name(s, stem, &v);
                (
                    v,
                    NamedClass {
                        name,
                        cell: -1,
                        s,
                        t: tp,
                        summand: Some(Summand::Sphere),
                    },
                )
            })
            .collect()
    }

    /// `Ext^{s,t,w}` with a basis named by minimal-cell detection.
    pub fn group(&self, s: u32, t: i32, w: i32) -> Result<BorelGroup, BorelError> {
        self.check(s, t, w)?;
        let tp = t - w - 1;
        let (p, q) = self.piece_dims(s, t, w);
        let mut basis = Vec::with_capacity(p + q);
        if p > 0 {
            let n = self.level(w).expect("nonzero piece has a level");
            for (v, mut class) in self.detector.adapted_basis(&self.catalog, n, s - 1, tp) {
                if w <= 0 {
                    class.summand = Some(Summand::Column);
                }
                basis.push(BorelClass {
                    class,
                    vector: v.concat(&BitVector::zeros(q)),
                });
            }
        }
        if q > 0 {
            for (v, class) in self.sphere_classes(s, tp) {
                basis.push(BorelClass {
                    class,
                    vector: BitVector::zeros(p).concat(&v),
                });
            }
        }
        Ok(BorelGroup {
            s,
            t,
            w,
            dim: p + q,
            basis,
        })
    }

    /// Detection name of an arbitrary class: by its `P` part when that is
    /// nonzero, otherwise by its `S^{−1}` part.
    pub fn name_vector(&self, s: u32, t: i32, w: i32, v: &BitVector) -> Result<Option<NamedClass>, BorelError> {
        self.check(s, t, w)?;
        let tp = t - w - 1;
        let (p, q) = self.piece_dims(s, t, w);
        assert_eq!(v.len(), p + q, "vector length must match the column");
        let pv = v.slice(0, p);
        if !pv.is_zero() {
            let n = self.level(w).expect("nonzero piece has a level");
            let mut class = self.detector.detect(&self.catalog, n, s - 1, tp, &pv).expect("nonzero");
            if w <= 0 {
                class.summand = Some(Summand::Column);
            }
            return Ok(Some(class));
        }
        let sv = v.slice(p, q);
        if sv.is_zero() {
            return Ok(None);
        }
        Ok(Some(NamedClass {
            name: self.catalog.name(s, tp + 1 - s as i32, &sv),
            cell: -1,
            s,
            t: tp,
            summand: Some(Summand::Sphere),
        }))
    }

    fn rho_map(&self, w: i32) -> Result<Arc<RhoMap>, BorelError> {
        if let Some(m) = self.rho.lock().expect("rho cache").get(&w) {
            return Ok(m.clone());
        }
        let t_top = self.window.t_top;
        let map = match self.level(w) {
            Some(n) => {
                let to = self.level(w - 1).map(|m| self.detector.resolution(m).as_ref());
                RhoMap::new(w, self.detector.resolution(n), to, &self.sphere, t_top)?
            }
            None => RhoMap {
                w,
                restrict: None,
                boundary: None,
            },
        };
        let map = Arc::new(map);
        self.rho.lock().expect("rho cache").insert(w, map.clone());
        Ok(map)
    }

    /// ρ: `Ext^{s,t,w} → Ext^{s,t−1,w−1}` in column coordinates.
    pub fn rho(&self, s: u32, t: i32, w: i32) -> Result<BitMatrix, BorelError> {
        self.check(s, t, w)?;
        self.check(s, t - 1, w - 1)?;
        let map = self.rho_map(w)?;
        Ok(map.matrix(s, t - w - 1, self.piece_dims(s, t, w), self.piece_dims(s, t - 1, w - 1)))
    }

    /// Coordinates of a column vector in the named basis of its group.
    pub fn coordinates(&self, group: &BorelGroup, v: &BitVector) -> BitVector {
        let mut r = Reducer::new(v.len(), group.dim);
        for (i, c) in group.basis.iter().enumerate() {
            r.insert(c.vector.clone(), BitVector::unit(group.dim, i));
        }
        r.solve(v).expect("the named basis spans the group")
    }

    /// ρ-lines out of `(s, t, w)`: one per nonzero coefficient of ρ on each
    /// named basis class.
    pub fn rho_lines(&self, s: u32, t: i32, w: i32) -> Result<Vec<RhoLine>, BorelError> {
        let source = self.group(s, t, w)?;
        if source.dim == 0 || !self.window.contains(s, t - 1, w - 1) {
            return Ok(Vec::new());
        }
        let target = self.group(s, t - 1, w - 1)?;
        if target.dim == 0 {
            return Ok(Vec::new());
        }
        let rho = self.rho(s, t, w)?;
        let mut lines = Vec::new();
        for (i, c) in source.basis.iter().enumerate() {
            let image = rho.vec_mul(&c.vector).expect("column vector");
            for j in self.coordinates(&target, &image).iter_ones() {
                lines.push(RhoLine {
                    s,
                    t,
                    w,
                    source: c.label(),
                    target: target.basis[j].label(),
                    source_index: i,
                    target_index: j,
                });
            }
        }
        Ok(lines)
    }

    /// `ρ^k` applied to `v ∈ Ext^{s,t,w}`, landing in `Ext^{s,t−k,w−k}`.
    pub fn rho_power(&self, s: u32, t: i32, w: i32, k: u32, v: &BitVector) -> Result<BitVector, BorelError> {
        let mut x = v.clone();
        for i in 0..k as i32 {
            x = self.rho(s, t - i, w - i)?.vec_mul(&x).expect("column vector");
        }
        Ok(x)
    }

    /// The named expansion of a column vector: labels of the basis classes
    /// with nonzero coefficient.
    pub fn expand(&self, s: u32, t: i32, w: i32, v: &BitVector) -> Result<Vec<String>, BorelError> {
        let g = self.group(s, t, w)?;
        Ok(self
            .coordinates(&g, v)
            .iter_ones()
            .map(|i| g.basis[i].label())
            .collect())
    }
}

/// Closed-form ρ against the truncations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoCheck {
    pub w: i32,
    pub depth: i32,
    pub checked: usize,
    /// Bidegrees `(s, t')` where `transport ∘ ρ ≠ kill-top-cell ∘ transport`.
    pub mismatches: Vec<(u32, i32)>,
}

impl RhoCheck {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks, at depth `depth`, that pushing a column-`w` class into
/// `Ext(P_{−K}^{−w−1})` and along the kill-top-cell map to
/// `Ext(P_{−K}^{−w})` agrees with applying the closed-form ρ first and then
/// transporting column `w − 1`.
pub fn rho_truncation_check(
    engine: &Engine,
    w: i32,
    s_max: u32,
    t_max: i32,
    depth: i32,
) -> Result<RhoCheck, ResolutionError> {
    let all = |_: u32, _: i32| true;
    let from = ext_of_limit(engine, w, s_max, t_max, depth, depth + DEPTH_STEP, &all)?;
    let to = ext_of_limit(engine, w - 1, s_max, t_max, depth, depth + DEPTH_STEP, &all)?;
    let piece = |c: &Column, summand: Summand| {
        c.pieces
            .iter()
            .find(|(p, _)| p.summand == summand)
            .map(|(_, r)| r.clone())
    };
    let sphere = engine.resolve(&GradedModule::sphere(-1), s_max, t_max);
    let from_p = piece(&from.column, Summand::Column).expect("every column has a P piece");
    let to_p = piece(&to.column, Summand::Column);
    let rho = RhoMap::new(w, &from_p, to_p.as_deref(), &sphere, t_max)?;

    // P_{−K}^{−w} ↠ P_{−K}^{−w−1}.
    let kill = ModuleMap::on_common_cells(to.truncation.module(), from.truncation.module())
        .expect("killing the top cell is a module map");
    let g = induced_map(&kill, &to.truncation, &from.truncation, t_max)?;

    let dims = |c: &Column, s: u32, t: i32| {
        let mut p = 0;
        let mut q = 0;
        for gen in c.basis(s, t) {
            match c.summand(gen) {
                Summand::Column => p += 1,
                Summand::Sphere => q += 1,
            }
        }
        (p, q)
    };
    let mut check = RhoCheck {
        w,
        depth,
        ..RhoCheck::default()
    };
    for (&(s, t), cell) in &from.cells {
        if cell.column_dim == 0 {
            continue;
        }
        let src = dims(&from.column, s, t);
        let tgt = dims(&to.column, s, t);
        let f = rho.matrix(s, t, src, tgt);
        let t_from = block_or_zero(&from.transport, s, t, src.0 + src.1, from.truncation.ext_dim(s, t));
        let t_to = block_or_zero(&to.transport, s, t, tgt.0 + tgt.1, to.truncation.ext_dim(s, t));
        let g_st = block_or_zero(&g, s, t, from.truncation.ext_dim(s, t), to.truncation.ext_dim(s, t));
        check.checked += 1;
        let lhs = t_from.mul(&g_st).expect("composable");
        let rhs = f.mul(&t_to).expect("composable");
        if lhs != rhs {
            check.mismatches.push((s, t));
        }
    }
    Ok(check)
}

/// A differential pair of a dictionary model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub source: NamedClass,
    pub target: NamedClass,
    pub r: u32,
}

impl DictionaryEntry {
    pub fn stem(&self) -> i32 {
        self.source.t - self.source.s as i32
    }
}

impl fmt::Display for DictionaryEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}({}) = {}", self.r, self.source, self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dictionary {
    pub variant: Variant,
    pub depth: i32,
    pub s_max: u32,
    pub t_max: i32,
    /// Pairs present at depths `K` and `K + 8`, sorted by stem then `s`.
    pub pairs: Vec<DictionaryEntry>,
    /// Pairs present at only one of the two depths.
    pub unstable: Vec<DictionaryEntry>,
}

impl Dictionary {
    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.pairs
            .iter()
            .any(|p| p.source.label() == source && p.target.label() == target)
    }
}

fn named_pairs(
    engine: &Engine,
    catalog: &SphereCatalog,
    variant: Variant,
    depth: i32,
    s_max: u32,
    t_max: i32,
) -> Result<BTreeSet<DictionaryEntry>, ResolutionError> {
    let m = dictionary_model(variant, depth, t_max);
    let ahss = Ahss::new(engine, &m, s_max, t_max);
    let mut out = BTreeSet::new();
    for r in 1..=ahss.span() {
        let page = ahss.page(r)?;
        for d in ahss.named_differentials(&page, catalog) {
            out.insert(DictionaryEntry {
                source: d.source,
                target: d.target,
                r: d.r,
            });
        }
    }
    Ok(out)
}

/// Every named differential of the variant's AHSS through `(s_max, t_max)`,
/// certified by recomputing at depth `depth + 8`.
pub fn dictionary(
    engine: &Engine,
    catalog: &SphereCatalog,
    variant: Variant,
    depth: i32,
    s_max: u32,
    t_max: i32,
) -> Result<Dictionary, ResolutionError> {
    let a = named_pairs(engine, catalog, variant, depth, s_max, t_max)?;
    let b = named_pairs(engine, catalog, variant, depth + DEPTH_STEP, s_max, t_max)?;
    let key = |e: &DictionaryEntry| (e.stem(), e.source.s, e.source.cell, e.source.name.clone(), e.r);
    let mut pairs: Vec<DictionaryEntry> = a.intersection(&b).cloned().collect();
    pairs.sort_by_key(key);
    // Pairs at depth K+8 reaching below −K were never visible at K.
    let mut unstable: Vec<DictionaryEntry> = a
        .symmetric_difference(&b)
        .filter(|e| e.target.cell >= -depth)
        .cloned()
        .collect();
    unstable.sort_by_key(key);
    Ok(Dictionary {
        variant,
        depth,
        s_max,
        t_max,
        pairs,
        unstable,
    })
}

/// A name with its cell suffix removed: `h0h2[0]` → `h0h2`.
pub fn may_part(label: &str) -> &str {
    match label.rfind('[') {
        Some(i) if label.ends_with(']') => &label[..i],
        _ => label,
    }
}

/// Accepts superscript digits: `h0³h3` → `h0^3h3`.
pub fn normalize_name(name: &str) -> String {
    const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut out = String::new();
    let mut in_exponent = false;
    for ch in name.chars() {
        match SUPERSCRIPTS.iter().position(|&c| c == ch) {
            Some(d) => {
                if !in_exponent {
                    out.push('^');
                }
                out.push(char::from(b'0' + d as u8));
                in_exponent = true;
            }
            None => {
                out.push(ch);
                in_exponent = false;
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MahowaldInvariant {
    pub class: String,
    pub invariant: NamedClass,
    pub depth: i32,
    /// The same name comes out at depth `depth + 8`.
    pub certified: bool,
}

fn mahowald_at(
    engine: &Engine,
    catalog: &SphereCatalog,
    s: u32,
    t: i32,
    v: &BitVector,
    depth: i32,
) -> Result<Option<NamedClass>, ResolutionError> {
    let db = dictionary_model(Variant::B, depth, t);
    let sphere = GradedModule::sphere(-1);
    let r_db = engine.resolve(&db, s, t);
    let r_sphere = engine.resolve(&sphere, s, t);
    let proj = ModuleMap::with_support(&db, &sphere, vec![-1]).expect("no square hits or leaves cell -1 compatibly");
    let f = induced_map(&proj, &r_db, &r_sphere, t)?;
    let image = match f.matrix(s, t) {
        Some(m) => m.vec_mul(v).expect("sphere vector"),
        None => return Ok(None),
    };
    if image.is_zero() {
        return Ok(None);
    }
    let detector = Detector::new(engine, &db, -depth, s, t)?;
    Ok(detector.detect(catalog, -depth, s, t, &image))
}

/// The algebraic Mahowald invariant of a named sphere class: its image
/// under `Ext(S^{−1}) → Ext(lim P_{−K})`, named by detection.
pub fn mahowald(engine: &Engine, catalog: &SphereCatalog, name: &str, depth: i32) -> Result<MahowaldInvariant, BorelError> {
    let name = normalize_name(name);
    let (s, stem, v) = catalog
        .lookup(&name)
        .ok_or_else(|| BorelError::UnknownClass(name.clone()))?;
    let v = v.clone();
    let t = s as i32 + stem - 1;
    let first = mahowald_at(engine, catalog, s, t, &v, depth)?;
    let Some(invariant) = first else {
        return Err(BorelError::ZeroImage {
            class: name,
            depth,
            suggest: depth + DEPTH_STEP,
        });
    };
    let second = mahowald_at(engine, catalog, s, t, &v, depth + DEPTH_STEP)?;
    Ok(MahowaldInvariant {
        class: name,
        certified: second.as_ref() == Some(&invariant),
        invariant,
        depth,
    })
}

/// One bidegree of the Lin check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinCell {
    pub s: u32,
    pub t: i32,
    /// Eventual-image bound for the variant-A model: must be zero.
    pub a_rank: usize,
    /// Eventual-image bound for the variant-B model.
    pub b_rank: usize,
    /// Rank of `Ext(S^{−1}) → Ext(DB)`: a lower bound for the variant-B limit.
    pub b_lower: usize,
    pub sphere_dim: usize,
}

impl LinCell {
    pub fn passed(&self) -> bool {
        self.a_rank == 0 && self.b_rank == self.sphere_dim && self.b_lower == self.sphere_dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinReport {
    pub depth: i32,
    pub deep: i32,
    pub cells: Vec<LinCell>,
}

impl LinReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(LinCell::passed)
    }

    pub fn failures(&self) -> Vec<(u32, i32)> {
        self.cells.iter().filter(|c| !c.passed()).map(|c| (c.s, c.t)).collect()
    }
}

fn restriction_ranks(
    engine: &Engine,
    variant: Variant,
    depth: i32,
    deep: i32,
    s_max: u32,
    t_max: i32,
) -> Result<BTreeMap<(u32, i32), usize>, ResolutionError> {
    let m = dictionary_model(variant, depth, t_max);
    let d = dictionary_model(variant, deep, t_max);
    let rm = engine.resolve(&m, s_max, t_max);
    let rd = engine.resolve(&d, s_max, t_max);
    let incl = ModuleMap::on_common_cells(&m, &d).expect("upper cells form a submodule");
    let f = induced_map(&incl, &rm, &rd, t_max)?;
    Ok(f.blocks.iter().map(|(&k, b)| (k, b.rank())).collect())
}

/// Lin's theorem in a window: the variant-A limit has no Ext and the
/// variant-B limit has the Ext of `S^{−1}`. The eventual image of
/// `Ext(model at depth deep) → Ext(model at depth K)` is bounded above by the
/// image rank; for variant B the projection onto cell −1 bounds it below.
/// `deep` climbs from `2K` in steps of 8 until every cell passes or `cap`.
pub fn lin_check(engine: &Engine, depth: i32, s_max: u32, t_max: i32, cap: i32) -> Result<LinReport, ResolutionError> {
    let sphere = engine.resolve(&GradedModule::sphere(-1), s_max, t_max);
    let db = dictionary_model(Variant::B, depth, t_max);
    let r_db = engine.resolve(&db, s_max, t_max);
    let proj = ModuleMap::with_support(&db, &GradedModule::sphere(-1), vec![-1]).expect("cell -1 splits off");
    let lower = induced_map(&proj, &r_db, &sphere, t_max)?;
    let mut deep = (2 * depth).max(depth + DEPTH_STEP);
    loop {
        let a = restriction_ranks(engine, Variant::A, depth, deep, s_max, t_max)?;
        let b = restriction_ranks(engine, Variant::B, depth, deep, s_max, t_max)?;
        let mut cells = Vec::new();
        for s in 0..=s_max {
            for t in (-depth + s as i32)..=t_max {
                cells.push(LinCell {
                    s,
                    t,
                    a_rank: a.get(&(s, t)).copied().unwrap_or(0),
                    b_rank: b.get(&(s, t)).copied().unwrap_or(0),
                    b_lower: lower.matrix(s, t).map_or(0, BitMatrix::rank),
                    sphere_dim: sphere.ext_dim(s, t),
                });
            }
        }
        let report = LinReport { depth, deep, cells };
        if report.passed() || deep >= cap {
            return Ok(report);
        }
        deep = (deep + DEPTH_STEP).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn may_part_strips_the_cell() {
        assert_eq!(may_part("h0h2[0]"), "h0h2");
        assert_eq!(may_part("c0[-6]"), "c0");
        assert_eq!(may_part("h1"), "h1");
    }

    #[test]
    fn superscripts_normalize() {
        assert_eq!(normalize_name("h0³h3"), "h0^3h3");
        assert_eq!(normalize_name("h1²"), "h1^2");
        assert_eq!(normalize_name("Ph2"), "Ph2");
        assert_eq!(normalize_name("h0^2h2"), "h0^2h2");
    }

    #[test]
    fn window_arithmetic() {
        let w = BorelWindow::default();
        assert_eq!((w.w_min, w.w_max, w.t_top), (-13, 32, 27));
        assert!(w.contains(5, 16, 8));
        assert!(!w.contains(16, 20, 0));
        let hint = w.hint(16, 20, 0);
        assert!(hint.contains("--smax 16"), "{hint}");
    }
}
