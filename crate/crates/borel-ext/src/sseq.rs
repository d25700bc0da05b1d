//! The algebraic Atiyah–Hirzebruch spectral sequence of the cell filtration,
//! and detection names.
//!
//! For a cell module `m` write `W(a, b)` for its cells in `[a, b]`. Then
//!
//! * `Z_r(n)`, the classes of `Ext(Sⁿ)` surviving to `E_r`, is the image of
//!   restriction to the top cell, `Ext(W(n−r+1, n)) → Ext(Sⁿ)`;
//! * `B_r(n)`, the boundaries of shorter differentials, is the kernel of
//!   `Ext(Sⁿ) → Ext(W(n, n+r−1))` along the bottom-cell projection;
//! * `E_r = Z_r / B_r`, which is the image of the composite
//!   `Ext(W(n−r+1, n)) → Ext(W(n, n+r−1))` through `Sⁿ`.
//!
//! `d_r` of `x ∈ Z_r(n)` lifts `x` to `X ∈ Ext(W(n−r+1, n))` and applies the
//! connecting map of `0 → W(n−r+1, n) → W(n−r, n) → S^{n−r} → 0`.
//!
//! Detection uses the equivalent description through submodules: a class of
//! `Ext(m)` lies in the image of `Ext(m_{≤n})` exactly when it restricts to
//! zero on `m_{≥n+1}`. Its cell is the largest `n` with nonzero restriction to
//! `m_{≥n}`, and its name comes from solving through the bottom-cell
//! projection `m_{≥n} ↠ Sⁿ`, reduced modulo the kernel of that map.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::catalog::{multiplication, SphereCatalog};
use crate::engine::Engine;
use crate::f2::{kernel_basis, solve, BitMatrix, BitVector, Reducer};
use crate::module::{GradedModule, ModuleMap, ShortExactSeq, Summand};
use crate::resolution::{connecting, induced_map, ExtMap, Resolution, ResolutionError};

/// An Ext class named by the sphere class on the cell that detects it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NamedClass {
    /// Sphere-class name; a `+`-joined sum when the detected class is not a
    /// single catalog basis element.
    pub name: String,
    pub cell: i32,
    pub s: u32,
    pub t: i32,
    /// Which column summand the class lives on, for `w ≤ 0` columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summand: Option<Summand>,
}

impl NamedClass {
    pub fn label(&self) -> String {
        format!("{}[{}]", self.name, self.cell)
    }

    /// The sphere stem of the detecting class.
    pub fn sphere_stem(&self) -> i32 {
        self.t - self.s as i32 - self.cell
    }
}

impl fmt::Display for NamedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Applies an Ext map block, treating a missing block as zero.
pub(crate) fn apply_or_zero(map: &ExtMap, s: u32, t: i32, v: &BitVector, target_dim: usize) -> BitVector {
    match map.matrix(s, t) {
        Some(m) if m.rows() == v.len() => m.vec_mul(v).expect("lengths checked"),
        _ => BitVector::zeros(target_dim),
    }
}

/// A matrix block, or zeros of the given shape.
pub(crate) fn block_or_zero(map: &ExtMap, s: u32, t: i32, rows: usize, cols: usize) -> BitMatrix {
    match map.matrix(s, t) {
        Some(m) if m.rows() == rows && m.cols() == cols => m.clone(),
        _ => BitMatrix::zeros(rows, cols),
    }
}

/// One level `m_{≥n}` of a detector.
struct Level {
    cell: i32,
    res: Arc<Resolution>,
    sphere: Arc<Resolution>,
    /// `Ext(m_{≥n}) → Ext(m_{≥next})`, absent at the top level.
    to_next: Option<ExtMap>,
    /// `Ext(Sⁿ) → Ext(m_{≥n})` along the bottom-cell projection.
    bottom: ExtMap,
}

/// Detection names for the Ext of every submodule `m_{≥n}` of a cell module.
///
/// One detector serves every column of a chart: each column model is some
/// `m_{≥n}` of the deleted model, so the levels and their restriction maps are
/// shared.
pub struct Detector {
    module: GradedModule,
    s_max: u32,
    t_max: i32,
    levels: Vec<Level>,
}

impl Detector {
    /// Levels for every cell of `module` from `lowest` up.
    pub fn new(
        engine: &Engine,
        module: &GradedModule,
        lowest: i32,
        s_max: u32,
        t_max: i32,
    ) -> Result<Detector, ResolutionError> {
        let module = module.at_most(t_max);
        let cells: Vec<i32> = module.cells().iter().copied().filter(|&n| n >= lowest).collect();
        let mut levels: Vec<Level> = Vec::with_capacity(cells.len());
        let resolutions: Vec<Arc<Resolution>> = cells
            .iter()
            .map(|&n| engine.resolve(&module.at_least(n), s_max, t_max))
            .collect();
        for (i, &n) in cells.iter().enumerate() {
            let res = resolutions[i].clone();
            let sphere = engine.resolve(&GradedModule::sphere(n), s_max, t_max);
            let here = module.at_least(n);
            let proj = ModuleMap::with_support(&here, &GradedModule::sphere(n), vec![n])
                .expect("the bottom cell is a quotient");
            let bottom = induced_map(&proj, &res, &sphere, t_max)?;
            let to_next = match cells.get(i + 1) {
                Some(&m) => {
                    let next = module.at_least(m);
                    let incl = ModuleMap::on_common_cells(&next, &here).expect("cells above a cutoff are a submodule");
                    Some(induced_map(&incl, &resolutions[i + 1], &res, t_max)?)
                }
                None => None,
            };
            levels.push(Level {
                cell: n,
                res,
                sphere,
                to_next,
                bottom,
            });
        }
        Ok(Detector {
            module,
            s_max,
            t_max,
            levels,
        })
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn t_max(&self) -> i32 {
        self.t_max
    }

    fn index(&self, n: i32) -> usize {
        self.levels
            .binary_search_by_key(&n, |l| l.cell)
            .unwrap_or_else(|_| panic!("no detector level at cell {n}"))
    }

    /// Resolution of `m_{≥n}`.
    pub fn resolution(&self, n: i32) -> &Arc<Resolution> {
        &self.levels[self.index(n)].res
    }

    pub fn has_level(&self, n: i32) -> bool {
        self.levels.binary_search_by_key(&n, |l| l.cell).is_ok()
    }

    /// Restriction `Ext(m_{≥from}) → Ext(m_{≥to})` at `(s, t)`.
    pub fn restrict(&self, from: i32, to: i32, s: u32, t: i32, v: &BitVector) -> BitVector {
        let mut i = self.index(from);
        let j = self.index(to);
        let mut x = v.clone();
        while i < j {
            let next = &self.levels[i + 1];
            let map = self.levels[i].to_next.as_ref().expect("not the top level");
            x = apply_or_zero(map, s, t, &x, next.res.ext_dim(s, t));
            i += 1;
        }
        x
    }

    /// The detecting cell and its restriction there, for a nonzero class of
    /// `Ext^{s,t}(m_{≥from})`.
    fn leading(&self, from: i32, s: u32, t: i32, v: &BitVector) -> Option<(usize, BitVector)> {
        if v.is_zero() {
            return None;
        }
        let mut i = self.index(from);
        let mut x = v.clone();
        while let Some(map) = &self.levels[i].to_next {
            let y = apply_or_zero(map, s, t, &x, self.levels[i + 1].res.ext_dim(s, t));
            if y.is_zero() {
                break;
            }
            x = y;
            i += 1;
        }
        Some((i, x))
    }

    /// The sphere class on level `i` mapping to `x`, reduced modulo the
    /// kernel of the bottom-cell map.
    fn sphere_class(&self, i: usize, s: u32, t: i32, x: &BitVector) -> BitVector {
        let level = &self.levels[i];
        let dim = level.sphere.ext_dim(s, t);
        let m = block_or_zero(&level.bottom, s, t, dim, x.len());
        let y = solve(&m.transpose(), x)
            .expect("dimensions agree")
            .expect("a class restricting to zero above its cell comes from the bottom cell");
        let mut kernel = Reducer::new(dim, 0);
        for k in kernel_basis(&m.transpose()) {
            kernel.insert(k, BitVector::zeros(0));
        }
        let mut y = y;
        kernel.reduce(&mut y);
        y
    }

    /// Minimal-cell detection name of a nonzero class of `Ext^{s,t}(m_{≥from})`.
    pub fn detect(
        &self,
        catalog: &SphereCatalog,
        from: i32,
        s: u32,
        t: i32,
        v: &BitVector,
    ) -> Option<NamedClass> {
        let (i, x) = self.leading(from, s, t, v)?;
        let n = self.levels[i].cell;
        let y = self.sphere_class(i, s, t, &x);
        Some(NamedClass {
            name: catalog.name(s, t - s as i32 - n, &y),
            cell: n,
            s,
            t,
            summand: None,
        })
    }

    /// A basis of `Ext^{s,t}(m_{≥from})` adapted to the cell filtration, each
    /// vector with its detection name. Deterministic: it is the reduced echelon
    /// form of the restriction data ordered from the top cell down.
    pub fn adapted_basis(
        &self,
        catalog: &SphereCatalog,
        from: i32,
        s: u32,
        t: i32,
    ) -> Vec<(BitVector, NamedClass)> {
        let i0 = self.index(from);
        let d = self.levels[i0].res.ext_dim(s, t);
        if d == 0 {
            return Vec::new();
        }
        // Restriction matrices of the unit vectors to every level.
        let mut blocks: Vec<BitMatrix> = vec![BitMatrix::identity(d)];
        for i in i0..self.levels.len() - 1 {
            let dim_next = self.levels[i + 1].res.ext_dim(s, t);
            let prev = blocks.last().expect("nonempty");
            let map = self.levels[i].to_next.as_ref().expect("not the top level");
            let step = block_or_zero(map, s, t, prev.cols(), dim_next);
            let next = prev.mul(&step).expect("composable");
            if next.is_zero() {
                break;
            }
            blocks.push(next);
        }
        let widths: Vec<usize> = blocks.iter().map(BitMatrix::cols).collect();
        let total: usize = widths.iter().sum();
        let mut big = BitMatrix::zeros(d, total);
        for r in 0..d {
            let mut off = 0;
            for b in blocks.iter().rev() {
                for c in b.row(r).iter_ones() {
                    big.set(r, off + c, true);
                }
                off += b.cols();
            }
        }
        let (pivots, reduced) = crate::f2::rref(&big);
        let mut out = Vec::with_capacity(pivots.len());
        for (row, &p) in pivots.iter().enumerate() {
            // Locate the pivot's block: counted from the top level down.
            let mut off = 0;
            let mut k = blocks.len();
            for b in blocks.iter().rev() {
                k -= 1;
                if p < off + b.cols() {
                    break;
                }
                off += b.cols();
            }
            let r = reduced.row(row);
            let vector = r.slice(total - d, d);
            let x = r.slice(off, blocks[k].cols());
            let i = i0 + k;
            let n = self.levels[i].cell;
            let y = self.sphere_class(i, s, t, &x);
            out.push((
                vector,
                NamedClass {
                    name: catalog.name(s, t - s as i32 - n, &y),
                    cell: n,
                    s,
                    t,
                    summand: None,
                },
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum MapKind {
    /// `Ext(W(a, b)) → Ext(S^b)`.
    Top,
    /// `Ext(S^a) → Ext(W(a, b))`.
    Bottom,
    /// `Ext^s(W(a+1, b)) → Ext^{s+1}(S^a)`.
    Connecting,
}

/// One entry `E_r^{n,s,t}`: representatives of a complement of `B_r` in
/// `Z_r`, and a reducer expressing members of `Z_r` in them.
#[derive(Clone, Debug)]
pub struct PageEntry {
    pub dim: usize,
    pub reps: Vec<BitVector>,
    coords: Reducer,
    boundaries: Reducer,
}

impl PageEntry {
    /// Coordinates of `v ∈ Z_r` in the representatives, modulo `B_r`.
    pub fn coordinates(&self, v: &BitVector) -> Option<BitVector> {
        self.coords.solve(v)
    }

    /// `v` reduced modulo `B_r`.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut w = v.clone();
        self.boundaries.reduce(&mut w);
        w
    }
}

/// Page `r`: its entries and `d_r`.
#[derive(Clone, Debug)]
pub struct AhssPage {
    pub r: u32,
    pub entries: BTreeMap<(i32, u32, i32), PageEntry>,
    /// `d_r` from `(n, s, t)` to `(n−r, s+1, t)`: row `i` is the image of
    /// representative `i` in the target's representatives.
    pub differentials: BTreeMap<(i32, u32, i32), BitMatrix>,
}

impl AhssPage {
    pub fn dim(&self, n: i32, s: u32, t: i32) -> usize {
        self.entries.get(&(n, s, t)).map_or(0, |e| e.dim)
    }
}

/// A named differential `d_r(source) = target`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NamedDifferential {
    pub r: u32,
    pub source: NamedClass,
    pub target: NamedClass,
}

/// The cell-filtration spectral sequence of a module in the window
/// `s ≤ s_max`, `t ≤ t_max`. Differentials out of `s_max` are computed too,
/// so entries carry `s ≤ s_max + 1`.
pub struct Ahss<'a> {
    engine: &'a Engine,
    module: GradedModule,
    s_max: u32,
    t_max: i32,
    maps: Mutex<HashMap<(MapKind, i32, i32), Arc<ExtMap>>>,
}

impl<'a> Ahss<'a> {
    pub fn new(engine: &'a Engine, module: &GradedModule, s_max: u32, t_max: i32) -> Self {
        Ahss {
            engine,
            module: module.at_most(t_max),
            s_max,
            t_max,
            maps: Mutex::new(HashMap::new()),
        }
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn t_max(&self) -> i32 {
        self.t_max
    }

    /// Number of pages after which nothing changes.
    pub fn span(&self) -> u32 {
        match (self.module.bottom(), self.module.top()) {
            (Some(b), Some(t)) => (t - b) as u32 + 1,
            _ => 1,
        }
    }

    fn resolve(&self, m: &GradedModule) -> Arc<Resolution> {
        self.engine.resolve(m, self.s_max + 1, self.t_max)
    }

    fn clip(&self, a: i32, b: i32) -> (i32, i32) {
        let lo = self.module.bottom().unwrap_or(a);
        let hi = self.module.top().unwrap_or(b);
        (a.max(lo), b.min(hi))
    }

    fn map(&self, kind: MapKind, a: i32, b: i32) -> Result<Arc<ExtMap>, ResolutionError> {
        let (ca, cb) = match kind {
            MapKind::Top => (self.clip(a, b).0, b),
            MapKind::Bottom => (a, self.clip(a, b).1),
            MapKind::Connecting => (a, self.clip(a, b).1),
        };
        let key = (kind, ca, cb);
        if let Some(m) = self.maps.lock().expect("map cache").get(&key) {
            return Ok(m.clone());
        }
        let t_max = self.t_max;
        let map = match kind {
            MapKind::Top => {
                let w = self.module.window(ca, cb);
                let top = GradedModule::sphere(cb);
                let incl = ModuleMap::on_common_cells(&top, &w).expect("the top cell is a submodule");
                induced_map(&incl, &self.resolve(&top), &self.resolve(&w), t_max)?
            }
            MapKind::Bottom => {
                let w = self.module.window(ca, cb);
                let bot = GradedModule::sphere(ca);
                let proj = ModuleMap::with_support(&w, &bot, vec![ca]).expect("the bottom cell is a quotient");
                induced_map(&proj, &self.resolve(&w), &self.resolve(&bot), t_max)?
            }
            MapKind::Connecting => {
                let mid = self.module.window(ca, cb);
                let sub = self.module.window(ca + 1, cb);
                let ses = ShortExactSeq::new(&sub, &mid).expect("cells above the bottom are a submodule");
                connecting(&ses, &self.resolve(&sub), &self.resolve(&GradedModule::sphere(ca)), t_max)?
            }
        };
        let map = Arc::new(map);
        self.maps.lock().expect("map cache").insert(key, map.clone());
        Ok(map)
    }

    fn sphere_dim(&self, n: i32, s: u32, t: i32) -> usize {
        if s > self.s_max + 1 {
            return 0;
        }
        self.resolve(&GradedModule::sphere(n)).ext_dim(s, t)
    }

    /// Cells, ascending.
    fn cells(&self) -> Vec<i32> {
        self.module.cells().to_vec()
    }

    /// `E_r^{n,s,t}` from the image formula.
    fn entry(&self, r: u32, n: i32, s: u32, t: i32) -> Result<PageEntry, ResolutionError> {
        let dim = self.sphere_dim(n, s, t);
        let r = r as i32;
        // Z_r: image of restriction to the top cell of W(n−r+1, n).
        let z: Vec<BitVector> = if r == 1 {
            (0..dim).map(|i| BitVector::unit(dim, i)).collect()
        } else {
            let top = self.map(MapKind::Top, n - r + 1, n)?;
            let w = self.resolve(&self.module.window(n - r + 1, n));
            let m = block_or_zero(&top, s, t, w.ext_dim(s, t), dim);
            crate::f2::column_space(&m.transpose())
        };
        // B_r: kernel of the bottom-cell map into W(n, n+r−1).
        let b: Vec<BitVector> = if r == 1 {
            Vec::new()
        } else {
            let bot = self.map(MapKind::Bottom, n, n + r - 1)?;
            let w = self.resolve(&self.module.window(n, n + r - 1));
            let m = block_or_zero(&bot, s, t, dim, w.ext_dim(s, t));
            kernel_basis(&m.transpose())
        };
        let mut boundaries = Reducer::new(dim, 0);
        for v in &b {
            boundaries.insert(v.clone(), BitVector::zeros(0));
        }
        let mut span = boundaries.clone();
        let mut reps = Vec::new();
        for v in &z {
            let mut w = v.clone();
            span.reduce(&mut w);
            if !w.is_zero() {
                span.insert(w.clone(), BitVector::zeros(0));
                reps.push(w);
            }
        }
        debug_assert_eq!(
            span.rank(),
            z.len(),
            "boundaries must lie among the cycles at ({n},{s},{t}) page {r}"
        );
        let mut coords = Reducer::new(dim, reps.len());
        for v in &b {
            coords.insert(v.clone(), BitVector::zeros(reps.len()));
        }
        for (i, v) in reps.iter().enumerate() {
            coords.insert(v.clone(), BitVector::unit(reps.len(), i));
        }
        Ok(PageEntry {
            dim: reps.len(),
            reps,
            coords,
            boundaries,
        })
    }

    /// Page `r` with its differentials.
    pub fn page(&self, r: u32) -> Result<AhssPage, ResolutionError> {
        assert!(r >= 1, "pages start at 1");
        let mut entries = BTreeMap::new();
        for n in self.cells() {
            for s in 0..=self.s_max + 1 {
                for t in (n + s as i32)..=self.t_max {
                    if self.sphere_dim(n, s, t) == 0 {
                        continue;
                    }
                    let e = self.entry(r, n, s, t)?;
                    if e.dim > 0 {
                        entries.insert((n, s, t), e);
                    }
                }
            }
        }
        let mut differentials = BTreeMap::new();
        for (&(n, s, t), e) in &entries {
            if s > self.s_max {
                continue;
            }
            let m = n - r as i32;
            let Some(target) = entries.get(&(m, s + 1, t)) else {
                continue;
            };
            let top = self.map(MapKind::Top, n - r as i32 + 1, n)?;
            let conn = self.map(MapKind::Connecting, m, n)?;
            let lower = self.resolve(&self.module.window(n - r as i32 + 1, n));
            let lift = block_or_zero(&top, s, t, lower.ext_dim(s, t), self.sphere_dim(n, s, t));
            let mut d = BitMatrix::zeros(e.dim, target.dim);
            for (i, x) in e.reps.iter().enumerate() {
                let big = solve(&lift.transpose(), x)
                    .expect("dimensions agree")
                    .expect("a surviving class lifts through the cells below");
                let y = apply_or_zero(&conn, s, t, &big, self.sphere_dim(m, s + 1, t));
                let c = target
                    .coordinates(&y)
                    .expect("a differential lands among the surviving classes");
                for j in c.iter_ones() {
                    d.set(i, j, true);
                }
            }
            if !d.is_zero() {
                differentials.insert((n, s, t), d);
            }
        }
        Ok(AhssPage { r, entries, differentials })
    }

    /// Pages `1..=r_max`.
    pub fn pages(&self, r_max: u32) -> Result<Vec<AhssPage>, ResolutionError> {
        (1..=r_max).map(|r| self.page(r)).collect()
    }

    /// Names `d_r` on page `page` as pairs over an adapted source basis: the
    /// reduced echelon form of the differential's matrix.
    pub fn named_differentials(&self, page: &AhssPage, catalog: &SphereCatalog) -> Vec<NamedDifferential> {
        let mut out = Vec::new();
        for (&(n, s, t), d) in &page.differentials {
            let src = &page.entries[&(n, s, t)];
            let m = n - page.r as i32;
            let tgt = &page.entries[&(m, s + 1, t)];
            // Row-reduce [d | I] to pair sources with independent targets.
            let mut aug = BitMatrix::zeros(d.rows(), d.cols() + d.rows());
            for i in 0..d.rows() {
                for j in d.row(i).iter_ones() {
                    aug.set(i, j, true);
                }
                aug.set(i, d.cols() + i, true);
            }
            let (pivots, red) = crate::f2::rref(&aug);
            for (row, &p) in pivots.iter().enumerate() {
                if p >= d.cols() {
                    break;
                }
                let r = red.row(row);
                let image = r.slice(0, d.cols());
                let combo = r.slice(d.cols(), d.rows());
                let mut x = BitVector::zeros(src.reps.first().map_or(0, BitVector::len));
                for i in combo.iter_ones() {
                    x.add_assign(&src.reps[i]);
                }
                let mut y = BitVector::zeros(tgt.reps.first().map_or(0, BitVector::len));
                for j in image.iter_ones() {
                    y.add_assign(&tgt.reps[j]);
                }
                let x = src.reduce(&x);
                let y = tgt.reduce(&y);
                out.push(NamedDifferential {
                    r: page.r,
                    source: NamedClass {
                        name: catalog.name(s, t - s as i32 - n, &x),
                        cell: n,
                        s,
                        t,
                        summand: None,
                    },
                    target: NamedClass {
                        name: catalog.name(s + 1, t - s as i32 - 1 - m, &y),
                        cell: m,
                        s: s + 1,
                        t,
                        summand: None,
                    },
                });
            }
        }
        out
    }

    /// Named classes of `E_r` at one position.
    pub fn named_entry(&self, page: &AhssPage, catalog: &SphereCatalog, n: i32, s: u32, t: i32) -> Vec<NamedClass> {
        page.entries.get(&(n, s, t)).map_or_else(Vec::new, |e| {
            e.reps
                .iter()
                .map(|v| NamedClass {
                    name: catalog.name(s, t - s as i32 - n, v),
                    cell: n,
                    s,
                    t,
                    summand: None,
                })
                .collect()
        })
    }

    /// `Σₙ dim E_∞^{n,s,t}` against `dim Ext^{s,t}(m)` for `s ≤ s_max`.
    pub fn convergence_check(&self) -> Result<ConvergenceReport, ResolutionError> {
        let page = self.page(self.span())?;
        let res = self.resolve(&self.module);
        let mut mismatches = Vec::new();
        let mut checked = 0;
        let lo = self.module.bottom().unwrap_or(0);
        for s in 0..=self.s_max {
            for t in lo..=self.t_max {
                let total: usize = self.cells().iter().map(|&n| page.dim(n, s, t)).sum();
                let ext = res.ext_dim(s, t);
                checked += 1;
                if total != ext {
                    mismatches.push(ConvergenceMismatch { s, t, e_infinity: total, ext });
                }
            }
        }
        Ok(ConvergenceReport {
            module: self.module.name(),
            checked,
            mismatches,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceMismatch {
    pub s: u32,
    pub t: i32,
    pub e_infinity: usize,
    pub ext: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub module: String,
    pub checked: usize,
    pub mismatches: Vec<ConvergenceMismatch>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Structural audit of computed pages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Positions where `d_r ∘ d_r ≠ 0`.
    pub dd_failures: Vec<(u32, i32, u32, i32)>,
    /// Positions where `dim E_{r+1} ≠ dim ker d_r − dim im d_r`.
    pub homology_failures: Vec<(u32, i32, u32, i32)>,
    /// Cells where `d₁` disagrees with the parity law.
    pub parity_failures: Vec<(i32, u32, i32)>,
    pub compositions_checked: usize,
    pub homology_checked: usize,
    pub parity_checked: usize,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.dd_failures.is_empty() && self.homology_failures.is_empty() && self.parity_failures.is_empty()
    }
}

/// Checks `d∘d = 0` and `E_{r+1} = H(E_r)` on consecutive pages, and the
/// first-differential parity law on page 1: `d₁` out of an even cell is
/// multiplication by `h0`, out of an odd cell it vanishes.
pub fn structure_check(ahss: &Ahss<'_>, pages: &[AhssPage]) -> Result<StructureReport, ResolutionError> {
    let mut rep = StructureReport::default();
    let s_max = ahss.s_max();
    for (k, page) in pages.iter().enumerate() {
        let r = page.r as i32;
        // Every composable pair of entries counts; zero maps are not stored.
        for &(n, s, t) in page.entries.keys() {
            if s + 1 > s_max
                || !page.entries.contains_key(&(n - r, s + 1, t))
                || !page.entries.contains_key(&(n - 2 * r, s + 2, t))
            {
                continue;
            }
            rep.compositions_checked += 1;
            if let (Some(d), Some(d2)) = (page.differentials.get(&(n, s, t)), page.differentials.get(&(n - r, s + 1, t))) {
                if !d.mul(d2).expect("composable").is_zero() {
                    rep.dd_failures.push((page.r, n, s, t));
                }
            }
        }
        let Some(next) = pages.get(k + 1) else { continue };
        for (&(n, s, t), e) in &page.entries {
            // Differentials out of s_max + 1 are not computed.
            if s > s_max {
                continue;
            }
            let out_rank = page.differentials.get(&(n, s, t)).map_or(0, BitMatrix::rank);
            let in_rank = if s == 0 {
                0
            } else {
                page.differentials.get(&(n + r, s - 1, t)).map_or(0, BitMatrix::rank)
            };
            rep.homology_checked += 1;
            if next.dim(n, s, t) != e.dim - out_rank - in_rank {
                rep.homology_failures.push((page.r, n, s, t));
            }
        }
    }
    if let Some(first) = pages.iter().find(|p| p.r == 1) {
        let res0 = ahss.engine.resolve(&GradedModule::sphere(0), s_max + 1, ahss.t_max() - ahss.module().bottom().unwrap_or(0));
        let h0_index = res0.gens_in_degree(1, 1).start;
        let h0 = multiplication(ahss.engine, &res0, 1, h0_index, res0.t_max())?;
        for &n in ahss.module().cells() {
            if !ahss.module().has_cell(n - 1) {
                continue;
            }
            for s in 0..=s_max {
                for t in (n + s as i32)..=ahss.t_max() {
                    let src_dim = ahss.sphere_dim(n, s, t);
                    let tgt_dim = ahss.sphere_dim(n - 1, s + 1, t);
                    if src_dim == 0 || tgt_dim == 0 {
                        continue;
                    }
                    rep.parity_checked += 1;
                    let d1 = first
                        .differentials
                        .get(&(n, s, t))
                        .cloned()
                        .unwrap_or_else(|| BitMatrix::zeros(src_dim, tgt_dim));
                    let expected = if n % 2 == 0 {
                        block_or_zero(&h0, s, t - n + 1, src_dim, tgt_dim)
                    } else {
                        BitMatrix::zeros(src_dim, tgt_dim)
                    };
                    if d1 != expected {
                        rep.parity_failures.push((n, s, t));
                    }
                }
            }
        }
    }
    Ok(rep)
}
