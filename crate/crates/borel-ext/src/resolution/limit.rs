//! Columns of the Borel Ext as inverse limits over stunted truncations.
//!
//! Column `w` is `lim_K Ext(P_{−K}^{−w−1})`. The column model computes it
//! from bounded-below modules; the truncations are compared with it through
//! transport maps:
//!
//! * `w > 0`: the connecting map `δ` of `0 → M_w → M_K → P_{−K}^{−w−1} → 0`,
//!   raising `s` by one;
//! * `w ≤ 0`: `δ` of `0 → P_{−w} → P_{−K} → P_{−K}^{−w−1} → 0` on the first
//!   summand, and on the `S^{−1}` summand the map induced by the projection
//!   onto cell −1 (a module map because nothing hits or leaves `x^{−1}`
//!   compatibly).
//!
//! Both transports commute with restriction along `P_{−K} ⊂ P_{−deep}`, so
//! their image sits inside the eventual image, which sits inside the image
//! of `Ext(P_{−deep}) → Ext(P_{−K})`. A bidegree is certified when the
//! transport is injective and that image has the column's dimension: the
//! three spaces then coincide.
//!
//! Comparing `K` with `K + 8` alone is not enough. Classes on the bottom
//! cells of a truncation can survive several steps and die only once the
//! truncation is about twice as deep, so [`certified_limit`] first raises
//! `K` until the transport is injective, then raises `deep` from `2K`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::f2::{BitMatrix, BitVector};
use crate::module::{column_model, deleted_model, ColumnPiece, GradedModule, ModuleMap, ShortExactSeq, Summand};

use super::{connecting, induced_map, ExtMap, Resolution, ResolutionError};

/// Step between compared truncation depths.
pub const DEPTH_STEP: i32 = 8;

/// Deepest truncation [`certified_limit`] tries by default.
pub const DEPTH_CAP: i32 = 96;

/// The column model of one weight, resolved. Bidegrees are Borel `s` and
/// classical internal degree `t' = t − w − 1`.
pub struct Column {
    pub w: i32,
    pub s_max: u32,
    pub t_max: i32,
    pub pieces: Vec<(ColumnPiece, Arc<Resolution>)>,
}

/// One basis element of a column: a generator of a piece's resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnGen {
    pub piece: usize,
    pub index: usize,
}

impl Column {
    pub fn new(engine: &Engine, w: i32, s_max: u32, t_max: i32) -> Column {
        let pieces = column_model(w, t_max)
            .into_iter()
            .map(|p| {
                let s = s_max.saturating_sub(p.s_shift);
                let r = engine.resolve(&p.module, s, t_max);
                (p, r)
            })
            .collect();
        Column { w, s_max, t_max, pieces }
    }

    /// Basis of the column at Borel `(s, t')`, pieces in order.
    pub fn basis(&self, s: u32, t: i32) -> Vec<ColumnGen> {
        let mut out = Vec::new();
        if s > self.s_max || t > self.t_max {
            return out;
        }
        for (i, (p, r)) in self.pieces.iter().enumerate() {
            if s < p.s_shift {
                continue;
            }
            let k = s - p.s_shift;
            if k > r.s_max() {
                continue;
            }
            out.extend(r.gens_in_degree(k, t).map(|index| ColumnGen { piece: i, index }));
        }
        out
    }

    pub fn dim(&self, s: u32, t: i32) -> usize {
        self.basis(s, t).len()
    }

    pub fn summand(&self, g: ColumnGen) -> Summand {
        self.pieces[g.piece].0.summand
    }

    /// Classical bidegree `(s − shift, t')` of a basis element in its piece.
    pub fn piece_filtration(&self, g: ColumnGen, s: u32) -> u32 {
        s - self.pieces[g.piece].0.s_shift
    }
}

/// Certificate for one bidegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitCell {
    pub s: u32,
    pub t: i32,
    pub column_dim: usize,
    /// Rank of the transport into `Ext(P_{−K}^{−w−1})`.
    pub transport_rank: usize,
    /// Rank of `Ext(P_{−deep}) → Ext(P_{−K})`: an upper bound for the
    /// eventual image.
    pub image_rank: usize,
    /// Whether the certificate is required here.
    pub in_window: bool,
}

impl LimitCell {
    pub fn stabilized(&self) -> bool {
        self.transport_rank == self.column_dim && self.image_rank == self.column_dim
    }

    /// Eventual-image dimension as certified; meaningful when stabilized.
    pub fn limit_dim(&self) -> usize {
        self.image_rank
    }
}

pub struct ColumnLimit {
    pub w: i32,
    pub depth: i32,
    /// Depth of the comparison truncation.
    pub deep: i32,
    pub column: Column,
    /// `P_{−K}^{−w−1}` resolved through the window.
    pub truncation: Arc<Resolution>,
    /// Column basis at Borel `(s, t')` → `Ext^{s,t'}(P_{−K}^{−w−1})`.
    pub transport: ExtMap,
    pub cells: BTreeMap<(u32, i32), LimitCell>,
}

impl ColumnLimit {
    /// Every in-window bidegree is certified.
    pub fn stabilized(&self) -> bool {
        self.cells.values().filter(|c| c.in_window).all(LimitCell::stabilized)
    }

    /// The transport is injective on every in-window bidegree.
    pub fn transport_injective(&self) -> bool {
        self.cells
            .values()
            .filter(|c| c.in_window)
            .all(|c| c.transport_rank == c.column_dim)
    }

    pub fn unstabilized(&self) -> Vec<(u32, i32)> {
        self.cells
            .values()
            .filter(|c| c.in_window && !c.stabilized())
            .map(|c| (c.s, c.t))
            .collect()
    }

    /// Image of a column class in `Ext(P_{−K}^{−w−1})`.
    pub fn transport_vector(&self, s: u32, t: i32, v: &BitVector) -> BitVector {
        match self.transport.matrix(s, t) {
            Some(m) => m.vec_mul(v).expect("column vector"),
            None => BitVector::zeros(self.truncation.ext_dim(s, t)),
        }
    }

    /// Column coordinates of a class in the transport image, if it is one.
    pub fn solve(&self, s: u32, t: i32, target: &BitVector) -> Option<BitVector> {
        let dim = self.column.dim(s, t);
        let m = match self.transport.matrix(s, t) {
            Some(m) => m.clone(),
            None => BitMatrix::zeros(dim, target.len()),
        };
        crate::f2::solve(&m.transpose(), target).expect("dimensions agree")
    }
}

/// `P_{−K}^{−w−1}` truncated at `t_max`.
pub fn truncation_module(w: i32, depth: i32, t_max: i32) -> GradedModule {
    GradedModule::from_cells(-depth..=(-w - 1).min(t_max))
}

/// Which bidegrees `(s, t')` a certificate must cover.
pub type Window<'a> = &'a (dyn Fn(u32, i32) -> bool + Sync);

/// Eventual-image computation for column `w` at depth `depth`, bounded
/// above through `deep`.
pub fn ext_of_limit(
    engine: &Engine,
    w: i32,
    s_max: u32,
    t_max: i32,
    depth: i32,
    deep: i32,
    window: Window<'_>,
) -> Result<ColumnLimit, ResolutionError> {
    assert!(depth > w.max(0) + 1, "truncation depth {depth} does not reach below column {w}");
    assert!(deep > depth, "comparison depth {deep} must exceed {depth}");
    let column = Column::new(engine, w, s_max, t_max);
    let quot = truncation_module(w, depth, t_max);
    let deeper = truncation_module(w, deep, t_max);
    let r_quot = engine.resolve(&quot, s_max, t_max);
    let r_deeper = engine.resolve(&deeper, s_max, t_max);
    let restrict = ModuleMap::on_common_cells(&quot, &deeper).expect("cells below a cutoff form a submodule");
    let f0 = induced_map(&restrict, &r_quot, &r_deeper, t_max)?;

    // Transport pieces, each in its own piece coordinates.
    let mut piece_maps: Vec<ExtMap> = Vec::new();
    for (p, r) in &column.pieces {
        let m = match p.summand {
            Summand::Column => {
                let mid = if w > 0 {
                    deleted_model(depth, t_max)
                } else {
                    GradedModule::from_cells(-depth..=t_max)
                };
                let ses = ShortExactSeq::new(&p.module.at_most(t_max), &mid).expect("column sits in the deeper model");
                assert_eq!(ses.quot(), &quot);
                connecting(&ses, r, &r_quot, t_max)?
            }
            Summand::Sphere => {
                let proj = ModuleMap::with_support(&quot, &p.module, vec![-1]).expect("projection onto cell -1 is linear");
                induced_map(&proj, &r_quot, r, t_max)?
            }
        };
        piece_maps.push(m);
    }

    let mut blocks = BTreeMap::new();
    let mut cells = BTreeMap::new();
    for s in 0..=s_max {
        for t in r_quot.t_min().min(column_t_min(&column))..=t_max {
            let basis = column.basis(s, t);
            let target_dim = r_quot.ext_dim(s, t);
            let mut m = BitMatrix::zeros(basis.len(), target_dim);
            for (row, g) in basis.iter().enumerate() {
                let (p, _) = &column.pieces[g.piece];
                let k = s - p.s_shift;
                let Some(block) = piece_maps[g.piece].matrix(k, t) else {
                    continue;
                };
                let local = g.index - column.pieces[g.piece].1.gens_in_degree(k, t).start;
                for c in 0..target_dim {
                    if block.get(local, c) {
                        m.set(row, c, true);
                    }
                }
            }
            let image_rank = f0.matrix(s, t).map_or(0, |b| b.rank());
            let cell = LimitCell {
                s,
                t,
                column_dim: basis.len(),
                transport_rank: m.rank(),
                image_rank,
                in_window: window(s, t),
            };
            if cell.column_dim > 0 || cell.image_rank > 0 || target_dim > 0 {
                cells.insert((s, t), cell);
            }
            if m.rows() > 0 || m.cols() > 0 {
                blocks.insert((s, t), m);
            }
        }
    }
    let transport = ExtMap {
        source: format!("column {w}"),
        target: quot.name(),
        s_shift: 0,
        blocks,
    };
    Ok(ColumnLimit {
        w,
        depth,
        deep,
        column,
        truncation: r_quot,
        transport,
        cells,
    })
}

fn column_t_min(column: &Column) -> i32 {
    column
        .pieces
        .iter()
        .map(|(_, r)| r.t_min())
        .min()
        .unwrap_or(column.t_max + 1)
}

/// Certified limit of column `w` on `window`.
///
/// `K` starts at `max(w, 0) + 8` and rises by 8 until the transport is
/// injective; `deep` then starts at `2K` and rises by 8 until every window
/// bidegree is certified. Both stop at `cap`; the result then reports its
/// uncertified bidegrees instead of failing.
pub fn certified_limit(
    engine: &Engine,
    w: i32,
    s_max: u32,
    t_max: i32,
    window: Window<'_>,
    cap: i32,
) -> Result<ColumnLimit, ResolutionError> {
    let mut depth = w.max(0) + DEPTH_STEP;
    let mut limit = ext_of_limit(engine, w, s_max, t_max, depth, depth + DEPTH_STEP, window)?;
    while !limit.transport_injective() && depth + 2 * DEPTH_STEP <= cap {
        depth += DEPTH_STEP;
        limit = ext_of_limit(engine, w, s_max, t_max, depth, depth + DEPTH_STEP, window)?;
    }
    let mut deep = (2 * depth).min(cap).max(depth + DEPTH_STEP);
    loop {
        if deep != limit.deep {
            limit = ext_of_limit(engine, w, s_max, t_max, depth, deep, window)?;
        }
        if limit.stabilized() || deep >= cap {
            return Ok(limit);
        }
        deep = (deep + DEPTH_STEP).min(cap);
    }
}
