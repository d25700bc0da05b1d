//! Minimal free resolutions over the Steenrod algebra.
//!
//! Bidegrees are filled in the order `t` outer, `s` inner, so `(s, t)` sees
//! every `(s−1, ≤t)` and `(s, <t)`. At each step the old generators' images
//! are row reduced together with an identity block: reduced on the image
//! columns, echelon on the identity columns. The zero rows give an echelon
//! basis of `ker d_s`, from which the new generators of `F_{s+1}` are picked
//! by pivot position. Elements of `F_s` in degree `t` are bit vectors over
//! the basis `(generator, Milnor basis element)` with generators in
//! discovery order.

mod cache;
mod chain;
pub mod limit;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f2::{BitMatrix, BitVector, Reducer};
use crate::module::GradedModule;
use crate::steenrod::AlgebraTable;

pub use cache::{load_resolution, save_resolution, CacheError, CACHE_FORMAT_VERSION};
pub use chain::{connecting, induced_map, ChainMap};

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("bidegree ({s},{t}) is outside the resolved window s <= {s_max}, t <= {t_max}")]
    Window { s: u32, t: i32, s_max: u32, t_max: i32 },
    #[error("lift failed at ({s},{t}): {context}")]
    Lift { s: u32, t: i32, context: String },
    #[error("exactness violated at ({s},{t}): {detail}")]
    Exactness { s: u32, t: i32, detail: String },
}

/// One term `b·g` of a differential: generator index in `F_{s−1}` and the
/// Milnor basis element `b` (degree, index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub gen: u32,
    pub deg: u32,
    pub idx: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub degree: i32,
    /// Ordinal among generators of the same `(s, t)`.
    pub ordinal: u32,
    /// `d(g)` in `F_{s−1}` at this degree; empty for `s = 0`.
    pub d: BitVector,
    pub terms: Vec<Term>,
}

/// Dimensions of Ext in a window, with generator ids `g{s}_{t}_{i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtChart {
    pub module: String,
    pub s_max: u32,
    pub t_min: i32,
    pub t_max: i32,
    pub dims: BTreeMap<(u32, i32), usize>,
}

impl ExtChart {
    pub fn dim(&self, s: u32, t: i32) -> usize {
        self.dims.get(&(s, t)).copied().unwrap_or(0)
    }

    pub fn generator_name(s: u32, t: i32, i: usize) -> String {
        format!("g{s}_{t}_{i}")
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.dims
            .iter()
            .flat_map(|(&(s, t), &n)| (0..n).map(move |i| Self::generator_name(s, t, i)))
            .collect()
    }
}

/// Echelon basis of a kernel with its leading columns.
#[derive(Default)]
struct Kernel {
    vectors: Vec<BitVector>,
    pivots: Vec<usize>,
}

pub struct Resolution {
    module: GradedModule,
    algebra: Arc<AlgebraTable>,
    s_max: u32,
    t_min: i32,
    t_max: i32,
    gens: Vec<Vec<Generator>>,
    /// `images[s][t − t_min]`: image of `d_s` in degree `t` with preimages.
    images: Vec<Vec<Reducer>>,
    /// `offsets[s][t − t_min][j]`: start of generator `j`'s block in `F_s,t`;
    /// the last entry is the total dimension.
    offsets: Vec<Vec<Vec<u32>>>,
}

impl fmt::Debug for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Resolution({}, s<={}, t<={})",
            self.module.name(),
            self.s_max,
            self.t_max
        )
    }
}

impl Resolution {
    /// Resolves `module` through `s_max` and internal degree `t_max`.
    pub fn new(module: &GradedModule, algebra: Arc<AlgebraTable>, s_max: u32, t_max: i32) -> Self {
        let t_min = module.bottom().unwrap_or(t_max + 1).min(t_max + 1);
        let span = (t_max - t_min).max(0) as u32;
        assert!(
            algebra.max_degree() >= span,
            "algebra table cap {} below resolution span {span}",
            algebra.max_degree()
        );
        let nt = (t_max - t_min + 1).max(0) as usize;
        let ns = s_max as usize + 1;
        let mut res = Resolution {
            module: module.clone(),
            algebra,
            s_max,
            t_min,
            t_max,
            gens: vec![Vec::new(); ns],
            images: vec![Vec::with_capacity(nt); ns],
            offsets: vec![Vec::with_capacity(nt); ns],
        };
        for t in t_min..=t_max {
            let mut prev_kernel = Kernel::default();
            for s in 0..=s_max {
                prev_kernel = res.step(s, t, &prev_kernel);
            }
        }
        res
    }

    pub(crate) fn from_parts(
        module: GradedModule,
        algebra: Arc<AlgebraTable>,
        s_max: u32,
        t_max: i32,
        gens: Vec<Vec<Generator>>,
        images: Vec<Vec<Reducer>>,
    ) -> Self {
        let t_min = module.bottom().unwrap_or(t_max + 1).min(t_max + 1);
        let mut res = Resolution {
            module,
            algebra,
            s_max,
            t_min,
            t_max,
            gens,
            images,
            offsets: vec![Vec::new(); s_max as usize + 1],
        };
        for t in t_min..=t_max {
            for s in 0..=s_max {
                let o = res.compute_offsets(s, t);
                res.offsets[s as usize].push(o);
            }
        }
        res
    }

    fn compute_offsets(&self, s: u32, t: i32) -> Vec<u32> {
        let mut o = Vec::new();
        let mut acc = 0u32;
        for g in &self.gens[s as usize] {
            if g.degree > t {
                break;
            }
            o.push(acc);
            acc += self.algebra.dim(t - g.degree) as u32;
        }
        o.push(acc);
        o
    }

    /// Computes `(s, t)`; `prev_kernel` is an echelon basis of `ker d_{s−1}`
    /// in degree `t`. Returns the same for `ker d_s`.
    ///
    /// The image of `d_s` and the kernel of `d_{s−1}` both come in echelon
    /// form, and the leading positions of a subspace lie among those of any
    /// space containing it. So the kernel rows whose pivots the image misses span
    /// a complement, and become the new generators without further
    /// reduction.
    fn step(&mut self, s: u32, t: i32, prev_kernel: &Kernel) -> Kernel {
        let su = s as usize;
        let old_offsets = self.compute_offsets(s, t);
        let n_old = *old_offsets.last().expect("offsets end with the total") as usize;
        let n_old_gens = old_offsets.len() - 1;
        let target_dim = if s == 0 {
            self.module.dim(t)
        } else {
            self.dim_free(s - 1, t)
        };

        let width = target_dim + n_old;
        let mut m = BitMatrix::zeros(n_old, width);
        for (j, g) in self.gens[su][..n_old_gens].iter().enumerate() {
            let base = old_offsets[j] as usize;
            let k = (t - g.degree) as u32;
            if s == 0 {
                if target_dim == 1 {
                    for (ia, a) in self.algebra.basis(k).iter().enumerate() {
                        if self.module.milnor(a, g.degree) {
                            m.set(base + ia, 0, true);
                        }
                    }
                }
            } else {
                let tgt_offsets = &self.offsets[su - 1][(t - self.t_min) as usize];
                for term in &g.terms {
                    let o = tgt_offsets[term.gen as usize] as usize;
                    for (ia, prods) in self
                        .algebra
                        .left_products(k, term.deg, term.idx as usize)
                        .enumerate()
                    {
                        for &p in prods {
                            m.flip(base + ia, o + p as usize);
                        }
                    }
                }
            }
        }
        for r in 0..n_old {
            m.set(r, target_dim + r, true);
        }
        let last = s == self.s_max;
        let all_pivots = m.reduce_mixed(0, if last { target_dim } else { width });
        let rank = all_pivots.partition_point(|&p| p < target_dim);

        let (required, req_pivots): (Vec<BitVector>, Vec<usize>) = if s == 0 {
            ((0..target_dim).map(|i| BitVector::unit(target_dim, i)).collect(), (0..target_dim).collect())
        } else {
            (prev_kernel.vectors.clone(), prev_kernel.pivots.clone())
        };
        let mut hit = vec![false; target_dim];
        for &p in &all_pivots[..rank] {
            hit[p] = true;
        }
        let fresh: Vec<usize> = (0..required.len()).filter(|&i| !hit[req_pivots[i]]).collect();
        let full = n_old + fresh.len();

        let mut entries: Vec<(usize, BitVector, BitVector)> = Vec::with_capacity(rank + fresh.len());
        for (r, &p) in all_pivots[..rank].iter().enumerate() {
            let row = m.row(r);
            entries.push((p, row.slice(0, target_dim), row.slice(target_dim, n_old).extended(full)));
        }
        let mut new_gens = Vec::with_capacity(fresh.len());
        for (ordinal, &i) in fresh.iter().enumerate() {
            let w = required[i].clone();
            let terms = if s == 0 { Vec::new() } else { self.decode(s - 1, t, &w) };
            entries.push((req_pivots[i], w.clone(), BitVector::unit(full, n_old + ordinal)));
            new_gens.push(Generator {
                degree: t,
                ordinal: ordinal as u32,
                d: w,
                terms,
            });
        }
        entries.sort_by_key(|e| e.0);
        let mut pivots = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        let mut pres = Vec::with_capacity(entries.len());
        for (p, r, pre) in entries {
            pivots.push(p);
            rows.push(r);
            pres.push(pre);
        }
        let kernel = if last {
            Kernel::default()
        } else {
            Kernel {
                vectors: (rank..n_old).map(|r| m.row(r).slice(target_dim, n_old).extended(full)).collect(),
                pivots: all_pivots[rank..].iter().map(|&p| p - target_dim).collect(),
            }
        };
        drop(m);
        self.gens[su].extend(new_gens);
        self.images[su].push(Reducer::from_parts(target_dim, full, pivots, rows, pres));
        let offs = self.compute_offsets(s, t);
        self.offsets[su].push(offs);
        kernel
    }

    /// Splits a vector of `F_s,t` into its terms.
    pub(crate) fn decode(&self, s: u32, t: i32, v: &BitVector) -> Vec<Term> {
        let offs = &self.offsets[s as usize][(t - self.t_min) as usize];
        let mut out = Vec::new();
        for bit in v.iter_ones() {
            let j = offs.partition_point(|&o| o as usize <= bit) - 1;
            let g = &self.gens[s as usize][j];
            out.push(Term {
                gen: j as u32,
                deg: (t - g.degree) as u32,
                idx: bit as u32 - offs[j],
            });
        }
        out
    }

    /// The same resolution for the module shifted up by `k`. Only valid
    /// when the shift preserves the action, which the engine guarantees by
    /// shifting in multiples of a power of two exceeding the module's span.
    pub fn shifted(&self, k: i32) -> Resolution {
        let gens = self
            .gens
            .iter()
            .map(|row| {
                row.iter()
                    .map(|g| Generator {
                        degree: g.degree + k,
                        ..g.clone()
                    })
                    .collect()
            })
            .collect();
        Resolution {
            module: self.module.shifted(k),
            algebra: self.algebra.clone(),
            s_max: self.s_max,
            t_min: self.t_min + k,
            t_max: self.t_max + k,
            gens,
            images: self.images.clone(),
            offsets: self.offsets.clone(),
        }
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn algebra(&self) -> &Arc<AlgebraTable> {
        &self.algebra
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn t_max(&self) -> i32 {
        self.t_max
    }

    pub fn t_min(&self) -> i32 {
        self.t_min
    }

    pub fn covers(&self, s: u32, t: i32) -> bool {
        s <= self.s_max && t <= self.t_max
    }

    pub fn check_window(&self, s: u32, t: i32) -> Result<(), ResolutionError> {
        if self.covers(s, t) {
            Ok(())
        } else {
            Err(ResolutionError::Window {
                s,
                t,
                s_max: self.s_max,
                t_max: self.t_max,
            })
        }
    }

    pub fn generators(&self, s: u32) -> &[Generator] {
        &self.gens[s as usize]
    }

    /// Indices of the generators of `F_s` in degree exactly `t`.
    pub fn gens_in_degree(&self, s: u32, t: i32) -> std::ops::Range<usize> {
        let g = &self.gens[s as usize];
        let lo = g.partition_point(|x| x.degree < t);
        let hi = g.partition_point(|x| x.degree <= t);
        lo..hi
    }

    /// `dim Ext^{s,t}`; zero outside the window.
    pub fn ext_dim(&self, s: u32, t: i32) -> usize {
        if s > self.s_max || t > self.t_max {
            return 0;
        }
        self.gens_in_degree(s, t).len()
    }

    /// `dim F_s` in degree `t`.
    pub fn dim_free(&self, s: u32, t: i32) -> usize {
        if t < self.t_min {
            return 0;
        }
        let i = (t - self.t_min) as usize;
        match self.offsets[s as usize].get(i) {
            Some(o) => *o.last().expect("offsets end with the total") as usize,
            None => panic!("F_{s} in degree {t} not computed"),
        }
    }

    pub(crate) fn offsets(&self, s: u32, t: i32) -> &[u32] {
        &self.offsets[s as usize][(t - self.t_min) as usize]
    }

    pub(crate) fn image(&self, s: u32, t: i32) -> &Reducer {
        &self.images[s as usize][(t - self.t_min) as usize]
    }

    pub(crate) fn images_all(&self) -> &Vec<Vec<Reducer>> {
        &self.images
    }

    pub fn chart(&self) -> ExtChart {
        let mut dims = BTreeMap::new();
        for s in 0..=self.s_max {
            for g in &self.gens[s as usize] {
                *dims.entry((s, g.degree)).or_insert(0) += 1;
            }
        }
        ExtChart {
            module: self.module.name(),
            s_max: self.s_max,
            t_min: self.t_min,
            t_max: self.t_max,
            dims,
        }
    }

    /// Adds `b · v` into `out`, where `v ∈ F_s` in degree `u` and `b` is a
    /// Milnor basis element of degree `db`; `out` lives in degree `u + db`.
    pub(crate) fn mul_add(&self, s: u32, db: u32, ib: usize, u: i32, v: &BitVector, out: &mut BitVector) {
        let offs_src = self.offsets(s, u);
        let offs_dst = self.offsets(s, u + db as i32);
        for bit in v.iter_ones() {
            let j = offs_src.partition_point(|&o| o as usize <= bit) - 1;
            let dc = (u - self.gens[s as usize][j].degree) as u32;
            let ic = bit - offs_src[j] as usize;
            let base = offs_dst[j] as usize;
            for &p in self.algebra.product(db, ib, dc, ic) {
                out.flip(base + p as usize);
            }
        }
    }

    /// Position of `(unit, generator j)` in `F_s` at the generator's degree.
    pub(crate) fn unit_position(&self, s: u32, j: usize) -> usize {
        let t = self.gens[s as usize][j].degree;
        self.offsets(s, t)[j] as usize
    }

    /// Checks `dim F_s,t = rank d_s + rank d_{s+1}` and minimality
    /// everywhere in the window.
    pub fn verify(&self) -> Result<(), ResolutionError> {
        for t in self.t_min..=self.t_max {
            for s in 0..self.s_max {
                let dim = self.dim_free(s, t);
                let r0 = self.image(s, t).rank();
                let r1 = self.image(s + 1, t).rank();
                if dim != r0 + r1 {
                    return Err(ResolutionError::Exactness {
                        s,
                        t,
                        detail: format!("dim {dim} != rank d_s {r0} + rank d_s+1 {r1}"),
                    });
                }
            }
            if self.image(0, t).rank() != self.module.dim(t) {
                return Err(ResolutionError::Exactness {
                    s: 0,
                    t,
                    detail: "augmentation not surjective".into(),
                });
            }
        }
        for s in 1..=self.s_max {
            for g in &self.gens[s as usize] {
                if g.terms.iter().any(|term| term.deg == 0) {
                    return Err(ResolutionError::Exactness {
                        s,
                        t: g.degree,
                        detail: "differential has a degree-zero entry".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Linear maps between Ext groups, one matrix per bidegree. Row `i` of the
/// matrix at `(s, t)` is the image of source basis vector `i` in the target
/// at `(s + s_shift, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtMap {
    pub source: String,
    pub target: String,
    pub s_shift: u32,
    pub blocks: BTreeMap<(u32, i32), BitMatrix>,
}

impl ExtMap {
    pub fn matrix(&self, s: u32, t: i32) -> Option<&BitMatrix> {
        self.blocks.get(&(s, t))
    }

    /// Image of `v ∈ Ext^{s,t}(source)`.
    pub fn apply(&self, s: u32, t: i32, v: &BitVector) -> Option<BitVector> {
        self.matrix(s, t).map(|m| m.vec_mul(v).expect("vector matches source dimension"))
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &ExtMap) -> ExtMap {
        let mut blocks = BTreeMap::new();
        for (&(s, t), m) in &self.blocks {
            if let Some(n) = then.blocks.get(&(s + self.s_shift, t)) {
                blocks.insert((s, t), m.mul(n).expect("composable ext maps"));
            }
        }
        ExtMap {
            source: self.source.clone(),
            target: then.target.clone(),
            s_shift: self.s_shift + then.s_shift,
            blocks,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.blocks
            .values()
            .all(|m| m.rows() == m.cols() && *m == BitMatrix::identity(m.rows()))
    }
}
