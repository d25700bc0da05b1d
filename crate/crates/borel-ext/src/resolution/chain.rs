//! Chain maps between resolutions, induced Ext maps and connecting maps.

use std::collections::BTreeMap;

use crate::f2::{BitMatrix, BitVector};
use crate::module::{GradedModule, ModuleMap, ShortExactSeq};

use super::{ExtMap, Resolution, ResolutionError};

/// A chain map `φ_k: P_{k+shift} → Q_k` lifting a map on augmentations.
/// `images[k][j]` is `φ_k` of generator `j` of `P_{k+shift}`, an element of
/// `Q_k` in the generator's degree.
pub struct ChainMap {
    pub shift: u32,
    pub images: Vec<Vec<BitVector>>,
}

impl ChainMap {
    /// Lifts `initial` (for each generator of `P_shift`, whether it maps to
    /// the cell of `Q`'s module in its degree) through both resolutions.
    pub fn lift(
        src: &Resolution,
        tgt: &Resolution,
        shift: u32,
        t_max: i32,
        initial: impl Fn(usize, i32) -> bool,
    ) -> Result<ChainMap, ResolutionError> {
        let t_max = t_max.min(src.t_max()).min(tgt.t_max());
        let k_max = tgt.s_max().min(src.s_max().saturating_sub(shift));
        let mut images: Vec<Vec<BitVector>> = Vec::new();
        if src.s_max() < shift {
            return Ok(ChainMap { shift, images });
        }
        for k in 0..=k_max {
            let ps = k + shift;
            let mut row = Vec::new();
            for (j, g) in src.generators(ps).iter().enumerate() {
                let t = g.degree;
                if t > t_max {
                    break;
                }
                if t < tgt.t_min() {
                    // Q_k vanishes below its module's bottom cell.
                    row.push(BitVector::zeros(0));
                    continue;
                }
                let z = if k == 0 {
                    let target_dim = tgt.module().dim(t);
                    if initial(j, t) {
                        if target_dim == 0 {
                            return Err(ResolutionError::Lift {
                                s: 0,
                                t,
                                context: "initial map lands outside the target module".into(),
                            });
                        }
                        tgt.image(0, t)
                            .solve(&BitVector::unit(1, 0))
                            .ok_or_else(|| ResolutionError::Lift {
                                s: 0,
                                t,
                                context: "augmentation not surjective".into(),
                            })?
                    } else {
                        BitVector::zeros(tgt.dim_free(0, t))
                    }
                } else {
                    let mut v = BitVector::zeros(tgt.dim_free(k - 1, t));
                    for term in &g.terms {
                        let prev = &images[k as usize - 1][term.gen as usize];
                        if prev.is_empty() {
                            continue;
                        }
                        let u = src.generators(ps - 1)[term.gen as usize].degree;
                        tgt.mul_add(k - 1, term.deg, term.idx as usize, u, prev, &mut v);
                    }
                    tgt.image(k, t).solve(&v).ok_or_else(|| ResolutionError::Lift {
                        s: k,
                        t,
                        context: "cycle is not a boundary".into(),
                    })?
                };
                row.push(z);
            }
            images.push(row);
        }
        Ok(ChainMap { shift, images })
    }

    /// Ext matrices: rows are `Ext^{k,t}(Q)` generators, columns are
    /// `Ext^{k+shift,t}(P)` generators.
    pub fn ext_map(&self, src: &Resolution, tgt: &Resolution, t_max: i32) -> ExtMap {
        let mut blocks = BTreeMap::new();
        let t_lo = src.t_min().min(tgt.t_min());
        for (k, row) in self.images.iter().enumerate() {
            let k = k as u32;
            let ps = k + self.shift;
            for t in t_lo..=t_max.min(src.t_max()).min(tgt.t_max()) {
                let cols = src.gens_in_degree(ps, t);
                let rows = tgt.gens_in_degree(k, t);
                let mut m = BitMatrix::zeros(rows.len(), cols.len());
                for (ci, j) in cols.clone().enumerate() {
                    let Some(img) = row.get(j) else { continue };
                    if img.is_empty() {
                        continue;
                    }
                    for (ri, h) in rows.clone().enumerate() {
                        if img.get(tgt.unit_position(k, h)) {
                            m.set(ri, ci, true);
                        }
                    }
                }
                if m.rows() > 0 || m.cols() > 0 {
                    blocks.insert((k, t), m);
                }
            }
        }
        ExtMap {
            source: tgt.module().name(),
            target: src.module().name(),
            s_shift: self.shift,
            blocks,
        }
    }
}

/// Whether `r` resolves `m` in every degree that matters below `t_max`.
fn resolves(r: &Resolution, m: &GradedModule, t_max: i32) -> bool {
    let t = t_max.min(r.t_max());
    r.module().at_most(t) == m.at_most(t)
}

/// The map `Ext(target) → Ext(source)` induced by `f: source → target`.
/// `r_src` resolves `f.source`, `r_tgt` resolves `f.target`.
pub fn induced_map(
    f: &ModuleMap,
    r_src: &Resolution,
    r_tgt: &Resolution,
    t_max: i32,
) -> Result<ExtMap, ResolutionError> {
    assert!(resolves(r_src, &f.source, t_max), "resolution does not match map source");
    assert!(resolves(r_tgt, &f.target, t_max), "resolution does not match map target");
    let chain = ChainMap::lift(r_src, r_tgt, 0, t_max, |_, t| f.maps(t))?;
    Ok(chain.ext_map(r_src, r_tgt, t_max))
}

/// `δ: Ext^{s,t}(sub) → Ext^{s+1,t}(quot)` for `0 → sub → mid → quot → 0`.
pub fn connecting(
    ses: &ShortExactSeq,
    r_sub: &Resolution,
    r_quot: &Resolution,
    t_max: i32,
) -> Result<ExtMap, ResolutionError> {
    assert!(resolves(r_sub, ses.sub(), t_max), "resolution does not match sub");
    assert!(resolves(r_quot, ses.quot(), t_max), "resolution does not match quotient");
    let mid = ses.mid();
    if r_quot.s_max() == 0 {
        return Ok(ExtMap {
            source: r_sub.module().name(),
            target: r_quot.module().name(),
            s_shift: 1,
            blocks: BTreeMap::new(),
        });
    }
    // ψ(g) for g ∈ F₁(quot): push d(g) ∈ F₀(quot) through the cell lift
    // F₀(quot) → mid; the result lies in sub.
    let f0 = r_quot.generators(0);
    let psi: Vec<bool> = r_quot
        .generators(1)
        .iter()
        .map(|g| {
            let mut bit = false;
            for term in &g.terms {
                let n = f0[term.gen as usize].degree;
                let b = &r_quot.algebra().basis(term.deg)[term.idx as usize];
                if mid.milnor(b, n) {
                    bit = !bit;
                }
            }
            if bit {
                assert!(
                    ses.sub().has_cell(g.degree),
                    "connecting lift leaves the submodule in degree {}",
                    g.degree
                );
            }
            bit
        })
        .collect();
    let chain = ChainMap::lift(r_quot, r_sub, 1, t_max, |j, _| psi[j])?;
    Ok(chain.ext_map(r_quot, r_sub, t_max))
}
