//! Names for classes in the Ext of the sphere.
//!
//! The indecomposables through stem 30 ship as a data file. Every other
//! basis class is a product, found by lifting each indecomposable to a
//! chain map and multiplying. At each bidegree a basis is chosen greedily
//! from the candidate monomials (smallest factor list first, so `h0^2h2`
//! wins over `h1^3`), then completed by the indecomposables listed there.
//! The number of listed indecomposables must equal the dimension of the
//! indecomposable quotient; a mismatch is reported, not papered over.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::engine::Engine;
use crate::f2::{BitVector, Reducer};
use crate::module::GradedModule;
use crate::resolution::{ChainMap, ExtMap, Resolution, ResolutionError};

const DATA: &str = include_str!("../data/sphere_indecomposables.txt");

/// Highest stem the shipped indecomposables cover.
pub const CATALOG_STEM_MAX: i32 = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Indecomposable {
    pub name: String,
    pub stem: i32,
    pub s: u32,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("bad catalog line {line}: {text:?}")]
    Parse { line: usize, text: String },
    #[error("at (stem {stem}, s {s}) the catalog lists {listed} indecomposables but Ext has {actual}")]
    Count { stem: i32, s: u32, listed: usize, actual: usize },
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
}

pub fn indecomposables() -> Result<Vec<Indecomposable>, CatalogError> {
    let mut out = Vec::new();
    for (i, line) in DATA.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CatalogError::Parse {
            line: i + 1,
            text: line.to_string(),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(bad());
        }
        out.push(Indecomposable {
            name: f[0].to_string(),
            stem: f[1].parse().map_err(|_| bad())?,
            s: f[2].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

/// A product of indecomposables: exponent per catalog index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Monomial(Vec<u32>);

impl Monomial {
    fn factors(&self) -> Vec<usize> {
        let mut f = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            f.extend(std::iter::repeat_n(i, e as usize));
        }
        f
    }

    fn times(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e[i] += 1;
        Monomial(e)
    }

    fn render(&self, gens: &[Indecomposable]) -> String {
        let mut s = String::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            s.push_str(&gens[i].name);
            if e > 1 {
                s.push_str(&format!("^{e}"));
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

/// One named basis vector of `Ext^{s,s+stem}(F₂, F₂)`.
#[derive(Clone, Debug)]
pub struct NamedVector {
    pub name: String,
    pub vector: BitVector,
}

/// Named bases of the sphere's Ext in a window.
pub struct SphereCatalog {
    pub s_max: u32,
    pub stem_max: i32,
    resolution: Arc<Resolution>,
    bases: BTreeMap<(u32, i32), Vec<NamedVector>>,
    /// Same bases as reducers, for expressing vectors.
    solvers: BTreeMap<(u32, i32), Reducer>,
}

impl SphereCatalog {
    pub fn build(engine: &Engine, s_max: u32, stem_max: i32) -> Result<SphereCatalog, CatalogError> {
        let gens = indecomposables()?;
        let t_max = stem_max + s_max as i32;
        let res = engine.resolve(&GradedModule::sphere(0), s_max, t_max);

        // Multiplication maps, filled in as each indecomposable is placed.
        let mut located: Vec<Option<usize>> = vec![None; gens.len()];
        let mut products: Vec<Option<ExtMap>> = vec![None; gens.len()];

        let mut bases: BTreeMap<(u32, i32), Vec<NamedVector>> = BTreeMap::new();
        let mut monomials: BTreeMap<(u32, i32), Vec<(Monomial, BitVector)>> = BTreeMap::new();
        let n = gens.len();
        bases.insert(
            (0, 0),
            vec![NamedVector {
                name: "1".into(),
                vector: BitVector::unit(1, 0),
            }],
        );
        monomials.insert((0, 0), vec![(Monomial(vec![0; n]), BitVector::unit(1, 0))]);

        // Bidegrees by increasing s: products only come from below.
        for s in 1..=s_max {
            for stem in 0..=stem_max {
                let t = stem + s as i32;
                let dim = res.ext_dim(s, t);
                let listed: Vec<usize> = (0..n).filter(|&i| gens[i].s == s && gens[i].stem == stem).collect();
                if dim == 0 {
                    if !listed.is_empty() {
                        return Err(CatalogError::Count {
                            stem,
                            s,
                            listed: listed.len(),
                            actual: 0,
                        });
                    }
                    continue;
                }
                let mut candidates: Vec<(Monomial, BitVector)> = Vec::new();
                for (i, g) in gens.iter().enumerate() {
                    if g.s >= s || g.stem > stem || products[i].is_none() {
                        continue;
                    }
                    let Some(lower) = monomials.get(&(s - g.s, stem - g.stem)) else {
                        continue;
                    };
                    if lower.is_empty() {
                        continue;
                    }
                    let prod = products[i].as_ref().expect("checked above");
                    let Some(m) = prod.matrix(s - g.s, t) else { continue };
                    for (mono, v) in lower {
                        let w = m.vec_mul(v).expect("vector matches Ext dimension");
                        if !w.is_zero() {
                            candidates.push((mono.times(i), w));
                        }
                    }
                }
                candidates.sort_by_key(|a| a.0.factors());
                candidates.dedup_by(|a, b| a.0 == b.0);

                let mut span = Reducer::new(dim, 0);
                let mut chosen: Vec<(Monomial, BitVector)> = Vec::new();
                for (mono, v) in candidates {
                    if span.insert(v.clone(), BitVector::zeros(0)) {
                        chosen.push((mono, v));
                    }
                }
                let actual = dim - span.rank();
                if actual != listed.len() {
                    return Err(CatalogError::Count {
                        stem,
                        s,
                        listed: listed.len(),
                        actual,
                    });
                }
                // Complete with resolution basis vectors, in order.
                let mut extra = listed.iter();
                for j in 0..dim {
                    if extra.len() == 0 {
                        break;
                    }
                    let e = BitVector::unit(dim, j);
                    if span.insert(e.clone(), BitVector::zeros(0)) {
                        let i = *extra.next().expect("counted above");
                        let mut mono = Monomial(vec![0; n]);
                        mono.0[i] = 1;
                        located[i] = Some(res.gens_in_degree(s, t).start + j);
                        chosen.push((mono, e));
                    }
                }
                for &i in &listed {
                    let index = located[i].expect("indecomposable placed");
                    products[i] = Some(multiplication(engine, &res, s, index, t_max)?);
                }
                bases.insert(
                    (s, stem),
                    chosen
                        .iter()
                        .map(|(m, v)| NamedVector {
                            name: m.render(&gens),
                            vector: v.clone(),
                        })
                        .collect(),
                );
                monomials.insert((s, stem), chosen);
            }
        }
        // s = 0 stems other than 0 are empty; nothing else to add.
        let solvers = bases
            .iter()
            .map(|(&k, b)| {
                let dim = b.first().map_or(0, |v| v.vector.len());
                let mut r = Reducer::new(dim, b.len());
                for (i, v) in b.iter().enumerate() {
                    r.insert(v.vector.clone(), BitVector::unit(b.len(), i));
                }
                (k, r)
            })
            .collect();
        Ok(SphereCatalog {
            s_max,
            stem_max,
            resolution: res,
            bases,
            solvers,
        })
    }

    pub fn resolution(&self) -> &Arc<Resolution> {
        &self.resolution
    }

    pub fn covers(&self, s: u32, stem: i32) -> bool {
        s <= self.s_max && (0..=self.stem_max).contains(&stem)
    }

    pub fn basis(&self, s: u32, stem: i32) -> &[NamedVector] {
        self.bases.get(&(s, stem)).map_or(&[], Vec::as_slice)
    }

    /// Name of `v ∈ Ext^{s,s+stem}`: a `+`-joined sum of basis names, `0`
    /// for zero, and positional names (`x{stem}_{s}_{i}`) outside the
    /// catalog window.
    pub fn name(&self, s: u32, stem: i32, v: &BitVector) -> String {
        if v.is_zero() {
            return "0".into();
        }
        let Some(solver) = self.solvers.get(&(s, stem)) else {
            return positional(s, stem, v);
        };
        let coords = solver.solve(v).expect("named basis spans Ext");
        let names: Vec<&str> = coords
            .iter_ones()
            .map(|i| self.bases[&(s, stem)][i].name.as_str())
            .collect();
        names.join("+")
    }

    /// The vector carrying a basis name, if the name is in the catalog.
    pub fn lookup(&self, name: &str) -> Option<(u32, i32, &BitVector)> {
        self.bases.iter().find_map(|(&(s, stem), b)| {
            b.iter().find(|v| v.name == name).map(|v| (s, stem, &v.vector))
        })
    }

    /// Every named basis vector, ordered by `(s, stem)`.
    pub fn entries(&self) -> impl Iterator<Item = (u32, i32, &NamedVector)> {
        self.bases
            .iter()
            .flat_map(|(&(s, stem), b)| b.iter().map(move |v| (s, stem, v)))
    }
}

fn positional(s: u32, stem: i32, v: &BitVector) -> String {
    v.iter_ones()
        .map(|i| format!("x{stem}_{s}_{i}"))
        .collect::<Vec<_>>()
        .join("+")
}

/// Left multiplication by the class of generator `index` of `F_s` in
/// degree `t_g`, as a map `Ext^{k,t}(S^0) → Ext^{k+s,t+t_g}(S^0)` keyed by
/// the target bidegree's `t` (blocks at `(k, t + t_g)`).
pub fn multiplication(
    engine: &Engine,
    res: &Arc<Resolution>,
    s: u32,
    index: usize,
    t_max: i32,
) -> Result<ExtMap, ResolutionError> {
    let t_g = res.generators(s)[index].degree;
    // Degree-preserving chain map F_{k+s} → F_k(S^{t_g}).
    let target = engine.resolve(&GradedModule::sphere(t_g), res.s_max().saturating_sub(s), t_max);
    let chain = ChainMap::lift(res, &target, s, t_max, |j, _| j == index)?;
    Ok(chain.ext_map(res, &target, t_max))
}
