//! Brute-force Ext through the reduced cobar complex of the dual Steenrod
//! algebra. Only for checking the resolution engine in small degrees.
//!
//! The coproduct comes from Milnor's formula `Δξ_n = Σ ξ_{n−i}^{2^i} ⊗ ξ_i`
//! and multiplicativity, so nothing here touches the multiplication tables
//! the resolutions use. A cell module `M` becomes the left comodule `M_*`
//! with `ψ(x_m) = Σ_R ξ^R ⊗ x_{m−|R|}` over the `R` with
//! `Sq(R) x^{m−|R|} = x^m`.
//!
//! `C^s = Ā^{⊗s} ⊗ M_*` and
//! `d[a₁|…|a_s]x = Σᵢ [a₁|…|Δ̄aᵢ|…|a_s]x + [a₁|…|a_s|ψ̄x]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::f2::{kernel_basis, BitMatrix, BitVector, Reducer};
use crate::module::GradedModule;
use crate::resolution::ExtChart;
use crate::steenrod::MilnorSq;

pub const COBAR_S_MAX: u32 = 3;
pub const COBAR_T_MAX: i32 = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CobarError {
    #[error("the cobar oracle stops at s <= {COBAR_S_MAX} and t <= {COBAR_T_MAX}; asked for s <= {s_max}, t <= {t_max}")]
    Cap { s_max: u32, t_max: i32 },
    #[error("coaction is not coassociative on x_{0}")]
    Coassociativity(i32),
}

/// `ξ₁^{e₁} ξ₂^{e₂} …`, trailing zero exponents stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualMonomial(Vec<u32>);

impl DualMonomial {
    pub fn new(mut e: Vec<u32>) -> Self {
        while e.last() == Some(&0) {
            e.pop();
        }
        DualMonomial(e)
    }

    pub fn one() -> Self {
        DualMonomial(Vec::new())
    }

    /// `ξ_i^e`, with `ξ₀ = 1`.
    pub fn xi(i: usize, e: u32) -> Self {
        if i == 0 || e == 0 {
            return Self::one();
        }
        let mut v = vec![0; i];
        v[i - 1] = e;
        DualMonomial(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| e * ((1u32 << (i + 1)) - 1))
            .sum()
    }

    pub fn times(&self, other: &DualMonomial) -> DualMonomial {
        let n = self.0.len().max(other.0.len());
        let e = (0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0) + other.0.get(i).copied().unwrap_or(0))
            .collect();
        DualMonomial::new(e)
    }
}

impl fmt::Display for DualMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => write!(f, "ξ{}", i + 1)?,
                _ => write!(f, "ξ{}^{}", i + 1, e)?,
            }
        }
        Ok(())
    }
}

/// Monomials of degree `d`, in a fixed order.
pub fn dual_basis(d: u32) -> Vec<DualMonomial> {
    fn go(d: u32, i: usize, acc: &mut Vec<u32>, out: &mut Vec<DualMonomial>) {
        let g = (1u32 << (i + 1)) - 1;
        if g > d {
            if d == 0 {
                out.push(DualMonomial::new(acc.clone()));
            }
            return;
        }
        for e in 0..=d / g {
            acc.push(e);
            go(d - e * g, i + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(d, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// `Δ(m)` as the set of monomial pairs with coefficient one.
pub fn coproduct(m: &DualMonomial) -> Vec<(DualMonomial, DualMonomial)> {
    let mut acc: HashSet<(DualMonomial, DualMonomial)> = HashSet::new();
    acc.insert((DualMonomial::one(), DualMonomial::one()));
    for (k, &e) in m.0.iter().enumerate() {
        let n = k + 1;
        let terms: Vec<(DualMonomial, DualMonomial)> = (0..=n)
            .map(|i| (DualMonomial::xi(n - i, 1 << i), DualMonomial::xi(i, 1)))
            .collect();
        for _ in 0..e {
            let mut next: HashSet<(DualMonomial, DualMonomial)> = HashSet::new();
            for (a, b) in &acc {
                for (x, y) in &terms {
                    let p = (a.times(x), b.times(y));
                    if !next.remove(&p) {
                        next.insert(p);
                    }
                }
            }
            acc = next;
        }
    }
    let mut out: Vec<_> = acc.into_iter().collect();
    out.sort();
    out
}

/// The homology comodule of a cell module.
#[derive(Clone, Debug)]
pub struct Comodule {
    pub name: String,
    pub cells: Vec<i32>,
    /// `ψ̄(x_m)`: pairs `(ξ^R, k)` with `|R| > 0`.
    pub coaction: BTreeMap<i32, Vec<(DualMonomial, i32)>>,
}

impl Comodule {
    pub fn has_cell(&self, n: i32) -> bool {
        self.cells.binary_search(&n).is_ok()
    }

    fn full_coaction(&self, m: i32) -> Vec<(DualMonomial, i32)> {
        let mut v = vec![(DualMonomial::one(), m)];
        v.extend(self.coaction[&m].iter().cloned());
        v
    }

    /// `(Δ ⊗ 1)ψ = (1 ⊗ ψ)ψ` on every basis element.
    pub fn check_coassociative(&self) -> Result<(), CobarError> {
        for &m in &self.cells {
            let mut lhs: HashSet<(DualMonomial, DualMonomial, i32)> = HashSet::new();
            let mut rhs: HashSet<(DualMonomial, DualMonomial, i32)> = HashSet::new();
            let toggle = |set: &mut HashSet<_>, x| {
                if !set.remove(&x) {
                    set.insert(x);
                }
            };
            for (a, k) in self.full_coaction(m) {
                for (x, y) in coproduct(&a) {
                    toggle(&mut lhs, (x, y, k));
                }
                for (b, j) in self.full_coaction(k) {
                    toggle(&mut rhs, (a.clone(), b, j));
                }
            }
            if lhs != rhs {
                return Err(CobarError::Coassociativity(m));
            }
        }
        Ok(())
    }
}

/// The comodule dual to a cell module: the transposed Milnor-basis action.
pub fn dualize(m: &GradedModule) -> Result<Comodule, CobarError> {
    let mut coaction = BTreeMap::new();
    for &n in m.cells() {
        let mut terms = Vec::new();
        for &k in m.cells().iter().filter(|&&k| k < n) {
            for r in dual_basis((n - k) as u32) {
                if m.milnor(&MilnorSq::new(r.exponents().to_vec()), k) {
                    terms.push((r, k));
                }
            }
        }
        coaction.insert(n, terms);
    }
    let c = Comodule {
        name: m.name(),
        cells: m.cells().to_vec(),
        coaction,
    };
    c.check_coassociative()?;
    Ok(c)
}

/// A basis element `[a₁|…|a_s] x_m` of the cobar complex.
type Cochain = (Vec<DualMonomial>, i32);

struct Degree {
    basis: Vec<Cochain>,
    index: HashMap<Cochain, usize>,
}

impl Degree {
    fn new(basis: Vec<Cochain>) -> Self {
        let index = basis.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        Degree { basis, index }
    }
}

/// The cobar complex in one internal degree.
struct CobarDegree {
    /// `C^s_t` for `s = 0..=s_max + 1`.
    terms: Vec<Degree>,
    /// `d: C^s_t → C^{s+1}_t`, rows indexed by `C^s_t`.
    d: Vec<BitMatrix>,
}

fn cochains(c: &Comodule, s: u32, t: i32, bases: &mut HashMap<u32, Vec<DualMonomial>>) -> Vec<Cochain> {
    fn go(
        rest: u32,
        left: u32,
        acc: &mut Vec<DualMonomial>,
        m: i32,
        out: &mut Vec<Cochain>,
        bases: &mut HashMap<u32, Vec<DualMonomial>>,
    ) {
        if left == 0 {
            if rest == 0 {
                out.push((acc.clone(), m));
            }
            return;
        }
        for d in 1..=rest.saturating_sub(left - 1) {
            let basis = bases.entry(d).or_insert_with(|| dual_basis(d)).clone();
            for a in basis {
                acc.push(a);
                go(rest - d, left - 1, acc, m, out, bases);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    for &m in &c.cells {
        let total = t - m;
        if total < s as i32 {
            continue;
        }
        go(total as u32, s, &mut Vec::new(), m, &mut out, bases);
    }
    out
}

fn differential(
    c: &Comodule,
    src: &Degree,
    tgt: &Degree,
    coproducts: &mut HashMap<DualMonomial, Vec<(DualMonomial, DualMonomial)>>,
) -> BitMatrix {
    let mut d = BitMatrix::zeros(src.basis.len(), tgt.basis.len());
    for (row, (bar, m)) in src.basis.iter().enumerate() {
        let mut flip = |cochain: Cochain| {
            let j = tgt.index[&cochain];
            let v = d.get(row, j);
            d.set(row, j, !v);
        };
        for i in 0..bar.len() {
            let cp = coproducts.entry(bar[i].clone()).or_insert_with(|| coproduct(&bar[i]));
            for (x, y) in cp.iter() {
                if x.is_one() || y.is_one() {
                    continue;
                }
                let mut next = Vec::with_capacity(bar.len() + 1);
                next.extend_from_slice(&bar[..i]);
                next.push(x.clone());
                next.push(y.clone());
                next.extend_from_slice(&bar[i + 1..]);
                flip((next, *m));
            }
        }
        for (a, k) in &c.coaction[m] {
            let mut next = bar.clone();
            next.push(a.clone());
            flip((next, *k));
        }
    }
    d
}

fn cobar_degree(c: &Comodule, s_max: u32, t: i32) -> CobarDegree {
    let mut bases = HashMap::new();
    let mut coproducts = HashMap::new();
    let terms: Vec<Degree> = (0..=s_max + 1).map(|s| Degree::new(cochains(c, s, t, &mut bases))).collect();
    let d = (0..=s_max as usize)
        .map(|s| differential(c, &terms[s], &terms[s + 1], &mut coproducts))
        .collect();
    CobarDegree { terms, d }
}

fn check_caps(s_max: u32, t_max: i32) -> Result<(), CobarError> {
    if s_max > COBAR_S_MAX || t_max > COBAR_T_MAX {
        Err(CobarError::Cap { s_max, t_max })
    } else {
        Ok(())
    }
}

/// Ext dimensions of the comodule through `(s_max, t_max)`.
pub fn cobar_ext(c: &Comodule, s_max: u32, t_max: i32) -> Result<ExtChart, CobarError> {
    check_caps(s_max, t_max)?;
    let t_min = c.cells.first().copied().unwrap_or(0);
    let mut dims = BTreeMap::new();
    for t in t_min..=t_max {
        let cx = cobar_degree(c, s_max, t);
        let ranks: Vec<usize> = cx.d.iter().map(BitMatrix::rank).collect();
        for s in 0..=s_max as usize {
            let incoming = if s == 0 { 0 } else { ranks[s - 1] };
            let dim = cx.terms[s].basis.len() - ranks[s] - incoming;
            if dim > 0 {
                dims.insert((s as u32, t), dim);
            }
        }
    }
    Ok(ExtChart {
        module: c.name.clone(),
        s_max,
        t_min,
        t_max,
        dims,
    })
}

/// `d ∘ d = 0` in every degree through `(s_max, t_max)`: the number of
/// composites checked.
pub fn check_d_squared(c: &Comodule, s_max: u32, t_max: i32) -> Result<usize, String> {
    check_caps(s_max, t_max).map_err(|e| e.to_string())?;
    let t_min = c.cells.first().copied().unwrap_or(0);
    let mut checked = 0;
    for t in t_min..=t_max {
        let cx = cobar_degree(c, s_max, t);
        for s in 0..s_max as usize {
            let dd = cx.d[s].mul(&cx.d[s + 1]).expect("composable");
            if !dd.is_zero() {
                return Err(format!("d∘d ≠ 0 on C^{s} at t = {t}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn render(c: &Comodule, (bar, m): &Cochain) -> String {
    let inner: Vec<String> = bar.iter().map(ToString::to_string).collect();
    let head = format!("[{}]", inner.join("|"));
    if c.cells.len() == 1 {
        head
    } else {
        format!("{head}x{m}")
    }
}

/// Cocycles representing a basis of `Ext^{s,t}`, each a `+`-joined sum.
pub fn cobar_cocycles(c: &Comodule, s: u32, t: i32) -> Result<Vec<String>, CobarError> {
    check_caps(s, t)?;
    let cx = cobar_degree(c, s, t);
    let dim = cx.terms[s as usize].basis.len();
    let mut boundaries = Reducer::new(dim, 0);
    if s > 0 {
        for r in cx.d[s as usize - 1].row_vectors() {
            boundaries.insert(r, BitVector::zeros(0));
        }
    }
    let mut reps = Vec::new();
    for z in kernel_basis(&cx.d[s as usize].transpose()) {
        if boundaries.insert(z.clone(), BitVector::zeros(0)) {
            let terms: Vec<String> = z
                .iter_ones()
                .map(|i| render(c, &cx.terms[s as usize].basis[i]))
                .collect();
            reps.push(terms.join(" + "));
        }
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_basis_counts() {
        let counts: Vec<usize> = (0..8).map(|d| dual_basis(d).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 2, 2, 3, 4]);
    }

    #[test]
    fn coproduct_of_xi2() {
        let cp = coproduct(&DualMonomial::xi(2, 1));
        let want = vec![
            (DualMonomial::one(), DualMonomial::xi(2, 1)),
            (DualMonomial::xi(1, 2), DualMonomial::xi(1, 1)),
            (DualMonomial::xi(2, 1), DualMonomial::one()),
        ];
        let mut want = want;
        want.sort();
        assert_eq!(cp, want);
    }

    #[test]
    fn xi1_squared_is_primitive_mod_two() {
        let cp = coproduct(&DualMonomial::xi(1, 2));
        assert_eq!(cp.len(), 2);
    }

    #[test]
    fn sphere_coaction_is_trivial() {
        let c = dualize(&GradedModule::sphere(0)).unwrap();
        assert!(c.coaction[&0].is_empty());
    }

    #[test]
    fn two_cell_coaction_sees_sq1() {
        let c = dualize(&GradedModule::from_cells(1..=2)).unwrap();
        assert_eq!(c.coaction[&2], vec![(DualMonomial::xi(1, 1), 1)]);
    }

    #[test]
    fn minus_one_is_primitive() {
        let c = dualize(&GradedModule::from_cells(-6..=3)).unwrap();
        assert!(c.coaction[&-1].is_empty());
    }

    #[test]
    fn low_sphere_ext() {
        let c = dualize(&GradedModule::sphere(0)).unwrap();
        let chart = cobar_ext(&c, 1, 4).unwrap();
        assert_eq!(chart.dim(0, 0), 1);
        assert_eq!(chart.dim(1, 1), 1);
        assert_eq!(chart.dim(1, 2), 1);
        assert_eq!(chart.dim(1, 3), 0);
        assert_eq!(chart.dim(1, 4), 1);
        assert_eq!(cobar_cocycles(&c, 1, 1).unwrap(), vec!["[ξ1]"]);
        assert_eq!(cobar_cocycles(&c, 1, 2).unwrap(), vec!["[ξ1^2]"]);
    }

    #[test]
    fn caps_refuse() {
        let c = dualize(&GradedModule::sphere(0)).unwrap();
        assert!(matches!(cobar_ext(&c, 4, 10), Err(CobarError::Cap { .. })));
        assert!(matches!(cobar_ext(&c, 2, 15), Err(CobarError::Cap { .. })));
    }
}
