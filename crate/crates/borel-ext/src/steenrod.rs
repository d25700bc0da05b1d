//! The mod-2 Steenrod algebra in the Milnor basis.
//!
//! [`AlgebraTable`] owns the per-degree bases and a product memo keyed by
//! pairs of degrees. The admissible basis and Adem relations exist only to
//! cross-check the Milnor product.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::f2::{BitMatrix, BitVector, Reducer};

/// Milnor basis element `Sq(r₁, …, r_k)`; trailing zeros are stripped and the
/// empty sequence is the unit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MilnorSq(Vec<u32>);

impl MilnorSq {
    pub fn new(mut r: Vec<u32>) -> Self {
        while r.last() == Some(&0) {
            r.pop();
        }
        Self(r)
    }

    pub fn unit() -> Self {
        Self(Vec::new())
    }

    /// `Sqⁿ = Sq(n)`.
    pub fn sq(n: u32) -> Self {
        Self::new(vec![n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &r)| r * ((1u32 << (i + 1)) - 1))
            .sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for MilnorSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sq(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MilnorSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Admissible monomial `Sq^{a₁}⋯Sq^{a_k}` with `aᵢ ≥ 2aᵢ₊₁`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdmissibleSq(Vec<u32>);

impl AdmissibleSq {
    /// Returns `None` unless the word is admissible with positive entries.
    pub fn new(word: Vec<u32>) -> Option<Self> {
        let ok = word.iter().all(|&a| a >= 1) && word.windows(2).all(|p| p[0] >= 2 * p[1]);
        ok.then_some(Self(word))
    }

    pub fn word(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Debug for AdmissibleSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for a in &self.0 {
            write!(f, "Sq{a}")?;
        }
        Ok(())
    }
}

/// Every exponent sequence of degree `d`, in descending lexicographic order
/// (so `Sq(d)` comes first).
pub fn milnor_basis(d: u32) -> Vec<MilnorSq> {
    // Largest i with 2^i - 1 <= d bounds the sequence length.
    let mut len = 0;
    while (1u32 << (len + 1)) - 1 <= d {
        len += 1;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    fn rec(pos: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<MilnorSq>) {
        if pos == cur.len() {
            if rem == 0 {
                out.push(MilnorSq::new(cur.clone()));
            }
            return;
        }
        let w = (1u32 << (pos + 1)) - 1;
        // Higher positions can absorb `rem - r*w` only if it is reachable;
        // enumerate from the largest r down for descending lex order.
        for r in (0..=rem / w).rev() {
            cur[pos] = r;
            rec(pos + 1, rem - r * w, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// Admissible words of degree `d`, in descending lexicographic order.
pub fn admissible_basis(d: u32) -> Vec<AdmissibleSq> {
    fn rec(sum: u32, cap: u32) -> Vec<Vec<u32>> {
        if sum == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for a in (1..=sum.min(cap)).rev() {
            for rest in rec(sum - a, a / 2) {
                let mut w = vec![a];
                w.extend(rest);
                out.push(w);
            }
        }
        out
    }
    rec(d, d).into_iter().map(AdmissibleSq).collect()
}

const MAXLEN: usize = 12;

/// Milnor's product formula: sum over matrices with row sums weighted by
/// powers of two matching `r` and column sums matching `s`; a matrix
/// contributes iff every diagonal has pairwise bit-disjoint entries.
fn product_terms(r: &[u32], s: &[u32]) -> Vec<Vec<u32>> {
    let m = r.len();
    let n = s.len();
    assert!(m + n < MAXLEN, "Milnor product exponent sequences too long");
    let mut found: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut diag = [0u32; MAXLEN];
    let mut col_rem = [0u32; MAXLEN];
    col_rem[1..=n].copy_from_slice(s);

    struct Ctx<'a> {
        r: &'a [u32],
        m: usize,
        n: usize,
        found: &'a mut BTreeSet<Vec<u32>>,
    }

    fn finish(ctx: &mut Ctx, diag: &mut [u32; MAXLEN], col_rem: &[u32; MAXLEN]) {
        let mut d = *diag;
        for j in 1..=ctx.n {
            if d[j] & col_rem[j] != 0 {
                return;
            }
            d[j] |= col_rem[j];
        }
        let t = MilnorSq::new(d[1..=ctx.m + ctx.n].to_vec()).0;
        if !ctx.found.remove(&t) {
            ctx.found.insert(t);
        }
    }

    // Row i in 1..=m, column j in 1..=n; `budget` is what remains of r_i.
    fn rec(
        ctx: &mut Ctx,
        i: usize,
        j: usize,
        budget: u32,
        diag: &mut [u32; MAXLEN],
        col_rem: &mut [u32; MAXLEN],
    ) {
        if i > ctx.m {
            finish(ctx, diag, col_rem);
            return;
        }
        if j > ctx.n {
            // x_{i0} takes the rest of the row.
            if diag[i] & budget != 0 {
                return;
            }
            diag[i] |= budget;
            let next_budget = if i < ctx.m { ctx.r[i] } else { 0 };
            rec(ctx, i + 1, 1, next_budget, diag, col_rem);
            diag[i] &= !budget;
            return;
        }
        let w = 1u32 << j;
        let max = (budget / w).min(col_rem[j]);
        for x in 0..=max {
            if diag[i + j] & x != 0 {
                continue;
            }
            diag[i + j] |= x;
            col_rem[j] -= x;
            rec(ctx, i, j + 1, budget - x * w, diag, col_rem);
            col_rem[j] += x;
            diag[i + j] &= !x;
        }
    }

    let mut ctx = Ctx {
        r,
        m,
        n,
        found: &mut found,
    };
    if m == 0 {
        finish(&mut ctx, &mut diag, &col_rem);
    } else {
        rec(&mut ctx, 1, 1, r[0], &mut diag, &mut col_rem);
    }
    found.into_iter().collect()
}

/// `a·b` as a GF(2)-sum of Milnor basis elements, sorted.
pub fn milnor_product(a: &MilnorSq, b: &MilnorSq) -> Vec<MilnorSq> {
    let mut v: Vec<MilnorSq> = product_terms(&a.0, &b.0)
        .into_iter()
        .map(MilnorSq)
        .collect();
    v.sort();
    v
}

/// Product of two GF(2)-sums of Milnor basis elements.
pub fn milnor_product_sum(a: &[MilnorSq], b: &[MilnorSq]) -> Vec<MilnorSq> {
    let mut acc: BTreeSet<MilnorSq> = BTreeSet::new();
    for x in a {
        for y in b {
            for t in milnor_product(x, y) {
                if !acc.remove(&t) {
                    acc.insert(t);
                }
            }
        }
    }
    acc.into_iter().collect()
}

fn binom_nonneg_odd(n: u32, k: u32) -> bool {
    k <= n && k & (n - k) == 0
}

/// Rewrites a word in the `Sqⁱ` to a GF(2)-sum of admissible words.
fn reduce_word(word: &[u32], memo: &mut HashMap<Vec<u32>, Vec<Vec<u32>>>) -> Vec<Vec<u32>> {
    let word: Vec<u32> = word.iter().copied().filter(|&a| a > 0).collect();
    if let Some(v) = memo.get(&word) {
        return v.clone();
    }
    let bad = (0..word.len().saturating_sub(1)).find(|&i| word[i] < 2 * word[i + 1]);
    let result = match bad {
        None => vec![word.clone()],
        Some(i) => {
            let (a, b) = (word[i], word[i + 1]);
            let mut acc: BTreeSet<Vec<u32>> = BTreeSet::new();
            for c in 0..=a / 2 {
                if !binom_nonneg_odd(b - c - 1, a - 2 * c) {
                    continue;
                }
                let mut w = word[..i].to_vec();
                w.push(a + b - c);
                w.push(c);
                w.extend_from_slice(&word[i + 2..]);
                for t in reduce_word(&w, memo) {
                    if !acc.remove(&t) {
                        acc.insert(t);
                    }
                }
            }
            acc.into_iter().collect()
        }
    };
    memo.insert(word, result.clone());
    result
}

/// `u·v` rewritten by Adem relations into admissible form.
pub fn adem_product(u: &AdmissibleSq, v: &AdmissibleSq) -> Vec<AdmissibleSq> {
    let mut w = u.0.clone();
    w.extend_from_slice(&v.0);
    let mut memo = HashMap::new();
    let mut out: Vec<AdmissibleSq> = reduce_word(&w, &mut memo)
        .into_iter()
        .map(AdmissibleSq)
        .collect();
    out.sort();
    out
}

/// Change of basis between admissible words and the Milnor basis in one
/// degree. Rows of `to_milnor` are admissible words expanded in the Milnor
/// basis; `to_admissible` is its inverse.
#[derive(Clone, Debug)]
pub struct BasisBridge {
    pub degree: u32,
    pub admissible: Vec<AdmissibleSq>,
    pub milnor: Vec<MilnorSq>,
    pub to_milnor: BitMatrix,
    pub to_admissible: BitMatrix,
}

/// Milnor expansion of an admissible word, as a product of `Sq(aᵢ)`.
pub fn admissible_to_milnor(word: &AdmissibleSq) -> Vec<MilnorSq> {
    let mut acc = vec![MilnorSq::unit()];
    for &a in &word.0 {
        acc = milnor_product_sum(&acc, &[MilnorSq::sq(a)]);
    }
    acc
}

pub fn basis_bridge(d: u32) -> BasisBridge {
    let admissible = admissible_basis(d);
    let milnor = milnor_basis(d);
    assert_eq!(admissible.len(), milnor.len(), "basis sizes differ in degree {d}");
    let index: HashMap<&MilnorSq, usize> = milnor.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let n = milnor.len();
    let rows: Vec<BitVector> = admissible
        .iter()
        .map(|w| BitVector::from_ones(n, admissible_to_milnor(w).iter().map(|m| index[m])))
        .collect();
    let to_milnor = BitMatrix::from_rows(n, &rows);
    // Invert by reducing the rows while tracking combinations.
    let mut red = Reducer::new(n, n);
    for (i, r) in rows.iter().enumerate() {
        let grew = red.insert(r.clone(), BitVector::unit(n, i));
        assert!(grew, "basis bridge singular in degree {d}");
    }
    let inv_rows: Vec<BitVector> = (0..n)
        .map(|j| red.solve(&BitVector::unit(n, j)).expect("bridge is invertible"))
        .collect();
    BasisBridge {
        degree: d,
        admissible,
        milnor,
        to_milnor,
        to_admissible: BitMatrix::from_rows(n, &inv_rows),
    }
}

/// Products of all basis pairs in a fixed pair of degrees: entry
/// `ia * dim_b + ib` lists indices in degree `da + db`.
type ProductBlock = Vec<Box<[u32]>>;

/// Milnor bases up to a degree cap with memoized products. Products beyond
/// the cap panic rather than silently truncating.
pub struct AlgebraTable {
    max_degree: u32,
    bases: Vec<Vec<MilnorSq>>,
    index: Vec<HashMap<MilnorSq, usize>>,
    blocks: Vec<Vec<OnceLock<ProductBlock>>>,
    bridges: Mutex<HashMap<u32, Arc<BasisBridge>>>,
}

impl fmt::Debug for AlgebraTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraTable(max_degree={})", self.max_degree)
    }
}

impl AlgebraTable {
    pub fn new(max_degree: u32) -> Self {
        let bases: Vec<Vec<MilnorSq>> = (0..=max_degree).map(milnor_basis).collect();
        let index = bases
            .iter()
            .map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect())
            .collect();
        let blocks = (0..=max_degree)
            .map(|da| (0..=max_degree - da).map(|_| OnceLock::new()).collect())
            .collect();
        Self {
            max_degree,
            bases,
            index,
            blocks,
            bridges: Mutex::new(HashMap::new()),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    #[inline]
    pub fn dim(&self, d: i32) -> usize {
        if d < 0 || d as u32 > self.max_degree {
            assert!(d < 0, "degree {d} beyond algebra cap {}", self.max_degree);
            0
        } else {
            self.bases[d as usize].len()
        }
    }

    pub fn basis(&self, d: u32) -> &[MilnorSq] {
        self.check(d);
        &self.bases[d as usize]
    }

    pub fn index_of(&self, m: &MilnorSq) -> usize {
        let d = m.degree();
        self.check(d);
        self.index[d as usize][m]
    }

    fn check(&self, d: u32) {
        assert!(d <= self.max_degree, "degree {d} beyond algebra cap {}", self.max_degree);
    }

    fn block(&self, da: u32, db: u32) -> &ProductBlock {
        self.check(da + db);
        self.blocks[da as usize][db as usize].get_or_init(|| {
            let target = &self.index[(da + db) as usize];
            let mut out = Vec::with_capacity(self.bases[da as usize].len() * self.bases[db as usize].len());
            for a in &self.bases[da as usize] {
                for b in &self.bases[db as usize] {
                    let mut idx: Vec<u32> = product_terms(&a.0, &b.0)
                        .into_iter()
                        .map(|t| target[&MilnorSq(t)] as u32)
                        .collect();
                    idx.sort_unstable();
                    out.push(idx.into_boxed_slice());
                }
            }
            out
        })
    }

    /// Indices (in degree `da + db`) of the terms of `basis[da][ia] · basis[db][ib]`.
    #[inline]
    pub fn product(&self, da: u32, ia: usize, db: u32, ib: usize) -> &[u32] {
        let block = self.block(da, db);
        &block[ia * self.bases[db as usize].len() + ib]
    }

    /// All products `basis[da][·] · basis[db][ib]`, indexed by the left factor.
    pub fn left_products(&self, da: u32, db: u32, ib: usize) -> impl Iterator<Item = &[u32]> {
        let block = self.block(da, db);
        let nb = self.bases[db as usize].len();
        (0..self.bases[da as usize].len()).map(move |ia| &*block[ia * nb + ib])
    }

    pub fn bridge(&self, d: u32) -> Arc<BasisBridge> {
        self.check(d);
        let mut g = self.bridges.lock().expect("bridge cache poisoned");
        g.entry(d).or_insert_with(|| Arc::new(basis_bridge(d))).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(r: &[u32]) -> MilnorSq {
        MilnorSq::new(r.to_vec())
    }

    #[test]
    fn basis_examples() {
        assert_eq!(milnor_basis(0), vec![MilnorSq::unit()]);
        assert_eq!(milnor_basis(3), vec![sq(&[3]), sq(&[0, 1])]);
        assert_eq!(
            milnor_basis(7),
            vec![sq(&[7]), sq(&[4, 1]), sq(&[1, 2]), sq(&[0, 0, 1])]
        );
        for d in 0..30 {
            for m in milnor_basis(d) {
                assert_eq!(m.degree(), d);
            }
        }
    }

    #[test]
    fn product_examples() {
        assert!(milnor_product(&sq(&[1]), &sq(&[1])).is_empty());
        assert_eq!(milnor_product(&sq(&[1]), &sq(&[2])), vec![sq(&[3])]);
        let mut p = milnor_product(&sq(&[2]), &sq(&[1]));
        p.sort();
        let mut e = vec![sq(&[3]), sq(&[0, 1])];
        e.sort();
        assert_eq!(p, e);
        assert_eq!(milnor_product(&MilnorSq::unit(), &sq(&[4, 1])), vec![sq(&[4, 1])]);
    }

    #[test]
    fn adem_examples() {
        let a = |w: &[u32]| AdmissibleSq::new(w.to_vec()).unwrap();
        assert!(adem_product(&a(&[1]), &a(&[1])).is_empty());
        assert_eq!(adem_product(&a(&[2]), &a(&[2])), vec![a(&[3, 1])]);
        assert_eq!(adem_product(&a(&[1]), &a(&[2])), vec![a(&[3])]);
    }

    #[test]
    fn bridge_examples() {
        let b1 = basis_bridge(1);
        assert_eq!(b1.to_milnor, BitMatrix::identity(1));
        let b0 = basis_bridge(0);
        assert_eq!(b0.admissible, vec![AdmissibleSq::new(vec![]).unwrap()]);
        assert_eq!(b0.milnor, vec![MilnorSq::unit()]);
        let b3 = basis_bridge(3);
        // Sq³ = Sq(3); Sq²Sq¹ = Sq(3) + Sq(0,1).
        assert_eq!(b3.admissible.len(), 2);
        assert_eq!(b3.to_milnor.row(0), BitVector::from_ones(2, [0]));
        assert_eq!(b3.to_milnor.row(1), BitVector::from_ones(2, [0, 1]));
        assert_eq!(b3.to_milnor.mul(&b3.to_admissible).unwrap(), BitMatrix::identity(2));
    }

    #[test]
    fn table_products_match_direct() {
        let t = AlgebraTable::new(20);
        for da in 0..8u32 {
            for db in 0..8u32 {
                for (ia, a) in t.basis(da).iter().enumerate() {
                    for (ib, b) in t.basis(db).iter().enumerate() {
                        let direct: BTreeSet<usize> =
                            milnor_product(a, b).iter().map(|m| t.index_of(m)).collect();
                        let table: BTreeSet<usize> =
                            t.product(da, ia, db, ib).iter().map(|&i| i as usize).collect();
                        assert_eq!(direct, table);
                    }
                }
            }
        }
    }
}
