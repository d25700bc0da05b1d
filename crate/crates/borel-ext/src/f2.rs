//! Dense bit-packed linear algebra over GF(2).
//!
//! Vectors and matrices store 64 coefficients per machine word. Rows of a
//! [`BitMatrix`] are contiguous, so row operations are word-parallel XORs.
//! Every solve returns the canonical solution (free coordinates zero), which
//! keeps downstream computations bit-for-bit reproducible.

use std::fmt;

use thiserror::Error;

const WORD: usize = 64;


#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum F2Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// A fixed-length vector over GF(2). Pad bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_pad();
        v
    }

    fn clear_pad(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let m = 1u64 << (i % WORD);
        if b {
            self.words[i / WORD] |= m;
        } else {
            self.words[i / WORD] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn add_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "vector length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    /// Copy of bits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.len);
        let (w0, sh) = (start / WORD, start % WORD);
        let words = (0..words_for(len))
            .map(|k| {
                let lo = self.words[w0 + k] >> sh;
                match self.words.get(w0 + k + 1) {
                    Some(&hi) if sh != 0 => lo | (hi << (WORD - sh)),
                    _ => lo,
                }
            })
            .collect();
        BitVector::from_words(len, words)
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = self.extended(self.len + other.len);
        let (w0, sh) = (self.len / WORD, self.len % WORD);
        for (k, &w) in other.words.iter().enumerate() {
            out.words[w0 + k] |= w << sh;
            if sh != 0 {
                if let Some(next) = out.words.get_mut(w0 + k + 1) {
                    *next |= w >> (WORD - sh);
                }
            }
        }
        out
    }

    /// Copy padded with zeros (or truncated) to `len`.
    pub fn extended(&self, len: usize) -> BitVector {
        let mut words = self.words.clone();
        words.truncate(words_for(len));
        BitVector::from_words(len, words)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

/// Row-major dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from equal-length rows. `cols` fixes the width when
    /// `rows` is empty.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has wrong length");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn from_bools(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let vs: Vec<BitVector> = rows.iter().map(|r| BitVector::from_bools(r)).collect();
        Self::from_rows(cols, &vs)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        assert!(r < self.rows && c < self.cols, "entry out of range");
        let m = 1u64 << (c % WORD);
        let w = &mut self.data[r * self.stride + c / WORD];
        if b {
            *w |= m;
        } else {
            *w &= !m;
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub(crate) fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn column(&self, c: usize) -> BitVector {
        BitVector::from_ones(self.rows, (0..self.rows).filter(|&r| self.get(r, c)))
    }

    /// `row[dst] += row[src]`.
    #[inline]
    pub(crate) fn add_row(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..src * s + s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s] as &[u64], &mut lo[dst * s..dst * s + s])
        };
        for (x, y) in b.iter_mut().zip(a) {
            *x ^= y;
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for k in 0..s {
            self.data.swap(a * s + k, b * s + k);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in BitVector::from_words(self.cols, self.row_words(r).to_vec()).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, F2Error> {
        if self.cols != other.rows {
            return Err(F2Error::Dimension {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            let dst_start = r * out.stride;
            for k in row.iter_ones() {
                let src = other.row_words(k);
                for (x, y) in out.data[dst_start..dst_start + out.stride]
                    .iter_mut()
                    .zip(src)
                {
                    *x ^= y;
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, F2Error> {
        if v.len() != self.cols {
            return Err(F2Error::Dimension {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let bit = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                % 2
                == 1;
            if bit {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// `v · self` for a row vector `v` of length `rows`.
    pub fn vec_mul(&self, v: &BitVector) -> Result<BitVector, F2Error> {
        if v.len() != self.rows {
            return Err(F2Error::Dimension {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.cols);
        for r in v.iter_ones() {
            for (x, y) in out.words_mut().iter_mut().zip(self.row_words(r)) {
                *x ^= y;
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// In-place full reduction restricted to the first `limit` columns.
    /// Row operations act on whole rows, so trailing columns carry along
    /// whatever bookkeeping the caller stored there. Returns pivot columns;
    /// pivot row `i` is row `i` afterwards.
    /// 64 bits of row `r` starting at column `c0`.
    #[inline]
    fn window(&self, r: usize, c0: usize) -> u64 {
        let (w, sh) = (c0 / WORD, c0 % WORD);
        let base = r * self.stride;
        let lo = self.data[base + w] >> sh;
        if sh == 0 || w + 1 >= self.stride {
            lo
        } else {
            lo | (self.data[base + w + 1] << (WORD - sh))
        }
    }

    #[inline]
    fn bit(&self, r: usize, c: usize) -> bool {
        self.data[r * self.stride + c / WORD] >> (c % WORD) & 1 == 1
    }

    /// Full reduction on the first `limit` columns, carrying whole rows.
    /// Pivot row `i` ends up at index `i`. Pivots are found in blocks of up
    /// to eight, whose 256 combinations are tabulated so that every other
    /// row is cleared with a single xor per block (the "four Russians" trick).
    pub(crate) fn reduce_prefix(&mut self, limit: usize) -> Vec<usize> {
        self.reduce_mixed(limit, limit)
    }

    /// Like `reduce_prefix(echelon)`, except pivots at columns `>= full`
    /// only clear the rows below them: the result is reduced on the first
    /// `full` columns and in echelon form up to `echelon`.
    pub(crate) fn reduce_mixed(&mut self, full: usize, echelon: usize) -> Vec<usize> {
        // Up to TABLES·8 pivots per pass over the rows, one 256-entry table
        // of combinations per group of eight.
        const GROUP: usize = 8;
        const TABLES: usize = 4;
        let limit = echelon.min(self.cols);
        let stride = self.stride;
        let mut pivots = Vec::new();
        let mut next = 0;
        let mut c = 0;
        let mut eff: Vec<u64> = Vec::new();
        let mut table: Vec<u64> = vec![0; TABLES * (1 << GROUP) * stride];
        while c < limit && next < self.rows {
            let c0 = c;
            let c_end = if c0 < full { limit.min(full).min(c0 + WORD) } else { limit.min(c0 + WORD) };
            // eff[r - next]: window of row r reduced by the block found so far.
            eff.clear();
            eff.extend((next..self.rows).map(|r| self.window(r, c0)));
            let mut block: Vec<(usize, usize)> = Vec::new(); // (row, column)
            while c < c_end && block.len() < GROUP * TABLES && next + block.len() < self.rows {
                let bit = 1u64 << (c - c0);
                let first = next + block.len();
                if let Some(off) = eff[block.len()..].iter().position(|&x| x & bit != 0) {
                    let p = first + off;
                    self.swap_rows(p, first);
                    eff.swap(p - next, first - next);
                    // Bring the new pivot row into reduced form, then clear its
                    // column from the earlier block rows.
                    for &(br, bc) in &block {
                        if self.bit(first, bc) {
                            self.add_row(br, first);
                        }
                    }
                    for &(br, _) in &block {
                        if self.bit(br, c) {
                            self.add_row(first, br);
                        }
                    }
                    let xp = eff[first - next];
                    for x in eff.iter_mut().skip(block.len() + 1) {
                        if *x & bit != 0 {
                            *x ^= xp;
                        }
                    }
                    block.push((first, c));
                }
                c += 1;
            }
            if block.is_empty() {
                continue;
            }
            // Rows at or below `next` vanish before `c0`.
            let w0 = c0 / WORD;
            let block_end = next + block.len();
            let n_rows = self.rows - block_end + if c0 < full { next } else { 0 };
            // Smaller tables when few rows remain to be cleared.
            let bits = (usize::BITS - n_rows.max(4).leading_zeros() - 2).clamp(1, GROUP as u32) as usize;
            let groups = block.len().div_ceil(bits);
            for g in 0..groups {
                let members = &block[g * bits..((g + 1) * bits).min(block.len())];
                let base = g * (1 << bits) * stride;
                table[base + w0..base + stride].fill(0);
                for mask in 1usize..(1 << members.len()) {
                    let low = mask.trailing_zeros() as usize;
                    let prev = mask & (mask - 1);
                    let src = members[low].0 * stride;
                    for w in w0..stride {
                        table[base + mask * stride + w] = table[base + prev * stride + w] ^ self.data[src + w];
                    }
                }
            }
            let shifts: Vec<usize> = block.iter().map(|&(_, bc)| bc - c0).collect();
            let apply = |row: &mut [u64]| {
                let (lo, sh) = (w0, c0 % WORD);
                let win = if sh == 0 || lo + 1 >= row.len() {
                    row[lo] >> sh
                } else {
                    (row[lo] >> sh) | (row[lo + 1] << (WORD - sh))
                };
                if win == 0 {
                    return;
                }
                for g in 0..groups {
                    let mut mask = 0usize;
                    for (i, &sft) in shifts[g * bits..((g + 1) * bits).min(shifts.len())].iter().enumerate() {
                        mask |= ((win >> sft) as usize & 1) << i;
                    }
                    if mask != 0 {
                        let off = g * (1 << bits) * stride + mask * stride;
                        for (d, t) in row[w0..].iter_mut().zip(&table[off + w0..off + stride]) {
                            *d ^= *t;
                        }
                    }
                }
            };
            let (above, rest) = self.data.split_at_mut(next * stride);
            let below = &mut rest[(block_end - next) * stride..];
            if c0 < full {
                for_rows(above, stride, &apply);
            }
            for_rows(below, stride, &apply);
            pivots.extend(block.iter().map(|&(_, bc)| bc));
            next = block_end;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        // Echelon form is enough to count pivots.
        self.clone().reduce_mixed(0, self.cols).len()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Applies `f` to every row of a row-major block.
fn for_rows(data: &mut [u64], stride: usize, f: &(impl Fn(&mut [u64]) + Sync)) {
    if stride == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if data.len() >= 1 << 16 {
            let chunk = (1 << 14) / stride + 1;
            data.par_chunks_mut(chunk * stride)
                .for_each(|c| c.chunks_exact_mut(stride).for_each(f));
            return;
        }
    }
    data.chunks_exact_mut(stride).for_each(f);
}

/// Reduced row-echelon form. Pivots are strictly increasing and the row
/// space is preserved.
pub fn rref(m: &BitMatrix) -> (Vec<usize>, BitMatrix) {
    let mut r = m.clone();
    let pivots = r.reduce_prefix(r.cols);
    (pivots, r)
}

/// Canonical basis of `{v : m·v = 0}`: one vector per free column, read off
/// the rref.
pub fn kernel_basis(m: &BitMatrix) -> Vec<BitVector> {
    let (pivots, r) = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = BitVector::unit(m.cols, free);
            for (i, &p) in pivots.iter().enumerate() {
                if r.get(i, free) {
                    v.set(p, true);
                }
            }
            v
        })
        .collect()
}

/// Canonical solution of `m·x = v` with free coordinates zero, or `None`
/// when `v` is outside the column space.
pub fn solve(m: &BitMatrix, v: &BitVector) -> Result<Option<BitVector>, F2Error> {
    if v.len() != m.rows {
        return Err(F2Error::Dimension {
            expected: m.rows,
            got: v.len(),
        });
    }
    // Reduce [m | v]; the system is consistent iff no pivot lands on v.
    let mut aug = BitMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in m.row(r).iter_ones() {
            aug.set(r, c, true);
        }
        if v.get(r) {
            aug.set(r, m.cols, true);
        }
    }
    let pivots = aug.reduce_prefix(m.cols + 1);
    if pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = BitVector::zeros(m.cols);
    for (i, &p) in pivots.iter().enumerate() {
        if aug.get(i, m.cols) {
            x.set(p, true);
        }
    }
    Ok(Some(x))
}

/// Basis (canonical, reduced) of the column space of `m`.
pub fn column_space(m: &BitMatrix) -> Vec<BitVector> {
    let (pivots, r) = rref(&m.transpose());
    (0..pivots.len()).map(|i| r.row(i)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventualImage {
    pub basis: Vec<BitVector>,
    pub stabilized: bool,
}

/// Image of `f₀∘…∘f_{K−1}` inside `V₀` for a tower `fₖ: Vₖ₊₁ → Vₖ`, each
/// given as a `dim Vₖ × dim Vₖ₊₁` matrix acting on column vectors.
/// `stabilized` reports whether dropping the last stage leaves the image
/// unchanged.
pub fn eventual_image(tower: &[BitMatrix]) -> Result<EventualImage, F2Error> {
    for k in 1..tower.len() {
        if tower[k - 1].cols != tower[k].rows {
            return Err(F2Error::Dimension {
                expected: tower[k - 1].cols,
                got: tower[k].rows,
            });
        }
    }
    let Some(first) = tower.first() else {
        return Ok(EventualImage {
            basis: Vec::new(),
            stabilized: true,
        });
    };
    let mut composite = first.clone();
    let mut previous = None;
    for f in &tower[1..] {
        previous = Some(composite.clone());
        composite = composite.mul(f)?;
    }
    let basis = column_space(&composite);
    let stabilized = match previous {
        None => true,
        Some(p) => column_space(&p).len() == basis.len(),
    };
    Ok(EventualImage { basis, stabilized })
}

/// Incrementally maintained echelon row basis of a subspace, with the
/// preimage of each row under some linear map recorded alongside.
///
/// Row `i` starts at column `pivots[i]` and pivots increase, so reducing in
/// pivot order clears each pivot column for good. Rows built by `insert` are
/// additionally fully reduced; rows supplied by the resolver need not be.
#[derive(Clone, Debug, Default)]
pub struct Reducer {
    dim: usize,
    pre_dim: usize,
    pivots: Vec<usize>,
    rows: Vec<BitVector>,
    preimages: Vec<BitVector>,
}

impl Reducer {
    pub fn new(dim: usize, pre_dim: usize) -> Self {
        Self {
            dim,
            pre_dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pre_dim(&self) -> usize {
        self.pre_dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn preimages(&self) -> &[BitVector] {
        &self.preimages
    }

    pub(crate) fn from_parts(
        dim: usize,
        pre_dim: usize,
        pivots: Vec<usize>,
        rows: Vec<BitVector>,
        preimages: Vec<BitVector>,
    ) -> Self {
        Self {
            dim,
            pre_dim,
            pivots,
            rows,
            preimages,
        }
    }

    /// Reduces `v` in place against the basis; returns the accumulated
    /// preimage of the part removed.
    pub fn reduce(&self, v: &mut BitVector) -> BitVector {
        let mut pre = BitVector::zeros(self.pre_dim);
        for (i, &p) in self.pivots.iter().enumerate() {
            if v.get(p) {
                v.add_assign(&self.rows[i]);
                pre.add_assign(&self.preimages[i]);
            }
        }
        pre
    }

    /// Adds `v` with preimage `pre` if independent. Returns whether the
    /// rank grew.
    pub fn insert(&mut self, mut v: BitVector, mut pre: BitVector) -> bool {
        let removed = self.reduce(&mut v);
        pre.add_assign(&removed);
        let Some(p) = v.first_one() else {
            return false;
        };
        for i in 0..self.rows.len() {
            if self.rows[i].get(p) {
                self.rows[i].add_assign(&v);
                self.preimages[i].add_assign(&pre);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        self.preimages.insert(at, pre);
        true
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    /// Canonical preimage of `v`, or `None` when `v` is outside the span.
    pub fn solve(&self, v: &BitVector) -> Option<BitVector> {
        let mut w = v.clone();
        let pre = self.reduce(&mut w);
        w.is_zero().then_some(pre)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_bools(
            &rows
                .iter()
                .map(|r| r.iter().map(|&b| b == 1).collect())
                .collect::<Vec<_>>(),
        )
    }

    fn v(bits: &[u8]) -> BitVector {
        BitVector::from_bools(&bits.iter().map(|&b| b == 1).collect::<Vec<_>>())
    }

    #[test]
    fn rref_examples() {
        let (p, r) = rref(&BitMatrix::identity(2));
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r, BitMatrix::identity(2));

        let (p, r) = rref(&BitMatrix::zeros(3, 4));
        assert!(p.is_empty());
        assert!(r.is_zero());

        let (p, r) = rref(&m(&[&[1, 1], &[1, 1]]));
        assert_eq!(p, vec![0]);
        assert_eq!(r, m(&[&[1, 1], &[0, 0]]));
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&BitMatrix::identity(5)).is_empty());
        assert_eq!(kernel_basis(&m(&[&[1, 1]])), vec![v(&[1, 1])]);
        assert_eq!(
            kernel_basis(&BitMatrix::zeros(2, 3)),
            vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]
        );
    }

    #[test]
    fn solve_examples() {
        assert_eq!(
            solve(&BitMatrix::identity(2), &v(&[1, 0])).unwrap(),
            Some(v(&[1, 0]))
        );
        assert_eq!(solve(&m(&[&[1, 1]]), &v(&[1])).unwrap(), Some(v(&[1, 0])));
        assert_eq!(solve(&m(&[&[0], &[0]]), &v(&[1, 0])).unwrap(), None);
        assert!(solve(&m(&[&[1, 1]]), &v(&[1, 0])).is_err());
    }

    #[test]
    fn eventual_image_examples() {
        let id = BitMatrix::identity(3);
        let e = eventual_image(&[id.clone(), id.clone(), id]).unwrap();
        assert_eq!(e.basis.len(), 3);
        assert!(e.stabilized);

        let e = eventual_image(&[BitMatrix::zeros(1, 1), BitMatrix::identity(1)]).unwrap();
        assert!(e.basis.is_empty());
        assert!(e.stabilized);

        let f = m(&[&[1, 0], &[0, 0]]);
        let e = eventual_image(&[f.clone(), f]).unwrap();
        assert_eq!(e.basis, vec![v(&[1, 0])]);
        assert!(e.stabilized);
    }

    #[test]
    fn pad_bits_stay_clear() {
        let x = BitVector::from_words(3, vec![u64::MAX]);
        assert_eq!(x.count_ones(), 3);
        assert_eq!(x.extended(2).count_ones(), 2);
    }

    #[test]
    fn reducer_solves_against_inserted_rows() {
        let mut r = Reducer::new(3, 2);
        assert!(r.insert(v(&[1, 1, 0]), v(&[1, 0])));
        assert!(r.insert(v(&[0, 1, 1]), v(&[0, 1])));
        assert!(!r.insert(v(&[1, 0, 1]), v(&[1, 1])));
        assert_eq!(r.solve(&v(&[1, 0, 1])), Some(v(&[1, 1])));
        assert_eq!(r.solve(&v(&[1, 0, 0])), None);
    }
}
