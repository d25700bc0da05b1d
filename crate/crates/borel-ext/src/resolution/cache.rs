//! On-disk resolution cache.
//!
//! File layout, all integers little-endian:
//!
//! ```text
//! magic  "BXRS"            4 bytes
//! format version           u32
//! code version             u32 length + UTF-8 bytes
//! module cells             u32 count + i32 each
//! s_max, t_max             u32, i32
//! per s in 0..=s_max:
//!   generator count        u32
//!   per generator:         i32 degree, u32 ordinal,
//!                          u32 d-length + u64 words,
//!                          u32 term count + (u32 gen, u32 deg, u32 idx) each
//! per s, per t in t_min..=t_max (image of d_s):
//!   u32 dim, u32 preimage dim, u32 rank,
//!   rank × (u32 pivot, u64 row words, u64 preimage words)
//! SHA-256 of everything above   32 bytes
//! ```
//!
//! Entries are keyed by a hash of (module, s_max, t_max, code version). A
//! file failing any check is reported as corrupt and must be discarded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::f2::{BitVector, Reducer};
use crate::module::GradedModule;
use crate::steenrod::AlgebraTable;

use super::{Generator, Resolution, Term};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"BXRS";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt cache entry: {0}")]
    Corrupt(String),
}

pub fn cache_key(module: &GradedModule, s_max: u32, t_max: i32) -> String {
    let mut h = Sha256::new();
    h.update(module.name().as_bytes());
    h.update(b"|");
    h.update(s_max.to_le_bytes());
    h.update(t_max.to_le_bytes());
    h.update(crate::VERSION.as_bytes());
    h.update(CACHE_FORMAT_VERSION.to_le_bytes());
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, module: &GradedModule, s_max: u32, t_max: i32) -> PathBuf {
    dir.join(format!("{}.bxr", cache_key(module, s_max, t_max)))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn i32(&mut self, x: i32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn words(&mut self, v: &BitVector) {
        for w in v.words() {
            self.0.extend_from_slice(&w.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CacheError> {
        if self.pos + n > self.buf.len() {
            return Err(CacheError::Corrupt("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn i32(&mut self) -> Result<i32, CacheError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn count(&mut self, limit: usize) -> Result<usize, CacheError> {
        let n = self.u32()? as usize;
        if n > limit {
            return Err(CacheError::Corrupt(format!("count {n} exceeds {limit}")));
        }
        Ok(n)
    }
    fn vector(&mut self, len: usize) -> Result<BitVector, CacheError> {
        let nw = len.div_ceil(64);
        let bytes = self.take(nw * 8)?;
        let words = bytes
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let v = BitVector::from_words(len, words);
        Ok(v)
    }
}

pub fn encode(res: &Resolution) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(CACHE_FORMAT_VERSION);
    w.u32(crate::VERSION.len() as u32);
    w.0.extend_from_slice(crate::VERSION.as_bytes());
    w.u32(res.module().len() as u32);
    for &c in res.module().cells() {
        w.i32(c);
    }
    w.u32(res.s_max());
    w.i32(res.t_max());
    for s in 0..=res.s_max() {
        let gens = res.generators(s);
        w.u32(gens.len() as u32);
        for g in gens {
            w.i32(g.degree);
            w.u32(g.ordinal);
            w.u32(g.d.len() as u32);
            w.words(&g.d);
            w.u32(g.terms.len() as u32);
            for t in &g.terms {
                w.u32(t.gen);
                w.u32(t.deg);
                w.u32(t.idx);
            }
        }
    }
    for per_t in res.images_all() {
        for r in per_t {
            w.u32(r.dim() as u32);
            w.u32(r.pre_dim() as u32);
            w.u32(r.rank() as u32);
            for i in 0..r.rank() {
                w.u32(r.pivots()[i] as u32);
                w.words(&r.rows()[i]);
                w.words(&r.preimages()[i]);
            }
        }
    }
    let digest = Sha256::digest(&w.0);
    w.0.extend_from_slice(&digest);
    w.0
}

const LIMIT: usize = 1 << 28;

pub fn decode(bytes: &[u8], algebra: Arc<AlgebraTable>) -> Result<Resolution, CacheError> {
    if bytes.len() < 36 {
        return Err(CacheError::Corrupt("too short".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(CacheError::Corrupt("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CacheError::Corrupt("bad magic".into()));
    }
    if r.u32()? != CACHE_FORMAT_VERSION {
        return Err(CacheError::Corrupt("format version mismatch".into()));
    }
    let vl = r.count(256)?;
    if r.take(vl)? != crate::VERSION.as_bytes() {
        return Err(CacheError::Corrupt("code version mismatch".into()));
    }
    let nc = r.count(LIMIT)?;
    let cells = (0..nc).map(|_| r.i32()).collect::<Result<Vec<_>, _>>()?;
    let module = GradedModule::from_cells(cells);
    let s_max = r.u32()?;
    if s_max > 1024 {
        return Err(CacheError::Corrupt("s_max out of range".into()));
    }
    let t_max = r.i32()?;
    let mut gens = Vec::new();
    for _ in 0..=s_max {
        let n = r.count(LIMIT)?;
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            let degree = r.i32()?;
            let ordinal = r.u32()?;
            let dl = r.count(LIMIT)?;
            let d = r.vector(dl)?;
            let nt = r.count(LIMIT)?;
            let mut terms = Vec::with_capacity(nt);
            for _ in 0..nt {
                terms.push(Term {
                    gen: r.u32()?,
                    deg: r.u32()?,
                    idx: r.u32()?,
                });
            }
            v.push(Generator {
                degree,
                ordinal,
                d,
                terms,
            });
        }
        gens.push(v);
    }
    let t_min = module.bottom().unwrap_or(t_max + 1).min(t_max + 1);
    let mut images = Vec::new();
    for _ in 0..=s_max {
        let mut per_t = Vec::new();
        for _ in t_min..=t_max {
            let dim = r.count(LIMIT)?;
            let pre = r.count(LIMIT)?;
            let rank = r.count(dim.min(pre))?;
            let mut pivots = Vec::with_capacity(rank);
            let mut rows = Vec::with_capacity(rank);
            let mut pres = Vec::with_capacity(rank);
            for _ in 0..rank {
                let p = r.count(dim)?;
                pivots.push(p);
                rows.push(r.vector(dim)?);
                pres.push(r.vector(pre)?);
            }
            if pivots.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CacheError::Corrupt("pivots not increasing".into()));
            }
            per_t.push(Reducer::from_parts(dim, pre, pivots, rows, pres));
        }
        images.push(per_t);
    }
    if r.pos != body.len() {
        return Err(CacheError::Corrupt("trailing bytes".into()));
    }
    if (t_max - t_min).max(0) as u32 > algebra.max_degree() {
        return Err(CacheError::Corrupt("span exceeds algebra table".into()));
    }
    let res = Resolution::from_parts(module, algebra, s_max, t_max, gens, images);
    res.verify().map_err(|e| CacheError::Corrupt(e.to_string()))?;
    Ok(res)
}

/// Writes atomically (temporary file, then rename).
pub fn save_resolution(dir: &Path, res: &Resolution) -> Result<PathBuf, CacheError> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, res.module(), res.s_max(), res.t_max());
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(res))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Loads a cached resolution if present. Corrupt files are deleted and
/// reported as `Ok(None)`, never trusted.
pub fn load_resolution(
    dir: &Path,
    module: &GradedModule,
    s_max: u32,
    t_max: i32,
    algebra: Arc<AlgebraTable>,
) -> Result<Option<Resolution>, CacheError> {
    let path = cache_path(dir, module, s_max, t_max);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    match decode(&bytes, algebra) {
        Ok(res) if res.module() == module && res.s_max() == s_max && res.t_max() == t_max => Ok(Some(res)),
        _ => {
            let _ = fs::remove_file(&path);
            Ok(None)
        }
    }
}
