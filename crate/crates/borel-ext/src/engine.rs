//! Shared resolution store.
//!
//! Every higher layer asks the engine for resolutions instead of building
//! them, so a module is resolved once per process (and once per cache
//! directory). Modules are truncated at the requested `t_max` first: cells
//! above it never influence `Ext^{s,t}` for `t ≤ t_max`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use crate::module::GradedModule;
use crate::resolution::{load_resolution, save_resolution, Resolution};
use crate::steenrod::AlgebraTable;

pub struct Engine {
    algebra: RwLock<Arc<AlgebraTable>>,
    store: Mutex<HashMap<Option<i32>, Vec<Arc<Resolution>>>>,
    cache_dir: Option<PathBuf>,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new(None)
    }
}

impl Engine {
    pub fn new(cache_dir: Option<PathBuf>) -> Self {
        Engine {
            algebra: RwLock::new(Arc::new(AlgebraTable::new(32))),
            store: Mutex::new(HashMap::new()),
            cache_dir,
        }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    /// A multiplication table covering degrees up to `span`, grown (and
    /// rebuilt) on demand.
    pub fn algebra(&self, span: u32) -> Arc<AlgebraTable> {
        {
            let a = self.algebra.read().expect("algebra lock");
            if a.max_degree() >= span {
                return a.clone();
            }
        }
        let mut a = self.algebra.write().expect("algebra lock");
        if a.max_degree() < span {
            *a = Arc::new(AlgebraTable::new(span.max(a.max_degree() + 16)));
        }
        a.clone()
    }

    /// Minimal resolution of `module` through `(s_max, t_max)`. A stored
    /// resolution covering a larger window is returned as is, so callers
    /// compare modules only below `t_max`.
    pub fn resolve(&self, module: &GradedModule, s_max: u32, t_max: i32) -> Arc<Resolution> {
        let module = module.at_most(t_max);
        if let Some(r) = self.lookup(&module, s_max, t_max) {
            return r;
        }
        let k = periodic_shift(&module);
        if k != 0 {
            // Only a resolution of exactly the canonical module may be
            // shifted back: a taller one has squares across the period.
            let shifted = module.shifted(k);
            let canonical = match self.lookup_exact(&shifted, s_max, t_max + k) {
                Some(r) => r,
                None => self.compute(&shifted, s_max, t_max + k),
            };
            let res = Arc::new(canonical.shifted(-k));
            self.remember(res.clone());
            return res;
        }
        self.compute(&module, s_max, t_max)
    }

    fn compute(&self, module: &GradedModule, s_max: u32, t_max: i32) -> Arc<Resolution> {
        let span = module.bottom().map_or(0, |b| (t_max - b).max(0) as u32);
        let algebra = self.algebra(span);
        let loaded = self.cache_dir.as_ref().and_then(|dir| {
            load_resolution(dir, module, s_max, t_max, algebra.clone())
                .ok()
                .flatten()
        });
        let res = match loaded {
            Some(r) => r,
            None => {
                let r = Resolution::new(module, algebra, s_max, t_max);
                if let Some(dir) = &self.cache_dir {
                    // A failed write only costs a recomputation next time.
                    let _ = save_resolution(dir, &r);
                }
                r
            }
        };
        let res = Arc::new(res);
        self.remember(res.clone());
        res
    }

    /// Drops every stored resolution. Disk cache entries stay.
    pub fn clear(&self) {
        self.store.lock().expect("store lock").clear();
    }

    fn remember(&self, res: Arc<Resolution>) {
        self.store
            .lock()
            .expect("store lock")
            .entry(res.module().bottom())
            .or_default()
            .push(res);
    }

    fn lookup_exact(&self, module: &GradedModule, s_max: u32, t_max: i32) -> Option<Arc<Resolution>> {
        let store = self.store.lock().expect("store lock");
        store
            .get(&module.bottom())?
            .iter()
            .find(|r| r.s_max() >= s_max && r.t_max() >= t_max && r.module() == module)
            .cloned()
    }

    fn lookup(&self, module: &GradedModule, s_max: u32, t_max: i32) -> Option<Arc<Resolution>> {
        let store = self.store.lock().expect("store lock");
        // A resolution of a taller module agrees with ours below `t_max`.
        store
            .get(&module.bottom())?
            .iter()
            .find(|r| r.s_max() >= s_max && r.t_max() >= t_max && &r.module().at_most(t_max) == module)
            .cloned()
    }
}

/// Spans below this are moved to a canonical position before resolving.
const PERIODIC_SPAN: i32 = 32;

/// Shift taking a small module to its canonical copy with bottom cell in
/// `[0, 2^L)`, where `2^L` exceeds the span.
///
/// `C(n, c) mod 2` for `c < 2^L` depends only on `n mod 2^L`, and no square
/// of degree above the span acts, so the shifted module is isomorphic up to
/// regrading. Windows of the cell filtration recur at many positions and get
/// resolved once this way.
pub fn periodic_shift(module: &GradedModule) -> i32 {
    let (Some(b), Some(t)) = (module.bottom(), module.top()) else {
        return 0;
    };
    let span = t - b;
    if span >= PERIODIC_SPAN {
        return 0;
    }
    let period = ((span + 1) as u32).next_power_of_two() as i32;
    -(b - b.rem_euclid(period))
}

