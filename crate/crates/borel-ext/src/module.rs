//! Steenrod modules of stunted real projective spectra.
//!
//! Every module here has at most one cell per degree and the standard
//! binomial action `Sqᶜ xⁿ = C(n,c) xⁿ⁺ᶜ`, extended to negative `n` by
//! `C(n,c) ≡ C(c−n−1,c)`. Cell `−1` is never hit by a positive square
//! (`C(2c,c)` is even), which is what makes the deleted-cell models legal.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::steenrod::{adem_product, AdmissibleSq, MilnorSq};

/// `C(n, k) mod 2` for any integer `n`.
pub fn binom2(n: i64, k: u64) -> bool {
    if n >= 0 {
        let n = n as u64;
        k <= n && k & (n - k) == 0
    } else {
        let m = k as i64 - n - 1;
        binom2(m, k)
    }
}

/// Coefficient of `Sq(r₁,…,r_k) xⁿ`: `C(n, Σr)` times the multinomial
/// `(Σr; r₁,…,r_k)`, both mod 2.
pub fn milnor_coefficient(n: i64, r: &[u32]) -> bool {
    let mut seen = 0u64;
    let mut total = 0u64;
    for &x in r {
        let x = x as u64;
        if seen & x != 0 {
            return false;
        }
        seen |= x;
        total += x;
    }
    binom2(n, total)
}

/// A cyclic-cell Steenrod module: one basis element `xⁿ` per cell.
///
/// The cell set is a subquotient of the doubly infinite projective module,
/// so the restricted binomial action satisfies the Adem relations.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedModule {
    cells: Vec<i32>,
}

impl fmt::Debug for GradedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for GradedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl GradedModule {
    pub fn from_cells(cells: impl IntoIterator<Item = i32>) -> Self {
        let mut cells: Vec<i32> = cells.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        Self { cells }
    }

    pub fn sphere(n: i32) -> Self {
        Self { cells: vec![n] }
    }

    pub fn cells(&self) -> &[i32] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn bottom(&self) -> Option<i32> {
        self.cells.first().copied()
    }

    pub fn top(&self) -> Option<i32> {
        self.cells.last().copied()
    }

    #[inline]
    pub fn has_cell(&self, n: i32) -> bool {
        self.cells.binary_search(&n).is_ok()
    }

    /// Dimension in degree `t` (0 or 1).
    #[inline]
    pub fn dim(&self, t: i32) -> usize {
        self.has_cell(t) as usize
    }

    /// Coefficient of `x^{n+a}` in `Sqᵃ xⁿ`; zero when either cell is absent.
    pub fn sq(&self, a: u32, n: i32) -> bool {
        self.has_cell(n) && self.has_cell(n + a as i32) && binom2(n as i64, a as u64)
    }

    /// Coefficient of `x^{n+|R|}` in `Sq(R) xⁿ`.
    pub fn milnor(&self, r: &MilnorSq, n: i32) -> bool {
        self.has_cell(n)
            && self.has_cell(n + r.degree() as i32)
            && milnor_coefficient(n as i64, r.exponents())
    }

    /// Cells in `[lo, hi]`, a subquotient.
    pub fn window(&self, lo: i32, hi: i32) -> GradedModule {
        Self {
            cells: self.cells.iter().copied().filter(|&n| lo <= n && n <= hi).collect(),
        }
    }

    /// Cells `≥ n`: always a submodule.
    pub fn at_least(&self, n: i32) -> GradedModule {
        Self {
            cells: self.cells.iter().copied().filter(|&c| c >= n).collect(),
        }
    }

    /// Cells `≤ n`: always a quotient.
    pub fn at_most(&self, n: i32) -> GradedModule {
        Self {
            cells: self.cells.iter().copied().filter(|&c| c <= n).collect(),
        }
    }

    pub fn shifted(&self, k: i32) -> GradedModule {
        Self {
            cells: self.cells.iter().map(|&n| n + k).collect(),
        }
    }

    /// Compact canonical name, e.g. `{-8..-2,0..8}`.
    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.cells.len() {
            let start = self.cells[i];
            let mut j = i;
            while j + 1 < self.cells.len() && self.cells[j + 1] == self.cells[j] + 1 {
                j += 1;
            }
            if j == i {
                parts.push(format!("{start}"));
            } else {
                parts.push(format!("{start}..{}", self.cells[j]));
            }
            i = j + 1;
        }
        format!("{{{}}}", parts.join(","))
    }

    pub fn cell_name(n: i32) -> String {
        format!("[{n}]")
    }

    /// Applies an admissible word right to left to `xⁿ`, returning the final
    /// cell if the coefficient is nonzero.
    pub fn apply_word(&self, word: &AdmissibleSq, n: i32) -> Option<i32> {
        let mut cur = n;
        for &a in word.word().iter().rev() {
            if !self.sq(a, cur) {
                return None;
            }
            cur += a as i32;
        }
        Some(cur)
    }

    /// Exhaustively checks `Sqᵃ Sqᵇ = adem(Sqᵃ, Sqᵇ)` on every cell for all
    /// `a + b ≤ span`. Returns the first violation found.
    pub fn check_module_axiom(&self, span: u32) -> Result<(), String> {
        for a in 1..=span {
            for b in 1..=span - a {
                let rel = adem_product(
                    &AdmissibleSq::new(vec![a]).expect("single square"),
                    &AdmissibleSq::new(vec![b]).expect("single square"),
                );
                for &n in &self.cells {
                    let lhs = self.sq(b, n) && self.sq(a, n + b as i32);
                    let rhs = rel
                        .iter()
                        .filter(|w| self.apply_word(w, n).is_some())
                        .count()
                        % 2
                        == 1;
                    if lhs != rhs {
                        return Err(format!("Sq{a}Sq{b} on x^{n} in {}", self.name()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `P_a^b`: cells `a..=b`.
pub fn stunted_module(a: i32, b: i32) -> Result<GradedModule, SpecError> {
    if b < a {
        return Err(SpecError::new(0, "empty cell range"));
    }
    Ok(GradedModule::from_cells(a..=b))
}

/// `M_w`: cells `{n ≥ −w, n ≠ −1}` up to `top`.
pub fn deleted_model(w: i32, top: i32) -> GradedModule {
    GradedModule::from_cells((-w..=top).filter(|&n| n != -1))
}

/// One summand of a column model, with the filtration shift it contributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnPiece {
    pub module: GradedModule,
    pub s_shift: u32,
    pub summand: Summand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Summand {
    /// `M_w` for `w > 0`, or `P^∞_{−w}` for `w ≤ 0`.
    Column,
    /// The `S^{−1}` summand present for `w ≤ 0`.
    Sphere,
}

impl Summand {
    pub fn tag(self) -> &'static str {
        match self {
            Summand::Column => "P",
            Summand::Sphere => "S-1",
        }
    }
}

/// Bounded-below models computing column `w` of the Borel Ext, truncated at
/// `top`.
pub fn column_model(w: i32, top: i32) -> Vec<ColumnPiece> {
    if w > 0 {
        vec![ColumnPiece {
            module: deleted_model(w, top),
            s_shift: 1,
            summand: Summand::Column,
        }]
    } else {
        vec![
            ColumnPiece {
                module: GradedModule::from_cells(-w..=top),
                s_shift: 1,
                summand: Summand::Column,
            },
            ColumnPiece {
                module: GradedModule::sphere(-1),
                s_shift: 0,
                summand: Summand::Sphere,
            },
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// The suspended limit `lim ΣP^{−k−1}_{−∞}`: cell −1 deleted.
    A,
    /// `lim P^∞_{−k}`: all cells.
    B,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
        })
    }
}

pub fn dictionary_model(variant: Variant, k: i32, top: i32) -> GradedModule {
    match variant {
        Variant::A => GradedModule::from_cells((-k..=top).filter(|&n| n != -1)),
        Variant::B => GradedModule::from_cells(-k..=top),
    }
}

/// A degree-preserving map sending `xⁿ ↦ xⁿ` on the listed cells and every
/// other cell to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleMap {
    pub source: GradedModule,
    pub target: GradedModule,
    support: Vec<i32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("map does not commute with Sq{a} on x^{n}")]
    NotLinear { a: u32, n: i32 },
    #[error("sequence is not exact in degree {0}")]
    NotExact(i32),
    #[error("cells {0} are not closed under the action")]
    NotSubmodule(String),
}

impl ModuleMap {
    /// Identity on the cells both modules share; checked for linearity.
    pub fn on_common_cells(source: &GradedModule, target: &GradedModule) -> Result<Self, ModuleError> {
        let support = source
            .cells()
            .iter()
            .copied()
            .filter(|&n| target.has_cell(n))
            .collect();
        Self::with_support(source, target, support)
    }

    pub fn with_support(
        source: &GradedModule,
        target: &GradedModule,
        support: Vec<i32>,
    ) -> Result<Self, ModuleError> {
        let map = Self {
            source: source.clone(),
            target: target.clone(),
            support,
        };
        map.check()?;
        Ok(map)
    }

    #[inline]
    pub fn maps(&self, n: i32) -> bool {
        self.support.binary_search(&n).is_ok()
    }

    pub fn support(&self) -> &[i32] {
        &self.support
    }

    fn check(&self) -> Result<(), ModuleError> {
        let (lo, hi) = match (
            self.source.bottom().into_iter().chain(self.target.bottom()).min(),
            self.source.top().into_iter().chain(self.target.top()).max(),
        ) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Ok(()),
        };
        for &n in self.source.cells() {
            for a in 1..=(hi - lo).max(0) as u32 {
                let m = n + a as i32;
                let lhs = self.maps(n) && self.target.sq(a, n);
                let rhs = self.source.sq(a, n) && self.maps(m);
                if lhs != rhs {
                    return Err(ModuleError::NotLinear { a, n });
                }
            }
        }
        Ok(())
    }

    pub fn compose(&self, after: &ModuleMap) -> Result<ModuleMap, ModuleError> {
        assert_eq!(self.target, after.source, "maps are not composable");
        let support = self.support.iter().copied().filter(|&n| after.maps(n)).collect();
        ModuleMap::with_support(&self.source, &after.target, support)
    }
}

/// `0 → sub → mid → quot → 0` with cell-identity maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortExactSeq {
    pub inclusion: ModuleMap,
    pub projection: ModuleMap,
}

impl ShortExactSeq {
    pub fn sub(&self) -> &GradedModule {
        &self.inclusion.source
    }

    pub fn mid(&self) -> &GradedModule {
        &self.inclusion.target
    }

    pub fn quot(&self) -> &GradedModule {
        &self.projection.target
    }

    /// Splits `mid` into the cells of `sub` and the rest.
    pub fn new(sub: &GradedModule, mid: &GradedModule) -> Result<Self, ModuleError> {
        if sub.cells().iter().any(|&n| !mid.has_cell(n)) {
            return Err(ModuleError::NotSubmodule(sub.name()));
        }
        let quot = GradedModule::from_cells(mid.cells().iter().copied().filter(|&n| !sub.has_cell(n)));
        let inclusion = ModuleMap::on_common_cells(sub, mid)
            .map_err(|_| ModuleError::NotSubmodule(sub.name()))?;
        let projection = ModuleMap::on_common_cells(mid, &quot)
            .map_err(|_| ModuleError::NotSubmodule(sub.name()))?;
        for &n in mid.cells() {
            // One cell per degree: exactness means exactly one side sees it.
            if sub.has_cell(n) == quot.has_cell(n) {
                return Err(ModuleError::NotExact(n));
            }
        }
        Ok(Self { inclusion, projection })
    }
}

/// Splits `m` into cells `≥ n` (sub) and `< n` (quotient).
pub fn cell_sub(m: &GradedModule, n: i32) -> ShortExactSeq {
    ShortExactSeq::new(&m.at_least(n), m).expect("cells above a cutoff always form a submodule")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} (at position {position})")]
pub struct SpecError {
    pub position: usize,
    pub message: String,
}

impl SpecError {
    fn new(position: usize, message: &str) -> Self {
        Self {
            position,
            message: message.to_string(),
        }
    }
}

/// CLI module-spec grammar: `S:n`, `P:a:b`, `M:w`, `DA:K:T`, `DB:K:T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModuleSpec {
    Sphere(i32),
    Stunted(i32, i32),
    Column(i32),
    Dictionary(Variant, i32, i32),
}

impl FromStr for ModuleSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let parts: Vec<&str> = s.split(':').collect();
        let mut offsets = Vec::with_capacity(parts.len());
        let mut pos = 0;
        for p in &parts {
            offsets.push(pos);
            pos += p.len() + 1;
        }
        let int = |i: usize| -> Result<i32, SpecError> {
            parts[i]
                .trim()
                .parse::<i32>()
                .map_err(|_| SpecError::new(offsets[i], &format!("expected an integer, found {:?}", parts[i])))
        };
        let arity = |n: usize| -> Result<(), SpecError> {
            if parts.len() != n + 1 {
                Err(SpecError::new(
                    0,
                    &format!("{} takes {n} argument(s), found {}", parts[0], parts.len() - 1),
                ))
            } else {
                Ok(())
            }
        };
        match parts[0].trim() {
            "S" => {
                arity(1)?;
                Ok(ModuleSpec::Sphere(int(1)?))
            }
            "P" => {
                arity(2)?;
                let (a, b) = (int(1)?, int(2)?);
                if b < a {
                    return Err(SpecError::new(offsets[2], "empty cell range"));
                }
                Ok(ModuleSpec::Stunted(a, b))
            }
            "M" => {
                arity(1)?;
                let w = int(1)?;
                if w <= 0 {
                    return Err(SpecError::new(offsets[1], "M:w needs w > 0"));
                }
                Ok(ModuleSpec::Column(w))
            }
            v @ ("DA" | "DB") => {
                arity(2)?;
                let (k, t) = (int(1)?, int(2)?);
                if k < 1 || t < 1 {
                    return Err(SpecError::new(offsets[1], "depth and top must be at least 1"));
                }
                let variant = if v == "DA" { Variant::A } else { Variant::B };
                Ok(ModuleSpec::Dictionary(variant, k, t))
            }
            other => Err(SpecError::new(
                0,
                &format!("unknown module kind {other:?}; expected S, P, M, DA or DB"),
            )),
        }
    }
}

impl fmt::Display for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleSpec::Sphere(n) => write!(f, "S:{n}"),
            ModuleSpec::Stunted(a, b) => write!(f, "P:{a}:{b}"),
            ModuleSpec::Column(w) => write!(f, "M:{w}"),
            ModuleSpec::Dictionary(v, k, t) => write!(f, "D{v}:{k}:{t}"),
        }
    }
}

impl ModuleSpec {
    /// The module, truncated at `top` where the spec is unbounded above.
    pub fn module(&self, top: i32) -> GradedModule {
        match *self {
            ModuleSpec::Sphere(n) => GradedModule::sphere(n),
            ModuleSpec::Stunted(a, b) => GradedModule::from_cells(a..=b),
            ModuleSpec::Column(w) => deleted_model(w, top),
            ModuleSpec::Dictionary(v, k, t) => dictionary_model(v, k, t),
        }
    }
}

pub type SharedModule = Arc<GradedModule>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_examples() {
        assert!(binom2(6, 2));
        assert!(!binom2(-3, 2));
        for k in 0..40 {
            assert!(binom2(-1, k));
        }
    }

    #[test]
    fn minus_one_is_never_hit_and_hits_everything() {
        let m = GradedModule::from_cells(-20..=20);
        for c in 1..=19u32 {
            assert!(!m.sq(c, -1 - c as i32), "Sq{c} hits x^-1");
            assert!(m.sq(c, -1));
        }
    }

    #[test]
    fn stunted_examples() {
        let p = stunted_module(1, 2).unwrap();
        assert!(p.sq(1, 1));
        assert_eq!(stunted_module(2, 1).unwrap_err().message, "empty cell range");
    }

    #[test]
    fn column_models() {
        let c1 = column_model(1, 10);
        assert_eq!(c1.len(), 1);
        assert_eq!(c1[0].module, GradedModule::from_cells(0..=10));
        assert_eq!(c1[0].s_shift, 1);

        let c0 = column_model(0, 10);
        assert_eq!(c0[0].module, GradedModule::from_cells(0..=10));
        assert_eq!(c0[1].module, GradedModule::sphere(-1));
        assert_eq!((c0[0].s_shift, c0[1].s_shift), (1, 0));

        let c8 = column_model(8, 10);
        assert!(c8[0].module.has_cell(-4));
        assert!(!c8[0].module.has_cell(-1));
    }

    #[test]
    fn dictionary_models() {
        let a = dictionary_model(Variant::A, 8, 8);
        assert_eq!(a.len(), 16);
        assert!(!a.has_cell(-1));
        assert_eq!(dictionary_model(Variant::B, 1, 1).cells(), &[-1, 0, 1]);
    }

    #[test]
    fn cell_sub_examples() {
        let p = stunted_module(1, 2).unwrap();
        let ses = cell_sub(&p, 2);
        assert_eq!(ses.sub(), &GradedModule::sphere(2));
        assert_eq!(ses.quot(), &GradedModule::sphere(1));

        let whole = cell_sub(&p, 1);
        assert_eq!(whole.sub(), &p);
        assert!(whole.quot().is_empty());

        let a = dictionary_model(Variant::A, 6, 4);
        let ses = cell_sub(&a, 0);
        assert_eq!(ses.sub(), &GradedModule::from_cells(0..=4));
        assert_eq!(ses.quot(), &GradedModule::from_cells(-6..=-2));
    }

    #[test]
    fn maps_check_linearity() {
        let p = stunted_module(1, 2).unwrap();
        // Including the bottom cell alone is not a module map.
        assert!(ModuleMap::on_common_cells(&GradedModule::sphere(1), &p).is_err());
        assert!(ModuleMap::on_common_cells(&GradedModule::sphere(2), &p).is_ok());
        assert!(ModuleMap::on_common_cells(&p, &GradedModule::sphere(1)).is_ok());
        // Lin's projection onto the −1 cell.
        let b = dictionary_model(Variant::B, 6, 6);
        assert!(ModuleMap::on_common_cells(&b, &GradedModule::sphere(-1)).is_ok());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!("S:0".parse::<ModuleSpec>().unwrap(), ModuleSpec::Sphere(0));
        assert_eq!("P:-5:-1".parse::<ModuleSpec>().unwrap(), ModuleSpec::Stunted(-5, -1));
        assert_eq!("M:8".parse::<ModuleSpec>().unwrap(), ModuleSpec::Column(8));
        assert_eq!(
            "DB:4:4".parse::<ModuleSpec>().unwrap(),
            ModuleSpec::Dictionary(Variant::B, 4, 4)
        );
        let e = "P:2:1".parse::<ModuleSpec>().unwrap_err();
        assert_eq!(e.message, "empty cell range");
        assert_eq!(e.position, 4);
        assert!("Q:1".parse::<ModuleSpec>().is_err());
        assert!("P:1:x".parse::<ModuleSpec>().is_err());
        for s in ["S:3", "P:1:8", "M:2", "DA:8:8"] {
            assert_eq!(s.parse::<ModuleSpec>().unwrap().to_string(), s);
        }
    }
}
