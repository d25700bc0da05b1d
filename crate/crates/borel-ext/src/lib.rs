//! Classical Ext over the mod-2 Steenrod algebra for stunted projective
//! modules, and the Borel C₂-equivariant Adams E₂-page assembled from them.
//!
//! Layers, bottom up: [`f2`] linear algebra, [`steenrod`] the Milnor basis,
//! [`module`] cell modules, [`resolution`] minimal resolutions, maps and
//! limits, [`engine`] the shared resolution store, [`sseq`] the cell
//! filtration spectral sequence and detection names, [`borel`] the Borel
//! groups with ρ, dictionaries and Mahowald invariants, [`chart`] JSON pages
//! and SVG. [`cobar`] is an independent oracle for small windows, and
//! [`validate`] bundles the consistency suites.

pub mod borel;
pub mod catalog;
pub mod chart;
#[cfg(feature = "cli")]
pub mod config;
pub mod cobar;
pub mod engine;
pub mod f2;
pub mod module;
pub mod resolution;
pub mod sseq;
pub mod steenrod;
pub mod validate;

/// Code version baked into caches and chart provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
