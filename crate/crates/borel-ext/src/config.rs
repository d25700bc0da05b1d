//! Command-line configuration file and atomic output.
//!
//! The config file is TOML with flat keys, all optional:
//!
//! ```toml
//! smax = 15
//! tmax = 30
//! stem_max = 30
//! coweight_min = -2
//! coweight_max = 13
//! depth = 96
//! cache_dir = "/var/cache/borel-ext"
//! jobs = 8
//! ```
//!
//! Flags override the file. `BOREL_EXT_CACHE` names the cache directory when
//! neither a flag nor the file does.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CACHE_ENV: &str = "BOREL_EXT_CACHE";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub smax: Option<u32>,
    pub tmax: Option<i32>,
    pub stem_max: Option<i32>,
    pub coweight_min: Option<i32>,
    pub coweight_max: Option<i32>,
    pub depth: Option<i32>,
    pub cache_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Flag, then `BOREL_EXT_CACHE`, then the file.
    pub fn cache_dir(&self, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| self.cache_dir.clone())
    }
}

/// Writes through a temporary file in the target directory, then renames,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let c = Config::parse("smax = 6\ntmax = 20\nstem_max = 12\ncoweight_min = 0\ncoweight_max = 3\ndepth = 40\ncache_dir = \"/tmp/x\"\njobs = 2\n").unwrap();
        assert_eq!(c.smax, Some(6));
        assert_eq!(c.coweight_min, Some(0));
        assert_eq!(c.cache_dir.as_deref(), Some(Path::new("/tmp/x")));
        assert_eq!(c.jobs, Some(2));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Config::parse("s_max = 3").is_err());
    }

    #[test]
    fn flag_beats_file() {
        let c = Config {
            cache_dir: Some("/from/file".into()),
            ..Config::default()
        };
        assert_eq!(c.cache_dir(Some("/flag".into())), Some(PathBuf::from("/flag")));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
