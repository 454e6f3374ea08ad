use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable naming the regression store file.
pub const STORE_ENV: &str = "HODGE_HARDY_REGRESSION_STORE";

/// How a frozen constant constrains later measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// `|value - frozen| ≤ band · |frozen|`.
    Relative,
    /// `value ≤ frozen · (1 + band)`.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrozenConstant {
    pub value: f64,
    pub band: f64,
    pub kind: BandKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// First measurement; frozen by this run.
    Measured,
    /// Compared against an earlier run.
    Frozen,
    /// Fixed threshold, not a measured constant.
    Pinned,
}

/// A measured constant with its tolerance and origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub kind: BandKind,
    pub provenance: Provenance,
    pub pass: bool,
}

/// Frozen constants keyed by `(complex fingerprint, experiment id, name)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegressionStore {
    #[serde(skip)]
    path: Option<PathBuf>,
    #[serde(skip)]
    dirty: bool,
    entries: BTreeMap<String, FrozenConstant>,
}

fn key(fingerprint: &str, experiment: &str, name: &str) -> String {
    format!("{fingerprint}/{experiment}/{name}")
}

impl RegressionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path`; a missing file gives an empty store bound to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut store = if path.exists() {
            serde_json::from_str::<Self>(&std::fs::read_to_string(path)?)?
        } else {
            Self::default()
        };
        store.path = Some(path.to_path_buf());
        Ok(store)
    }

    /// Store named by the environment variable, else an in-memory one.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(STORE_ENV) {
            Some(p) => Self::open(p),
            None => Ok(Self::in_memory()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, fingerprint: &str, experiment: &str, name: &str) -> Option<&FrozenConstant> {
        self.entries.get(&key(fingerprint, experiment, name))
    }

    /// Compares against the frozen value, or freezes `value` if none exists.
    pub fn check(
        &mut self,
        fingerprint: &str,
        experiment: &str,
        name: &str,
        value: f64,
        band: f64,
        kind: BandKind,
    ) -> Verdict {
        let k = key(fingerprint, experiment, name);
        let (frozen, provenance) = match self.entries.get(&k) {
            Some(f) => (f.clone(), Provenance::Frozen),
            None => {
                let f = FrozenConstant { value, band, kind };
                self.entries.insert(k, f.clone());
                self.dirty = true;
                (f, Provenance::Measured)
            }
        };
        let pass = value.is_finite()
            && match frozen.kind {
                BandKind::Relative => (value - frozen.value).abs() <= frozen.band * frozen.value.abs(),
                BandKind::Upper => value <= frozen.value * (1.0 + frozen.band),
            };
        Verdict {
            name: format!("{experiment}/{name}"),
            value,
            reference: frozen.value,
            tolerance: frozen.band,
            kind: frozen.kind,
            provenance,
            pass,
        }
    }

    /// Writes new entries back to the bound file, if any.
    pub fn save(&mut self) -> Result<()> {
        if let (Some(path), true) = (&self.path, self.dirty) {
            std::fs::write(path, serde_json::to_string_pretty(self)?)?;
            self.dirty = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freeze_then_compare() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        let mut s = RegressionStore::open(&path).unwrap();
        let v = s.check("fp", "exp", "c", 2.0, 0.3, BandKind::Relative);
        assert_eq!(v.provenance, Provenance::Measured);
        assert!(v.pass);
        s.save().unwrap();
        let mut s = RegressionStore::open(&path).unwrap();
        assert_eq!(s.len(), 1);
        let ok = s.check("fp", "exp", "c", 2.5, 0.3, BandKind::Relative);
        assert!(ok.pass && ok.provenance == Provenance::Frozen);
        assert!(!s.check("fp", "exp", "c", 2.7, 0.3, BandKind::Relative).pass);
        let mut u = RegressionStore::in_memory();
        u.check("fp", "e", "max", 1.0, 0.3, BandKind::Upper);
        assert!(u.check("fp", "e", "max", 0.1, 0.3, BandKind::Upper).pass);
        assert!(!u.check("fp", "e", "max", 1.31, 0.3, BandKind::Upper).pass);
        assert!(!u.check("fp", "e", "max", f64::NAN, 0.3, BandKind::Upper).pass);
    }
}
