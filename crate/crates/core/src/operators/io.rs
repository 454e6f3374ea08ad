//! JSON form files: `{"degree_0": [1.0, [0.5, -1.0], ...], "degree_1": [...]}`.
//! Entries are real numbers or `[re, im]` pairs; absent degrees are zero.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GradedForm;
use crate::error::{Error, Result};

/// A real or complex scalar as written in JSON files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Scalar> for Complex64 {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Real(v) => Complex64::new(v, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for Scalar {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            Scalar::Real(c.re)
        } else {
            Scalar::Complex([c.re, c.im])
        }
    }
}

pub(crate) fn degree_of_key(key: &str, dims: &[usize]) -> Result<usize> {
    let k: usize = key
        .strip_prefix("degree_")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Schema(format!("expected `degree_<k>` key, got `{key}`")))?;
    if k >= dims.len() {
        return Err(Error::ShapeMismatch(format!("degree {k} exceeds complex dimension {}", dims.len() - 1)));
    }
    Ok(k)
}

pub(crate) fn finite(c: Complex64) -> Result<Complex64> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(c)
    } else {
        Err(Error::Schema("non-finite coefficient".into()))
    }
}

/// Parses a form for a complex with the given per-degree cell counts.
pub fn parse_form(text: &str, dims: &[usize]) -> Result<GradedForm> {
    let raw: BTreeMap<String, Vec<Scalar>> = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut f = GradedForm::zeros(dims);
    for (key, entries) in raw {
        let k = degree_of_key(&key, dims)?;
        if entries.len() != dims[k] {
            return Err(Error::ShapeMismatch(format!(
                "{key} has {} entries, the complex has {} cells of degree {k}",
                entries.len(),
                dims[k]
            )));
        }
        for (dst, s) in f.degree_mut(k).iter_mut().zip(entries) {
            *dst = finite(s.into())?;
        }
    }
    Ok(f)
}

pub fn form_to_json(f: &GradedForm) -> Result<String> {
    let map: BTreeMap<String, Vec<Scalar>> =
        (0..f.dims().len()).map(|k| (format!("degree_{k}"), f.degree(k).iter().map(|&c| c.into()).collect())).collect();
    Ok(serde_json::to_string_pretty(&map)?)
}

pub fn load_form(path: impl AsRef<Path>, dims: &[usize]) -> Result<GradedForm> {
    parse_form(&std::fs::read_to_string(path)?, dims)
}

pub fn save_form(f: &GradedForm, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, form_to_json(f)?)?;
    Ok(())
}
