//! JSON complex files.
//!
//! ```json
//! { "dimension": 1,
//!   "vertices": [{"id": "u", "measure": 1.0}, {"id": "v", "measure": 1.0}],
//!   "cells": {"1": [{"verts": ["u", "v"], "weight": 1.0, "length": 1.0}]},
//!   "distances": [[0, 1], [1, 0]] }
//! ```
//! `verts` entries may be vertex ids or integer indices; `weight` and
//! `length` default to 1 and `distances` is optional.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CellSpec, MetricMeasureComplex};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    pub dimension: usize,
    pub vertices: Vec<VertexEntry>,
    #[serde(default)]
    pub cells: BTreeMap<String, Vec<CellEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub measure: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Index(usize),
    Id(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellEntry {
    pub verts: Vec<VertexRef>,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl ComplexFile {
    pub fn into_complex(self) -> Result<MetricMeasureComplex> {
        let names: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let measure = self.vertices.iter().map(|v| v.measure).collect();
        let lookup: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut higher: Vec<Vec<CellSpec>> = vec![Vec::new(); self.dimension];
        for (key, entries) in &self.cells {
            let k: usize =
                key.parse().map_err(|_| Error::Schema(format!("cell degree key `{key}` is not an integer")))?;
            if k == 0 {
                return Err(Error::Schema("0-cells are the vertices; list them under `vertices`".into()));
            }
            if k > self.dimension {
                return Err(Error::Schema(format!("cells of degree {k} exceed dimension {}", self.dimension)));
            }
            for entry in entries {
                let vertices = entry
                    .verts
                    .iter()
                    .map(|r| match r {
                        VertexRef::Index(i) if *i < names.len() => Ok(*i),
                        VertexRef::Index(i) => Err(Error::UnknownVertex(format!("#{i}"))),
                        VertexRef::Id(id) => {
                            lookup.get(id.as_str()).copied().ok_or_else(|| Error::UnknownVertex(id.clone()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if k != 1 && entry.length.is_some() {
                    return Err(Error::Schema(format!("`length` given on a {k}-cell")));
                }
                higher[k - 1].push(CellSpec { vertices, weight: entry.weight, length: entry.length });
            }
        }
        MetricMeasureComplex::new(names, measure, self.dimension, higher, self.distances)
    }

    pub fn from_complex(x: &MetricMeasureComplex) -> Self {
        let vertices = (0..x.num_vertices())
            .map(|i| VertexEntry { id: x.vertex_name(i).to_string(), measure: x.measure(i) })
            .collect();
        let mut cells = BTreeMap::new();
        for k in 1..=x.dimension() {
            let entries = x
                .cells(k)
                .iter()
                .enumerate()
                .map(|(i, c)| CellEntry {
                    verts: c.vertices.iter().map(|&v| VertexRef::Id(x.vertex_name(v).to_string())).collect(),
                    weight: c.weight,
                    length: (k == 1).then(|| x.edge_lengths()[i]),
                })
                .collect();
            cells.insert(k.to_string(), entries);
        }
        Self { dimension: x.dimension(), vertices, cells, distances: None }
    }
}

/// Parses and validates a complex from JSON text.
pub fn parse_complex(text: &str) -> Result<MetricMeasureComplex> {
    let file: ComplexFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    file.into_complex()
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<MetricMeasureComplex> {
    parse_complex(&std::fs::read_to_string(path)?)
}

pub fn complex_to_json(x: &MetricMeasureComplex) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ComplexFile::from_complex(x))?)
}

pub fn save_complex(x: &MetricMeasureComplex, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, complex_to_json(x)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P2: &str = r#"{"dimension": 1,
        "vertices": [{"id": "u", "measure": 1.0}, {"id": "v", "measure": 1.0}],
        "cells": {"1": [{"verts": ["u", "v"], "weight": 1.0, "length": 1.0}]}}"#;

    #[test]
    fn loads_p2() {
        let x = parse_complex(P2).unwrap();
        assert_eq!(x.distance(0, 1), 1.0);
        assert_eq!(x.measures(), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_zero_measure() {
        let text = P2.replacen("\"measure\": 1.0", "\"measure\": 0", 1);
        let err = parse_complex(&text).unwrap_err();
        assert!(err.to_string().contains("non-positive measure"), "{err}");
    }

    #[test]
    fn rejects_schema_violations() {
        assert!(matches!(parse_complex("{}"), Err(Error::Schema(_))));
        assert!(matches!(parse_complex(r#"{"dimension": 0, "vertices": [], "extra": 1}"#), Err(Error::Schema(_))));
        let bad_key = P2.replace("\"1\":", "\"one\":");
        assert!(matches!(parse_complex(&bad_key), Err(Error::Schema(_))));
        let unknown = P2.replace("[\"u\", \"v\"]", "[\"u\", \"w\"]");
        assert!(matches!(parse_complex(&unknown), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn explicit_distances_are_used_and_validated() {
        let text = r#"{"dimension": 0,
            "vertices": [{"id": "a", "measure": 1}, {"id": "b", "measure": 2}],
            "distances": [[0, 3.5], [3.5, 0]]}"#;
        let x = parse_complex(text).unwrap();
        assert_eq!(x.distance(0, 1), 3.5);
        let bad = text.replace("[3.5, 0]", "[3.0, 0]");
        assert!(matches!(parse_complex(&bad), Err(Error::NotAMetric(_))));
    }

    #[test]
    fn roundtrip_through_json() {
        let x = super::super::fixtures::cycle(5);
        let back = parse_complex(&complex_to_json(&x).unwrap()).unwrap();
        assert_eq!(x.fingerprint(), back.fingerprint());
    }
}
