use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CellSpec, MetricMeasureComplex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexKind {
    Path,
    Cycle,
    TorusGrid,
    SphereTriangulation,
    Dumbbell,
}

impl FromStr for ComplexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(Self::Path),
            "cycle" => Ok(Self::Cycle),
            "torus_grid" | "torus" => Ok(Self::TorusGrid),
            "sphere_triangulation" | "sphere" => Ok(Self::SphereTriangulation),
            "dumbbell" => Ok(Self::Dumbbell),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Path => "path",
            Self::Cycle => "cycle",
            Self::TorusGrid => "torus_grid",
            Self::SphereTriangulation => "sphere_triangulation",
            Self::Dumbbell => "dumbbell",
        };
        f.write_str(s)
    }
}

/// Generator parameters.
///
/// Sizes per kind: `path [n]`, `cycle [n]`, `torus_grid [w, h]` (or `[w]` for
/// a square grid), `sphere_triangulation [subdivisions]`,
/// `dumbbell [patch, tube]`. With `randomize` the vertex measures and cell
/// weights are drawn uniformly from `[0.5, 2]` using `seed`; otherwise all
/// data is unit and the seed is unused.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: ComplexKind,
    pub size: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub randomize: bool,
}

impl GeneratorSpec {
    pub fn new(kind: ComplexKind, size: Vec<usize>) -> Self {
        Self { kind, size, seed: 0, randomize: false }
    }

    pub fn randomized(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.randomize = true;
        self
    }
}

struct Skeleton {
    n: usize,
    dimension: usize,
    edges: Vec<(usize, usize, f64)>,
    triangles: Vec<[usize; 3]>,
}

pub fn generate_complex(spec: &GeneratorSpec) -> Result<MetricMeasureComplex> {
    let size = |i: usize, what: &str| -> Result<usize> {
        spec.size
            .get(i)
            .copied()
            .filter(|&s| s > 0)
            .ok_or_else(|| Error::SizeTooSmall(format!("{} requires a positive {what}", spec.kind)))
    };
    let skeleton = match spec.kind {
        ComplexKind::Path => {
            let n = size(0, "vertex count")?;
            if n < 2 {
                return Err(Error::SizeTooSmall("path needs at least 2 vertices".into()));
            }
            Skeleton { n, dimension: 1, edges: (0..n - 1).map(|i| (i, i + 1, 1.0)).collect(), triangles: vec![] }
        }
        ComplexKind::Cycle => {
            let n = size(0, "vertex count")?;
            if n < 3 {
                return Err(Error::SizeTooSmall("cycle needs at least 3 vertices".into()));
            }
            Skeleton { n, dimension: 1, edges: (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect(), triangles: vec![] }
        }
        ComplexKind::TorusGrid => {
            let w = size(0, "width")?;
            let h = spec.size.get(1).copied().unwrap_or(w);
            if w < 3 || h < 3 {
                return Err(Error::SizeTooSmall("torus_grid needs at least 3x3 vertices to triangulate".into()));
            }
            torus(w, h)
        }
        ComplexKind::SphereTriangulation => sphere(spec.size.first().copied().unwrap_or(0)),
        ComplexKind::Dumbbell => {
            let patch = size(0, "patch size")?;
            let tube = size(1, "tube length")?;
            if patch < 2 {
                return Err(Error::SizeTooSmall("dumbbell patch must be at least 2x2".into()));
            }
            dumbbell(patch, tube)
        }
    };
    build(skeleton, spec)
}

fn build(s: Skeleton, spec: &GeneratorSpec) -> Result<MetricMeasureComplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |rand: bool| if rand { rng.gen_range(0.5..2.0) } else { 1.0 };
    let names = (0..s.n).map(|i| format!("v{i}")).collect();
    let measure = (0..s.n).map(|_| draw(spec.randomize)).collect();
    let edges = s
        .edges
        .iter()
        .map(|&(a, b, len)| CellSpec::new(vec![a, b]).with_length(len).with_weight(draw(spec.randomize)))
        .collect();
    let mut higher = vec![edges];
    if s.dimension >= 2 {
        higher.push(s.triangles.iter().map(|t| CellSpec::new(t.to_vec()).with_weight(draw(spec.randomize))).collect());
    }
    MetricMeasureComplex::new(names, measure, s.dimension, higher, None)
}

/// Length of the triangulating diagonals: their l1 length, so the
/// triangulation leaves the lattice metric unchanged. Shorter diagonals
/// make `V(x, 2) / V(x, 1) = 7` and push the doubling exponent to log2(7).
pub const DIAGONAL_LENGTH: f64 = 2.0;

/// Periodic grid, each square split along its diagonal into two triangles.
fn torus(w: usize, h: usize) -> Skeleton {
    let id = |i: usize, j: usize| (j % h) * w + (i % w);
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..h {
        for i in 0..w {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            edges.push((a, b, 1.0));
            edges.push((a, c, 1.0));
            edges.push((a, d, DIAGONAL_LENGTH));
            triangles.push([a, b, d]);
            triangles.push([a, c, d]);
        }
    }
    Skeleton { n: w * h, dimension: 2, edges, triangles }
}

/// Planar `p x p` grid patch with vertex offset, triangulated like [`torus`].
fn patch(p: usize, offset: usize, edges: &mut Vec<(usize, usize, f64)>, triangles: &mut Vec<[usize; 3]>) {
    let id = |i: usize, j: usize| offset + j * p + i;
    for j in 0..p {
        for i in 0..p {
            if i + 1 < p {
                edges.push((id(i, j), id(i + 1, j), 1.0));
            }
            if j + 1 < p {
                edges.push((id(i, j), id(i, j + 1), 1.0));
            }
            if i + 1 < p && j + 1 < p {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
                edges.push((a, d, DIAGONAL_LENGTH));
                triangles.push([a, b, d]);
                triangles.push([a, c, d]);
            }
        }
    }
}

/// Two grid patches glued by a path of `tube` unit edges between facing corners.
fn dumbbell(p: usize, tube: usize) -> Skeleton {
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    patch(p, 0, &mut edges, &mut triangles);
    patch(p, p * p, &mut edges, &mut triangles);
    let start = p * p - 1;
    let end = p * p;
    let interior = tube - 1;
    let first_tube = 2 * p * p;
    let mut prev = start;
    for k in 0..interior {
        edges.push((prev, first_tube + k, 1.0));
        prev = first_tube + k;
    }
    edges.push((prev, end, 1.0));
    Skeleton { n: 2 * p * p + interior, dimension: 2, edges, triangles }
}

/// Octahedron refined `levels` times by midpoint subdivision.
fn sphere(levels: usize) -> Skeleton {
    let mut n = 6;
    let mut tris: Vec<[usize; 3]> =
        vec![[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
    for _ in 0..levels {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, n: &mut usize| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                *n += 1;
                *n - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut n);
            let bc = mid(b, c, &mut n);
            let ca = mid(c, a, &mut n);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        tris = next;
    }
    let mut edge_set = std::collections::BTreeSet::new();
    for t in &tris {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            edge_set.insert((a.min(b), a.max(b)));
        }
    }
    Skeleton { n, dimension: 2, edges: edge_set.into_iter().map(|(a, b)| (a, b, 1.0)).collect(), triangles: tris }
}
