//! Finite metric measure complexes: cells, vertex measure, geodesic distance,
//! balls and volumes, doubling data and Whitney coverings.

mod doubling;
mod generate;
pub mod io;
mod whitney;

pub use doubling::{default_radius_grid, estimate_doubling, DoublingCertificate, DoublingWitness};
pub use generate::{generate_complex, ComplexKind, GeneratorSpec};
pub(crate) use whitney::whitney_from_mask;
pub use whitney::{whitney_decompose, WhitneyCover, WHITNEY_RATIO};

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Metric tolerance used when validating explicit distance matrices.
const METRIC_TOL: f64 = 1e-12;

/// A k-cell: a sorted vertex tuple with a positive inner-product weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

/// Input description of a cell of degree >= 1.
#[derive(Clone, Debug)]
pub struct CellSpec {
    pub vertices: Vec<usize>,
    pub weight: f64,
    /// Only meaningful for 1-cells; defaults to 1.
    pub length: Option<f64>,
}

impl CellSpec {
    pub fn new(vertices: Vec<usize>) -> Self {
        Self { vertices, weight: 1.0, length: None }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_length(mut self, length: f64) -> Self {
        self.length = Some(length);
        self
    }
}

/// An open geodesic ball `B(center, radius) = {y : rho(center, y) < radius}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn dilate(&self, factor: f64) -> Self {
        Self { center: self.center, radius: self.radius * factor }
    }
}

/// A finite weighted simplicial complex with vertex measure and geodesic distance.
///
/// Degree-0 weights coincide with the vertex measure. All data is immutable
/// after construction.
#[derive(Clone, Debug)]
pub struct MetricMeasureComplex {
    names: Vec<String>,
    measure: Vec<f64>,
    dimension: usize,
    cells: Vec<Vec<Cell>>,
    edge_lengths: Vec<f64>,
    distance: Vec<f64>,
    /// Per vertex: all vertices sorted by distance (ties by index), self first.
    by_distance: Vec<Vec<(f64, usize)>>,
    /// Per vertex: cumulative measure along `by_distance`, length n + 1.
    prefix_volume: Vec<Vec<f64>>,
    cell_index: Vec<HashMap<Vec<usize>, usize>>,
}

impl MetricMeasureComplex {
    /// Builds and validates a complex.
    ///
    /// `higher[k - 1]` holds the k-cells. When `distances` is `None` the
    /// geodesic distance is the weighted shortest path over 1-cells.
    pub fn new(
        names: Vec<String>,
        measure: Vec<f64>,
        dimension: usize,
        higher: Vec<Vec<CellSpec>>,
        distances: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Schema("complex has no vertices".into()));
        }
        if measure.len() != n {
            return Err(Error::Schema(format!("{} vertex names but {} measures", n, measure.len())));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate vertex id `{name}`")));
            }
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NonPositiveMeasure(names[i].clone()));
            }
        }
        if higher.iter().skip(dimension).any(|cells| !cells.is_empty()) {
            return Err(Error::Schema(format!("cells above declared dimension {dimension}")));
        }

        let mut cells: Vec<Vec<Cell>> = vec![(0..n).map(|i| Cell { vertices: vec![i], weight: measure[i] }).collect()];
        let mut cell_index: Vec<HashMap<Vec<usize>, usize>> = vec![(0..n).map(|i| (vec![i], i)).collect()];
        let mut edge_lengths = Vec::new();

        for k in 1..=dimension {
            let specs = higher.get(k - 1).cloned().unwrap_or_default();
            let mut level = Vec::with_capacity(specs.len());
            let mut index = HashMap::with_capacity(specs.len());
            for spec in specs {
                let mut verts = spec.vertices.clone();
                if verts.len() != k + 1 {
                    return Err(Error::Schema(format!("{k}-cell {:?} must have {} vertices", spec.vertices, k + 1)));
                }
                if let Some(&bad) = verts.iter().find(|&&v| v >= n) {
                    return Err(Error::Schema(format!("vertex index {bad} out of range")));
                }
                verts.sort_unstable();
                if verts.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Schema(format!("{k}-cell {:?} repeats a vertex", spec.vertices)));
                }
                if !(spec.weight > 0.0) || !spec.weight.is_finite() {
                    return Err(Error::NonPositiveWeight { degree: k, cell: verts });
                }
                if k == 1 {
                    let len = spec.length.unwrap_or(1.0);
                    if !(len > 0.0) || !len.is_finite() {
                        return Err(Error::NonPositiveLength(verts));
                    }
                    edge_lengths.push(len);
                }
                for skip in 0..=k {
                    let face: Vec<usize> =
                        verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    if !cell_index[k - 1].contains_key(&face) {
                        return Err(Error::MissingFace { degree: k, cell: verts, face });
                    }
                }
                if index.insert(verts.clone(), level.len()).is_some() {
                    return Err(Error::Schema(format!("duplicate {k}-cell {verts:?}")));
                }
                level.push(Cell { vertices: verts, weight: spec.weight });
            }
            cells.push(level);
            cell_index.push(index);
        }

        let distance = match distances {
            Some(explicit) => validate_distances(&names, explicit)?,
            None => shortest_paths(&names, &cells, &edge_lengths)?,
        };

        let mut by_distance = Vec::with_capacity(n);
        let mut prefix_volume = Vec::with_capacity(n);
        for x in 0..n {
            let mut order: Vec<(f64, usize)> = (0..n).map(|y| (distance[x * n + y], y)).collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut prefix = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for &(_, y) in &order {
                acc += measure[y];
                prefix.push(acc);
            }
            by_distance.push(order);
            prefix_volume.push(prefix);
        }

        Ok(Self { names, measure, dimension, cells, edge_lengths, distance, by_distance, prefix_volume, cell_index })
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    /// Top degree n.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Cells of degree `k` (empty slice above the dimension).
    pub fn cells(&self, k: usize) -> &[Cell] {
        self.cells.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn num_cells(&self, k: usize) -> usize {
        self.cells(k).len()
    }

    pub fn cell_position(&self, k: usize, vertices: &[usize]) -> Option<usize> {
        self.cell_index.get(k)?.get(vertices).copied()
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn min_edge_length(&self) -> Option<f64> {
        self.edge_lengths.iter().copied().reduce(f64::min)
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.distance[x * self.num_vertices() + y]
    }

    /// Vertices sorted by distance from `x`, starting with `x` itself.
    pub fn by_distance(&self, x: usize) -> &[(f64, usize)] {
        &self.by_distance[x]
    }

    pub fn diameter(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn eccentricity(&self, x: usize) -> f64 {
        self.by_distance[x].last().map_or(0.0, |p| p.0)
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{x}")))
        }
    }

    /// Number of vertices in the open ball, i.e. the length of its prefix in
    /// [`Self::by_distance`].
    pub fn ball_len(&self, x: usize, r: f64) -> usize {
        self.by_distance[x].partition_point(|&(d, _)| d < r)
    }

    /// The open ball `{y : rho(x, y) < r}` in order of increasing distance.
    pub fn ball(&self, x: usize, r: f64) -> Result<Vec<usize>> {
        self.check_vertex(x)?;
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        let len = self.ball_len(x, r);
        Ok(self.by_distance[x][..len].iter().map(|p| p.1).collect())
    }

    /// `V(x, r)`: measure of the open ball. Total for any `r`, zero for `r <= 0`.
    pub fn volume_unchecked(&self, x: usize, r: f64) -> f64 {
        self.prefix_volume[x][self.ball_len(x, r)]
    }

    pub fn volume(&self, x: usize, r: f64) -> Result<f64> {
        self.check_vertex(x)?;
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(self.volume_unchecked(x, r))
    }

    pub fn ball_volume(&self, ball: &Ball) -> f64 {
        self.volume_unchecked(ball.center, ball.radius)
    }

    pub fn in_ball(&self, ball: &Ball, y: usize) -> bool {
        self.distance(ball.center, y) < ball.radius
    }

    /// Distance from `x` to the complement of `set` (infinite if the
    /// complement is empty).
    pub fn distance_to_complement(&self, x: usize, in_set: &[bool]) -> f64 {
        self.by_distance[x].iter().find(|&&(_, y)| !in_set[y]).map_or(f64::INFINITY, |p| p.0)
    }

    /// Stable content hash used to key regression constants.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (name, m) in self.names.iter().zip(&self.measure) {
            hasher.update(name.as_bytes());
            hasher.update(m.to_le_bytes());
        }
        for (k, level) in self.cells.iter().enumerate() {
            hasher.update((k as u64).to_le_bytes());
            for c in level {
                for v in &c.vertices {
                    hasher.update((*v as u64).to_le_bytes());
                }
                hasher.update(c.weight.to_le_bytes());
            }
        }
        for d in &self.distance {
            hasher.update(d.to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

fn validate_distances(names: &[String], rows: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = names.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::NotAMetric(format!("distance matrix must be {n}x{n}")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let scale = flat.iter().copied().fold(0.0, f64::max).max(1.0);
    for x in 0..n {
        if flat[x * n + x] != 0.0 {
            return Err(Error::NotAMetric(format!("rho({0},{0}) != 0", names[x])));
        }
        for y in 0..n {
            let d = flat[x * n + y];
            if !d.is_finite() {
                return Err(Error::Disconnected(names[x].clone(), names[y].clone()));
            }
            if x != y && !(d > 0.0) {
                return Err(Error::NotAMetric(format!("rho({},{}) = {d} is not positive", names[x], names[y])));
            }
            if (d - flat[y * n + x]).abs() > METRIC_TOL * scale {
                return Err(Error::NotAMetric(format!("asymmetric at ({},{})", names[x], names[y])));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if flat[x * n + z] > flat[x * n + y] + flat[y * n + z] + METRIC_TOL * scale {
                    return Err(Error::NotAMetric(format!(
                        "triangle inequality fails for ({}, {}, {})",
                        names[x], names[y], names[z]
                    )));
                }
            }
        }
    }
    Ok(flat)
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn shortest_paths(names: &[String], cells: &[Vec<Cell>], lengths: &[f64]) -> Result<Vec<f64>> {
    let n = names.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    if let Some(edges) = cells.get(1) {
        for (edge, &len) in edges.iter().zip(lengths) {
            let (a, b) = (edge.vertices[0], edge.vertices[1]);
            adjacency[a].push((b, len));
            adjacency[b].push((a, len));
        }
    }
    let mut dist = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    for source in 0..n {
        let row = &mut dist[source * n..(source + 1) * n];
        row[source] = 0.0;
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, x)) = heap.pop() {
            if d > row[x] {
                continue;
            }
            for &(y, len) in &adjacency[x] {
                let nd = d + len;
                if nd < row[y] {
                    row[y] = nd;
                    heap.push(HeapItem(nd, y));
                }
            }
        }
        if let Some(y) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected(names[source].clone(), names[y].clone()));
        }
    }
    // Symmetrize exactly: Dijkstra sums can differ in the last bit by direction.
    for x in 0..n {
        for y in (x + 1)..n {
            let d = dist[x * n + y].min(dist[y * n + x]);
            dist[x * n + y] = d;
            dist[y * n + x] = d;
        }
    }
    Ok(dist)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    /// Two vertices joined by one unit edge.
    pub fn p2() -> MetricMeasureComplex {
        MetricMeasureComplex::new(names(2), vec![1.0, 1.0], 1, vec![vec![CellSpec::new(vec![0, 1])]], None).unwrap()
    }

    pub fn cycle(n: usize) -> MetricMeasureComplex {
        generate_complex(&GeneratorSpec::new(ComplexKind::Cycle, vec![n])).unwrap()
    }

    pub fn path(n: usize) -> MetricMeasureComplex {
        generate_complex(&GeneratorSpec::new(ComplexKind::Path, vec![n])).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn p2_distance_and_measure() {
        let x = p2();
        assert_eq!(x.distance(0, 1), 1.0);
        assert_eq!(x.measures(), &[1.0, 1.0]);
        assert_eq!(x.dimension(), 1);
    }

    #[test]
    fn zero_measure_rejected() {
        let err = MetricMeasureComplex::new(names(2), vec![0.0, 1.0], 1, vec![vec![CellSpec::new(vec![0, 1])]], None)
            .unwrap_err();
        assert!(err.to_string().contains("non-positive measure"));
    }

    #[test]
    fn disconnected_rejected() {
        let err = MetricMeasureComplex::new(names(3), vec![1.0; 3], 1, vec![vec![CellSpec::new(vec![0, 1])]], None)
            .unwrap_err();
        assert!(matches!(err, Error::Disconnected(..)));
    }

    #[test]
    fn missing_face_rejected() {
        let err = MetricMeasureComplex::new(
            names(3),
            vec![1.0; 3],
            2,
            vec![vec![CellSpec::new(vec![0, 1]), CellSpec::new(vec![1, 2])], vec![CellSpec::new(vec![0, 1, 2])]],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingFace { degree: 2, .. }));
    }

    #[test]
    fn explicit_non_metric_rejected() {
        let d = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let err = MetricMeasureComplex::new(names(3), vec![1.0; 3], 0, vec![], Some(d)).unwrap_err();
        assert!(matches!(err, Error::NotAMetric(_)));
    }

    #[test]
    fn c4_opposite_vertices_at_distance_two() {
        let x = cycle(4);
        assert_eq!(x.distance(0, 2), 2.0);
        assert_eq!(x.distance(1, 3), 2.0);
    }

    #[test]
    fn balls_are_open() {
        let x = p2();
        assert_eq!(x.ball(0, 0.5).unwrap(), vec![0]);
        assert_eq!(x.volume(0, 0.5).unwrap(), 1.0);
        assert_eq!(x.ball(0, 1.0).unwrap(), vec![0]);
        assert_eq!(x.ball(0, 1.5).unwrap(), vec![0, 1]);
        assert_eq!(x.volume(0, 1.5).unwrap(), 2.0);
        assert_eq!(cycle(4).volume(0, 1.5).unwrap(), 3.0);
    }

    #[test]
    fn ball_errors() {
        let x = p2();
        assert!(matches!(x.ball(5, 1.0), Err(Error::UnknownVertex(_))));
        assert!(matches!(x.volume(0, 0.0), Err(Error::NonPositiveRadius(_))));
    }

    #[test]
    fn metric_axioms_exhaustive() {
        for x in [cycle(7), path(9), generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 5])).unwrap()]
        {
            let n = x.num_vertices();
            for a in 0..n {
                assert_eq!(x.distance(a, a), 0.0);
                for b in 0..n {
                    assert_eq!(x.distance(a, b), x.distance(b, a));
                    for c in 0..n {
                        assert!(x.distance(a, c) <= x.distance(a, b) + x.distance(b, c) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn fingerprint_is_stable_and_discriminating() {
        assert_eq!(cycle(5).fingerprint(), cycle(5).fingerprint());
        assert_ne!(cycle(5).fingerprint(), cycle(6).fingerprint());
    }
}
