use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::ZERO;
use crate::complex::MetricMeasureComplex;

pub(crate) fn dims_of(x: &MetricMeasureComplex) -> Vec<usize> {
    (0..=x.dimension()).map(|k| x.num_cells(k)).collect()
}

pub(crate) fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(dims.len() + 1);
    out.push(0);
    for d in dims {
        out.push(out.last().unwrap() + d);
    }
    out
}

/// A degree-graded cochain: one complex coefficient per cell, all degrees
/// stored contiguously in degree-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedForm {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<Complex64>,
}

impl GradedForm {
    pub fn zeros(dims: &[usize]) -> Self {
        let offsets = offsets(dims);
        let total = *offsets.last().unwrap();
        Self { dims: dims.to_vec(), offsets, values: vec![ZERO; total] }
    }

    pub fn from_values(dims: &[usize], values: Vec<Complex64>) -> Self {
        let offsets = offsets(dims);
        assert_eq!(*offsets.last().unwrap(), values.len(), "value count does not match layout");
        Self { dims: dims.to_vec(), offsets, values }
    }

    pub fn from_real(dims: &[usize], values: &[f64]) -> Self {
        Self::from_values(dims, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// A form supported in a single degree.
    pub fn in_degree(dims: &[usize], k: usize, values: &[f64]) -> Self {
        let mut f = Self::zeros(dims);
        assert_eq!(values.len(), dims[k]);
        for (dst, &v) in f.degree_mut(k).iter_mut().zip(values) {
            *dst = Complex64::new(v, 0.0);
        }
        f
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn degree(&self, k: usize) -> &[Complex64] {
        &self.values[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn degree_mut(&mut self, k: usize) -> &mut [Complex64] {
        let span = self.offsets[k]..self.offsets[k + 1];
        &mut self.values[span]
    }

    /// Degrees carrying at least one nonzero coefficient.
    pub fn degree_mask(&self) -> Vec<bool> {
        (0..self.dims.len()).map(|k| self.degree(k).iter().any(|v| *v != ZERO)).collect()
    }

    /// Keeps only degree `k`.
    pub fn restrict_to_degree(&self, k: usize) -> Self {
        let mut out = Self::zeros(&self.dims);
        out.degree_mut(k).copy_from_slice(self.degree(k));
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            offsets: self.offsets.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &GradedForm) {
        assert_eq!(self.dims, other.dims);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

impl Add for &GradedForm {
    type Output = GradedForm;

    fn add(self, rhs: &GradedForm) -> GradedForm {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), rhs);
        out
    }
}

impl Sub for &GradedForm {
    type Output = GradedForm;

    fn sub(self, rhs: &GradedForm) -> GradedForm {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), rhs);
        out
    }
}

impl Mul<f64> for &GradedForm {
    type Output = GradedForm;

    fn mul(self, rhs: f64) -> GradedForm {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Layout, inner-product weights and vertex fiber norms of the graded space.
///
/// Degree-0 weights are the vertex measure. The pointwise norm at a vertex
/// spreads the mass `w(c) |f(c)|²` of every k-cell evenly over its k + 1
/// vertices, so that `Σ_y μ(y) |f|_y² = ‖f‖²`.
#[derive(Clone, Debug)]
pub struct GradedSpace {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    weights: Vec<f64>,
    sqrt_weights: Vec<f64>,
    measure: Vec<f64>,
    cell_vertices: Vec<Vec<usize>>,
    /// Per vertex: (graded index, factor) with `|f|_y² = Σ factor |f_i|²`.
    vertex_density: Vec<Vec<(usize, f64)>>,
}

impl GradedSpace {
    pub fn new(x: &MetricMeasureComplex) -> Self {
        let dims = dims_of(x);
        let offsets = offsets(&dims);
        let mut weights = Vec::with_capacity(*offsets.last().unwrap());
        let mut cell_vertices = Vec::with_capacity(weights.capacity());
        let mut vertex_density = vec![Vec::new(); x.num_vertices()];
        for k in 0..dims.len() {
            for cell in x.cells(k) {
                let index = weights.len();
                weights.push(cell.weight);
                cell_vertices.push(cell.vertices.clone());
                for &y in &cell.vertices {
                    let factor = cell.weight / ((k + 1) as f64 * x.measure(y));
                    vertex_density[y].push((index, factor));
                }
            }
        }
        let sqrt_weights = weights.iter().map(|w| w.sqrt()).collect();
        Self { dims, offsets, weights, sqrt_weights, measure: x.measures().to_vec(), cell_vertices, vertex_density }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.measure.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    pub fn degree_weights(&self, k: usize) -> &[f64] {
        &self.weights[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    /// Vertices of the cell at a graded index.
    pub fn cell_vertices(&self, index: usize) -> &[usize] {
        &self.cell_vertices[index]
    }

    pub fn vertex_density(&self, y: usize) -> &[(usize, f64)] {
        &self.vertex_density[y]
    }

    pub fn zeros(&self) -> GradedForm {
        GradedForm::zeros(&self.dims)
    }

    /// `⟨f, g⟩ = Σ w(c) f(c) conj(g(c))`.
    pub fn inner(&self, f: &GradedForm, g: &GradedForm) -> Complex64 {
        self.inner_values(f.values(), g.values())
    }

    pub fn inner_values(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b.conj() * w).sum()
    }

    pub fn norm_sq_values(&self, f: &[Complex64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a.norm_sqr() * w).sum()
    }

    pub fn norm(&self, f: &GradedForm) -> f64 {
        self.norm_sq_values(f.values()).sqrt()
    }

    /// Squared fiber norm `|f|_y²` at every vertex.
    pub fn pointwise_sq(&self, f: &[Complex64]) -> Vec<f64> {
        self.vertex_density.iter().map(|entries| entries.iter().map(|&(i, c)| c * f[i].norm_sqr()).sum()).collect()
    }

    /// `‖f‖_1 = Σ_y μ(y) |f|_y`.
    pub fn l1_norm(&self, f: &GradedForm) -> f64 {
        self.pointwise_sq(f.values()).iter().zip(&self.measure).map(|(s, m)| m * s.sqrt()).sum()
    }

    /// `‖f‖_p = (Σ_y μ(y) |f|_y^p)^{1/p}`.
    pub fn lp_norm(&self, f: &GradedForm, p: f64) -> f64 {
        self.pointwise_sq(f.values())
            .iter()
            .zip(&self.measure)
            .map(|(s, m)| m * s.powf(p / 2.0))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `‖χ f‖_2` for a vertex cutoff χ acting on the fiber norm.
    pub fn localized_norm(&self, f: &GradedForm, cutoff: &[f64]) -> f64 {
        self.pointwise_sq(f.values())
            .iter()
            .zip(&self.measure)
            .zip(cutoff)
            .map(|((s, m), c)| m * c * c * s)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{generate_complex, ComplexKind, GeneratorSpec};

    #[test]
    fn fiber_norms_integrate_to_l2_norm() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![3, 4]).randomized(2)).unwrap();
        let space = GradedSpace::new(&x);
        let values: Vec<Complex64> =
            (0..space.total_dim()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let f = GradedForm::from_values(space.dims(), values);
        let integrated: f64 = space.pointwise_sq(f.values()).iter().zip(x.measures()).map(|(s, m)| s * m).sum();
        let norm_sq = space.norm(&f).powi(2);
        assert!((integrated - norm_sq).abs() < 1e-12 * norm_sq);
        assert!((space.localized_norm(&f, &vec![1.0; x.num_vertices()]) - space.norm(&f)).abs() < 1e-12);
    }

    #[test]
    fn zero_form_and_grading() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::Cycle, vec![5])).unwrap();
        let space = GradedSpace::new(&x);
        assert_eq!(space.norm(&space.zeros()), 0.0);
        let f0 = GradedForm::in_degree(space.dims(), 0, &[1.0, 2.0, 0.0, 0.0, 1.0]);
        let f1 = GradedForm::in_degree(space.dims(), 1, &[0.5, 0.0, 3.0, 0.0, 1.0]);
        let sum = &f0 + &f1;
        let lhs = space.norm(&sum).powi(2);
        let rhs = space.norm(&f0).powi(2) + space.norm(&f1).powi(2);
        assert!((lhs - rhs).abs() < 1e-12);
        assert_eq!(sum.degree_mask(), vec![true, true]);
        assert_eq!(space.degree_of(0), 0);
        assert_eq!(space.degree_of(5), 1);
        assert_eq!(space.degree_of(9), 1);
    }
}
