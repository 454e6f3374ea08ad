//! Exterior derivative, codifferential, Hodge–Dirac operator and Hodge
//! Laplacian on graded cochains.

mod form;
mod hodge;
pub mod io;
mod sparse;

pub use form::{GradedForm, GradedSpace};
pub use hodge::{hodge_decompose, HodgeDecomposition};
pub use sparse::CsrMatrix;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::complex::MetricMeasureComplex;

/// One block `degree from -> degree to` of a graded operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBlock {
    pub from: usize,
    pub to: usize,
    pub matrix: CsrMatrix,
}

/// Sparse operator on graded cochains, stored blockwise by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedOperator {
    dims: Vec<usize>,
    blocks: Vec<OperatorBlock>,
    self_adjoint: bool,
}

impl GradedOperator {
    pub fn new(dims: Vec<usize>, blocks: Vec<OperatorBlock>, self_adjoint: bool) -> Self {
        for b in &blocks {
            assert_eq!(b.matrix.nrows(), dims[b.to]);
            assert_eq!(b.matrix.ncols(), dims[b.from]);
        }
        Self { dims, blocks, self_adjoint }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn blocks(&self) -> &[OperatorBlock] {
        &self.blocks
    }

    /// Whether the operator is self-adjoint for the weighted inner product.
    pub fn is_self_adjoint(&self) -> bool {
        self.self_adjoint
    }

    pub fn block(&self, from: usize, to: usize) -> Option<&CsrMatrix> {
        self.blocks.iter().find(|b| b.from == from && b.to == to).map(|b| &b.matrix)
    }

    pub fn apply(&self, f: &GradedForm) -> GradedForm {
        assert_eq!(f.dims(), self.dims.as_slice(), "form and operator live on different complexes");
        let mut out = GradedForm::zeros(&self.dims);
        for b in &self.blocks {
            let src = f.degree(b.from).to_vec();
            b.matrix.mul_add_into(&src, out.degree_mut(b.to));
        }
        out
    }

    pub fn apply_n(&self, f: &GradedForm, n: u32) -> GradedForm {
        (0..n).fold(f.clone(), |acc, _| self.apply(&acc))
    }

    /// Blockwise composition `self ∘ other`.
    pub fn compose(&self, other: &GradedOperator) -> GradedOperator {
        let mut blocks: Vec<OperatorBlock> = Vec::new();
        for b in &other.blocks {
            for a in self.blocks.iter().filter(|a| a.from == b.to) {
                let product = a.matrix.matmul(&b.matrix);
                match blocks.iter_mut().find(|x| x.from == b.from && x.to == a.to) {
                    Some(existing) => existing.matrix = existing.matrix.add(&product),
                    None => blocks.push(OperatorBlock { from: b.from, to: a.to, matrix: product }),
                }
            }
        }
        blocks.sort_by_key(|b| (b.from, b.to));
        GradedOperator::new(self.dims.clone(), blocks, self.self_adjoint && other.self_adjoint)
    }

    pub fn sum(&self, other: &GradedOperator, self_adjoint: bool) -> GradedOperator {
        let mut blocks = self.blocks.clone();
        for b in &other.blocks {
            match blocks.iter_mut().find(|x| x.from == b.from && x.to == b.to) {
                Some(existing) => existing.matrix = existing.matrix.add(&b.matrix),
                None => blocks.push(b.clone()),
            }
        }
        blocks.sort_by_key(|b| (b.from, b.to));
        GradedOperator::new(self.dims.clone(), blocks, self_adjoint)
    }

    /// Dense matrix on the full graded space (degree-major ordering).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let offsets = form::offsets(&self.dims);
        let total = *offsets.last().unwrap();
        let mut m = DMatrix::zeros(total, total);
        for b in &self.blocks {
            for (i, j, v) in b.matrix.triplets() {
                m[(offsets[b.to] + i, offsets[b.from] + j)] += v;
            }
        }
        m
    }
}

/// Signed incidence coboundary: `(d f)(σ) = Σ_i (-1)^i f(σ without its i-th vertex)`,
/// with cells stored as sorted vertex tuples.
pub fn assemble_exterior_derivative(x: &MetricMeasureComplex) -> GradedOperator {
    let dims = form::dims_of(x);
    let mut blocks = Vec::new();
    for k in 0..x.dimension() {
        let mut triplets = Vec::new();
        for (row, cell) in x.cells(k + 1).iter().enumerate() {
            for skip in 0..cell.vertices.len() {
                let face: Vec<usize> =
                    cell.vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                let col = x.cell_position(k, &face).expect("faces are validated when the complex is built");
                let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
                triplets.push((row, col, sign));
            }
        }
        blocks.push(OperatorBlock {
            from: k,
            to: k + 1,
            matrix: CsrMatrix::from_triplets(dims[k + 1], dims[k], triplets),
        });
    }
    GradedOperator::new(dims, blocks, false)
}

/// Weighted adjoint of `d`: blockwise `M_k^{-1} d^T M_{k+1}`.
pub fn assemble_codifferential(x: &MetricMeasureComplex, d: &GradedOperator) -> GradedOperator {
    let space = GradedSpace::new(x);
    let blocks = d
        .blocks()
        .iter()
        .map(|b| {
            let inv: Vec<f64> = space.degree_weights(b.from).iter().map(|w| 1.0 / w).collect();
            OperatorBlock {
                from: b.to,
                to: b.from,
                matrix: b.matrix.transpose().scaled(&inv, space.degree_weights(b.to)),
            }
        })
        .collect();
    GradedOperator::new(d.dims().to_vec(), blocks, false)
}

/// `D = d + d*`.
pub fn assemble_dirac(x: &MetricMeasureComplex) -> GradedOperator {
    let d = assemble_exterior_derivative(x);
    let dstar = assemble_codifferential(x, &d);
    d.sum(&dstar, true)
}

/// `Δ = D² = d d* + d* d`, block diagonal in degree.
pub fn assemble_laplacian(x: &MetricMeasureComplex) -> GradedOperator {
    let d = assemble_exterior_derivative(x);
    let dstar = assemble_codifferential(x, &d);
    let mut lap = dstar.compose(&d).sum(&d.compose(&dstar), true);
    lap.self_adjoint = true;
    lap
}

/// All assembled operators of a complex, with the graded inner-product space.
#[derive(Clone, Debug)]
pub struct HodgeOperators {
    pub space: GradedSpace,
    pub d: GradedOperator,
    pub dstar: GradedOperator,
    pub dirac: GradedOperator,
    pub laplacian: GradedOperator,
}

impl HodgeOperators {
    pub fn new(x: &MetricMeasureComplex) -> Self {
        let space = GradedSpace::new(x);
        let d = assemble_exterior_derivative(x);
        let dstar = assemble_codifferential(x, &d);
        let dirac = d.sum(&dstar, true);
        let mut laplacian = dstar.compose(&d).sum(&d.compose(&dstar), true);
        laplacian.self_adjoint = true;
        Self { space, d, dstar, dirac, laplacian }
    }

    /// `M^{1/2} D M^{-1/2}`: the Dirac operator in Euclidean coordinates,
    /// exactly symmetric.
    pub fn symmetric_dirac(&self) -> DMatrix<f64> {
        let sqrt_w = self.space.sqrt_weights();
        let mut m = DMatrix::zeros(sqrt_w.len(), sqrt_w.len());
        let offsets = self.space.offsets();
        for b in self.d.blocks() {
            for (i, j, v) in b.matrix.triplets() {
                let (r, c) = (offsets[b.to] + i, offsets[b.from] + j);
                let entry = v * sqrt_w[r] / sqrt_w[c];
                m[(r, c)] = entry;
                m[(c, r)] = entry;
            }
        }
        m
    }

    pub fn apply_dirac_power(&self, f: &GradedForm, n: u32) -> GradedForm {
        self.dirac.apply_n(f, n)
    }
}

/// Zero complex scalar.
pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;
    use crate::complex::{generate_complex, ComplexKind, GeneratorSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_form(space: &GradedSpace, rng: &mut ChaCha8Rng) -> GradedForm {
        let mut f = space.zeros();
        for v in f.values_mut() {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        f
    }

    #[test]
    fn p2_incidence() {
        let d = assemble_exterior_derivative(&p2());
        let d0 = d.block(0, 1).unwrap().to_dense();
        assert_eq!(d0.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn c4_rows_have_two_entries_summing_to_zero() {
        let d = assemble_exterior_derivative(&cycle(4));
        let d0 = d.block(0, 1).unwrap();
        for i in 0..d0.nrows() {
            let row: Vec<f64> = d0.row(i).map(|p| p.1).collect();
            assert_eq!(row.len(), 2);
            assert_eq!(row.iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn d_squared_vanishes_on_torus() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 4])).unwrap();
        let d = assemble_exterior_derivative(&x);
        let dd = d.block(1, 2).unwrap().matmul(d.block(0, 1).unwrap());
        assert_eq!(dd.nnz(), 0);
        let dense = d.block(1, 2).unwrap().to_dense() * d.block(0, 1).unwrap().to_dense();
        assert!(dense.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn codifferential_unit_and_weighted() {
        let x = p2();
        let d = assemble_exterior_derivative(&x);
        let ds = assemble_codifferential(&x, &d);
        assert_eq!(ds.block(1, 0).unwrap().to_dense().as_slice(), &[-1.0, 1.0]);

        let weighted = MetricMeasureComplex::new(
            names(2),
            vec![2.0, 2.0],
            1,
            vec![vec![crate::complex::CellSpec::new(vec![0, 1])]],
            None,
        )
        .unwrap();
        let d = assemble_exterior_derivative(&weighted);
        let ds = assemble_codifferential(&weighted, &d);
        assert_eq!(ds.block(1, 0).unwrap().to_dense().as_slice(), &[-0.5, 0.5]);
    }

    #[test]
    fn adjointness_on_random_complex() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 5]).randomized(3)).unwrap();
        let ops = HodgeOperators::new(&x);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = random_form(&ops.space, &mut rng);
            let g = random_form(&ops.space, &mut rng);
            let lhs = ops.space.inner(&ops.d.apply(&f), &g);
            let rhs = ops.space.inner(&f, &ops.dstar.apply(&g));
            assert!((lhs - rhs).norm() <= 1e-12 * ops.space.norm(&f) * ops.space.norm(&g));
            let lhs = ops.space.inner(&ops.dirac.apply(&f), &g);
            let rhs = ops.space.inner(&f, &ops.dirac.apply(&g));
            assert!((lhs - rhs).norm() <= 1e-12 * ops.space.norm(&f) * ops.space.norm(&g));
        }
    }

    #[test]
    fn laplacian_is_dirac_squared() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::SphereTriangulation, vec![1]).randomized(9)).unwrap();
        let ops = HodgeOperators::new(&x);
        let dd = ops.dirac.to_dense() * ops.dirac.to_dense();
        let lap = ops.laplacian.to_dense();
        assert!((dd - &lap).abs().max() < 1e-12);
        // block diagonal
        for b in ops.laplacian.blocks() {
            assert_eq!(b.from, b.to);
        }
        assert!(ops.laplacian.is_self_adjoint() && ops.dirac.is_self_adjoint());
    }

    #[test]
    fn p2_laplacian() {
        let ops = HodgeOperators::new(&p2());
        let l0 = ops.laplacian.block(0, 0).unwrap().to_dense();
        assert_eq!(l0.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn symmetric_dirac_is_similar_to_dirac() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::Cycle, vec![6]).randomized(5)).unwrap();
        let ops = HodgeOperators::new(&x);
        let s = ops.symmetric_dirac();
        assert_eq!(s, s.transpose());
        let sw = ops.space.sqrt_weights();
        let dense = ops.dirac.to_dense();
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                assert!((s[(i, j)] - sw[i] * dense[(i, j)] / sw[j]).abs() < 1e-14);
            }
        }
    }
}
