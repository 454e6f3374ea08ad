use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::operators::{GradedForm, HodgeOperators};

/// Relative cutoff below which an eigenvalue of `D` counts as zero.
pub const NULL_RELATIVE_THRESHOLD: f64 = 1e-10;

/// Dense eigendecomposition of the Dirac operator.
///
/// The symmetric matrix `M^{1/2} D M^{-1/2}` is diagonalized; its unit
/// eigenvectors `v_i` give weighted-orthonormal eigenforms `v_i / sqrt(w)`.
/// Eigenvalues are sorted ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    dims: Vec<usize>,
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
    /// `vectors^T`, kept so that rows of `vectors` are contiguous.
    vectors_t: DMatrix<f64>,
    sqrt_weights: Vec<f64>,
    null_threshold: f64,
    null: Vec<bool>,
}

impl SpectralDecomposition {
    pub fn new(ops: &HodgeOperators) -> Self {
        let sym = ops.symmetric_dirac();
        let (values, basis) = jacobi_refine(&sym, SymmetricEigen::new(sym.clone()).eigenvectors);
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &basis.column(src));
        }
        let max_abs = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let null_threshold = NULL_RELATIVE_THRESHOLD * max_abs;
        let null = eigenvalues.iter().map(|l| l.abs() <= null_threshold).collect();
        Self {
            dims: ops.space.dims().to_vec(),
            eigenvalues,
            vectors_t: vectors.transpose(),
            vectors,
            sqrt_weights: ops.space.sqrt_weights().to_vec(),
            null_threshold,
            null,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Euclidean eigenvectors of the symmetrized operator, as columns.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    /// Absolute threshold `1e-10 * max |λ|`.
    pub fn null_threshold(&self) -> f64 {
        self.null_threshold
    }

    pub fn is_null(&self, i: usize) -> bool {
        self.null[i]
    }

    pub fn null_mask(&self) -> &[bool] {
        &self.null
    }

    pub fn null_dimension(&self) -> usize {
        self.null.iter().filter(|&&b| b).count()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest nonzero `|λ|`, if the operator is not identically zero.
    pub fn lambda_min_positive(&self) -> Option<f64> {
        self.eigenvalues.iter().zip(&self.null).filter(|(_, &n)| !n).map(|(l, _)| l.abs()).reduce(f64::min)
    }

    /// Weighted-orthonormal eigenform `i`.
    pub fn eigenform(&self, i: usize) -> GradedForm {
        let values =
            self.vectors.column(i).iter().zip(&self.sqrt_weights).map(|(v, s)| Complex64::new(v / s, 0.0)).collect();
        GradedForm::from_values(&self.dims, values)
    }

    /// Spectral coefficients `c_i = ⟨f, e_i⟩`.
    pub fn coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(f.len(), n, "form does not live on this complex");
        let nnz = f.iter().filter(|v| v.re != 0.0 || v.im != 0.0).count();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        if nnz * 4 < n {
            for (j, v) in f.iter().enumerate() {
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let x = v * self.sqrt_weights[j];
                for (o, e) in out.iter_mut().zip(self.vectors_t.column(j).iter()) {
                    *o += x * e;
                }
            }
            return out;
        }
        let re = DVector::from_iterator(n, f.iter().zip(&self.sqrt_weights).map(|(v, s)| v.re * s));
        let im = DVector::from_iterator(n, f.iter().zip(&self.sqrt_weights).map(|(v, s)| v.im * s));
        let cr = self.vectors.tr_mul(&re);
        let ci = self.vectors.tr_mul(&im);
        for (i, o) in out.iter_mut().enumerate() {
            *o = Complex64::new(cr[i], ci[i]);
        }
        out
    }

    /// Inverse of [`coefficients`](Self::coefficients): `Σ c_i e_i`.
    pub fn synthesize(&self, c: &[Complex64]) -> GradedForm {
        GradedForm::from_values(&self.dims, self.synthesize_values(c))
    }

    pub fn synthesize_values(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let re = DVector::from_iterator(n, c.iter().map(|v| v.re));
        let im = DVector::from_iterator(n, c.iter().map(|v| v.im));
        let xr = &self.vectors * re;
        let xi = &self.vectors * im;
        (0..n).map(|j| Complex64::new(xr[j], xi[j]) / self.sqrt_weights[j]).collect()
    }

    /// `m(D) f` for a multiplier `m(λ, is_null)` on the spectrum.
    pub fn apply_multiplier(&self, f: &GradedForm, m: impl Fn(f64, bool) -> Complex64) -> GradedForm {
        let mut c = self.coefficients(f.values());
        for (i, ci) in c.iter_mut().enumerate() {
            *ci *= m(self.eigenvalues[i], self.null[i]);
        }
        self.synthesize(&c)
    }

    /// Orthogonal projection onto `N(D)`.
    pub fn harmonic_part(&self, f: &GradedForm) -> GradedForm {
        self.apply_multiplier(f, |_, null| Complex64::new(if null { 1.0 } else { 0.0 }, 0.0))
    }

    /// Orthogonal projection onto the closure of `R(D)`.
    pub fn range_part(&self, f: &GradedForm) -> GradedForm {
        self.apply_multiplier(f, |_, null| Complex64::new(if null { 0.0 } else { 1.0 }, 0.0))
    }

    /// `m(D)` as a dense matrix in Euclidean coordinates `M^{1/2} m(D) M^{-1/2}`.
    /// Diagonal multipliers commute with the change of coordinates, so
    /// compressed block norms are the same in both pictures.
    pub fn euclidean_operator(&self, m: impl Fn(f64, bool) -> Complex64) -> DMatrix<Complex64> {
        let n = self.len();
        let diag: Vec<Complex64> = (0..n).map(|i| m(self.eigenvalues[i], self.null[i])).collect();
        let mut scaled = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for r in 0..n {
                scaled[(r, i)] = diag[i] * self.vectors[(r, i)];
            }
        }
        let vt = self.vectors_t.map(|v| Complex64::new(v, 0.0));
        scaled * vt
    }

    /// `max |D_sym - V Λ V^T|` entrywise.
    pub fn reconstruction_error(&self, ops: &HodgeOperators) -> f64 {
        let mut scaled = self.vectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[i];
        }
        let back = scaled * &self.vectors_t;
        (ops.symmetric_dirac() - back).amax()
    }

    /// `max |V^T V - I|` entrywise, i.e. weighted orthonormality of eigenforms.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.len();
        (&self.vectors_t * &self.vectors - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Cyclic Jacobi sweeps on `V^T A V`, starting from an approximate
/// eigenbasis `V`.
///
/// nalgebra's implicit QR can stop with residuals near `1e-9` when the
/// spectrum has many repeated pairs (cycles, for instance). The basis it
/// returns is still orthonormal, so a few rotations finish the job.
fn jacobi_refine(a: &DMatrix<f64>, mut v: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut b = v.transpose() * a * &v;
    b = (&b + b.transpose()) * 0.5;
    let skip = 4.0 * f64::EPSILON * b.amax().max(f64::MIN_POSITIVE);
    for _ in 0..30 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let bpq = b[(p, q)];
                if bpq.abs() <= skip {
                    continue;
                }
                rotated = true;
                let tau = (b[(q, q)] - b[(p, p)]) / (2.0 * bpq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (b[(k, p)], b[(k, q)]);
                    b[(k, p)] = c * kp - s * kq;
                    b[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (b[(p, k)], b[(q, k)]);
                    b[(p, k)] = c * pk - s * qk;
                    b[(q, k)] = s * pk + c * qk;
                }
                for k in 0..n {
                    let (kp, kq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * kp - s * kq;
                    v[(k, q)] = s * kp + c * kq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    ((0..n).map(|i| b[(i, i)]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;
    use crate::complex::{generate_complex, ComplexKind, GeneratorSpec};

    #[test]
    fn p2_dirac_spectrum() {
        let ops = HodgeOperators::new(&p2());
        let s = SpectralDecomposition::new(&ops);
        let r2 = 2f64.sqrt();
        for (got, want) in s.eigenvalues().iter().zip([-r2, 0.0, r2]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(s.null_dimension(), 1);
        assert!((s.lambda_min_positive().unwrap() - r2).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 3]).randomized(5)).unwrap();
        let ops = HodgeOperators::new(&x);
        let s = SpectralDecomposition::new(&ops);
        assert!(s.reconstruction_error(&ops) <= 1e-10 * s.lambda_max());
        assert!(s.orthonormality_error() < 1e-12);
        for i in [0, 7, s.len() - 1] {
            let e = s.eigenform(i);
            assert!((ops.space.norm(&e) - 1.0).abs() < 1e-12);
            let de = ops.dirac.apply(&e);
            let diff = &de - &e.scale(Complex64::new(s.eigenvalues()[i], 0.0));
            assert!(ops.space.norm(&diff) < 1e-10);
        }
    }

    #[test]
    fn repeated_pairs_reach_roundoff() {
        for n in [8, 16, 17, 32] {
            let ops = HodgeOperators::new(&cycle(n));
            let s = SpectralDecomposition::new(&ops);
            assert!(s.reconstruction_error(&ops) < 1e-13, "C{n}: {:e}", s.reconstruction_error(&ops));
            assert!(s.orthonormality_error() < 1e-13);
        }
    }

    #[test]
    fn coefficient_roundtrip_dense_and_sparse() {
        let x = cycle(6);
        let ops = HodgeOperators::new(&x);
        let s = SpectralDecomposition::new(&ops);
        let mut sparse = ops.space.zeros();
        sparse.values_mut()[2] = Complex64::new(1.0, -2.0);
        let dense =
            GradedForm::from_values(ops.space.dims(), (0..s.len()).map(|i| Complex64::new(i as f64, 1.0)).collect());
        for f in [sparse, dense] {
            let back = s.synthesize(&s.coefficients(f.values()));
            assert!(ops.space.norm(&(&back - &f)) < 1e-12);
        }
    }

    #[test]
    fn euclidean_operator_is_conjugate_of_weighted() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::Path, vec![5]).randomized(1)).unwrap();
        let ops = HodgeOperators::new(&x);
        let s = SpectralDecomposition::new(&ops);
        let m = s.euclidean_operator(|l, _| Complex64::new(l, 0.0));
        let sym = ops.symmetric_dirac();
        for i in 0..s.len() {
            for j in 0..s.len() {
                assert!((m[(i, j)].re - sym[(i, j)]).abs() < 1e-12);
            }
        }
    }
}
