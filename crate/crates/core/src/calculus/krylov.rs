use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{SymbolFunction, NULL_RELATIVE_THRESHOLD};
use crate::error::{Error, Result};
use crate::operators::{GradedForm, HodgeOperators};

/// `ψ(tD) f` by Lanczos on the symmetrized Dirac operator, with full
/// reorthogonalization. Real and imaginary parts are processed separately.
/// With `max_steps` at least the graded dimension the Krylov space is
/// exhausted and the result agrees with the dense path to rounding.
pub fn lanczos_apply(
    ops: &HodgeOperators,
    psi: &SymbolFunction,
    f: &GradedForm,
    t: f64,
    max_steps: usize,
) -> Result<GradedForm> {
    let sqrt_w = ops.space.sqrt_weights();
    let n = sqrt_w.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for part in 0..2 {
        let x: Vec<f64> =
            f.values().iter().zip(sqrt_w).map(|(v, s)| if part == 0 { v.re * s } else { v.im * s }).collect();
        let y = lanczos_real(ops, psi, &x, t, max_steps.max(1))?;
        for (o, (yi, s)) in out.iter_mut().zip(y.iter().zip(sqrt_w)) {
            if part == 0 {
                o.re = yi / s;
            } else {
                o.im = yi / s;
            }
        }
    }
    Ok(GradedForm::from_values(f.dims(), out))
}

fn apply_sym(ops: &HodgeOperators, v: &[f64]) -> Vec<f64> {
    let sqrt_w = ops.space.sqrt_weights();
    let form = GradedForm::from_values(
        ops.space.dims(),
        v.iter().zip(sqrt_w).map(|(a, s)| Complex64::new(a / s, 0.0)).collect(),
    );
    ops.dirac.apply(&form).values().iter().zip(sqrt_w).map(|(a, s)| a.re * s).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lanczos_real(ops: &HodgeOperators, psi: &SymbolFunction, x: &[f64], t: f64, steps: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let norm = dot(x, x).sqrt();
    if norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut basis: Vec<Vec<f64>> = vec![x.iter().map(|v| v / norm).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let scale = ops.dirac.blocks().iter().map(|b| b.matrix.max_abs()).fold(1.0, f64::max);
    for k in 0..steps.min(n) {
        let mut w = apply_sym(ops, &basis[k]);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        // Two passes of Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = dot(&w, &w).sqrt();
        if k + 1 == steps.min(n) || b <= 1e-12 * scale {
            break;
        }
        beta.push(b);
        basis.push(w.into_iter().map(|v| v / b).collect());
    }
    let m = alpha.len();
    let mut tri = DMatrix::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alpha[i];
        if i + 1 < m {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(tri);
    let theta_max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // Coefficients of f(T) e_1 in the tridiagonal basis.
    let mut coeff = vec![0.0; m];
    for (j, &theta) in eig.eigenvalues.iter().enumerate() {
        let null = theta.abs() <= NULL_RELATIVE_THRESHOLD * theta_max;
        let v = if null { psi.value_at_zero() } else { psi.eval(t * theta) };
        if v.im != 0.0 {
            return Err(Error::Schema(format!(
                "Lanczos path supports real symbols only; `{}` is complex on the spectrum",
                psi.name
            )));
        }
        if !v.re.is_finite() {
            return Err(Error::SymbolUndefined { name: psi.name.clone(), value: t * theta });
        }
        let u0 = eig.eigenvectors[(0, j)];
        for (i, c) in coeff.iter_mut().enumerate() {
            *c += eig.eigenvectors[(i, j)] * v.re * u0;
        }
    }
    let mut y = vec![0.0; n];
    for (q, c) in basis.iter().zip(&coeff) {
        y.iter_mut().zip(q).for_each(|(yi, qi)| *yi += norm * c * qi);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{apply_function, SpectralDecomposition};
    use crate::complex::{generate_complex, ComplexKind, GeneratorSpec};

    #[test]
    fn agrees_with_dense_path() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 4]).randomized(9)).unwrap();
        let ops = HodgeOperators::new(&x);
        let s = SpectralDecomposition::new(&ops);
        let f = GradedForm::from_values(
            ops.space.dims(),
            (0..s.len()).map(|i| Complex64::new((i as f64 * 1.3).sin(), (i as f64 * 0.4).cos())).collect(),
        );
        for psi in [SymbolFunction::heat(), SymbolFunction::zexp(), SymbolFunction::rational(1, 3.0)] {
            let dense = apply_function(&psi, &s, &f, 0.7).unwrap();
            let krylov = lanczos_apply(&ops, &psi, &f, 0.7, s.len()).unwrap();
            let err = ops.space.norm(&(&dense - &krylov)) / ops.space.norm(&f);
            assert!(err < 1e-8, "{}: {err}", psi.name);
        }
    }
}
