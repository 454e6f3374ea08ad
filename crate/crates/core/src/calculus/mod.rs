//! Spectral functional calculus of the Hodge–Dirac operator: symbols,
//! single-time evaluation, the analysis and synthesis maps over a time
//! grid, Calderón normalization and Riesz transforms.

mod calderon;
mod grid;
mod krylov;
mod riesz;
mod spectral;
mod symbol;

pub use calderon::{calderon_normalize, integrate_log_axis, CalderonPair};
pub use grid::{GridSpec, TimeGrid, DEFAULT_POINTS_PER_DECADE};
pub use krylov::lanczos_apply;
pub use riesz::{riesz_transform, RieszOutput, RieszVariant};
pub use spectral::{SpectralDecomposition, NULL_RELATIVE_THRESHOLD};
pub use symbol::{Symbol, SymbolFunction};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::GradedForm;
use crate::tent::SpaceTimeField;

/// `ψ(tλ)`, or `ψ(0)` on the null space.
fn multiplier(psi: &SymbolFunction, t: f64, lambda: f64, null: bool) -> Result<Complex64> {
    let v = if null { psi.value_at_zero() } else { psi.eval(t * lambda) };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::SymbolUndefined { name: psi.name.clone(), value: t * lambda })
    }
}

fn check_dims(spectrum: &SpectralDecomposition, dims: &[usize]) -> Result<()> {
    if spectrum.dims() != dims {
        return Err(Error::ShapeMismatch("form and spectrum come from different complexes".into()));
    }
    Ok(())
}

/// `ψ(tD) f = Σ ψ(t λ_i) ⟨f, e_i⟩ e_i`.
pub fn apply_function(
    psi: &SymbolFunction,
    spectrum: &SpectralDecomposition,
    f: &GradedForm,
    t: f64,
) -> Result<GradedForm> {
    check_dims(spectrum, f.dims())?;
    let mut c = spectrum.coefficients(f.values());
    for (i, ci) in c.iter_mut().enumerate() {
        *ci *= multiplier(psi, t, spectrum.eigenvalues()[i], spectrum.is_null(i))?;
    }
    Ok(spectrum.synthesize(&c))
}

/// `F(·, t_j) = ψ(t_j D) f` on every grid point.
pub fn q_transform(
    psi: &SymbolFunction,
    spectrum: &SpectralDecomposition,
    f: &GradedForm,
    grid: &TimeGrid,
) -> Result<SpaceTimeField> {
    if !psi.vanishes_at_zero() {
        return Err(Error::NotPsiClass(psi.name.clone()));
    }
    check_dims(spectrum, f.dims())?;
    let c = spectrum.coefficients(f.values());
    let mut out = SpaceTimeField::zeros(f.dims(), grid);
    let mut scaled = vec![Complex64::new(0.0, 0.0); c.len()];
    for (j, &t) in grid.points().iter().enumerate() {
        for (i, s) in scaled.iter_mut().enumerate() {
            *s = c[i] * multiplier(psi, t, spectrum.eigenvalues()[i], spectrum.is_null(i))?;
        }
        let values = spectrum.synthesize_values(&scaled);
        out.slice_mut(j).copy_from_slice(&values);
    }
    Ok(out)
}

/// `Σ_j w_j ψ(t_j D) F(·, t_j)`, accumulated in spectral coordinates.
pub fn s_transform(
    psi: &SymbolFunction,
    spectrum: &SpectralDecomposition,
    field: &SpaceTimeField,
) -> Result<GradedForm> {
    s_transform_weighted(psi, spectrum, field, |_| 1.0)
}

/// As [`s_transform`] with an extra scalar factor `g(t_j)` per time.
pub fn s_transform_weighted(
    psi: &SymbolFunction,
    spectrum: &SpectralDecomposition,
    field: &SpaceTimeField,
    g: impl Fn(f64) -> f64,
) -> Result<GradedForm> {
    check_dims(spectrum, field.dims())?;
    let n = spectrum.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let grid = field.grid();
    for j in 0..grid.len() {
        let slice = field.slice(j);
        if slice.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
            continue;
        }
        let t = grid.points()[j];
        let w = grid.weights()[j] * g(t);
        let c = spectrum.coefficients(slice);
        for (i, a) in acc.iter_mut().enumerate() {
            *a += c[i] * w * multiplier(psi, t, spectrum.eigenvalues()[i], spectrum.is_null(i))?;
        }
    }
    Ok(spectrum.synthesize(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;
    use crate::operators::HodgeOperators;

    fn p2_setup() -> (HodgeOperators, SpectralDecomposition) {
        let ops = HodgeOperators::new(&p2());
        let s = SpectralDecomposition::new(&ops);
        (ops, s)
    }

    #[test]
    fn heat_on_p2() {
        let (ops, s) = p2_setup();
        let f = GradedForm::in_degree(ops.space.dims(), 0, &[1.0, 0.0]);
        let u = apply_function(&SymbolFunction::heat(), &s, &f, 1.0).unwrap();
        let e = (-2.0f64).exp();
        assert!((u.degree(0)[0].re - (1.0 + e) / 2.0).abs() < 1e-14);
        assert!((u.degree(0)[1].re - (1.0 - e) / 2.0).abs() < 1e-14);
        assert!(u.degree(1)[0].norm() < 1e-14);
        let c = GradedForm::in_degree(ops.space.dims(), 0, &[3.0, 3.0]);
        let hc = apply_function(&SymbolFunction::heat(), &s, &c, 7.0).unwrap();
        assert!(ops.space.norm(&(&hc - &c)) < 1e-13);
        let zc = apply_function(&SymbolFunction::zexp(), &s, &c, 7.0).unwrap();
        assert!(ops.space.norm(&zc) < 1e-13);
    }

    #[test]
    fn q_transform_of_eigenform_matches_quarter() {
        let (ops, s) = p2_setup();
        let top = s.len() - 1;
        let e = s.eigenform(top);
        let grid = TimeGrid::default_for(&s);
        let field = q_transform(&SymbolFunction::zexp(), &s, &e, &grid).unwrap();
        let h2 = field.h_norm_sq(&ops.space);
        assert!((h2 - 0.25).abs() < 2.5e-4, "{h2}");
    }

    #[test]
    fn q_requires_psi_class_and_s_single_point() {
        let (ops, s) = p2_setup();
        let grid = TimeGrid::new(0.5, 2.0, 2.0).unwrap();
        let f = GradedForm::in_degree(ops.space.dims(), 0, &[1.0, 0.0]);
        assert!(matches!(q_transform(&SymbolFunction::heat(), &s, &f, &grid), Err(Error::NotPsiClass(_))));
        let mut field = SpaceTimeField::zeros(ops.space.dims(), &grid);
        field.slice_mut(1).copy_from_slice(f.values());
        let psi = SymbolFunction::zexp();
        let got = s_transform(&psi, &s, &field).unwrap();
        let t = grid.points()[1];
        let want = apply_function(&psi, &s, &f, t).unwrap().scale(Complex64::new(grid.weights()[1], 0.0));
        assert!(ops.space.norm(&(&got - &want)) < 1e-14);
        assert!(s_transform(&psi, &s, &SpaceTimeField::zeros(ops.space.dims(), &grid)).unwrap().is_zero());
    }

    #[test]
    fn resolvent_pole_is_reported() {
        // (1 + i z)^{-1} has no pole on the real axis; (1 + z^2)^{-1} at z = i is off-axis too,
        // so evaluate a symbol that overflows instead.
        let (ops, s) = p2_setup();
        let f = GradedForm::in_degree(ops.space.dims(), 0, &[1.0, 0.0]);
        let wild = SymbolFunction::rational(64, 0.5);
        assert!(matches!(apply_function(&wild, &s, &f, 1e300), Err(Error::SymbolUndefined { .. })));
    }
}
