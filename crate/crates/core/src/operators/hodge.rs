use num_complex::Complex64;

use super::{GradedForm, HodgeOperators};
use crate::calculus::SpectralDecomposition;

/// `f = exact + coexact + harmonic`, pairwise orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeDecomposition {
    pub exact: GradedForm,
    pub coexact: GradedForm,
    pub harmonic: GradedForm,
}

/// Spectral Hodge decomposition: the harmonic part is the null eigenspace of
/// `D`; with `g = D^{-1}` applied to the rest, `exact = d g` and
/// `coexact = d* g`.
pub fn hodge_decompose(spectrum: &SpectralDecomposition, ops: &HodgeOperators, f: &GradedForm) -> HodgeDecomposition {
    let mut c = spectrum.coefficients(f.values());
    let mut h = c.clone();
    for (i, (ci, hi)) in c.iter_mut().zip(h.iter_mut()).enumerate() {
        if spectrum.is_null(i) {
            *ci = Complex64::new(0.0, 0.0);
        } else {
            *ci /= spectrum.eigenvalues()[i];
            *hi = Complex64::new(0.0, 0.0);
        }
    }
    let g = spectrum.synthesize(&c);
    HodgeDecomposition { exact: ops.d.apply(&g), coexact: ops.dstar.apply(&g), harmonic: spectrum.synthesize(&h) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;
    use crate::complex::{generate_complex, ComplexKind, GeneratorSpec};

    fn setup(x: &crate::complex::MetricMeasureComplex) -> (HodgeOperators, SpectralDecomposition) {
        let ops = HodgeOperators::new(x);
        let s = SpectralDecomposition::new(&ops);
        (ops, s)
    }

    #[test]
    fn constants_are_harmonic() {
        let (ops, s) = setup(&cycle(5));
        let f = GradedForm::in_degree(ops.space.dims(), 0, &[2.0; 5]);
        let h = hodge_decompose(&s, &ops, &f);
        assert!(ops.space.norm(&h.exact) < 1e-12);
        assert!(ops.space.norm(&h.coexact) < 1e-12);
        assert!(ops.space.norm(&(&h.harmonic - &f)) < 1e-12);
    }

    #[test]
    fn p2_one_form_is_exact() {
        let (ops, s) = setup(&p2());
        let f = GradedForm::in_degree(ops.space.dims(), 1, &[1.0]);
        let h = hodge_decompose(&s, &ops, &f);
        assert!(ops.space.norm(&(&h.exact - &f)) < 1e-12);
        assert!(h.coexact.degree(1)[0].norm() < 1e-12);
        assert!(ops.space.norm(&h.harmonic) < 1e-12);
    }

    #[test]
    fn zero_form() {
        let (ops, s) = setup(&p2());
        let h = hodge_decompose(&s, &ops, &ops.space.zeros());
        assert!(h.exact.is_zero() && h.coexact.is_zero() && h.harmonic.is_zero());
    }

    #[test]
    fn pythagoras_and_idempotence_on_torus() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 4]).randomized(3)).unwrap();
        let (ops, s) = setup(&x);
        let f = GradedForm::from_values(
            ops.space.dims(),
            (0..s.len()).map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64).cos())).collect(),
        );
        let h = hodge_decompose(&s, &ops, &f);
        let sp = &ops.space;
        let sum = &(&h.exact + &h.coexact) + &h.harmonic;
        let n2 = sp.norm(&f).powi(2);
        assert!(sp.norm(&(&sum - &f)).powi(2) < 1e-20 * n2.max(1.0) + 1e-10 * n2);
        let parts = sp.norm(&h.exact).powi(2) + sp.norm(&h.coexact).powi(2) + sp.norm(&h.harmonic).powi(2);
        assert!((parts - n2).abs() <= 1e-10 * n2);
        assert!(sp.inner(&h.exact, &h.coexact).norm() <= 1e-10 * n2);
        assert!(sp.inner(&h.exact, &h.harmonic).norm() <= 1e-10 * n2);
        // Torus has nontrivial harmonic 1-forms.
        assert!(sp.norm(&h.harmonic.restrict_to_degree(1)) > 1e-3);
        let again = hodge_decompose(&s, &ops, &h.exact);
        assert!(sp.norm(&(&again.exact - &h.exact)) <= 1e-10 * sp.norm(&h.exact));
        assert!(sp.norm(&again.coexact) <= 1e-10 * sp.norm(&h.exact));
    }
}
