//! Randomized invariants across the public API.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use hodge_hardy::calculus::{q_transform, SymbolFunction};
use hodge_hardy::complex::{generate_complex, ComplexKind, GeneratorSpec};
use hodge_hardy::hardy::{default_psi, hardy_norm, maximal_norm, MaximalVariant};
use hodge_hardy::harness::{generate_battery, Constraint};
use hodge_hardy::operators::{hodge_decompose, GradedForm};
use hodge_hardy::probes::block_norm;
use hodge_hardy::tent::{atomic_decompose, tent_norm};
use hodge_hardy::HodgeSystem;

fn c8() -> &'static HodgeSystem {
    static SYS: OnceLock<HodgeSystem> = OnceLock::new();
    SYS.get_or_init(|| {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::Cycle, vec![8]).randomized(3)).unwrap();
        HodgeSystem::new(x).unwrap()
    })
}

/// A form in range(D) built from 16 real coefficients.
fn range_form(coeffs: &[f64]) -> GradedForm {
    let sys = c8();
    let raw = GradedForm::from_real(sys.space().dims(), coeffs);
    sys.spectrum.range_part(&raw)
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 0.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hardy_norm_is_a_norm(a in coeffs(), b in coeffs(), scale in 0.1f64..10.0) {
        let sys = c8();
        let grid = sys.default_grid();
        let (f, g) = (range_form(&a), range_form(&b));
        let n = |h: &GradedForm| hardy_norm(sys, h, 1.0, None, &grid).unwrap().value;
        let (nf, ng) = (n(&f), n(&g));
        let scaled = n(&f.scale(Complex64::new(0.0, scale)));
        prop_assert!((scaled - scale * nf).abs() <= 1e-10 * scale * nf);
        let mut sum = f.clone();
        sum.axpy(Complex64::new(1.0, 0.0), &g);
        prop_assert!(n(&sum) <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_norm_is_homogeneous(a in coeffs(), scale in 0.1f64..10.0) {
        let sys = c8();
        let grid = sys.default_grid();
        let f = range_form(&a);
        let m = |h: &GradedForm| maximal_norm(sys, h, 1.0, 1.0 / 3.0, &grid, MaximalVariant::Plain).unwrap();
        let base = m(&f);
        prop_assert!((m(&f.scale(Complex64::new(scale, 0.0))) - scale * base).abs() <= 1e-10 * scale * base);
    }

    #[test]
    fn hodge_parts_are_orthogonal(a in coeffs()) {
        let sys = c8();
        let space = sys.space();
        let f = GradedForm::from_real(space.dims(), &a);
        let h = hodge_decompose(&sys.spectrum, &sys.ops, &f);
        let scale = space.norm(&f).powi(2);
        for (p, q) in [(&h.exact, &h.coexact), (&h.exact, &h.harmonic), (&h.coexact, &h.harmonic)] {
            prop_assert!(space.inner(p, q).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn tent_atoms_reconstruct_exactly(a in coeffs()) {
        let sys = c8();
        let grid = sys.default_grid();
        let f = range_form(&a);
        let field = q_transform(&default_psi(1.0, sys.doubling.beta), &sys.spectrum, &f, &grid).unwrap();
        let dec = atomic_decompose(&sys.complex, sys.space(), &field).unwrap();
        prop_assert!(dec.all_certified());
        let back = dec.reconstruct().unwrap();
        prop_assert_eq!(back.values(), field.values());
        let t1 = tent_norm(&sys.complex, sys.space(), &field, 1.0, 1.0).unwrap();
        prop_assert!((t1 - dec.tent_norm_1).abs() <= 1e-12 * t1);
    }

    #[test]
    fn compressions_contract(entries in prop::collection::vec(-1.0f64..1.0, 36), mask in 1u32..63, mask2 in 1u32..63) {
        let m = DMatrix::from_fn(6, 6, |i, j| Complex64::new(entries[6 * i + j], entries[6 * j + i]));
        let rows: Vec<usize> = (0..6).filter(|i| mask & (1 << i) != 0).collect();
        let cols: Vec<usize> = (0..6).filter(|i| mask2 & (1 << i) != 0).collect();
        let full = m.clone().svd(false, false).singular_values.max();
        prop_assert!(block_norm(&m, &rows, &cols) <= full * (1.0 + 1e-9));
        let all: Vec<usize> = (0..6).collect();
        prop_assert!((block_norm(&m, &all, &all) - full).abs() <= 1e-8 * full);
    }
}

#[test]
fn battery_is_deterministic_and_in_range() {
    let sys = c8();
    for constraint in [Constraint::RangeDirac, Constraint::RangeD, Constraint::RangeDstar, Constraint::Any] {
        let a = generate_battery(sys, 5, 42, constraint).unwrap();
        let b = generate_battery(sys, 5, 42, constraint).unwrap();
        assert_eq!(a, b);
        for f in &a {
            assert!((sys.space().norm(f) - 1.0).abs() < 1e-12);
        }
    }
    for f in generate_battery(sys, 5, 42, Constraint::RangeDirac).unwrap() {
        assert!(sys.space().norm(&sys.spectrum.harmonic_part(&f)) < 1e-10);
    }
    assert_ne!(
        generate_battery(sys, 2, 1, Constraint::Any).unwrap(),
        generate_battery(sys, 2, 2, Constraint::Any).unwrap()
    );
}

#[test]
fn hardy_norm_is_stable_under_symbol_choice() {
    // Different admissible ψ give equivalent norms; the ratio stays moderate.
    let sys = c8();
    let grid = sys.default_grid();
    for f in generate_battery(sys, 6, 9, Constraint::RangeDirac).unwrap() {
        let a = hardy_norm(sys, &f, 1.0, None, &grid).unwrap().value;
        let b = hardy_norm(sys, &f, 1.0, Some(&SymbolFunction::zexp()), &grid).unwrap().value;
        let r = a / b;
        assert!(r > 0.1 && r < 10.0, "ratio {r}");
    }
}
