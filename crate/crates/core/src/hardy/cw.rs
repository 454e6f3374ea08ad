use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{Ball, MetricMeasureComplex};
use crate::error::{Error, Result};
use crate::operators::{GradedForm, GradedSpace};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CwAtomCertificate {
    pub ball: Ball,
    pub support_ok: bool,
    pub integral: Complex64,
    pub integral_ok: bool,
    pub l2_norm: f64,
    /// `V(B)^{-1/2}`.
    pub bound: f64,
    pub size_ok: bool,
    pub pass: bool,
}

fn zero_form_values<'a>(space: &GradedSpace, a: &'a GradedForm) -> Result<&'a [Complex64]> {
    if a.dims() != space.dims() {
        return Err(Error::ShapeMismatch("form does not live on this complex".into()));
    }
    if (1..a.dims().len()).any(|k| a.degree(k).iter().any(|v| v.norm() != 0.0)) {
        return Err(Error::ShapeMismatch("Coifman–Weiss atoms are 0-forms".into()));
    }
    Ok(a.degree(0))
}

/// Support in `B`, vanishing integral, `‖a‖₂ ≤ V(B)^{-1/2}`.
pub fn validate_cw_atom(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    a: &GradedForm,
    ball: &Ball,
) -> Result<CwAtomCertificate> {
    let values = zero_form_values(space, a)?;
    let mu = x.measures();
    let support_ok = values.iter().enumerate().all(|(y, v)| v.norm() == 0.0 || x.in_ball(ball, y));
    let integral: Complex64 = values.iter().zip(mu).map(|(v, m)| v * m).sum();
    let mass: f64 = values.iter().zip(mu).map(|(v, m)| v.norm() * m).sum();
    let integral_ok = integral.norm() <= 1e-10 * mass;
    let l2_norm = values.iter().zip(mu).map(|(v, m)| m * v.norm_sqr()).sum::<f64>().sqrt();
    let bound = x.ball_volume(ball).powf(-0.5);
    let size_ok = l2_norm <= bound * (1.0 + 1e-12);
    Ok(CwAtomCertificate {
        ball: *ball,
        support_ok,
        integral,
        integral_ok,
        l2_norm,
        bound,
        size_ok,
        pass: support_ok && integral_ok && size_ok,
    })
}

/// Measure of the smallest closed ball containing `y` and `x0`.
fn pair_ball_measure(x: &MetricMeasureComplex, y: usize, x0: usize) -> f64 {
    (0..x.num_vertices())
        .map(|c| {
            let r = x.distance(c, y).max(x.distance(c, x0));
            x.volume_unchecked(c, r + 1e-12 * r.max(1.0))
        })
        .fold(f64::INFINITY, f64::min)
}

/// `(∫|f|²) (∫|f|² m(·, x0)^{1+ε})^{1/ε}`, where `m(y, x0)` is the least
/// measure of a ball containing `y` and `x0`. At most 1 for a molecule.
pub fn cw_molecule_quantity(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    f: &GradedForm,
    x0: usize,
    epsilon: f64,
) -> Result<f64> {
    let values = zero_form_values(space, f)?;
    if x0 >= x.num_vertices() {
        return Err(Error::UnknownVertex(format!("#{x0}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Schema(format!("epsilon must be positive, got {epsilon}")));
    }
    let mu = x.measures();
    let mut plain = 0.0;
    let mut weighted = 0.0;
    for (y, v) in values.iter().enumerate() {
        let e = mu[y] * v.norm_sqr();
        if e == 0.0 {
            continue;
        }
        plain += e;
        weighted += e * pair_ball_measure(x, y, x0).powf(1.0 + epsilon);
    }
    Ok(plain * weighted.powf(1.0 / epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    #[test]
    fn p2_half_atom_passes() {
        let x = p2();
        let space = GradedSpace::new(&x);
        let a = GradedForm::in_degree(space.dims(), 0, &[0.5, -0.5]);
        let cert = validate_cw_atom(&x, &space, &a, &Ball::new(0, 10.0)).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!((cert.l2_norm - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cert.bound - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn failures_and_degenerate_zero() {
        let x = cycle(6);
        let space = GradedSpace::new(&x);
        let ball = Ball::new(0, 10.0);
        let c = GradedForm::in_degree(space.dims(), 0, &[0.1; 6]);
        let cert = validate_cw_atom(&x, &space, &c, &ball).unwrap();
        assert!(!cert.integral_ok && !cert.pass);
        assert!(validate_cw_atom(&x, &space, &space.zeros(), &ball).unwrap().pass);
        let mut far = space.zeros();
        far.degree_mut(0)[3] = Complex64::new(0.1, 0.0);
        far.degree_mut(0)[0] = Complex64::new(-0.1, 0.0);
        assert!(!validate_cw_atom(&x, &space, &far, &Ball::new(0, 1.5)).unwrap().support_ok);
        let edge = GradedForm::in_degree(space.dims(), 1, &[1.0; 6]);
        assert!(validate_cw_atom(&x, &space, &edge, &ball).is_err());
    }

    #[test]
    fn molecule_quantity_scales_quadratically_in_l2() {
        let x = path(7);
        let space = GradedSpace::new(&x);
        let f = GradedForm::in_degree(space.dims(), 0, &[0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0]);
        let q = cw_molecule_quantity(&x, &space, &f, 2, 1.0).unwrap();
        // m(2,2) = 1 (the ball {2}); the smallest closed ball holding 2 and 3 is
        // B̄(2, 1) = {1, 2, 3}, so m(3,2) = 3.
        assert!((q - 2.0 * (1.0 + 9.0)).abs() < 1e-12, "{q}");
        let g = f.scale(Complex64::new(0.5, 0.0));
        let qg = cw_molecule_quantity(&x, &space, &g, 2, 1.0).unwrap();
        assert!((qg - q / 16.0).abs() < 1e-12);
    }
}
