use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::TimeGrid;
use crate::error::{Error, Result};
use crate::operators::GradedForm;
use crate::HodgeSystem;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalVariant {
    /// `|e^{-s²Δ} f|²`.
    #[default]
    Plain,
    /// Adds `|s ∂_s e^{-s²Δ} f|²`.
    Tilde,
}

impl FromStr for MaximalVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "tilde" => Ok(Self::Tilde),
            _ => Err(Error::Schema(format!("unknown maximal variant `{s}`"))),
        }
    }
}

impl fmt::Display for MaximalVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plain => "plain",
            Self::Tilde => "tilde",
        })
    }
}

/// Largest admissible space-time ball constant for aperture `alpha`.
pub fn max_ball_constant(alpha: f64) -> f64 {
    alpha / (1.0 + 2.0 * alpha)
}

fn check_constants(alpha: f64, c: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite() && c > 0.0 && c <= max_ball_constant(alpha) * (1.0 + 1e-12)) {
        return Err(Error::ApertureConstant { alpha, c });
    }
    Ok(())
}

/// Squared fiber norms `P[i][z]` of the heat extension at every grid time,
/// each already multiplied by `Δs_i = s_i w_i`.
fn heat_energy(sys: &HodgeSystem, f: &GradedForm, grid: &TimeGrid, variant: MaximalVariant) -> Vec<Vec<f64>> {
    let spectrum = &sys.spectrum;
    let space = sys.space();
    let coeffs = spectrum.coefficients(f.values());
    let lambdas = spectrum.eigenvalues();
    grid.points()
        .iter()
        .zip(grid.weights())
        .map(|(&s, &w)| {
            let heat = |l: f64| (-(s * l) * (s * l)).exp();
            let c: Vec<Complex64> = coeffs.iter().zip(lambdas).map(|(c, &l)| c * heat(l)).collect();
            let mut p = space.pointwise_sq(&spectrum.synthesize_values(&c));
            if variant == MaximalVariant::Tilde {
                let c: Vec<Complex64> =
                    coeffs.iter().zip(lambdas).map(|(c, &l)| c * (-2.0 * (s * l) * (s * l) * heat(l))).collect();
                for (a, b) in p.iter_mut().zip(space.pointwise_sq(&spectrum.synthesize_values(&c))) {
                    *a += b;
                }
            }
            p.iter_mut().for_each(|v| *v *= s * w);
            p
        })
        .collect()
}

/// `f*(x)`: the largest space-time average
/// `(t V(y,t))^{-1} Σ_{z ∈ B(y,ct)} μ(z) Σ_{|s-t|<ct} Δs |u(z,s)|²` over the
/// cone `ρ(x,y) < α t`, square-rooted.
pub fn maximal_function(
    sys: &HodgeSystem,
    f: &GradedForm,
    alpha: f64,
    c: f64,
    grid: &TimeGrid,
    variant: MaximalVariant,
) -> Result<Vec<f64>> {
    check_constants(alpha, c)?;
    let space = sys.space();
    if f.dims() != space.dims() {
        return Err(Error::ShapeMismatch("form does not live on this complex".into()));
    }
    let x = &sys.complex;
    let nv = x.num_vertices();
    let energy = heat_energy(sys, f, grid, variant);
    let times = grid.points();
    // prefix[i][z] = Σ_{i' < i} energy[i'][z]
    let mut prefix = vec![vec![0.0; nv]; times.len() + 1];
    for i in 0..times.len() {
        for z in 0..nv {
            prefix[i + 1][z] = prefix[i][z] + energy[i][z];
        }
    }
    let mu = x.measures();
    // average[j][y]
    let average: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let lo = times.partition_point(|&s| s <= t - c * t);
            let hi = times.partition_point(|&s| s < t + c * t);
            (0..nv)
                .map(|y| {
                    let len = x.ball_len(y, c * t);
                    let sum: f64 =
                        x.by_distance(y)[..len].iter().map(|&(_, z)| mu[z] * (prefix[hi][z] - prefix[lo][z])).sum();
                    sum / (t * x.volume_unchecked(y, t))
                })
                .collect()
        })
        .collect();
    Ok((0..nv)
        .map(|v| {
            let mut best: f64 = 0.0;
            for (j, &t) in times.iter().enumerate() {
                let len = x.ball_len(v, alpha * t);
                for &(_, y) in &x.by_distance(v)[..len] {
                    best = best.max(average[j][y]);
                }
            }
            best.sqrt()
        })
        .collect())
}

/// `Σ_x μ(x) f*(x)`.
pub fn maximal_norm(
    sys: &HodgeSystem,
    f: &GradedForm,
    alpha: f64,
    c: f64,
    grid: &TimeGrid,
    variant: MaximalVariant,
) -> Result<f64> {
    let star = maximal_function(sys, f, alpha, c, grid, variant)?;
    Ok(star.iter().zip(sys.complex.measures()).map(|(s, m)| s * m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    /// Triple loop straight from the definition.
    fn oracle(sys: &HodgeSystem, f: &GradedForm, alpha: f64, c: f64, grid: &TimeGrid, tilde: bool) -> Vec<f64> {
        let x = &sys.complex;
        let n = x.num_vertices();
        let ts = grid.points();
        let u: Vec<(Vec<f64>, Vec<f64>)> = ts
            .iter()
            .map(|&s| {
                let h = sys.spectrum.apply_multiplier(f, |l, _| Complex64::new((-(s * l).powi(2)).exp(), 0.0));
                let d = sys.ops.laplacian.apply(&h).scale(Complex64::new(-2.0 * s * s, 0.0));
                (sys.space().pointwise_sq(h.values()), sys.space().pointwise_sq(d.values()))
            })
            .collect();
        (0..n)
            .map(|v| {
                let mut best: f64 = 0.0;
                for &t in ts {
                    for y in 0..n {
                        if x.distance(v, y) >= alpha * t {
                            continue;
                        }
                        let mut sum = 0.0;
                        for z in 0..n {
                            if x.distance(y, z) >= c * t {
                                continue;
                            }
                            for (i, &s) in ts.iter().enumerate() {
                                if (s - t).abs() < c * t {
                                    let e = u[i].0[z] + if tilde { u[i].1[z] } else { 0.0 };
                                    sum += x.measure(z) * s * grid.weights()[i] * e;
                                }
                            }
                        }
                        best = best.max(sum / (t * x.volume_unchecked(y, t)));
                    }
                }
                best.sqrt()
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let sys = HodgeSystem::new(p2()).unwrap();
        let grid = TimeGrid::new(0.05, 5.0, 10.0).unwrap();
        let f = GradedForm::in_degree(sys.space().dims(), 0, &[1.0, -1.0]);
        for (variant, tilde) in [(MaximalVariant::Plain, false), (MaximalVariant::Tilde, true)] {
            let got = maximal_function(&sys, &f, 1.0, 1.0 / 3.0, &grid, variant).unwrap();
            let want = oracle(&sys, &f, 1.0, 1.0 / 3.0, &grid, tilde);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-12 * w.max(1.0), "{g} vs {w}");
            }
        }
        let sys = HodgeSystem::new(cycle(7)).unwrap();
        let grid = TimeGrid::new(0.1, 20.0, 8.0).unwrap();
        let f = GradedForm::in_degree(sys.space().dims(), 1, &[1.0, 0.0, -2.0, 0.5, 0.0, 0.0, 1.0]);
        let got = maximal_function(&sys, &f, 0.5, 0.2, &grid, MaximalVariant::Tilde).unwrap();
        let want = oracle(&sys, &f, 0.5, 0.2, &grid, true);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12 * w.max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn zero_homogeneity_and_constraints() {
        let sys = HodgeSystem::new(cycle(8)).unwrap();
        let grid = sys.default_grid();
        let zero = sys.space().zeros();
        assert_eq!(maximal_norm(&sys, &zero, 1.0, 0.25, &grid, MaximalVariant::Plain).unwrap(), 0.0);
        let f = GradedForm::in_degree(sys.space().dims(), 0, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let a = maximal_norm(&sys, &f, 1.0, 0.25, &grid, MaximalVariant::Plain).unwrap();
        let b =
            maximal_norm(&sys, &f.scale(Complex64::new(0.0, -3.0)), 1.0, 0.25, &grid, MaximalVariant::Plain).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);
        assert!(matches!(
            maximal_norm(&sys, &f, 1.0, 0.5, &grid, MaximalVariant::Plain),
            Err(Error::ApertureConstant { .. })
        ));
    }
}
