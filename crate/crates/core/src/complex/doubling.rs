use serde::{Deserialize, Serialize};

use super::MetricMeasureComplex;
use crate::error::{Error, Result};

const THETAS: [f64; 3] = [2.0, 4.0, 8.0];

/// A sampled `(x, r, theta)` with its volume ratio `V(x, theta r) / V(x, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingWitness {
    pub x: usize,
    pub r: f64,
    pub theta: f64,
    pub ratio: f64,
}

/// Measured doubling data of a complex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingCertificate {
    /// `max V(x, 2r) / V(x, r)` over the samples.
    pub c_d: f64,
    /// `max log(V(x, theta r) / V(x, r)) / log(theta)` over the samples.
    pub kappa: f64,
    /// Smallest integer strictly larger than `kappa / 2`.
    pub beta: u32,
    /// Maximizing witnesses: one for `c_d`, then one per theta for `kappa`.
    pub samples: Vec<DoublingWitness>,
}

impl DoublingCertificate {
    /// Default molecule order: smallest integer strictly larger than `kappa/2 + 1`.
    pub fn molecule_order(&self) -> u32 {
        (self.kappa / 2.0).floor() as u32 + 2
    }
}

/// Smallest integer strictly larger than `v` (for `v >= 0`).
pub(crate) fn smallest_integer_above(v: f64) -> u32 {
    v.floor() as u32 + 1
}

/// All distinct positive vertex distances and their halves, clamped to
/// `[min_edge/2, 2 diam]`. Contains every breakpoint of `r -> V(x, r)`, so the
/// doubling constant over it is the exact supremum over all radii.
pub fn default_radius_grid(x: &MetricMeasureComplex) -> Vec<f64> {
    let n = x.num_vertices();
    let mut values: Vec<f64> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let d = x.distance(a, b);
            values.push(d);
            values.push(d / 2.0);
        }
    }
    if values.is_empty() {
        return vec![1.0];
    }
    let lo = x.min_edge_length().unwrap_or(1.0) / 2.0;
    let hi = 2.0 * x.diameter();
    values.retain(|&r| r >= lo && r <= hi);
    values.push(lo);
    values.push(hi);
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

pub fn estimate_doubling(x: &MetricMeasureComplex, radius_grid: &[f64]) -> Result<DoublingCertificate> {
    if radius_grid.is_empty() {
        return Err(Error::EmptyRadiusGrid);
    }
    if let Some(&r) = radius_grid.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::NonPositiveRadius(r));
    }
    let mut best_cd = DoublingWitness { x: 0, r: radius_grid[0], theta: 2.0, ratio: 1.0 };
    let mut best_kappa: Vec<(f64, DoublingWitness)> =
        THETAS.iter().map(|&theta| (0.0, DoublingWitness { x: 0, r: radius_grid[0], theta, ratio: 1.0 })).collect();
    for v in 0..x.num_vertices() {
        for &r in radius_grid {
            let base = x.volume_unchecked(v, r);
            for (slot, &theta) in best_kappa.iter_mut().zip(THETAS.iter()) {
                let ratio = x.volume_unchecked(v, theta * r) / base;
                let exponent = ratio.ln() / theta.ln();
                if exponent > slot.0 {
                    *slot = (exponent, DoublingWitness { x: v, r, theta, ratio });
                }
                if theta == 2.0 && ratio > best_cd.ratio {
                    best_cd = DoublingWitness { x: v, r, theta, ratio };
                }
            }
        }
    }
    let kappa = best_kappa.iter().map(|s| s.0).fold(0.0, f64::max);
    let mut samples = vec![best_cd.clone()];
    samples.extend(best_kappa.into_iter().map(|s| s.1));
    Ok(DoublingCertificate { c_d: best_cd.ratio, kappa, beta: smallest_integer_above(kappa / 2.0), samples })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{generate_complex, ComplexKind, GeneratorSpec};
    use super::*;

    /// Brute force: every vertex, every radius `d/2^m` and `d` for all
    /// distances d, sup of the ratio.
    fn brute_force(x: &MetricMeasureComplex) -> (f64, f64) {
        let n = x.num_vertices();
        let mut radii = vec![];
        for a in 0..n {
            for b in 0..n {
                let d = x.distance(a, b);
                if d > 0.0 {
                    radii.extend([d, d / 2.0]);
                }
            }
        }
        let vol = |c: usize, r: f64| -> f64 { (0..n).filter(|&y| x.distance(c, y) < r).map(|y| x.measure(y)).sum() };
        let lo = x.min_edge_length().unwrap() / 2.0;
        let hi = 2.0 * x.diameter();
        radii.retain(|&r| r >= lo && r <= hi);
        radii.extend([lo, hi]);
        let (mut cd, mut kappa) = (1.0f64, 0.0f64);
        for c in 0..n {
            for &r in &radii {
                for theta in [2.0f64, 4.0, 8.0] {
                    let ratio = vol(c, theta * r) / vol(c, r);
                    kappa = kappa.max(ratio.ln() / theta.ln());
                    if theta == 2.0 {
                        cd = cd.max(ratio);
                    }
                }
            }
        }
        (cd, kappa)
    }

    #[test]
    fn p2_kappa_at_most_one() {
        let x = p2();
        let cert = estimate_doubling(&x, &default_radius_grid(&x)).unwrap();
        let (cd, kappa) = brute_force(&x);
        assert!(cert.kappa <= 1.0 + 1e-12);
        assert_eq!(cert.kappa, kappa);
        assert_eq!(cert.c_d, cd);
        assert_eq!(cert.beta, 1);
    }

    #[test]
    fn single_vertex_constant_volumes() {
        let x = MetricMeasureComplex::new(vec!["solo".into()], vec![3.0], 0, vec![], None).unwrap();
        let cert = estimate_doubling(&x, &default_radius_grid(&x)).unwrap();
        assert_eq!(cert.kappa, 0.0);
        assert_eq!(cert.c_d, 1.0);
        assert_eq!(cert.beta, 1);
    }

    #[test]
    fn torus_16_kappa_near_two() {
        let x = generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![16, 16])).unwrap();
        let cert = estimate_doubling(&x, &default_radius_grid(&x)).unwrap();
        assert!((1.5..=2.5).contains(&cert.kappa), "kappa = {}", cert.kappa);
    }

    #[test]
    fn matches_brute_force_on_small_complexes() {
        for x in [cycle(9), path(6), generate_complex(&GeneratorSpec::new(ComplexKind::TorusGrid, vec![4, 3])).unwrap()]
        {
            let cert = estimate_doubling(&x, &default_radius_grid(&x)).unwrap();
            let (cd, kappa) = brute_force(&x);
            assert!((cert.c_d - cd).abs() < 1e-12);
            assert!((cert.kappa - kappa).abs() < 1e-12);
        }
    }

    #[test]
    fn certificate_bounds_every_sample_and_is_reproducible() {
        let x = cycle(12);
        let grid = default_radius_grid(&x);
        let cert = estimate_doubling(&x, &grid).unwrap();
        for v in 0..x.num_vertices() {
            for &r in &grid {
                assert!(x.volume_unchecked(v, 2.0 * r) <= cert.c_d * x.volume_unchecked(v, r));
            }
        }
        assert_eq!(cert, estimate_doubling(&x, &grid).unwrap());
    }

    #[test]
    fn beta_rule() {
        assert_eq!(smallest_integer_above(0.0), 1);
        assert_eq!(smallest_integer_above(0.5), 1);
        assert_eq!(smallest_integer_above(1.0), 2);
        assert_eq!(smallest_integer_above(1.16), 2);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(matches!(estimate_doubling(&p2(), &[]), Err(Error::EmptyRadiusGrid)));
    }
}
