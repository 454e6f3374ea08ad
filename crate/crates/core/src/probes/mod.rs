//! Empirical measurement of decay estimates and boundedness constants.

mod boundedness;
mod decay;
mod gaussian;

pub use boundedness::{boundedness_probe, norm_equivalence_probe, BoundednessReport, NormEquivalenceReport, PairRatio};
pub use decay::{
    composition_decay_probe, default_composition_grids, default_t_grid, default_z_grid, gaffney_probe, offdiag_probe,
    GaffneyFamily,
};
pub use gaussian::{default_gaussian_times, gaussian_kernel_probe, heat_kernel, GaussianEnvelope};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::MetricMeasureComplex;
use crate::error::{Error, Result};
use crate::operators::GradedSpace;

/// Slack granted to fitted exponents against the requested order.
pub const EXPONENT_TOLERANCE: f64 = 0.2;

/// Disjoint vertex sets `E`, `F` at positive distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetPair {
    pub e: Vec<usize>,
    pub f: Vec<usize>,
    pub rho: f64,
}

impl SetPair {
    pub fn new(x: &MetricMeasureComplex, e: &[usize], f: &[usize]) -> Result<Self> {
        let n = x.num_vertices();
        if let Some(&v) = e.iter().chain(f).find(|&&v| v >= n) {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        if e.is_empty() || f.is_empty() {
            return Err(Error::InvalidSubset("probe sets must be nonempty".into()));
        }
        let rho = e
            .iter()
            .flat_map(|&a| f.iter().map(move |&b| (a, b)))
            .map(|(a, b)| x.distance(a, b))
            .fold(f64::INFINITY, f64::min);
        if !(rho > 0.0) {
            return Err(Error::OverlappingSets);
        }
        let (mut e, mut f) = (e.to_vec(), f.to_vec());
        e.sort_unstable();
        e.dedup();
        f.sort_unstable();
        f.dedup();
        Ok(Self { e, f, rho })
    }

    /// Indices of cells with every vertex in the set, i.e. the support of `χ_S`
    /// acting on forms.
    pub(crate) fn cells(space: &GradedSpace, set: &[usize]) -> Vec<usize> {
        let mut mask = vec![false; space.num_vertices()];
        for &v in set {
            mask[v] = true;
        }
        (0..space.total_dim()).filter(|&i| space.cell_vertices(i).iter().all(|&v| mask[v])).collect()
    }
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    /// `1 - R²`.
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    /// `None` with fewer than two distinct abscissae.
    pub fn linear(label: &str, xs: &[f64], ys: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n < 2 {
            return None;
        }
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx <= 0.0 {
            return None;
        }
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let residual = if syy > 0.0 {
            let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
            sse / syy
        } else {
            0.0
        };
        Some(Self { label: label.into(), slope, intercept: my - slope * mx, residual, points: n })
    }
}

/// One measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Probe parameters, e.g. `[z]`, `[s, t]` or `[x, y, t]`.
    pub params: Vec<f64>,
    /// Abscissa used by the fit.
    pub abscissa: f64,
    pub value: f64,
    /// Upper bound the value must respect (global operator norm, envelope).
    pub bound: f64,
    /// Inside the asymptotic regime and above the noise floor.
    pub in_fit: bool,
}

/// A named measured constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    /// Value it is compared against, if any.
    pub requested: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    pub family: String,
    pub sets: Option<SetPair>,
    pub samples: Vec<Sample>,
    pub fits: Vec<Fit>,
    pub estimates: Vec<Estimate>,
    pub tolerance: f64,
    /// Every sample respects its bound.
    pub bounds_ok: bool,
    pub pass: bool,
}

impl ProbeReport {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// Largest singular value of `m[rows, cols]`.
///
/// Power iteration on `BᴴB` to relative tolerance `1e-10`; falls back to an
/// SVD when iteration stalls (nearly tied top singular values).
pub fn block_norm(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let b = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    spectral_norm(&b)
}

pub(crate) fn spectral_norm(b: &DMatrix<Complex64>) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    let n = b.ncols();
    let mut v =
        nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * (i as f64).sin(), 0.1 * (i as f64).cos()));
    v /= Complex64::new(v.norm(), 0.0);
    let mut sigma = 0.0;
    for _ in 0..5000 {
        let w = b.adjoint() * (b * &v);
        let norm = w.norm();
        if norm == 0.0 {
            break;
        }
        let next = norm.sqrt();
        v = w / Complex64::new(norm, 0.0);
        if (next - sigma).abs() <= 1e-10 * next {
            return next;
        }
        sigma = next;
    }
    b.clone().singular_values().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    #[test]
    fn power_iteration_matches_svd() {
        let m = DMatrix::from_fn(9, 7, |i, j| {
            Complex64::new(((i * 7 + j) as f64 * 0.61).sin(), ((i + 3 * j) as f64 * 0.23).cos())
        });
        let want = m.clone().singular_values().max();
        let got = block_norm(&m, &(0..9).collect::<Vec<_>>(), &(0..7).collect::<Vec<_>>());
        assert!((got - want).abs() < 1e-8 * want);
        let tied = DMatrix::<Complex64>::identity(4, 4);
        assert!((spectral_norm(&tied) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sets_must_be_separated() {
        let x = path(5);
        assert!(matches!(SetPair::new(&x, &[0, 1], &[1]), Err(Error::OverlappingSets)));
        assert!(SetPair::new(&x, &[], &[1]).is_err());
        let p = SetPair::new(&x, &[0], &[4]).unwrap();
        assert_eq!(p.rho, 4.0);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let fit = Fit::linear("l", &xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-15 && fit.residual < 1e-15);
        assert!(Fit::linear("l", &[1.0], &[1.0]).is_none());
    }
}
