use serde::{Deserialize, Serialize};

use super::SpectralDecomposition;
use crate::error::{Error, Result};

/// Default density of the logarithmic time grid.
pub const DEFAULT_POINTS_PER_DECADE: f64 = 40.0;

/// Serialized form of a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: f64,
}

fn default_ppd() -> f64 {
    DEFAULT_POINTS_PER_DECADE
}

/// Log-spaced times with trapezoid weights for `∫ dt/t`.
///
/// Points are equispaced in `u = ln t` with step `h`; interior weights are
/// `h`, the two end weights `h/2`, so the weights sum to `ln(t_max/t_min)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    points_per_decade: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: f64) -> Result<Self> {
        let valid = t_min.is_finite() && t_max.is_finite() && points_per_decade.is_finite();
        if !valid || t_min <= 0.0 || t_max <= t_min || points_per_decade <= 0.0 {
            return Err(Error::EmptyGrid);
        }
        let span = (t_max / t_min).ln();
        let intervals = ((t_max / t_min).log10() * points_per_decade).ceil().max(1.0);
        if intervals > 1e6 {
            return Err(Error::Schema(format!("time grid with {intervals} intervals is too large")));
        }
        let intervals = intervals as usize;
        let h = span / intervals as f64;
        let points: Vec<f64> =
            (0..=intervals).map(|i| if i == intervals { t_max } else { t_min * (h * i as f64).exp() }).collect();
        let mut weights = vec![h; intervals + 1];
        weights[0] = h / 2.0;
        weights[intervals] = h / 2.0;
        Ok(Self { t_min, t_max, points_per_decade, points, weights })
    }

    /// `[0.01/λ_max, 100/λ_min⁺]` at 40 points per decade; `[0.01, 100]` when
    /// the spectrum is identically zero.
    pub fn default_for(spectrum: &SpectralDecomposition) -> Self {
        let (lo, hi) = match spectrum.lambda_min_positive() {
            Some(min) => (0.01 / spectrum.lambda_max(), 100.0 / min),
            None => (0.01, 100.0),
        };
        Self::new(lo, hi, DEFAULT_POINTS_PER_DECADE).expect("spectral bounds are positive and ordered")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn points_per_decade(&self) -> f64 {
        self.points_per_decade
    }

    /// Step in `ln t`.
    pub fn log_step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.len() - 1) as f64
    }

    /// Identifier attached to every reported norm.
    pub fn fingerprint(&self) -> String {
        format!("logt[{:.6e},{:.6e}]x{}@{}", self.t_min, self.t_max, self.len(), self.points_per_decade)
    }
}

impl TryFrom<GridSpec> for TimeGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        TimeGrid::new(spec.t_min, spec.t_max, spec.points_per_decade)
    }
}

impl From<TimeGrid> for GridSpec {
    fn from(g: TimeGrid) -> Self {
        GridSpec { t_min: g.t_min, t_max: g.t_max, points_per_decade: g.points_per_decade }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_log_ratio() {
        for (a, b, ppd) in [(0.01, 100.0, 40.0), (0.3, 0.31, 40.0), (1e-3, 7.0, 13.0)] {
            let g = TimeGrid::new(a, b, ppd).unwrap();
            let sum: f64 = g.weights().iter().sum();
            assert!((sum - (b / a).ln()).abs() < 1e-12);
            assert!(g.points().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(g.points()[0], a);
            assert_eq!(*g.points().last().unwrap(), b);
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(TimeGrid::new(1.0, 1.0, 40.0).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 40.0).is_err());
        assert!(TimeGrid::new(1.0, 2.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let g = TimeGrid::new(0.1, 10.0, 20.0).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"t_min":0.1,"t_max":10.0,"points_per_decade":20.0}"#);
        let back: TimeGrid = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<TimeGrid>(r#"{"t_min":1,"t_max":0.5}"#).is_err());
    }
}
