use serde::{Deserialize, Serialize};

use crate::complex::{Ball, MetricMeasureComplex};

/// Radial profile: 1 on `[0, 2]`, linear down to 0 on `[2, 4]`.
fn profile(s: f64) -> f64 {
    (2.0 - s / 2.0).clamp(0.0, 1.0)
}

/// Partition of unity `χ_0, …, χ_K` ringed around a ball.
///
/// `φ_k = profile(ρ(·, center) / (2^k r))`, `χ_0 = φ_0`, `χ_k = φ_k − φ_{k−1}`,
/// so `χ_0` lives in `4B` and `χ_k` in `2^{k+2}B ∖ 2^{k−1}B`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptedCutoffs {
    pub ball: Ball,
    /// `chi[k][y]`.
    pub chi: Vec<Vec<f64>>,
    /// Measured `max |χ_k(x) − χ_k(y)| 2^k r / ρ(x, y)` over edges.
    pub lipschitz: f64,
}

impl AdaptedCutoffs {
    pub fn new(x: &MetricMeasureComplex, ball: &Ball) -> Self {
        let r = ball.radius;
        let diam = x.diameter();
        let k_max = if diam > 0.0 { ((diam / r).log2().ceil().max(0.0) as usize) + 2 } else { 2 };
        let phi = |k: usize, y: usize| profile(x.distance(ball.center, y) / (2f64.powi(k as i32) * r));
        let n = x.num_vertices();
        let chi: Vec<Vec<f64>> = (0..=k_max)
            .map(|k| (0..n).map(|y| if k == 0 { phi(0, y) } else { phi(k, y) - phi(k - 1, y) }).collect())
            .collect();
        let mut lipschitz: f64 = 0.0;
        if x.dimension() >= 1 {
            for (e, cell) in x.cells(1).iter().enumerate() {
                let (a, b) = (cell.vertices[0], cell.vertices[1]);
                let len = x.edge_lengths()[e];
                for (k, c) in chi.iter().enumerate() {
                    let scale = 2f64.powi(k as i32) * r;
                    lipschitz = lipschitz.max((c[a] - c[b]).abs() * scale / len);
                }
            }
        }
        Self { ball: *ball, chi, lipschitz }
    }

    /// Index of the last annulus, `K`.
    pub fn k_max(&self) -> usize {
        self.chi.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    #[test]
    fn partition_of_unity_and_supports() {
        let x = path(20);
        let ball = Ball::new(3, 1.5);
        let c = AdaptedCutoffs::new(&x, &ball);
        assert_eq!(c.k_max(), (19.0f64 / 1.5).log2().ceil() as usize + 2);
        for y in 0..20 {
            let total: f64 = c.chi.iter().map(|v| v[y]).sum();
            assert!((total - 1.0).abs() < 1e-15);
            let d = x.distance(3, y);
            for (k, v) in c.chi.iter().enumerate() {
                assert!(v[y] >= 0.0);
                let outer = 2f64.powi(k as i32 + 2) * 1.5;
                if v[y] > 0.0 {
                    assert!(d < outer);
                    if k >= 1 {
                        assert!(d >= 2f64.powi(k as i32 - 1) * 1.5);
                    }
                }
            }
        }
        assert!(c.lipschitz <= 1.5 + 1e-12);
    }
}
