//! Discrete tent spaces: cones, area and Carleson functionals, tent norms,
//! atoms over Carleson boxes and their atomic decomposition.

mod atoms;
mod field;

pub use atoms::{atomic_decompose, validate_atom, AtomicDecomposition, TentAtom, TentAtomCertificate};
pub use field::{field_to_json, load_field, parse_field, SpaceTimeField};

use std::collections::HashSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::TimeGrid;
use crate::complex::MetricMeasureComplex;
use crate::error::{Error, Result};
use crate::operators::GradedSpace;

/// `Γ_α(x)`: all `(y, j)` with `ρ(x, y) < α t_j`.
pub fn cone(x: &MetricMeasureComplex, v: usize, alpha: f64, grid: &TimeGrid) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (j, &t) in grid.points().iter().enumerate() {
        let len = x.ball_len(v, alpha * t);
        out.extend(x.by_distance(v)[..len].iter().map(|&(_, y)| (y, j)));
    }
    out
}

/// `|F(y, t_j)|²` at every vertex, indexed `[j][y]`.
fn pointwise(space: &GradedSpace, field: &SpaceTimeField) -> Vec<Vec<f64>> {
    (0..field.num_times()).map(|j| space.pointwise_sq(field.slice(j))).collect()
}

fn check_field(x: &MetricMeasureComplex, space: &GradedSpace, field: &SpaceTimeField) -> Result<()> {
    if field.dims() != space.dims() || space.num_vertices() != x.num_vertices() {
        return Err(Error::ShapeMismatch("field does not live on this complex".into()));
    }
    Ok(())
}

/// `S_α F(x)² = Σ_j w_j / V(x, t_j) Σ_{ρ(x,y) < α t_j} μ(y) |F(y, t_j)|²`.
pub fn area_functional(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    field: &SpaceTimeField,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_field(x, space, field)?;
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveRadius(alpha));
    }
    let p = pointwise(space, field);
    Ok(area_from_pointwise(x, field.grid(), &p, alpha))
}

fn area_from_pointwise(x: &MetricMeasureComplex, grid: &TimeGrid, p: &[Vec<f64>], alpha: f64) -> Vec<f64> {
    (0..x.num_vertices())
        .map(|v| {
            let mut total = 0.0;
            for (j, &t) in grid.points().iter().enumerate() {
                let len = x.ball_len(v, alpha * t);
                let mass: f64 = x.by_distance(v)[..len].iter().map(|&(_, y)| x.measure(y) * p[j][y]).sum();
                if mass > 0.0 {
                    total += grid.weights()[j] * mass / x.volume_unchecked(v, t);
                }
            }
            total.sqrt()
        })
        .collect()
}

/// `‖S_α F‖_{L^p}`.
pub fn tent_norm(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    field: &SpaceTimeField,
    p: f64,
    alpha: f64,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    let s = area_functional(x, space, field, alpha)?;
    Ok(lp(x, &s, p))
}

pub(crate) fn lp(x: &MetricMeasureComplex, values: &[f64], p: f64) -> f64 {
    values.iter().zip(x.measures()).map(|(s, m)| m * s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Distinct open balls of the complex as vertex masks, one per set.
pub(crate) fn distinct_balls(x: &MetricMeasureComplex) -> Vec<Vec<bool>> {
    let n = x.num_vertices();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut out = Vec::new();
    for c in 0..n {
        let list = x.by_distance(c);
        let mut mask = vec![false; n];
        let mut i = 0;
        while i < list.len() {
            // Ball just above radius list[i].0 contains every vertex at that distance.
            let d = list[i].0;
            while i < list.len() && list[i].0 == d {
                mask[list[i].1] = true;
                i += 1;
            }
            if seen.insert(mask.clone()) {
                out.push(mask.clone());
            }
        }
    }
    out
}

/// `C F(x) = sup_{B ∋ x} (V(B)^{-1} ∬_{T(B)} |F|²)^{1/2}` over all distinct
/// balls, with `T(B) = {(y, t) : t ≤ ρ(y, B^c)}`.
pub fn carleson_functional(x: &MetricMeasureComplex, space: &GradedSpace, field: &SpaceTimeField) -> Result<Vec<f64>> {
    check_field(x, space, field)?;
    let grid = field.grid();
    let p = pointwise(space, field);
    let n = x.num_vertices();
    // cumulative[y][j] = Σ_{j' < j} w_j' μ(y) |F(y, t_j')|²
    let cumulative: Vec<Vec<f64>> = (0..n)
        .map(|y| {
            let mut acc = vec![0.0; grid.len() + 1];
            for j in 0..grid.len() {
                acc[j + 1] = acc[j] + grid.weights()[j] * x.measure(y) * p[j][y];
            }
            acc
        })
        .collect();
    let mut best = vec![0.0f64; n];
    for mask in distinct_balls(x) {
        let mut mass = 0.0;
        let mut volume = 0.0;
        for y in (0..n).filter(|&y| mask[y]) {
            volume += x.measure(y);
            let h = x.distance_to_complement(y, &mask);
            let count = grid.points().partition_point(|&t| t <= h);
            mass += cumulative[y][count];
        }
        let avg = mass / volume;
        for y in (0..n).filter(|&y| mask[y]) {
            best[y] = best[y].max(avg);
        }
    }
    Ok(best.into_iter().map(f64::sqrt).collect())
}

/// Tent-level duality check: `|∬⟨F, G⟩| ≤ C ∫ S F · C G`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualityReport {
    pub pairing: Complex64,
    pub bound: f64,
    /// `|pairing| / bound`, reported as 0 when the bound vanishes.
    pub ratio: f64,
}

pub fn duality_pairing(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    f: &SpaceTimeField,
    g: &SpaceTimeField,
) -> Result<DualityReport> {
    f.check_compatible(g)?;
    let grid = f.grid();
    let pairing: Complex64 =
        (0..grid.len()).map(|j| space.inner_values(f.slice(j), g.slice(j)) * grid.weights()[j]).sum();
    let s = area_functional(x, space, f, 1.0)?;
    let c = carleson_functional(x, space, g)?;
    let bound: f64 = s.iter().zip(&c).zip(x.measures()).map(|((a, b), m)| a * b * m).sum();
    let ratio = if bound > 0.0 { pairing.norm() / bound } else { 0.0 };
    Ok(DualityReport { pairing, bound, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    fn unit_grid(points: &[f64]) -> TimeGrid {
        // A two-point grid [a, b] with ppd chosen so that no interior points appear.
        let (a, b) = (points[0], points[1]);
        TimeGrid::new(a, b, 1.0 / (b / a).log10()).unwrap()
    }

    #[test]
    fn cones() {
        let x = p2();
        let g = unit_grid(&[0.5, 2.0]);
        let c = cone(&x, 0, 1.0, &g);
        assert_eq!(c, vec![(0, 0), (0, 1), (1, 1)]);
        let c4 = cycle(4);
        let g = unit_grid(&[1.0, 3.0]);
        let mut at3: Vec<usize> = cone(&c4, 0, 0.5, &g).into_iter().filter(|p| p.1 == 1).map(|p| p.0).collect();
        at3.sort();
        assert_eq!(at3, vec![0, 1, 3]);
    }

    #[test]
    fn point_mass_area_functional() {
        let x = p2();
        let space = GradedSpace::new(&x);
        let g = unit_grid(&[0.5, 2.0]);
        let mut f = SpaceTimeField::zeros(space.dims(), &g);
        f.set(1, 1, Complex64::new(1.0, 0.0));
        let s = area_functional(&x, &space, &f, 1.0).unwrap();
        let w = g.weights()[1];
        // Both vertices are within t = 2 of v; V(x, 2) = 2.
        assert!((s[0] * s[0] - w * 1.0 / 2.0).abs() < 1e-15);
        assert!((s[1] * s[1] - w * 1.0 / 2.0).abs() < 1e-15);
        let n2 = tent_norm(&x, &space, &f, 2.0, 1.0).unwrap();
        assert!((n2 * n2 - w).abs() < 1e-14);
        assert!(matches!(tent_norm(&x, &space, &f, 0.5, 1.0), Err(Error::InvalidExponent(_))));
        assert!(area_functional(&x, &space, &SpaceTimeField::zeros(space.dims(), &g), 1.0)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn carleson_on_p2_point_mass() {
        let x = p2();
        let space = GradedSpace::new(&x);
        let g = unit_grid(&[0.5, 2.0]);
        let mut f = SpaceTimeField::zeros(space.dims(), &g);
        f.set(0, 0, Complex64::new(1.0, 0.0));
        let c = carleson_functional(&x, &space, &f).unwrap();
        // Balls: {u} (tent heights up to 1 at u), {v}, {u, v} (all heights).
        // {u}: mass w0 / 1. Whole space: w0 / 2.
        let w0 = g.weights()[0];
        assert!((c[0] * c[0] - w0).abs() < 1e-15);
        assert!((c[1] * c[1] - w0 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn duality_with_zero_and_self() {
        let x = cycle(5);
        let space = GradedSpace::new(&x);
        let g = unit_grid(&[0.5, 2.0]);
        let mut f = SpaceTimeField::zeros(space.dims(), &g);
        f.set(3, 1, Complex64::new(2.0, 1.0));
        let z = SpaceTimeField::zeros(space.dims(), &g);
        let r = duality_pairing(&x, &space, &f, &z).unwrap();
        assert_eq!((r.pairing.norm(), r.bound, r.ratio), (0.0, 0.0, 0.0));
        let r = duality_pairing(&x, &space, &f, &f).unwrap();
        assert!(r.pairing.im.abs() < 1e-15 && r.pairing.re > 0.0);
        assert!((r.pairing.re - g.weights()[1] * 5.0).abs() < 1e-14);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
    }
}
