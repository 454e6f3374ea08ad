use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{area_functional, lp, SpaceTimeField};
use crate::complex::{whitney_from_mask, Ball, MetricMeasureComplex};
use crate::error::{Error, Result};
use crate::operators::GradedSpace;

/// Outcome of checking a field against the atom conditions over a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentAtomCertificate {
    pub ball: Ball,
    /// Support inside the Carleson box `B × (0, r(B)]`, with every vertex of
    /// each supporting cell inside `B`.
    pub support_ok: bool,
    /// First offending `(graded cell index, time index)`.
    pub offending: Option<(usize, usize)>,
    /// `∬ |A|² dμ dt/t`.
    pub normalization: f64,
    /// `1 / V(B)`.
    pub bound: f64,
    pub pass: bool,
}

pub fn validate_atom(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    atom: &SpaceTimeField,
    ball: &Ball,
) -> TentAtomCertificate {
    let grid = atom.grid();
    let offending = atom.support().find(|&(cell, j)| {
        grid.points()[j] > ball.radius || !space.cell_vertices(cell).iter().all(|&v| x.in_ball(ball, v))
    });
    let normalization = atom.h_norm_sq(space);
    let bound = 1.0 / x.ball_volume(ball);
    let support_ok = offending.is_none();
    TentAtomCertificate {
        ball: *ball,
        support_ok,
        offending,
        normalization,
        bound,
        pass: support_ok && normalization <= bound * (1.0 + 1e-12),
    }
}

#[derive(Clone, Debug)]
pub struct TentAtom {
    pub lambda: f64,
    pub atom: SpaceTimeField,
    pub ball: Ball,
    /// Dyadic level `k` of `{S F > 2^k}`, or `None` for the sweep atom.
    pub level: Option<i32>,
    pub certificate: TentAtomCertificate,
}

#[derive(Clone, Debug)]
pub struct AtomicDecomposition {
    pub atoms: Vec<TentAtom>,
    pub sum_abs_lambda: f64,
    pub tent_norm_1: f64,
    /// `Σ|λ_j| / ‖F‖_{T^{1,2}}`.
    pub ratio: f64,
}

impl AtomicDecomposition {
    pub fn all_certified(&self) -> bool {
        self.atoms.iter().all(|a| a.certificate.pass)
    }

    /// `Σ λ_j A_j`.
    pub fn reconstruct(&self) -> Option<SpaceTimeField> {
        let first = self.atoms.first()?;
        let mut out = SpaceTimeField::zeros(first.atom.dims(), first.atom.grid());
        for a in &self.atoms {
            out.axpy(Complex64::new(a.lambda, 0.0), &a.atom).ok()?;
        }
        Some(out)
    }
}

/// A ball containing every vertex whose box contains every grid time.
fn global_ball(x: &MetricMeasureComplex, t_max: f64) -> Ball {
    let center = (0..x.num_vertices()).min_by(|&a, &b| x.eccentricity(a).total_cmp(&x.eccentricity(b))).unwrap_or(0);
    let reach = x.eccentricity(center);
    let radius = (reach + reach.max(1.0) * 1e-9).max(t_max);
    Ball::new(center, radius)
}

/// Smallest power of two `>= v` (for `v > 0`).
fn pow2_ceil(v: f64) -> f64 {
    let p = 2f64.powi(v.log2().ceil() as i32);
    if p < v {
        2.0 * p
    } else {
        p
    }
}

/// Atomic decomposition along the dyadic level sets of the area functional.
///
/// Every support entry `(cell, t_j)` goes to the largest level `k` and the
/// first Whitney ball `B_w` of `O_k = {S F > 2^k}` with the cell inside
/// `4 B_w` and `t_j ≤ 4 r_w`; leftovers go to one atom over a global ball.
/// Coefficients are powers of two, so `Σ λ_j A_j = F` holds bit for bit.
pub fn atomic_decompose(
    x: &MetricMeasureComplex,
    space: &GradedSpace,
    field: &SpaceTimeField,
) -> Result<AtomicDecomposition> {
    let s = area_functional(x, space, field, 1.0)?;
    if field.is_zero() {
        return Err(Error::ZeroField);
    }
    let grid = field.grid();
    let n = x.num_vertices();
    let t_max = grid.t_max();
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let s_min = s.iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let k_hi = s_max.log2().ceil() as i32 - 1;
    let k_lo = s_min.log2().floor() as i32 - 1;

    let global = global_ball(x, t_max);
    // Candidate balls per level, highest level first.
    let mut levels: Vec<(i32, Vec<Ball>)> = Vec::new();
    for k in (k_lo..=k_hi).rev() {
        let threshold = 2f64.powi(k);
        let mask: Vec<bool> = s.iter().map(|v| *v > threshold).collect();
        let count = mask.iter().filter(|&&b| b).count();
        if count == 0 {
            continue;
        }
        let balls = if count == n {
            vec![global]
        } else {
            whitney_from_mask(x, &mask).balls.iter().map(|b| b.dilate(4.0)).collect()
        };
        levels.push((k, balls));
    }

    let mut pieces: BTreeMap<(i64, usize), SpaceTimeField> = BTreeMap::new();
    let mut meta: BTreeMap<(i64, usize), (Ball, Option<i32>)> = BTreeMap::new();
    for (cell, j) in field.support().collect::<Vec<_>>() {
        let t = grid.points()[j];
        let verts = space.cell_vertices(cell);
        let mut slot = None;
        'levels: for (k, balls) in &levels {
            for (w, ball) in balls.iter().enumerate() {
                if t <= ball.radius && verts.iter().all(|&v| x.in_ball(ball, v)) {
                    slot = Some(((-(*k as i64), w), (*ball, Some(*k))));
                    break 'levels;
                }
            }
        }
        let (key, info) = slot.unwrap_or(((i64::MAX, 0), (global, None)));
        meta.entry(key).or_insert(info);
        pieces.entry(key).or_insert_with(|| SpaceTimeField::zeros(field.dims(), grid)).set(cell, j, field.get(cell, j));
    }

    let mut atoms = Vec::with_capacity(pieces.len());
    for (key, piece) in pieces {
        let (ball, level) = meta[&key];
        let mass = piece.h_norm_sq(space);
        let lambda = pow2_ceil((x.ball_volume(&ball) * mass).sqrt());
        let atom = piece.scale(Complex64::new(1.0 / lambda, 0.0));
        let certificate = super::validate_atom(x, space, &atom, &ball);
        atoms.push(TentAtom { lambda, atom, ball, level, certificate });
    }
    let sum_abs_lambda: f64 = atoms.iter().map(|a| a.lambda).sum();
    let tent_norm_1 = lp(x, &s, 1.0);
    Ok(AtomicDecomposition { atoms, sum_abs_lambda, tent_norm_1, ratio: sum_abs_lambda / tent_norm_1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::TimeGrid;
    use crate::complex::fixtures::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn boundary_atom_passes_and_outside_entry_fails() {
        let x = path(6);
        let space = GradedSpace::new(&x);
        let grid = TimeGrid::new(0.5, 4.0, 3.0).unwrap();
        let ball = Ball::new(2, 1.5);
        let mut a = SpaceTimeField::zeros(space.dims(), &grid);
        a.set(2, 0, Complex64::new(1.0, 0.0));
        let mass = a.h_norm_sq(&space);
        let target = 1.0 / x.ball_volume(&ball);
        let a = a.scale(Complex64::new((target / mass).sqrt(), 0.0));
        let cert = validate_atom(&x, &space, &a, &ball);
        assert!(cert.pass, "{cert:?}");
        let mut bad = a.clone();
        bad.set(5, 0, Complex64::new(0.1, 0.0));
        let cert = validate_atom(&x, &space, &bad, &ball);
        assert!(!cert.pass);
        assert_eq!(cert.offending, Some((5, 0)));
        let mut late = a.clone();
        late.set(2, grid.len() - 1, Complex64::new(0.1, 0.0));
        assert!(!validate_atom(&x, &space, &late, &ball).support_ok);
    }

    #[test]
    fn exact_reconstruction_random_fields() {
        let x = cycle(8);
        let space = GradedSpace::new(&x);
        let grid = TimeGrid::new(0.1, 10.0, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let mut f = SpaceTimeField::zeros(space.dims(), &grid);
            for j in 0..grid.len() {
                for c in 0..space.total_dim() {
                    if rng.gen_bool(0.5) {
                        f.set(c, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    }
                }
            }
            let dec = atomic_decompose(&x, &space, &f).unwrap();
            assert!(dec.all_certified());
            assert_eq!(dec.reconstruct().unwrap(), f);
            assert!(dec.ratio.is_finite() && dec.ratio > 0.0);
        }
    }

    #[test]
    fn zero_field_rejected() {
        let x = cycle(4);
        let space = GradedSpace::new(&x);
        let grid = TimeGrid::new(0.1, 10.0, 2.0).unwrap();
        let f = SpaceTimeField::zeros(space.dims(), &grid);
        assert!(matches!(atomic_decompose(&x, &space, &f), Err(Error::ZeroField)));
    }
}
