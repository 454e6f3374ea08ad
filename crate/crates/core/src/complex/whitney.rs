use serde::{Deserialize, Serialize};

use super::{Ball, MetricMeasureComplex};
use crate::error::{Error, Result};

/// Ratio between a Whitney ball radius and the distance of its center to the
/// complement. Any value in `(1/4, 1/2]` gives `2B ⊆ O` and `4B ∩ O^c ≠ ∅`
/// for open balls.
pub const WHITNEY_RATIO: f64 = 1.0 / 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub balls: Vec<Ball>,
    /// Largest number of balls containing a single vertex.
    pub max_overlap: usize,
}

/// Greedy Whitney covering of a proper nonempty vertex subset.
///
/// Repeatedly picks the uncovered vertex farthest from the complement and
/// emits the ball of radius `WHITNEY_RATIO * rho(x, O^c)` around it.
pub fn whitney_decompose(x: &MetricMeasureComplex, subset: &[usize]) -> Result<WhitneyCover> {
    let n = x.num_vertices();
    let mut in_set = vec![false; n];
    for &v in subset {
        if v >= n {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        in_set[v] = true;
    }
    let size = in_set.iter().filter(|&&b| b).count();
    if size == 0 {
        return Err(Error::InvalidSubset("subset is empty".into()));
    }
    if size == n {
        return Err(Error::InvalidSubset("subset is the whole vertex set".into()));
    }
    Ok(whitney_from_mask(x, &in_set))
}

pub(crate) fn whitney_from_mask(x: &MetricMeasureComplex, in_set: &[bool]) -> WhitneyCover {
    let n = x.num_vertices();
    let mut candidates: Vec<(f64, usize)> =
        (0..n).filter(|&v| in_set[v]).map(|v| (x.distance_to_complement(v, in_set), v)).collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut covered = vec![false; n];
    let mut overlap = vec![0usize; n];
    let mut balls = Vec::new();
    for (delta, v) in candidates {
        if covered[v] {
            continue;
        }
        let ball = Ball::new(v, WHITNEY_RATIO * delta);
        for &(_, y) in &x.by_distance(v)[..x.ball_len(v, ball.radius)] {
            covered[y] = true;
            overlap[y] += 1;
        }
        balls.push(ball);
    }
    WhitneyCover { balls, max_overlap: overlap.into_iter().max().unwrap_or(0) }
}
