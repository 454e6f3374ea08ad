use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{hodge_decompose, GradedForm};
use crate::HodgeSystem;

/// Subspace a battery is projected to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    #[default]
    #[serde(rename = "range_D")]
    RangeDirac,
    #[serde(rename = "range_d")]
    RangeD,
    #[serde(rename = "range_dstar")]
    RangeDstar,
    #[serde(rename = "any")]
    Any,
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "range_D" => Ok(Self::RangeDirac),
            "range_d" => Ok(Self::RangeD),
            "range_dstar" => Ok(Self::RangeDstar),
            "any" => Ok(Self::Any),
            _ => Err(Error::Schema(format!("unknown constraint `{s}`"))),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RangeDirac => "range_D",
            Self::RangeD => "range_d",
            Self::RangeDstar => "range_dstar",
            Self::Any => "any",
        })
    }
}

/// Seeded standard Gaussian coefficients per cell, projected onto the
/// constraint space and normalized to unit `L²`.
pub fn generate_battery(sys: &HodgeSystem, count: usize, seed: u64, constraint: Constraint) -> Result<Vec<GradedForm>> {
    if count == 0 {
        return Err(Error::EmptyBattery);
    }
    let space = sys.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let values: Vec<Complex64> =
            (0..space.total_dim()).map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
        let raw = GradedForm::from_values(space.dims(), values);
        let projected = match constraint {
            Constraint::Any => raw.clone(),
            Constraint::RangeDirac => sys.spectrum.range_part(&raw),
            Constraint::RangeD => hodge_decompose(&sys.spectrum, &sys.ops, &raw).exact,
            Constraint::RangeDstar => hodge_decompose(&sys.spectrum, &sys.ops, &raw).coexact,
        };
        let norm = space.norm(&projected);
        if norm <= 1e-10 * space.norm(&raw) {
            return Err(Error::TrivialConstraint(constraint.to_string()));
        }
        out.push(projected.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    Ok(out)
}
