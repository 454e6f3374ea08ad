use serde::{Deserialize, Serialize};

use crate::calculus::TimeGrid;
use crate::error::{Error, Result};
use crate::hardy::{hardy_norm, maximal_norm, molecular_decompose, MaximalVariant, MoleculeOptions};
use crate::operators::GradedForm;
use crate::HodgeSystem;

/// Inputs with `norm_in` below this are skipped.
const SKIP_BELOW: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub ratios: Vec<Option<f64>>,
    pub max: f64,
    pub median: f64,
    /// Battery index attaining the maximum.
    pub argmax: usize,
    pub skipped: usize,
}

/// `max ‖T f‖_out / ‖f‖_in` over a battery.
pub fn boundedness_probe(
    battery: &[GradedForm],
    op: impl Fn(&GradedForm) -> Result<GradedForm>,
    norm_in: impl Fn(&GradedForm) -> Result<f64>,
    norm_out: impl Fn(&GradedForm) -> Result<f64>,
) -> Result<BoundednessReport> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    let mut ratios = Vec::with_capacity(battery.len());
    for f in battery {
        let n = norm_in(f)?;
        if n < SKIP_BELOW {
            ratios.push(None);
        } else {
            ratios.push(Some(norm_out(&op(f)?)? / n));
        }
    }
    let mut kept: Vec<(usize, f64)> = ratios.iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r))).collect();
    let skipped = battery.len() - kept.len();
    if kept.is_empty() {
        return Ok(BoundednessReport { ratios, max: 0.0, median: 0.0, argmax: 0, skipped });
    }
    let (argmax, max) = kept.iter().copied().fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    kept.sort_by(|a, b| a.1.total_cmp(&b.1));
    let m = kept.len();
    let median = if m % 2 == 1 { kept[m / 2].1 } else { 0.5 * (kept[m / 2 - 1].1 + kept[m / 2].1) };
    Ok(BoundednessReport { ratios, max, median, argmax, skipped })
}

/// Range of one ratio between two characterizations over a battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub numerator: String,
    pub denominator: String,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl PairRatio {
    fn new(numerator: &str, denominator: &str, num: &[f64], den: &[f64]) -> Self {
        let mut r: Vec<f64> = num.iter().zip(den).map(|(a, b)| a / b).collect();
        r.sort_by(f64::total_cmp);
        let m = r.len();
        Self {
            numerator: numerator.into(),
            denominator: denominator.into(),
            min: r[0],
            max: r[m - 1],
            median: if m % 2 == 1 { r[m / 2] } else { 0.5 * (r[m / 2 - 1] + r[m / 2]) },
        }
    }

    /// `max / min`.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalenceReport {
    pub hardy: Vec<f64>,
    pub molecular: Vec<f64>,
    pub maximal: Vec<f64>,
    pub pairs: Vec<PairRatio>,
    /// Largest molecule slack seen while decomposing the battery.
    pub max_molecule_slack: f64,
}

/// `hardy_norm(f, 1)`, molecular `Σ|λ|` and `maximal_norm(f)` over a battery
/// of range(D) forms, with the pairwise ratio ranges.
pub fn norm_equivalence_probe(
    sys: &HodgeSystem,
    battery: &[GradedForm],
    grid: &TimeGrid,
    alpha: f64,
    c: f64,
) -> Result<NormEquivalenceReport> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    let (mut hardy, mut molecular, mut maximal) = (Vec::new(), Vec::new(), Vec::new());
    let mut max_slack: f64 = 0.0;
    for f in battery {
        hardy.push(hardy_norm(sys, f, 1.0, None, grid)?.value);
        let dec = molecular_decompose(sys, f, &MoleculeOptions::default(), grid)?;
        max_slack = max_slack.max(dec.max_slack);
        molecular.push(dec.sum_abs_lambda);
        maximal.push(maximal_norm(sys, f, alpha, c, grid, MaximalVariant::Plain)?);
    }
    let pairs = vec![
        PairRatio::new("molecular", "hardy", &molecular, &hardy),
        PairRatio::new("maximal", "hardy", &maximal, &hardy),
        PairRatio::new("molecular", "maximal", &molecular, &maximal),
    ];
    Ok(NormEquivalenceReport { hardy, molecular, maximal, pairs, max_molecule_slack: max_slack })
}
