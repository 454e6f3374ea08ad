use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::calculus::TimeGrid;
use crate::complex::io::load_complex;
use crate::complex::{generate_complex, GeneratorSpec, MetricMeasureComplex};
use crate::error::{Error, Result};
use crate::probes::GaussianEnvelope;

/// Where the complex comes from. Relative file paths resolve against the
/// config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexSource {
    Generator(GeneratorSpec),
    File(PathBuf),
}

impl ComplexSource {
    pub fn load(&self, base: &Path) -> Result<MetricMeasureComplex> {
        match self {
            Self::Generator(spec) => generate_complex(spec),
            Self::File(p) => load_complex(base.join(p)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    Exactness,
    Calderon,
    HardyNorms,
    TentAtoms,
    Molecules,
    Maximal,
    Riesz,
    NormEquivalence,
    Offdiag,
    Gaffney,
    Composition,
    Gaussian,
    Boundedness,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Exactness => "exactness",
            Self::Calderon => "calderon",
            Self::HardyNorms => "hardy_norms",
            Self::TentAtoms => "tent_atoms",
            Self::Molecules => "molecules",
            Self::Maximal => "maximal",
            Self::Riesz => "riesz",
            Self::NormEquivalence => "norm_equivalence",
            Self::Offdiag => "offdiag",
            Self::Gaffney => "gaffney",
            Self::Composition => "composition",
            Self::Gaussian => "gaussian",
            Self::Boundedness => "boundedness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constraint: Constraint,
}

fn default_count() -> usize {
    20
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self { count: default_count(), seed: 0, constraint: Constraint::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSettings {
    /// Vertex names; defaults to a diametral pair.
    #[serde(default)]
    pub e: Option<Vec<String>>,
    #[serde(default)]
    pub f: Option<Vec<String>>,
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default = "default_order")]
    pub order: f64,
    #[serde(default = "default_gaffney")]
    pub gaffney_family: String,
    #[serde(default)]
    pub degree: usize,
    #[serde(default)]
    pub envelope: GaussianEnvelope,
}

fn default_family() -> String {
    "res:1:2".into()
}

fn default_order() -> f64 {
    1.0
}

fn default_gaffney() -> String {
    "heat".into()
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            e: None,
            f: None,
            family: default_family(),
            order: default_order(),
            gaffney_family: default_gaffney(),
            degree: 0,
            envelope: GaussianEnvelope::default(),
        }
    }
}

/// A JSON experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub complex: ComplexSource,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    /// Symbol name for Hardy norms; the default depends on `p` and `β`.
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub grid: Option<TimeGrid>,
    #[serde(default)]
    pub battery: BatterySpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Space-time ball constant of the maximal function; defaults to
    /// `α/(1+2α)`.
    #[serde(default)]
    pub maximal_c: Option<f64>,
    /// Relative band for frozen constants.
    #[serde(default = "default_band")]
    pub band: f64,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub probes: ProbeSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_p() -> Vec<f64> {
    vec![1.0]
}

fn default_alpha() -> f64 {
    1.0
}

fn default_band() -> f64 {
    0.3
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&p) = self.p.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
            return Err(Error::InvalidExponent(p));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Schema(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.band > 0.0 && self.band.is_finite()) {
            return Err(Error::Schema(format!("band must be positive, got {}", self.band)));
        }
        if self.battery.count == 0 {
            return Err(Error::EmptyBattery);
        }
        Ok(())
    }

    pub fn maximal_c(&self) -> f64 {
        self.maximal_c.unwrap_or(self.alpha / (1.0 + 2.0 * self.alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(
            r#"{"id": "p2", "complex": {"generator": {"kind": "path", "size": [2]}}, "experiments": ["spectrum"]}"#,
        )
        .unwrap();
        assert_eq!(c.p, vec![1.0]);
        assert_eq!(c.battery.count, 20);
        assert_eq!(c.maximal_c(), 1.0 / 3.0);
        assert_eq!(c.experiments, vec![Experiment::Spectrum]);
    }

    #[test]
    fn rejects_bad_fields() {
        let base = r#""id": "x", "complex": {"generator": {"kind": "cycle", "size": [4]}}"#;
        assert!(ExperimentConfig::parse(&format!("{{{base}, \"bogus\": 1}}")).is_err());
        assert!(ExperimentConfig::parse(&format!("{{{base}, \"p\": [0.5]}}")).is_err());
        assert!(ExperimentConfig::parse(&format!("{{{base}, \"battery\": {{\"count\": 0}}}}")).is_err());
        assert!(ExperimentConfig::parse(&format!("{{{base}, \"experiments\": [\"nope\"]}}")).is_err());
    }
}
