use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::operators::{GradedForm, HodgeOperators};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszVariant {
    /// `D Δ^{-1/2} = sign(D)`.
    Full,
    /// `d Δ^{-1/2}`.
    DSide,
    /// `d* Δ^{-1/2}`.
    DstarSide,
}

impl FromStr for RieszVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "d_side" | "d" => Ok(Self::DSide),
            "dstar_side" | "dstar" => Ok(Self::DstarSide),
            _ => Err(Error::Schema(format!("unknown Riesz variant `{s}`"))),
        }
    }
}

impl fmt::Display for RieszVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::DSide => "d_side",
            Self::DstarSide => "dstar_side",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RieszOutput {
    pub form: GradedForm,
    /// Norm of the harmonic component of the input, which every variant drops.
    pub dropped_harmonic_norm: f64,
}

/// Riesz and Hodge–Riesz transforms, defined on the range of `D`.
pub fn riesz_transform(
    spectrum: &SpectralDecomposition,
    ops: &HodgeOperators,
    f: &GradedForm,
    variant: RieszVariant,
) -> RieszOutput {
    let c = spectrum.coefficients(f.values());
    let mut harmonic = 0.0;
    let mut scaled = c.clone();
    for (i, s) in scaled.iter_mut().enumerate() {
        let l = spectrum.eigenvalues()[i];
        if spectrum.is_null(i) {
            harmonic += s.norm_sqr();
            *s = Complex64::new(0.0, 0.0);
        } else if variant == RieszVariant::Full {
            *s *= l.signum();
        } else {
            *s /= l.abs();
        }
    }
    let g = spectrum.synthesize(&scaled);
    let form = match variant {
        RieszVariant::Full => g,
        RieszVariant::DSide => ops.d.apply(&g),
        RieszVariant::DstarSide => ops.dstar.apply(&g),
    };
    RieszOutput { form, dropped_harmonic_norm: harmonic.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    #[test]
    fn p2_one_form() {
        let ops = HodgeOperators::new(&p2());
        let s = SpectralDecomposition::new(&ops);
        let f = GradedForm::in_degree(ops.space.dims(), 1, &[1.0]);
        let r = riesz_transform(&s, &ops, &f, RieszVariant::Full);
        let h = 1.0 / 2f64.sqrt();
        assert!((r.form.degree(0)[0].re + h).abs() < 1e-12);
        assert!((r.form.degree(0)[1].re - h).abs() < 1e-12);
        assert!(r.form.degree(1)[0].norm() < 1e-12);
        assert!((ops.space.norm(&r.form) - 1.0).abs() < 1e-12);
        assert!(r.dropped_harmonic_norm < 1e-12);
    }

    #[test]
    fn harmonic_is_dropped() {
        let ops = HodgeOperators::new(&cycle(4));
        let s = SpectralDecomposition::new(&ops);
        let f = GradedForm::in_degree(ops.space.dims(), 0, &[1.0; 4]);
        let r = riesz_transform(&s, &ops, &f, RieszVariant::Full);
        assert!(ops.space.norm(&r.form) < 1e-12);
        assert!((r.dropped_harmonic_norm - 2.0).abs() < 1e-12);
        assert_eq!("dstar".parse::<RieszVariant>().unwrap(), RieszVariant::DstarSide);
    }
}
