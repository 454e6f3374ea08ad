use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{block_norm, spectral_norm, Estimate, Fit, ProbeReport, Sample, SetPair, EXPONENT_TOLERANCE};
use crate::calculus::{SpectralDecomposition, SymbolFunction};
use crate::error::{Error, Result};
use crate::operators::HodgeOperators;
use crate::HodgeSystem;

/// Block norms below this fraction of the global norm are rounding noise.
const NOISE_FLOOR: f64 = 1e-11;

/// `ρ · 10^{-3 .. 0}`, 20 points per decade.
pub fn default_z_grid(rho: f64) -> Vec<f64> {
    (0..=60).map(|i| rho * 10f64.powf(-3.0 + i as f64 / 20.0)).collect()
}

/// `ρ · 2^{-6 .. 0}`, 8 points per octave.
pub fn default_t_grid(rho: f64) -> Vec<f64> {
    (0..=48).map(|i| rho * 2f64.powf(-6.0 + i as f64 / 8.0)).collect()
}

/// Times `t` around the middle of the spectrum and `s = u t` for
/// `u ∈ [10^{-2}, 10^2]`, 10 points per decade.
pub fn default_composition_grids(spectrum: &SpectralDecomposition) -> (Vec<f64>, Vec<f64>) {
    let mid = match spectrum.lambda_min_positive() {
        Some(min) => 1.0 / (min * spectrum.lambda_max()).sqrt(),
        None => 1.0,
    };
    let ts = vec![mid / 2.0, mid, 2.0 * mid];
    let us: Vec<f64> = (0..=40).map(|i| 10f64.powf(-2.0 + i as f64 / 10.0)).collect();
    (us, ts)
}

fn checked(psi: &SymbolFunction, x: f64) -> Result<Complex64> {
    let v = psi.eval(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::SymbolUndefined { name: psi.name.clone(), value: x })
    }
}

fn function_of_d(spectrum: &SpectralDecomposition, psi: &SymbolFunction, z: f64) -> Result<(DMatrix<Complex64>, f64)> {
    let mut global: f64 = 0.0;
    for &l in spectrum.eigenvalues() {
        global = global.max(checked(psi, z * l)?.norm());
    }
    Ok((spectrum.euclidean_operator(|l, _| psi.eval(z * l)), global))
}

/// `OD_z(N)` probe for `T_z = ψ(zD)`: block norms `‖χ_F T_z χ_E‖` and the
/// slope of `log ‖·‖` against `log(|z|/ρ)` on `|z| ≤ ρ/4`.
pub fn offdiag_probe(
    sys: &HodgeSystem,
    psi: &SymbolFunction,
    pair: &SetPair,
    z_grid: &[f64],
    requested_order: f64,
) -> Result<ProbeReport> {
    let space = sys.space();
    let rows = SetPair::cells(space, &pair.f);
    let cols = SetPair::cells(space, &pair.e);
    let mut samples = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let (m, global) = function_of_d(&sys.spectrum, psi, z)?;
        let value = block_norm(&m, &rows, &cols);
        let ratio = z.abs() / pair.rho;
        samples.push(Sample {
            params: vec![z],
            abscissa: ratio.ln(),
            value,
            bound: global,
            in_fit: ratio <= 0.25 && value > NOISE_FLOOR * global,
        });
    }
    Ok(finish_power_fit("offdiag", &psi.name, Some(pair.clone()), samples, requested_order))
}

fn finish_power_fit(
    probe: &str,
    family: &str,
    sets: Option<SetPair>,
    samples: Vec<Sample>,
    requested: f64,
) -> ProbeReport {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.in_fit).map(|s| (s.abscissa, s.value.ln())).unzip();
    let fit = Fit::linear("log-log", &xs, &ys);
    let slope = fit.as_ref().map_or(f64::NAN, |f| f.slope);
    let bounds_ok = bounds_hold(&samples);
    ProbeReport {
        probe: probe.into(),
        family: family.into(),
        sets,
        estimates: vec![
            Estimate { name: "slope".into(), value: slope, requested: Some(requested) },
            Estimate { name: "C".into(), value: fit.as_ref().map_or(f64::NAN, |f| f.intercept.exp()), requested: None },
        ],
        fits: fit.into_iter().collect(),
        samples,
        tolerance: EXPONENT_TOLERANCE,
        bounds_ok,
        pass: bounds_ok && slope >= requested - EXPONENT_TOLERANCE,
    }
}

fn bounds_hold(samples: &[Sample]) -> bool {
    samples.iter().all(|s| s.value <= s.bound * (1.0 + 1e-9) + 1e-300)
}

/// Families for the Gaffney probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaffneyFamily {
    /// `e^{-t²Δ}`.
    Heat,
    /// `tD e^{-t²Δ}`.
    TDiracHeat,
    /// `t d e^{-t²Δ}`.
    TdHeat,
    /// `t d* e^{-t²Δ}`.
    TdstarHeat,
    /// `(t²Δ)^n e^{-t²Δ}`.
    Powers { n: u32 },
}

impl FromStr for GaffneyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Self::Heat),
            "tD_heat" => Ok(Self::TDiracHeat),
            "td_heat" => Ok(Self::TdHeat),
            "tdstar_heat" => Ok(Self::TdstarHeat),
            _ => s
                .strip_prefix("powers:")
                .and_then(|n| n.parse().ok())
                .map(|n| Self::Powers { n })
                .ok_or_else(|| Error::Schema(format!("unknown Gaffney family `{s}`"))),
        }
    }
}

impl fmt::Display for GaffneyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Heat => f.write_str("heat"),
            Self::TDiracHeat => f.write_str("tD_heat"),
            Self::TdHeat => f.write_str("td_heat"),
            Self::TdstarHeat => f.write_str("tdstar_heat"),
            Self::Powers { n } => write!(f, "powers:{n}"),
        }
    }
}

/// `d` in Euclidean coordinates `M^{1/2} d M^{-1/2}`; its transpose is `d*`.
fn euclidean_d(ops: &HodgeOperators) -> DMatrix<Complex64> {
    let sqrt_w = ops.space.sqrt_weights();
    let offsets = ops.space.offsets();
    let n = sqrt_w.len();
    let mut m = DMatrix::zeros(n, n);
    for b in ops.d.blocks() {
        for (i, j, v) in b.matrix.triplets() {
            let (r, c) = (offsets[b.to] + i, offsets[b.from] + j);
            m[(r, c)] = Complex64::new(v * sqrt_w[r] / sqrt_w[c], 0.0);
        }
    }
    m
}

/// Gaffney probe: fits `log ‖χ_F T_t χ_E‖ ≈ log C - α ρ²/t²` on `t ≤ ρ/4`.
/// Passes when `α > 0` and the fit residual `1 - R²` is below 0.1.
pub fn gaffney_probe(sys: &HodgeSystem, family: GaffneyFamily, pair: &SetPair, t_grid: &[f64]) -> Result<ProbeReport> {
    let space = sys.space();
    let spectrum = &sys.spectrum;
    let rows = SetPair::cells(space, &pair.f);
    let cols = SetPair::cells(space, &pair.e);
    let d = match family {
        GaffneyFamily::TdHeat => Some(euclidean_d(&sys.ops)),
        GaffneyFamily::TdstarHeat => Some(euclidean_d(&sys.ops).adjoint()),
        _ => None,
    };
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::EmptyGrid);
        }
        let heat = |l: f64| (-(t * l) * (t * l)).exp();
        let m = match family {
            GaffneyFamily::Heat => spectrum.euclidean_operator(|l, _| Complex64::new(heat(l), 0.0)),
            GaffneyFamily::TDiracHeat => spectrum.euclidean_operator(|l, _| Complex64::new(t * l * heat(l), 0.0)),
            GaffneyFamily::Powers { n } => {
                spectrum.euclidean_operator(|l, _| Complex64::new((t * l).powi(2 * n as i32) * heat(l), 0.0))
            }
            GaffneyFamily::TdHeat | GaffneyFamily::TdstarHeat => {
                let h = spectrum.euclidean_operator(|l, _| Complex64::new(heat(l), 0.0));
                d.as_ref().expect("built above") * h * Complex64::new(t, 0.0)
            }
        };
        let global = match family {
            GaffneyFamily::TdHeat | GaffneyFamily::TdstarHeat => spectral_norm(&m),
            _ => {
                let mut g: f64 = 0.0;
                for &l in spectrum.eigenvalues() {
                    let s = t * l;
                    g = g.max(match family {
                        GaffneyFamily::Heat => heat(l),
                        GaffneyFamily::TDiracHeat => s.abs() * heat(l),
                        GaffneyFamily::Powers { n } => s.powi(2 * n as i32) * heat(l),
                        _ => unreachable!(),
                    });
                }
                g
            }
        };
        let value = block_norm(&m, &rows, &cols);
        samples.push(Sample {
            params: vec![t],
            abscissa: pair.rho * pair.rho / (t * t),
            value,
            bound: global,
            in_fit: t <= pair.rho / 4.0 && value > NOISE_FLOOR * global.max(1e-300),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.in_fit).map(|s| (s.abscissa, s.value.ln())).unzip();
    let fit = Fit::linear("log-vs-rho2/t2", &xs, &ys);
    let alpha = fit.as_ref().map_or(f64::NAN, |f| -f.slope);
    let residual = fit.as_ref().map_or(f64::NAN, |f| f.residual);
    let bounds_ok = bounds_hold(&samples);
    Ok(ProbeReport {
        probe: "gaffney".into(),
        family: family.to_string(),
        sets: Some(pair.clone()),
        estimates: vec![
            Estimate { name: "alpha".into(), value: alpha, requested: Some(0.0) },
            Estimate { name: "C".into(), value: fit.as_ref().map_or(f64::NAN, |f| f.intercept.exp()), requested: None },
            Estimate { name: "residual".into(), value: residual, requested: Some(0.1) },
        ],
        fits: fit.into_iter().collect(),
        samples,
        tolerance: 0.1,
        bounds_ok,
        pass: bounds_ok && alpha > 0.0 && residual < 0.1,
    })
}

/// `‖ψ(sD) f(D) ψ̃(tD)‖ ≲ ‖f‖_∞ min((s/t)^a, (s/t)^{-b})`. The global norm is
/// the spectral maximum of the product. `u_grid` holds the ratios `s/t`.
#[allow(clippy::too_many_arguments)]
pub fn composition_decay_probe(
    spectrum: &SpectralDecomposition,
    psi: &SymbolFunction,
    psi_tilde: &SymbolFunction,
    f_sym: &SymbolFunction,
    u_grid: &[f64],
    t_grid: &[f64],
    a: f64,
    b: f64,
) -> Result<ProbeReport> {
    let a_max = psi.sigma.min(psi_tilde.tau - 1.0);
    let b_max = psi_tilde.sigma.min(psi.tau - 1.0);
    if !(a >= 0.0 && a <= a_max && b >= 0.0 && b <= b_max) {
        return Err(Error::DecayRequest(format!(
            "(a, b) = ({a}, {b}) exceeds ({a_max}, {b_max}) for `{}` and `{}`",
            psi.name, psi_tilde.name
        )));
    }
    let mut f_sup: f64 = 0.0;
    for &l in spectrum.eigenvalues() {
        f_sup = f_sup.max(checked(f_sym, l)?.norm());
    }
    let bound = psi.sup_norm_real() * f_sup * psi_tilde.sup_norm_real();
    let mut samples = Vec::new();
    for &t in t_grid {
        for &u in u_grid {
            let s = u * t;
            let mut value: f64 = 0.0;
            for &l in spectrum.eigenvalues() {
                let v = checked(psi, s * l)? * f_sym.eval(l) * checked(psi_tilde, t * l)?;
                value = value.max(v.norm());
            }
            samples.push(Sample {
                params: vec![s, t],
                abscissa: u.ln(),
                value,
                bound,
                in_fit: (u <= 0.25 || u >= 4.0) && value > 1e-280,
            });
        }
    }
    let fit_side = |low: bool| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = samples
            .iter()
            .filter(|s| s.in_fit && (s.abscissa < 0.0) == low)
            .map(|s| (s.abscissa, s.value.ln()))
            .unzip();
        Fit::linear(if low { "u<=1/4" } else { "u>=4" }, &xs, &ys)
    };
    let low = fit_side(true);
    let high = fit_side(false);
    let a_hat = low.as_ref().map_or(f64::NAN, |f| f.slope);
    let b_hat = high.as_ref().map_or(f64::NAN, |f| -f.slope);
    let bounds_ok = bounds_hold(&samples);
    Ok(ProbeReport {
        probe: "composition".into(),
        family: format!("{} . {} . {}", psi.name, f_sym.name, psi_tilde.name),
        sets: None,
        estimates: vec![
            Estimate { name: "a".into(), value: a_hat, requested: Some(a) },
            Estimate { name: "b".into(), value: b_hat, requested: Some(b) },
        ],
        fits: low.into_iter().chain(high).collect(),
        samples,
        tolerance: EXPONENT_TOLERANCE,
        bounds_ok,
        pass: bounds_ok && a_hat >= a - EXPONENT_TOLERANCE && b_hat >= b - EXPONENT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures::*;

    #[test]
    fn resolvent_is_contractive_everywhere() {
        let sys = HodgeSystem::new(path(16)).unwrap();
        let pair = SetPair::new(&sys.complex, &[0], &[15]).unwrap();
        let r = offdiag_probe(&sys, &SymbolFunction::resolvent(0, 1.0), &pair, &default_z_grid(pair.rho), 0.0).unwrap();
        assert!(r.bounds_ok);
        assert!(r.samples.iter().all(|s| s.value <= 1.0 + 1e-12 && s.bound <= 1.0 + 1e-12));
    }

    #[test]
    fn p16_resolvent_slope() {
        let sys = HodgeSystem::new(path(16)).unwrap();
        let pair = SetPair::new(&sys.complex, &[0], &[15]).unwrap();
        let psi = SymbolFunction::resolvent(1, 2.0);
        let r = offdiag_probe(&sys, &psi, &pair, &default_z_grid(pair.rho), 1.0).unwrap();
        assert!(r.pass, "slope {:?}", r.estimate("slope"));
    }

    #[test]
    fn p2_heat_entry_closed_form() {
        let sys = HodgeSystem::new(p2()).unwrap();
        let pair = SetPair::new(&sys.complex, &[0], &[1]).unwrap();
        let ts = [0.1, 0.3, 1.0];
        let r = gaffney_probe(&sys, GaffneyFamily::Heat, &pair, &ts).unwrap();
        for (s, &t) in r.samples.iter().zip(&ts) {
            let want = (1.0 - (-2.0 * t * t).exp()) / 2.0;
            assert!((s.value - want).abs() < 1e-13, "{} vs {want}", s.value);
            assert!(s.value <= t * t);
        }
    }

    #[test]
    fn gaffney_all_families_bounded() {
        let sys = HodgeSystem::new(path(16)).unwrap();
        let pair = SetPair::new(&sys.complex, &[0], &[15]).unwrap();
        for fam in ["heat", "tD_heat", "td_heat", "tdstar_heat", "powers:2"] {
            let fam: GaffneyFamily = fam.parse().unwrap();
            let r = gaffney_probe(&sys, fam, &pair, &default_t_grid(pair.rho)).unwrap();
            assert!(r.bounds_ok, "{fam}");
            assert_eq!(fam.to_string().parse::<GaffneyFamily>().unwrap(), fam);
        }
        let r = gaffney_probe(&sys, GaffneyFamily::Heat, &pair, &default_t_grid(pair.rho)).unwrap();
        assert!(r.pass, "{:?}", r.estimates);
    }

    #[test]
    fn composition_matches_spectral_max() {
        let sys = HodgeSystem::new(path(16)).unwrap();
        let z = SymbolFunction::zexp();
        let one = SymbolFunction::one();
        let (us, ts) = default_composition_grids(&sys.spectrum);
        let r = composition_decay_probe(&sys.spectrum, &z, &z, &one, &us, &ts, 1.0, 1.0).unwrap();
        assert!(r.pass, "{:?}", r.estimates);
        let (s, t) = (r.samples[0].params[0], r.samples[0].params[1]);
        let want = sys
            .spectrum
            .eigenvalues()
            .iter()
            .map(|&l| (s * l * (-(s * l).powi(2)).exp() * t * l * (-(t * l).powi(2)).exp()).abs())
            .fold(0.0, f64::max);
        assert!((r.samples[0].value - want).abs() <= 1e-14 * want.max(1e-300));
        let bad = composition_decay_probe(&sys.spectrum, &z, &z, &one, &us, &ts, 2.0, 1.0);
        assert!(matches!(bad, Err(Error::DecayRequest(_))));
    }
}
