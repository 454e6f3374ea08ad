use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Estimate, Fit, ProbeReport, Sample};
use crate::error::{Error, Result};
use crate::HodgeSystem;

/// Requested Gaussian envelope `|p_t(x,y)| ≤ C V(x,√t)^{-1} e^{-c ρ²/t}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub big_c: f64,
    pub c: f64,
}

impl Default for GaussianEnvelope {
    fn default() -> Self {
        Self { big_c: 4.0, c: 0.05 }
    }
}

/// `t` from the squared shortest edge to the squared diameter, 8 points
/// per decade. Below the edge scale a discrete kernel is linear in `t`
/// and no Gaussian bound can hold.
pub fn default_gaussian_times(sys: &HodgeSystem) -> Vec<f64> {
    let x = &sys.complex;
    let lo = x.min_edge_length().unwrap_or(1.0).powi(2);
    let hi = x.diameter().powi(2).max(4.0 * lo);
    let n = ((hi / lo).log10() * 8.0).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect()
}

/// Kernel of `e^{-tΔ_k}` against the weighted measure: the column of `c'` is
/// the heat evolution of the indicator of `c'` divided by `w(c')`.
pub fn heat_kernel(sys: &HodgeSystem, degree: usize, t: f64) -> Result<DMatrix<f64>> {
    let space = sys.space();
    let dims = space.dims();
    if degree >= dims.len() || dims[degree] == 0 {
        return Err(Error::Schema(format!("complex has no {degree}-cells")));
    }
    let (offset, n) = (space.offsets()[degree], dims[degree]);
    let spectrum = &sys.spectrum;
    let vk = spectrum.vectors().rows(offset, n).into_owned();
    let mut scaled = vk.clone();
    for (i, mut col) in scaled.column_iter_mut().enumerate() {
        let l = spectrum.eigenvalues()[i];
        col *= (-t * l * l).exp();
    }
    let mut e = scaled * vk.transpose();
    let s = &spectrum.sqrt_weights()[offset..offset + n];
    for r in 0..n {
        for c in 0..n {
            e[(r, c)] /= s[r] * s[c];
        }
    }
    Ok(e)
}

/// Fits `log(|p_t(x,y)| V(x,√t))` against `ρ²/t` over all cell pairs and
/// times, and checks the requested envelope on every sample. For `k > 0`,
/// `ρ` between cells is the least vertex distance and `V(x,√t)` is the
/// smallest ball volume among the vertices of `x`.
pub fn gaussian_kernel_probe(
    sys: &HodgeSystem,
    degree: usize,
    t_grid: &[f64],
    envelope: &GaussianEnvelope,
) -> Result<ProbeReport> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::EmptyGrid);
    }
    let x = &sys.complex;
    let space = sys.space();
    let offset = *space.offsets().get(degree).unwrap_or(&0);
    let n = *space.dims().get(degree).unwrap_or(&0);
    let verts = |c: usize| space.cell_vertices(offset + c);
    let rho = |a: usize, b: usize| {
        verts(a)
            .iter()
            .flat_map(|&u| verts(b).iter().map(move |&v| (u, v)))
            .map(|(u, v)| x.distance(u, v))
            .fold(f64::INFINITY, f64::min)
    };
    let mut samples = Vec::new();
    let mut diagonal_positive = true;
    for &t in t_grid {
        let p = heat_kernel(sys, degree, t)?;
        let vol: Vec<f64> = (0..n)
            .map(|c| verts(c).iter().map(|&v| x.volume_unchecked(v, t.sqrt())).fold(f64::INFINITY, f64::min))
            .collect();
        for a in 0..n {
            if degree == 0 && p[(a, a)] <= 0.0 {
                diagonal_positive = false;
            }
            for b in 0..n {
                let d = rho(a, b);
                let big_x = d * d / t;
                samples.push(Sample {
                    params: vec![a as f64, b as f64, t],
                    abscissa: big_x,
                    value: p[(a, b)].abs() * vol[a],
                    bound: envelope.big_c * (-envelope.c * big_x).exp(),
                    in_fit: false,
                });
            }
        }
    }
    let top = samples.iter().map(|s| s.value).fold(0.0, f64::max);
    for s in &mut samples {
        s.in_fit = s.value > 1e-12 * top;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.in_fit).map(|s| (s.abscissa, s.value.ln())).unzip();
    let fit = Fit::linear("log(pV)-vs-rho2/t", &xs, &ys);
    let c_hat = fit.as_ref().map_or(f64::NAN, |f| -f.slope);
    // Smallest C making the fitted rate an upper envelope of the fit samples.
    let big_c_hat =
        samples.iter().filter(|s| s.in_fit).map(|s| s.value * (c_hat * s.abscissa).exp()).fold(0.0, f64::max);
    let bounds_ok = samples.iter().all(|s| s.value <= s.bound * (1.0 + 1e-12));
    Ok(ProbeReport {
        probe: "gaussian".into(),
        family: format!("heat kernel, degree {degree}"),
        sets: None,
        estimates: vec![
            Estimate { name: "c".into(), value: c_hat, requested: Some(envelope.c) },
            Estimate { name: "C".into(), value: big_c_hat, requested: Some(envelope.big_c) },
            Estimate { name: "residual".into(), value: fit.as_ref().map_or(f64::NAN, |f| f.residual), requested: None },
        ],
        fits: fit.into_iter().collect(),
        samples,
        tolerance: 0.0,
        bounds_ok,
        pass: bounds_ok && diagonal_positive && c_hat > 0.0,
    })
}
