use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SymbolFunction;
use crate::error::{Error, Result};

// Gauss–Kronrod (7, 15) nodes and weights as tabulated.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let pair = f(c - x) + f(c + x);
        k += pair * WGK[i];
        if i % 2 == 1 {
            g += pair * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature of `f` over `[a, b]`.
/// Returns the integral and the estimated absolute error.
pub(crate) fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> (Complex64, f64) {
    const PANELS: usize = 32;
    const MAX_INTERVALS: usize = 4000;
    let mut intervals: Vec<(f64, f64, Complex64, f64)> = (0..PANELS)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / PANELS as f64;
            let hi = a + (b - a) * (i + 1) as f64 / PANELS as f64;
            let (v, e) = kronrod(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let total: Complex64 = intervals.iter().map(|x| x.2).sum();
        let err: f64 = intervals.iter().map(|x| x.3).sum();
        if err <= tol.max(1e-15 * total.norm()) || intervals.len() >= MAX_INTERVALS {
            return (total, err);
        }
        let (idx, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&f, lo, mid);
        let (v2, e2) = kronrod(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// `∫_0^∞ g(t) dt/t` for an integrand decaying like `t^{low}` at 0 and
/// `t^{-high}` at infinity, computed in `u = ln t`.
pub fn integrate_log_axis(g: impl Fn(f64) -> Complex64, low: f64, high: f64) -> (Complex64, f64) {
    let lower = if low > 0.0 { -(38.0 / low).clamp(10.0, 700.0) } else { -700.0 };
    let upper = if high.is_infinite() {
        6.0
    } else if high > 0.0 {
        (38.0 / high).clamp(10.0, 700.0)
    } else {
        700.0
    };
    integrate(|u| g(u.exp()), lower, upper, 1e-14)
}

/// A Calderón pair scaled so that `∫ ψ(±t) ψ̃(±t) dt/t = 1` on each half-axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalderonPair {
    pub psi: SymbolFunction,
    /// `ψ̃ / c_±`.
    pub psi_tilde: SymbolFunction,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub quadrature_error: f64,
}

/// `c_± = ∫_0^∞ ψ(±t) ψ̃(±t) dt/t` by adaptive quadrature, and `ψ̃` rescaled
/// separately on each half-axis.
pub fn calderon_normalize(psi: &SymbolFunction, psi_tilde: &SymbolFunction) -> Result<CalderonPair> {
    for f in [psi, psi_tilde] {
        if !f.is_psi_class() {
            return Err(Error::NotPsiClass(f.name.clone()));
        }
    }
    let low = psi.sigma + psi_tilde.sigma;
    let high = psi.tau + psi_tilde.tau;
    let mut constants = [Complex64::new(0.0, 0.0); 2];
    let mut error: f64 = 0.0;
    for (c, sign) in constants.iter_mut().zip([1.0, -1.0]) {
        let (v, e) = integrate_log_axis(|t| psi.eval(sign * t) * psi_tilde.eval(sign * t), low, high);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Normalization("diverges", psi.name.clone()));
        }
        if v.norm() < 1e-12 {
            return Err(Error::Normalization("vanishes", psi.name.clone()));
        }
        *c = v;
        error = error.max(e);
    }
    Ok(CalderonPair {
        psi: psi.clone(),
        psi_tilde: SymbolFunction::scaled(psi_tilde, constants[0], constants[1]),
        c_plus: constants[0],
        c_minus: constants[1],
        quadrature_error: error,
    })
}
