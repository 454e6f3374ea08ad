use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Symbol families of the functional calculus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    /// `z^N e^{-z²}`; `N = 0` is the heat symbol.
    PowerHeat { power: u32 },
    /// `z^N (1 + i z)^{-α}`, or `z^N (1 - i z)^{-α}` when `conjugate`.
    Resolvent { power: u32, alpha: f64, conjugate: bool },
    /// `z^N (1 + z²)^{-β}`.
    Rational { power: u32, beta: f64 },
    /// The constant 1.
    One,
    /// `sign(Re z)`, zero on the imaginary axis.
    Sign,
    /// `sign(Re z) ψ(z)`.
    SignTimes(Box<Symbol>),
    /// `ψ(z) / c_+` for `Re z > 0` and `ψ(z) / c_-` for `Re z < 0`.
    Scaled { inner: Box<Symbol>, plus: Complex64, minus: Complex64 },
}

impl Symbol {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::PowerHeat { power } => z.powu(*power) * (-z * z).exp(),
            Symbol::Resolvent { power, alpha, conjugate } => {
                let base = if *conjugate { ONE - I * z } else { ONE + I * z };
                z.powu(*power) * base.powf(-*alpha)
            }
            Symbol::Rational { power, beta } => z.powu(*power) * (ONE + z * z).powf(-*beta),
            Symbol::One => ONE,
            Symbol::Sign => Complex64::new(sign(z.re), 0.0),
            Symbol::SignTimes(inner) => inner.eval(z) * sign(z.re),
            Symbol::Scaled { inner, plus, minus } => {
                if z.re > 0.0 {
                    inner.eval(z) / plus
                } else if z.re < 0.0 {
                    inner.eval(z) / minus
                } else {
                    inner.eval(z) / (0.5 * (plus + minus))
                }
            }
        }
    }

    /// Decay orders `(σ, τ)`: `|ψ(z)| ≲ min(|z|^σ, |z|^{-τ})`.
    pub fn decay(&self) -> (f64, f64) {
        match self {
            Symbol::PowerHeat { power } => (*power as f64, f64::INFINITY),
            Symbol::Resolvent { power, alpha, .. } => (*power as f64, alpha - *power as f64),
            Symbol::Rational { power, beta } => (*power as f64, 2.0 * beta - *power as f64),
            Symbol::One | Symbol::Sign => (0.0, 0.0),
            Symbol::SignTimes(inner) | Symbol::Scaled { inner, .. } => inner.decay(),
        }
    }

    /// Canonical name accepted by [`FromStr`].
    pub fn name(&self) -> String {
        match self {
            Symbol::PowerHeat { power: 0 } => "heat".into(),
            Symbol::PowerHeat { power: 1 } => "zexp".into(),
            Symbol::PowerHeat { power } => format!("zexp:{power}"),
            Symbol::Resolvent { power, alpha, conjugate } => {
                format!("{}:{power}:{alpha}", if *conjugate { "resc" } else { "res" })
            }
            Symbol::Rational { power, beta } => format!("rat:{power}:{beta}"),
            Symbol::One => "one".into(),
            Symbol::Sign => "sign".into(),
            Symbol::SignTimes(inner) => format!("sign*{}", inner.name()),
            Symbol::Scaled { inner, plus, minus } => {
                format!("scaled({};{};{})", inner.name(), plus, minus)
            }
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A symbol with its decay metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolFunction {
    pub symbol: Symbol,
    pub name: String,
    pub sigma: f64,
    pub tau: f64,
    /// Sector half-angle; metadata only, the spectrum of `D` is real.
    pub theta: f64,
}

impl SymbolFunction {
    pub fn new(symbol: Symbol) -> Self {
        let (sigma, tau) = symbol.decay();
        Self { name: symbol.name(), symbol, sigma, tau, theta: std::f64::consts::FRAC_PI_4 }
    }

    pub fn heat() -> Self {
        Self::new(Symbol::PowerHeat { power: 0 })
    }

    /// `z e^{-z²}`.
    pub fn zexp() -> Self {
        Self::new(Symbol::PowerHeat { power: 1 })
    }

    pub fn power_heat(power: u32) -> Self {
        Self::new(Symbol::PowerHeat { power })
    }

    pub fn resolvent(power: u32, alpha: f64) -> Self {
        Self::new(Symbol::Resolvent { power, alpha, conjugate: false })
    }

    pub fn resolvent_conjugate(power: u32, alpha: f64) -> Self {
        Self::new(Symbol::Resolvent { power, alpha, conjugate: true })
    }

    pub fn rational(power: u32, beta: f64) -> Self {
        Self::new(Symbol::Rational { power, beta })
    }

    pub fn one() -> Self {
        Self::new(Symbol::One)
    }

    pub fn sign() -> Self {
        Self::new(Symbol::Sign)
    }

    pub fn sign_times(inner: &SymbolFunction) -> Self {
        Self::new(Symbol::SignTimes(Box::new(inner.symbol.clone())))
    }

    pub fn scaled(inner: &SymbolFunction, plus: Complex64, minus: Complex64) -> Self {
        let mut out = Self::new(Symbol::Scaled { inner: Box::new(inner.symbol.clone()), plus, minus });
        out.theta = inner.theta;
        out
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.symbol.eval(Complex64::new(x, 0.0))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.symbol.eval(z)
    }

    /// `ψ(0) = 0`, so `ψ(tD)` annihilates harmonic forms.
    pub fn vanishes_at_zero(&self) -> bool {
        self.sigma > 0.0
    }

    /// Member of some `Ψ_{σ,τ}` with `σ, τ > 0`.
    pub fn is_psi_class(&self) -> bool {
        self.sigma > 0.0 && self.tau > 0.0
    }

    pub fn value_at_zero(&self) -> Complex64 {
        if self.vanishes_at_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.eval(0.0)
        }
    }

    /// `sup |ψ|` on the real axis, sampled on a dense logarithmic grid.
    pub fn sup_norm_real(&self) -> f64 {
        let mut best = self.value_at_zero().norm();
        for i in 0..=1600 {
            let x = 10f64.powf(-8.0 + i as f64 * 0.01);
            best = best.max(self.eval(x).norm()).max(self.eval(-x).norm());
        }
        best
    }

    /// Smallest `C` with `|ψ(x)| ≤ C min(|x|^σ, |x|^{-τ'})` on a log grid
    /// over `[1e-4, 1e4]`, where `τ' = min(τ, σ + 4)` caps the infinite
    /// orders of Gaussian symbols. Returns `(C, τ')`.
    pub fn fitted_decay_constant(&self) -> (f64, f64) {
        let tau = self.tau.min(self.sigma + 4.0);
        let mut c: f64 = 0.0;
        for i in 0..=800 {
            let x = 10f64.powf(-4.0 + i as f64 * 0.01);
            let envelope = x.powf(self.sigma).min(x.powf(-tau));
            let m = self.eval(x).norm().max(self.eval(-x).norm());
            c = c.max(m / envelope);
        }
        (c, tau)
    }
}

impl fmt::Display for SymbolFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for SymbolFunction {
    type Err = Error;

    /// Names: `one`, `heat`, `zexp`, `zexp:N`, `res:N:alpha`, `resc:N:alpha`,
    /// `rat:N:beta`, `sign`, `sign*<name>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SymbolParse(s.to_string());
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("sign*") {
            let inner: SymbolFunction = rest.parse()?;
            return Ok(SymbolFunction::sign_times(&inner));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let int = |p: &str| -> Result<u32> { p.parse::<u32>().ok().filter(|&n| n <= 64).ok_or_else(bad) };
        let real = |p: &str| -> Result<f64> {
            p.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0 && *v <= 256.0).ok_or_else(bad)
        };
        match parts.as_slice() {
            ["heat"] => Ok(Self::heat()),
            ["sign"] => Ok(Self::sign()),
            ["one"] => Ok(Self::one()),
            ["zexp"] => Ok(Self::zexp()),
            ["zexp", n] => Ok(Self::power_heat(int(n)?)),
            ["res", n, a] => Ok(Self::resolvent(int(n)?, real(a)?)),
            ["resc", n, a] => Ok(Self::resolvent_conjugate(int(n)?, real(a)?)),
            ["rat", n, b] => Ok(Self::rational(int(n)?, real(b)?)),
            _ => Err(bad()),
        }
    }
}
