use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AdaptedCutoffs;
use crate::calculus::{calderon_normalize, q_transform, s_transform_weighted, SymbolFunction, TimeGrid};
use crate::complex::Ball;
use crate::error::{Error, Result};
use crate::operators::GradedForm;
use crate::tent::atomic_decompose;
use crate::HodgeSystem;

/// Relative tolerance on the identity `a = Op b`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Which operator links `a` to `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoleculeOperator {
    /// `a = D^N b`.
    Dirac,
    /// `a = Δ^N b`, with `r^{2N}` in the bound on `b`.
    Laplacian,
    /// `a = d D^{N-1} b`.
    D,
    /// `a = d* D^{N-1} b`.
    Dstar,
}

impl FromStr for MoleculeOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirac" | "D" => Ok(Self::Dirac),
            "laplacian" | "delta" => Ok(Self::Laplacian),
            "d" => Ok(Self::D),
            "dstar" => Ok(Self::Dstar),
            _ => Err(Error::Schema(format!("unknown molecule operator `{s}`"))),
        }
    }
}

impl fmt::Display for MoleculeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirac => "dirac",
            Self::Laplacian => "laplacian",
            Self::D => "d",
            Self::Dstar => "dstar",
        })
    }
}

fn apply_operator(sys: &HodgeSystem, op: MoleculeOperator, b: &GradedForm, order: u32) -> GradedForm {
    let ops = &sys.ops;
    match op {
        MoleculeOperator::Dirac => ops.dirac.apply_n(b, order),
        MoleculeOperator::Laplacian => ops.laplacian.apply_n(b, order),
        MoleculeOperator::D => ops.d.apply(&ops.dirac.apply_n(b, order.saturating_sub(1))),
        MoleculeOperator::Dstar => ops.dstar.apply(&ops.dirac.apply_n(b, order.saturating_sub(1))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoleculeCertificate {
    pub ball: Ball,
    pub order: u32,
    pub operator: MoleculeOperator,
    /// Atom variant: `b` supported in `B`, no annular tails.
    pub atom: bool,
    /// `‖a − Op b‖ / ‖a‖`.
    pub identity_error: f64,
    pub identity_ok: bool,
    pub support_ok: bool,
    /// `‖χ_k a‖` and `‖χ_k b‖` per annulus (a single entry for atoms).
    pub annulus_a: Vec<f64>,
    pub annulus_b: Vec<f64>,
    pub bound_a: Vec<f64>,
    pub bound_b: Vec<f64>,
    /// Largest measured-to-required ratio.
    pub slack: f64,
    pub l1_norm: f64,
    /// `2 C_D slack`.
    pub l1_bound: f64,
    pub l1_ok: bool,
    pub cutoff_lipschitz: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// What kind of molecule to check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub order: u32,
    pub operator: MoleculeOperator,
    pub atom: bool,
}

impl MoleculeSpec {
    pub fn dirac(order: u32) -> Self {
        Self { order, operator: MoleculeOperator::Dirac, atom: false }
    }
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value / bound
    }
}

/// Checks `a = Op^N b` and the annular decay of `a` and `b` around `B`.
pub fn validate_molecule(
    sys: &HodgeSystem,
    a: &GradedForm,
    b: &GradedForm,
    ball: &Ball,
    spec: &MoleculeSpec,
    tolerance: f64,
) -> Result<MoleculeCertificate> {
    let space = sys.space();
    if a.dims() != space.dims() || b.dims() != space.dims() {
        return Err(Error::ShapeMismatch("molecule does not live on this complex".into()));
    }
    let x = &sys.complex;
    let image = apply_operator(sys, spec.operator, b, spec.order);
    let a_norm = space.norm(a);
    let diff = space.norm(&(a - &image));
    let identity_error = if a_norm > 0.0 { diff / a_norm } else { diff };
    let identity_ok = identity_error <= IDENTITY_TOLERANCE;
    let r = ball.radius;
    let power = match spec.operator {
        MoleculeOperator::Laplacian => 2 * spec.order,
        _ => spec.order,
    };
    let r_pow = r.powi(power as i32);
    let cutoffs = AdaptedCutoffs::new(x, ball);
    let (annulus_a, annulus_b, bound_a, bound_b, support_ok) = if spec.atom {
        let support_ok = b
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm() != 0.0)
            .all(|(i, _)| space.cell_vertices(i).iter().all(|&y| x.in_ball(ball, y)));
        let v = x.ball_volume(ball).powf(-0.5);
        (vec![a_norm], vec![space.norm(b)], vec![v], vec![r_pow * v], support_ok)
    } else {
        let mut out = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), true);
        for (k, chi) in cutoffs.chi.iter().enumerate() {
            let scale = 2f64.powi(k as i32);
            let v = x.volume_unchecked(ball.center, scale * r).powf(-0.5) / scale;
            out.0.push(space.localized_norm(a, chi));
            out.1.push(space.localized_norm(b, chi));
            out.2.push(v);
            out.3.push(r_pow * v);
        }
        out
    };
    let slack = annulus_a
        .iter()
        .zip(&bound_a)
        .chain(annulus_b.iter().zip(&bound_b))
        .map(|(v, b)| ratio(*v, *b))
        .fold(0.0, f64::max);
    let l1_norm = space.l1_norm(a);
    let l1_bound = 2.0 * sys.doubling.c_d * slack;
    let l1_ok = l1_norm <= l1_bound * (1.0 + 1e-12) + 1e-300;
    Ok(MoleculeCertificate {
        ball: *ball,
        order: spec.order,
        operator: spec.operator,
        atom: spec.atom,
        identity_error,
        identity_ok,
        support_ok,
        annulus_a,
        annulus_b,
        bound_a,
        bound_b,
        slack,
        l1_norm,
        l1_bound,
        l1_ok,
        cutoff_lipschitz: cutoffs.lipschitz,
        tolerance,
        pass: identity_ok && support_ok && slack <= tolerance,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoleculeOptions {
    /// Order `N`; defaults to the certificate's `floor(κ/2) + 2`.
    pub order: Option<u32>,
    /// Use `N = 1`, licensed by Gaussian heat-kernel bounds.
    pub gaussian_mode: bool,
    /// Slack at which certificates pass.
    pub slack_tolerance: f64,
}

impl Default for MoleculeOptions {
    fn default() -> Self {
        Self { order: None, gaussian_mode: false, slack_tolerance: 16.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Molecule {
    pub lambda: f64,
    pub a: GradedFormData,
    pub b: GradedFormData,
    pub ball: Ball,
    pub certificate: MoleculeCertificate,
}

/// Serializable form values, degree-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedFormData {
    pub dims: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl From<&GradedForm> for GradedFormData {
    fn from(f: &GradedForm) -> Self {
        Self { dims: f.dims().to_vec(), values: f.values().to_vec() }
    }
}

impl GradedFormData {
    pub fn to_form(&self) -> GradedForm {
        GradedForm::from_values(&self.dims, self.values.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MolecularDecomposition {
    pub order: u32,
    /// Power `M` of the synthesis symbol `z^M (1 + i z)^{-M-2}`.
    pub synthesis_power: u32,
    pub gaussian_mode: bool,
    pub molecules: Vec<Molecule>,
    pub sum_abs_lambda: f64,
    /// `‖Σ λ_j a_j − f‖ / ‖f‖`.
    pub roundtrip_error: f64,
    pub max_slack: f64,
    pub grid: String,
}

impl MolecularDecomposition {
    pub fn all_certified(&self) -> bool {
        self.molecules.iter().all(|m| m.certificate.pass)
    }
}

/// Tent atoms of `Q_ψ f` pushed through the synthesis map.
///
/// With `ψ_syn(z) = z^M (1 + i z)^{-M-2}` and `φ(z) = z^{M-N} (1 + i z)^{-M-2}`,
/// each tent atom `A` gives `a = Σ_t w_t ψ_syn(tD) A_t` and
/// `b = Σ_t w_t t^N φ(tD) A_t`, so `a = D^N b` exactly. The analysis
/// symbol is the conjugate resolvent rescaled so the pair reproduces.
pub fn molecular_decompose(
    sys: &HodgeSystem,
    f: &GradedForm,
    options: &MoleculeOptions,
    grid: &TimeGrid,
) -> Result<MolecularDecomposition> {
    let cert = &sys.doubling;
    let order = if options.gaussian_mode {
        1
    } else {
        let n = options.order.unwrap_or_else(|| cert.molecule_order());
        let bound = cert.kappa / 2.0 + 1.0;
        if (n as f64) <= bound {
            return Err(Error::OrderTooSmall { order: n, bound });
        }
        n
    };
    let space = sys.space();
    let f_norm = space.norm(f);
    let harmonic = space.norm(&sys.spectrum.harmonic_part(f));
    if harmonic > 1e-8 * f_norm {
        return Err(Error::HarmonicComponent(harmonic / f_norm));
    }
    let m = cert.beta.max(order);
    let alpha = (m + 2) as f64;
    let synth = SymbolFunction::resolvent(m, alpha);
    let pair = calderon_normalize(&synth, &SymbolFunction::resolvent_conjugate(m, alpha))?;
    let analysis = pair.psi_tilde;
    let phi = SymbolFunction::resolvent(m - order, alpha);

    let field = q_transform(&analysis, &sys.spectrum, f, grid)?;
    let tent = atomic_decompose(&sys.complex, space, &field)?;
    let spec = MoleculeSpec::dirac(order);
    let mut molecules = Vec::with_capacity(tent.atoms.len());
    let mut total = space.zeros();
    for atom in &tent.atoms {
        let a = s_transform_weighted(&synth, &sys.spectrum, &atom.atom, |_| 1.0)?;
        let b = s_transform_weighted(&phi, &sys.spectrum, &atom.atom, |t| t.powi(order as i32))?;
        total.axpy(Complex64::new(atom.lambda, 0.0), &a);
        let certificate = validate_molecule(sys, &a, &b, &atom.ball, &spec, options.slack_tolerance)?;
        molecules.push(Molecule { lambda: atom.lambda, a: (&a).into(), b: (&b).into(), ball: atom.ball, certificate });
    }
    let roundtrip_error = space.norm(&(&total - f)) / f_norm;
    Ok(MolecularDecomposition {
        order,
        synthesis_power: m,
        gaussian_mode: options.gaussian_mode,
        sum_abs_lambda: tent.sum_abs_lambda,
        max_slack: molecules.iter().map(|m| m.certificate.slack).fold(0.0, f64::max),
        molecules,
        roundtrip_error,
        grid: grid.fingerprint(),
    })
}
