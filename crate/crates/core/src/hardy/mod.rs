//! Hardy norms through the quadratic functional, molecules and their
//! validator, maximal functions and Coifman–Weiss atoms.

mod cutoffs;
mod cw;
mod maximal;
mod molecule;

pub use cutoffs::AdaptedCutoffs;
pub use cw::{cw_molecule_quantity, validate_cw_atom, CwAtomCertificate};
pub use maximal::{max_ball_constant, maximal_function, maximal_norm, MaximalVariant};
pub use molecule::{
    molecular_decompose, validate_molecule, GradedFormData, MolecularDecomposition, Molecule, MoleculeCertificate,
    MoleculeOperator, MoleculeOptions, MoleculeSpec, IDENTITY_TOLERANCE,
};

use serde::{Deserialize, Serialize};

use crate::calculus::{q_transform, SymbolFunction, TimeGrid};
use crate::error::{Error, Result};
use crate::operators::GradedForm;
use crate::tent::tent_norm;
use crate::HodgeSystem;

/// Default symbol for `p`:
/// `z (1 + z²)^{-N}` with `N = ceil(β/2) + 1` for `p ≤ 2`,
/// `z^β (1 + z²)^{-(β+1)}` for `p > 2`.
pub fn default_psi(p: f64, beta: u32) -> SymbolFunction {
    if p <= 2.0 {
        SymbolFunction::rational(1, (beta as f64 / 2.0).ceil() + 1.0)
    } else {
        SymbolFunction::rational(beta, beta as f64 + 1.0)
    }
}

/// Decay requirements on `ψ` for the `H^p` norm: `σ ≥ 1, τ ≥ β + 1` when
/// `p < 2`, `σ ≥ β` when `p > 2`, and a `Ψ`-class symbol in every case.
pub fn check_admissible(psi: &SymbolFunction, p: f64, beta: u32) -> Result<()> {
    let fail =
        |reason: String| Error::Inadmissible { name: psi.name.clone(), sigma: psi.sigma, tau: psi.tau, p, reason };
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p));
    }
    if !psi.is_psi_class() {
        return Err(fail("symbol must decay at 0 and at infinity".into()));
    }
    let b = beta as f64;
    if p < 2.0 && (psi.sigma < 1.0 || psi.tau < b + 1.0) {
        return Err(fail(format!("need sigma >= 1 and tau >= beta + 1 = {}", b + 1.0)));
    }
    if p > 2.0 && psi.sigma < b {
        return Err(fail(format!("need sigma >= beta = {b}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HardyNormReport {
    pub value: f64,
    pub p: f64,
    pub psi: String,
    pub grid: String,
    /// Norm of the harmonic part, which the quadratic functional annihilates.
    pub harmonic_norm: f64,
    pub warning: Option<String>,
}

/// `‖S(ψ(tD) f)‖_{L^p}` with aperture 1.
pub fn hardy_norm(
    sys: &HodgeSystem,
    f: &GradedForm,
    p: f64,
    psi: Option<&SymbolFunction>,
    grid: &TimeGrid,
) -> Result<HardyNormReport> {
    let psi = psi.cloned().unwrap_or_else(|| default_psi(p, sys.doubling.beta));
    check_admissible(&psi, p, sys.doubling.beta)?;
    let harmonic_norm = sys.space().norm(&sys.spectrum.harmonic_part(f));
    let field = q_transform(&psi, &sys.spectrum, f, grid)?;
    let value = tent_norm(&sys.complex, sys.space(), &field, p, 1.0)?;
    let scale = sys.space().norm(f);
    let warning = (harmonic_norm > 1e-10 * scale.max(f64::MIN_POSITIVE))
        .then(|| format!("harmonic component of norm {harmonic_norm:.3e} ignored"));
    Ok(HardyNormReport { value, p, psi: psi.name, grid: grid.fingerprint(), harmonic_norm, warning })
}
