//! Experiment configuration, seeded batteries, regression constants and
//! report assembly.

mod battery;
mod config;
mod store;

pub use battery::{generate_battery, Constraint};
pub use config::{BatterySpec, ComplexSource, Experiment, ExperimentConfig, ProbeSettings};
pub use store::{BandKind, FrozenConstant, Provenance, RegressionStore, Verdict, STORE_ENV};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calculus::{
    apply_function, calderon_normalize, q_transform, riesz_transform, s_transform, RieszVariant, SymbolFunction,
    TimeGrid,
};
use crate::error::{Error, Result};
use crate::hardy::{default_psi, hardy_norm, maximal_norm, molecular_decompose, MaximalVariant, MoleculeOptions};
use crate::operators::{hodge_decompose, GradedForm};
use crate::probes::{
    boundedness_probe, composition_decay_probe, default_composition_grids, default_gaussian_times, default_t_grid,
    default_z_grid, gaffney_probe, gaussian_kernel_probe, norm_equivalence_probe, offdiag_probe, SetPair,
};
use crate::tent::{atomic_decompose, tent_norm};
use crate::HodgeSystem;

/// Summary of the complex an experiment ran on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSummary {
    pub vertices: usize,
    pub dims: Vec<usize>,
    pub c_d: f64,
    pub kappa: f64,
    pub beta: u32,
}

/// Output of one config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub fingerprint: String,
    pub complex: ComplexSummary,
    pub grid: String,
    pub sections: BTreeMap<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// A check against a threshold fixed in advance.
pub fn pinned(name: &str, value: f64, limit: f64) -> Verdict {
    Verdict {
        name: name.into(),
        value,
        reference: limit,
        tolerance: 0.0,
        kind: BandKind::Upper,
        provenance: Provenance::Pinned,
        pass: value <= limit,
    }
}

/// A boolean check, reported as `0 ≤ 0` or `1 > 0`.
pub fn pinned_flag(name: &str, ok: bool) -> Verdict {
    pinned(name, if ok { 0.0 } else { 1.0 }, 0.0)
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    sys: HodgeSystem,
    grid: TimeGrid,
    fingerprint: String,
    battery: Option<Vec<GradedForm>>,
}

impl Context<'_> {
    fn battery(&mut self) -> Result<&[GradedForm]> {
        if self.battery.is_none() {
            let b = &self.config.battery;
            self.battery = Some(generate_battery(&self.sys, b.count, b.seed, b.constraint)?);
        }
        Ok(self.battery.as_deref().expect("filled above"))
    }

    fn extra_battery(&self, constraint: Constraint) -> Result<Vec<GradedForm>> {
        let b = &self.config.battery;
        generate_battery(&self.sys, b.count, b.seed.wrapping_add(1), constraint)
    }

    fn frozen(
        &self,
        store: &mut RegressionStore,
        experiment: Experiment,
        name: &str,
        value: f64,
        kind: BandKind,
    ) -> Verdict {
        store.check(
            &self.fingerprint,
            &format!("{}:{}", self.config.id, experiment.name()),
            name,
            value,
            self.config.band,
            kind,
        )
    }

    fn psi(&self, p: f64) -> Result<SymbolFunction> {
        match &self.config.psi {
            Some(name) => name.parse(),
            None => Ok(default_psi(p, self.sys.doubling.beta)),
        }
    }

    fn probe_pair(&self) -> Result<SetPair> {
        let x = &self.sys.complex;
        let resolve = |names: &Option<Vec<String>>, fallback: usize| -> Result<Vec<usize>> {
            match names {
                Some(list) => list.iter().map(|n| x.vertex_index(n)).collect(),
                None => Ok(vec![fallback]),
            }
        };
        let far = (0..x.num_vertices()).max_by(|&a, &b| x.distance(0, a).total_cmp(&x.distance(0, b))).unwrap_or(0);
        SetPair::new(x, &resolve(&self.config.probes.e, 0)?, &resolve(&self.config.probes.f, far)?)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        a
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

type Stage = (Value, Vec<Verdict>);

fn run_stage(ctx: &mut Context<'_>, store: &mut RegressionStore, exp: Experiment) -> Result<Stage> {
    let band_upper = BandKind::Upper;
    let band_rel = BandKind::Relative;
    match exp {
        Experiment::Spectrum => {
            let s = &ctx.sys.spectrum;
            let err = s.reconstruction_error(&ctx.sys.ops);
            Ok((
                json!({
                    "eigenvalues": s.eigenvalues(),
                    "null_dimension": s.null_dimension(),
                    "lambda_max": s.lambda_max(),
                    "lambda_min_positive": s.lambda_min_positive(),
                    "doubling": ctx.sys.doubling,
                    "reconstruction_error": err,
                }),
                vec![pinned("reconstruction_error", err, 1e-10 * s.lambda_max().max(1.0))],
            ))
        }
        Experiment::Exactness => {
            let ops = &ctx.sys.ops;
            let dd = ops.d.compose(&ops.d).blocks().iter().map(|b| b.matrix.max_abs()).fold(0.0, f64::max);
            let fs = ctx.extra_battery(Constraint::Any)?;
            let space = ctx.sys.space();
            let (mut adj, mut pyth): (f64, f64) = (0.0, 0.0);
            for pair in fs.windows(2) {
                let (f, g) = (&pair[0], &pair[1]);
                let lhs = space.inner(&ops.d.apply(f), g);
                let rhs = space.inner(f, &ops.dstar.apply(g));
                adj = adj.max((lhs - rhs).norm() / (space.norm(f) * space.norm(g)));
            }
            for f in &fs {
                let h = hodge_decompose(&ctx.sys.spectrum, ops, f);
                let parts: f64 = [&h.exact, &h.coexact, &h.harmonic].iter().map(|p| space.norm(p).powi(2)).sum();
                let whole = space.norm(f).powi(2);
                pyth = pyth.max((parts - whole).abs() / whole);
            }
            Ok((
                json!({"d_squared": dd, "adjointness": adj, "pythagoras": pyth}),
                vec![
                    pinned("d_squared", dd, 0.0),
                    pinned("adjointness", adj, 1e-12),
                    pinned("pythagoras", pyth, 1e-10),
                ],
            ))
        }
        Experiment::Calderon => {
            let battery = ctx.battery()?.to_vec();
            let mut section = serde_json::Map::new();
            let mut verdicts = Vec::new();
            for psi in [SymbolFunction::zexp(), SymbolFunction::rational(1, 3.0)] {
                let pair = calderon_normalize(&psi, &psi)?;
                let mut worst: f64 = 0.0;
                for f in &battery {
                    let field = q_transform(&psi, &ctx.sys.spectrum, f, &ctx.grid)?;
                    let back = s_transform(&pair.psi_tilde, &ctx.sys.spectrum, &field)?;
                    let target = ctx.sys.spectrum.range_part(f);
                    let space = ctx.sys.space();
                    worst = worst.max(rel(space.norm(&(&back - &target)), space.norm(&target)));
                }
                section.insert(
                    psi.name.clone(),
                    json!({"c_plus": [pair.c_plus.re, pair.c_plus.im], "max_relative_error": worst}),
                );
                verdicts.push(pinned(&format!("reconstruction/{}", psi.name), worst, 1e-3));
            }
            Ok((Value::Object(section), verdicts))
        }
        Experiment::HardyNorms => {
            let battery = ctx.battery()?.to_vec();
            let mut section = serde_json::Map::new();
            let mut verdicts = Vec::new();
            for &p in &ctx.config.p {
                let psi = ctx.psi(p)?;
                let mut values = Vec::new();
                let mut aperture = Vec::new();
                for f in &battery {
                    let r = hardy_norm(&ctx.sys, f, p, Some(&psi), &ctx.grid)?;
                    let field = q_transform(&psi, &ctx.sys.spectrum, f, &ctx.grid)?;
                    let wide = tent_norm(&ctx.sys.complex, ctx.sys.space(), &field, p, 2.0)?;
                    aperture.push(rel(wide, r.value));
                    values.push(r.value);
                }
                let (lo, hi) = min_max(&aperture);
                verdicts.push(ctx.frozen(store, exp, &format!("p{p}/aperture2_min"), lo, band_rel));
                verdicts.push(ctx.frozen(store, exp, &format!("p{p}/aperture2_max"), hi, band_rel));
                section.insert(format!("p{p}"), json!({"psi": psi.name, "values": values, "aperture_ratio": aperture}));
            }
            Ok((Value::Object(section), verdicts))
        }
        Experiment::TentAtoms => {
            let battery = ctx.battery()?.to_vec();
            let psi = ctx.psi(1.0)?;
            let (mut exact, mut certified, mut worst) = (true, true, 0.0f64);
            let mut counts = Vec::new();
            for f in &battery {
                let field = q_transform(&psi, &ctx.sys.spectrum, f, &ctx.grid)?;
                let dec = atomic_decompose(&ctx.sys.complex, ctx.sys.space(), &field)?;
                exact &= dec.reconstruct().is_some_and(|r| r.values() == field.values());
                certified &= dec.all_certified();
                worst = worst.max(dec.ratio);
                counts.push(dec.atoms.len());
            }
            Ok((
                json!({"psi": psi.name, "atoms": counts, "max_ratio": worst}),
                vec![
                    pinned_flag("exact_reconstruction", exact),
                    pinned_flag("all_certified", certified),
                    ctx.frozen(store, exp, "max_ratio", worst, band_upper),
                ],
            ))
        }
        Experiment::Molecules => {
            let battery = ctx.battery()?.to_vec();
            let (mut slack, mut roundtrip, mut l1, mut identity) = (0.0f64, 0.0f64, true, true);
            let mut sums = Vec::new();
            for f in &battery {
                let dec = molecular_decompose(&ctx.sys, f, &MoleculeOptions::default(), &ctx.grid)?;
                slack = slack.max(dec.max_slack);
                roundtrip = roundtrip.max(dec.roundtrip_error);
                l1 &= dec.molecules.iter().all(|m| m.certificate.l1_ok);
                identity &= dec.molecules.iter().all(|m| m.certificate.identity_ok);
                sums.push(dec.sum_abs_lambda);
            }
            Ok((
                json!({"max_slack": slack, "max_roundtrip": roundtrip, "sum_abs_lambda": sums}),
                vec![
                    ctx.frozen(store, exp, "max_slack", slack, band_upper),
                    pinned("roundtrip", roundtrip, 2e-3),
                    pinned_flag("l1_bound", l1),
                    pinned_flag("identity", identity),
                ],
            ))
        }
        Experiment::Maximal => {
            let battery = ctx.battery()?.to_vec();
            let (alpha, c) = (ctx.config.alpha, ctx.config.maximal_c());
            let (mut plain, mut half, mut tilde) = (Vec::new(), Vec::new(), Vec::new());
            for f in &battery {
                plain.push(maximal_norm(&ctx.sys, f, alpha, c, &ctx.grid, MaximalVariant::Plain)?);
                half.push(maximal_norm(&ctx.sys, f, alpha / 2.0, c / 2.0, &ctx.grid, MaximalVariant::Plain)?);
                tilde.push(maximal_norm(&ctx.sys, f, alpha, c, &ctx.grid, MaximalVariant::Tilde)?);
            }
            let r_half: Vec<f64> = half.iter().zip(&plain).map(|(a, b)| rel(*a, *b)).collect();
            let r_tilde: Vec<f64> = tilde.iter().zip(&plain).map(|(a, b)| rel(*a, *b)).collect();
            let (h0, h1) = min_max(&r_half);
            let (t0, t1) = min_max(&r_tilde);
            Ok((
                json!({"alpha": alpha, "c": c, "plain": plain, "half_aperture": half, "tilde": tilde}),
                vec![
                    ctx.frozen(store, exp, "half_aperture_min", h0, band_rel),
                    ctx.frozen(store, exp, "half_aperture_max", h1, band_rel),
                    ctx.frozen(store, exp, "tilde_min", t0, band_rel),
                    ctx.frozen(store, exp, "tilde_max", t1, band_rel),
                ],
            ))
        }
        Experiment::Riesz => {
            let battery = ctx.battery()?.to_vec();
            let (s, ops) = (&ctx.sys.spectrum, &ctx.sys.ops);
            let space = ctx.sys.space();
            let (mut iso, mut inv, mut h1l1) = (0.0f64, 0.0f64, 0.0f64);
            for f in &battery {
                let target = s.range_part(f);
                let r = riesz_transform(s, ops, f, RieszVariant::Full).form;
                let rr = riesz_transform(s, ops, &r, RieszVariant::Full).form;
                iso = iso.max(rel((space.norm(&r) - space.norm(&target)).abs(), space.norm(&target)));
                inv = inv.max(rel(space.norm(&(&rr - &target)), space.norm(&target)));
                h1l1 = h1l1.max(rel(space.l1_norm(&r), hardy_norm(&ctx.sys, f, 1.0, None, &ctx.grid)?.value));
            }
            let mut verdicts = vec![
                pinned("isometry", iso, 1e-10),
                pinned("involution", inv, 1e-10),
                ctx.frozen(store, exp, "h1_to_l1", h1l1, band_rel),
            ];
            let mut side = Value::Null;
            match ctx.extra_battery(Constraint::RangeD) {
                Ok(exact) => {
                    let mut worst: f64 = 0.0;
                    for g in &exact {
                        let h = riesz_transform(s, ops, g, RieszVariant::DstarSide).form;
                        let back = riesz_transform(s, ops, &h, RieszVariant::DSide).form;
                        worst = worst.max(rel(space.norm(&(&back - g)), space.norm(g)));
                    }
                    verdicts.push(pinned("d_side_after_dstar_side", worst, 1e-9));
                    side = json!(worst);
                }
                Err(Error::TrivialConstraint(_)) => {}
                Err(e) => return Err(e),
            }
            Ok((
                json!({"isometry": iso, "involution": inv, "h1_to_l1": h1l1, "d_side_after_dstar_side": side}),
                verdicts,
            ))
        }
        Experiment::NormEquivalence => {
            let battery = ctx.battery()?.to_vec();
            let r = norm_equivalence_probe(&ctx.sys, &battery, &ctx.grid, ctx.config.alpha, ctx.config.maximal_c())?;
            let mut verdicts = Vec::new();
            for p in &r.pairs {
                let name = format!("{}/{}", p.numerator, p.denominator);
                verdicts.push(ctx.frozen(store, exp, &format!("{name}_min"), p.min, band_rel));
                verdicts.push(ctx.frozen(store, exp, &format!("{name}_max"), p.max, band_rel));
            }
            Ok((serde_json::to_value(&r)?, verdicts))
        }
        Experiment::Offdiag => {
            let pair = ctx.probe_pair()?;
            let psi: SymbolFunction = ctx.config.probes.family.parse()?;
            let r = offdiag_probe(&ctx.sys, &psi, &pair, &default_z_grid(pair.rho), ctx.config.probes.order)?;
            let v = pinned_flag("verdict", r.pass);
            Ok((serde_json::to_value(&r)?, vec![v]))
        }
        Experiment::Gaffney => {
            let pair = ctx.probe_pair()?;
            let family = ctx.config.probes.gaffney_family.parse()?;
            let r = gaffney_probe(&ctx.sys, family, &pair, &default_t_grid(pair.rho))?;
            let v = pinned_flag("verdict", r.pass);
            Ok((serde_json::to_value(&r)?, vec![v]))
        }
        Experiment::Composition => {
            let z = SymbolFunction::zexp();
            let (us, ts) = default_composition_grids(&ctx.sys.spectrum);
            let r = composition_decay_probe(&ctx.sys.spectrum, &z, &z, &SymbolFunction::one(), &us, &ts, 1.0, 1.0)?;
            let v = pinned_flag("verdict", r.pass);
            Ok((serde_json::to_value(&r)?, vec![v]))
        }
        Experiment::Gaussian => {
            let times = default_gaussian_times(&ctx.sys);
            let r = gaussian_kernel_probe(&ctx.sys, ctx.config.probes.degree, &times, &ctx.config.probes.envelope)?;
            let v = pinned_flag("verdict", r.pass);
            Ok((serde_json::to_value(&r)?, vec![v]))
        }
        Experiment::Boundedness => {
            let battery = ctx.battery()?.to_vec();
            let mut section = serde_json::Map::new();
            let mut verdicts = Vec::new();
            for &p in &ctx.config.p {
                let psi = ctx.psi(p)?;
                for sym in [SymbolFunction::sign(), SymbolFunction::resolvent(0, 1.0), SymbolFunction::heat()] {
                    let norm = |f: &GradedForm| hardy_norm(&ctx.sys, f, p, Some(&psi), &ctx.grid).map(|r| r.value);
                    let r =
                        boundedness_probe(&battery, |f| apply_function(&sym, &ctx.sys.spectrum, f, 1.0), norm, norm)?;
                    let name = format!("p{p}/{}", sym.name);
                    verdicts.push(ctx.frozen(store, exp, &name, r.max, band_upper));
                    section.insert(name, serde_json::to_value(&r)?);
                }
            }
            Ok((Value::Object(section), verdicts))
        }
    }
}

/// Runs every experiment in `config` on its complex. `base` resolves
/// relative paths. Errors carry the experiment id and stage.
pub fn run_experiment(config: &ExperimentConfig, store: &mut RegressionStore, base: &Path) -> Result<Report> {
    if config.experiments.is_empty() {
        return Err(Error::NothingToRun);
    }
    config.validate()?;
    let wrap =
        |stage: &str, e: Error| Error::Experiment { id: config.id.clone(), stage: stage.into(), source: Box::new(e) };
    let complex = config.complex.load(base).map_err(|e| wrap("load", e))?;
    let sys = HodgeSystem::new(complex).map_err(|e| wrap("setup", e))?;
    let grid = config.grid.clone().unwrap_or_else(|| sys.default_grid());
    let fingerprint = sys.complex.fingerprint();
    let mut ctx = Context { config, grid, fingerprint, battery: None, sys };
    let mut sections = BTreeMap::new();
    let mut verdicts = Vec::new();
    for &exp in &config.experiments {
        let (value, mut v) = run_stage(&mut ctx, store, exp).map_err(|e| wrap(exp.name(), e))?;
        let store_prefix = format!("{}:", config.id);
        for verdict in &mut v {
            let short = verdict.name.strip_prefix(&store_prefix).unwrap_or(&verdict.name);
            verdict.name = if short.starts_with(&format!("{}/", exp.name())) {
                short.to_string()
            } else {
                format!("{}/{short}", exp.name())
            };
        }
        sections.insert(exp.name().to_string(), value);
        verdicts.extend(v);
    }
    let cert = &ctx.sys.doubling;
    let report = Report {
        id: config.id.clone(),
        fingerprint: ctx.fingerprint.clone(),
        complex: ComplexSummary {
            vertices: ctx.sys.complex.num_vertices(),
            dims: ctx.sys.space().dims().to_vec(),
            c_d: cert.c_d,
            kappa: cert.kappa,
            beta: cert.beta,
        },
        grid: ctx.grid.fingerprint(),
        pass: verdicts.iter().all(|v| v.pass),
        sections,
        verdicts,
    };
    if let Some(out) = &config.output {
        std::fs::write(base.join(out), serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

/// Plain-text table of verdicts across reports.
pub fn summarize_reports(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{} [{}] {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.fingerprint);
        for v in &r.verdicts {
            let _ = writeln!(
                out,
                "  {:<5} {:<48} value={:<12.6e} ref={:<12.6e} band={} ({:?}, {:?})",
                if v.pass { "ok" } else { "FAIL" },
                v.name,
                v.value,
                v.reference,
                v.tolerance,
                v.kind,
                v.provenance,
            );
        }
    }
    out
}
