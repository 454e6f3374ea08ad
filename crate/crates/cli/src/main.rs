//! `hodge-hardy` command-line tool.
//!
//! Every subcommand reads the JSON file formats of the library and writes a
//! JSON document to `--output` or stdout. `run` exits with status 1 when any
//! verdict of the experiment fails.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use hodge_hardy::calculus::{riesz_transform, RieszVariant, SymbolFunction, TimeGrid};
use hodge_hardy::complex::io::{complex_to_json, load_complex};
use hodge_hardy::complex::{generate_complex, ComplexKind, GeneratorSpec, MetricMeasureComplex};
use hodge_hardy::hardy::{
    default_psi, hardy_norm, max_ball_constant, maximal_function, maximal_norm, molecular_decompose, MaximalVariant,
    MoleculeOptions,
};
use hodge_hardy::harness::{run_experiment, summarize_reports, ExperimentConfig, RegressionStore, Report};
use hodge_hardy::operators::io::{form_to_json, load_form};
use hodge_hardy::operators::GradedForm;
use hodge_hardy::probes::{
    composition_decay_probe, default_composition_grids, default_gaussian_times, default_z_grid, gaussian_kernel_probe,
    offdiag_probe, GaussianEnvelope, SetPair,
};
use hodge_hardy::tent::{atomic_decompose, load_field};
use hodge_hardy::HodgeSystem;

#[derive(Parser)]
#[command(name = "hodge-hardy", version, about = "Hardy spaces of forms on weighted simplicial complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a catalog complex.
    Gen(GenArgs),
    /// Spectrum of D, or of the Hodge Laplacian in one degree.
    Spectrum(SpectrumArgs),
    /// Quadratic Hardy norm of a form.
    HardyNorm(HardyNormArgs),
    /// Atomic decomposition of a tent-space field.
    TentAtoms(TentAtomsArgs),
    /// Molecular decomposition of a form.
    Molecules(MoleculesArgs),
    /// Non-tangential maximal function and its L¹ norm.
    Maximal(MaximalArgs),
    /// Riesz transform of a form.
    Riesz(RieszArgs),
    /// Off-diagonal decay of ψ(zD) between two vertex sets.
    ProbeOffdiag(OffdiagArgs),
    /// Gaussian envelope of the heat kernel.
    ProbeGaussian(GaussianArgs),
    /// Decay of ψ(sD) f(D) ψ̃(tD) in s/t.
    ProbeComposition(CompositionArgs),
    /// Summarize experiment reports.
    Report(ReportArgs),
    /// Run a config-driven experiment.
    Run(RunArgs),
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: ComplexKind,
    /// Comma-separated sizes, e.g. `8,8` for a torus grid.
    #[arg(long, value_delimiter = ',', required = true)]
    size: Vec<usize>,
    /// Randomize measures and weights with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    complex: PathBuf,
    /// Report the Laplacian spectrum on k-forms instead of the D spectrum.
    #[arg(long)]
    degree: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct GridArgs {
    /// Smallest time, or `auto`.
    #[arg(long, default_value = "auto")]
    t_min: String,
    /// Largest time, or `auto`.
    #[arg(long, default_value = "auto")]
    t_max: String,
    #[arg(long)]
    points_per_decade: Option<f64>,
}

impl GridArgs {
    fn grid(&self, sys: &HodgeSystem) -> Result<TimeGrid> {
        let auto = sys.default_grid();
        let pick = |s: &str, default: f64| -> Result<f64> {
            if s == "auto" {
                Ok(default)
            } else {
                s.parse().with_context(|| format!("bad time `{s}`"))
            }
        };
        let t_min = pick(&self.t_min, auto.t_min())?;
        let t_max = pick(&self.t_max, auto.t_max())?;
        Ok(TimeGrid::new(t_min, t_max, self.points_per_decade.unwrap_or(auto.points_per_decade()))?)
    }
}

#[derive(Args)]
struct FormInput {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    form: PathBuf,
}

impl FormInput {
    fn load(&self) -> Result<(HodgeSystem, GradedForm)> {
        let sys = system(&self.complex)?;
        let f = load_form(&self.form, sys.space().dims())
            .with_context(|| format!("reading form {}", self.form.display()))?;
        Ok((sys, f))
    }
}

#[derive(Args)]
struct HardyNormArgs {
    #[command(flatten)]
    input: FormInput,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Symbol name, or `default`.
    #[arg(long, default_value = "default")]
    psi: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct TentAtomsArgs {
    /// Complex the field lives on.
    #[arg(long)]
    complex: PathBuf,
    #[arg(long)]
    field: PathBuf,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct MoleculesArgs {
    #[command(flatten)]
    input: FormInput,
    /// Molecule order, or `auto`.
    #[arg(long, default_value = "auto")]
    order: String,
    /// Build first-order molecules only.
    #[arg(long)]
    gaussian: bool,
    #[arg(long, default_value_t = MoleculeOptions::default().slack_tolerance)]
    slack_tolerance: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct MaximalArgs {
    #[command(flatten)]
    input: FormInput,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Ball constant; defaults to the largest admissible value.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value = "plain")]
    variant: MaximalVariant,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct RieszArgs {
    #[command(flatten)]
    input: FormInput,
    #[arg(long, default_value = "full")]
    variant: RieszVariant,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct OffdiagArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long, default_value = "res:1:2")]
    family: SymbolFunction,
    /// Vertex names of the source set.
    #[arg(long = "E", value_delimiter = ',', required = true)]
    e: Vec<String>,
    /// Vertex names of the target set.
    #[arg(long = "F", value_delimiter = ',', required = true)]
    f: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    order: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct GaussianArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long, default_value_t = 0)]
    degree: usize,
    #[arg(long = "C", default_value_t = GaussianEnvelope::default().big_c)]
    big_c: f64,
    #[arg(long = "c", default_value_t = GaussianEnvelope::default().c)]
    c: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CompositionArgs {
    #[arg(long)]
    complex: PathBuf,
    #[arg(long, default_value = "zexp")]
    psi: SymbolFunction,
    #[arg(long, default_value = "zexp")]
    psi_tilde: SymbolFunction,
    /// Bounded middle symbol.
    #[arg(long, default_value = "one")]
    f: SymbolFunction,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files written by `run`.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Regression store; defaults to the environment variable, else in memory.
    #[arg(long)]
    store: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

fn system(path: &Path) -> Result<HodgeSystem> {
    let x = load_complex(path).with_context(|| format!("reading complex {}", path.display()))?;
    Ok(HodgeSystem::new(x)?)
}

fn emit(out: &Output, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &out.output {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut stdout = io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn vertices(x: &MetricMeasureComplex, names: &[String]) -> Result<Vec<usize>> {
    Ok(names.iter().map(|n| x.vertex_index(n)).collect::<hodge_hardy::Result<_>>()?)
}

fn form_json(f: &GradedForm) -> Result<Value> {
    Ok(serde_json::from_str(&form_to_json(f)?)?)
}

fn laplacian_spectrum(sys: &HodgeSystem, k: usize) -> Result<Vec<f64>> {
    let dims = sys.space().dims();
    if k >= dims.len() {
        bail!("degree {k} out of range, complex has degrees 0..{}", dims.len() - 1);
    }
    let d = sys.ops.symmetric_dirac();
    let lap: DMatrix<f64> = &d * &d;
    let off = sys.space().offsets()[k];
    let block = lap.view((off, off), (dims[k], dims[k])).into_owned();
    let mut eig: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen(a) => {
            let mut spec = GeneratorSpec::new(a.kind, a.size);
            if let Some(seed) = a.seed {
                spec = spec.randomized(seed);
            }
            let x = generate_complex(&spec)?;
            let text = complex_to_json(&x)?;
            emit(&a.out, &serde_json::from_str::<Value>(&text)?)?;
        }
        Command::Spectrum(a) => {
            let sys = system(&a.complex)?;
            let s = &sys.spectrum;
            let mut doc = json!({
                "fingerprint": sys.complex.fingerprint(),
                "dims": sys.space().dims(),
                "dirac_eigenvalues": s.eigenvalues(),
                "null_dimension": s.null_dimension(),
                "lambda_max": s.lambda_max(),
                "lambda_min_positive": s.lambda_min_positive(),
                "doubling": sys.doubling,
            });
            if let Some(k) = a.degree {
                doc["degree"] = json!(k);
                doc["laplacian_eigenvalues"] = json!(laplacian_spectrum(&sys, k)?);
            }
            emit(&a.out, &doc)?;
        }
        Command::HardyNorm(a) => {
            let (sys, f) = a.input.load()?;
            let grid = a.grid.grid(&sys)?;
            let psi = match a.psi.as_str() {
                "default" => default_psi(a.p, sys.doubling.beta),
                name => name.parse()?,
            };
            emit(&a.out, &hardy_norm(&sys, &f, a.p, Some(&psi), &grid)?)?;
        }
        Command::TentAtoms(a) => {
            let sys = system(&a.complex)?;
            let field = load_field(&a.field, sys.space().dims())
                .with_context(|| format!("reading field {}", a.field.display()))?;
            let dec = atomic_decompose(&sys.complex, sys.space(), &field)?;
            let atoms: Vec<Value> = dec
                .atoms
                .iter()
                .map(|t| json!({"lambda": t.lambda, "ball": t.ball, "level": t.level, "certificate": t.certificate}))
                .collect();
            emit(
                &a.out,
                &json!({
                    "sum_abs_lambda": dec.sum_abs_lambda,
                    "tent_norm": dec.tent_norm_1,
                    "ratio": dec.ratio,
                    "all_certified": dec.all_certified(),
                    "atoms": atoms,
                }),
            )?;
        }
        Command::Molecules(a) => {
            let (sys, f) = a.input.load()?;
            let grid = a.grid.grid(&sys)?;
            let order = match a.order.as_str() {
                "auto" => None,
                n => Some(n.parse().with_context(|| format!("bad order `{n}`"))?),
            };
            let options = MoleculeOptions { order, gaussian_mode: a.gaussian, slack_tolerance: a.slack_tolerance };
            let dec = molecular_decompose(&sys, &f, &options, &grid)?;
            emit(&a.out, &dec)?;
        }
        Command::Maximal(a) => {
            let (sys, f) = a.input.load()?;
            let grid = a.grid.grid(&sys)?;
            let c = a.c.unwrap_or_else(|| max_ball_constant(a.alpha));
            let values = maximal_function(&sys, &f, a.alpha, c, &grid, a.variant)?;
            let norm = maximal_norm(&sys, &f, a.alpha, c, &grid, a.variant)?;
            emit(
                &a.out,
                &json!({"alpha": a.alpha, "c": c, "variant": a.variant.to_string(), "values": values, "l1_norm": norm}),
            )?;
        }
        Command::Riesz(a) => {
            let (sys, f) = a.input.load()?;
            let r = riesz_transform(&sys.spectrum, &sys.ops, &f, a.variant);
            emit(&a.out, &json!({"form": form_json(&r.form)?, "dropped_harmonic_norm": r.dropped_harmonic_norm}))?;
        }
        Command::ProbeOffdiag(a) => {
            let sys = system(&a.complex)?;
            let pair = SetPair::new(&sys.complex, &vertices(&sys.complex, &a.e)?, &vertices(&sys.complex, &a.f)?)?;
            let r = offdiag_probe(&sys, &a.family, &pair, &default_z_grid(pair.rho), a.order)?;
            emit(&a.out, &r)?;
            return Ok(r.pass);
        }
        Command::ProbeGaussian(a) => {
            let sys = system(&a.complex)?;
            let envelope = GaussianEnvelope { big_c: a.big_c, c: a.c };
            let r = gaussian_kernel_probe(&sys, a.degree, &default_gaussian_times(&sys), &envelope)?;
            emit(&a.out, &r)?;
            return Ok(r.pass);
        }
        Command::ProbeComposition(a) => {
            let sys = system(&a.complex)?;
            let (us, ts) = default_composition_grids(&sys.spectrum);
            let r = composition_decay_probe(&sys.spectrum, &a.psi, &a.psi_tilde, &a.f, &us, &ts, a.a, a.b)?;
            emit(&a.out, &r)?;
            return Ok(r.pass);
        }
        Command::Report(a) => {
            let reports = a
                .reports
                .iter()
                .map(|p| -> Result<Report> {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing report {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            print!("{}", summarize_reports(&reports));
            return Ok(reports.iter().all(|r| r.pass));
        }
        Command::Run(a) => {
            let config = ExperimentConfig::load(&a.config)?;
            let mut store = match &a.store {
                Some(p) => RegressionStore::open(p)?,
                None => RegressionStore::from_env()?,
            };
            let base = a.config.parent().unwrap_or(Path::new("."));
            let report = run_experiment(&config, &mut store, base)?;
            store.save()?;
            if a.out.output.is_some() || config.output.is_none() {
                emit(&a.out, &report)?;
            }
            eprint!("{}", summarize_reports(std::slice::from_ref(&report)));
            return Ok(report.pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
