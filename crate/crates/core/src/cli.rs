//! Command-line entry point. Every command prints one JSON document with a
//! top-level `"schema": 1`; exit codes are 0 (pass), 1 (residual failure) and
//! 2 (usage or I/O error).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::domain::sample_d2;
use crate::exact::rat;
use crate::frobenius::chart_file::parse_chart;
use crate::frobenius::deform::{check_conformal_structure, conformal_deform, BundleChart, DeformationSpec};
use crate::frobenius::fixtures;
use crate::frobenius::{check_e_shift, check_frobenius, intersection_form, symmetry_residual, FrobeniusChart};
use crate::invariants::{check_bidegree, invariant_space_dim, GradedInvariant, InvariantContext};
use crate::poly::Poly;
use crate::rootsys::{build_system, describe, BaseType, EllipticRootSystem};
use crate::tensors::{check_equivariance, TensorId, Transformation};
use crate::weyl::{compute_g0, es_homomorphic, random_root, random_tensor, random_word, reflect, rho, LinearAction, WeylError};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{0}")]
    Input(String),
}

#[derive(Parser, Debug)]
#[command(name = "ellwk", version, about = "Elliptic Weyl group invariants and Frobenius structure verifier")]
pub struct Cli {
    /// Seed for every sampler.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SpecArg {
    /// Root-system spec file (`base = "A"`, `rank = 1`); A₁ when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ChartArg {
    /// Chart file (JSON).
    #[arg(long, conflicts_with = "fixture")]
    pub chart: Option<PathBuf>,
    /// Built-in chart instead of a file.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Sample points.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = 2e-3)]
    pub h: f64,
    /// Identity tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    #[command(subcommand)]
    Rootsys(RootsysCmd),
    #[command(subcommand)]
    Weyl(WeylCmd),
    #[command(subcommand)]
    Domain(DomainCmd),
    #[command(subcommand)]
    Tensors(TensorsCmd),
    #[command(subcommand)]
    Invariants(InvariantsCmd),
    #[command(subcommand)]
    Frobenius(FrobeniusCmd),
    /// Runs the full acceptance battery.
    Suite {
        #[command(flatten)]
        spec: SpecArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum RootsysCmd {
    Describe {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum WeylCmd {
    /// Generator of the integral kernel of the restriction to F.
    G0 {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 8)]
        budget: usize,
    },
    /// Random-word property suite.
    Check {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum DomainCmd {
    Sample {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum TensorsCmd {
    Check {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct InvariantArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Index of the theta orbit sum.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Truncation radius of the lattice sum.
    #[arg(long = "N", default_value_t = 25)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
}

#[derive(Subcommand, Debug)]
pub enum InvariantsCmd {
    /// Value of the index-m orbit sum of weight 0 at a sampled point.
    Eval(InvariantArgs),
    /// Bidegree residuals of the same function.
    Check(InvariantArgs),
    /// Numerical dimension of the index-m space.
    Dim(InvariantArgs),
}

#[derive(Subcommand, Debug)]
pub enum FrobeniusCmd {
    /// Axiom residuals.
    Check(ChartArg),
    /// Intersection form at sample points and the e-shift identities.
    Intersect(ChartArg),
    /// Conformal deformation by σ⁻¹ (JSON terms `[[re, im, [exponents]], …]`);
    /// defaults to the linear function with differential η(e, ·).
    Deform {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long)]
        sigma_inverse: Option<String>,
    },
    /// Good-section test and pullback check for each section (JSON terms).
    Sections {
        #[command(flatten)]
        chart: ChartArg,
        #[arg(long = "section")]
        sections: Vec<String>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    base: BaseType,
    rank: usize,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), msg: e.to_string() })
}

pub fn load_system(spec: &SpecArg) -> Result<EllipticRootSystem, CliError> {
    let (base, rank) = match &spec.spec {
        None => (BaseType::A, 1),
        Some(path) => {
            let parsed: SpecFile = toml::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {}", path.display(), e.to_string().trim_end())))?;
            (parsed.base, parsed.rank)
        }
    };
    build_system(base, rank).map_err(|e| CliError::Input(format!("field `rank`: {e}")))
}

fn load_chart(arg: &ChartArg) -> Result<FrobeniusChart, CliError> {
    match (&arg.chart, &arg.fixture) {
        (Some(path), _) => parse_chart(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        (None, Some(name)) => fixtures::by_name(name)
            .ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}`; known: {}", fixtures::FIXTURE_NAMES.join(", ")))),
        (None, None) => Err(CliError::Usage("one of --chart or --fixture is required".into())),
    }
}

fn parse_poly(text: &str, n: usize) -> Result<Poly<Complex64>, CliError> {
    let terms: Vec<(f64, f64, Vec<u32>)> = serde_json::from_str(text).map_err(|e| CliError::Input(format!("polynomial: column {}: {e}", e.column())))?;
    if let Some((_, _, e)) = terms.iter().find(|(_, _, e)| e.len() != n) {
        return Err(CliError::Input(format!("polynomial: exponent vector {e:?} has wrong length, expected {n}")));
    }
    Ok(Poly::from_terms(n, terms.into_iter().map(|(re, im, e)| (Complex64::new(re, im), e))))
}

/// `Σ_i η(e, ∂_i) t^i + b₀`.
fn unit_direction(chart: &FrobeniusChart, b0: f64, scale: f64) -> Poly<Complex64> {
    let v = chart.j_of_unit();
    let mut p = Poly::constant(chart.n, Complex64::new(b0, 0.0));
    for (i, vi) in v.iter().enumerate() {
        p = &p + &Poly::var(chart.n, i).scale(&(vi * scale));
    }
    p
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn mat_json(m: &nalgebra::DMatrix<Complex64>) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| c2(m[(i, j)])).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

/// `(pass, report)` for a command.
fn execute(cli: &Cli) -> Result<(bool, Value), CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Rootsys(RootsysCmd::Describe { spec, radius }) => {
            let sys = load_system(spec)?;
            let d = describe(&sys, *radius).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok((d.axioms.all_pass(), to_value(&d)))
        }
        Command::Weyl(WeylCmd::G0 { spec, budget }) => {
            let sys = load_system(spec)?;
            match compute_g0(&sys, *budget) {
                Ok(r) => Ok((true, to_value(&r))),
                Err(e @ WeylError::BudgetExhausted(_)) => Ok((false, json!({"error": "budget exhausted", "detail": e.to_string()}))),
                Err(e) => Err(CliError::Input(e.to_string())),
            }
        }
        Command::Weyl(WeylCmd::Check { spec, trials }) => {
            let sys = load_system(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for _ in 0..*trials {
                let g = random_word(&sys, &mut rng, 8, 3);
                let beta = random_root(&sys, &mut rng, 3);
                let w = reflect(&sys, &beta).map_err(|e| CliError::Input(e.to_string()))?;
                let t1 = random_tensor(&sys, &mut rng, 2);
                let t2 = random_tensor(&sys, &mut rng, 2);
                for (key, ok) in [
                    ("orthogonality", g.is_orthogonal(sys.gram())),
                    ("flag", g.preserves_flag(sys.l)),
                    ("involution", w.compose(&w).is_identity()),
                    ("conjugation", crate::weyl::conjugation_covariant(&sys, &g, &beta)),
                    ("es_homomorphism", es_homomorphic(&sys, &t1, &t2)),
                ] {
                    *counts.entry(key).or_default() += usize::from(!ok);
                }
            }
            let pass = counts.values().all(|&c| c == 0);
            Ok((pass, json!({"trials": trials, "failures": counts})))
        }
        Command::Domain(DomainCmd::Sample { spec, count }) => {
            let sys = load_system(spec)?;
            let mut pts = Vec::new();
            for k in 0..*count {
                let x = sample_d2(&sys, seed.wrapping_add(k as u64)).map_err(|e| CliError::Input(e.to_string()))?;
                pts.push(x.to_pairs());
            }
            Ok((true, json!(pts)))
        }
        Command::Tensors(TensorsCmd::Check { spec, samples }) => {
            let sys = load_system(spec)?;
            let c = compute_g0(&sys, 8).map(|r| r.coefficient).unwrap_or_else(|_| rat(-1));
            let transformations = [
                ("phi_reflection", Transformation::Phi(reflect(&sys, &sys.simple_root(0)).expect("simple roots reflect").complex_matrix())),
                ("phi_rho", Transformation::Phi(rho(&sys, &c, Complex64::new(0.4, 0.3)).matrix)),
                ("psi", Transformation::Psi(Complex64::new(0.5, -0.8))),
            ];
            let mut table = BTreeMap::new();
            let mut pass = true;
            for (tensor, tname) in [(TensorId::ID, "I_D"), (TensorId::ID2, "I_D2"), (TensorId::DualID, "I_D*"), (TensorId::DualID2, "I_D2*")] {
                for (trname, tr) in &transformations {
                    let r = check_equivariance(&sys, tensor, tr, *samples, seed).map_err(|e| CliError::Input(e.to_string()))?;
                    pass &= r.max_residual < 1e-10;
                    table.insert(format!("{tname}/{trname}"), r.max_residual);
                }
            }
            Ok((pass, json!({"residuals": table, "tolerance": 1e-10})))
        }
        Command::Invariants(cmd) => {
            let (args, kind) = match cmd {
                InvariantsCmd::Eval(a) => (a, "eval"),
                InvariantsCmd::Check(a) => (a, "check"),
                InvariantsCmd::Dim(a) => (a, "dim"),
            };
            let sys = load_system(&args.spec)?;
            let g0 = compute_g0(&sys, 8).map(|r| r.coefficient).unwrap_or_else(|_| rat(-1));
            let ctx = InvariantContext::new(sys.clone(), g0);
            let inv_err = |e: crate::invariants::InvariantError| CliError::Input(e.to_string());
            match kind {
                "dim" => match invariant_space_dim(&ctx, args.m, 4 * args.m.max(1) as usize, 4 * args.samples.max(4), args.n, seed) {
                    Ok(r) => Ok((true, json!({"rank": r.rank, "report": to_value(&r)}))),
                    Err(e) => Ok((false, json!({"error": e.to_string()}))),
                },
                _ => {
                    let inv = GradedInvariant::theta_orbit(crate::exact::zero_vector(sys.l), args.m, args.n).map_err(inv_err)?;
                    let x = crate::domain::sample_d2_with_tau(&sys, seed, Complex64::new(0.1, 1.2)).map_err(|e| CliError::Input(e.to_string()))?;
                    if kind == "eval" {
                        let v = ctx.eval(&inv, &x).map_err(inv_err)?;
                        Ok((true, json!({"value": c2(v), "point": x.to_pairs()})))
                    } else {
                        let r = check_bidegree(&ctx, &inv, &x, args.samples, seed).map_err(inv_err)?;
                        let pass = r.r_psi < 1e-12 && r.r_rho < 1e-10 && r.r_w < 1e-6;
                        Ok((pass, json!({"residuals": to_value(&r)})))
                    }
                }
            }
        }
        Command::Frobenius(cmd) => frobenius(cmd, seed),
        Command::Suite { spec } => {
            let sys = load_system(spec)?;
            let rep = crate::suite::run_suite(&sys, seed);
            Ok((rep.pass, to_value(&rep)))
        }
    }
}

fn frobenius(cmd: &FrobeniusCmd, seed: u64) -> Result<(bool, Value), CliError> {
    let input = |e: crate::frobenius::FrobeniusError| CliError::Input(e.to_string());
    match cmd {
        FrobeniusCmd::Check(arg) => {
            let chart = load_chart(arg)?;
            let pts = chart.sample_points(arg.samples, seed);
            let rep = check_frobenius(&chart, &pts, arg.h).map_err(input)?;
            Ok((rep.passes(arg.tol), to_value(&rep)))
        }
        FrobeniusCmd::Intersect(arg) => {
            let chart = load_chart(arg)?;
            let pts = chart.sample_points(arg.samples, seed);
            let mut forms = Vec::new();
            let mut sym: f64 = 0.0;
            for t in &pts {
                let m = intersection_form(&chart, t).map_err(input)?;
                sym = sym.max(symmetry_residual(&m));
                forms.push(json!({"t": t.iter().map(|z| c2(*z)).collect::<Vec<_>>(), "form": mat_json(&m)}));
            }
            let es = check_e_shift(&chart, &pts, 1e-2).map_err(input)?;
            let pass = sym == 0.0 && es.first < 1e-7 && es.second < 1e-7;
            Ok((pass, json!({"symmetry_residual": sym, "e_shift": to_value(&es), "forms": forms})))
        }
        FrobeniusCmd::Deform { chart: arg, sigma_inverse } => {
            let chart = load_chart(arg)?;
            let s = match sigma_inverse {
                Some(text) => parse_poly(text, chart.n)?,
                None => unit_direction(&chart, 0.0, 1.0),
            };
            let pts = chart.sample_points(arg.samples.min(10), seed);
            let rep = conformal_deform(&chart, &DeformationSpec::new("user", s), &pts, arg.h).map_err(input)?;
            Ok((rep.criterion.passes && rep.axioms_pass, to_value(&rep)))
        }
        FrobeniusCmd::Sections { chart: arg, sections } => {
            let chart = load_chart(arg)?;
            let list: Vec<(String, Poly<Complex64>)> = if sections.is_empty() {
                vec![
                    ("trivial".into(), Poly::constant(chart.n, Complex64::new(1.0, 0.0))),
                    ("good_direction".into(), unit_direction(&chart, 1.0, 0.7)),
                ]
            } else {
                sections.iter().enumerate().map(|(k, s)| Ok((format!("section{k}"), parse_poly(s, chart.n)?))).collect::<Result<_, CliError>>()?
            };
            let pts = chart.sample_points(arg.samples.min(10), seed);
            let rep = check_conformal_structure(&BundleChart::new(chart), &list, &pts, arg.h).map_err(input)?;
            let pass = rep.passes && rep.sections.iter().all(|s| s.good.good && s.axioms_pass);
            Ok((pass, to_value(&rep)))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ELLWK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let (pass, report) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let doc = json!({"schema": SCHEMA, "pass": pass, "report": report});
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    if !pass {
        eprintln!("residual check failed");
    }
    i32::from(!pass)
}
