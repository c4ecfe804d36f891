//! Command-line front end. [`run`] parses arguments, dispatches one
//! subcommand and maps the outcome to an exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{self, StateFile};
use crate::linalg::trace_product;
use crate::phase_space::{
    cohen_transform, fock, fock_mixture, glauber_sudarshan, husimi, squeezed_vacuum, vacuum,
    wigner, wigner_mixture, CohenKernel, PhaseSpaceGrid, WavefunctionGrid, DEFAULT_DOMAIN,
};
use crate::qjsd::{
    build_qjsd, parse_complex, BuildOptions, DiscreteQjsd, HashingSpec, OperatorMeasure,
    DEFAULT_BUDGET,
};
use crate::spectral::{
    born_distribution, eigendecompose, joint_spectral_measure, DensityOperator, HermitianOperator,
};
use crate::stats::{
    antisymmetric_covariance, conditional_expectation, quantum_covariance, symmetric_covariance,
    two_state_value, weak_value, DEFAULT_THRESHOLD,
};
use crate::transform::{
    faithfulness_rank, quantise, quasi_classicalise, verify_adjointness, RasterSpec,
};
use crate::verify::{run_suite, Suite};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "QJSD_NUM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qjsd",
    version,
    about = "Quasi-joint-spectral distributions and phase-space representations"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Output path; `-` writes to stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct StateArgs {
    /// State file (`kind`: density or ket)
    #[arg(long)]
    state: PathBuf,
    /// Rescale a ket that is not normalised instead of rejecting it
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Observable file; repeat once per axis, in axis order
    #[arg(long = "obs", required = true)]
    obs: Vec<PathBuf>,
    /// Hashing preset (kd, anti-kd, mh, alpha:<c>, kappa:<r>) or hashing file
    #[arg(long = "hash")]
    hash: Option<String>,
    /// Maximum number of operator products in the expansion
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Observable A then observable B
    #[arg(long = "obs", required = true, num_args = 1)]
    obs: Vec<PathBuf>,
    #[command(flatten)]
    state: StateArgs,
    /// Hashing preset or file; overridden by --alpha
    #[arg(long = "hash")]
    hash: Option<String>,
    /// alpha-family parameter, e.g. 1, 0, i, 0.3+0.7i
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
}

#[derive(Debug, Args)]
struct PhaseInput {
    /// State in the number basis, or a sampled wavefunction
    #[arg(long, conflicts_with_all = ["preset", "grid"])]
    state: Option<PathBuf>,
    /// vacuum, fock:<k> or squeezed:<r>
    #[arg(long, conflicts_with = "grid")]
    preset: Option<String>,
    /// Phase-space grid CSV with its `<grid>.json` sidecar
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Number of grid points per axis
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Position window `lo:hi`
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Rescale a state that is not normalised instead of rejecting it
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral measures of observables; with --state, their Born distribution
    Spectra {
        #[arg(long = "obs", required = true)]
        obs: Vec<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        renormalize: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Quasi-joint-probability distribution as CSV
    Qjp {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Operator of a tabulated function
    Quantise {
        #[command(flatten)]
        measure: MeasureArgs,
        /// JSON list of {"point": [...], "value": [re, im]}
        #[arg(long)]
        function: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Operator-valued distribution, or with --state the QJP on a raster
    Classicalise {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        renormalize: bool,
        /// Cell width of a raster covering the support
        #[arg(long, requires = "state")]
        raster_step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Residual between the quantum and classical pairings
    VerifyAdjoint {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        state: StateArgs,
        /// JSON list of {"point": [...], "value": [re, im]}
        #[arg(long)]
        function: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Rank of the quasi-classicalisation map
    Faithfulness {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Wigner function on a grid
    Wigner {
        #[command(flatten)]
        input: PhaseInput,
        #[command(flatten)]
        out: Output,
    },
    /// Cohen-class representation
    Cohen {
        #[command(flatten)]
        input: PhaseInput,
        /// wigner, kd, anti-kd, mh, born-jordan or kappa:<r>
        #[arg(long, default_value = "wigner", allow_hyphen_values = true)]
        kernel: String,
        #[command(flatten)]
        out: Output,
    },
    /// Husimi function
    Husimi {
        #[command(flatten)]
        input: PhaseInput,
        #[command(flatten)]
        out: Output,
    },
    /// Regularised Glauber-Sudarshan function
    Gs {
        #[command(flatten)]
        input: PhaseInput,
        /// Tikhonov regularisation of the Gaussian deconvolution
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Weak value of A post-selected on B = b; two-state value with --alpha
    WeakValue {
        #[command(flatten)]
        pair: PairArgs,
        /// Eigenvalue b of B to post-select on
        #[arg(long = "post-select", allow_hyphen_values = true)]
        post_select: f64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Conditional quasi-expectation of A given B
    CondExp {
        #[command(flatten)]
        pair: PairArgs,
        /// Single eigenvalue b of B; without it every atom is reported
        #[arg(long = "post-select", allow_hyphen_values = true)]
        post_select: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Quantum covariance of A and B with its symmetric and antisymmetric parts
    Covariance {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Invariant battery
    Verify {
        /// all, spectral, qjsd, transform, stats or phase-space
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed of the random case generator
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

/// Failure of a command: a library error or a failed verification run.
enum Failure {
    Domain(Error),
    Verification { failed: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

pub fn error_json(e: &Error) -> Value {
    let mut v = json!({ "code": e.code(), "message": e.to_string() });
    match e {
        Error::Schema { pointer, .. } => v["pointer"] = json!(pointer),
        Error::NotHermitian { residual }
        | Error::InvalidState { residual, .. }
        | Error::CommutativityViolation { residual, .. } => v["residual"] = json!(residual),
        Error::Io { path, .. } => v["path"] = json!(path),
        _ => {}
    }
    v
}

fn usage_json(kind: ErrorKind, message: &str) -> Value {
    let code = match kind {
        ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand => "unknown-subcommand",
        _ => "usage",
    };
    json!({ "code": code, "message": message.trim() })
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    // a pool may already exist when run is called twice in one process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Runs one command line; returns 0 on success, 1 on a domain error and 2
/// on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", usage_json(e.kind(), &e.to_string()));
            return 2;
        }
    };
    if let Err(message) = configure_threads() {
        eprintln!("{}", json!({ "code": "usage", "message": message }));
        return 2;
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Domain(e)) => {
            eprintln!("{}", error_json(&e));
            1
        }
        Err(Failure::Verification { failed }) => {
            eprintln!(
                "{}",
                json!({ "code": "verification-failed", "message": format!("{failed} properties failed") })
            );
            1
        }
    }
}

fn load_observables(paths: &[PathBuf]) -> Result<Vec<HermitianOperator>> {
    paths.iter().map(|p| io::load_operator(p)).collect()
}

fn hashing_for(hash: Option<&str>, n_axes: usize) -> Result<HashingSpec> {
    match hash {
        Some(h) => io::resolve_hashing(h),
        None if n_axes == 2 => Ok(HashingSpec::kirkwood_dirac()),
        None => Ok(HashingSpec::ordered_product(n_axes)),
    }
}

fn build(measure: &MeasureArgs) -> Result<DiscreteQjsd> {
    let obs = load_observables(&measure.obs)?;
    let spec = hashing_for(measure.hash.as_deref(), obs.len())?;
    let options = BuildOptions {
        budget: measure.budget,
        ..BuildOptions::default()
    };
    build_qjsd(&spec, &obs, &options)
}

fn state(args: &StateArgs) -> Result<DensityOperator> {
    io::load_state(&args.state, args.renormalize)
}

fn emit_json(out: &Output, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialise");
    text.push('\n');
    io::emit(&out.out, &text)
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn parse_domain(s: Option<&str>) -> Result<(f64, f64)> {
    let Some(s) = s else {
        return Ok(DEFAULT_DOMAIN);
    };
    let bad = || Error::InvalidArgument(format!("domain must look like lo:hi, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn preset_state(name: &str, n: usize, lo: f64, hi: f64) -> Result<WavefunctionGrid> {
    let bad = || Error::InvalidArgument(format!("unknown state preset {name:?}"));
    if name == "vacuum" {
        return vacuum(n, lo, hi);
    }
    if let Some(k) = name.strip_prefix("fock:") {
        return fock(k.trim().parse().map_err(|_| bad())?, n, lo, hi);
    }
    if let Some(r) = name.strip_prefix("squeezed:") {
        return squeezed_vacuum(r.trim().parse().map_err(|_| bad())?, n, lo, hi);
    }
    Err(bad())
}

fn wigner_of(input: &PhaseInput) -> Result<PhaseSpaceGrid> {
    let (lo, hi) = parse_domain(input.domain.as_deref())?;
    if let Some(name) = &input.preset {
        return wigner(&preset_state(name, input.n, lo, hi)?);
    }
    let Some(path) = &input.state else {
        return Err(Error::InvalidArgument(
            "one of --state, --preset or --grid is required".into(),
        ));
    };
    match io::parse_state_file(&io::read_text(path)?)? {
        StateFile::Wavefunction { q0, dq, samples } => {
            let psi = if input.renormalize {
                WavefunctionGrid::normalised(q0, dq, samples)?
            } else {
                WavefunctionGrid::new(q0, dq, samples)?
            };
            wigner(&psi)
        }
        file => {
            let rho = file.into_density(input.renormalize)?;
            wigner_mixture(&fock_mixture(&rho, input.n, lo, hi)?)
        }
    }
}

fn phase_input(input: &PhaseInput) -> Result<PhaseSpaceGrid> {
    match &input.grid {
        Some(path) => {
            let csv = io::read_text(path)?;
            let sidecar = io::read_text(&io::sidecar_path(path))?;
            io::parse_grid(&csv, &sidecar)
        }
        None => wigner_of(input),
    }
}

fn pair_qjsd(
    pair: &PairArgs,
) -> Result<(
    HermitianOperator,
    HermitianOperator,
    DiscreteQjsd,
    Complex64,
)> {
    if pair.obs.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected --obs A --obs B, got {} observables",
            pair.obs.len()
        )));
    }
    let obs = load_observables(&pair.obs)?;
    let (spec, alpha) = match &pair.alpha {
        Some(a) => {
            let alpha = parse_complex(a)?;
            (HashingSpec::alpha(alpha), alpha)
        }
        None => (
            hashing_for(pair.hash.as_deref(), 2)?,
            Complex64::new(1.0, 0.0),
        ),
    };
    let q = build_qjsd(&spec, &obs, &BuildOptions::default())?;
    let mut it = obs.into_iter();
    let (a, b) = (
        it.next().expect("two observables"),
        it.next().expect("two observables"),
    );
    Ok((a, b, q, alpha))
}

fn spectra(
    obs: &[PathBuf],
    state_path: Option<&Path>,
    renormalize: bool,
    out: &Output,
) -> Result<()> {
    let ops = load_observables(obs)?;
    let measures = ops
        .iter()
        .map(|h| eigendecompose(h, None))
        .collect::<Result<Vec<_>>>()?;
    let observables: Vec<Value> = measures
        .iter()
        .map(|m| {
            json!({
                "atoms": m.atoms().iter().map(|a| json!({
                    "value": a.value,
                    "multiplicity": trace_product(&a.projector, &crate::linalg::identity(m.dim())).re.round() as u64,
                    "projector": io::operator_json(&a.projector)["matrix"],
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut doc = json!({ "observables": observables });
    if let Some(path) = state_path {
        let rho = io::load_state(path, renormalize)?;
        let joint = joint_spectral_measure(&measures)?;
        let born = born_distribution(&joint, &rho)?;
        doc["born"] = Value::Array(
            born.reported()
                .into_iter()
                .map(|(point, p)| json!({ "point": point, "probability": p }))
                .collect(),
        );
    }
    emit_json(out, &doc)
}

fn classicalise(
    measure: &MeasureArgs,
    state_path: Option<&Path>,
    renormalize: bool,
    raster_step: Option<f64>,
    out: &Output,
) -> Result<()> {
    let q = build(measure)?;
    let Some(path) = state_path else {
        return io::emit(&out.out, &io::measure_csv(&q));
    };
    let rho = io::load_state(path, renormalize)?;
    let qjp = quasi_classicalise(&q, &rho)?;
    let Some(step) = raster_step else {
        return io::emit(&out.out, &io::qjp_csv(&qjp));
    };
    let n = q.n_axes();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in &qjp.support {
        for k in 0..n {
            lo[k] = lo[k].min(p.point[k]);
            hi[k] = hi[k].max(p.point[k]);
        }
    }
    let spec = RasterSpec::covering(&lo, &hi, &vec![step; n])?;
    let raster = qjp.rasterize(&spec)?;
    let mut text = io::axis_names(n).join(",");
    text.push_str(",re,im\n");
    for (flat, v) in raster.values.iter().enumerate() {
        for x in raster.spec.center(flat) {
            text.push_str(&io::fmt_f64(x));
            text.push(',');
        }
        let _ = writeln!(text, "{},{}", io::fmt_f64(v.re), io::fmt_f64(v.im));
    }
    io::emit(&out.out, &text)
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Spectra {
            obs,
            state,
            renormalize,
            out,
        } => spectra(&obs, state.as_deref(), renormalize, &out)?,
        Command::Qjp {
            measure,
            state: s,
            out,
        } => {
            let q = build(&measure)?;
            let qjp = quasi_classicalise(&q, &state(&s)?)?;
            io::emit(&out.out, &io::qjp_csv(&qjp))?;
        }
        Command::Quantise {
            measure,
            function,
            out,
        } => {
            let q = build(&measure)?;
            let f = io::parse_tabulated(&io::read_text(&function)?)?;
            emit_json(&out, &io::operator_json(&quantise(&f, &q)?))?;
        }
        Command::Classicalise {
            measure,
            state,
            renormalize,
            raster_step,
            out,
        } => classicalise(&measure, state.as_deref(), renormalize, raster_step, &out)?,
        Command::VerifyAdjoint {
            measure,
            state: s,
            function,
            out,
        } => {
            let q = build(&measure)?;
            let f = io::parse_tabulated(&io::read_text(&function)?)?;
            let residual = verify_adjointness(&f, &q, &state(&s)?)?;
            emit_json(&out, &json!({ "residual": residual }))?;
        }
        Command::Faithfulness { measure, out } => {
            let q = build(&measure)?;
            let rank = faithfulness_rank(&q);
            let full = q.dim() * q.dim();
            emit_json(
                &out,
                &json!({ "rank": rank, "dim_squared": full, "faithful": rank == full }),
            )?;
        }
        Command::Wigner { input, out } => {
            if input.grid.is_some() {
                return Err(
                    Error::InvalidArgument("wigner takes --state or --preset".into()).into(),
                );
            }
            io::write_grid(&out.out, &wigner_of(&input)?)?;
        }
        Command::Cohen { input, kernel, out } => {
            let kernel = CohenKernel::parse(&kernel)?;
            io::write_grid(&out.out, &cohen_transform(&phase_input(&input)?, &kernel)?)?;
        }
        Command::Husimi { input, out } => {
            io::write_grid(&out.out, &husimi(&phase_input(&input)?)?)?;
        }
        Command::Gs { input, eps, out } => {
            io::write_grid(&out.out, &glauber_sudarshan(&phase_input(&input)?, eps)?)?;
        }
        Command::WeakValue {
            pair,
            post_select,
            threshold,
            out,
        } => {
            let rho = state(&pair.state)?;
            let obs = load_observables(&pair.obs)?;
            if obs.len() != 2 {
                return Err(Error::InvalidArgument("expected --obs A --obs B".into()).into());
            }
            let alpha = match &pair.alpha {
                Some(a) => parse_complex(a)?,
                None => Complex64::new(1.0, 0.0),
            };
            let w = weak_value(&obs[0], &obs[1], post_select, &rho, threshold)?;
            let v = two_state_value(&obs[0], &obs[1], post_select, &rho, alpha, threshold)?;
            emit_json(
                &out,
                &json!({
                    "post_select": post_select,
                    "alpha": complex(alpha),
                    "weak_value": complex(w),
                    "value": complex(v),
                }),
            )?;
        }
        Command::CondExp {
            pair,
            post_select,
            threshold,
            out,
        } => {
            let rho = state(&pair.state)?;
            let (_, _, q, _) = pair_qjsd(&pair)?;
            let id = |x: &[f64]| Complex64::new(x[0], 0.0);
            let ce = conditional_expectation(&id, &q, &rho, threshold)?;
            let doc = match post_select {
                Some(b) => {
                    let tol = q.merge_tol();
                    if let Some((_, p)) = ce.excluded.iter().find(|(x, _)| (x - b).abs() <= tol) {
                        return Err(Error::DegeneratePostSelection {
                            probability: *p,
                            threshold,
                        }
                        .into());
                    }
                    let v = ce.value_at(b, tol).ok_or_else(|| {
                        Error::InvalidArgument(format!("{b} is not an eigenvalue of B"))
                    })?;
                    json!({ "b": b, "value": complex(v) })
                }
                None => json!({
                    "atoms": ce.atoms.iter().zip(&ce.weights).map(|((b, v), w)| json!({
                        "b": b, "value": complex(*v), "probability": w,
                    })).collect::<Vec<_>>(),
                    "excluded": ce.excluded.iter().map(|(b, p)| json!({ "b": b, "probability": p })).collect::<Vec<_>>(),
                }),
            };
            emit_json(&out, &doc)?;
        }
        Command::Covariance { pair, out } => {
            let rho = state(&pair.state)?;
            let (a, b, q, _) = pair_qjsd(&pair)?;
            let id = |x: &[f64]| Complex64::new(x[0], 0.0);
            let cv = quantum_covariance(&id, &id, &q, &rho)?;
            emit_json(
                &out,
                &json!({
                    "covariance": complex(cv),
                    "symmetric": symmetric_covariance(&a, &b, &rho)?,
                    "antisymmetric": antisymmetric_covariance(&a, &b, &rho)?,
                }),
            )?;
        }
        Command::Verify { suite, seed, out } => {
            let suite: Suite = suite.parse()?;
            let reports = run_suite(suite, seed)?;
            let mut text = String::new();
            for r in &reports {
                let _ = writeln!(text, "{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            let _ = writeln!(
                text,
                "{} of {} properties passed (seed {seed})",
                reports.len() - failed,
                reports.len()
            );
            io::emit(&out.out, &text)?;
            if failed > 0 {
                return Err(Failure::Verification { failed });
            }
        }
    }
    Ok(())
}
