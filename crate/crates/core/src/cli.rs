//! Command-line front end.
//!
//! Every command writes a table (CSV, or JSON with `columns` and `rows`)
//! or, for `fit`, a JSON report. Exit codes: 0 success, 1 computation
//! error, 2 input error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::{Constants, LAMBDA_MEAN_MEV, LAMBDA_UPPER_MEV};
use crate::entanglement::sweep_report;
use crate::error::Error;
use crate::evolution::{
    evolve_1p_analytic, evolve_2p_analytic, evolve_numeric_grid, singlet_state,
    EffectiveHamiltonian, KaonParams, LindbladOperatorSet, DEFAULT_RK4_STEP,
};
use crate::fit::{
    average_configs, config_times, fit_lambda, format_f64, synth_dataset, AsymmetryDataset,
    ConfigKind, FitOptions,
};
use crate::observables::{asymmetry_lambda, asymmetry_qm, asymmetry_zeta, Strangeness, ZetaKind, ZetaModel};
use crate::qmat::{c, DensityMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kaon-decoherence", version, about = "Decoherence and entanglement loss of neutral kaon pairs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Constants file (TOML); the bundled PDG values are used when absent.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    /// Output format; tables default to csv, fit reports to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Units of λ given on the command line.
    #[arg(long, global = true, value_enum, default_value_t = Units::Tau)]
    pub units: Units,
    /// Factor applied to Δt inside A_QM (1 = lab times taken as proper times).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub dt_scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// λ in units of Γ_S.
    Tau,
    /// λ in MeV, converted with Γ_S from the constants file.
    Mev,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density matrix ρ(t) of a single kaon or of the singlet pair.
    Evolve(EvolveArgs),
    /// Strangeness asymmetries under the QM, λ and ζ descriptions.
    Asymmetry(AsymmetryArgs),
    /// Entanglement measures of the normalized pair state at given times.
    Entangle(EntangleArgs),
    /// Fit λ to one or more asymmetry datasets (CSV: t_l,t_r,asym,sigma).
    ///
    /// Each --data file is fitted separately; with several files the results
    /// are combined by inverse-variance weighting. To repeat the original
    /// two-configuration analysis, digitize the measured asymmetries for the
    /// 2cm-2cm and 2cm-7cm geometries into two files and pass both.
    Fit(FitArgs),
    /// Entropy and entanglement losses over a time grid for several λ.
    Sweep(SweepArgs),
    /// Seeded synthetic asymmetry dataset in the fit input format.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitialState {
    K0,
    K0bar,
    Ks,
    Kl,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Decoherence strength (default: the mean experimental value).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// 1 = single kaon, 2 = singlet pair.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub particles: u8,
    /// Initial state of a single kaon.
    #[arg(long, value_enum, default_value_t = InitialState::K0)]
    pub initial: InitialState,
    /// Add the max elementwise deviation of the RK4 solution.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = DEFAULT_RK4_STEP)]
    pub rk4_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AsymmetryMode {
    /// Grid over Δt = t_l − t_r with t_r fixed at --t-first.
    Dt,
    /// Grid over t with t_l = t_r = t.
    Equal,
    /// The two flight-distance configurations.
    Configs,
}

#[derive(Debug, Clone, Args)]
pub struct TimePoints {
    #[arg(long, value_enum, default_value_t = AsymmetryMode::Equal)]
    pub mode: AsymmetryMode,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Time of the first measurement in dt mode.
    #[arg(long, default_value_t = 0.55)]
    pub t_first: f64,
    /// Kaon momentum in MeV/c for the configuration times (default: linear 0.55 τ_S per 2 cm).
    #[arg(long)]
    pub momentum: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AsymmetryArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Constant ζ for the A_zeta_const column.
    #[arg(long, default_value_t = 0.13)]
    pub zeta: f64,
    #[command(flatten)]
    pub points: TimePoints,
}

#[derive(Debug, Args)]
pub struct EntangleArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Evaluation time; repeatable.
    #[arg(long = "t", default_values_t = vec![0.55])]
    pub times: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// ζ = 1 − e^{−λ min(t_l, t_r)}.
    Min,
    /// ζ = 1 − e^{−λ(t_l + t_r)}.
    Sum,
    /// Time-independent ζ.
    Const,
    /// ζ = 1 − e^{−λt}, equal times only.
    Single,
}

impl From<ModelArg> for ZetaKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Min => ZetaKind::TwoParticleMin,
            ModelArg::Sum => ZetaKind::OneParticleSum,
            ModelArg::Const => ZetaKind::Constant,
            ModelArg::Single => ZetaKind::SingleTime,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV; repeat for several configurations.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelArg::Min)]
    pub model: ModelArg,
    /// Upper end of the λ search range.
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Decoherence strength; repeatable (default: mean value and upper bound).
    #[arg(long)]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Strength of the generating model (ζ itself for --model const).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModelArg::Min)]
    pub model: ModelArg,
    /// Gaussian noise width; 0 gives exact data with unit errors.
    #[arg(long, default_value_t = 0.02)]
    pub sigma: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "synthetic")]
    pub label: String,
    #[command(flatten)]
    pub points: TimePoints,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::EmptyDataset
            | Error::InvalidParameter(_)
            | Error::NegativeTime(_) => EXIT_INPUT,
            _ => EXIT_COMPUTE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Column-oriented numeric output.
#[derive(Debug, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Uniform grid `start, start + step, …` with `round((stop − start)/step) + 1` points.
pub fn time_grid(start: f64, stop: f64, step: f64) -> crate::Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    if !(start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::InvalidParameter(format!(
            "grid needs stop >= start, got [{start}, {stop}]"
        )));
    }
    let n = ((stop - start) / step).round() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}

struct Context {
    constants: Constants,
    units: Units,
    dt_scale: f64,
}

impl Context {
    fn lambda_in(&self, v: f64) -> f64 {
        match self.units {
            Units::Tau => v,
            Units::Mev => self.constants.lambda_from_mev(v),
        }
    }

    fn lambda_or_mean(&self, v: Option<f64>) -> f64 {
        v.map_or_else(|| self.constants.lambda_from_mev(LAMBDA_MEAN_MEV), |v| self.lambda_in(v))
    }

    fn params(&self, lambda: f64) -> crate::Result<KaonParams> {
        KaonParams::from_constants(&self.constants, lambda)?.with_dt_scale(self.dt_scale)
    }
}

/// Opens the output sink up front so unwritable paths fail before any work.
fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::input(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_table(table: &Table, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Csv => table.write_csv(&mut BufWriter::new(&mut *out))?,
        Format::Json => {
            serde_json::to_writer(&mut *out, table).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn evolve(ctx: &Context, args: &EvolveArgs) -> CliResult<Table> {
    if !(args.rk4_step > 0.0) {
        return Err(CliError::input("--rk4-step must be > 0"));
    }
    let p = ctx.params(ctx.lambda_or_mean(args.lambda))?;
    let times = time_grid(args.grid.t_min, args.grid.t_max, args.grid.step)?;
    if times[0] < 0.0 {
        return Err(CliError::input("times must be non-negative"));
    }

    let (dim, rho0) = if args.particles == 1 {
        let ket = match args.initial {
            InitialState::K0 => Strangeness::Plus.ket(),
            InitialState::K0bar => Strangeness::Minus.ket(),
            InitialState::Ks => [c(1.0, 0.0), c(0.0, 0.0)],
            InitialState::Kl => [c(0.0, 0.0), c(1.0, 0.0)],
        };
        (2, DensityMatrix::pure(&ket)?)
    } else {
        (4, singlet_state())
    };

    let mut columns = vec!["t".to_string()];
    for i in 0..dim {
        columns.push(format!("rho_{i}{i}_re"));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            columns.push(format!("rho_{i}{j}_re"));
            columns.push(format!("rho_{i}{j}_im"));
        }
    }
    columns.push("coh_abs".into());
    columns.push("trace".into());
    if args.oracle {
        columns.push("oracle_dev".into());
    }

    let analytic = times
        .iter()
        .map(|&t| {
            if dim == 2 {
                evolve_1p_analytic(&rho0, t, &p)
            } else {
                evolve_2p_analytic(t, &p)
            }
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let numeric = if args.oracle {
        let (h, ops) = if dim == 2 {
            (
                EffectiveHamiltonian::single_particle(&p),
                LindbladOperatorSet::single_particle(p.lambda())?,
            )
        } else {
            (
                EffectiveHamiltonian::two_particle(&p),
                LindbladOperatorSet::two_particle(p.lambda())?,
            )
        };
        Some(evolve_numeric_grid(&rho0, &h, &ops, &times, args.rk4_step)?)
    } else {
        None
    };

    // the coherence reported is ρ_01 for one kaon and ρ_{SL,LS} for the pair
    let (ci, cj) = if dim == 2 { (0, 1) } else { (1, 2) };
    let mut table = Table {
        columns,
        rows: Vec::with_capacity(times.len()),
    };
    for (k, (&t, rho)) in times.iter().zip(&analytic).enumerate() {
        let m = rho.mat();
        let mut row = vec![t];
        row.extend((0..dim).map(|i| m[(i, i)].re));
        for i in 0..dim {
            for j in i + 1..dim {
                row.push(m[(i, j)].re);
                row.push(m[(i, j)].im);
            }
        }
        row.push(m[(ci, cj)].norm());
        row.push(rho.trace());
        if let Some(num) = &numeric {
            row.push(num[k].mat().max_abs_diff(m));
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn points(ctx: &Context, pts: &TimePoints) -> CliResult<Vec<(f64, f64)>> {
    Ok(match pts.mode {
        AsymmetryMode::Equal => time_grid(pts.grid.t_min, pts.grid.t_max, pts.grid.step)?
            .into_iter()
            .map(|t| (t, t))
            .collect(),
        AsymmetryMode::Dt => time_grid(pts.grid.t_min, pts.grid.t_max, pts.grid.step)?
            .into_iter()
            .map(|dt| (pts.t_first + dt, pts.t_first))
            .collect(),
        AsymmetryMode::Configs => [ConfigKind::Cfg2cm2cm, ConfigKind::Cfg2cm7cm]
            .into_iter()
            .map(|cfg| config_times(cfg, pts.momentum, &ctx.constants))
            .collect::<crate::Result<_>>()?,
    })
}

fn asymmetry(ctx: &Context, args: &AsymmetryArgs) -> CliResult<Table> {
    let lambda = ctx.lambda_or_mean(args.lambda);
    let p = ctx.params(lambda)?;
    let min = ZetaModel::TwoParticleMin { lambda };
    let sum = ZetaModel::OneParticleSum { lambda };
    let constant = ZetaModel::Constant { zeta: args.zeta };
    constant.validate()?;

    let mut table = Table::new(&[
        "t_l",
        "t_r",
        "dt",
        "A_QM",
        "A_lambda",
        "A_zeta_min",
        "A_zeta_sum",
        "A_zeta_const",
    ]);
    for (t_l, t_r) in points(ctx, &args.points)? {
        table.rows.push(vec![
            t_l,
            t_r,
            t_l - t_r,
            asymmetry_qm(t_l - t_r, &p),
            asymmetry_lambda(t_l, t_r, &p)?,
            asymmetry_zeta(t_l, t_r, &p, &min)?,
            asymmetry_zeta(t_l, t_r, &p, &sum)?,
            asymmetry_zeta(t_l, t_r, &p, &constant)?,
        ]);
    }
    Ok(table)
}

fn entangle(ctx: &Context, args: &EntangleArgs) -> CliResult<Table> {
    let p = ctx.params(ctx.lambda_or_mean(args.lambda))?;
    let mut times = args.times.clone();
    times.sort_by(f64::total_cmp);
    let mut table = Table::new(&[
        "t",
        "lambda",
        "lambda_mev",
        "S",
        "S_left",
        "S_right",
        "w_psi_minus",
        "w_psi_plus",
        "w_phi_minus",
        "w_phi_plus",
        "ppt_min_eigval",
        "reduction_min_eigval",
        "C",
        "f",
        "E",
        "zeta",
        "loss_C",
        "loss_E",
    ]);
    for r in sweep_report(&times, &p)? {
        table.rows.push(vec![
            r.t,
            r.lambda,
            ctx.constants.lambda_to_mev(r.lambda),
            r.entropy,
            r.reduced_entropy_left,
            r.reduced_entropy_right,
            r.bell.w_minus,
            r.bell.w_plus,
            r.bell.w_phi_minus,
            r.bell.w_phi_plus,
            r.ppt_min_eigval,
            r.reduction_min_eigval,
            r.concurrence,
            r.fraction,
            r.eof,
            r.zeta,
            r.loss_c,
            r.loss_e,
        ]);
    }
    Ok(table)
}

fn sweep(ctx: &Context, args: &SweepArgs) -> CliResult<Table> {
    let lambdas: Vec<f64> = if args.lambda.is_empty() {
        [LAMBDA_MEAN_MEV, LAMBDA_UPPER_MEV]
            .iter()
            .map(|&l| ctx.constants.lambda_from_mev(l))
            .collect()
    } else {
        args.lambda.iter().map(|&l| ctx.lambda_in(l)).collect()
    };
    let times = time_grid(args.t_min, args.t_max, args.step)?;
    let mut table = Table::new(&["lambda", "lambda_mev", "t", "S", "loss_E", "loss_C", "zeta"]);
    for lambda in lambdas {
        let p = ctx.params(lambda)?;
        for r in sweep_report(&times, &p)? {
            table.rows.push(vec![
                lambda,
                ctx.constants.lambda_to_mev(lambda),
                r.t,
                r.entropy,
                r.loss_e,
                r.loss_c,
                r.zeta,
            ]);
        }
    }
    Ok(table)
}

fn fit(ctx: &Context, args: &FitArgs, out: &mut dyn Write, format: Format) -> CliResult<()> {
    let datasets = args
        .data
        .iter()
        .map(|path| {
            AsymmetryDataset::read_csv(path).map_err(|e| {
                let mut err = CliError::from(e);
                err.message = format!("{}: {}", path.display(), err.message);
                err
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let opts = FitOptions {
        lambda_max: ctx.lambda_in(args.lambda_max),
    };
    let p = ctx.params(0.0)?;
    let kind = ZetaKind::from(args.model);
    let fits = datasets
        .iter()
        .map(|ds| fit_lambda(ds, &p, kind, &opts))
        .collect::<crate::Result<Vec<_>>>()?;
    for f in &fits {
        if f.boundary {
            eprintln!(
                "warning: {}: best fit lies on the edge of the search range (lambda = {})",
                f.label, f.lambda_hat
            );
        } else if !f.interval_bracketed {
            eprintln!("warning: {}: the error interval reaches the search range edge", f.label);
        }
    }
    let result = average_configs(&fits)?;
    let report = result.report(&ctx.constants);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "label,model,lambda_hat,lambda_err_lo,lambda_err_hi,lambda_mev,chi2_min,ndf,zeta_hat,boundary"
            )?;
            let rows = report.per_config.iter().chain(std::iter::once(&report));
            for r in rows {
                let model = serde_json::to_value(r.model).map_err(io::Error::from)?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.label.replace(',', ";"),
                    model.as_str().unwrap_or_default(),
                    format_f64(r.lambda_hat),
                    format_f64(r.lambda_err_lo),
                    format_f64(r.lambda_err_hi),
                    format_f64(r.lambda_mev),
                    format_f64(r.chi2_min),
                    r.ndf,
                    format_f64(r.zeta_hat),
                    r.boundary
                )?;
            }
        }
    }
    Ok(())
}

fn synth(ctx: &Context, args: &SynthArgs, out: &mut dyn Write) -> CliResult<()> {
    let kind = ZetaKind::from(args.model);
    let strength = match (kind, args.lambda) {
        (ZetaKind::Constant, Some(z)) => z,
        (ZetaKind::Constant, None) => 0.13,
        (_, l) => ctx.lambda_or_mean(l),
    };
    let model = kind.with_strength(strength)?;
    let p = ctx.params(0.0)?;
    let grid = points(ctx, &args.points)?;
    let mut ds = synth_dataset(&p, &model, &grid, args.sigma, args.seed)?;
    ds.label = args.label.clone();
    ds.write_csv(out)?;
    Ok(())
}

fn execute(cli: &Cli) -> CliResult<()> {
    if !(cli.global.dt_scale > 0.0 && cli.global.dt_scale.is_finite()) {
        return Err(CliError::input("--dt-scale must be > 0"));
    }
    let constants = match &cli.global.constants {
        Some(path) => Constants::load(path).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err.code = EXIT_INPUT;
            err
        })?,
        None => Constants::default(),
    };
    if let Command::Fit(args) = &cli.command {
        if let Some(missing) = args.data.iter().find(|p| !p.is_file()) {
            return Err(CliError::input(format!("cannot read {}", missing.display())));
        }
    }
    let ctx = Context {
        constants,
        units: cli.global.units,
        dt_scale: cli.global.dt_scale,
    };
    let mut out = open_output(cli.global.output.as_deref())?;
    let table_format = cli.global.format.unwrap_or(Format::Csv);
    match &cli.command {
        Command::Evolve(a) => emit_table(&evolve(&ctx, a)?, table_format, &mut out)?,
        Command::Asymmetry(a) => emit_table(&asymmetry(&ctx, a)?, table_format, &mut out)?,
        Command::Entangle(a) => emit_table(&entangle(&ctx, a)?, table_format, &mut out)?,
        Command::Sweep(a) => emit_table(&sweep(&ctx, a)?, table_format, &mut out)?,
        Command::Fit(a) => fit(&ctx, a, &mut out, cli.global.format.unwrap_or(Format::Json))?,
        Command::Synth(a) => synth(&ctx, a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
