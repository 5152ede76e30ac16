use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonic_cli::{
    emit, load_params, parse_range, run_parallel, with_output, write_branches, write_json, write_records, CliError,
    Format, ReportJson,
};
use harmonic_core::sweep::{
    evaluate_point, BranchPolicy, GridAxis, SweepPoint, SweepSpec, DEFAULT_MAP_EXTENT, DEFAULT_MAP_POINTS,
    DEFAULT_THETA_STEPS,
};
use harmonic_core::{critical_amplitudes, make_drive, report, steady_states, CavityParams};
use serde::Serialize;

/// Steady states, output noise and harmonic entanglement of a driven
/// doubly resonant second-harmonic cavity.
#[derive(Parser)]
#[command(name = "harmonic", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file with kappa_a1, kappa_a2, kappa_b1, kappa_b2 and epsilon.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Analysis frequency in units of the decay rates.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    omega: f64,
    #[arg(long, global = true, value_enum)]
    branch_policy: Option<Policy>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the critical drive amplitudes.
    Crit,
    /// Steady states and their stability at one drive point.
    Steady(DriveArgs),
    /// Entanglement measures for every stable branch at one drive point.
    Measure(DriveArgs),
    /// Two-dimensional sweep over both drives.
    Map(RangeArgs),
    /// One-dimensional sweep along the fundamental or the harmonic drive axis.
    Line(RangeArgs),
    /// Constant total input power path.
    Polar(PolarArgs),
}

#[derive(Args)]
struct DriveArgs {
    /// Fundamental drive in units of its self-pulsing critical amplitude.
    #[arg(long, allow_negative_numbers = true)]
    alpha_d: f64,
    /// Harmonic drive in units of the OPO threshold amplitude.
    #[arg(long, allow_negative_numbers = true)]
    beta_d: f64,
}

#[derive(Args)]
struct RangeArgs {
    /// start:stop:points
    #[arg(long, allow_hyphen_values = true)]
    alpha_range: Option<String>,
    /// start:stop:points
    #[arg(long, allow_hyphen_values = true)]
    beta_range: Option<String>,
}

#[derive(Args)]
struct PolarArgs {
    /// Total input power in units of the OPO threshold power.
    #[arg(long)]
    xi: f64,
    #[arg(long, default_value_t = DEFAULT_THETA_STEPS)]
    theta_steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    All,
    Fold,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<Policy> for BranchPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::All => BranchPolicy::AllBranches,
            Policy::Fold => BranchPolicy::FoldBySign,
            Policy::Max => BranchPolicy::MaxEntanglement,
        }
    }
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Serialize)]
struct Critical {
    alpha_c: f64,
    beta_c: f64,
}

fn default_axis() -> GridAxis {
    GridAxis::new(-DEFAULT_MAP_EXTENT, DEFAULT_MAP_EXTENT, DEFAULT_MAP_POINTS)
}

fn axis(arg: &Option<String>) -> Result<Option<GridAxis>, CliError> {
    arg.as_deref().map(parse_range).transpose()
}

fn line_spec(r: &RangeArgs) -> Result<SweepSpec, CliError> {
    match (axis(&r.alpha_range)?, axis(&r.beta_range)?) {
        (Some(a), None) => Ok(SweepSpec::line_shg(a)),
        (None, Some(b)) => Ok(SweepSpec::line_opo(b)),
        (None, None) => Err(CliError::Invalid("line needs --alpha-range or --beta-range".into())),
        (Some(_), Some(_)) => Err(CliError::Invalid("line takes only one of --alpha-range and --beta-range".into())),
    }
}

/// Exit status 3 when any record carries a computational failure.
fn sweep(params: &CavityParams, spec: SweepSpec, common: &Common) -> Result<u8, CliError> {
    let spec = match common.branch_policy {
        Some(p) => spec.with_policy(p.into()),
        None => spec,
    }
    .with_omega(common.omega);
    let records = run_parallel(params, &spec, common.workers)?;
    emit(&records, common.format.into(), common.out.as_deref())?;
    Ok(if records.iter().any(|r| r.is_failure()) { 3 } else { 0 })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let common = &cli.common;
    if !common.omega.is_finite() {
        return Err(CliError::Invalid("--omega must be finite".into()));
    }
    if common.workers == Some(0) {
        return Err(CliError::Invalid("--workers must be positive".into()));
    }
    let params = load_params(common.params.as_deref())?;
    let format: Format = common.format.into();
    let out = common.out.as_deref();
    match &cli.command {
        Command::Crit => {
            let c = critical_amplitudes(&params);
            with_output(out, |w| match format {
                Format::Json => write_json(&Critical { alpha_c: c.alpha_c, beta_c: c.beta_c }, w),
                Format::Csv => {
                    writeln!(w, "alpha_c,beta_c\n{:e},{:e}", c.alpha_c, c.beta_c)?;
                    Ok(())
                }
            })?;
            Ok(0)
        }
        Command::Steady(d) => {
            let drive = make_drive(&params, d.alpha_d, d.beta_d);
            let branches = steady_states(&params, &drive).map_err(|e| CliError::Invalid(e.to_string()));
            match branches {
                Ok(b) => {
                    with_output(out, |w| write_branches(&b, format, w))?;
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("harmonic: {e}");
                    Ok(3)
                }
            }
        }
        Command::Measure(d) => {
            let point = SweepPoint { index: 0, alpha_d: d.alpha_d, beta_d: d.beta_d, polar: None };
            let policy = common.branch_policy.map_or(BranchPolicy::AllBranches, Into::into);
            if policy == BranchPolicy::FoldBySign {
                return Err(CliError::Invalid("fold branch policy is only defined for maps".into()));
            }
            let records = evaluate_point(&params, &point, common.omega, policy);
            let failed = records.iter().any(|r| r.is_failure());
            match format {
                Format::Csv => with_output(out, |w| write_records(&records, format, w))?,
                Format::Json => {
                    let drive = make_drive(&params, d.alpha_d, d.beta_d);
                    let branches = steady_states(&params, &drive).unwrap_or_default();
                    let reports: Vec<ReportJson> = records
                        .iter()
                        .filter(|r| r.measures.is_some())
                        .filter_map(|r| branches.iter().find(|b| Some(b.id) == r.branch.map(|s| s.id)))
                        .filter_map(|b| report(&params, &drive, b, common.omega).ok().map(|r| ReportJson::new(b, &r)))
                        .collect();
                    with_output(out, |w| write_json(&reports, w))?
                }
            }
            Ok(if failed { 3 } else { 0 })
        }
        Command::Map(r) => {
            let spec = SweepSpec::map(
                axis(&r.alpha_range)?.unwrap_or_else(default_axis),
                axis(&r.beta_range)?.unwrap_or_else(default_axis),
            );
            sweep(&params, spec, common)
        }
        Command::Line(r) => sweep(&params, line_spec(r)?, common),
        Command::Polar(p) => sweep(&params, SweepSpec::polar(p.xi, p.theta_steps), common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("harmonic: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
