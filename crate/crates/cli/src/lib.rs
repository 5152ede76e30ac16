//! File formats, parallel scheduling and output for `harmonic` sweeps.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use harmonic_core::sweep::{evaluate_point, sweep_points, GridAxis, RunRecord, SweepSpec};
use harmonic_core::{CavityParams, EntanglementReport, SteadyStateBranch};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 14] = [
    "alpha_d",
    "beta_d",
    "branch_id",
    "stability",
    "alpha_abs",
    "alpha_phase",
    "beta_abs",
    "beta_phase",
    "eps_opt",
    "eps_opt_db",
    "insep",
    "insep_db",
    "R",
    "error",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    ParamsSyntax { path: PathBuf, source: toml::de::Error },
    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::ParamsSyntax { .. } => 2,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }
}

impl From<harmonic_core::Error> for CliError {
    fn from(e: harmonic_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// On-disk cavity parameters. `epsilon = 0` selects the linear cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub kappa_a1: f64,
    pub kappa_a2: f64,
    pub kappa_b1: f64,
    pub kappa_b2: f64,
    pub epsilon: f64,
}

impl ParamsFile {
    pub fn to_params(&self) -> Result<CavityParams, CliError> {
        let ParamsFile { kappa_a1, kappa_a2, kappa_b1, kappa_b2, epsilon } = *self;
        let params = if epsilon == 0.0 {
            CavityParams::linear(kappa_a1, kappa_a2, kappa_b1, kappa_b2)
        } else {
            CavityParams::new(kappa_a1, kappa_a2, kappa_b1, kappa_b2, epsilon)
        };
        Ok(params?)
    }
}

pub fn parse_params(text: &str, path: &Path) -> Result<CavityParams, CliError> {
    let file: ParamsFile =
        toml::from_str(text).map_err(|source| CliError::ParamsSyntax { path: path.to_owned(), source })?;
    file.to_params()
}

/// Parameters from `path`, or the defaults when no file is given.
pub fn load_params(path: Option<&Path>) -> Result<CavityParams, CliError> {
    match path {
        None => Ok(CavityParams::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
            parse_params(&text, path).map_err(|e| match e {
                CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
                other => other,
            })
        }
    }
}

/// Parse `start:stop:points`.
pub fn parse_range(s: &str) -> Result<GridAxis, CliError> {
    let bad = || CliError::Invalid(format!("range {s:?} is not start:stop:points"));
    let mut parts = s.split(':');
    let (Some(a), Some(b), Some(n), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let start = a.trim().parse::<f64>().map_err(|_| bad())?;
    let stop = b.trim().parse::<f64>().map_err(|_| bad())?;
    let points = n.trim().parse::<usize>().map_err(|_| bad())?;
    Ok(GridAxis::new(start, stop, points))
}

/// Evaluate a sweep on `workers` threads (all cores when `None`). Output
/// order is the point order and does not depend on the schedule.
pub fn run_parallel(params: &CavityParams, spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<RunRecord>, CliError> {
    use rayon::prelude::*;

    spec.validate()?;
    let points = sweep_points(params, spec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let chunks: Vec<Vec<RunRecord>> = pool.install(|| {
        points
            .par_iter()
            .map(|p| evaluate_point(params, p, spec.omega, spec.branch_policy))
            .collect()
    });
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One output row; `None` is an empty CSV cell or a JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub alpha_d: f64,
    pub beta_d: f64,
    pub branch_id: Option<u8>,
    pub stability: Option<&'static str>,
    pub alpha_abs: Option<f64>,
    pub alpha_phase: Option<f64>,
    pub beta_abs: Option<f64>,
    pub beta_phase: Option<f64>,
    pub eps_opt: Option<f64>,
    pub eps_opt_db: Option<f64>,
    pub insep: Option<f64>,
    pub insep_db: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub error: Option<&'static str>,
}

impl From<&RunRecord> for Row {
    fn from(rec: &RunRecord) -> Self {
        let b = rec.branch.as_ref();
        let m = rec.measures.as_ref();
        Row {
            alpha_d: rec.alpha_d,
            beta_d: rec.beta_d,
            branch_id: b.map(|b| b.id.0),
            stability: b.map(|b| b.stability.label()),
            alpha_abs: b.map(|b| b.alpha.norm()),
            alpha_phase: b.map(|b| b.alpha.arg()),
            beta_abs: b.map(|b| b.beta.norm()),
            beta_phase: b.map(|b| b.beta.arg()),
            eps_opt: m.map(|m| m.eps_opt),
            eps_opt_db: m.map(|m| m.eps_opt_db),
            insep: m.map(|m| m.insep),
            insep_db: m.map(|m| m.insep_db),
            r: rec.r(),
            error: rec.error.map(|e| e.as_str()),
        }
    }
}

/// Shortest round-trip scientific notation, e.g. `-2.5e-1`.
pub fn format_number(x: f64) -> String {
    format!("{x:e}")
}

impl Row {
    pub fn cells(&self) -> [String; 14] {
        let num = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        let text = |s: Option<&str>| s.unwrap_or_default().to_owned();
        [
            format_number(self.alpha_d),
            format_number(self.beta_d),
            self.branch_id.map(|i| i.to_string()).unwrap_or_default(),
            text(self.stability),
            num(self.alpha_abs),
            num(self.alpha_phase),
            num(self.beta_abs),
            num(self.beta_phase),
            num(self.eps_opt),
            num(self.eps_opt_db),
            num(self.insep),
            num(self.insep_db),
            num(self.r),
            text(self.error),
        ]
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| CliError::Output(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for rec in records {
        w.write_record(Row::from(rec).cells()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Output(e.into()))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[RunRecord], format: Format, out: W) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(records, out),
        Format::Json => {
            let rows: Vec<Row> = records.iter().map(Row::from).collect();
            write_json(&rows, out)
        }
    }
}

/// Run `f` against `destination` (stdout when `None`), with path context
/// on failure.
pub fn with_output(destination: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match destination {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
        Some(path) => {
            let context = |source| CliError::Io { path: path.to_owned(), source };
            let file = File::create(path).map_err(context)?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| match e {
                CliError::Output(source) => context(source),
                other => other,
            })?;
            w.flush().map_err(context)
        }
    }
}

pub fn emit(records: &[RunRecord], format: Format, destination: Option<&Path>) -> Result<(), CliError> {
    with_output(destination, |w| write_records(records, format, w))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchRow {
    pub branch_id: u8,
    pub stability: &'static str,
    pub marginal: bool,
    pub min_real_part: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
    pub alpha_abs: f64,
    pub alpha_phase: f64,
    pub beta_abs: f64,
    pub beta_phase: f64,
    pub residual: f64,
}

impl From<&SteadyStateBranch> for BranchRow {
    fn from(b: &SteadyStateBranch) -> Self {
        BranchRow {
            branch_id: b.id.0,
            stability: b.stability.label(),
            marginal: b.stability.marginal,
            min_real_part: b.stability.min_real_part,
            alpha_re: b.alpha.re,
            alpha_im: b.alpha.im,
            beta_re: b.beta.re,
            beta_im: b.beta.im,
            alpha_abs: b.alpha.norm(),
            alpha_phase: b.alpha.arg(),
            beta_abs: b.beta.norm(),
            beta_phase: b.beta.arg(),
            residual: b.residual,
        }
    }
}

pub const BRANCH_HEADER: [&str; 13] = [
    "branch_id",
    "stability",
    "marginal",
    "min_real_part",
    "alpha_re",
    "alpha_im",
    "beta_re",
    "beta_im",
    "alpha_abs",
    "alpha_phase",
    "beta_abs",
    "beta_phase",
    "residual",
];

pub fn write_branches<W: Write>(branches: &[SteadyStateBranch], format: Format, out: W) -> Result<(), CliError> {
    let rows: Vec<BranchRow> = branches.iter().map(BranchRow::from).collect();
    match format {
        Format::Json => write_json(&rows, out),
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
            let io = |e: csv::Error| CliError::Output(e.into());
            w.write_record(BRANCH_HEADER).map_err(io)?;
            for r in &rows {
                let f = format_number;
                w.write_record([
                    r.branch_id.to_string(),
                    r.stability.to_owned(),
                    r.marginal.to_string(),
                    f(r.min_real_part),
                    f(r.alpha_re),
                    f(r.alpha_im),
                    f(r.beta_re),
                    f(r.beta_im),
                    f(r.alpha_abs),
                    f(r.alpha_phase),
                    f(r.beta_abs),
                    f(r.beta_phase),
                    f(r.residual),
                ])
                .map_err(io)?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

/// Full measurement of one branch for `measure --format json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub alpha_d: f64,
    pub beta_d: f64,
    pub branch: BranchRow,
    pub omega: f64,
    pub eps_raw: f64,
    pub eps_opt: f64,
    pub eps_opt_db: f64,
    pub insep: f64,
    pub insep_db: f64,
    pub insep_degenerate: bool,
    pub entangled: bool,
    /// `[θin_A, r_A, θout_A, θin_B, r_B, θout_B]`.
    pub optimizer_witness: [f64; 6],
    pub eps_standard_form: f64,
    pub correlation: [[f64; 4]; 4],
    pub standard_form: [[f64; 4]; 4],
}

fn rows_of(m: &harmonic_core::CorrelationMatrix) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m.get(i, j)))
}

impl ReportJson {
    pub fn new(branch: &SteadyStateBranch, r: &EntanglementReport) -> Self {
        ReportJson {
            alpha_d: r.drive.alpha_d(),
            beta_d: r.drive.beta_d(),
            branch: branch.into(),
            omega: r.omega,
            eps_raw: r.epsilon_raw,
            eps_opt: r.epsilon_opt,
            eps_opt_db: r.epsilon_opt_db,
            insep: r.insep,
            insep_db: r.insep_db,
            insep_degenerate: r.insep_degenerate,
            entangled: r.entangled,
            optimizer_witness: r.optimizer_witness.params(),
            eps_standard_form: r.epsilon_standard_form,
            correlation: rows_of(&r.correlation),
            standard_form: rows_of(&r.standard_form_matrix),
        }
    }
}
