//! Command-line front end: argument parsing, table emission (CSV/JSON) and
//! exit-code mapping. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 1 verification failure, 2 parameter error,
//! 3 solver non-convergence, 4 I/O error.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::analytics::threshold_gamma;
use crate::eig;
use crate::model::{build_hamiltonian, Gauge, RingParams};
use crate::phase::{near_ep_mask, TAU_REAL};
use crate::sweep::{band_sweep, critical_curve, kc_curve, phase_diagram};
use crate::verify::{self, Fault, VerifyConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const SCHEMA_VERSION: &str = "1";
/// Optional override for the worker-thread count of parameter sweeps.
pub const THREADS_ENV: &str = "PTRING_THREADS";
const DEFAULT_GRID: usize = 301;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::DimensionMismatch { .. } => EXIT_PARAMETER,
        Error::Unconverged { .. } | Error::Consistency(_) => EXIT_UNCONVERGED,
        Error::Io(_) => EXIT_IO,
    }
}

/// One table cell. Floats print in shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v:?}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl Cell {
    /// Inverse of `Display`: booleans, then integers, then floats, else text.
    pub fn parse(field: &str) -> Cell {
        match field {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            _ => {}
        }
        if let Ok(v) = field.parse::<i64>() {
            return Cell::Int(v);
        }
        match field.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(field.to_string()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header row plus one record per row, comma-separated, LF endings.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn parse_csv(bytes: &[u8]) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let columns = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(Cell::parse).collect()).map_err(csv_error))
            .collect::<Result<_>>()?;
        Ok(Table { columns, rows })
    }

    /// `{schema_version, command, params, rows}` with one object per row.
    pub fn to_json(&self, command: &str, params: Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "params": params,
            "rows": rows,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Parser)]
#[command(name = "ptring", version, about = "Spectra and PT-phase structure of a gain/loss ring threaded by magnetic flux")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of one Hamiltonian.
    Spectrum(SpectrumArgs),
    /// Tracked bands over Φ ∈ [0, 2π].
    Band(BandArgs),
    /// Exact/broken classification over a (γ, Φ) grid.
    PhaseDiagram(PhaseDiagramArgs),
    /// Maximal flux Φ_c(γ): analytic, diagonalization and linear law.
    CriticalFlux(CurveArgs),
    /// N k_c / π as a function of γ.
    Kc(CurveArgs),
    /// Threshold gain/loss 2 sin(π/N).
    Threshold(ThresholdArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GaugeArg {
    Uniform,
    Link,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FileOutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct FluxArgs {
    /// Enclosed flux in radians.
    #[arg(long, allow_negative_numbers = true)]
    flux: Option<f64>,
    /// Enclosed flux in flux quanta (0.5 means Φ = π).
    #[arg(long, allow_negative_numbers = true)]
    flux_quanta: Option<f64>,
}

impl FluxArgs {
    fn radians(&self) -> f64 {
        match (self.flux, self.flux_quanta) {
            (Some(phi), _) => phi,
            (None, Some(q)) => TAU * q,
            (None, None) => unreachable!("clap enforces one flux flag"),
        }
    }
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[command(flatten)]
    flux: FluxArgs,
    #[arg(long, value_enum, default_value = "uniform")]
    gauge: GaugeArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BandArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    flux_steps: usize,
    #[command(flatten)]
    output: FileOutputArgs,
}

#[derive(Debug, Args)]
struct PhaseDiagramArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    flux_min: f64,
    #[arg(long, default_value_t = TAU, allow_negative_numbers = true)]
    flux_max: f64,
    /// Grid points per axis, endpoints included.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    steps: usize,
    #[command(flatten)]
    output: FileOutputArgs,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    gamma_steps: usize,
    #[command(flatten)]
    output: FileOutputArgs,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Reduced grids.
    #[arg(long)]
    quick: bool,
    /// Corrupt the Hamiltonian builder (suite self-test).
    #[arg(long, hide = true, default_value = "none")]
    fault: String,
}

struct Emission {
    command: &'static str,
    params: Value,
    table: Table,
    format: Format,
    out: Option<PathBuf>,
}

impl Emission {
    fn write(self, stdout: &mut dyn Write) -> Result<()> {
        let bytes = match self.format {
            Format::Csv => self.table.to_csv()?,
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(&self.table.to_json(self.command, self.params))
                    .map_err(|e| Error::Io(e.into()))?;
                v.push(b'\n');
                v
            }
        };
        match &self.out {
            Some(path) => std::fs::write(path, bytes)?,
            None => stdout.write_all(&bytes)?,
        }
        Ok(())
    }
}

fn spectrum_cmd(args: SpectrumArgs) -> Result<Emission> {
    let gauge = match args.gauge {
        GaugeArg::Uniform => Gauge::UniformPhase,
        GaugeArg::Link => Gauge::ConcentratedLink,
    };
    let flux = args.flux.radians();
    let params = RingParams::new(args.n, args.gamma, flux)?.with_gauge(gauge);
    let h = build_hamiltonian(&params)?;
    let spectrum = eig::eigenvalues(&h);
    if !spectrum.converged {
        return Err(Error::Unconverged {
            context: Some(format!("N={}, γ={}, Φ={}", args.n, args.gamma, flux)),
        });
    }
    let near = near_ep_mask(&h, &spectrum);
    let mut table = Table::new(&["index", "re", "im", "residual", "is_real", "near_ep"]);
    for (i, z) in spectrum.eigenvalues.iter().enumerate() {
        table.push(vec![
            i.into(),
            z.re.into(),
            z.im.into(),
            spectrum.residuals[i].into(),
            (z.im.abs() <= TAU_REAL).into(),
            near[i].into(),
        ]);
    }
    Ok(Emission {
        command: "spectrum",
        params: json!({ "n": args.n, "gamma": args.gamma, "flux": flux, "gauge": params.gauge }),
        table,
        format: args.output.format,
        out: args.output.out,
    })
}

fn band_cmd(args: BandArgs) -> Result<Emission> {
    let sweep = band_sweep(args.n, args.gamma, args.flux_steps)?;
    let mut table = Table::new(&["flux", "band_index", "re", "im"]);
    for (phi, bands) in sweep.flux_grid.iter().zip(&sweep.bands) {
        for (b, z) in bands.iter().enumerate() {
            table.push(vec![(*phi).into(), b.into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(Emission {
        command: "band",
        params: json!({ "n": args.n, "gamma": args.gamma, "flux_steps": args.flux_steps }),
        table,
        format: args.output.format,
        out: Some(args.output.out),
    })
}

fn phase_diagram_cmd(args: PhaseDiagramArgs) -> Result<Emission> {
    let d = phase_diagram(args.n, (args.gamma_min, args.gamma_max), (args.flux_min, args.flux_max), args.steps)?;
    let mut table = Table::new(&["gamma", "flux", "phase", "pair_count"]);
    for (i, &g) in d.gamma_grid.iter().enumerate() {
        for (j, &phi) in d.flux_grid.iter().enumerate() {
            let c = d.cell(i, j);
            table.push(vec![g.into(), phi.into(), c.phase.as_str().into(), c.pair_count.into()]);
        }
    }
    Ok(Emission {
        command: "phase-diagram",
        params: json!({
            "n": args.n,
            "gamma_min": args.gamma_min,
            "gamma_max": args.gamma_max,
            "flux_min": args.flux_min,
            "flux_max": args.flux_max,
            "steps": args.steps,
        }),
        table,
        format: args.output.format,
        out: Some(args.output.out),
    })
}

fn critical_flux_cmd(args: CurveArgs) -> Result<Emission> {
    let c = critical_curve(args.n, args.gamma_steps)?;
    let mut table = Table::new(&["gamma", "phi_c_analytic", "phi_c_numeric", "phi_c_linear"]);
    for i in 0..c.gamma_grid.len() {
        table.push(vec![
            c.gamma_grid[i].into(),
            c.phi_c_analytic[i].into(),
            c.phi_c_numeric[i].into(),
            c.phi_c_linear[i].into(),
        ]);
    }
    Ok(Emission {
        command: "critical-flux",
        params: json!({ "n": args.n, "gamma_steps": args.gamma_steps }),
        table,
        format: args.output.format,
        out: Some(args.output.out),
    })
}

fn kc_cmd(args: CurveArgs) -> Result<Emission> {
    let mut table = Table::new(&["gamma", "n_kc_over_pi"]);
    for (g, v) in kc_curve(args.n, args.gamma_steps)? {
        table.push(vec![g.into(), v.into()]);
    }
    Ok(Emission {
        command: "kc",
        params: json!({ "n": args.n, "gamma_steps": args.gamma_steps }),
        table,
        format: args.output.format,
        out: Some(args.output.out),
    })
}

fn threshold_cmd(args: ThresholdArgs) -> Result<Emission> {
    let mut table = Table::new(&["gamma_c"]);
    table.push(vec![threshold_gamma(args.n)?.into()]);
    Ok(Emission {
        command: "threshold",
        params: json!({ "n": args.n }),
        table,
        format: args.output.format,
        out: args.output.out,
    })
}

fn verify_cmd(args: VerifyArgs) -> Result<verify::VerifyReport> {
    let Some(fault) = Fault::parse(&args.fault) else {
        return Err(Error::Domain(format!("unknown fault '{}'", args.fault)));
    };
    Ok(verify::run(&VerifyConfig { quick: args.quick, fault }))
}

fn report_verification(report: &verify::VerifyReport, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    for o in &report.outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        writeln!(stdout, "{status} {} ({} cases, {:.2} s)", o.name, o.cases, o.elapsed.as_secs_f64())?;
    }
    match report.first_failure() {
        None => {
            writeln!(stdout, "all {} properties passed", report.outcomes.len())?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            writeln!(
                stderr,
                "verification failed: {} at {}",
                f.name,
                f.counterexample.as_deref().unwrap_or_default()
            )?;
            Ok(EXIT_VERIFY_FAILED)
        }
    }
}

enum Outcome {
    Emit(Emission),
    Verified(verify::VerifyReport),
}

fn compute(command: Command) -> Result<Outcome> {
    Ok(match command {
        Command::Spectrum(a) => Outcome::Emit(spectrum_cmd(a)?),
        Command::Band(a) => Outcome::Emit(band_cmd(a)?),
        Command::PhaseDiagram(a) => Outcome::Emit(phase_diagram_cmd(a)?),
        Command::CriticalFlux(a) => Outcome::Emit(critical_flux_cmd(a)?),
        Command::Kc(a) => Outcome::Emit(kc_cmd(a)?),
        Command::Threshold(a) => Outcome::Emit(threshold_cmd(a)?),
        Command::Verify(a) => Outcome::Verified(verify_cmd(a)?),
    })
}

fn finish(outcome: Outcome, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match outcome {
        Outcome::Emit(e) => {
            e.write(stdout)?;
            Ok(EXIT_OK)
        }
        Outcome::Verified(report) => report_verification(&report, stdout, stderr),
    }
}

fn thread_override() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
        },
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to `stderr` only.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_PARAMETER
                }
            };
        }
    };
    let threads = match thread_override() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_PARAMETER;
        }
    };
    let computed = match threads {
        None => compute(cli.command),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| compute(cli.command)),
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot start {n} worker threads: {e}");
                return EXIT_IO;
            }
        },
    };
    match computed.and_then(|c| finish(c, stdout, stderr)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invoke(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ptring").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn cell_display_round_trips() {
        for cell in [Cell::Int(-3), Cell::Num(2.0), Cell::Num(1e-7), Cell::Num(-0.0), Cell::Bool(true), Cell::Text("exact".into())] {
            assert_eq!(Cell::parse(&cell.to_string()), cell);
        }
    }

    #[test]
    fn threshold_output() {
        let (code, out, _) = invoke(&["threshold", "--n", "5"]);
        assert_eq!(code, 0);
        let table = Table::parse_csv(out.as_bytes()).unwrap();
        let Cell::Num(v) = table.rows[0][0] else { panic!("{out}") };
        assert_eq!(format!("{v:.6}"), "1.175571");
    }

    #[test]
    fn hermitian_four_site_spectrum() {
        let (code, out, _) = invoke(&["spectrum", "--n", "2", "--gamma", "0", "--flux", "0"]);
        assert_eq!(code, 0);
        let t = Table::parse_csv(out.as_bytes()).unwrap();
        assert_eq!(t.columns, ["index", "re", "im", "residual", "is_real", "near_ep"]);
        let re: Vec<f64> = t.rows.iter().map(|r| match r[1] { Cell::Num(v) => v, _ => panic!() }).collect();
        for (got, want) in re.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn flux_quanta_matches_radians() {
        let (_, a, _) = invoke(&["spectrum", "--n", "3", "--gamma", "0.4", "--flux-quanta", "0.5"]);
        let (_, b, _) = invoke(&["spectrum", "--n", "3", "--gamma", "0.4", "--flux", &std::f64::consts::PI.to_string()]);
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_errors_exit_2() {
        assert_eq!(invoke(&["spectrum", "--n", "1", "--gamma", "0", "--flux", "0"]).0, 2);
        assert_eq!(invoke(&["spectrum", "--n", "3", "--gamma", "-1", "--flux", "0"]).0, 2);
        let (code, _, err) = invoke(&["spectrum", "--n", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
        assert_eq!(invoke(&["spectrum", "--n", "3", "--gamma", "0", "--flux", "0", "--flux-quanta", "1"]).0, 2);
        assert_eq!(invoke(&["band", "--n", "3", "--gamma", "0.1"]).0, 2);
        assert_eq!(invoke(&["verify", "--quick", "--fault", "bogus"]).0, 2);
    }

    #[test]
    fn json_envelope() {
        let (code, out, _) = invoke(&["spectrum", "--n", "2", "--gamma", "1", "--flux", "0.3", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["command"], "spectrum");
        assert_eq!(v["params"]["n"], 2);
        assert_eq!(v["rows"].as_array().unwrap().len(), 4);
        assert!(v["rows"][0]["is_real"].is_boolean());
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(exit_code(&Error::Domain("n".into())), EXIT_PARAMETER);
        assert_eq!(exit_code(&Error::Unconverged { context: None }), EXIT_UNCONVERGED);
        assert_eq!(exit_code(&Error::Consistency("pair".into())), EXIT_UNCONVERGED);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }
}
