//! Command-line front end: argument parsing, parameter resolution and
//! CSV/SVG output for the `cca` binary.
//!
//! Every table is CSV with a header row. Numbers carry 12 significant
//! digits. Files are written to a temporary sibling first and renamed into
//! place, so a failed run never leaves a half-written output.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cca_core::bath::{self, BathSpec, SpectralShape, UniverseSpectrum};
use cca_core::config::{Coupling, ParamSource};
use cca_core::overlap::{self, DielectricProfile1D};
use cca_core::transport::{self, SpectrumKind};
use cca_core::{scattering, ArrayParams};

mod svg;

pub use svg::line_chart;

/// Exit status for a successful run.
pub const EXIT_OK: u8 = 0;
/// Exit status when a computation or output fails.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status for bad arguments or parameters.
pub const EXIT_USAGE: u8 = 2;

/// Wraps errors that should exit with [`EXIT_USAGE`].
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit status for the outcome of [`run`].
pub fn exit_code(result: &Result<()>) -> u8 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) if e.is::<UsageError>() => EXIT_USAGE,
        Err(_) => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cca",
    version,
    about = "Dissipative coupled-cavity array simulator"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// key = value parameter file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band modes k_n and complex eigenfrequencies.
    Dispersion {
        #[command(flatten)]
        array: ArrayArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Transmission T(ω) through the lossy array.
    Spectrum {
        #[command(flatten)]
        array: ArrayArgs,
        /// Grid size for --kind continuous.
        #[arg(long, default_value_t = 801)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Kind::Continuous)]
        kind: Kind,
        #[command(flatten)]
        output: OutputArgs,
        /// Also draw the curve as an SVG line chart.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Peak transmission, exact and first order, and ζ.
    Tmax {
        #[command(flatten)]
        array: ArrayArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Array quality factor ζ = αQ/N with the matching peak transmission.
    Zeta {
        #[command(flatten)]
        array: ArrayArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact transfer-matrix transmission against the product formula.
    OracleCompare {
        #[command(flatten)]
        array: ArrayArgs,
        #[arg(long, default_value_t = 801)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decay of one cavity into a discretized bath.
    BathValidate {
        #[arg(long, value_enum, default_value_t = Shape::Flat)]
        shape: Shape,
        /// Tabulated bath for --shape file: CSV columns omega, rho, eta.
        #[arg(long, value_name = "PATH", required_if_eq("shape", "file"))]
        bath_file: Option<PathBuf>,
        /// Band width in units of the golden-rule rate γ = 2ω_c/Q.
        #[arg(long, default_value_t = 200.0)]
        band_width: f64,
        /// Number of bath oscillators.
        #[arg(long, default_value_t = 4000)]
        modes: usize,
        /// Time samples on [0.1/γ, 3/γ].
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        omega_c: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Defect mode and nearest-neighbour coupling α of a 1D profile.
    Overlap {
        /// CSV with columns x, eps_single, eps_periodic.
        #[arg(long, value_name = "PATH")]
        profile: PathBuf,
        /// Array period L, a whole number of grid cells.
        #[arg(long)]
        period: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Flat,
    Tilt,
    File,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ArrayArgs {
    /// Number of cavities N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Single-cavity quality factor Q = 2ω_c/γ.
    #[arg(long)]
    pub q: Option<f64>,
    /// Coupling rate ξ = 2αω_c.
    #[arg(long, conflicts_with = "alpha")]
    pub xi: Option<f64>,
    /// Overlap integral α.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub omega_c: Option<f64>,
    /// Lattice period L.
    #[arg(long)]
    pub period: Option<f64>,
}

impl ArrayArgs {
    fn source(&self) -> ParamSource {
        ParamSource {
            n_cavities: self.n,
            omega_c: self.omega_c,
            coupling: self
                .alpha
                .map(Coupling::Alpha)
                .or(self.xi.map(Coupling::Xi)),
            q_factor: self.q,
            period: self.period,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// CSV destination; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn file_source(config: Option<&Path>) -> Result<ParamSource> {
    match config {
        Some(path) => ParamSource::from_file(path).map_err(|e| usage(e.to_string())),
        None => Ok(ParamSource::default()),
    }
}

/// Config file values overridden by flags, with defaults applied.
pub fn resolve_params(config: Option<&Path>, array: &ArrayArgs) -> Result<ArrayParams> {
    file_source(config)?
        .overridden_by(array.source())
        .resolve()
        .map_err(|e| usage(e.to_string()))
}

/// Formats `v` with 12 significant digits.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    format!("{v:.11e}")
}

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Destination for the main table plus a side channel for summaries. When
/// the table goes to standard output, summaries go to standard error so the
/// CSV stays parseable.
struct Sink<'a> {
    out: Option<&'a Path>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Sink<'_> {
    fn table(&mut self, table: Table) -> Result<()> {
        let bytes = table.into_bytes()?;
        match self.out {
            Some(path) => write_atomic(path, &bytes),
            None => Ok(self.stdout.write_all(&bytes)?),
        }
    }

    fn summary(&mut self, line: &str) -> Result<()> {
        let w: &mut dyn Write = if self.out.is_some() {
            &mut *self.stdout
        } else {
            &mut *self.stderr
        };
        writeln!(w, "{line}")?;
        Ok(())
    }
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Dispersion { output, .. }
            | Command::Spectrum { output, .. }
            | Command::Tmax { output, .. }
            | Command::Zeta { output, .. }
            | Command::OracleCompare { output, .. }
            | Command::BathValidate { output, .. }
            | Command::Overlap { output, .. } => output,
        }
    }
}

/// Executes one parsed command line.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = cli.config.as_deref();
    let mut sink = Sink {
        out: cli.command.output().out.as_deref(),
        stdout,
        stderr,
    };
    match &cli.command {
        Command::Dispersion { array, .. } => dispersion(&resolve_params(config, array)?, &mut sink),
        Command::Spectrum {
            array,
            points,
            kind,
            svg,
            ..
        } => {
            let p = resolve_params(config, array)?;
            spectrum(&p, *points, *kind, svg.as_deref(), &mut sink)
        }
        Command::Tmax { array, .. } | Command::Zeta { array, .. } => {
            tmax(&resolve_params(config, array)?, &mut sink)
        }
        Command::OracleCompare { array, points, .. } => {
            oracle_compare(&resolve_params(config, array)?, *points, &mut sink)
        }
        Command::BathValidate {
            shape,
            bath_file,
            band_width,
            modes,
            samples,
            q,
            omega_c,
            ..
        } => {
            let file = file_source(config)?;
            let omega_c = omega_c.or(file.omega_c).unwrap_or(1.0);
            let q = q
                .or(file.q_factor)
                .ok_or_else(|| usage("missing required parameter q_factor (--q)"))?;
            if !(q > 0.0 && omega_c > 0.0) {
                return Err(usage("--q and --omega-c must be positive"));
            }
            let gamma = 2.0 * omega_c / q;
            let spec = bath_spec(*shape, bath_file.as_deref(), omega_c, gamma, *band_width)?;
            bath_validate(&spec, *modes, *samples, &mut sink)
        }
        Command::Overlap {
            profile, period, ..
        } => overlap_cmd(&read_profile(profile, *period)?, &mut sink),
    }
}

fn dispersion(p: &ArrayParams, sink: &mut Sink) -> Result<()> {
    let rates = p.derive_rates();
    let mut table = Table::new(&["n", "k_n_L", "omega_re", "omega_im"])?;
    for mode in cca_core::hamiltonian::mode_wavevectors(p) {
        let kl = mode.wavevector * p.period;
        // Same labelling as the lossless band ω_c(1 + 2α·cos kL).
        let w = rates.omega_eff * (1.0 + 2.0 * p.alpha * kl.cos());
        table.row([
            mode.index.to_string(),
            fmt_num(kl),
            fmt_num(w.re),
            fmt_num(w.im),
        ])?;
    }
    sink.table(table)
}

fn spectrum(
    p: &ArrayParams,
    points: usize,
    kind: Kind,
    svg_path: Option<&Path>,
    sink: &mut Sink,
) -> Result<()> {
    let kind = match kind {
        Kind::Discrete => SpectrumKind::Discrete,
        Kind::Continuous => SpectrumKind::Continuous,
    };
    let curve = transport::spectrum(p, kind, points)?;
    let mut table = Table::new(&["omega", "T"])?;
    for (w, t) in &curve.points {
        table.row([fmt_num(*w), fmt_num(*t)])?;
    }
    sink.table(table)?;
    if let Some(path) = svg_path {
        let title = format!(
            "N = {}, Q = {}, alpha = {}, omega_c = {}",
            p.n_cavities,
            fmt_short(p.q_factor),
            fmt_short(p.alpha),
            fmt_short(p.omega_c)
        );
        let chart = line_chart(&curve.points, &title, "omega", "T");
        write_atomic(path, chart.as_bytes())?;
    }
    Ok(())
}

fn fmt_short(v: f64) -> String {
    format!("{v:.4e}")
}

fn tmax(p: &ArrayParams, sink: &mut Sink) -> Result<()> {
    let tm = transport::t_max(p);
    let mut table = Table::new(&["exact", "first_order", "zeta"])?;
    table.row([
        fmt_num(tm.exact),
        fmt_num(tm.first_order),
        fmt_num(p.derive_rates().zeta),
    ])?;
    sink.table(table)
}

fn oracle_compare(p: &ArrayParams, points: usize, sink: &mut Sink) -> Result<()> {
    let sweep = scattering::deviation_sweep(p, points)?;
    let mut table = Table::new(&["omega", "T_exact", "T_product", "deviation", "reliable"])?;
    for r in &sweep.rows {
        table.row([
            fmt_num(r.omega),
            fmt_num(r.t_exact),
            fmt_num(r.t_product),
            fmt_num(r.deviation),
            r.reliable.to_string(),
        ])?;
    }
    sink.table(table)?;
    sink.summary(&format!(
        "max mid-band deviation: {}",
        fmt_num(sweep.max_mid_band_deviation)
    ))
}

fn bath_spec(
    shape: Shape,
    file: Option<&Path>,
    omega_c: f64,
    gamma: f64,
    band_width: f64,
) -> Result<BathSpec> {
    let width = band_width * gamma;
    Ok(match shape {
        Shape::Flat => BathSpec::flat(omega_c, gamma, width),
        Shape::Tilt => BathSpec::centred_tilt(omega_c, gamma, width),
        Shape::File => {
            let path = file.ok_or_else(|| usage("--shape file needs --bath-file"))?;
            let rows = read_columns(path, &["omega", "rho", "eta"])?;
            let (omega_min, omega_max) = match (rows.first(), rows.last()) {
                (Some(a), Some(b)) => (a[0], b[0]),
                _ => return Err(usage(format!("{}: no data rows", path.display()))),
            };
            BathSpec {
                omega_c,
                density: SpectralShape::Tabulated(rows.iter().map(|r| (r[0], r[1])).collect()),
                coupling: SpectralShape::Tabulated(rows.iter().map(|r| (r[0], r[2])).collect()),
                omega_min,
                omega_max,
            }
        }
    })
}

fn bath_validate(spec: &BathSpec, modes: usize, samples: usize, sink: &mut Sink) -> Result<()> {
    spec.validate_for_decay()?;
    let golden = bath::golden_rule(spec);
    let discrete = bath::discretize(spec, modes)?;
    let universe = UniverseSpectrum::diagonalize(spec.omega_c, &discrete)?;
    let times = bath::linear_time_grid(0.1 / golden, 3.0 / golden, samples);
    let probs: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| (t, universe.survival_probability(t)))
        .collect();
    let fit = bath::fit_decay(&probs)?;
    // Intercept of the ln P fit for the residual column.
    let usable: Vec<&(f64, f64)> = probs.iter().filter(|(_, p)| *p > 0.0).collect();
    let ln_a = usable
        .iter()
        .map(|(t, p)| p.ln() + 2.0 * fit * t)
        .sum::<f64>()
        / usable.len() as f64;
    let mut table = Table::new(&["t", "P", "residual"])?;
    for (t, p) in &probs {
        let model = (ln_a - 2.0 * fit * t).exp();
        table.row([fmt_num(*t), fmt_num(*p), fmt_num(p - model)])?;
    }
    sink.table(table)?;

    let lamb = bath::lamb_shift(spec, 10_000)?;
    let peak = bath::dominant_frequency_shift(&universe, &times)?;
    let drift = times
        .iter()
        .map(|&t| (universe.norm_at(t) - 1.0).abs())
        .fold(0.0, f64::max);
    let shift_error = if lamb != 0.0 {
        format!(
            "shift_relative_error: {}",
            fmt_num((peak - lamb).abs() / lamb.abs())
        )
    } else {
        format!("shift_absolute_error: {}", fmt_num((peak - lamb).abs()))
    };
    for line in [
        format!("gamma_fit: {}", fmt_num(fit)),
        format!("gamma_golden: {}", fmt_num(golden)),
        format!("ratio: {}", fmt_num(fit / golden)),
        format!(
            "decay_relative_error: {}",
            fmt_num((fit / golden - 1.0).abs())
        ),
        format!("lamb_shift: {}", fmt_num(lamb)),
        format!("peak_shift: {}", fmt_num(peak)),
        shift_error,
        format!("norm_drift: {}", fmt_num(drift)),
    ] {
        sink.summary(&line)?;
    }
    Ok(())
}

/// Reads a CSV with the given header names (in any order, extra columns
/// ignored) into rows of numbers ordered like `columns`.
fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| usage(format!("{}: missing column {c:?}", path.display())))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = index
            .iter()
            .map(|&i| {
                let field = record.get(i).unwrap_or("");
                field.parse::<f64>().map_err(|_| {
                    usage(format!(
                        "{}: data row {}: not a number: {field:?}",
                        path.display(),
                        line + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn read_profile(path: &Path, period: f64) -> Result<DielectricProfile1D> {
    let rows = read_columns(path, &["x", "eps_single", "eps_periodic"])?;
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let single = rows.iter().map(|r| r[1]).collect();
    let periodic = rows.iter().map(|r| r[2]).collect();
    DielectricProfile1D::from_samples(&x, single, periodic, period)
        .map_err(|e| usage(e.to_string()))
}

fn overlap_cmd(profile: &DielectricProfile1D, sink: &mut Sink) -> Result<()> {
    let (mode, alpha) = overlap::coupling_from_profile(profile)?;
    let mut table = Table::new(&["omega_c", "participation_ratio", "alpha"])?;
    table.row([
        fmt_num(mode.frequency),
        fmt_num(mode.participation_ratio),
        fmt_num(alpha),
    ])?;
    sink.table(table)
}
