//! `talbot-sim` command-line front end.
//!
//! [`execute`] parses arguments, runs one subcommand and maps the outcome to
//! an exit code: 0 on success, 1 for physics or configuration errors, 2 for
//! usage errors.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use talbot_core::optics::oracle::oracle_pattern;
use talbot_core::optics::talbot::reduced_distance;
use talbot_core::scan::scan_offsets;
use talbot_core::{
    de_broglie_wavelength, fit_fringe, load_config, parse_grid, predict, run_sweep, simulate_scan,
    talbot_length, ChannelSet, GratingKind, Scenario, SweepKind, SweepRow,
};

/// Largest visibility difference `oracle-check` accepts.
pub const ORACLE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "talbot-sim", version, about = "Talbot-Lau interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(short = 'c', long = "config")]
    config: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one noisy third-grating scan and fit it.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Overrides the scan and sampling seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Noiseless model curve over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// pressure, heating, coriolis-map or velocity-spread.
        #[arg(long)]
        kind: SweepKind,
        /// start:stop:count, endpoints included.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the analytic bare pattern with the wave-propagation oracle.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long = "oracle-spp")]
        oracle_spp: Option<usize>,
        #[arg(long = "oracle-periods")]
        oracle_periods: Option<usize>,
        #[arg(long = "oracle-sources")]
        oracle_sources: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a scenario file, then print a summary.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

/// Failure of a subcommand after argument parsing.
#[derive(Debug)]
pub enum CliError {
    Model(talbot_core::Error),
    Io(io::Error),
    /// A check ran to completion but did not pass.
    Check(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Check(msg) => f.write_str(msg),
        }
    }
}

impl From<talbot_core::Error> for CliError {
    fn from(e: talbot_core::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Run the tool with `argv` (including the program name) and return the exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("talbot-sim: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Scan { common, seed } => {
            let mut sc = load_config(&common.config)?;
            apply_seed(&mut sc, seed);
            let report = scan(&sc)?;
            emit(&common, |w, json| {
                if json {
                    serde_json::to_writer_pretty(&mut *w, &report)?;
                    writeln!(w)?;
                    return Ok(());
                }
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(["offset_m", "counts"])?;
                for (x, n) in report.offsets.iter().zip(&report.counts) {
                    csv.write_record([format_number(*x), n.to_string()])?;
                }
                csv.flush()?;
                Ok(())
            })?;
            let f = &report.fit;
            eprintln!(
                "fit: visibility={:.4} +- {:.4} phase_rad={:.4} +- {:.4} mean_rate_hz={:.2} chi2_reduced={:.3}",
                f.visibility, f.visibility_error, f.phase_rad, f.phase_error, f.mean_rate_hz, f.chi2_reduced
            );
            Ok(())
        }
        Command::Sweep { common, kind, grid, seed } => {
            let mut sc = load_config(&common.config)?;
            apply_seed(&mut sc, seed);
            let grid = parse_grid(&grid)?;
            let rows = run_sweep(kind, &sc, &grid)?;
            emit(&common, |w, json| write_sweep(w, kind, &rows, json))
        }
        Command::OracleCheck {
            common,
            oracle_spp,
            oracle_periods,
            oracle_sources,
            seed,
        } => {
            let mut sc = load_config(&common.config)?;
            apply_seed(&mut sc, seed);
            if let Some(n) = oracle_spp {
                sc.oracle.samples_per_period = n;
            }
            if let Some(n) = oracle_periods {
                sc.oracle.n_periods = n;
            }
            if let Some(n) = oracle_sources {
                sc.oracle.n_sources = n;
            }
            let report = oracle_check(&sc)?;
            emit(&common, |w, json| {
                if json {
                    serde_json::to_writer_pretty(&mut *w, &report)?;
                    writeln!(w)?;
                    return Ok(());
                }
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record([
                    "analytic_visibility",
                    "oracle_visibility",
                    "difference",
                    "analytic_phase_rad",
                    "oracle_phase_rad",
                ])?;
                csv.write_record([
                    format_number(report.analytic_visibility),
                    format_number(report.oracle_visibility),
                    format_number(report.difference),
                    format_number(report.analytic_phase_rad),
                    format_number(report.oracle_phase_rad),
                ])?;
                csv.flush()?;
                Ok(())
            })?;
            if report.difference.abs() > ORACLE_TOLERANCE {
                return Err(CliError::Check(format!(
                    "analytic and oracle visibilities differ by {} (> {ORACLE_TOLERANCE})",
                    report.difference
                )));
            }
            Ok(())
        }
        Command::Validate { common } => {
            let sc = load_config(&common.config)?;
            let summary = summarize(&sc)?;
            emit(&common, |w, json| {
                if json {
                    serde_json::to_writer_pretty(&mut *w, &summary)?;
                    writeln!(w)?;
                    return Ok(());
                }
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(["key", "value"])?;
                for (k, v) in summary.rows() {
                    csv.write_record([k, v])?;
                }
                csv.flush()?;
                Ok(())
            })
        }
    }
}

fn apply_seed(sc: &mut Scenario, seed: Option<u64>) {
    if let Some(s) = seed {
        sc.scan.seed = s;
        sc.sampling.seed = s;
    }
}

fn emit<F>(common: &Common, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write, bool) -> Result<(), CliError>,
{
    match &common.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w, common.json)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w, common.json)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Shortest decimal text that parses back to the same `f64`; scientific
/// notation outside `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// CSV or JSON table of sweep rows. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_sweep(w: &mut dyn Write, kind: SweepKind, rows: &[SweepRow], json: bool) -> Result<(), CliError> {
    if json {
        #[derive(Serialize)]
        struct Row {
            value: f64,
            visibility: f64,
            phase_rad: f64,
            rate_hz: f64,
        }
        #[derive(Serialize)]
        struct Table<'a> {
            kind: String,
            column: &'a str,
            rows: Vec<Row>,
        }
        let table = Table {
            kind: kind.to_string(),
            column: kind.column(),
            rows: rows
                .iter()
                .map(|r| Row {
                    value: r.value,
                    visibility: r.visibility,
                    phase_rad: r.phase,
                    rate_hz: r.rate,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut *w, &table)?;
        writeln!(w)?;
        return Ok(());
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([kind.column(), "visibility", "phase_rad", "rate_hz"])?;
    for r in rows {
        csv.write_record([r.value, r.visibility, r.phase, r.rate].map(format_number))?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FitSummary {
    pub visibility: f64,
    pub visibility_error: f64,
    pub phase_rad: f64,
    pub phase_error: f64,
    pub mean_rate_hz: f64,
    pub chi2_reduced: f64,
}

#[derive(Debug, Serialize)]
pub struct ScanReport {
    pub seed: u64,
    pub true_visibility: f64,
    pub offsets: Vec<f64>,
    pub counts: Vec<u64>,
    pub fit: FitSummary,
}

/// Model pattern with all enabled channels, one Poisson scan of it, and the fit.
pub fn scan(sc: &Scenario) -> Result<ScanReport, CliError> {
    let sample = sc.velocity_sample()?;
    let pred = predict(&sc.interferometer, &sc.molecule, &sample, &sc.channels, &sc.truncation)?;
    let d = sc.interferometer.period();
    let offsets = scan_offsets(d, sc.scan.periods, sc.scan.points);
    let s = &sc.scan;
    let result = simulate_scan(&pred.pattern, &offsets, s.flux, s.integration_time, pred.survival, s.seed)?;
    let fit = fit_fringe(&result, d)?;
    Ok(ScanReport {
        seed: s.seed,
        true_visibility: pred.visibility(),
        offsets: result.offsets,
        counts: result.counts,
        fit: FitSummary {
            visibility: fit.visibility,
            visibility_error: fit.visibility_error(),
            phase_rad: fit.phase,
            phase_error: fit.phase_error(),
            mean_rate_hz: fit.mean_rate,
            chi2_reduced: fit.chi2_reduced,
        },
    })
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub analytic_visibility: f64,
    pub oracle_visibility: f64,
    /// Oracle minus analytic.
    pub difference: f64,
    pub analytic_phase_rad: f64,
    pub oracle_phase_rad: f64,
}

/// Bare (channel-free) velocity-averaged visibility from both methods.
pub fn oracle_check(sc: &Scenario) -> Result<OracleReport, CliError> {
    let sample = sc.velocity_sample()?;
    let cfg = &sc.interferometer;
    let analytic = predict(cfg, &sc.molecule, &sample, &ChannelSet::none(), &sc.truncation)?;
    let oracle = oracle_pattern(cfg, &sc.molecule, &sample, &sc.oracle, 32, 4)?;
    Ok(OracleReport {
        analytic_visibility: analytic.visibility(),
        oracle_visibility: oracle.visibility(),
        difference: oracle.visibility() - analytic.visibility(),
        analytic_phase_rad: analytic.phase(),
        oracle_phase_rad: oracle.phase(),
    })
}

#[derive(Debug, Serialize)]
pub struct ScenarioSummary {
    pub mass_kg: f64,
    pub n_atoms: u32,
    pub separation_m: f64,
    pub period_m: f64,
    pub grating_kinds: Vec<String>,
    pub v0_m_per_s: f64,
    pub v_min_m_per_s: f64,
    pub v_max_m_per_s: f64,
    pub de_broglie_m: f64,
    pub talbot_length_m: f64,
    pub reduced_distance: f64,
    pub velocity_samples: usize,
    pub channels: Vec<&'static str>,
}

impl ScenarioSummary {
    fn rows(&self) -> Vec<(String, String)> {
        vec![
            ("mass_kg".into(), format_number(self.mass_kg)),
            ("n_atoms".into(), self.n_atoms.to_string()),
            ("separation_m".into(), format_number(self.separation_m)),
            ("period_m".into(), format_number(self.period_m)),
            ("grating_kinds".into(), self.grating_kinds.join(" ")),
            ("v0_m_per_s".into(), format_number(self.v0_m_per_s)),
            ("v_min_m_per_s".into(), format_number(self.v_min_m_per_s)),
            ("v_max_m_per_s".into(), format_number(self.v_max_m_per_s)),
            ("de_broglie_m".into(), format_number(self.de_broglie_m)),
            ("talbot_length_m".into(), format_number(self.talbot_length_m)),
            ("reduced_distance".into(), format_number(self.reduced_distance)),
            ("velocity_samples".into(), self.velocity_samples.to_string()),
            ("channels".into(), self.channels.join(" ")),
        ]
    }
}

pub fn summarize(sc: &Scenario) -> Result<ScenarioSummary, CliError> {
    let cfg = &sc.interferometer;
    let mol = &sc.molecule;
    let v0 = sc.beam.v0;
    let lambda = de_broglie_wavelength(mol, v0)?;
    let ch = &sc.channels;
    let mut channels = Vec::new();
    if ch.collisional.is_some() {
        channels.push("collisional");
    }
    if ch.thermal.is_some() {
        channels.push("thermal");
    }
    match ch.inertial {
        talbot_core::InertialMode::Off => {}
        talbot_core::InertialMode::PerVelocity => channels.push("inertial(per-velocity)"),
        talbot_core::InertialMode::Lumped => channels.push("inertial(lumped)"),
    }
    if ch.vibration.is_some() {
        channels.push("vibration");
    }
    if ch.electric {
        channels.push("electric");
    }
    if ch.clock.is_some() {
        channels.push("clock");
    }
    Ok(ScenarioSummary {
        mass_kg: mol.mass,
        n_atoms: mol.n_atoms,
        separation_m: cfg.separation,
        period_m: cfg.period(),
        grating_kinds: cfg
            .gratings
            .iter()
            .map(|g| match g.kind {
                GratingKind::Material => "material".to_string(),
                GratingKind::OpticalPhase => "optical".to_string(),
            })
            .collect(),
        v0_m_per_s: v0,
        v_min_m_per_s: sc.beam.v_min,
        v_max_m_per_s: sc.beam.v_max,
        de_broglie_m: lambda,
        talbot_length_m: talbot_length(cfg.period(), lambda),
        reduced_distance: reduced_distance(cfg, mol, v0)?,
        velocity_samples: sc.velocity_sample()?.len(),
        channels,
    })
}
