//! Command-line front end: spectrum scans, mode analysis, and oracle
//! validation over JSON run configurations, with deterministic CSV/JSON
//! output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::{preset, RunConfig};
use crate::error::Error;
use crate::model::{MaterialParams, SystemParams};
use crate::{modes, oracle, response};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "eitsim", disable_help_subcommand = true)]
#[command(about = "Mechanical-EIT response simulator for spin-coupled nanoresonators")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan the susceptibility, refractive index and group velocity.
    Spectrum {
        #[command(flatten)]
        source: ConfigSource,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file (stdout when omitted). CSV output additionally
        /// writes a `<output>.summary.json` companion file.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report normal-mode frequencies, stability and the trace identity.
    Modes {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cross-check the closed forms against the independent oracles.
    Validate {
        #[command(flatten)]
        source: ConfigSource,
        /// Which oracle checks to run.
        #[arg(long, value_enum, default_value_t = Check::All)]
        check: Check,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a preset or config (after overrides) as canonical JSON.
    Config {
        #[command(flatten)]
        source: ConfigSource,
    },
}

#[derive(Debug, Args)]
struct ConfigSource {
    /// Path to a JSON run configuration ("-" for stdin).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of an embedded preset (fig4a..fig7b).
    #[arg(long)]
    preset: Option<String>,
    /// Dotted-path overrides applied before validation,
    /// e.g. --set scan.points=5001.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Timedomain,
    Bosonization,
    All,
}

impl ConfigSource {
    fn load(&self) -> Result<RunConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => {
                let text = if path.as_os_str() == "-" {
                    std::io::read_to_string(std::io::stdin())?
                } else {
                    std::fs::read_to_string(path)?
                };
                RunConfig::from_json(&text)?
            }
            (None, Some(name)) => preset(name)?,
            _ => {
                return Err(Error::Config(
                    "exactly one of --config or --preset is required".into(),
                ))
            }
        };
        for assignment in &self.overrides {
            cfg.apply_override(assignment)?;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Json(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

/// Parse the given argument list and run; returns the process exit code.
/// Output goes to `out` (data) and `err` (diagnostics).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are success, everything else is usage.
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Error> {
    match cli.command {
        Command::Spectrum { source, format, output } => {
            run_spectrum(&source.load()?, format, output.as_deref(), out)
        }
        Command::Modes { source, output } => {
            run_modes(&source.load()?, output.as_deref(), out)
        }
        Command::Validate { source, check, output } => {
            run_validate(&source.load()?, check, output.as_deref(), out)
        }
        Command::Config { source } => {
            let cfg = source.load()?;
            writeln!(out, "{}", cfg.digest())?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(text: &str, path: Option<&std::path::Path>, out: &mut dyn Write) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_spectrum(
    cfg: &RunConfig,
    format: Format,
    output: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let (sys, mat) = cfg.to_params()?;
    let spectrum = response::scan(&sys, &mat, cfg.scan.omega_min, cfg.scan.omega_max, cfg.scan.points)?;
    let peaks = modes::find_peaks(&spectrum)?;
    let windows = modes::find_windows(&sys, &mat, &spectrum, &peaks)?;
    let summary = json!({
        "config": cfg,
        "peaks": peaks,
        "windows": windows,
    });
    match format {
        Format::Json => {
            let points: Vec<_> = spectrum
                .points
                .iter()
                .map(|p| {
                    json!({
                        "omega": p.omega,
                        "re_chi": p.chi.re,
                        "im_chi": p.chi.im,
                        "re_n": p.n.re,
                        "im_n": p.n.im,
                        "vg_over_c": p.vg_over_c,
                    })
                })
                .collect();
            let doc = json!({
                "config": cfg,
                "points": points,
                "peaks": peaks,
                "windows": windows,
            });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            emit(&text, output, out)?;
        }
        Format::Csv => {
            let mut text = String::from("omega,re_chi,im_chi,re_n,im_n,vg_over_c\n");
            for p in &spectrum.points {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.omega, p.chi.re, p.chi.im, p.n.re, p.n.im, p.vg_over_c
                ));
            }
            emit(&text, output, out)?;
            let mut summary_text = serde_json::to_string_pretty(&summary)?;
            summary_text.push('\n');
            match output {
                Some(path) => {
                    let mut sidecar = path.as_os_str().to_owned();
                    sidecar.push(".summary.json");
                    std::fs::write(sidecar, summary_text)?;
                }
                // No file to sit next to: the summary goes to stdout after
                // the data would collide with the CSV, so skip it there and
                // keep stdout pure CSV.
                None => {}
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_modes(
    cfg: &RunConfig,
    output: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let (sys, _) = cfg.to_params_unchecked()?;
    let mode_set = modes::eigenfrequencies(&sys);
    // Trace identity: sum of squared mode frequencies (dark mode included)
    // equals 1 + sum of squared resonator frequencies.
    let mut sq_sum: f64 = mode_set.frequencies.iter().map(|f| f * f).sum();
    if let Some(dark) = mode_set.dark_mode {
        sq_sum += dark * dark;
    }
    if !mode_set.stable {
        // Negative squared roots were clamped in the frequencies; recompute
        // the residual from the raw roots so the identity still holds.
        sq_sum = modes::undamped_squared_roots(&sys).iter().sum();
    }
    let expected: f64 = 1.0 + sys.resonators.iter().map(|r| r.omega * r.omega).sum::<f64>();
    let doc = json!({
        "config": cfg,
        "frequencies": mode_set.frequencies,
        "stable": mode_set.stable,
        "dark_mode": mode_set.dark_mode,
        "trace_residual": sq_sum - expected,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&text, output, out)?;
    Ok(EXIT_OK)
}

struct CheckResult {
    check: &'static str,
    name: String,
    residual: f64,
    threshold: f64,
}

impl CheckResult {
    fn pass(&self) -> bool {
        self.residual <= self.threshold
    }
}

fn run_validate(
    cfg: &RunConfig,
    check: Check,
    output: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let mut results = Vec::new();
    if matches!(check, Check::Timedomain | Check::All) {
        validate_timedomain(cfg, &mut results)?;
    }
    if matches!(check, Check::Bosonization | Check::All) {
        validate_bosonization(cfg, &mut results)?;
    }
    let all_pass = results.iter().all(CheckResult::pass);
    let items: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "check": r.check,
                "name": r.name,
                "residual": r.residual,
                "threshold": r.threshold,
                "pass": r.pass(),
            })
        })
        .collect();
    let doc = json!({ "config": cfg, "results": items, "pass": all_pass });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(&text, output, out)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VALIDATION })
}

/// Minimum damping used by the time-domain check; smaller configured rates
/// are raised to keep the settling time bounded.
pub const TIMEDOMAIN_GAMMA_FLOOR: f64 = 1.0e-4;

/// Probe frequencies for the time-domain check: the absorption peaks and
/// the window minima of the configured scan.
fn probe_frequencies(
    sys: &SystemParams,
    mat: &MaterialParams,
    cfg: &RunConfig,
) -> Result<Vec<f64>, Error> {
    let spectrum =
        response::scan(sys, mat, cfg.scan.omega_min, cfg.scan.omega_max, cfg.scan.points)?;
    let peaks = modes::find_peaks(&spectrum)?;
    let windows = modes::find_windows(sys, mat, &spectrum, &peaks)?;
    let mut probes: Vec<f64> = peaks.iter().map(|p| p.location).collect();
    probes.extend(windows.iter().map(|w| w.minimum));
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(probes)
}

fn validate_timedomain(cfg: &RunConfig, results: &mut Vec<CheckResult>) -> Result<(), Error> {
    let (mut sys, mat) = cfg.to_params()?;
    sys.spin.gamma = sys.spin.gamma.max(TIMEDOMAIN_GAMMA_FLOOR);
    for r in &mut sys.resonators {
        r.gamma = r.gamma.max(TIMEDOMAIN_GAMMA_FLOOR);
    }
    let probes = probe_frequencies(&sys, &mat, cfg)?;
    let omega_max = modes::eigenfrequencies(&sys)
        .frequencies
        .iter()
        .copied()
        .fold(1.0_f64, f64::max);
    // Kept well under the sampling bound: the O(dt^4) frequency warping of
    // the integrator is magnified by the near-singular response at the
    // window minima probes.
    let dt = (2.0 * std::f64::consts::PI / (20.0 * omega_max)).min(0.025);
    let settle = 8.0 / TIMEDOMAIN_GAMMA_FLOOR;
    for omega in probes {
        let measured = oracle::steady_state_response(&sys, omega, dt, settle, 200)?;
        let expected = if sys.is_double() {
            response::lineshape_double(&sys, omega)?
        } else {
            response::lineshape_single(&sys, omega)?
        };
        let residual = (measured - expected).norm() / expected.norm();
        results.push(CheckResult {
            check: "timedomain",
            name: format!("steady-state amplitude at omega = {omega}"),
            residual,
            threshold: 1.0e-3,
        });
    }
    Ok(())
}

fn validate_bosonization(cfg: &RunConfig, results: &mut Vec<CheckResult>) -> Result<(), Error> {
    let (sys, _) = cfg.to_params()?;
    // Compare at fixed collective coupling G sqrt(N): the bosonization is a
    // large-N statement at fixed collective coupling strength.
    let collective: Vec<f64> = sys
        .couplings
        .iter()
        .map(|g| g * (sys.n_spins as f64).sqrt())
        .collect();
    let omegas: Vec<f64> = sys.resonators.iter().map(|r| r.omega).collect();
    let mut prev = f64::INFINITY;
    for n in [2u32, 4, 6] {
        let couplings: Vec<f64> = collective.iter().map(|c| c / (n as f64).sqrt()).collect();
        let model = oracle::ExactModel::new(n, 7, omegas.clone(), couplings)?;
        let err = oracle::bosonization_error(&model)?;
        results.push(CheckResult {
            check: "bosonization",
            name: format!("lowest-gap deviation at N = {n}"),
            residual: err,
            threshold: 0.02,
        });
        results.push(CheckResult {
            check: "bosonization",
            name: format!("monotone decrease at N = {n}"),
            residual: err - prev,
            threshold: 0.0,
        });
        prev = err;
    }
    // Cutoff self-convergence of the lowest gaps at the smallest N.
    let couplings2: Vec<f64> = collective.iter().map(|c| c / (2.0f64).sqrt()).collect();
    let m5 = oracle::ExactModel::new(2, 5, omegas.clone(), couplings2.clone())?;
    let m7 = oracle::ExactModel::new(2, 7, omegas, couplings2)?;
    let e5 = oracle::bosonization_error(&m5)?;
    let e7 = oracle::bosonization_error(&m7)?;
    results.push(CheckResult {
        check: "bosonization",
        name: "cutoff self-convergence (7 vs 5)".into(),
        residual: (e7 - e5).abs(),
        threshold: 1.0e-6,
    });
    Ok(())
}
