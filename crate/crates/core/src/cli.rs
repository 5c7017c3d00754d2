//! `cvqkd-rate` command line: η sweeps, single-point diagnostics and Monte
//! Carlo validation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::infotheory::ReconciliationMode;
use crate::keyrate::{
    diagnose, evaluate, phase_preset, sweep, to_bits, AmplitudePolicy, ECModel, KeyRatePoint, PhasePreset,
    ProtocolParams, DEFAULT_MAX_AMPLITUDE,
};
use crate::likelihood::{ChannelPoint, Scheme};
use crate::mc_validate::{reference_sets, sample_transcript, validate};
use crate::numerics::QuadratureSpec;
use crate::states::Constellation;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Below this many samples the validation bands are not meaningful.
const MIN_VALIDATION_SAMPLES: usize = 100_000;
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(
    name = "cvqkd-rate",
    version,
    about = "Secure key rates of d-state CV-QKD protocols under the beam-splitter attack"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate over a grid of transmittances, one row per η.
    Sweep(SweepArgs),
    /// Full breakdown at a single transmittance.
    Point(PointArgs),
    /// Compare the analytic mutual information with a sampled transcript.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Hd,
    Dhd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Dr,
    Rr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    None,
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Number of states.
    #[arg(long)]
    pub d: Option<u32>,
    /// Fixed amplitude |α|.
    #[arg(long, conflicts_with = "optimize_amplitude")]
    pub alpha: Option<f64>,
    /// Optimize |α| on [0, --max-alpha] (default unless --alpha is given).
    #[arg(long)]
    pub optimize_amplitude: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_AMPLITUDE)]
    pub max_alpha: f64,
    #[arg(long, value_enum, conflicts_with_all = ["chi", "chi_denom"])]
    pub chi_preset: Option<PresetArg>,
    /// Measurement-axis angle in radians.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "chi_denom")]
    pub chi: Option<f64>,
    /// Axis angle π/n; 0 means no rotation.
    #[arg(long)]
    pub chi_denom: Option<u32>,
    /// Squeeze radius r (negative: anti-squeezed).
    #[arg(long, allow_negative_numbers = true)]
    pub squeeze: Option<f64>,
    /// Detector excess noise δ in shot-noise units.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub no_postselection: bool,
    /// Error-correction efficiency: `ideal` or `linear:a,b` for f(e) = a + b·e.
    #[arg(long, value_parser = parse_ec)]
    pub ec: Option<ECModel>,
    /// Quadrature grid spacing.
    #[arg(long)]
    pub step: Option<f64>,
    /// Integration range override (|β_x| or β_r).
    #[arg(long)]
    pub limit: Option<f64>,
    /// Angular grid spacing for dual-homodyne integrals.
    #[arg(long)]
    pub angular_step: Option<f64>,
    /// Reference-program argument list
    /// "HD|DHD DR|RR degree squeezing stepsize precision limit [denom] [noise] [ar]";
    /// takes precedence over the individual protocol flags.
    #[arg(long, value_name = "ARGS")]
    pub compat_legacy: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Transmittance grid `start:stop:step`, or a single value.
    #[arg(long, default_value = "1.0:0.0:0.05")]
    pub eta: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Narrow each amplitude search to the previous optimum + 1 (sequential).
    #[arg(long)]
    pub warm_start: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub bins: usize,
    /// Also write the sampled transcript as CSV.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

fn parse_ec(s: &str) -> std::result::Result<ECModel, String> {
    if s == "ideal" {
        return Ok(ECModel::Ideal);
    }
    let coeffs = s.strip_prefix("linear:").ok_or_else(|| format!("expected `ideal` or `linear:a,b`, got `{s}`"))?;
    let (a, b) = coeffs.split_once(',').ok_or_else(|| format!("expected `linear:a,b`, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad coefficient a: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad coefficient b: {e}"))?;
    let model = ECModel::Linear { a, b };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

/// η values of `start:stop:step`, walking from `start` towards `stop`.
pub fn parse_eta_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> Result<f64> {
        t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number `{t}` in η grid `{s}`")))
    };
    let (start, stop, step) = match parts.as_slice() {
        [v] => {
            let v = num(v)?;
            (v, v, 1.0)
        }
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(Error::Config(format!("η grid must be `start:stop:step`, got `{s}`"))),
    };
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("η grid step must be > 0, got {step}")));
    }
    let span = stop - start;
    let count = (span.abs() / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            let v = start + span.signum() * step * i as f64;
            (v * 1e12).round() / 1e12
        })
        .collect();
    if let Some(bad) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Config(format!("η = {bad} outside [0, 1]")));
    }
    Ok(grid)
}

/// Settings of the reference program's positional argument form.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatArgs {
    pub scheme: Scheme,
    pub mode: ReconciliationMode,
    pub d: u32,
    pub squeeze: f64,
    pub eta_step: f64,
    pub precision: f64,
    pub limit: f64,
    pub chi: f64,
    pub noise: f64,
    pub alpha: Option<f64>,
}

pub fn parse_compat(s: &str) -> Result<CompatArgs> {
    let t: Vec<&str> = s.split_whitespace().collect();
    if !(7..=10).contains(&t.len()) {
        return Err(Error::Config(format!(
            "compat form needs 7 to 10 arguments (HD|DHD DR|RR degree squeezing stepsize precision limit [denom] [noise] [ar]), got {}",
            t.len()
        )));
    }
    let scheme = match t[0] {
        "HD" => Scheme::Homodyne,
        "DHD" => Scheme::DualHomodyne,
        other => return Err(Error::Config(format!("unknown detection scheme `{other}`"))),
    };
    let mode = match t[1] {
        "DR" => ReconciliationMode::Direct,
        "RR" => ReconciliationMode::Reverse,
        other => return Err(Error::Config(format!("unknown reconciliation mode `{other}`"))),
    };
    let f = |i: usize| -> Result<f64> {
        t[i].parse::<f64>().map_err(|_| Error::Config(format!("bad number `{}` at position {}", t[i], i + 1)))
    };
    let d = t[2].parse::<u32>().map_err(|_| Error::Config(format!("bad degree `{}`", t[2])))?;
    let chi = match t.get(7) {
        Some(v) => {
            let denom = v.parse::<i64>().map_err(|_| Error::Config(format!("bad denominator `{v}`")))?;
            if denom == 0 {
                0.0
            } else {
                std::f64::consts::PI / denom as f64
            }
        }
        None => 0.0,
    };
    let noise = if t.len() > 8 { f(8)? } else { 0.0 };
    let alpha = if t.len() > 9 { Some(f(9)?).filter(|&a| a != 0.0) } else { None };
    Ok(CompatArgs {
        scheme,
        mode,
        d,
        squeeze: f(3)?,
        eta_step: f(4)?,
        precision: f(5)?,
        limit: f(6)?,
        chi,
        noise,
        alpha,
    })
}

/// Values used when a protocol flag is absent.
#[derive(Debug, Clone, Copy)]
struct Defaults {
    d: u32,
    alpha: Option<f64>,
    chi_preset: PresetArg,
}

const SWEEP_DEFAULTS: Defaults = Defaults { d: 2, alpha: None, chi_preset: PresetArg::None };

fn validate_defaults() -> Defaults {
    let (d, _, alpha, _, _, _) = reference_sets()[0];
    Defaults { d, alpha: Some(alpha), chi_preset: PresetArg::Local }
}

/// Flag set resolved into protocol parameters plus the η grid from the
/// compat form, if one was given.
pub fn resolve_protocol(a: &ProtocolArgs, eta: f64) -> Result<(ProtocolParams, Option<Vec<f64>>)> {
    resolve_with(a, eta, SWEEP_DEFAULTS)
}

fn resolve_with(a: &ProtocolArgs, eta: f64, defaults: Defaults) -> Result<(ProtocolParams, Option<Vec<f64>>)> {
    if let Some(s) = &a.compat_legacy {
        let c = parse_compat(s)?;
        let constellation = Constellation::new(c.d, c.alpha.unwrap_or(0.0), c.chi, c.squeeze)?;
        let params = ProtocolParams {
            scheme: c.scheme,
            mode: c.mode,
            quad: QuadratureSpec { step: c.precision, radial_limit: Some(c.limit), ..QuadratureSpec::default() },
            amplitude_policy: match c.alpha {
                Some(v) => AmplitudePolicy::Fixed(v),
                None => AmplitudePolicy::Optimize { max_amp: a.max_alpha },
            },
            ..ProtocolParams::new(constellation, ChannelPoint::new(eta, c.noise)?)
        };
        params.validate()?;
        let grid = parse_eta_grid(&format!("1:0:{}", c.eta_step))?;
        return Ok((params, Some(grid)));
    }

    let d = a.d.unwrap_or(defaults.d);
    let chi = match (a.chi_preset, a.chi, a.chi_denom) {
        (Some(p), _, _) => phase_preset(d, preset(p)),
        (None, Some(x), _) => x,
        (None, None, Some(0)) => 0.0,
        (None, None, Some(n)) => std::f64::consts::PI / n as f64,
        (None, None, None) => phase_preset(d, preset(defaults.chi_preset)),
    };
    let alpha = a.alpha.or(if a.optimize_amplitude { None } else { defaults.alpha });
    let constellation = Constellation::new(d, alpha.unwrap_or(0.0), chi, a.squeeze.unwrap_or(0.0))?;
    let defaults_quad = QuadratureSpec::default();
    let params = ProtocolParams {
        constellation,
        channel: ChannelPoint::new(eta, a.noise.unwrap_or(0.0))?,
        scheme: match a.scheme.unwrap_or(SchemeArg::Hd) {
            SchemeArg::Hd => Scheme::Homodyne,
            SchemeArg::Dhd => Scheme::DualHomodyne,
        },
        mode: match a.mode.unwrap_or(ModeArg::Dr) {
            ModeArg::Dr => ReconciliationMode::Direct,
            ModeArg::Rr => ReconciliationMode::Reverse,
        },
        postselection: !a.no_postselection,
        ec_model: a.ec.unwrap_or_default(),
        quad: QuadratureSpec {
            step: a.step.unwrap_or(defaults_quad.step),
            radial_limit: a.limit,
            angular_step: a.angular_step.unwrap_or(defaults_quad.angular_step),
        },
        amplitude_policy: match alpha {
            Some(v) => AmplitudePolicy::Fixed(v),
            None => AmplitudePolicy::Optimize { max_amp: a.max_alpha },
        },
    };
    params.validate()?;
    Ok((params, None))
}

fn preset(p: PresetArg) -> PhasePreset {
    match p {
        PresetArg::None => PhasePreset::None,
        PresetArg::Global => PhasePreset::Global,
        PresetArg::Local => PhasePreset::Local,
    }
}

/// One-line summary of the parameters for output headers.
pub fn describe(p: &ProtocolParams) -> String {
    let c = &p.constellation;
    let amplitude = match p.amplitude_policy {
        AmplitudePolicy::Fixed(a) => format!("fixed({a})"),
        AmplitudePolicy::Optimize { max_amp } => format!("optimize(max={max_amp})"),
    };
    let ec = match p.ec_model {
        ECModel::Ideal => "ideal".to_string(),
        ECModel::Linear { a, b } => format!("linear({a},{b})"),
    };
    let limit = p.quad.radial_limit.map_or("auto".to_string(), |l| l.to_string());
    format!(
        "scheme={} mode={} d={} chi={} squeeze={} noise={} postselection={} ec={} amplitude={} step={} limit={} angular_step={}",
        match p.scheme {
            Scheme::Homodyne => "hd",
            Scheme::DualHomodyne => "dhd",
        },
        match p.mode {
            ReconciliationMode::Direct => "dr",
            ReconciliationMode::Reverse => "rr",
        },
        c.d,
        c.axis_angle,
        c.squeeze_r,
        p.channel.delta,
        p.postselection,
        ec,
        amplitude,
        p.quad.step,
        limit,
        p.quad.angular_step
    )
}

fn header(p: &ProtocolParams) -> String {
    format!("# cvqkd-rate v{VERSION}, params {}", describe(p))
}

#[derive(Serialize)]
struct JsonSweep<'a> {
    version: &'a str,
    params: &'a ProtocolParams,
    rows: &'a [KeyRatePoint],
    failures: &'a [JsonFailure],
}

#[derive(Serialize)]
struct JsonFailure {
    eta: f64,
    error: String,
}

/// Distinguishes configuration problems (exit 2) from numerical ones (exit 1).
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    let grid = parse_eta_grid(&a.eta)?;
    let (params, compat_grid) = resolve_protocol(&a.protocol, grid[0])?;
    let grid = compat_grid.unwrap_or(grid);
    let results = sweep(&params, &grid, a.warm_start);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (eta, r) in grid.iter().zip(results) {
        match r {
            Ok(point) => rows.push(point),
            Err(e) => failures.push(JsonFailure { eta: *eta, error: e.to_string() }),
        }
    }

    let mut sink: Box<dyn Write + '_> = match &a.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *out),
    };
    match a.format {
        Format::Csv => {
            writeln!(sink, "{}", header(&params))?;
            writeln!(sink, "eta,alpha_opt,G_base_d,G_bits")?;
            for r in &rows {
                writeln!(sink, "{},{},{},{}", r.eta, r.alpha_opt, r.gain_base_d, r.gain_bits)?;
            }
        }
        Format::Json => {
            let doc = JsonSweep { version: VERSION, params: &params, rows: &rows, failures: &failures };
            serde_json::to_writer_pretty(&mut sink, &doc).map_err(|e| Failure::Numerical(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;

    if failures.is_empty() {
        Ok(())
    } else {
        for f in &failures {
            writeln!(err, "error at eta = {}: {}", f.eta, f.error)?;
        }
        Err(Failure::Numerical(format!("{} of {} points failed", failures.len(), grid.len())))
    }
}

fn cmd_point(a: &PointArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let (params, _) = resolve_protocol(&a.protocol, a.eta)?;
    let point = evaluate(&params).map_err(|e| Failure::Numerical(format!("at eta = {}: {e}", a.eta)))?;
    let diag =
        diagnose(&params, point.alpha_opt).map_err(|e| Failure::Numerical(format!("at eta = {}: {e}", a.eta)))?;
    let d = params.constellation.d;
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &diag).map_err(|e| Failure::Numerical(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "{}", header(&params))?;
            writeln!(out, "quantity,base_d,bits")?;
            writeln!(out, "eta,{},", diag.eta)?;
            writeln!(out, "alpha,{},", diag.alpha)?;
            for (name, v) in [
                ("I(A:B)", diag.mutual_information),
                ("chi_DR", diag.chi_direct),
                ("chi_RR_mean", diag.chi_reverse_mean),
                ("G_postselected", diag.gain_postselected),
                ("G_no_postselection", diag.gain_unpostselected),
            ] {
                writeln!(out, "{name},{v:.6},{:.6}", to_bits(v, d))?;
            }
        }
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    let eta = a.eta.unwrap_or(reference_sets()[0].1);
    let (params, _) = resolve_with(&a.protocol, eta, validate_defaults())?;
    if !matches!(params.amplitude_policy, AmplitudePolicy::Fixed(_)) {
        return Err(Failure::Usage("validate needs a fixed --alpha".into()));
    }
    if a.samples < MIN_VALIDATION_SAMPLES {
        writeln!(
            err,
            "warning: {} samples give too little statistical power; use at least {MIN_VALIDATION_SAMPLES}",
            a.samples
        )?;
    }
    if let Some(path) = &a.dump {
        let t = sample_transcript(&params, a.samples, a.seed)?;
        t.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let report = validate(&params, a.samples, a.seed, a.bins)?;
    writeln!(out, "{}", header(&params))?;
    writeln!(out, "seed {} samples {} bins {}", report.seed, report.samples, a.bins)?;
    writeln!(
        out,
        "I analytic {:.6}  empirical {:.6} ± {:.6}",
        report.analytic, report.empirical.value, report.empirical.std_error
    )?;
    for b in &report.bands {
        writeln!(out, "{} {} = {:.6} (limit {:.6})", if b.pass { "PASS" } else { "FAIL" }, b.name, b.value, b.limit)?;
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.bands.iter().filter(|b| !b.pass).map(|b| b.name.as_str()).collect();
        Err(Failure::Numerical(format!("validation failed: {}", failed.join(", "))))
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return e.exit_code();
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Point(a) => cmd_point(a, out),
        Command::Validate(a) => cmd_validate(a, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("cvqkd-rate").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eta_grids() {
        let g = parse_eta_grid("1.0:0.0:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[3], g[20]), (1.0, 0.85, 0.0));
        assert_eq!(parse_eta_grid("1.0:1.0:1").unwrap(), vec![1.0]);
        assert_eq!(parse_eta_grid("0.2:0.4:0.1").unwrap(), vec![0.2, 0.3, 0.4]);
        assert_eq!(parse_eta_grid("0.7").unwrap(), vec![0.7]);
        assert!(parse_eta_grid("1:0:0").is_err());
        assert!(parse_eta_grid("1.2:0:0.1").is_err());
        assert!(parse_eta_grid("1:0").is_err());
    }

    #[test]
    fn compat_form() {
        let c = parse_compat("DHD RR 8 0.0 0.05 0.01 20 6 0.1 2.5").unwrap();
        assert_eq!(c.scheme, Scheme::DualHomodyne);
        assert_eq!(c.mode, ReconciliationMode::Reverse);
        assert_eq!(c.d, 8);
        assert!((c.chi - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert_eq!((c.noise, c.alpha), (0.1, Some(2.5)));
        let c = parse_compat("HD DR 2 0.3 0.1 0.01 10").unwrap();
        assert_eq!((c.chi, c.noise, c.alpha), (0.0, 0.0, None));
        assert!(parse_compat("HD DR 2").is_err());
        assert!(parse_compat("XX DR 2 0 0.1 0.01 10").is_err());
    }

    #[test]
    fn ec_flag() {
        assert_eq!(parse_ec("ideal").unwrap(), ECModel::Ideal);
        assert_eq!(parse_ec("linear:1.1,0.5").unwrap(), ECModel::Linear { a: 1.1, b: 0.5 });
        assert!(parse_ec("linear:0.5,0.5").is_err());
        assert!(parse_ec("cascade").is_err());
    }

    #[test]
    fn single_row_sweep_is_deterministic() {
        let args = ["sweep", "--d", "2", "--alpha", "1.0", "--eta", "1.0:1.0:1", "--mode", "dr"];
        let (code, out, _) = run_str(&args);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# cvqkd-rate v"));
        assert_eq!(lines[1], "eta,alpha_opt,G_base_d,G_bits");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,1,"));
        assert_eq!(run_str(&args).1, out);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["sweep", "--chi-preset", "local", "--chi", "0.3"]).0, 2);
        assert_eq!(run_str(&["sweep", "--scheme", "dhd", "--squeeze", "0.2", "--alpha", "1"]).0, 2);
        assert_eq!(run_str(&["sweep", "--eta", "2:0:0.1"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        let (code, _, err) = run_str(&["point", "--d", "1", "--alpha", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("d = 1"));
    }

    #[test]
    fn point_breakdown() {
        let (code, out, _) = run_str(&["point", "--d", "2", "--eta", "0.5", "--alpha", "1", "--mode", "dr"]);
        assert_eq!(code, 0);
        assert!(out.contains("chi_DR,0.900046,0.900046"), "{out}");
        let g: f64 = out
            .lines()
            .find(|l| l.starts_with("G_no_postselection"))
            .and_then(|l| l.split(',').nth(1))
            .unwrap()
            .parse()
            .unwrap();
        assert!(g <= 0.0);
    }

    #[test]
    fn validate_warns_on_small_samples() {
        let (code, out, err) = run_str(&["validate", "--samples", "100"]);
        assert!(err.contains("warning"));
        assert!(out.contains(&format!("seed {DEFAULT_SEED}")));
        assert!(code == 0 || code == 1);
    }
}
