//! Command-line front end: rate curves, slope fits and bound validation as
//! CSV on standard output.
//!
//! Every option may also come from a flat `key = value` file given with
//! `--config`; keys are the long option names without dashes, later lines
//! override earlier ones and command-line flags override the file. Blank
//! lines and lines starting with `#` are ignored.
//!
//! Exit codes: 0 success, 1 bound validation ran but reported a violation,
//! 2 usage or configuration error, 3 user cap exceeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiments::{
    dof_slope, run_rate_curve, slope_of, validate_bounds, BoundsConfig, BoundsReport, ExperimentConfig, RateCurve,
    ScalingSchedule, DEFAULT_LAMBDAS, DEFAULT_USER_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Columns of the rate-curve CSV.
pub const CURVE_HEADER: &str = "snr_db,users,rate_mean,rate_stderr,rate_gain_mean,rate_loss_mean,scheme,trials,seed";
/// Columns of the bound-validation CSV.
pub const BOUNDS_HEADER: &str = "N,lambda,empirical_cdf,bound_cdf,empirical_min_mean,bound_mean,pass";

#[derive(Debug, Parser)]
#[command(
    name = "ibc-diversity",
    version,
    about = "User selection and interference alignment diversity in interfering broadcast channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average per-transmitter rate over an SNR sweep, one CSV row per point.
    RateCurve(CurveArgs),
    /// Least-squares slope of the rate against log2(P) over the top points.
    DofSlope(SlopeArgs),
    /// Empirical checks of the alignment-measure bounds.
    ValidateBounds(BoundsArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (affects speed only, never results).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Transmitters [default: 4].
    #[arg(long = "K")]
    k: Option<String>,
    /// Receive antennas per user [default: 3].
    #[arg(long = "Nr")]
    nr: Option<String>,
    /// Transmit antennas per transmitter [default: 1].
    #[arg(long = "Nt")]
    nt: Option<String>,
    /// max-snr, min-inr, max-sinr, min-iam, two-stage:N1:N2, random, tdma1 or tdma2 [default: max-sinr].
    #[arg(long)]
    scheme: Option<String>,
    /// fixed:N, powerlaw:a:b or exppower:a:b:c [default: fixed:10].
    #[arg(long)]
    schedule: Option<String>,
    /// SNR grid in dB, start:step:stop or a single value [default: 0:5:40].
    #[arg(long)]
    snr: Option<String>,
    /// Channel draws per SNR point [default: 1000].
    #[arg(long)]
    trials: Option<String>,
    /// Seed of every random stream [default: 1].
    #[arg(long)]
    seed: Option<String>,
    /// Largest number of users a schedule may request [default: 1000000].
    #[arg(long)]
    cap: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SlopeArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Number of top SNR points in the fit [default: 3].
    #[arg(long)]
    window: Option<String>,
    /// Fit a flat synthetic curve instead of simulating (prints slope=0).
    #[arg(long)]
    self_test: bool,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Transmitters [default: 4].
    #[arg(long = "K")]
    k: Option<String>,
    /// Receive antennas per user [default: 3].
    #[arg(long = "Nr")]
    nr: Option<String>,
    /// Comma-separated group sizes [default: 10,100].
    #[arg(long = "N-list")]
    n_list: Option<String>,
    /// Comma-separated distribution thresholds [default: 0.1,0.3,0.5,0.7,1].
    #[arg(long)]
    lambdas: Option<String>,
    /// Trials per group size [default: 1000].
    #[arg(long)]
    trials: Option<String>,
    /// Seed of every random stream [default: 1].
    #[arg(long)]
    seed: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses a flat `key = value` file.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Resolved options: file entries overridden by flags.
struct Options {
    values: BTreeMap<String, String>,
}

impl Options {
    fn resolve(config: Option<&PathBuf>, allowed: &[&str], flags: Vec<(&str, Option<&String>)>) -> Result<Self, Failure> {
        let mut values = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            for (key, value) in parse_config_text(&text).map_err(usage)? {
                if !allowed.contains(&key.as_str()) {
                    return Err(usage(format!("unknown config key '{key}'")));
                }
                values.insert(key, value);
            }
        }
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Options { values })
    }

    fn raw<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map_or(default, String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: &str) -> Result<T, Failure> {
        let raw = self.raw(key, default);
        raw.trim()
            .parse()
            .map_err(|_| usage(format!("invalid value '{raw}' for {key}")))
    }
}

/// Parses `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>, String> {
    let bad = || format!("invalid SNR grid '{s}' (expected start:step:stop)");
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(bad)?;
    match parts.as_slice() {
        [v] => Ok(vec![*v]),
        [start, step, stop] => {
            if !(*step > 0.0) || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(format!("SNR grid '{s}' has too many points"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("invalid {what} list '{s}'"))))
        .collect()
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// dropped, exponent notation outside `[1e-5, 1e9)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-5..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    }
}

fn threads_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| usage(format!("cannot start worker threads: {e}")))
}

const CURVE_KEYS: [&str; 9] = ["K", "Nr", "Nt", "scheme", "schedule", "snr", "trials", "seed", "cap"];

fn curve_flags(a: &CurveArgs) -> Vec<(&'static str, Option<&String>)> {
    vec![
        ("K", a.k.as_ref()),
        ("Nr", a.nr.as_ref()),
        ("Nt", a.nt.as_ref()),
        ("scheme", a.scheme.as_ref()),
        ("schedule", a.schedule.as_ref()),
        ("snr", a.snr.as_ref()),
        ("trials", a.trials.as_ref()),
        ("seed", a.seed.as_ref()),
        ("cap", a.cap.as_ref()),
    ]
}

/// Experiment settings plus their textual echo.
struct ResolvedCurve {
    config: ExperimentConfig,
    snr_text: String,
}

fn resolve_curve(opts: &Options) -> Result<ResolvedCurve, Failure> {
    let cap: usize = opts.parse("cap", &DEFAULT_USER_CAP.to_string())?;
    let schedule: ScalingSchedule = opts.parse::<ScalingSchedule>("schedule", "fixed:10")?.with_cap(cap);
    let snr_text = opts.raw("snr", "0:5:40").to_string();
    let config = ExperimentConfig {
        k: opts.parse("K", "4")?,
        n_r: opts.parse("Nr", "3")?,
        n_t: opts.parse("Nt", "1")?,
        strategy: opts.parse("scheme", "max-sinr")?,
        schedule,
        snr_db: parse_snr_grid(&snr_text).map_err(usage)?,
        trials: opts.parse("trials", "1000")?,
        seed: opts.parse("seed", "1")?,
    };
    config.validate()?;
    Ok(ResolvedCurve { config, snr_text })
}

fn curve_echo(command: &str, r: &ResolvedCurve) -> String {
    let c = &r.config;
    format!(
        "command={command} K={} Nr={} Nt={} scheme={} schedule={} snr={} trials={} seed={} cap={}",
        c.k, c.n_r, c.n_t, c.strategy, c.schedule, r.snr_text, c.trials, c.seed, c.schedule.cap
    )
}

/// Writes a curve as CSV rows (header included, no provenance).
pub fn curve_csv(curve: &RateCurve) -> String {
    let mut s = String::new();
    writeln!(s, "{CURVE_HEADER}").unwrap();
    for i in 0..curve.len() {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            format_number(curve.snr_db[i]),
            curve.users[i],
            format_number(curve.rate_mean[i]),
            format_number(curve.rate_stderr[i]),
            format_number(curve.rate_gain_mean[i]),
            format_number(curve.rate_loss_mean[i]),
            curve.strategy,
            curve.trials,
            curve.seed
        )
        .unwrap();
    }
    s
}

/// One parsed row of the rate-curve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub snr_db: f64,
    pub users: usize,
    pub rate_mean: f64,
    pub rate_stderr: f64,
    pub rate_gain_mean: f64,
    pub rate_loss_mean: f64,
    pub scheme: String,
    pub trials: usize,
    pub seed: u64,
}

/// A rate-curve CSV document: rows plus `#` provenance lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveCsv {
    pub rows: Vec<CurveRow>,
    pub comments: Vec<String>,
}

impl CurveCsv {
    /// Parses the output of `rate-curve`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(CURVE_HEADER) {
            return Err("missing rate-curve header".into());
        }
        let mut rows = Vec::new();
        let mut comments = Vec::new();
        for (i, line) in lines.enumerate() {
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.trim_start().to_string());
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || format!("row {}: malformed '{line}'", i + 1);
            if f.len() != 9 {
                return Err(bad());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
            rows.push(CurveRow {
                snr_db: num(f[0])?,
                users: f[1].parse().map_err(|_| bad())?,
                rate_mean: num(f[2])?,
                rate_stderr: num(f[3])?,
                rate_gain_mean: num(f[4])?,
                rate_loss_mean: num(f[5])?,
                scheme: f[6].to_string(),
                trials: f[7].parse().map_err(|_| bad())?,
                seed: f[8].parse().map_err(|_| bad())?,
            });
        }
        Ok(CurveCsv { rows, comments })
    }

    /// Re-emits the document in the format `rate-curve` writes.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CURVE_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                format_number(r.snr_db),
                r.users,
                format_number(r.rate_mean),
                format_number(r.rate_stderr),
                format_number(r.rate_gain_mean),
                format_number(r.rate_loss_mean),
                r.scheme,
                r.trials,
                r.seed
            )
            .unwrap();
        }
        for c in &self.comments {
            writeln!(s, "# {c}").unwrap();
        }
        s
    }
}

fn version_line() -> String {
    format!("ibc-diversity {}", env!("CARGO_PKG_VERSION"))
}

fn cmd_rate_curve(a: &CurveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let opts = Options::resolve(a.common.config.as_ref(), &CURVE_KEYS, curve_flags(a))?;
    let resolved = resolve_curve(&opts)?;
    resolved.config.users()?;
    let pool = threads_pool(a.common.threads)?;
    let curve = pool.install(|| run_rate_curve(&resolved.config))?;
    let mut text = curve_csv(&curve);
    writeln!(text, "# {}", version_line()).unwrap();
    writeln!(text, "# {}", curve_echo("rate-curve", &resolved)).unwrap();
    out.write_all(text.as_bytes())
        .map_err(|e| usage(format!("write failed: {e}")))?;
    Ok(EXIT_OK)
}

fn cmd_dof_slope(a: &SlopeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut keys = CURVE_KEYS.to_vec();
    keys.push("window");
    let mut flags = curve_flags(&a.curve);
    flags.push(("window", a.window.as_ref()));
    let opts = Options::resolve(a.curve.common.config.as_ref(), &keys, flags)?;
    let window: usize = opts.parse("window", "3")?;
    let line = if a.self_test {
        let db = [0.0, 10.0, 20.0, 30.0, 40.0];
        let slope = slope_of(&db, &[1.0; 5], window)?;
        format!("slope={} self-test window={window} {}", format_number(slope), version_line())
    } else {
        let resolved = resolve_curve(&opts)?;
        resolved.config.users()?;
        let pool = threads_pool(a.curve.common.threads)?;
        let curve = pool.install(|| run_rate_curve(&resolved.config))?;
        let slope = dof_slope(&curve, window)?;
        format!(
            "slope={} {} window={window} version={}",
            format_number(slope),
            curve_echo("dof-slope", &resolved),
            env!("CARGO_PKG_VERSION")
        )
    };
    writeln!(out, "{line}").map_err(|e| usage(format!("write failed: {e}")))?;
    Ok(EXIT_OK)
}

/// Writes a validation report as CSV; rate-loss checks follow as `#` lines.
pub fn bounds_csv(report: &BoundsReport) -> String {
    let mut s = String::new();
    writeln!(s, "{BOUNDS_HEADER}").unwrap();
    for r in &report.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.n,
            format_number(r.lambda),
            format_number(r.empirical_cdf),
            format_number(r.bound_cdf),
            format_number(r.empirical_min_mean),
            format_number(r.bound_mean),
            r.pass
        )
        .unwrap();
    }
    for r in &report.rloss {
        writeln!(
            s,
            "# rate_loss N={} snr_db={} empirical_mean={} stderr={} bound={} pass={}",
            r.n,
            format_number(r.snr_db),
            format_number(r.empirical_mean),
            format_number(r.empirical_stderr),
            format_number(r.bound),
            r.pass
        )
        .unwrap();
    }
    s
}

fn cmd_validate_bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let keys = ["K", "Nr", "N-list", "lambdas", "trials", "seed"];
    let flags = vec![
        ("K", a.k.as_ref()),
        ("Nr", a.nr.as_ref()),
        ("N-list", a.n_list.as_ref()),
        ("lambdas", a.lambdas.as_ref()),
        ("trials", a.trials.as_ref()),
        ("seed", a.seed.as_ref()),
    ];
    let opts = Options::resolve(a.common.config.as_ref(), &keys, flags)?;
    let default_lambdas = DEFAULT_LAMBDAS.map(format_number).join(",");
    let n_list_text = opts.raw("N-list", "10,100").to_string();
    let lambdas_text = opts.raw("lambdas", &default_lambdas).to_string();
    let mut cfg = BoundsConfig::new(
        opts.parse("K", "4")?,
        opts.parse("Nr", "3")?,
        parse_list(&n_list_text, "N")?,
        opts.parse("trials", "1000")?,
        opts.parse("seed", "1")?,
    );
    cfg.lambdas = parse_list(&lambdas_text, "lambda")?;
    let pool = threads_pool(a.common.threads)?;
    let report = pool.install(|| validate_bounds(&cfg))?;
    let mut text = bounds_csv(&report);
    writeln!(text, "# {}", version_line()).unwrap();
    writeln!(
        text,
        "# command=validate-bounds K={} Nr={} N-list={} lambdas={} trials={} seed={}",
        cfg.k, cfg.n_r, n_list_text, lambdas_text, cfg.trials, cfg.seed
    )
    .unwrap();
    out.write_all(text.as_bytes())
        .map_err(|e| usage(format!("write failed: {e}")))?;
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_VALIDATION_FAILED
    })
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
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
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::RateCurve(a) => cmd_rate_curve(a, out),
        Command::DofSlope(a) => cmd_dof_slope(a, out),
        Command::ValidateBounds(a) => cmd_validate_bounds(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_matches_nine_significant_digits() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (100.0, "100"),
            (12.341690282729562, "12.3416903"),
            (0.000123456789123, "0.000123456789"),
            (1.5e-7, "1.5e-07"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.99999999999, "1"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x}");
        }
    }

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snr_grid("0:5:40").unwrap().len(), 9);
        assert_eq!(parse_snr_grid("20:5:40").unwrap(), vec![20.0, 25.0, 30.0, 35.0, 40.0]);
        assert_eq!(parse_snr_grid("30").unwrap(), vec![30.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap().len(), 4);
        for bad in ["0:0:10", "10:5:0", "a:b:c", "1:2", ""] {
            assert!(parse_snr_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_text() {
        let kv = parse_config_text("# comment\nK = 4\n\nscheme=min-inr\nK=5\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("K".into(), "4".into()),
                ("scheme".into(), "min-inr".into()),
                ("K".into(), "5".into())
            ]
        );
        assert!(parse_config_text("novalue\n").is_err());
        assert!(parse_config_text("=3\n").is_err());
    }

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn rate_curve_output_shape() {
        let (code, out, _) = run_str(&[
            "ibc-diversity",
            "rate-curve",
            "--K",
            "4",
            "--Nr",
            "3",
            "--scheme",
            "max-sinr",
            "--schedule",
            "powerlaw:1:1",
            "--snr",
            "0:10:20",
            "--trials",
            "5",
            "--seed",
            "7",
        ]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(CURVE_HEADER));
        let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), 3);
        assert!(rows[2].starts_with("20,100,"));
        assert!(rows[2].ends_with(",max-sinr,5,7"));
        let parsed = CurveCsv::parse(&out).unwrap();
        assert_eq!(parsed.emit(), out);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["ibc-diversity", "rate-curve", "--K", "x"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["ibc-diversity", "rate-curve", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["ibc-diversity"]).0, EXIT_USAGE);
        let (code, _, err) = run_str(&[
            "ibc-diversity",
            "rate-curve",
            "--schedule",
            "exppower:1:1:0",
            "--snr",
            "0:10:30",
            "--trials",
            "1",
        ]);
        assert_eq!(code, EXIT_CAP);
        assert!(err.contains("at 20 dB"), "{err}");
        assert_eq!(run_str(&["ibc-diversity", "validate-bounds", "--K", "3", "--Nr", "3"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["ibc-diversity", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn self_test_slope_is_zero() {
        let (code, out, _) = run_str(&["ibc-diversity", "dof-slope", "--self-test"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("slope=0 "), "{out}");
        assert_eq!(out.lines().count(), 1);
    }
}
