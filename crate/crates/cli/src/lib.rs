//! Command-line front end: verification suites, certificates, sweeps and the
//! classical query experiments.
//!
//! Every command emits one report `{command, config, results, pass}` as JSON
//! with sorted keys (or CSV for tabular results). Exit codes: 0 success,
//! 1 failed verdict or run error, 2 usage error.

pub mod checks;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tripsum_core::adversary::{certify_3matching, certify_3shift, BoundCertificate, CertifyOptions, CSV_HEADER};
use tripsum_core::experiments::{
    distinguish, property_density, randomized_upper, DEFAULT_MULTIPLIERS, DEFAULT_Q, SUCCESS_TARGET,
};
use tripsum_core::problems::Variant;
use tripsum_core::Error;

use checks::{registry, run_check, Ctx, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const DEFAULT_GRID: [usize; 3] = [1_000, 10_000, 100_000];
pub const DEFAULT_UPPER_TRIALS: usize = 1_000;
pub const DEFAULT_DISTINGUISH_TRIALS: usize = 100_000;
pub const DEFAULT_DENSITY_SAMPLES: usize = 10_000;
pub const EXPONENT_RANGE: (f64, f64) = (0.60, 0.75);
pub const CUBE_ROOT_MAX_RATE: f64 = 0.05;
pub const MIN_P_VALUE: f64 = 1e-3;
pub const MIN_FAR_FRACTION: f64 = 0.99;

#[derive(Debug, Parser)]
#[command(name = "tripsum", version, about = "Adversary-bound certification for 3-shift-sum and 3-matching-sum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the identity checks of one suite (or all).
    Verify,
    /// Certify a lower bound for one instance.
    Certify,
    /// Random-subset algorithm over a grid of n.
    RandomizedUpper,
    /// Coverage probability and conditioned marginals of a random query set.
    Distinguish,
    /// Fraction of Boolean inputs far from every shifted xor.
    PropertyDensity,
    /// Certificates over a grid of n (entries `n` or `n:q`).
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Certify => "certify",
            Command::RandomizedUpper => "randomized-upper",
            Command::Distinguish => "distinguish",
            Command::PropertyDensity => "property-density",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command; a JSON config file uses the same keys.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON file with default values for any of these flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// operators | certificates | symmetry | adversary | all
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// shift | matching
    #[arg(long, global = true)]
    pub variant: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub q: Option<u64>,
    /// Query-set size for distinguish.
    #[arg(long, global = true)]
    pub t: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per grid point, or samples for property-density.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<String>>,
    /// Subset sizes c·n^{2/3} reported by randomized-upper.
    #[arg(long, global = true, value_delimiter = ',')]
    pub multipliers: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub quick: bool,
    /// Record wall-clock times (reports are then no longer reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Output path, `-` for standard output. Not echoed in reports.
    #[arg(long, global = true)]
    #[serde(skip_serializing)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    /// `self` over `file`, field by field.
    fn over(self, file: Flags) -> Flags {
        Flags {
            config: self.config,
            suite: self.suite.or(file.suite),
            variant: self.variant.or(file.variant),
            n: self.n.or(file.n),
            q: self.q.or(file.q),
            t: self.t.or(file.t),
            tol: self.tol.or(file.tol),
            seed: self.seed.or(file.seed),
            trials: self.trials.or(file.trials),
            grid: self.grid.or(file.grid),
            multipliers: self.multipliers.or(file.multipliers),
            quick: self.quick || file.quick,
            timings: self.timings || file.timings,
            out: self.out.or(file.out),
            format: self.format.or(file.format),
        }
    }
}

/// A failed run: usage errors exit 2, everything else 1.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: msg.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::UnsupportedVariant(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        Failure { code, message: e.to_string() }
    }
}

/// A finished command: the report body and whether its verdicts hold.
pub struct Outcome {
    pub results: Value,
    pub csv: Vec<String>,
    pub pass: bool,
}

fn require<T: Clone>(v: &Option<T>, flag: &str, cmd: Command) -> Result<T, Failure> {
    v.clone().ok_or_else(|| usage(format!("{} needs --{flag}", cmd.name())))
}

fn variant(flags: &Flags, cmd: Command, default: Option<Variant>) -> Result<Variant, Failure> {
    match (&flags.variant, default) {
        (Some(s), _) => s.parse().map_err(|_| usage(format!("unknown variant {s:?} (shift | matching)"))),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(usage(format!("{} needs --variant", cmd.name()))),
    }
}

fn q_usize(q: u64) -> Result<usize, Failure> {
    usize::try_from(q).map_err(|_| usage(format!("q = {q} is out of range")))
}

fn certify_one(variant: Variant, n: usize, q: usize, flags: &Flags) -> Result<BoundCertificate, Failure> {
    let opts = CertifyOptions { tol: flags.tol.unwrap_or(1e-8), seed: flags.seed.unwrap_or(0), ..Default::default() };
    if n == 0 || q < 2 {
        return Err(usage(format!("need n ≥ 1 and q ≥ 2, got n = {n}, q = {q}")));
    }
    if q < 2 * n.pow(3) {
        eprintln!("warning: q = {q} is below 2n³ = {}; the negative density bound is vacuous", 2 * n.pow(3));
    }
    let t = Instant::now();
    let mut cert = match variant {
        Variant::Shift => certify_3shift(n, q, &opts)?,
        Variant::Matching => certify_3matching(n, q, &opts)?,
    };
    if flags.timings {
        cert.elapsed_seconds = Some(t.elapsed().as_secs_f64());
    }
    Ok(cert)
}

fn cmd_verify(flags: &Flags) -> Result<Outcome, Failure> {
    let suite = flags.suite.clone().unwrap_or_else(|| "all".into());
    let selected: Vec<Suite> = match suite.as_str() {
        "all" => Suite::ALL.to_vec(),
        s => match Suite::ALL.iter().find(|x| x.name() == s) {
            Some(&x) => vec![x],
            None => {
                return Err(usage(format!(
                    "unknown suite {s:?} (operators | certificates | symmetry | adversary | all)"
                )))
            }
        },
    };
    let ctx = Ctx { quick: flags.quick, seed: flags.seed.unwrap_or(0) };
    let mut results = Vec::new();
    for check in registry().iter().filter(|c| selected.contains(&c.suite)) {
        let r = run_check(check, &ctx, flags.timings);
        eprintln!("{}", r.line());
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    let csv = std::iter::once("name,suite,status,value,tolerance,provenance".to_string())
        .chain(results.iter().map(|r| {
            let (v, t, p) = r.outcome.as_ref().map_or((f64::NAN, f64::NAN, "error".into()), |o| {
                (o.value, o.tolerance, serde_json::to_value(o.provenance).unwrap().as_str().unwrap().to_string())
            });
            format!("{},{},{},{:e},{:e},{}", r.name, r.suite.name(), r.status, v, t, p)
        }))
        .collect();
    Ok(Outcome {
        results: json!({
            "summary": results.iter().map(|r| r.line()).collect::<Vec<_>>(),
            "checks": results,
            "passed": results.len() - failed,
            "failed": failed,
        }),
        csv,
        pass: failed == 0,
    })
}

fn cmd_certify(flags: &Flags) -> Result<Outcome, Failure> {
    let cmd = Command::Certify;
    let v = variant(flags, cmd, None)?;
    let n = require(&flags.n, "n", cmd)?;
    let q = q_usize(require(&flags.q, "q", cmd)?)?;
    let cert = certify_one(v, n, q, flags)?;
    Ok(Outcome {
        csv: vec![CSV_HEADER.to_string(), cert.csv_row()],
        pass: cert.pass(),
        results: serde_json::to_value(&cert).map_err(Error::from)?,
    })
}

fn cmd_sweep(flags: &Flags) -> Result<Outcome, Failure> {
    let cmd = Command::Sweep;
    let v = variant(flags, cmd, None)?;
    let grid = require(&flags.grid, "grid", cmd)?;
    if grid.is_empty() {
        return Err(usage("the grid is empty"));
    }
    let mut certs = Vec::new();
    for entry in &grid {
        let (n, q) = match entry.split_once(':') {
            Some((n, q)) => (n.trim().parse::<usize>().ok(), q.trim().parse::<u64>().ok()),
            None => (entry.trim().parse::<usize>().ok(), flags.q),
        };
        let (Some(n), Some(q)) = (n, q) else {
            return Err(usage(format!("grid entry {entry:?} needs the form n or n:q (with --q)")));
        };
        certs.push(certify_one(v, n, q_usize(q)?, flags)?);
    }
    Ok(Outcome {
        csv: std::iter::once(CSV_HEADER.to_string()).chain(certs.iter().map(|c| c.csv_row())).collect(),
        pass: certs.iter().all(|c| c.pass()),
        results: json!({ "certificates": certs }),
    })
}

fn parse_grid(flags: &Flags) -> Result<Vec<usize>, Failure> {
    match &flags.grid {
        None => Ok(DEFAULT_GRID.to_vec()),
        Some(g) if g.is_empty() => Err(usage("the grid is empty")),
        Some(g) => g
            .iter()
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| *x >= 1.0 && x.fract() == 0.0).map(|x| x as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| usage(format!("grid {g:?} must list positive integers"))),
    }
}

fn cmd_randomized_upper(flags: &Flags) -> Result<Outcome, Failure> {
    let cmd = Command::RandomizedUpper;
    let v = variant(flags, cmd, Some(Variant::Matching))?;
    let seed = require(&flags.seed, "seed", cmd)?;
    let grid = parse_grid(flags)?;
    let trials = flags.trials.unwrap_or(DEFAULT_UPPER_TRIALS);
    let mut multipliers = flags.multipliers.clone().unwrap_or_else(|| DEFAULT_MULTIPLIERS.to_vec());
    if !multipliers.contains(&4.0) {
        multipliers.push(4.0);
    }
    let r = randomized_upper(v, &grid, trials, &multipliers, seed)?;
    let exponent_ok = (EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&r.fitted_exponent);
    let four_ok =
        r.points.iter().all(|p| p.success.iter().filter(|s| s.multiplier == 4.0).all(|s| s.rate >= SUCCESS_TARGET));
    let cube_ok = r.points.iter().all(|p| p.cube_root_rate <= CUBE_ROOT_MAX_RATE);
    let csv = std::iter::once("n,trials,queries_two_thirds,cube_root_rate,success_at_4".to_string())
        .chain(r.points.iter().map(|p| {
            let four = p.success.iter().find(|s| s.multiplier == 4.0).map_or(f64::NAN, |s| s.rate);
            format!("{},{},{},{},{}", p.n, p.trials, p.queries_two_thirds, p.cube_root_rate, four)
        }))
        .collect();
    Ok(Outcome {
        csv,
        pass: exponent_ok && four_ok && cube_ok,
        results: json!({
            "report": r,
            "provenance": "monte_carlo",
            "verdicts": {
                "exponent_in_range": { "pass": exponent_ok, "range": [EXPONENT_RANGE.0, EXPONENT_RANGE.1] },
                "success_at_four_n_two_thirds": { "pass": four_ok, "threshold": SUCCESS_TARGET },
                "cube_root_success_small": { "pass": cube_ok, "threshold": CUBE_ROOT_MAX_RATE },
            },
        }),
    })
}

fn cmd_distinguish(flags: &Flags) -> Result<Outcome, Failure> {
    let cmd = Command::Distinguish;
    let v = variant(flags, cmd, Some(Variant::Matching))?;
    let seed = require(&flags.seed, "seed", cmd)?;
    let n = require(&flags.n, "n", cmd)?;
    let q = flags.q.unwrap_or(DEFAULT_Q);
    let t = flags.t.unwrap_or_else(|| ((n as f64).powf(2.0 / 3.0) / 10.0).round() as usize);
    let trials = flags.trials.unwrap_or(DEFAULT_DISTINGUISH_TRIALS);
    let r = distinguish(v, n, q, t, trials, seed)?;
    let marginal_ok = r.marginal.p_value >= MIN_P_VALUE;
    let csv = vec![
        "n,t,trials,coverage_rate,coverage_std_error,reference,expected_covered_triples,chi_square,dof,p_value,tv_distance"
            .to_string(),
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.t,
            r.trials,
            r.coverage_rate,
            r.coverage_std_error,
            r.reference,
            r.expected_covered_triples,
            r.marginal.chi_square,
            r.marginal.dof,
            r.marginal.p_value,
            r.marginal.tv_distance
        ),
    ];
    Ok(Outcome {
        csv,
        pass: r.within_reference && marginal_ok,
        results: json!({
            "verdicts": {
                "coverage_within_reference": { "pass": r.within_reference, "bound": "2·t³/n² + 3σ" },
                "marginal_consistent_with_uniform": { "pass": marginal_ok, "min_p_value": MIN_P_VALUE },
            },
            "report": r,
            "provenance": "monte_carlo",
        }),
    })
}

fn cmd_property_density(flags: &Flags) -> Result<Outcome, Failure> {
    let cmd = Command::PropertyDensity;
    let seed = require(&flags.seed, "seed", cmd)?;
    let n = require(&flags.n, "n", cmd)?;
    let samples = flags.trials.unwrap_or(DEFAULT_DENSITY_SAMPLES);
    let r = property_density(n, samples as u64, seed)?;
    let ok = r.fraction >= MIN_FAR_FRACTION;
    let csv = std::iter::once("distance,count".to_string())
        .chain(r.histogram.iter().map(|(d, c)| format!("{d},{c}")))
        .collect();
    Ok(Outcome {
        csv,
        pass: ok,
        results: json!({
            "verdicts": { "far_fraction": { "pass": ok, "threshold": MIN_FAR_FRACTION } },
            "provenance": serde_json::to_value(r.mode).map_err(Error::from)?,
            "report": r,
        }),
    })
}

fn dispatch(cmd: Command, flags: &Flags) -> Result<Outcome, Failure> {
    match cmd {
        Command::Verify => cmd_verify(flags),
        Command::Certify => cmd_certify(flags),
        Command::RandomizedUpper => cmd_randomized_upper(flags),
        Command::Distinguish => cmd_distinguish(flags),
        Command::PropertyDensity => cmd_property_density(flags),
        Command::Sweep => cmd_sweep(flags),
    }
}

fn load_config(path: &PathBuf) -> Result<Flags, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

fn emit(flags: &Flags, body: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure { code: EXIT_FAIL, message: format!("cannot write report: {e}") };
    match flags.out.as_deref() {
        None | Some("-") => std::io::stdout().write_all(body.as_bytes()).map_err(io),
        Some(path) => std::fs::write(path, body).map_err(io),
    }
}

fn render(report: &Value, csv: &[String], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report is valid JSON") + "\n",
        Format::Csv => csv.join("\n") + "\n",
    }
}

/// Parses `args`, runs the command and writes its report; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let file = match &cli.flags.config {
        Some(p) => match load_config(p) {
            Ok(f) => f,
            Err(f) => {
                eprintln!("error: {}", f.message);
                return f.code;
            }
        },
        None => Flags::default(),
    };
    let flags = cli.flags.over(file);
    let format = flags.format.unwrap_or(Format::Json);
    let start = Instant::now();
    let outcome = dispatch(cli.command, &flags);
    let mut config = serde_json::to_value(&flags).expect("flags serialize");
    if let Value::Object(m) = &mut config {
        m.retain(|_, v| !v.is_null());
    }
    let mut report = json!({ "command": cli.command.name(), "config": config });
    let (csv, code) = match outcome {
        Ok(o) => {
            report["results"] = o.results;
            report["pass"] = Value::Bool(o.pass);
            (o.csv, if o.pass { EXIT_OK } else { EXIT_FAIL })
        }
        Err(f) if f.code == EXIT_USAGE => {
            eprintln!("error: {}", f.message);
            return EXIT_USAGE;
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            report["error"] = Value::String(f.message.clone());
            report["pass"] = Value::Bool(false);
            (vec![format!("error,{}", f.message.replace(',', ";"))], f.code)
        }
    };
    if flags.timings {
        report["timings"] = json!({ "elapsed_seconds": start.elapsed().as_secs_f64() });
    }
    if let Err(f) = emit(&flags, &render(&report, &csv, format)) {
        eprintln!("error: {}", f.message);
        return f.code;
    }
    code
}
