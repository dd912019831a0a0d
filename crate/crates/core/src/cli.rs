//! Command-line front end: `sample`, `reparam`, `validate` and `replay`.
//!
//! Every file-producing run writes `<out>.manifest.json` holding the
//! command, its fully resolved parameters (including a generated seed),
//! the tool version and the SHA-256 of each output. `replay` regenerates
//! the outputs from a manifest and compares digests.
//!
//! Exit status: 0 on success, 1 when a checked claim fails or a replay
//! does not match, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::export::{fmt_f64, polyline_csv, polyline_svg, read_polyline_csv};
use crate::path::{sample_closed, sample_open, IsometricPath, Resolution};
use crate::reparam::{transport_polyline, SpeedProfile};
use crate::schedule::RadiusSchedule;
use crate::stats::{self, ClaimReport, ConditionalSpec};
use crate::vec::PlaneVec;

pub const EXIT_CLAIM_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_RATIO: f64 = 0.5;

/// Two comma-separated numbers, `x,y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{v:?} is not a finite number"))
        };
        Ok(Pair(num(x)?, num(y)?))
    }
}

impl From<[f64; 2]> for Pair {
    fn from([x, y]: [f64; 2]) -> Self {
        Pair(x, y)
    }
}

impl From<Pair> for [f64; 2] {
    fn from(p: Pair) -> Self {
        [p.0, p.1]
    }
}

impl From<Pair> for PlaneVec {
    fn from(p: Pair) -> Self {
        PlaneVec::new(p.0, p.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Parser)]
#[command(
    name = "isowalk",
    version,
    about = "Random unit-speed planar curves with pinned endpoints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a curve and write it as CSV and/or SVG.
    Sample(SampleArgs),
    /// Reparametrize a curve to a prescribed speed profile.
    Reparam(ReparamArgs),
    /// Monte Carlo checks of the walk's distributional claims.
    #[command(subcommand)]
    Validate(ValidateCommand),
    /// Regenerate the outputs of a manifest and compare digests.
    Replay(ReplayArgs),
}

/// How to sample a curve.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
pub struct CurveArgs {
    /// Start point `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<Pair>,
    /// End point `x,y`; `|b - a|` must be below 1.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "closed")]
    pub b: Option<Pair>,
    /// Sample a closed curve through `a`.
    #[arg(long)]
    pub closed: bool,
    /// Initial direction of a closed curve, in radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub base_angle: f64,
    /// `geometric:<c0>:<alpha>`, `uniform-angle` or `custom:<csv>`.
    /// Defaults to `geometric:|b - a|^2:0.5`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Certified sup-norm tolerance; picks the depth.
    #[arg(long, conflicts_with = "depth")]
    pub eps: Option<f64>,
    /// Walk depth; the curve has `2^depth` segments.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub curve: CurveArgs,
    /// Output prefix.
    #[arg(long, default_value = "path")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("profile").required(true).args(["g_profile", "g_const"])))]
pub struct ReparamArgs {
    /// Speed profile CSV with header `t,g`.
    #[arg(long)]
    pub g_profile: Option<PathBuf>,
    /// Constant speed.
    #[arg(long, allow_hyphen_values = true)]
    pub g_const: Option<f64>,
    /// Parameter domain `x0,x1` of a constant profile.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "g_profile")]
    pub domain: Option<Pair>,
    /// Input curve CSV (`t,x,y`, t from 0 to 1); otherwise one is sampled.
    #[arg(long, conflicts_with_all = ["a", "b", "closed"])]
    pub path: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub curve: CurveArgs,
    /// Evenly spaced probes for the speed check.
    #[arg(long, default_value_t = 1000)]
    pub probes: usize,
    /// Output prefix.
    #[arg(long, default_value = "reparam")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ValidateCommand {
    /// KS test of theta(t) against Uniform[-1, 1].
    ThetaUniform(ThetaArgs),
    /// Probability that the derivative direction falls in an arc.
    ArcProb(ArcArgs),
    /// Conditional law of theta(t2) given theta(t1) = x1.
    Markov(MarkovArgs),
}

#[derive(Clone, Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "uniform-angle")]
    pub schedule: String,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ThetaArgs {
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub t: f64,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ArcArgs {
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub t: f64,
    /// Arc `lo,hi` in radians relative to the base direction, inside [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    pub arc: Pair,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub base_angle: f64,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Clone, Debug, Args)]
pub struct MarkovArgs {
    #[arg(long)]
    pub t1: f64,
    #[arg(long)]
    pub t2: f64,
    /// Conditioning value; an odd multiple of `2^-depth` in (-1, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub x1: f64,
    #[command(flatten)]
    pub mc: MonteCarloArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write the regenerated outputs under this prefix.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn read(path: &Path) -> crate::error::Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Claim,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Files produced by a command, held in memory until written.
struct Run {
    command: &'static str,
    parameters: serde_json::Value,
    seed: u64,
    prefix: PathBuf,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    summary: Vec<String>,
}

impl Run {
    fn manifest(&self) -> RunManifest {
        RunManifest {
            command: self.command.into(),
            parameters: self.parameters.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: self
                .outputs
                .iter()
                .map(|(p, bytes)| OutputDigest {
                    path: p.clone(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn manifest_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".manifest.json")
}

/// Samples the curve described by `c`, filling in the seed, schedule and
/// depth it ends up using.
fn sample_curve(c: &mut CurveArgs) -> CliResult<IsometricPath> {
    let a: PlaneVec =
        c.a.ok_or_else(|| Failure::Usage("--a is required".into()))?
            .into();
    let seed = *c.seed.get_or_insert_with(rand::random);
    let res = match (c.eps, c.depth) {
        (Some(eps), _) => Resolution::Tolerance(eps),
        (None, Some(n)) => Resolution::Depth(n),
        (None, None) => Resolution::Depth(*c.depth.insert(DEFAULT_DEPTH)),
    };
    if c.closed {
        let desc = c
            .schedule
            .get_or_insert_with(|| format!("geometric:0:{DEFAULT_RATIO}"));
        let sch = RadiusSchedule::from_descriptor(desc)?;
        return Ok(sample_closed(a, &sch, res, seed, c.base_angle)?);
    }
    let b: PlaneVec =
        c.b.ok_or_else(|| Failure::Usage("--b is required unless --closed is given".into()))?
            .into();
    let len = (b - a).norm();
    if !(len < 1.0) {
        return Err(Error::NotStrictlyShort(len).into());
    }
    let desc = c
        .schedule
        .get_or_insert_with(|| format!("geometric:{}:{DEFAULT_RATIO}", len * len));
    let sch = RadiusSchedule::from_descriptor(desc)?;
    Ok(sample_open(a, b, &sch, res, seed)?)
}

fn curve_summary(path: &IsometricPath, seed: u64) -> Vec<String> {
    vec![
        format!("seed: {seed}"),
        format!("depth: {}", path.depth()),
        format!("vertices: {}", path.vertices().len()),
        format!("endpoint_defect: {}", fmt_f64(path.endpoint_defect())),
        format!("sup_error: {}", fmt_f64(path.sup_error())),
    ]
}

fn build_sample(mut args: SampleArgs) -> CliResult<Run> {
    let path = sample_curve(&mut args.curve)?;
    let seed = args.curve.seed.expect("filled by sample_curve");
    let mut outputs = Vec::new();
    if matches!(args.format, Format::Csv | Format::Both) {
        let csv = polyline_csv(&path.params(), path.vertices());
        outputs.push((with_suffix(&args.out, ".csv"), csv.into_bytes()));
    }
    if matches!(args.format, Format::Svg | Format::Both) {
        let svg = polyline_svg(path.vertices());
        outputs.push((with_suffix(&args.out, ".svg"), svg.into_bytes()));
    }
    Ok(Run {
        command: "sample",
        parameters: serde_json::to_value(&args)?,
        seed,
        prefix: args.out.clone(),
        outputs,
        summary: curve_summary(&path, seed),
    })
}

fn build_reparam(mut args: ReparamArgs) -> CliResult<Run> {
    let profile = match (&args.g_profile, args.g_const) {
        (Some(file), _) => SpeedProfile::from_csv(file)?,
        (None, Some(v)) => {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("g must be positive, got {v}")).into());
            }
            let d = *args.domain.get_or_insert(Pair(0.0, 1.0));
            SpeedProfile::constant(d.0, d.1, v)?
        }
        (None, None) => {
            return Err(Failure::Usage(
                "--g-profile or --g-const is required".into(),
            ))
        }
    };
    let mut summary = Vec::new();
    let (params, points, closed) = match &args.path {
        Some(file) => {
            let (t, p) = read_polyline_csv(file)?;
            let closed = p.len() > 1 && p[0] == p[p.len() - 1];
            (t, p, closed)
        }
        None => {
            let path = sample_curve(&mut args.curve)?;
            let seed = args.curve.seed.expect("filled by sample_curve");
            summary.extend(curve_summary(&path, seed));
            (path.params(), path.vertices().to_vec(), args.curve.closed)
        }
    };
    let moved = transport_polyline(&profile, &params, &points)?;
    let report = moved.speed_check_grid(args.probes);
    let mut json = serde_json::json!({
        "probes": report.probes,
        "max_abs_deviation": report.max_abs_deviation,
        "max_speed": report.max_speed,
        "relative_deviation": report.relative(),
        "length": profile.total(),
    });
    summary.push(format!(
        "relative_speed_deviation: {}",
        fmt_f64(report.relative())
    ));
    if closed {
        json["closure_defect"] = moved.closure_defect().into();
        summary.push(format!(
            "closure_defect: {}",
            fmt_f64(moved.closure_defect())
        ));
    }
    let outputs = vec![
        (
            with_suffix(&args.out, ".csv"),
            polyline_csv(moved.params(), moved.points()).into_bytes(),
        ),
        (
            with_suffix(&args.out, ".speed.json"),
            (serde_json::to_string_pretty(&json)? + "\n").into_bytes(),
        ),
    ];
    Ok(Run {
        command: "reparam",
        seed: args.curve.seed.unwrap_or(0),
        parameters: serde_json::to_value(&args)?,
        prefix: args.out.clone(),
        outputs,
        summary,
    })
}

fn write_run(run: &Run) -> CliResult<()> {
    for (path, bytes) in &run.outputs {
        fs::write(path, bytes)?;
    }
    let manifest = serde_json::to_string_pretty(&run.manifest())? + "\n";
    let mpath = manifest_path(&run.prefix);
    fs::write(&mpath, manifest)?;
    for line in &run.summary {
        println!("{line}");
    }
    for (path, _) in &run.outputs {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", mpath.display());
    Ok(())
}

fn emit_report(report: &ClaimReport, file: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    if let Some(f) = file {
        fs::write(f, &text)?;
    }
    print!("{text}");
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Claim)
    }
}

fn validate(cmd: ValidateCommand) -> CliResult<()> {
    match cmd {
        ValidateCommand::ThetaUniform(a) => {
            let sch = RadiusSchedule::from_descriptor(&a.mc.schedule)?;
            let seed = a.mc.seed.unwrap_or_else(rand::random);
            let chk = stats::theta_uniformity(a.t, a.mc.samples, a.mc.depth, seed, &sch)?;
            emit_report(&chk.report(seed), a.mc.report.as_deref())
        }
        ValidateCommand::ArcProb(a) => {
            let sch = RadiusSchedule::from_descriptor(&a.mc.schedule)?;
            let seed = a.mc.seed.unwrap_or_else(rand::random);
            let chk = stats::derivative_arc_probability(
                a.t,
                (a.arc.0, a.arc.1),
                a.mc.samples,
                a.mc.depth,
                seed,
                &sch,
                a.base_angle,
            )?;
            emit_report(&chk.report(a.mc.depth, seed), a.mc.report.as_deref())
        }
        ValidateCommand::Markov(a) => {
            let sch = RadiusSchedule::from_descriptor(&a.mc.schedule)?;
            let seed = a.mc.seed.unwrap_or_else(rand::random);
            let spec = ConditionalSpec::new(a.t1, a.t2, a.x1, a.mc.depth)?;
            let chk = stats::markov_conditional_check(&spec, a.mc.samples, seed, &sch)?;
            emit_report(&chk.report(seed), a.mc.report.as_deref())
        }
    }
}

fn replay(args: ReplayArgs) -> CliResult<()> {
    let manifest = RunManifest::read(&args.manifest)?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut params = manifest.parameters.clone();
    if let Some(out) = &args.out {
        params["out"] = serde_json::to_value(out)?;
    }
    let run = match manifest.command.as_str() {
        "sample" => build_sample(serde_json::from_value(params)?)?,
        "reparam" => build_reparam(serde_json::from_value(params)?)?,
        other => {
            return Err(Failure::Usage(format!(
                "unknown manifest command {other:?}"
            )))
        }
    };
    if run.outputs.len() != manifest.outputs.len() {
        return Err(Failure::Usage(
            "manifest and replay produce different outputs".into(),
        ));
    }
    let mut all_match = true;
    for ((path, bytes), recorded) in run.outputs.iter().zip(&manifest.outputs) {
        let digest = sha256_hex(bytes);
        let ok = digest == recorded.sha256;
        all_match &= ok;
        println!(
            "{} {} {}",
            if ok { "match" } else { "MISMATCH" },
            recorded.path.display(),
            digest
        );
        if args.out.is_some() {
            fs::write(path, bytes)?;
        }
    }
    if all_match {
        Ok(())
    } else {
        Err(Failure::Claim)
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample(args) => write_run(&build_sample(args)?),
        Command::Reparam(args) => write_run(&build_reparam(args)?),
        Command::Validate(cmd) => validate(cmd),
        Command::Replay(args) => replay(args),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Claim) => ExitCode::from(EXIT_CLAIM_FAILED),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
