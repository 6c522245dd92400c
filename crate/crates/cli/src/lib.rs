//! Command-line driver for the cylinder-model experiments.
//!
//! Each subcommand writes a CSV table, a JSON report and a run manifest into
//! the output directory (and optionally an SVG plot). Data files depend only
//! on the resolved configuration; wall-clock time lives in the manifest.

pub mod config;
pub mod csv;
pub mod svg;

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cylsim::experiments::{
    run_bipartite_scan, run_chsh, run_ghz_suite, run_pbwz, BsmAcceptance, ChshConfig,
    ExperimentReport, PbwzConfig, ScanConfig, ScanReport,
};
use cylsim::stats::{sine_fit, EfficiencyEstimate};
use cylsim::{predicted_efficiencies, ParticleKind, SourceKind};

use crate::svg::{emit_svg, Series, SeriesPoint};

/// Invalid flags or configuration; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Clauser's two-setting bound on conditional efficiency, `2 (sqrt 2 - 1)`.
pub const CLAUSER_BOUND: f64 = 2.0 * (std::f64::consts::SQRT_2 - 1.0);

#[derive(Debug, Parser)]
#[command(name = "cylsim", version, about = "Cylinder-model coincidence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-detector correlation scan over relative angle.
    Bipartite(BipartiteArgs),
    /// CHSH statistic from four fixed analyzer settings.
    Chsh(ChshArgs),
    /// Four-piece entanglement-swapping fringes.
    Swap(SwapArgs),
    /// GHZ selection rules with a duplicated polarizing beam splitter.
    Ghz(GhzArgs),
    /// Singles, doubles and conditional efficiency against the closed forms.
    Efficiency(BipartiteArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Base seed for every random stream.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// key=value file with defaults for any flag.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Photon,
    Electron,
}

impl From<KindArg> for ParticleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Photon => ParticleKind::PHOTON,
            KindArg::Electron => ParticleKind::ELECTRON,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Antiparallel,
    Orthogonal,
}

impl From<SourceArg> for SourceKind {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Antiparallel => SourceKind::AntiparallelSinglet,
            SourceArg::Orthogonal => SourceKind::OrthogonalPdc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BsmArg {
    Opposite,
    Same,
    Off,
}

impl From<BsmArg> for BsmAcceptance {
    fn from(b: BsmArg) -> Self {
        match b {
            BsmArg::Opposite => BsmAcceptance::Opposite,
            BsmArg::Same => BsmAcceptance::Same,
            BsmArg::Off => BsmAcceptance::Off,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct BipartiteArgs {
    #[arg(long, value_enum, default_value = "photon")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "antiparallel")]
    pub source: SourceArg,
    /// Pairs per angle.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Angle count (spread over one correlation period) or comma-separated
    /// list of degrees.
    #[arg(long, default_value = "25")]
    pub angles: String,
    /// Also write an SVG plot of the correlation curve.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct ChshArgs {
    #[arg(long, value_enum, default_value = "photon")]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value = "antiparallel")]
    pub source: SourceArg,
    /// Pairs per setting.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// a, a', b, b' in degrees.
    #[arg(long, default_value = "0,45,22.5,67.5")]
    pub angles: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SwapArgs {
    /// Groups of four pieces per angle and repetition.
    #[arg(long, default_value_t = 1800)]
    pub groups: u64,
    /// Repetitions per angle.
    #[arg(long, default_value_t = 64)]
    pub reps: u64,
    /// Detector-4 angle count over [0, 180] or comma-separated degrees.
    #[arg(long, default_value = "13")]
    pub angles: String,
    /// Station-1 analyzer angle, degrees.
    #[arg(long, default_value_t = 22.5)]
    pub station1: f64,
    /// Central analyzer axis, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub bsm_axis: f64,
    /// Central-station acceptance rule.
    #[arg(long, value_enum, default_value = "opposite")]
    pub bsm: BsmArg,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct GhzArgs {
    /// Groups per polarizer setting.
    #[arg(long, default_value_t = 100_000)]
    pub groups: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Parses `n` (evenly spaced over `[0, span]`) or a comma-separated list of
/// degrees. Returns radians.
pub fn parse_angles(spec: &str, span: f64) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if !spec.contains(',') {
        if let Ok(n) = spec.parse::<usize>() {
            return match n {
                0 => Err(UsageError("angle count must be >= 1".into()).into()),
                1 => Ok(vec![0.0]),
                _ => Ok((0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()),
            };
        }
    }
    spec.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|d| d.is_finite())
                .map(f64::to_radians)
                .ok_or_else(|| UsageError(format!("bad angle `{s}`")).into())
        })
        .collect()
}

/// Everything in the manifest except timing.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestCore {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub core: ManifestCore,
    pub duration_secs: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// Human-readable summary for stdout.
    pub summary: String,
}

fn usage(e: cylsim::Error) -> anyhow::Error {
    match e {
        cylsim::Error::InvalidConfig(msg) => UsageError(msg).into(),
        other => anyhow::Error::new(other),
    }
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }
}

/// Parses `args` (including the program name), applies any config file and
/// runs the subcommand.
pub fn run_from_args<I, S>(args: I) -> Result<RunOutcome>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = config::expand(args.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(args)?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<RunOutcome> {
    let threads = match &cli.command {
        Command::Bipartite(a) | Command::Efficiency(a) => a.common.threads,
        Command::Chsh(a) => a.common.threads,
        Command::Swap(a) => a.common.threads,
        Command::Ghz(a) => a.common.threads,
    };
    if threads == Some(0) {
        return Err(UsageError("--threads must be >= 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("building worker pool")?;
    let started = Instant::now();
    let (core, summary) = pool.install(|| match &cli.command {
        Command::Bipartite(a) => cmd_bipartite(a),
        Command::Chsh(a) => cmd_chsh(a),
        Command::Swap(a) => cmd_swap(a),
        Command::Ghz(a) => cmd_ghz(a),
        Command::Efficiency(a) => cmd_efficiency(a),
    })?;
    let manifest = RunManifest {
        core,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let dir = match &cli.command {
        Command::Bipartite(a) | Command::Efficiency(a) => &a.common.out,
        Command::Chsh(a) => &a.common.out,
        Command::Swap(a) => &a.common.out,
        Command::Ghz(a) => &a.common.out,
    };
    let path = dir.join(format!("{}_manifest.json", manifest.core.subcommand));
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(RunOutcome { manifest, summary })
}

fn finish<T: Serialize>(
    name: &str,
    args: &T,
    seed: u64,
    report: ExperimentReport,
    mut outputs: Outputs,
) -> Result<ManifestCore> {
    let report_path = outputs.path(&format!("{name}_report.json"));
    let mut listed: Vec<String> = outputs
        .written
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    listed.push(report_path.display().to_string());
    listed.push(outputs.path(&format!("{name}_manifest.json")).display().to_string());
    let core = ManifestCore {
        subcommand: name.to_string(),
        config: serde_json::to_value(args)?,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: listed,
    };
    #[derive(Serialize)]
    struct ReportFile<'a> {
        report: &'a ExperimentReport,
        manifest: &'a ManifestCore,
    }
    let body = serde_json::to_string_pretty(&ReportFile {
        report: &report,
        manifest: &core,
    })?;
    outputs.write(report_path, &(body + "\n"))?;
    Ok(core)
}

fn scan_config(a: &BipartiteArgs) -> Result<ScanConfig> {
    let kind: ParticleKind = a.kind.into();
    Ok(ScanConfig {
        kind,
        source: a.source.into(),
        angles: parse_angles(&a.angles, TAU / kind.n() as f64)?,
        trials: a.trials,
        seed: a.common.seed,
    })
}

fn scan_svg(report: &ScanReport) -> Result<String> {
    let k = report.config.kind.n() as f64;
    let pts: Vec<(f64, f64)> = report.points.iter().map(|p| (p.delta, p.q.value)).collect();
    let series = Series {
        label: format!("{} Q", report.config.kind),
        points: report
            .points
            .iter()
            .map(|p| SeriesPoint {
                x: p.delta,
                y: p.q.value,
                err: p.q.std_err,
            })
            .collect(),
        fit: sine_fit(&pts, k).ok(),
        hollow: false,
    };
    emit_svg("Coincidence correlation", "relative angle (rad)", &[series])
}

pub fn cmd_bipartite(a: &BipartiteArgs) -> Result<(ManifestCore, String)> {
    let cfg = scan_config(a)?;
    let report = run_bipartite_scan(&cfg).map_err(usage)?;
    let mut out = Outputs::new(&a.common.out)?;
    out.write(out.path("bipartite.csv"), &csv::bipartite(&report))?;
    if let Some(path) = &a.svg {
        out.write(path.clone(), &scan_svg(&report)?)?;
    }
    let worst = report
        .points
        .iter()
        .map(|p| (p.q.value - p.q_oracle).abs())
        .fold(0.0, f64::max);
    let summary = format!(
        "bipartite: {} angles x {} pairs, max |Q - oracle| = {worst:.5}\n",
        report.points.len(),
        cfg.trials
    );
    let core = finish("bipartite", a, a.common.seed, ExperimentReport::Bipartite(report), out)?;
    Ok((core, summary))
}

pub fn cmd_chsh(a: &ChshArgs) -> Result<(ManifestCore, String)> {
    let angles = parse_angles(&a.angles, PI)?;
    let angles: [f64; 4] = angles
        .try_into()
        .map_err(|_| UsageError("chsh needs exactly four angles: a,a',b,b'".into()))?;
    let cfg = ChshConfig {
        kind: a.kind.into(),
        source: a.source.into(),
        angles,
        trials: a.trials,
        seed: a.common.seed,
    };
    let report = run_chsh(&cfg).map_err(usage)?;
    let mut out = Outputs::new(&a.common.out)?;
    out.write(out.path("chsh.csv"), &csv::chsh(&report))?;
    let summary = format!(
        "chsh: S = {:.4} +- {:.4} (model {:.4}, local lossless bound 2)\n",
        report.statistic.value, report.statistic.std_err, report.oracle
    );
    let core = finish("chsh", a, a.common.seed, ExperimentReport::Chsh(report), out)?;
    Ok((core, summary))
}

pub fn cmd_swap(a: &SwapArgs) -> Result<(ManifestCore, String)> {
    let cfg = PbwzConfig {
        groups: a.groups,
        repetitions: a.reps,
        detector4_angles: parse_angles(&a.angles, PI)?,
        station1_angle: a.station1.to_radians(),
        bsm_axis: a.bsm_axis.to_radians(),
        acceptance: a.bsm.into(),
        seed: a.common.seed,
    };
    let report = run_pbwz(&cfg).map_err(usage)?;
    let mut out = Outputs::new(&a.common.out)?;
    out.write(out.path("swap.csv"), &csv::swap(&report))?;
    if let Some(path) = &a.svg {
        let series = |label: &str, plus: bool| Series {
            label: label.to_string(),
            points: report
                .points
                .iter()
                .map(|p| SeriesPoint {
                    x: p.theta.to_degrees(),
                    y: if plus { p.plus_mean } else { p.minus_mean },
                    err: if plus { p.plus_sd } else { p.minus_sd },
                })
                .collect(),
            fit: Some(degree_fit(if plus { &report.plus_fit } else { &report.minus_fit })),
            hollow: plus,
        };
        let svg = emit_svg(
            "Fourfold coincidences",
            "detector 4 angle (deg)",
            &[series("D1- D4", false), series("D1+ D4", true)],
        )?;
        out.write(path.clone(), &svg)?;
    }
    let summary = format!(
        "swap: visibility D1+D4 = {:.4}, D1-D4 = {:.4}, mean = {:.4} (model {:.4})\n",
        report.plus_visibility.visibility,
        report.minus_visibility.visibility,
        report.visibility,
        report.oracle_visibility
    );
    let core = finish("swap", a, a.common.seed, ExperimentReport::Pbwz(report), out)?;
    Ok((core, summary))
}

/// Same curve with the abscissa in degrees.
fn degree_fit(fit: &cylsim::SineFit) -> cylsim::SineFit {
    cylsim::SineFit {
        frequency: fit.frequency.to_radians(),
        ..*fit
    }
}

pub fn cmd_ghz(a: &GhzArgs) -> Result<(ManifestCore, String)> {
    let report = run_ghz_suite(a.groups, a.common.seed).map_err(usage)?;
    let mut out = Outputs::new(&a.common.out)?;
    out.write(out.path("ghz.csv"), &csv::ghz(&report))?;
    let mut summary = String::from("ghz: fourfold counts\n");
    for r in report.hv_table.iter().chain(report.diagonal.iter()) {
        writeln!(summary, "  {:<18} {:>8}", r.label, r.fourfold)?;
    }
    match report.visibility {
        Some(v) => writeln!(summary, "  visibility (+45 diagonal) = {:.4}", v.visibility)?,
        None => writeln!(summary, "  visibility undefined (no diagonal counts)")?,
    }
    let core = finish("ghz", a, a.common.seed, ExperimentReport::Ghz(report), out)?;
    Ok((core, summary))
}

/// Text table of estimated vs closed-form efficiencies with the two
/// reference lines.
pub fn efficiency_table(est: &EfficiencyEstimate) -> String {
    let oracle = predicted_efficiencies();
    let mut t = String::new();
    let _ = writeln!(t, "{:<16} {:>10} {:>10} {:>10}", "quantity", "estimate", "std_err", "oracle");
    for (name, e, o) in [
        ("singles S", est.singles, oracle.singles),
        ("doubles D", est.doubles, oracle.doubles),
        ("conditional C", est.conditional, oracle.conditional),
    ] {
        let _ = writeln!(t, "{name:<16} {:>10.5} {:>10.5} {:>10.5}", e.value, e.std_err, o);
    }
    let _ = writeln!(t, "reference: Clauser bound C = {CLAUSER_BOUND:.3}");
    let _ = writeln!(t, "reference: cylinder     C = {:.3}", oracle.conditional);
    t
}

pub fn cmd_efficiency(a: &BipartiteArgs) -> Result<(ManifestCore, String)> {
    let cfg = scan_config(a)?;
    let report = run_bipartite_scan(&cfg).map_err(usage)?;
    let est = report.pooled_efficiency;
    let oracle = predicted_efficiencies();
    let mut table = String::from("quantity,estimate,std_err,oracle\n");
    for (name, e, o) in [
        ("singles", est.singles, oracle.singles),
        ("doubles", est.doubles, oracle.doubles),
        ("conditional", est.conditional, oracle.conditional),
    ] {
        writeln!(table, "{name},{},{},{}", csv::num(e.value), csv::num(e.std_err), csv::num(o))?;
    }
    writeln!(table, "clauser_bound,,,{}", csv::num(CLAUSER_BOUND))?;
    let mut out = Outputs::new(&a.common.out)?;
    out.write(out.path("efficiency.csv"), &table)?;
    if let Some(path) = &a.svg {
        out.write(path.clone(), &scan_svg(&report)?)?;
    }
    let summary = efficiency_table(&est);
    let core = finish("efficiency", a, a.common.seed, ExperimentReport::Bipartite(report), out)?;
    Ok((core, summary))
}

/// Exit code for an error returned by [`run_from_args`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(e) = err.downcast_ref::<clap::Error>() {
        return if e.use_stderr() { EXIT_USAGE } else { 0 };
    }
    EXIT_RUNTIME
}
