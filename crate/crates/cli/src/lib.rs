//! Experiment runner: loads or generates instances, runs them, writes
//! `trace.csv`, `report.json` and `summary.txt`.

pub mod suite;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ocokit::experiment::{run_oco, OcoRegime};
use ocokit::jeo::{self, Estimator, JeoInstance, StreamSpec};
use ocokit::regret::Regime;
use ocokit::robust::{self, FamilyParams, FeasibilityConfig, Outcome, Planted, RobustInstance, Scheme};
use ocokit::schedule::WeightKind;
use ocokit::streams::{self, OcoInstance};
use ocokit::OfflineOracle;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ocokit", version, about = "Weighted-regret online convex optimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Online convex optimization on a loss or game stream.
    #[command(subcommand)]
    Oco(OcoCommand),
    /// Robust feasibility.
    #[command(subcommand)]
    Ro(RoCommand),
    /// Joint estimation-optimization.
    #[command(subcommand)]
    Jeo(JeoCommand),
    /// Run the invariant suite and print its trace hash.
    Verify(VerifyArgs),
    /// Write a generated instance file.
    Generate(GenerateArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum OcoCommand {
    Run(OcoRunArgs),
    /// Runs T0, 2T0, 4T0, ... and writes rate_table.csv.
    Rates(OcoRatesArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum RoCommand {
    Solve(RoSolveArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum JeoCommand {
    Run(JeoRunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Seed for generated instances (algorithms are deterministic).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default: $OCOKIT_OUT, else ./ocokit-out).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsArg {
    Uniform,
    Increasing,
}

#[derive(Debug, Args, Serialize)]
pub struct OcoRunArgs {
    /// nonsmooth | strongly-convex | smooth | saddle-nonsmooth | saddle-smooth
    #[arg(long, value_parser = parse_regime)]
    pub regime: OcoRegime,
    /// Horizon.
    #[arg(long = "T", alias = "horizon")]
    pub horizon: usize,
    /// Instance file; a seeded instance matching the regime is generated when absent.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub weights: Option<WeightsArg>,
    /// Also write iterates.csv.
    #[arg(long)]
    pub dump_iterates: bool,
    /// Fail (exit 1) when the realized value exceeds the bound.
    #[arg(long)]
    pub bound_check: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct OcoRatesArgs {
    /// nonsmooth | strongly-convex | smooth | saddle-nonsmooth | saddle-smooth
    #[arg(long, value_parser = parse_regime)]
    pub regime: OcoRegime,
    #[arg(long = "T0", default_value_t = 64)]
    pub t0: usize,
    /// Number of horizons (T0 · 2^k, k < levels); at least 3.
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantedArg {
    Feasible,
    Infeasible,
}

#[derive(Debug, Args, Serialize)]
pub struct RoSolveArgs {
    /// Instance file; use --planted to generate one instead.
    #[arg(long, conflicts_with = "planted")]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub planted: Option<PlantedArg>,
    /// strong-strong | strongU-smoothX | smoothU-strongX | baseline-nonsmooth
    #[arg(long, value_parser = parse_scheme, default_value = "strong-strong")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Fixed horizon; chosen from the bounds when absent.
    #[arg(long, alias = "T")]
    pub horizon: Option<usize>,
    /// Do not rerun with 2T on an inconclusive verdict.
    #[arg(long)]
    pub no_doubling: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamArg {
    FromG,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JeoFamily {
    Squared,
    L1,
    MaxAffine,
}

#[derive(Debug, Args, Serialize)]
pub struct JeoRunArgs {
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,
    /// Generate an instance of this family instead of reading one.
    #[arg(long, value_enum)]
    pub family: Option<JeoFamily>,
    /// nonsmooth | strongly-convex | smooth
    #[arg(long, value_parser = parse_jeo_regime)]
    pub regime: Regime,
    #[arg(long, alias = "T")]
    pub horizon: usize,
    #[arg(long, value_enum, default_value = "from-g")]
    pub stream: StreamArg,
    /// Stream specification (JSON) for --stream file.
    #[arg(long)]
    pub stream_file: Option<PathBuf>,
    /// Condition number of g for --stream from-g.
    #[arg(long, default_value_t = 10.0)]
    pub kappa: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateKind {
    OcoNonsmooth,
    OcoStronglyConvex,
    OcoSmooth,
    OcoGames,
    RoFeasible,
    RoInfeasible,
    JeoSquared,
    JeoL1,
    JeoMaxAffine,
    StreamFromG,
}

impl GenerateKind {
    pub const ALL: [GenerateKind; 10] = [
        GenerateKind::OcoNonsmooth,
        GenerateKind::OcoStronglyConvex,
        GenerateKind::OcoSmooth,
        GenerateKind::OcoGames,
        GenerateKind::RoFeasible,
        GenerateKind::RoInfeasible,
        GenerateKind::JeoSquared,
        GenerateKind::JeoL1,
        GenerateKind::JeoMaxAffine,
        GenerateKind::StreamFromG,
    ];
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stream length (OCO) or margin scale (robust uses 0.15).
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_regime(s: &str) -> Result<OcoRegime, String> {
    s.parse().map_err(|e: ocokit::Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: ocokit::Error| e.to_string())
}

fn parse_jeo_regime(s: &str) -> Result<Regime, String> {
    s.parse().map_err(|e: ocokit::Error| e.to_string())
}

/// Process exit status of a completed command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Inconclusive,
    Failed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
            Status::Failed => 1,
        }
    }
}

/// Reads a JSON file, reporting line, column and field path on failure.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_json(&text).with_context(|| format!("malformed instance file {}", path.display()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        // Errors raised inside tagged enums are reported after buffering and carry no position.
        if inner.line() == 0 {
            anyhow::anyhow!("at `{}`: {}", e.path(), inner)
        } else {
            let msg = inner.to_string();
            let suffix = format!(" at line {} column {}", inner.line(), inner.column());
            let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
            anyhow::anyhow!("line {}, column {}: at `{}`: {}", inner.line(), inner.column(), e.path(), msg)
        }
    })
}

pub fn out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os("OCOKIT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ocokit-out"))
}

fn config_hash(cmd: &Command) -> String {
    let json = serde_json::to_string(cmd).expect("config serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Artifacts { dir })
    }

    fn write(&self, name: &str, content: &str) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, content).with_context(|| format!("cannot write {}", p.display()))
    }

    fn report(&self, cmd: &Command, body: serde_json::Value) -> Result<()> {
        let mut v = serde_json::json!({
            "version": VERSION,
            "config_hash": config_hash(cmd),
            "config": cmd,
        });
        if let (Some(m), serde_json::Value::Object(b)) = (v.as_object_mut(), body) {
            m.extend(b);
        }
        self.write("report.json", &(serde_json::to_string_pretty(&v)? + "\n"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("--{name} must be positive, got {v}");
    }
    Ok(())
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        bail!("--{name} must be at least 1");
    }
    Ok(())
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded default instance for a regime.
pub fn default_oco_instance(regime: OcoRegime, seed: u64, count: usize) -> OcoInstance {
    let r = &mut seeded(seed);
    match regime {
        OcoRegime::Nonsmooth => streams::max_affine_simplex(r, 10, 5, count),
        OcoRegime::StronglyConvex => streams::strongly_convex_quadratics(r, 5, count, 1.0, 1.0),
        OcoRegime::Smooth => streams::smooth_quadratics(r, 5, count, 2.0, 1.0),
        OcoRegime::SaddleNonsmooth | OcoRegime::SaddleSmooth => streams::sign_games(r, 4, 5, count),
    }
}

pub fn run(cli: Cli) -> Result<Status> {
    let cmd = &cli.command;
    match cmd {
        Command::Oco(OcoCommand::Run(a)) => oco_run(cmd, a),
        Command::Oco(OcoCommand::Rates(a)) => oco_rates(cmd, a),
        Command::Ro(RoCommand::Solve(a)) => ro_solve(cmd, a),
        Command::Jeo(JeoCommand::Run(a)) => jeo_run(cmd, a),
        Command::Verify(a) => verify(cmd, a),
        Command::Generate(a) => generate(a),
    }
}

fn oco_instance(path: &Option<PathBuf>, regime: OcoRegime, seed: u64, count: usize) -> Result<OcoInstance> {
    let inst = match path {
        Some(p) => load_json(p)?,
        None => default_oco_instance(regime, seed, count),
    };
    inst.validate()?;
    Ok(inst)
}

fn weight_kind(w: Option<WeightsArg>) -> Option<WeightKind> {
    w.map(|w| match w {
        WeightsArg::Uniform => WeightKind::Uniform,
        WeightsArg::Increasing => WeightKind::Increasing,
    })
}

fn oco_run(cmd: &Command, a: &OcoRunArgs) -> Result<Status> {
    nonzero("T", a.horizon)?;
    let inst = oco_instance(&a.instance, a.regime, a.common.seed, a.horizon)?;
    let run = run_oco(&inst, a.regime, a.horizon, weight_kind(a.weights), &OfflineOracle::default())?;
    let art = Artifacts::new(out_dir(&a.common))?;
    art.write("trace.csv", &run.trace.to_csv())?;
    if a.dump_iterates {
        art.write("iterates.csv", &run.trace.iterates_csv())?;
    }
    let within = run.within_bound(1e-6);
    art.report(
        cmd,
        serde_json::json!({
            "regime": a.regime,
            "horizon": a.horizon,
            "regret": run.report.summary_json(),
            "realized": run.report.realized,
            "bound": run.bound(),
            "oracle_gap": run.report.oracle_gap,
            "components": run.report.components,
            "max_step_residual": run.trace.max_residual(),
            "max_cancellation": run.trace.max_cancellation(),
            "within_bound": within,
        }),
    )?;
    let mut s = String::new();
    let _ = writeln!(s, "regime      {}", a.regime);
    let _ = writeln!(s, "horizon     {}", a.horizon);
    let _ = writeln!(s, "realized    {:.6e}", run.report.realized);
    let _ = writeln!(s, "bound       {:.6e}", run.bound());
    let _ = writeln!(s, "within      {within}");
    let _ = writeln!(s, "residual    {:.3e}", run.trace.max_residual());
    art.write("summary.txt", &s)?;
    print!("{s}");
    if a.bound_check && !within {
        bail!("realized {:.6e} exceeds the bound {:.6e}", run.report.realized, run.bound());
    }
    Ok(Status::Ok)
}

fn oco_rates(cmd: &Command, a: &OcoRatesArgs) -> Result<Status> {
    nonzero("T0", a.t0)?;
    if a.levels < 3 {
        bail!("--levels must be at least 3");
    }
    let horizons: Vec<usize> = (0..a.levels).map(|k| a.t0 << k).collect();
    let inst = oco_instance(&a.instance, a.regime, a.common.seed, *horizons.last().unwrap())?;
    let root = out_dir(&a.common);
    let art = Artifacts::new(root.clone())?;
    // Independent horizons run concurrently, each writing its own directory.
    let results: Vec<Result<(f64, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = horizons
            .iter()
            .map(|&t| {
                let (inst, root) = (&inst, &root);
                s.spawn(move || -> Result<(f64, f64)> {
                    let run = run_oco(inst, a.regime, t, None, &OfflineOracle::default())?;
                    let sub = Artifacts::new(root.join(format!("T{t}")))?;
                    sub.write("trace.csv", &run.trace.to_csv())?;
                    Ok((run.report.realized, run.bound()))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("rate worker panicked")).collect()
    });
    let mut table = String::from("T,realized,bound,ratio_to_prev\n");
    let mut rows = Vec::new();
    let mut prev: Option<f64> = None;
    for (t, r) in horizons.iter().zip(results) {
        let (realized, bound) = r?;
        let ratio = prev.map(|p| realized / p);
        let _ = writeln!(table, "{t},{realized:.12e},{bound:.12e},{}", ratio.map(|q| format!("{q:.6}")).unwrap_or_default());
        rows.push(serde_json::json!({"T": t, "realized": realized, "bound": bound, "ratio_to_prev": ratio}));
        prev = Some(realized);
    }
    art.write("rate_table.csv", &table)?;
    art.write("trace.csv", &table)?;
    art.report(cmd, serde_json::json!({ "regime": a.regime, "rates": rows }))?;
    art.write("summary.txt", &table)?;
    print!("{table}");
    Ok(Status::Ok)
}

fn ro_solve(cmd: &Command, a: &RoSolveArgs) -> Result<Status> {
    positive("eps", a.eps)?;
    if !(a.tau > 0.0 && a.tau < 1.0) {
        bail!("--tau must lie in (0, 1), got {}", a.tau);
    }
    if let Some(t) = a.horizon {
        nonzero("horizon", t)?;
    }
    let inst: RobustInstance = match (&a.instance, a.planted) {
        (Some(p), _) => load_json(p)?,
        (None, Some(status)) => {
            let status = match status {
                PlantedArg::Feasible => Planted::Feasible,
                PlantedArg::Infeasible => Planted::Infeasible,
            };
            robust::planted_instance(&mut seeded(a.common.seed), &FamilyParams::default(), status, 1.5 * a.eps)?
        }
        (None, None) => bail!("ro solve needs --instance or --planted"),
    };
    inst.validate()?;
    let cfg = FeasibilityConfig {
        eps: a.eps,
        tau: a.tau,
        horizon: a.horizon,
        scheme: a.scheme,
        double_on_inconclusive: !a.no_doubling,
        ..Default::default()
    };
    let solve = robust::run_scheme(&inst, &cfg, &OfflineOracle::default())?;
    let run = &solve.run;
    let art = Artifacts::new(out_dir(&a.common))?;
    art.write("trace.csv", &run.x_trace.to_csv())?;
    art.report(cmd, serde_json::json!({ "feasibility": cfg, "solve": solve }))?;
    let v = &run.verdict;
    let mut s = String::new();
    let _ = writeln!(s, "scheme      {}", a.scheme);
    let _ = writeln!(s, "horizon     {} (attempts {:?})", run.horizon, solve.attempts);
    let _ = writeln!(s, "eps_circ    {:.6e} (bound {:.6e}, budget {:.6e})", v.eps_circ, run.bounds.circ, a.tau * a.eps);
    let _ = writeln!(s, "eps_bullet  {:.6e} (bound {:.6e}, budget {:.6e})", v.eps_bullet, run.bullet_bound(), (1.0 - a.tau) * a.eps);
    let _ = writeln!(s, "max_term    {:.6e}", v.max_term);
    let _ = writeln!(s, "verdict     {:?}", v.outcome);
    art.write("summary.txt", &s)?;
    print!("{s}");
    Ok(if v.outcome == Outcome::Inconclusive { Status::Inconclusive } else { Status::Ok })
}

fn jeo_instance(a: &JeoRunArgs) -> Result<JeoInstance> {
    let r = &mut seeded(a.common.seed);
    Ok(match (&a.instance, a.family) {
        (Some(p), _) => load_json(p)?,
        (None, Some(JeoFamily::Squared)) => jeo::squared_distance_instance(r, 5, 1.0, 1.0),
        (None, Some(JeoFamily::L1)) => jeo::l1_instance(r, 5, 1.0),
        (None, Some(JeoFamily::MaxAffine)) => jeo::max_affine_strong_instance(r, 5, 6, 0.5, 1.0),
        (None, None) => bail!("jeo run needs --instance or --family"),
    })
}

/// g(u) = ½ Σ h_i (u_i − u*_i)² with curvatures spread over [1, κ], started at the data domain's ω-center
/// shifted away from u*.
pub fn from_g_stream(inst: &JeoInstance, kappa: f64, seed: u64) -> Result<StreamSpec> {
    positive("kappa", kappa)?;
    if kappa < 1.0 {
        bail!("--kappa must be at least 1");
    }
    let center = inst.u_star.clone().context("--stream from-g needs u_star in the instance (the minimizer of g)")?;
    let n = center.len();
    let h = (0..n).map(|i| if n == 1 { 1.0 } else { 1.0 + (kappa - 1.0) * i as f64 / (n - 1) as f64 }).collect();
    let u0 = inst.data_domain().sample(&mut seeded(seed ^ 0x9e37));
    Ok(StreamSpec::FromG { h, center, u0, step: None })
}

fn jeo_run(cmd: &Command, a: &JeoRunArgs) -> Result<Status> {
    nonzero("horizon", a.horizon)?;
    let inst = jeo_instance(a)?;
    inst.validate()?;
    let spec = match a.stream {
        StreamArg::FromG => from_g_stream(&inst, a.kappa, a.common.seed)?,
        StreamArg::File => load_json(a.stream_file.as_deref().context("--stream file needs --stream-file")?)?,
    };
    let mut est = Estimator::new(spec)?;
    let run = jeo::run_jeo(&inst, &mut est, a.regime, a.horizon, &OfflineOracle::default())?;
    let art = Artifacts::new(out_dir(&a.common))?;
    art.write("trace.csv", &run.trace_csv())?;
    art.report(
        cmd,
        serde_json::json!({
            "regime": a.regime,
            "horizon": a.horizon,
            "x_bar": run.x_bar,
            "value": run.value,
            "regret": run.regret,
            "regret_bound": run.regret_bound,
            "decomposition": run.decomposition,
            "stream": est.spec(),
            "decay": est.decay()?,
            "max_step_residual": run.trace.max_residual(),
        }),
    )?;
    let mut s = String::new();
    let _ = writeln!(s, "regime      {}", a.regime);
    let _ = writeln!(s, "horizon     {}", a.horizon);
    let _ = writeln!(s, "f(x̄, u_T)   {:.6e}", run.value);
    let _ = writeln!(s, "regret      {:.6e} (bound {:.6e})", run.regret, run.regret_bound);
    if let Some(d) = &run.decomposition {
        let _ = writeln!(s, "gap         {:.6e}", d.gap);
        let _ = writeln!(s, "penalties   eval {:.6e}, data {:.6e}", d.eval_penalty, d.data_penalty);
        let _ = writeln!(s, "slack       {:.6e}", d.slack);
    }
    art.write("summary.txt", &s)?;
    print!("{s}");
    Ok(Status::Ok)
}

fn verify(cmd: &Command, a: &VerifyArgs) -> Result<Status> {
    let report = suite::run_suite(a.common.seed, |c| {
        println!("[{}] {:>2} {} ({:.1}s): {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.seconds, c.detail);
    });
    println!("trace hash {}", report.trace_hash);
    let art = Artifacts::new(out_dir(&a.common))?;
    // Timings stay out of trace.csv so reruns are byte-identical.
    let mut csv = String::from("id,name,pass\n");
    for c in &report.checks {
        let _ = writeln!(csv, "{},{},{}", c.id, c.name, c.pass);
    }
    art.write("trace.csv", &csv)?;
    art.report(cmd, serde_json::json!({ "suite": report }))?;
    let passed = report.checks.iter().filter(|c| c.pass).count();
    art.write("summary.txt", &format!("{passed}/{} checks passed\ntrace hash {}\n", report.checks.len(), report.trace_hash))?;
    Ok(if report.all_pass() { Status::Ok } else { Status::Failed })
}

pub fn generate(a: &GenerateArgs) -> Result<Status> {
    nonzero("count", a.count)?;
    let r = &mut seeded(a.seed);
    let json = match a.kind {
        GenerateKind::OcoNonsmooth => to_json(&default_oco_instance(OcoRegime::Nonsmooth, a.seed, a.count)),
        GenerateKind::OcoStronglyConvex => to_json(&default_oco_instance(OcoRegime::StronglyConvex, a.seed, a.count)),
        GenerateKind::OcoSmooth => to_json(&default_oco_instance(OcoRegime::Smooth, a.seed, a.count)),
        GenerateKind::OcoGames => to_json(&default_oco_instance(OcoRegime::SaddleSmooth, a.seed, a.count)),
        GenerateKind::RoFeasible => to_json(&robust::planted_instance(r, &FamilyParams::default(), Planted::Feasible, 0.15)?),
        GenerateKind::RoInfeasible => to_json(&robust::planted_instance(r, &FamilyParams::default(), Planted::Infeasible, 0.15)?),
        GenerateKind::JeoSquared => to_json(&jeo::squared_distance_instance(r, 5, 1.0, 1.0)),
        GenerateKind::JeoL1 => to_json(&jeo::l1_instance(r, 5, 1.0)),
        GenerateKind::JeoMaxAffine => to_json(&jeo::max_affine_strong_instance(r, 5, 6, 0.5, 1.0)),
        GenerateKind::StreamFromG => {
            let inst = jeo::squared_distance_instance(r, 5, 1.0, 1.0);
            to_json(&from_g_stream(&inst, 10.0, a.seed)?)
        }
    }?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&a.out, json + "\n").with_context(|| format!("cannot write {}", a.out.display()))?;
    Ok(Status::Ok)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}
