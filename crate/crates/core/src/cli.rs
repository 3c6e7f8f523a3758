//! Command-line front end: argument parsing, configuration merging, run
//! manifests and exit codes.
//!
//! Every command writes `manifest.json` into its output directory before
//! doing any real work and rewrites it with the exit code on completion.
//! Exit codes: 0 success, 1 an enabled check failed (see `violations.csv`),
//! 2 usage or I/O error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::curve::{self, ClosedCurve, CurveFile};
use crate::error::{Error, Result};
use crate::flow::{self, FlowConfig, FlowTrace, Preset, Termination};
use crate::fuzz::{self, Checks, CurveRecord, FuzzConfig};
use crate::io::{fmt_f64, write_csv, write_json};
use crate::shrinker;
use crate::spectral;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const VIOLATIONS_FILE: &str = "violations.csv";
pub const VIOLATION_COLUMNS: [&str; 6] = ["check", "id", "t", "value", "bound", "detail"];

/// Relative tolerance for the series forms of `D` and `K_osc`.
pub const SERIES_TOL: f64 = 1e-7;
/// Agreement required between the two series forms of `K_osc`.
pub const SERIES_FORMS_TOL: f64 = 1e-9;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_SNAPSHOTS: usize = 11;
const DEFAULT_BRACKET: (f64, f64) = (0.1, 10.0);

#[derive(Parser, Debug)]
#[command(name = "curvediff", version, about = "Spectral curve diffusion flow lab")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Output directory (each command has its own default).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 or unset uses one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "n-modes", global = true)]
    pub n_modes: Option<usize>,
    /// Suppress the summary printed on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// JSON object of flat settings, or a previous manifest.json; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve a curve and analyse flow traces.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Check the moment identities, series forms and inequalities on one curve.
    Identities(IdentitiesArgs),
    /// Sweep identities and inequalities over seeded random curves.
    Fuzz(FuzzArgs),
    /// Shrinker residuals, scale search and Type I diagnostics.
    #[command(subcommand)]
    Shrinker(ShrinkerCommand),
}

#[derive(Subcommand, Debug)]
pub enum FlowCommand {
    /// Run the flow and write trace.csv, run.json, audit.json and snapshots.
    Run(FlowRunArgs),
    /// Re-audit a run directory.
    Audit(TraceDirArgs),
    /// Fit decay slopes on a time window and compare with the rate bounds.
    Rates(RatesArgs),
}

#[derive(Args, Debug)]
pub struct FlowRunArgs {
    /// Curve JSON file or preset name (`preset:` prefix optional).
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long = "local-tol")]
    pub local_tol: Option<f64>,
    #[arg(long = "audit-every")]
    pub audit_every: Option<usize>,
    /// Curve snapshots spaced evenly in progress, plus the final state.
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Also fit decay slopes on `a,b` and store them in run.json.
    #[arg(long, value_parser = parse_pair)]
    pub window: Option<(f64, f64)>,
}

#[derive(Args, Debug)]
pub struct TraceDirArgs {
    pub dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    pub dir: PathBuf,
    #[arg(long, value_parser = parse_pair)]
    pub window: Option<(f64, f64)>,
}

#[derive(Args, Debug)]
pub struct IdentitiesArgs {
    #[arg(long, value_parser = parse_preset, conflicts_with = "curve")]
    pub preset: Option<Preset>,
    /// Curve JSON file; without it or `--preset` a random curve from `--seed`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// `all` or a comma-separated list of orders in 1..8.
    #[arg(long)]
    pub q: Option<String>,
    /// Largest accepted relative identity residual.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Curves per amplitude.
    #[arg(long)]
    pub n: Option<usize>,
    /// Inequalities to check: any of lower, holder, eqapp2; or all, none.
    #[arg(long)]
    pub check: Option<String>,
    /// Perturbation amplitudes; each gets its own block of seeds.
    #[arg(long, value_delimiter = ',')]
    pub amplitude: Vec<f64>,
    #[arg(long)]
    pub decay: Option<f64>,
    /// Skip the identity and series checks.
    #[arg(long = "no-identities")]
    pub no_identities: bool,
}

#[derive(Subcommand, Debug)]
pub enum ShrinkerCommand {
    /// Residual of the shrinker equation on a curve.
    Residual(ResidualArgs),
    /// Best uniform scaling of a curve as a shrinker.
    Search(SearchArgs),
    /// Type I blow-up diagnostic on a singular run.
    #[command(name = "typeI", alias = "type-i")]
    TypeI(TypeIArgs),
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    /// Curve JSON file or preset name.
    #[arg(long)]
    pub curve: Option<String>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long, value_parser = parse_preset, conflicts_with = "curve")]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, value_parser = parse_pair)]
    pub bracket: Option<(f64, f64)>,
    /// Fail when the best relative residual is not below this.
    #[arg(long = "max-residual")]
    pub max_residual: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TypeIArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Singular time; defaults to the run's extrapolated estimate.
    #[arg(long = "T")]
    pub t_final: Option<f64>,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.parse::<f64>().map_err(|e| format!("{a:?}: {e}"))?;
            let b = b.parse::<f64>().map_err(|e| format!("{b:?}: {e}"))?;
            Ok((a, b))
        }
        _ => Err(format!("expected `a,b`, got {s:?}")),
    }
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse::<Preset>().map_err(|e| e.to_string())
}

fn parse_orders(s: &str) -> Result<Vec<u32>> {
    if s.trim() == "all" {
        return Ok((spectral::MIN_Q..=spectral::MAX_Q).collect());
    }
    s.split(',')
        .map(|t| {
            let q: u32 = t
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad order {t:?}")))?;
            if !(spectral::MIN_Q..=spectral::MAX_Q).contains(&q) {
                return Err(Error::UnsupportedOrder {
                    order: q,
                    min: spectral::MIN_Q,
                    max: spectral::MAX_Q,
                });
            }
            Ok(q)
        })
        .collect()
}

/// A failed check, one row of `violations.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRow {
    pub check: String,
    pub id: String,
    pub t: Option<f64>,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl ViolationRow {
    fn new(check: impl Into<String>, id: impl ToString) -> Self {
        Self {
            check: check.into(),
            id: id.to_string(),
            t: None,
            value: None,
            bound: None,
            detail: String::new(),
        }
    }

    fn at(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    fn values(mut self, value: f64, bound: f64) -> Self {
        self.value = Some(value);
        self.bound = Some(bound);
        self
    }

    fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        vec![
            self.check.clone(),
            self.id.clone(),
            opt(self.t),
            opt(self.value),
            opt(self.bound),
            self.detail.clone(),
        ]
    }
}

/// Provenance written into every output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub command_line: Vec<String>,
    /// Effective settings; can be passed back through `--config`.
    pub config: Map<String, Value>,
    pub seeds: Vec<u64>,
    pub threads: usize,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
    pub started_unix_s: f64,
    pub wall_clock_s: Option<f64>,
    pub exit_code: Option<i32>,
}

struct OutputDir {
    dir: PathBuf,
    manifest: RunManifest,
    start: Instant,
}

impl OutputDir {
    fn create(dir: PathBuf, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        let stale = dir.join(VIOLATIONS_FILE);
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        Ok(Self {
            dir,
            manifest,
            start: Instant::now(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `violations.csv` if there are any and the final manifest.
    fn finish(mut self, violations: &[ViolationRow]) -> Result<i32> {
        let code = if violations.is_empty() {
            EXIT_OK
        } else {
            let rows: Vec<Vec<String>> = violations.iter().map(ViolationRow::record).collect();
            write_csv(&self.path(VIOLATIONS_FILE), &VIOLATION_COLUMNS, &rows)?;
            if !self.manifest.artifacts.iter().any(|a| a == VIOLATIONS_FILE) {
                self.manifest.artifacts.push(VIOLATIONS_FILE.into());
            }
            EXIT_VIOLATION
        };
        self.manifest.wall_clock_s = Some(self.start.elapsed().as_secs_f64());
        self.manifest.exit_code = Some(code);
        write_json(&self.dir.join(MANIFEST_FILE), &self.manifest)?;
        Ok(code)
    }
}

struct Ctx {
    argv: Vec<String>,
    global: GlobalArgs,
    file: Map<String, Value>,
    pool: rayon::ThreadPool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.global.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        match self.file.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::InvalidParameter(format!("config key {key:?}: {e}"))),
        }
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn seed(&self) -> Result<u64> {
        Ok(self.pick(self.global.seed, "seed")?.unwrap_or(DEFAULT_SEED))
    }

    fn out_dir(&self, default: PathBuf) -> PathBuf {
        self.global.out.clone().unwrap_or(default)
    }

    /// Settings from the file with `T`'s defaults for missing keys.
    fn typed<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.file.clone()))
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    fn open(&self, dir: PathBuf, command: &str, config: Value, seeds: Vec<u64>, artifacts: &[&str]) -> Result<OutputDir> {
        let config = match config {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            command_line: self.argv.clone(),
            config,
            seeds,
            threads: self.pool.current_num_threads(),
            artifacts: artifacts.iter().map(|s| s.to_string()).collect(),
            started_unix_s: started,
            wall_clock_s: None,
            exit_code: None,
        };
        OutputDir::create(dir, manifest)
    }
}

fn load_settings(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let Value::Object(mut map) = value else {
        return Err(Error::Format(format!("{} is not a JSON object", path.display())));
    };
    let is_manifest = map.get("tool").and_then(Value::as_str) == Some(env!("CARGO_PKG_NAME"))
        && map.get("config").is_some_and(Value::is_object);
    if is_manifest {
        if let Some(Value::Object(inner)) = map.remove("config") {
            return Ok(inner);
        }
    }
    Ok(map)
}

/// A preset name (with or without `preset:`) or a curve JSON file.
pub fn resolve_curve(spec: &str, n_modes: Option<usize>) -> Result<ClosedCurve> {
    let as_path = Path::new(spec);
    if spec.starts_with("preset:") || !as_path.exists() {
        let preset: Preset = spec.parse()?;
        return preset.build(n_modes.unwrap_or(curve::DEFAULT_MODES));
    }
    let c = ClosedCurve::from_json(&fs::read_to_string(as_path)?)?;
    match n_modes {
        Some(n) if n != c.n_modes() => c.with_band(n),
        _ => Ok(c),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<i32> {
    let file = load_settings(cli.global.config.as_deref())?;
    let threads: usize = match cli.global.threads {
        Some(t) => t,
        None => match file.get("threads") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| Error::InvalidParameter(format!("config key \"threads\": {e}")))?,
            None => 0,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let ctx = Ctx {
        argv,
        global: cli.global,
        file,
        pool,
    };
    match cli.command {
        Command::Flow(FlowCommand::Run(a)) => cmd_flow_run(&ctx, a),
        Command::Flow(FlowCommand::Audit(a)) => cmd_flow_audit(&ctx, a),
        Command::Flow(FlowCommand::Rates(a)) => cmd_flow_rates(&ctx, a),
        Command::Identities(a) => cmd_identities(&ctx, a),
        Command::Fuzz(a) => cmd_fuzz(&ctx, a),
        Command::Shrinker(ShrinkerCommand::Residual(a)) => cmd_shrinker_residual(&ctx, a),
        Command::Shrinker(ShrinkerCommand::Search(a)) => cmd_shrinker_search(&ctx, a),
        Command::Shrinker(ShrinkerCommand::TypeI(a)) => cmd_shrinker_type_one(&ctx, a),
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} is required (flag or config key)"))
}

fn audit_violations(report: &flow::AuditReport) -> Vec<ViolationRow> {
    report
        .checks
        .iter()
        .flat_map(|c| {
            c.violations.iter().map(move |v| {
                ViolationRow::new(c.name.clone(), v.row)
                    .at(v.t)
                    .values(v.value, v.bound)
            })
        })
        .collect()
}

#[derive(Serialize)]
struct SnapshotFile {
    t: f64,
    step: usize,
    curve: CurveFile,
}

fn cmd_flow_run(ctx: &Ctx, a: FlowRunArgs) -> Result<i32> {
    let mut config: FlowConfig = ctx.typed()?;
    if let Some(n) = ctx.global.n_modes {
        config.n_modes = n;
    }
    if let Some(t) = a.t_end {
        config.t_end = t;
    }
    if let Some(t) = a.local_tol {
        config.local_tol = t;
    }
    if let Some(k) = a.audit_every {
        config.audit_every = k;
    }
    config.validate()?;
    let initial_spec: String = ctx.pick(a.initial, "initial")?.ok_or_else(|| missing("--initial"))?;
    let snapshots: usize = ctx.pick(a.snapshots, "snapshots")?.unwrap_or(DEFAULT_SNAPSHOTS);
    let window: Option<(f64, f64)> = ctx.pick(a.window, "window")?;
    let initial = resolve_curve(&initial_spec, Some(config.n_modes))?;

    let mut settings = serde_json::to_value(&config)?;
    settings["initial"] = json!(initial_spec);
    settings["snapshots"] = json!(snapshots);
    settings["window"] = json!(window);
    let out = ctx.open(
        ctx.out_dir(PathBuf::from("out/flow-run")),
        "flow run",
        settings,
        Vec::new(),
        &["trace.csv", "run.json", "audit.json", "snapshots/index.csv"],
    )?;

    // Snapshots are spaced evenly in max(t/t_end, 1 − L/L₀), so runs that
    // end in a singularity still get a gallery of the collapse.
    let mut snaps: Vec<(f64, usize, ClosedCurve)> = Vec::new();
    let mut latest: Option<(f64, usize, ClosedCurve)> = None;
    let mut l0 = None;
    let mut next = 0usize;
    let trace = flow::run_observed(&initial, &config, |state| {
        if snapshots == 0 {
            return;
        }
        let l0 = *l0.get_or_insert(state.last_report.length);
        let progress = if config.t_end > 0.0 { state.t / config.t_end } else { 1.0 }
            .max(1.0 - state.last_report.length / l0);
        let spacing = 1.0 / (snapshots.max(2) - 1) as f64;
        if next < snapshots && progress >= next as f64 * spacing * (1.0 - 1e-12) {
            snaps.push((state.t, state.step_count, state.curve.clone()));
            while next < snapshots && progress >= next as f64 * spacing * (1.0 - 1e-12) {
                next += 1;
            }
        }
        latest = Some((state.t, state.step_count, state.curve.clone()));
    })?;
    if let Some(last) = latest {
        if snaps.last().map(|s| s.1) != Some(last.1) {
            snaps.push(last);
        }
    }
    write_snapshots(&out.path("snapshots"), &snaps)?;

    let mut meta = trace.meta();
    let mut violations = Vec::new();
    if let Some(w) = window {
        match flow::decay_rates(&trace, w) {
            Ok(r) => meta.decay_slopes = Some(r),
            Err(e) => ctx.say(format!("decay rates not fitted: {e}")),
        }
    }
    trace.write_dir(&out.dir, &meta)?;
    if let Termination::StepFailure { t, reason } = &trace.termination {
        violations.push(ViolationRow::new("step_failure", trace.accepted_steps).at(*t).detail(reason.clone()));
    }
    if trace.rows.len() >= 3 {
        let report = flow::audit(&trace, trace.l0(), trace.a0())?;
        write_json(&out.path("audit.json"), &report)?;
        violations.extend(audit_violations(&report));
    }
    let last = trace.last();
    ctx.say(format!(
        "{}: {:?} after {} steps ({} rejected); t = {}, L = {}, D = {:e}, K_osc = {:e}",
        initial_spec,
        trace.termination,
        trace.accepted_steps,
        trace.rejected_steps,
        last.t,
        last.length,
        last.defect,
        last.oscillation
    ));
    out.finish(&violations)
}

fn write_snapshots(dir: &Path, snaps: &[(f64, usize, ClosedCurve)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut index = Vec::with_capacity(snaps.len());
    for (j, (t, step, c)) in snaps.iter().enumerate() {
        let name = format!("snap_{j:03}.json");
        let file = SnapshotFile {
            t: *t,
            step: *step,
            curve: CurveFile::from(c),
        };
        write_json(&dir.join(&name), &file)?;
        index.push(vec![j.to_string(), fmt_f64(*t), step.to_string(), name]);
    }
    write_csv(&dir.join("index.csv"), &["index", "t", "step", "file"], &index)
}

fn cmd_flow_audit(ctx: &Ctx, a: TraceDirArgs) -> Result<i32> {
    let trace = FlowTrace::read_dir(&a.dir)?;
    let out = ctx.open(
        ctx.out_dir(a.dir.join("audit")),
        "flow audit",
        json!({ "trace": a.dir }),
        Vec::new(),
        &["audit.json"],
    )?;
    let report = flow::audit(&trace, trace.l0(), trace.a0())?;
    write_json(&out.path("audit.json"), &report)?;
    for c in &report.checks {
        let status = if c.passed() { "pass" } else { "FAIL" };
        ctx.say(format!("{status} {} ({} rows, {} violations)", c.name, c.checked, c.violations.len()));
    }
    out.finish(&audit_violations(&report))
}

fn cmd_flow_rates(ctx: &Ctx, a: RatesArgs) -> Result<i32> {
    let window: (f64, f64) = ctx.pick(a.window, "window")?.ok_or_else(|| missing("--window"))?;
    let trace = FlowTrace::read_dir(&a.dir)?;
    let out = ctx.open(
        ctx.out_dir(a.dir.join("rates")),
        "flow rates",
        json!({ "trace": a.dir, "window": window }),
        Vec::new(),
        &["rates.json"],
    )?;
    let last = trace.last();
    let mut violations = Vec::new();
    match flow::decay_rates(&trace, window) {
        Ok(r) => {
            for (name, slope, bound, ok) in [
                ("slope_D", r.slope_d, r.bound_d, r.meets_d()),
                ("slope_K_osc", r.slope_ko, r.bound_ko, r.meets_ko()),
                ("slope_ks_norm2_sq", r.slope_ks, r.bound_ks, r.meets_ks()),
            ] {
                ctx.say(format!("{name}: {slope:.6} (need <= {:.6})", 0.9 * bound));
                if !ok {
                    violations.push(ViolationRow::new(name, "").values(slope, 0.9 * bound));
                }
            }
            write_json(
                &out.path("rates.json"),
                &json!({
                    "rates": r,
                    "meets_all": r.meets_all(),
                    "final_t": last.t,
                    "final_K_osc": last.oscillation,
                }),
            )?;
        }
        Err(e @ Error::BadWindow { .. }) => {
            ctx.say(e.to_string());
            write_json(
                &out.path("rates.json"),
                &json!({ "window": window, "error": e.to_string(), "final_t": last.t, "final_K_osc": last.oscillation }),
            )?;
            violations.push(ViolationRow::new("window", "").detail(e.to_string()));
        }
        Err(e) => return Err(e),
    }
    out.finish(&violations)
}

/// The curve named by `--preset`, `--curve`, the matching config keys, or
/// else a random curve from the seed.
fn chosen_curve(ctx: &Ctx, preset: Option<Preset>, path: Option<PathBuf>) -> Result<(String, ClosedCurve)> {
    let n_modes: Option<usize> = ctx.pick(ctx.global.n_modes, "n_modes")?;
    if let Some(p) = preset {
        return Ok((p.name().into(), p.build(n_modes.unwrap_or(curve::DEFAULT_MODES))?));
    }
    if let Some(path) = path {
        let s = path.to_string_lossy().into_owned();
        return Ok((s.clone(), resolve_curve(&s, n_modes)?));
    }
    if let Some(name) = ctx.get::<String>("preset")? {
        let p: Preset = name.parse()?;
        return Ok((p.name().into(), p.build(n_modes.unwrap_or(curve::DEFAULT_MODES))?));
    }
    if let Some(s) = ctx.get::<String>("curve")? {
        return Ok((s.clone(), resolve_curve(&s, n_modes)?));
    }
    let fz: FuzzConfig = ctx.typed()?;
    let seed = ctx.seed()?;
    let n = n_modes.unwrap_or(fz.n_modes);
    Ok((format!("random:{seed}"), curve::random_curve(seed, n, fz.decay, fz.amplitude)?))
}

fn cmd_identities(ctx: &Ctx, a: IdentitiesArgs) -> Result<i32> {
    let orders = parse_orders(&ctx.pick(a.q, "q")?.unwrap_or_else(|| "all".into()))?;
    let tol: f64 = ctx.pick(a.tol, "tol")?.unwrap_or(fuzz::IDENTITY_TOL);
    let (source, c) = chosen_curve(ctx, a.preset, a.curve)?;
    let seed = ctx.seed()?;
    let out = ctx.open(
        ctx.out_dir(PathBuf::from("out/identities")),
        "identities",
        json!({ "curve": source, "n_modes": c.n_modes(), "q": orders, "tol": tol, "seed": seed }),
        vec![seed],
        &["identities.csv", "report.json"],
    )?;
    let config = FuzzConfig {
        identities: true,
        checks: Checks::ALL,
        ..FuzzConfig::default()
    };
    let record = fuzz::evaluate(&c, seed, &config)?;
    let ids: Vec<&spectral::IdentityReport> = record
        .identities
        .iter()
        .filter(|r| orders.contains(&r.q))
        .collect();
    let rows: Vec<Vec<String>> = ids
        .iter()
        .map(|r| {
            vec![
                r.q.to_string(),
                fmt_f64(r.series_side),
                fmt_f64(r.integral_side),
                fmt_f64(r.abs_residual),
                fmt_f64(r.rel_residual),
                r.resolved.to_string(),
            ]
        })
        .collect();
    write_csv(&out.path("identities.csv"), &fuzz::IDENTITY_COLUMNS[1..], &rows)?;
    let mut violations = Vec::new();
    for r in &ids {
        ctx.say(format!(
            "q = {}: series {:.15e}, integral {:.15e}, rel residual {:.2e}{}",
            r.q,
            r.series_side,
            r.integral_side,
            r.rel_residual,
            if r.resolved { "" } else { " (unresolved)" }
        ));
        if !(r.rel_residual < tol) {
            violations.push(ViolationRow::new(format!("identity_q{}", r.q), &source).values(r.rel_residual, tol));
        }
    }
    violations.extend(record_violations(&record, &source, Checks::NONE));
    write_json(
        &out.path("report.json"),
        &json!({
            "curve": source,
            "winding": c.winding(),
            "n_modes": c.n_modes(),
            "identities": ids,
            "series": record.series,
            "inequalities": record.inequalities,
        }),
    )?;
    out.finish(&violations)
}

/// Series-form mismatches and the selected inequality violations of one
/// corpus record.
fn record_violations(r: &CurveRecord, id: &str, checks: Checks) -> Vec<ViolationRow> {
    let mut out = Vec::new();
    if let Some(s) = &r.series {
        for (name, err, tol) in [
            ("series_defect", s.defect_rel_error(), SERIES_TOL),
            ("series_oscillation", s.oscillation_rel_error(), SERIES_TOL),
            ("series_forms", s.oscillation_forms_rel_error(), SERIES_FORMS_TOL),
        ] {
            if !(err < tol) {
                out.push(ViolationRow::new(name, id).values(err, tol));
            }
        }
    }
    if let Some(ineq) = &r.inequalities {
        for (name, on, lhs, rhs, violated) in [
            ("lower", checks.lower, ineq.lower.lhs, ineq.lower.rhs, ineq.lower.violated),
            ("holder", checks.holder, ineq.holder.lhs, ineq.holder.rhs, ineq.holder.violated),
            ("eqapp2", checks.sextic, ineq.sextic.lhs, ineq.sextic.rhs, ineq.sextic.violated),
        ] {
            if on && violated {
                out.push(ViolationRow::new(name, id).values(lhs, rhs));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct FuzzReport {
    n_curves: usize,
    amplitudes: Vec<f64>,
    /// Largest relative identity residual over every curve and order.
    max_rel_residual: Option<f64>,
    violations: usize,
    per_amplitude: Vec<fuzz::FuzzSummary>,
}

fn cmd_fuzz(ctx: &Ctx, a: FuzzArgs) -> Result<i32> {
    let mut config: FuzzConfig = ctx.typed()?;
    config.seed = ctx.seed()?;
    if let Some(n) = ctx.global.n_modes {
        config.n_modes = n;
    }
    if let Some(n) = a.n {
        config.n_curves = n;
    }
    if let Some(d) = a.decay {
        config.decay = d;
    }
    if let Some(s) = ctx.pick(a.check, "check")? {
        config.checks = s.parse::<Checks>()?;
    }
    if a.no_identities {
        config.identities = false;
    }
    let amplitudes: Vec<f64> = if a.amplitude.is_empty() {
        ctx.get("amplitudes")?.unwrap_or_else(|| vec![config.amplitude])
    } else {
        a.amplitude
    };
    if amplitudes.is_empty() {
        return Err(missing("--amplitude"));
    }
    let blocks: Vec<FuzzConfig> = amplitudes
        .iter()
        .enumerate()
        .map(|(j, &amp)| FuzzConfig {
            amplitude: amp,
            seed: config.seed.wrapping_add((j * config.n_curves) as u64),
            ..config.clone()
        })
        .collect();

    let mut settings = serde_json::to_value(&config)?;
    settings["amplitudes"] = json!(amplitudes);
    let mut artifacts = vec!["summary.json"];
    if config.identities {
        artifacts.extend(["identities.csv", "series.csv"]);
    }
    if config.checks.any() {
        artifacts.push("inequalities.csv");
    }
    let out = ctx.open(
        ctx.out_dir(PathBuf::from("out/fuzz")),
        "fuzz",
        settings,
        blocks.iter().map(|b| b.seed).collect(),
        &artifacts,
    )?;

    let mut records = Vec::new();
    let mut ineq_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut violations = Vec::new();
    for block in &blocks {
        let recs = ctx.pool.install(|| fuzz::run_fuzz(block))?;
        let summary = fuzz::summarize(block, &recs);
        ctx.say(format!(
            "amplitude {}: {} curves, {} identity failures, violations lower/holder/eqapp2 = {}/{}/{}",
            block.amplitude,
            summary.curves,
            summary.identity_failures,
            summary.violations_lower,
            summary.violations_holder,
            summary.violations_eqapp2
        ));
        for r in &recs {
            for i in &r.identities {
                if !(i.rel_residual < fuzz::IDENTITY_TOL) {
                    violations.push(
                        ViolationRow::new(format!("identity_q{}", i.q), r.seed)
                            .values(i.rel_residual, fuzz::IDENTITY_TOL),
                    );
                }
            }
            violations.extend(
                record_violations(r, &r.seed.to_string(), block.checks)
                    .into_iter()
                    .map(|v| v.detail(format!("amplitude {}", block.amplitude))),
            );
        }
        ineq_rows.push((block.amplitude, fuzz::inequality_rows(&recs, block.checks)));
        summaries.push(summary);
        records.extend(recs);
    }

    if config.identities {
        fuzz::write_identities_csv(&out.path("identities.csv"), &records)?;
        fuzz::write_series_csv(&out.path("series.csv"), &records)?;
    }
    if config.checks.any() {
        let mut rows = Vec::new();
        for (amp, block_rows) in &ineq_rows {
            rows.extend(block_rows.iter().map(|r| {
                vec![
                    r.seed.to_string(),
                    fmt_f64(*amp),
                    r.check.to_string(),
                    fmt_f64(r.lhs),
                    fmt_f64(r.rhs),
                    r.violated.to_string(),
                ]
            }));
        }
        write_csv(&out.path("inequalities.csv"), &fuzz::INEQUALITY_COLUMNS, &rows)?;
    }
    let max_rel = records
        .iter()
        .flat_map(|r| r.identities.iter().map(|i| i.rel_residual))
        .reduce(f64::max);
    let report = FuzzReport {
        n_curves: records.len(),
        amplitudes,
        max_rel_residual: max_rel,
        violations: violations.len(),
        per_amplitude: summaries,
    };
    write_json(&out.path("summary.json"), &report)?;
    ctx.say(format!(
        "{} curves, max identity residual {:?}, {} violations",
        report.n_curves, report.max_rel_residual, report.violations
    ));
    out.finish(&violations)
}

fn cmd_shrinker_residual(ctx: &Ctx, a: ResidualArgs) -> Result<i32> {
    let spec: String = ctx.pick(a.curve, "curve")?.ok_or_else(|| missing("--curve"))?;
    let n_modes: Option<usize> = ctx.pick(ctx.global.n_modes, "n_modes")?;
    let c = resolve_curve(&spec, n_modes)?;
    let out = ctx.open(
        ctx.out_dir(PathBuf::from("out/shrinker-residual")),
        "shrinker residual",
        json!({ "curve": spec, "n_modes": c.n_modes() }),
        Vec::new(),
        &["residual.json", "residual.csv"],
    )?;
    let res = shrinker::shrinker_residual(&c)?;
    let m = res.pointwise.grid_size();
    let h = res.pointwise.length() / m as f64;
    let rows: Vec<Vec<String>> = res
        .pointwise
        .samples()
        .iter()
        .enumerate()
        .map(|(j, v)| vec![fmt_f64(j as f64 * h), fmt_f64(*v)])
        .collect();
    write_csv(&out.path("residual.csv"), &["s", "residual"], &rows)?;
    write_json(
        &out.path("residual.json"),
        &json!({
            "curve": spec,
            "scale_used": res.scale_used,
            "l2_norm": res.l2_norm,
            "linf_norm": res.linf_norm,
            "support_norm": res.support_norm,
            "relative": res.relative(),
        }),
    )?;
    ctx.say(format!(
        "l2 {:e}, linf {:e}, relative {:e}",
        res.l2_norm,
        res.linf_norm,
        res.relative()
    ));
    out.finish(&[])
}

/// Candidates whose residual is this small are expected to enclose zero
/// signed area.
const SHRINKER_CANDIDATE: f64 = 1e-3;
const SHRINKER_AREA_TOL: f64 = 1e-8;

fn cmd_shrinker_search(ctx: &Ctx, a: SearchArgs) -> Result<i32> {
    let preset = a.preset.or_else(|| if a.curve.is_none() { Some(Preset::Lemniscate) } else { None });
    let (source, base) = chosen_curve(ctx, preset, a.curve)?;
    let bracket: (f64, f64) = ctx.pick(a.bracket, "bracket")?.unwrap_or(DEFAULT_BRACKET);
    let max_residual: Option<f64> = ctx.pick(a.max_residual, "max_residual")?;
    let out = ctx.open(
        ctx.out_dir(PathBuf::from("out/shrinker-search")),
        "shrinker search",
        json!({ "curve": source, "n_modes": base.n_modes(), "bracket": bracket, "max_residual": max_residual }),
        Vec::new(),
        &["search.json", "scan.csv"],
    )?;
    let mut violations = Vec::new();
    match shrinker::scale_search(&base, bracket) {
        Ok(s) => {
            let rows: Vec<Vec<String>> = s.scan.iter().map(|(a, r)| vec![fmt_f64(*a), fmt_f64(*r)]).collect();
            write_csv(&out.path("scan.csv"), &["a", "relative_residual"], &rows)?;
            let scaled = if s.reversed { base.reversed() } else { base.clone() }.scaled(s.a_star);
            let (_, area) = curve::length_and_area(&scaled);
            write_json(
                &out.path("search.json"),
                &json!({
                    "curve": source,
                    "bracket": bracket,
                    "a_star": s.a_star,
                    "relative_residual": s.relative_residual,
                    "l2_norm": s.residual.l2_norm,
                    "linf_norm": s.residual.linf_norm,
                    "reversed": s.reversed,
                    "signed_area": area,
                }),
            )?;
            ctx.say(format!(
                "a* = {:.10}, relative residual {:e}, signed area {:e}",
                s.a_star, s.relative_residual, area
            ));
            if let Some(m) = max_residual {
                if !(s.relative_residual < m) {
                    violations.push(ViolationRow::new("relative_residual", &source).values(s.relative_residual, m));
                }
            }
            if s.relative_residual < SHRINKER_CANDIDATE && !(area.abs() < SHRINKER_AREA_TOL) {
                violations.push(ViolationRow::new("zero_area", &source).values(area.abs(), SHRINKER_AREA_TOL));
            }
        }
        Err(e @ Error::NoInteriorMinimum { .. }) => {
            ctx.say(e.to_string());
            write_json(&out.path("search.json"), &json!({ "curve": source, "bracket": bracket, "error": e.to_string() }))?;
            violations.push(ViolationRow::new("interior_minimum", &source).detail(e.to_string()));
        }
        Err(e) => return Err(e),
    }
    out.finish(&violations)
}

fn cmd_shrinker_type_one(ctx: &Ctx, a: TypeIArgs) -> Result<i32> {
    let t_final: Option<f64> = ctx.pick(a.t_final, "T")?;
    let trace = FlowTrace::read_dir(&a.trace)?;
    let out = ctx.open(
        ctx.out_dir(a.trace.join("typeI")),
        "shrinker typeI",
        json!({ "trace": a.trace, "T": t_final }),
        Vec::new(),
        &["typeI.json", "typeI.csv"],
    )?;
    let d = shrinker::type_one_diagnostic(&trace, t_final)?;
    let rows: Vec<Vec<String>> = d.samples.iter().map(|(t, v)| vec![fmt_f64(*t), fmt_f64(*v)]).collect();
    write_csv(&out.path("typeI.csv"), &["t", "k_norm2_sq_scaled"], &rows)?;
    write_json(
        &out.path("typeI.json"),
        &json!({
            "C_est": d.c_est,
            "T_used": d.t_used,
            "T_est": trace.t_est(),
            "C_est_T_minus_5pct": d.c_est_t_minus_5pct,
            "C_est_T_plus_5pct": d.c_est_t_plus_5pct,
            "samples": d.samples.len(),
        }),
    )?;
    ctx.say(format!("C_est = {} at T = {}", d.c_est, d.t_used));
    out.finish(&[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_orders_parse() {
        assert_eq!(parse_pair("1,4").unwrap(), (1.0, 4.0));
        assert!(parse_pair("1").is_err());
        assert_eq!(parse_orders("all").unwrap(), (1..=8).collect::<Vec<_>>());
        assert_eq!(parse_orders("2, 8").unwrap(), vec![2, 8]);
        assert!(parse_orders("9").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["curvediff", "bogus"]), EXIT_USAGE);
        assert_eq!(run_from(["curvediff", "flow", "rates", "/nonexistent", "--window", "1,4"]), EXIT_USAGE);
    }
}
