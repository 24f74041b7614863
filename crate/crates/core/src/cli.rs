//! Command-line entry point: `train`, `certify`, `simulate`, `audit` and
//! `export-shapes`, each driven by one JSON config document.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{self, prepare_fico, sha256_file, split, synthetic_raw, Dataset, FicoMissingPolicy, Recipe};
use crate::error::Error;
use crate::eval::{self, metrics, MetricsReport, DEFAULT_THRESHOLD};
use crate::model::{FcnnModel, ModelSpec, NamModel};
use crate::monotonicity::{certify, DEFAULT_CERTIFY_RESOLUTION};
use crate::simulation::{run_sweep, sweep_csv, SimConfig, SweepCell, SweepRow, DEFAULT_SIM_SEED};
use crate::svg::{line_chart, Series};
use crate::trainer::{escalation_csv, train_fcnn, train_mnam, train_nam, EscalationRecord, TrainConfig};

/// Seed used when neither the config nor `--seed` sets one.
pub const DEFAULT_SEED: u64 = 20_220_917;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "mnam", version, about = "Monotonic neural additive models")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prepare a dataset, train an FCNN, NAM or MNAM and evaluate it.
    Train(TrainArgs),
    /// Check a saved model's monotonicity constraints on a grid.
    Certify(CertifyArgs),
    /// Run a Monte Carlo violation-rate sweep.
    Simulate,
    /// Empirical marginal curves and violation flags for a dataset.
    Audit(AuditArgs),
    /// Write per-feature shape functions as CSV and SVG.
    ExportShapes(ExportArgs),
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub recipe: Option<Recipe>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Train on this many synthetic rows shaped like the recipe's data.
    #[arg(long)]
    pub synthetic: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct CertifyArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct AuditArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub recipe: Option<Recipe>,
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Feature to audit; repeatable.
    #[arg(long = "feature")]
    pub features: Vec<String>,
}

#[derive(Args, Debug, Default)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Second model drawn on the same axes.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fcnn,
    Nam,
    Mnam,
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

fn default_ratio() -> f64 {
    0.8
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_kind() -> ModelKind {
    ModelKind::Mnam
}
fn default_resolution() -> usize {
    DEFAULT_CERTIFY_RESOLUTION
}
fn default_grid() -> usize {
    200
}
fn default_fico() -> FicoMissingPolicy {
    FicoMissingPolicy::Median
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default)]
    pub data: Option<PathBuf>,
    pub recipe: Recipe,
    #[serde(default = "default_kind")]
    pub model: ModelKind,
    #[serde(default)]
    pub synthetic_rows: Option<usize>,
    #[serde(default = "default_ratio")]
    pub split_ratio: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_fico")]
    pub fico_missing: FicoMissingPolicy,
    /// Drop every monotonicity constraint from the recipe's spec.
    #[serde(default)]
    pub unconstrained: bool,
    #[serde(default)]
    pub trainer: TrainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub model: PathBuf,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default)]
    pub data: Option<PathBuf>,
    pub recipe: Recipe,
    #[serde(default)]
    pub synthetic_rows: Option<usize>,
    /// Empty: every integer-valued constrained feature of the recipe.
    #[serde(default)]
    pub features: Vec<String>,
    /// `[dominant, dominated]` names. Empty with empty `features`: the recipe's pairs.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
    #[serde(default)]
    pub x_max: Option<i64>,
    #[serde(default = "default_fico")]
    pub fico_missing: FicoMissingPolicy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportSection {
    pub model: PathBuf,
    #[serde(default)]
    pub overlay: Option<PathBuf>,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub train: Option<TrainSection>,
    #[serde(default)]
    pub certify: Option<CertifySection>,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub audit: Option<AuditSection>,
    #[serde(default)]
    pub export_shapes: Option<ExportSection>,
}

/// A failed run: exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: m.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_data_error() {
            EXIT_DATA
        } else if e.is_training_error() {
            EXIT_FAILURE
        } else {
            EXIT_CONFIG
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Serialize)]
struct InputChecksum {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    seed: u64,
    config: serde_json::Value,
    inputs: Vec<InputChecksum>,
}

/// Files produced by a run, written only once the run has succeeded (or
/// failed in a way that leaves useful diagnostics).
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.push((name.into(), body.into()));
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
        s.push('\n');
        self.add(name, s);
        Ok(())
    }

    fn manifest(
        &mut self,
        subcommand: &'static str,
        seed: u64,
        config: &impl Serialize,
        inputs: &[&Path],
    ) -> CliResult<()> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputChecksum {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let m = Manifest {
            tool: "mnam",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            config: serde_json::to_value(config).map_err(Error::from)?,
            inputs,
        };
        self.json("manifest.json", &m)
    }

    fn commit(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        for (name, body) in &self.files {
            std::fs::write(dir.join(name), body).map_err(Error::from)?;
        }
        Ok(())
    }
}

struct Ctx {
    seed: u64,
    seed_given: bool,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, s: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", s.as_ref());
        }
    }
}

fn resolve(base: Option<&Path>, p: PathBuf) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

fn read_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
}

fn require_file(p: &Path) -> CliResult<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_DATA,
            message: format!("input file not found: {}", p.display()),
        })
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: Cli) -> CliResult<i32> {
    let (cfg, base) = match &cli.config {
        Some(p) => (read_config(p)?, p.parent().map(Path::to_path_buf)),
        None => (RunConfig::default(), None),
    };
    let base = base.as_deref();
    let seed_given = cli.seed.is_some() || cfg.seed.is_some();
    let ctx = Ctx {
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        seed_given,
        out: cli
            .out
            .clone()
            .or_else(|| cfg.out.clone().map(|p| resolve(base, p)))
            .unwrap_or_else(|| PathBuf::from("out")),
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Train(a) => {
            let mut sec = match cfg.train {
                Some(mut s) => {
                    s.data = s.data.map(|p| resolve(base, p));
                    s
                }
                None => TrainSection {
                    data: None,
                    recipe: a
                        .recipe
                        .ok_or_else(|| Failure::config("train needs --recipe or a config `train` section"))?,
                    model: default_kind(),
                    synthetic_rows: None,
                    split_ratio: default_ratio(),
                    threshold: default_threshold(),
                    fico_missing: default_fico(),
                    unconstrained: false,
                    trainer: TrainConfig::default(),
                },
            };
            if let Some(d) = a.data {
                sec.data = Some(d);
            }
            if let Some(r) = a.recipe {
                sec.recipe = r;
            }
            if let Some(k) = a.model {
                sec.model = k;
            }
            if let Some(n) = a.synthetic {
                sec.synthetic_rows = Some(n);
            }
            sec.trainer.seed = ctx.seed;
            cmd_train(&ctx, sec)
        }
        Command::Certify(a) => {
            let mut sec = match cfg.certify {
                Some(mut s) => {
                    s.model = resolve(base, s.model);
                    s
                }
                None => CertifySection {
                    model: a
                        .model
                        .clone()
                        .ok_or_else(|| Failure::config("certify needs --model or a config `certify` section"))?,
                    resolution: default_resolution(),
                },
            };
            if let Some(m) = a.model {
                sec.model = m;
            }
            if let Some(r) = a.resolution {
                sec.resolution = r;
            }
            cmd_certify(&ctx, sec)
        }
        Command::Simulate => {
            let sec = cfg
                .simulate
                .ok_or_else(|| Failure::config("simulate needs a config with a `simulate` section"))?;
            cmd_simulate(&ctx, sec)
        }
        Command::Audit(a) => {
            let mut sec = match cfg.audit {
                Some(mut s) => {
                    s.data = s.data.map(|p| resolve(base, p));
                    s
                }
                None => AuditSection {
                    data: None,
                    recipe: a
                        .recipe
                        .ok_or_else(|| Failure::config("audit needs --recipe or a config `audit` section"))?,
                    synthetic_rows: None,
                    features: Vec::new(),
                    pairs: Vec::new(),
                    x_max: None,
                    fico_missing: default_fico(),
                },
            };
            if let Some(d) = a.data {
                sec.data = Some(d);
            }
            if let Some(r) = a.recipe {
                sec.recipe = r;
            }
            if let Some(n) = a.synthetic {
                sec.synthetic_rows = Some(n);
            }
            if !a.features.is_empty() {
                sec.features = a.features;
            }
            cmd_audit(&ctx, sec)
        }
        Command::ExportShapes(a) => {
            let mut sec = match cfg.export_shapes {
                Some(mut s) => {
                    s.model = resolve(base, s.model);
                    s.overlay = s.overlay.map(|p| resolve(base, p));
                    s
                }
                None => ExportSection {
                    model: a
                        .model
                        .clone()
                        .ok_or_else(|| Failure::config("export-shapes needs --model or a config section"))?,
                    overlay: None,
                    grid_points: default_grid(),
                },
            };
            if let Some(m) = a.model {
                sec.model = m;
            }
            if let Some(o) = a.overlay {
                sec.overlay = Some(o);
            }
            if let Some(g) = a.grid_points {
                sec.grid_points = g;
            }
            cmd_export_shapes(&ctx, sec)
        }
    }
}

fn load_prepared(
    recipe: Recipe,
    path: Option<&Path>,
    synthetic_rows: Option<usize>,
    fico: FicoMissingPolicy,
    seed: u64,
) -> CliResult<(Dataset, ModelSpec)> {
    let raw = match (path, synthetic_rows) {
        (Some(p), _) => {
            require_file(p)?;
            recipe.load(p)?
        }
        (None, Some(n)) => synthetic_raw(recipe, n, seed),
        (None, None) => return Err(Failure::config("no data path or synthetic_rows given")),
    };
    Ok(match recipe {
        Recipe::Fico => prepare_fico(&raw, fico)?,
        r => r.prepare(&raw)?,
    })
}

fn metrics_text(label: &str, m: &MetricsReport) -> String {
    format!("[{label}]\n{m}\n")
}

fn cmd_train(ctx: &Ctx, sec: TrainSection) -> CliResult<i32> {
    sec.trainer.validate()?;
    if let Some(p) = &sec.data {
        require_file(p)?;
    }
    let (data, mut spec) = load_prepared(
        sec.recipe,
        sec.data.as_deref(),
        sec.synthetic_rows,
        sec.fico_missing,
        ctx.seed,
    )?;
    let (train, test) = split(&data, sec.split_ratio, ctx.seed)?;
    spec.features = train.meta.clone();
    if sec.unconstrained {
        spec.monotone.clear();
        spec.pairwise.clear();
    }
    ctx.say(format!(
        "{}: {} rows ({} positive), {} train / {} test, {} features",
        sec.recipe.name(),
        data.n_rows(),
        data.positive_count(),
        train.n_rows(),
        test.n_rows(),
        data.n_features()
    ));

    let mut out = Outputs::new();
    let inputs: Vec<&Path> = sec.data.iter().map(PathBuf::as_path).collect();
    let (train_probs, test_probs, model_json, nam) = match sec.model {
        ModelKind::Fcnn => {
            let m: FcnnModel = train_fcnn(&train, &sec.trainer)?;
            (m.predict_dataset(&train)?, m.predict_dataset(&test)?, m.to_json()?, None)
        }
        ModelKind::Nam => {
            let m = train_nam(&train, &spec, &sec.trainer, 0.0, 0.0)?;
            (m.predict_dataset(&train)?, m.predict_dataset(&test)?, m.to_json()?, Some(m))
        }
        ModelKind::Mnam => match train_mnam(&train, &spec, &sec.trainer) {
            Ok(fit) => {
                ctx.say(escalation_csv(&fit.log).trim_end());
                out.add("escalation.csv", escalation_csv(&fit.log));
                let m = fit.model;
                (m.predict_dataset(&train)?, m.predict_dataset(&test)?, m.to_json()?, Some(m))
            }
            Err(Error::ConstraintsUnsatisfied { log }) => {
                return fail_escalation(ctx, out, &sec, &inputs, &log);
            }
            Err(e) => return Err(e.into()),
        },
    };
    let threshold = sec.threshold;
    let train_m = metrics(&train_probs, &train.labels, threshold)?;
    let test_m = metrics(&test_probs, &test.labels, threshold)?;
    let text = metrics_text("train", &train_m) + &metrics_text("test", &test_m);
    ctx.say(text.trim_end());
    out.add("model.json", model_json + "\n");
    out.json(
        "metrics.json",
        &serde_json::json!({ "train": train_m, "test": test_m }),
    )?;
    out.add("metrics.txt", text);
    if let Some(m) = nam.filter(|m| m.spec.has_constraints()) {
        let report = certify(&m, sec.trainer.certify_resolution, Some(&train))?;
        ctx.say(report.to_string().trim_end());
        out.json("certification.json", &report)?;
        out.add("certification.txt", report.to_string());
    }
    out.manifest("train", ctx.seed, &sec, &inputs)?;
    out.commit(&ctx.out)?;
    Ok(EXIT_OK)
}

fn fail_escalation(
    ctx: &Ctx,
    mut out: Outputs,
    sec: &TrainSection,
    inputs: &[&Path],
    log: &[EscalationRecord],
) -> CliResult<i32> {
    out.add("escalation.csv", escalation_csv(log));
    out.manifest("train", ctx.seed, sec, inputs)?;
    out.commit(&ctx.out)?;
    Err(Failure {
        code: EXIT_FAILURE,
        message: format!(
            "constraints still violated after {} escalation rounds; see escalation.csv",
            log.len().saturating_sub(1)
        ),
    })
}

fn load_nam(path: &Path) -> CliResult<NamModel> {
    require_file(path)?;
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    NamModel::from_json(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn cmd_certify(ctx: &Ctx, sec: CertifySection) -> CliResult<i32> {
    let model = load_nam(&sec.model)?;
    let report = certify(&model, sec.resolution, None)?;
    ctx.say(report.to_string().trim_end());
    let mut out = Outputs::new();
    out.json("certification.json", &report)?;
    out.add("certification.txt", report.to_string());
    out.manifest("certify", ctx.seed, &sec, &[&sec.model])?;
    out.commit(&ctx.out)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

fn summary_table(rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{:<24} {:<11} {:>8} {:>8} {:>10}\n",
        "cell", "target", "ratio%", "se%", "reference%"
    );
    for r in rows {
        let reference = r.reference.map(|v| format!("{:.1}", 100.0 * v)).unwrap_or_default();
        s.push_str(&format!(
            "{:<24} {:<11} {:>8.1} {:>8.2} {:>10}\n",
            r.cell,
            r.target,
            100.0 * r.estimate.ratio,
            100.0 * r.estimate.stderr,
            reference
        ));
    }
    s
}

fn cmd_simulate(ctx: &Ctx, mut sec: SimulateSection) -> CliResult<i32> {
    if sec.cells.is_empty() {
        return Err(Failure::config("simulate section has no cells"));
    }
    if ctx.seed_given {
        for c in &mut sec.cells {
            match &mut c.config {
                SimConfig::Individual(k) => k.seed = ctx.seed,
                SimConfig::Pairwise(k) => k.seed = ctx.seed,
            }
        }
    }
    let rows = run_sweep(&sec.cells)?;
    let table = summary_table(&rows);
    ctx.say(table.trim_end());
    let mut out = Outputs::new();
    out.add("sweep.csv", sweep_csv(&rows));
    out.json("results.json", &rows)?;
    out.add("summary.txt", table);
    let seed = if ctx.seed_given { ctx.seed } else { DEFAULT_SIM_SEED };
    out.manifest("simulate", seed, &sec, &[])?;
    out.commit(&ctx.out)?;
    Ok(EXIT_OK)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

fn cmd_audit(ctx: &Ctx, sec: AuditSection) -> CliResult<i32> {
    if let Some(p) = &sec.data {
        require_file(p)?;
    }
    let (data, spec) = load_prepared(
        sec.recipe,
        sec.data.as_deref(),
        sec.synthetic_rows,
        sec.fico_missing,
        ctx.seed,
    )?;
    let index = |name: &str| {
        spec.feature_index(name)
            .ok_or_else(|| Failure::config(format!("unknown feature `{name}`")))
    };
    let integer_valued = |i: usize| {
        data.columns[i]
            .iter()
            .all(|&v| (data.meta[i].transform.invert(v) - data.meta[i].transform.invert(v).round()).abs() < 1e-6)
    };
    let (features, pairs) = if sec.features.is_empty() && sec.pairs.is_empty() {
        let f: Vec<usize> = spec
            .monotone
            .iter()
            .map(|c| c.feature)
            .filter(|&i| integer_valued(i))
            .collect();
        let p: Vec<(usize, usize)> = spec
            .pairwise
            .iter()
            .map(|p| (p.dominant, p.dominated))
            .filter(|&(u, v)| integer_valued(u) && integer_valued(v))
            .collect();
        (f, p)
    } else {
        let f = sec.features.iter().map(|n| index(n)).collect::<CliResult<Vec<_>>>()?;
        let p = sec
            .pairs
            .iter()
            .map(|[u, v]| Ok((index(u)?, index(v)?)))
            .collect::<CliResult<Vec<_>>>()?;
        (f, p)
    };
    let report = eval::audit_monotonicity(&data, &features, &pairs, sec.x_max)?;
    let mut out = Outputs::new();
    let mut summary = String::new();
    for f in &report.features {
        let stem = file_stem(&f.name);
        out.add(format!("curve_{stem}.csv"), eval::curve_csv(f));
        out.add(format!("hist_{stem}.csv"), eval::histogram_csv(f));
        let drops: Vec<String> = f
            .levels
            .iter()
            .filter(|l| l.decrease)
            .map(|l| l.x.to_string())
            .collect();
        summary.push_str(&format!(
            "{}: {}\n",
            f.name,
            if drops.is_empty() {
                "monotone".to_string()
            } else {
                format!("decrease at x = {}", drops.join(", "))
            }
        ));
    }
    for p in &report.pairs {
        let (u, v) = (&data.meta[p.dominant].name, &data.meta[p.dominated].name);
        out.add(
            format!("pair_{}_over_{}.csv", file_stem(u), file_stem(v)),
            eval::pair_csv(p),
        );
        let bad: Vec<String> = p
            .steps
            .iter()
            .filter(|s| s.violated)
            .map(|s| format!("{}->{}", s.x, s.x + 1))
            .collect();
        summary.push_str(&format!(
            "{u} over {v}: {}\n",
            if bad.is_empty() {
                "consistent".to_string()
            } else {
                format!("smaller increment at {}", bad.join(", "))
            }
        ));
    }
    ctx.say(summary.trim_end());
    out.json("audit.json", &report)?;
    out.add("summary.txt", summary);
    let inputs: Vec<&Path> = sec.data.iter().map(PathBuf::as_path).collect();
    out.manifest("audit", ctx.seed, &sec, &inputs)?;
    out.commit(&ctx.out)?;
    Ok(EXIT_OK)
}

fn cmd_export_shapes(ctx: &Ctx, sec: ExportSection) -> CliResult<i32> {
    if sec.grid_points < 2 {
        return Err(Failure::config("grid_points must be >= 2"));
    }
    let model = load_nam(&sec.model)?;
    let overlay = sec.overlay.as_deref().map(load_nam).transpose()?;
    if let Some(o) = &overlay {
        let names = |m: &NamModel| m.spec.features.iter().map(|f| f.name.clone()).collect::<Vec<_>>();
        if names(o) != names(&model) {
            return Err(Failure::config("overlay model has different features"));
        }
    }
    let mut out = Outputs::new();
    for (i, meta) in model.spec.features.iter().enumerate() {
        let (lo, hi) = (meta.min, meta.max);
        let grid: Vec<f64> = (0..sec.grid_points)
            .map(|k| lo + (hi - lo) * k as f64 / (sec.grid_points - 1) as f64)
            .collect();
        let primary = model.shape_function(i, &grid)?;
        let second = overlay.as_ref().map(|o| o.shape_function(i, &grid)).transpose()?;
        let mut csv = String::from("x,x_raw,f");
        if second.is_some() {
            csv.push_str(",f_overlay");
        }
        csv.push('\n');
        for (k, &(x, f)) in primary.iter().enumerate() {
            csv.push_str(&format!("{x:?},{:?},{f:?}", meta.transform.invert(x)));
            if let Some(s) = &second {
                csv.push_str(&format!(",{:?}", s[k].1));
            }
            csv.push('\n');
        }
        let raw = |pts: &[(f64, f64)]| pts.iter().map(|&(x, f)| (meta.transform.invert(x), f)).collect();
        let mut series = vec![Series {
            name: sec.model.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned()),
            points: raw(&primary),
        }];
        if let (Some(s), Some(p)) = (&second, &sec.overlay) {
            series.push(Series {
                name: p.file_stem().map_or("overlay".into(), |s| s.to_string_lossy().into_owned()),
                points: raw(s),
            });
        }
        let stem = file_stem(&meta.name);
        out.add(format!("shape_{stem}.csv"), csv);
        out.add(
            format!("shape_{stem}.svg"),
            line_chart(&meta.name, &meta.name, "centered f(x)", &series),
        );
    }
    ctx.say(format!(
        "wrote {} shape functions to {}",
        model.n_features(),
        ctx.out.display()
    ));
    let mut inputs: Vec<&Path> = vec![&sec.model];
    if let Some(o) = &sec.overlay {
        inputs.push(o);
    }
    out.manifest("export-shapes", ctx.seed, &sec, &inputs)?;
    out.commit(&ctx.out)?;
    Ok(EXIT_OK)
}

/// Convenience for tests and scripts: prepares a recipe's data the same way
/// `train` does and returns the split.
pub fn prepared_split(
    recipe: Recipe,
    path: &Path,
    ratio: f64,
    seed: u64,
) -> crate::Result<(Dataset, Dataset, ModelSpec)> {
    let raw = recipe.load(path)?;
    let (data, mut spec) = recipe.prepare(&raw)?;
    let (train, test) = data::split(&data, ratio, seed)?;
    spec.features = train.meta.clone();
    Ok((train, test, spec))
}
