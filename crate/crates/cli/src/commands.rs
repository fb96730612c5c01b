use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use nlsurr::dataset::{FilterMode, FilterSpec};
use nlsurr::pipeline::{self, RunConfig};
use nlsurr::rnn::{train, ReportSidecar, TrainReport};
use nlsurr::stats::verdict_from_curves;
use nlsurr::Error;

#[derive(Parser, Debug)]
#[command(name = "nlsurr", version, about = "Detect dynamical nonlinearity by classifying series against their surrogates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate realizations of a system or windows of a recorded series.
    Generate(GenerateArgs),
    /// Make one surrogate per realization.
    Surrogate(SurrogateArgs),
    /// Pair realizations with surrogates and split into train/validation/test.
    Dataset(DatasetArgs),
    /// Train the recurrent classifier on a dataset.
    Train(TrainArgs),
    /// Print the representative accuracy and binomial verdict of a training report.
    Report(ReportArgs),
    /// Run every stage from one configuration.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Default)]
pub struct SourceArgs {
    /// logistic, henon, lorenz, rossler, chua, ar1 or file
    #[arg(long)]
    system: Option<String>,
    /// Recorded series for `--system file`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// column or row
    #[arg(long)]
    input_format: Option<String>,
    /// independent or windowed
    #[arg(long)]
    mode: Option<String>,
    /// AR coefficient for ar1.
    #[arg(long)]
    alpha: Option<f64>,
    /// Sampling interval for flows.
    #[arg(long)]
    dt: Option<f64>,
    /// Realization length.
    #[arg(long = "L")]
    len: Option<usize>,
    /// Number of realizations.
    #[arg(long = "N")]
    count: Option<usize>,
    /// Low-pass cutoff in Hz.
    #[arg(long)]
    filter_cutoff: Option<f64>,
    /// Sampling rate in Hz, required with a cutoff.
    #[arg(long)]
    sampling_rate: Option<f64>,
    /// Filter both ways instead of a single causal pass.
    #[arg(long)]
    zero_phase: bool,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SurrogateOpts {
    /// shuffle, ft, aaft or iaaft
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SurrogateArgs {
    /// Realization CSV.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    opts: SurrogateOpts,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DatasetArgs {
    /// Realization CSV.
    #[arg(long)]
    input: PathBuf,
    /// Precomputed surrogates; generated when absent.
    #[arg(long)]
    surrogates: Option<PathBuf>,
    /// Filter spec JSON applied to every realization before pairing.
    #[arg(long)]
    filter: Option<PathBuf>,
    #[command(flatten)]
    opts: SurrogateOpts,
    /// Keep raw amplitudes instead of z-scoring each series.
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct TrainOpts {
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Global gradient-norm clip.
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Disable gradient clipping.
    #[arg(long, conflicts_with = "clip_norm")]
    no_clip: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset CSV with its .json sidecar alongside.
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    opts: TrainOpts,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Training report CSV.
    #[arg(long)]
    report: PathBuf,
    /// Test-set size; read from the report's .json sidecar when absent.
    #[arg(long)]
    n_test: Option<u64>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    surrogate: SurrogateOpts,
    #[command(flatten)]
    train: TrainOpts,
    #[arg(long)]
    no_standardize: bool,
    #[arg(long)]
    significance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to a run-named folder under the output root.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output_root() -> PathBuf {
    std::env::var_os("NLSURR_OUTPUT_ROOT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("nlsurr-out"))
}

fn out_dir(explicit: Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let dir = explicit.unwrap_or_else(|| output_root().join(default_name));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).map_err(io_category)?;
    Ok(dir)
}

/// Keeps the io category on errors wrapped with context.
fn io_category(e: anyhow::Error) -> anyhow::Error {
    match e.downcast::<std::io::Error>() {
        Ok(io) => Error::Io(io).into(),
        Err(other) => other,
    }
}

macro_rules! set {
    ($cfg:ident . $field:ident, $value:expr) => {
        if let Some(v) = $value {
            $cfg.$field = v;
        }
    };
}

impl SourceArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set!(cfg.system, self.system);
        if self.input.is_some() {
            cfg.input = self.input;
        }
        set!(cfg.input_format, self.input_format);
        if self.mode.is_some() {
            cfg.mode = self.mode;
        }
        set!(cfg.alpha, self.alpha);
        if self.dt.is_some() {
            cfg.dt = self.dt;
        }
        set!(cfg.len, self.len);
        set!(cfg.count, self.count);
        if self.filter_cutoff.is_some() {
            cfg.filter_cutoff_hz = self.filter_cutoff;
        }
        if self.sampling_rate.is_some() {
            cfg.sampling_rate_hz = self.sampling_rate;
        }
        if self.zero_phase {
            cfg.filter_mode = FilterMode::ZeroPhase;
        }
    }
}

impl SurrogateOpts {
    fn apply(self, cfg: &mut RunConfig) {
        set!(cfg.surrogate, self.algorithm);
        set!(cfg.max_iter, self.max_iter);
        set!(cfg.tolerance, self.tolerance);
    }
}

impl TrainOpts {
    fn apply(self, cfg: &mut RunConfig) {
        set!(cfg.hidden, self.hidden);
        set!(cfg.epochs, self.epochs);
        set!(cfg.batch_size, self.batch_size);
        set!(cfg.lr, self.lr);
        if self.clip_norm.is_some() {
            cfg.clip_norm = self.clip_norm;
        }
        if self.no_clip {
            cfg.clip_norm = None;
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Surrogate(a) => surrogate(a),
        Command::Dataset(a) => dataset(a),
        Command::Train(a) => train_cmd(a),
        Command::Report(a) => report(a),
        Command::Pipeline(a) => run_pipeline(a),
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    a.source.apply(&mut cfg);
    set!(cfg.seed, a.seed);
    if cfg.len < 8 {
        return Err(Error::Config(format!("L must be at least 8, got {}", cfg.len)).into());
    }
    if !cfg.is_file_source() {
        nlsurr::dynsys::SystemSpec::<f64>::by_name(&cfg.system)?;
    }
    let dir = out_dir(a.out, &format!("generate_{}_L{}_N{}_seed{}", cfg.system, cfg.len, cfg.count, cfg.seed))?;
    let (series, meta) = pipeline::generate(&cfg, cfg.seeds().generation)?;
    pipeline::write_realizations(&dir, &series, &meta)?;
    println!("{}", dir.join("realizations.csv").display());
    Ok(())
}

fn surrogate(a: SurrogateArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    a.opts.apply(&mut cfg);
    set!(cfg.seed, a.seed);
    let scfg = cfg.surrogate_config(cfg.seeds().surrogate)?;
    scfg.validate()?;
    let originals = pipeline::read_realizations(&a.input)?;
    let dir = out_dir(a.out, "surrogate")?;
    let (surr, rep) = pipeline::surrogate_stage(&originals, &scfg)?;
    pipeline::write_surrogates(&dir, &surr, &rep)?;
    println!("{}", dir.join("surrogates.csv").display());
    Ok(())
}

fn dataset(a: DatasetArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    a.opts.apply(&mut cfg);
    set!(cfg.seed, a.seed);
    cfg.standardize = !a.no_standardize;
    let seeds = cfg.seeds();
    let scfg = cfg.surrogate_config(seeds.surrogate)?;
    scfg.validate()?;
    let filter: Option<FilterSpec> = match &a.filter {
        Some(p) => Some(serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| Error::Config(format!("filter spec: {e}")))?),
        None => None,
    };
    let mut originals = pipeline::read_realizations(&a.input)?;
    if let Some(spec) = &filter {
        originals = originals
            .iter()
            .map(|s| nlsurr::dataset::butterworth_lowpass(s, spec))
            .collect::<nlsurr::Result<_>>()?;
    }
    let surrogates = match &a.surrogates {
        Some(p) => pipeline::read_realizations(p)?,
        None => pipeline::surrogate_stage(&originals, &scfg)?.0,
    };
    let ds = pipeline::build_labeled(&originals, &surrogates, &cfg, &scfg, &seeds, filter)?;
    let dir = out_dir(a.out, "dataset")?;
    pipeline::write_dataset(&dir, &ds)?;
    println!("{}", dir.join("dataset.csv").display());
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let mut cfg = RunConfig::default();
    a.opts.apply(&mut cfg);
    set!(cfg.seed, a.seed);
    let tcfg = cfg.train_config(&cfg.seeds());
    tcfg.validate()?;
    let ds = pipeline::read_dataset(&a.dataset)?;
    let dir = out_dir(a.out, "train")?;
    let outcome = train(&ds, &tcfg)?;
    pipeline::write_training(&dir, &outcome)?;
    println!("{}", dir.join("train_report.csv").display());
    Ok(())
}

fn n_test_from_sidecar(csv: &Path) -> Result<u64> {
    let side = csv.with_extension("json");
    let text = fs::read_to_string(&side).map_err(|_| {
        Error::Usage(format!("no --n-test given and no sidecar at {}", side.display()))
    })?;
    let s: ReportSidecar = serde_json::from_str(&text).map_err(Error::Json)?;
    Ok(s.settings.n_test as u64)
}

fn report(a: ReportArgs) -> Result<()> {
    let rep = TrainReport::<f64>::read_csv(&a.report)?;
    let n_test = match a.n_test {
        Some(n) => n,
        None => n_test_from_sidecar(&a.report)?,
    };
    let v = verdict_from_curves(&rep.train_loss_smooth, &rep.val_loss_smooth, &rep.test_acc_smooth, n_test, a.significance)?;
    println!("{}", serde_json::to_string(&v)?);
    Ok(())
}

fn run_pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    a.source.apply(&mut cfg);
    a.surrogate.apply(&mut cfg);
    a.train.apply(&mut cfg);
    if a.no_standardize {
        cfg.standardize = false;
    }
    set!(cfg.significance, a.significance);
    set!(cfg.seed, a.seed);
    cfg.validate()?;
    let dir = out_dir(a.out, &cfg.run_name())?;
    let out = pipeline::run_pipeline(&cfg, &dir)?;
    println!("{}", serde_json::to_string(&out.verdict)?);
    Ok(())
}

