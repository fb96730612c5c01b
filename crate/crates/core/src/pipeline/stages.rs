use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, StageSeeds};
use crate::dataset::{
    assemble_dataset, butterworth_lowpass, load_series, pair_surrogates, read_matrix_csv, split_dataset,
    write_matrix_csv, DatasetMeta, FilterSpec, LabeledDataset, RealizationMeta, Split,
};
use crate::dynsys::{make_realizations, RealizationMode, Source};
use crate::error::{Error, Result};
use crate::rnn::{train, RnnModel, TrainOutcome, TrainReport};
use crate::series::TimeSeries;
use crate::spectral::{spectral_discrepancy, SurrogateConfig};
use crate::stats::{verdict_from_curves, BinomialTestResult};

/// Every file a pipeline run writes, in the order it writes them.
pub const FILES: &[&str] = &[
    "config.json",
    "realizations.csv",
    "realizations.json",
    "surrogates.csv",
    "surrogate_report.json",
    "dataset.csv",
    "dataset.json",
    "model.json",
    "model_final.json",
    "train_report.csv",
    "train_report.json",
    "verdict.json",
];

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn write_json_line<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    fs::write(path, serde_json::to_string(value)? + "\n")?;
    Ok(())
}

/// Realizations for `cfg`, drawn with `seed`.
pub fn generate(cfg: &RunConfig, seed: u64) -> Result<(Vec<TimeSeries<f64>>, RealizationMeta)> {
    let mode = cfg.realization_mode()?;
    let filter = cfg.filter_spec()?;
    let (series, system) = if cfg.is_file_source() {
        let path = cfg.input.as_ref().ok_or_else(|| Error::Config("system `file` needs `input`".into()))?;
        let mut record = load_series::<f64>(path, cfg.input_format.parse()?)?;
        if let Some(spec) = &filter {
            record = butterworth_lowpass(&record, spec)?;
        }
        let name = record.meta().system.clone();
        (make_realizations(Source::Record(&record), cfg.len, cfg.count, mode, seed)?, name)
    } else {
        let spec = cfg.system_spec()?;
        let mut out = make_realizations(Source::System(spec), cfg.len, cfg.count, mode, seed)?;
        if let Some(spec) = &filter {
            out = out.iter().map(|s| butterworth_lowpass(s, spec)).collect::<Result<_>>()?;
        }
        (out, spec.name().to_string())
    };
    let mut params: BTreeMap<String, f64> = series[0].meta().params.clone();
    params.retain(|k, _| k != "index" && k != "start");
    let meta = RealizationMeta {
        system,
        params,
        seed,
        len: cfg.len,
        count: cfg.count,
        mode: match mode {
            RealizationMode::Independent => "independent".into(),
            RealizationMode::Windowed => "windowed".into(),
        },
        dt: series[0].dt(),
    };
    Ok((series, meta))
}

pub fn write_realizations(dir: &Path, series: &[TimeSeries<f64>], meta: &RealizationMeta) -> Result<()> {
    write_matrix_csv(dir.join("realizations.csv"), series)?;
    write_json(dir.join("realizations.json"), meta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Normalized amplitude-spectrum discrepancy to the original.
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateReport {
    pub config: SurrogateConfig,
    pub pairs: usize,
    pub converged: usize,
    pub mean_iterations: f64,
    pub mean_discrepancy: Option<f64>,
    pub max_discrepancy: Option<f64>,
    pub per_pair: Vec<PairSummary>,
}

/// One surrogate per original, with a summary of how well each matched.
pub fn surrogate_stage(
    originals: &[TimeSeries<f64>],
    config: &SurrogateConfig,
) -> Result<(Vec<TimeSeries<f64>>, SurrogateReport)> {
    let results = pair_surrogates(originals, config)?;
    let per_pair: Vec<PairSummary> = results
        .iter()
        .zip(originals)
        .enumerate()
        .map(|(pair, (r, o))| PairSummary {
            pair,
            iterations: r.iterations,
            converged: r.converged,
            discrepancy: spectral_discrepancy(o.samples(), r.surrogate.samples()).ok(),
        })
        .collect();
    let ds: Vec<f64> = per_pair.iter().filter_map(|p| p.discrepancy).collect();
    let report = SurrogateReport {
        config: *config,
        pairs: per_pair.len(),
        converged: per_pair.iter().filter(|p| p.converged).count(),
        mean_iterations: per_pair.iter().map(|p| p.iterations as f64).sum::<f64>() / per_pair.len() as f64,
        mean_discrepancy: (!ds.is_empty()).then(|| ds.iter().sum::<f64>() / ds.len() as f64),
        max_discrepancy: ds.iter().copied().reduce(f64::max),
        per_pair,
    };
    Ok((results.into_iter().map(|r| r.surrogate).collect(), report))
}

pub fn write_surrogates(dir: &Path, surrogates: &[TimeSeries<f64>], report: &SurrogateReport) -> Result<()> {
    write_matrix_csv(dir.join("surrogates.csv"), surrogates)?;
    write_json(dir.join("surrogate_report.json"), report)
}

/// Pairs, standardizes (if configured) and splits.
pub fn build_labeled(
    originals: &[TimeSeries<f64>],
    surrogates: &[TimeSeries<f64>],
    cfg: &RunConfig,
    surrogate: &SurrogateConfig,
    seeds: &StageSeeds,
    filter: Option<FilterSpec>,
) -> Result<LabeledDataset<f64>> {
    let ds = assemble_dataset(originals, surrogates, surrogate, cfg.standardize)?;
    let mut ds = split_dataset(&ds, cfg.train_frac, cfg.val_frac, seeds.split)?;
    ds.meta.filter = filter;
    Ok(ds)
}

pub fn write_dataset(dir: &Path, ds: &LabeledDataset<f64>) -> Result<()> {
    ds.write_csv(dir.join("dataset.csv"))?;
    ds.write_meta(dir.join("dataset.json"))
}

/// Reads `dataset.csv` with the `.json` sidecar next to it.
pub fn read_dataset(csv: &Path) -> Result<LabeledDataset<f64>> {
    let sidecar = csv.with_extension("json");
    let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(&sidecar).map_err(|e| {
        Error::Config(format!("dataset sidecar {} unreadable: {e}", sidecar.display()))
    })?)?;
    LabeledDataset::read_csv(csv, meta)
}

pub fn write_training(dir: &Path, outcome: &TrainOutcome<f64>) -> Result<()> {
    fs::write(dir.join("model.json"), outcome.representative_model().to_json())?;
    fs::write(dir.join("model_final.json"), outcome.final_model().to_json())?;
    outcome.report.write_csv(dir.join("train_report.csv"))?;
    if let Some(side) = outcome.report.sidecar() {
        write_json(dir.join("train_report.json"), &side)?;
    }
    Ok(())
}

/// Final one-line record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineVerdict {
    pub system: String,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub n_test: usize,
    pub representative_epoch: usize,
    pub representative_accuracy: f64,
    pub final_accuracy: f64,
    pub binomial: BinomialTestResult,
}

pub struct PipelineOutput {
    pub dir: PathBuf,
    pub verdict: PipelineVerdict,
    pub report: TrainReport<f64>,
    pub model: RnnModel<f64>,
}

/// Runs every stage and writes [`FILES`] into `out_dir`.
pub fn run_pipeline(cfg: &RunConfig, out_dir: impl AsRef<Path>) -> Result<PipelineOutput> {
    cfg.validate()?;
    let dir = out_dir.as_ref().to_path_buf();
    let seeds = cfg.seeds();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), cfg.frozen_json()?)?;

    let (originals, rmeta) = generate(cfg, seeds.generation).map_err(Error::stage("generate"))?;
    write_realizations(&dir, &originals, &rmeta).map_err(Error::stage("generate"))?;

    let scfg = cfg.surrogate_config(seeds.surrogate)?;
    let (surrogates, srep) = surrogate_stage(&originals, &scfg).map_err(Error::stage("surrogate"))?;
    write_surrogates(&dir, &surrogates, &srep).map_err(Error::stage("surrogate"))?;

    let ds = build_labeled(&originals, &surrogates, cfg, &scfg, &seeds, cfg.filter_spec()?)
        .map_err(Error::stage("dataset"))?;
    write_dataset(&dir, &ds).map_err(Error::stage("dataset"))?;

    let outcome = train(&ds, &cfg.train_config(&seeds)).map_err(Error::stage("train"))?;
    write_training(&dir, &outcome).map_err(Error::stage("train"))?;

    let n_test = ds.count(Split::Test);
    let report = outcome.report;
    let v = verdict_from_curves(
        &report.train_loss_smooth,
        &report.val_loss_smooth,
        &report.test_acc_smooth,
        n_test as u64,
        cfg.significance,
    )
    .map_err(Error::stage("report"))?;
    let verdict = PipelineVerdict {
        system: rmeta.system,
        len: cfg.len,
        count: cfg.count,
        hidden: cfg.hidden,
        epochs: cfg.epochs,
        n_test,
        representative_epoch: v.representative_epoch,
        representative_accuracy: v.representative_accuracy,
        final_accuracy: *report.test_acc_smooth.last().expect("epochs >= 1"),
        binomial: v.binomial,
    };
    write_json_line(dir.join("verdict.json"), &verdict).map_err(Error::stage("report"))?;
    let model = outcome.snapshots[v.representative_epoch].clone();
    Ok(PipelineOutput { dir, verdict, report, model })
}

/// Reads a realization CSV back as series.
pub fn read_realizations(path: &Path) -> Result<Vec<TimeSeries<f64>>> {
    read_matrix_csv::<f64>(path)?.into_iter().map(TimeSeries::new).collect()
}
