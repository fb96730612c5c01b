use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::filter::FilterSpec;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::{fmt17, Scalar};
use crate::series::TimeSeries;
use crate::spectral::{surrogate, SurrogateConfig, SurrogateResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Usage(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item<T> {
    pub pair_id: usize,
    /// 1 for an original realization, 0 for its surrogate.
    pub label: u8,
    pub split: Split,
    pub values: Vec<T>,
}

/// Pair counts per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    /// Test gets `floor(test_frac * pairs)`, validation gets
    /// `floor(val_frac * remaining)`, train keeps the rest. Each split keeps
    /// at least one pair.
    pub fn for_pairs(pairs: usize, train_frac: f64, val_frac_of_train: f64) -> Result<Self> {
        if pairs < 3 {
            return Err(Error::Split(format!("need at least 3 pairs to split, got {pairs}")));
        }
        if !(train_frac > 0.0 && train_frac < 1.0) || !(val_frac_of_train > 0.0 && val_frac_of_train < 1.0) {
            return Err(Error::Split(format!(
                "fractions must lie in (0, 1), got train {train_frac} and validation {val_frac_of_train}"
            )));
        }
        // small epsilon so 0.25 * 1000 is not floored to 249 by rounding
        let test = (((1.0 - train_frac) * pairs as f64 + 1e-9).floor() as usize).clamp(1, pairs - 2);
        let pool = pairs - test;
        let validation = ((val_frac_of_train * pool as f64 + 1e-9).floor() as usize).clamp(1, pool - 1);
        Ok(Self { train: pool - validation, validation, test })
    }
}

/// Sidecar metadata for a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "N")]
    pub pairs: usize,
    pub surrogate: SurrogateConfig,
    pub standardized: bool,
    #[serde(default)]
    pub split_seed: Option<u64>,
    #[serde(default)]
    pub split_sizes: Option<SplitSizes>,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    /// Original then surrogate for each pair, pairs in id order.
    pub items: Vec<Item<T>>,
    pub meta: DatasetMeta,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.meta.len
    }

    pub fn pair_count(&self) -> usize {
        self.meta.pairs
    }

    pub fn split_items(&self, split: Split) -> impl Iterator<Item = &Item<T>> {
        self.items.iter().filter(move |it| it.split == split)
    }

    /// `(sequence, target)` pairs ready for training or evaluation.
    pub fn examples(&self, split: Split) -> Vec<(&[T], T)> {
        self.split_items(split).map(|it| (it.values.as_slice(), T::of(it.label as f64))).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.split_items(split).count()
    }

    pub fn label_mean(&self, split: Option<Split>) -> f64 {
        let (sum, n) = self
            .items
            .iter()
            .filter(|it| split.is_none_or(|s| it.split == s))
            .fold((0usize, 0usize), |(s, n), it| (s + it.label as usize, n + 1));
        sum as f64 / n as f64
    }

    /// Writes `pair_id,label,split,s_0,...` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        let mut header = String::from("pair_id,label,split");
        for i in 0..self.meta.len {
            header.push_str(&format!(",s_{i}"));
        }
        writeln!(w, "{header}")?;
        for it in &self.items {
            write!(w, "{},{},{}", it.pair_id, it.label, it.split)?;
            for &v in &it.values {
                write!(w, ",{}", fmt17(v))?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_meta(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(&self.meta)? + "\n")?;
        Ok(())
    }

    /// Reads a dataset CSV with its metadata.
    pub fn read_csv(path: impl AsRef<Path>, meta: DatasetMeta) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.starts_with("pair_id,label,split") => {}
            _ => return Err(Error::Parse { line: 1, msg: "missing dataset header".into() }),
        }
        let mut items = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let ln = i + 1;
            let bad = |msg: String| Error::Parse { line: ln, msg };
            let mut fields = line.split(',');
            let mut next = || fields.next().ok_or_else(|| bad("too few fields".into()));
            let pair_id = next()?.trim().parse().map_err(|_| bad("bad pair_id".into()))?;
            let label = match next()?.trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(format!("bad label `{other}`"))),
            };
            let split: Split = next()?.trim().parse().map_err(|e: Error| bad(e.to_string()))?;
            let values = fields
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(T::of)
                        .ok_or_else(|| bad(format!("bad value `{f}`")))
                })
                .collect::<Result<Vec<T>>>()?;
            if values.len() != meta.len {
                return Err(bad(format!("expected {} values, got {}", meta.len, values.len())));
            }
            items.push(Item { pair_id, label, split, values });
        }
        let ds = Self { items, meta };
        ds.check()?;
        Ok(ds)
    }

    /// Verifies pairing and split consistency.
    pub fn check(&self) -> Result<()> {
        if self.items.len() != 2 * self.meta.pairs {
            return Err(Error::Length(format!("{} items for {} pairs", self.items.len(), self.meta.pairs)));
        }
        for (p, pair) in self.items.chunks(2).enumerate() {
            let ok = pair[0].pair_id == p
                && pair[1].pair_id == p
                && pair[0].label == 1
                && pair[1].label == 0
                && pair[0].split == pair[1].split;
            if !ok {
                return Err(Error::Split(format!("pair {p} is malformed")));
            }
        }
        Ok(())
    }
}

fn sorted<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    s
}

/// Population z-score. Mean and deviation are accumulated over the sorted
/// values, so two series with the same multiset of values are standardized
/// with bit-identical constants.
pub fn standardize_values<T: Scalar>(x: &[T]) -> Vec<T> {
    let s = sorted(x);
    let n = T::of_usize(s.len());
    let mean = s.iter().copied().sum::<T>() / n;
    let var = s.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let sd = var.sqrt();
    if !(sd > T::zero()) || s[0] == s[s.len() - 1] {
        return vec![T::zero(); x.len()];
    }
    x.iter().map(|&v| (v - mean) / sd).collect()
}

pub fn standardize<T: Scalar>(series: &TimeSeries<T>) -> Result<TimeSeries<T>> {
    if series.len() < 2 {
        return Err(Error::Length(format!("standardization needs at least 2 samples, got {}", series.len())));
    }
    let mut out = TimeSeries::new(standardize_values(series.samples()))?.with_meta(series.meta().clone());
    if let Some(dt) = series.dt() {
        out = out.with_dt(dt);
    }
    Ok(out)
}

fn common_len<T: Scalar>(originals: &[TimeSeries<T>]) -> Result<usize> {
    let first = originals.first().ok_or_else(|| Error::Length("no realizations".into()))?;
    let len = first.len();
    if let Some((i, s)) = originals.iter().enumerate().find(|(_, s)| s.len() != len) {
        return Err(Error::Length(format!("realization {i} has length {}, expected {len}", s.len())));
    }
    Ok(len)
}

/// Surrogate of pair `i` comes from stream `i` of `config.seed`.
pub fn pair_surrogates<T: Scalar>(
    originals: &[TimeSeries<T>],
    config: &SurrogateConfig,
) -> Result<Vec<SurrogateResult<T>>> {
    common_len(originals)?;
    config.validate()?;
    originals
        .par_iter()
        .enumerate()
        .map(|(i, s)| surrogate(s, config, i as u64).map_err(|e| Error::Surrogate { pair: i, source: Box::new(e) }))
        .collect()
}

/// Pairs originals with precomputed surrogates. Every item starts in the train split.
pub fn assemble_dataset<T: Scalar>(
    originals: &[TimeSeries<T>],
    surrogates: &[TimeSeries<T>],
    config: &SurrogateConfig,
    standardized: bool,
) -> Result<LabeledDataset<T>> {
    let len = common_len(originals)?;
    if surrogates.len() != originals.len() {
        return Err(Error::Length(format!("{} surrogates for {} originals", surrogates.len(), originals.len())));
    }
    let prep = |s: &TimeSeries<T>| -> Result<Vec<T>> {
        if s.len() != len {
            return Err(Error::Length(format!("surrogate length {} differs from {len}", s.len())));
        }
        Ok(if standardized { standardize(s)?.into_samples() } else { s.samples().to_vec() })
    };
    let mut items = Vec::with_capacity(2 * originals.len());
    for (pair_id, (o, s)) in originals.iter().zip(surrogates).enumerate() {
        items.push(Item { pair_id, label: 1, split: Split::Train, values: prep(o)? });
        items.push(Item { pair_id, label: 0, split: Split::Train, values: prep(s)? });
    }
    Ok(LabeledDataset {
        items,
        meta: DatasetMeta {
            len,
            pairs: originals.len(),
            surrogate: *config,
            standardized,
            split_seed: None,
            split_sizes: None,
            filter: None,
        },
    })
}

/// Surrogates every original and standardizes both members of each pair.
pub fn build_dataset<T: Scalar>(originals: &[TimeSeries<T>], config: &SurrogateConfig) -> Result<LabeledDataset<T>> {
    let surr: Vec<TimeSeries<T>> = pair_surrogates(originals, config)?.into_iter().map(|r| r.surrogate).collect();
    assemble_dataset(originals, &surr, config, true)
}

/// Assigns whole pairs to splits from a seeded permutation of pair ids.
pub fn split_dataset<T: Scalar>(
    dataset: &LabeledDataset<T>,
    train_frac: f64,
    val_frac_of_train: f64,
    seed: u64,
) -> Result<LabeledDataset<T>> {
    if dataset.is_empty() {
        return Err(Error::Split("dataset is empty".into()));
    }
    let sizes = SplitSizes::for_pairs(dataset.pair_count(), train_frac, val_frac_of_train)?;
    let mut order: Vec<usize> = (0..dataset.pair_count()).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let mut tag = vec![Split::Train; dataset.pair_count()];
    for (rank, &p) in order.iter().enumerate() {
        tag[p] = if rank < sizes.test {
            Split::Test
        } else if rank < sizes.test + sizes.validation {
            Split::Validation
        } else {
            Split::Train
        };
    }
    let mut out = dataset.clone();
    for it in &mut out.items {
        it.split = tag[it.pair_id];
    }
    out.meta.split_seed = Some(seed);
    out.meta.split_sizes = Some(sizes);
    Ok(out)
}
