use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::AdamConfig;
use crate::error::{Error, Result};
use crate::scalar::{fmt17, Scalar};
use crate::stats::{representative_from_curves, smooth};

const HEADER: &str = "epoch,train_loss,val_loss,test_acc,train_loss_s5,val_loss_s5,test_acc_s5";

/// Hyperparameters, seeds and split sizes of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSettings {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub smoothing_window: usize,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
}

/// Per-epoch curves. Index `i` holds epoch `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport<T> {
    pub train_loss: Vec<T>,
    pub val_loss: Vec<T>,
    pub test_acc: Vec<T>,
    pub train_loss_smooth: Vec<T>,
    pub val_loss_smooth: Vec<T>,
    pub test_acc_smooth: Vec<T>,
    /// Absent when the report was read back from a bare CSV.
    pub settings: Option<TrainSettings>,
}

/// JSON sidecar written next to the report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSidecar {
    #[serde(flatten)]
    pub settings: TrainSettings,
    pub representative_epoch: Option<usize>,
    pub representative_accuracy: Option<f64>,
}

impl<T: Scalar> TrainReport<T> {
    /// Builds a report from raw curves, smoothing each with `window`.
    pub fn from_curves(
        train_loss: Vec<T>,
        val_loss: Vec<T>,
        test_acc: Vec<T>,
        window: usize,
        settings: Option<TrainSettings>,
    ) -> Result<Self> {
        if train_loss.len() != val_loss.len() || train_loss.len() != test_acc.len() {
            return Err(Error::Length("training curves differ in length".into()));
        }
        let sm = |c: &[T]| if c.is_empty() { Ok(Vec::new()) } else { smooth(c, window) };
        Ok(Self {
            train_loss_smooth: sm(&train_loss)?,
            val_loss_smooth: sm(&val_loss)?,
            test_acc_smooth: sm(&test_acc)?,
            train_loss,
            val_loss,
            test_acc,
            settings,
        })
    }

    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// 1-based epoch with the lowest smoothed train + validation loss, and the
    /// smoothed test accuracy there.
    pub fn representative(&self) -> Option<(usize, T)> {
        representative_from_curves(&self.train_loss_smooth, &self.val_loss_smooth, &self.test_acc_smooth)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "{HEADER}")?;
        for i in 0..self.epochs() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                i + 1,
                fmt17(self.train_loss[i]),
                fmt17(self.val_loss[i]),
                fmt17(self.test_acc[i]),
                fmt17(self.train_loss_smooth[i]),
                fmt17(self.val_loss_smooth[i]),
                fmt17(self.test_acc_smooth[i]),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            _ => return Err(Error::Parse { line: 1, msg: format!("expected header `{HEADER}`") }),
        }
        let mut cols: [Vec<T>; 6] = Default::default();
        for (i, line) in lines {
            let ln = i + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(Error::Parse { line: ln, msg: format!("expected 7 fields, got {}", fields.len()) });
            }
            if fields[0].parse::<usize>().ok() != Some(cols[0].len() + 1) {
                return Err(Error::Parse { line: ln, msg: format!("epochs must count up from 1, got `{}`", fields[0]) });
            }
            for (c, f) in cols.iter_mut().zip(&fields[1..]) {
                let v: f64 = f.parse().map_err(|_| Error::Parse { line: ln, msg: format!("`{f}` is not a number") })?;
                c.push(T::of(v));
            }
        }
        let [train_loss, val_loss, test_acc, train_loss_smooth, val_loss_smooth, test_acc_smooth] = cols;
        Ok(Self { train_loss, val_loss, test_acc, train_loss_smooth, val_loss_smooth, test_acc_smooth, settings: None })
    }

    pub fn sidecar(&self) -> Option<ReportSidecar> {
        let rep = self.representative();
        self.settings.map(|settings| ReportSidecar {
            settings,
            representative_epoch: rep.map(|r| r.0),
            representative_accuracy: rep.map(|r| r.1.to_f64_lossy()),
        })
    }
}
