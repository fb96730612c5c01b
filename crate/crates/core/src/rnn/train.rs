use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::model::{bce_loss, bptt_gradients, RnnModel};
use super::report::{TrainReport, TrainSettings};
use crate::dataset::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub smoothing_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            epochs: 400,
            batch_size: 16,
            adam: AdamConfig::default(),
            init_seed: 0,
            shuffle_seed: 0,
            smoothing_window: 5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Parameter("hidden size must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Parameter("batch size must be at least 1".into()));
        }
        if self.smoothing_window == 0 {
            return Err(Error::Parameter("smoothing window must be at least 1".into()));
        }
        let a = &self.adam;
        if !(a.lr > 0.0 && a.lr.is_finite()) {
            return Err(Error::Parameter(format!("learning rate must be positive, got {}", a.lr)));
        }
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.eps > 0.0) {
            return Err(Error::Parameter("Adam betas must lie in [0, 1) and eps must be positive".into()));
        }
        if a.clip_norm.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::Parameter("clip norm must be positive".into()));
        }
        Ok(())
    }
}

pub struct TrainOutcome<T> {
    /// `snapshots[0]` is the initialization, `snapshots[e]` the model after epoch `e`.
    pub snapshots: Vec<RnnModel<T>>,
    pub report: TrainReport<T>,
}

impl<T: Scalar> TrainOutcome<T> {
    pub fn final_model(&self) -> &RnnModel<T> {
        self.snapshots.last().expect("snapshots always hold the initialization")
    }

    /// Snapshot at the representative epoch, or the initialization for an empty run.
    pub fn representative_model(&self) -> &RnnModel<T> {
        let e = self.report.representative().map_or(0, |r| r.0);
        &self.snapshots[e]
    }
}

/// Fraction of items classified correctly, predicting class 1 when `p >= 0.5`.
pub fn evaluate<T: Scalar>(model: &RnnModel<T>, items: &[(&[T], T)]) -> Result<T> {
    if items.is_empty() {
        return Err(Error::Length("cannot evaluate on an empty set".into()));
    }
    let half = T::of(0.5);
    let hits = items
        .par_iter()
        .map(|&(x, y)| model.predict(x).map(|p| ((p >= half) == (y >= half)) as usize))
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok(T::of_usize(hits) / T::of_usize(items.len()))
}

fn mean_loss<T: Scalar>(model: &RnnModel<T>, items: &[(&[T], T)]) -> Result<T> {
    let losses = items
        .par_iter()
        .map(|&(x, y)| model.predict(x).map(|p| bce_loss(p, y)))
        .collect::<Result<Vec<T>>>()?;
    Ok(losses.into_iter().sum::<T>() / T::of_usize(items.len()))
}

/// Mini-batch Adam on the train split. After each epoch the validation loss
/// and test accuracy are recorded; validation items never enter an update.
pub fn train<T: Scalar>(dataset: &LabeledDataset<T>, config: &TrainConfig) -> Result<TrainOutcome<T>> {
    config.validate()?;
    let train_set = dataset.examples(Split::Train);
    let val_set = dataset.examples(Split::Validation);
    let test_set = dataset.examples(Split::Test);
    if train_set.is_empty() || val_set.is_empty() || test_set.is_empty() {
        return Err(Error::Split(format!(
            "training needs nonempty splits, got train {}, validation {}, test {}",
            train_set.len(),
            val_set.len(),
            test_set.len()
        )));
    }

    let mut model = RnnModel::init_uniform(config.hidden, config.init_seed)?;
    let mut opt = AdamState::for_model(&model, config.adam);
    let mut snapshots = Vec::with_capacity(config.epochs + 1);
    snapshots.push(model.clone());
    let (mut train_curve, mut val_curve, mut acc_curve) = (Vec::new(), Vec::new(), Vec::new());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        let diverged = |e: Error| match e {
            Error::Numeric { .. } => Error::Training { epoch },
            other => other,
        };
        order.shuffle(&mut stream_rng(config.shuffle_seed, epoch as u64));
        let mut total = T::zero();
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i]));
            let (grads, loss) = bptt_gradients(&model, &batch).map_err(diverged)?;
            total = total + loss * T::of_usize(chunk.len());
            opt.update(model.params_mut(), &grads.theta);
            if model.params().iter().any(|v| !v.is_finite()) {
                return Err(Error::Training { epoch });
            }
        }
        let train_loss = total / T::of_usize(train_set.len());
        let val_loss = mean_loss(&model, &val_set).map_err(diverged)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Training { epoch });
        }
        train_curve.push(train_loss);
        val_curve.push(val_loss);
        acc_curve.push(evaluate(&model, &test_set).map_err(diverged)?);
        snapshots.push(model.clone());
    }

    let settings = TrainSettings {
        hidden: config.hidden,
        epochs: config.epochs,
        batch_size: config.batch_size,
        adam: config.adam,
        init_seed: config.init_seed,
        shuffle_seed: config.shuffle_seed,
        smoothing_window: config.smoothing_window,
        n_train: train_set.len(),
        n_validation: val_set.len(),
        n_test: test_set.len(),
    };
    let report = TrainReport::from_curves(train_curve, val_curve, acc_curve, config.smoothing_window, Some(settings))?;
    Ok(TrainOutcome { snapshots, report })
}
