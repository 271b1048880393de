//! Regressors mapping the nine features to breathing and heart rate,
//! their evaluation, and the on-disk model format.

mod dataset;
mod forest;
mod knn;
mod linear;
mod metrics;
mod model_file;

pub use dataset::{generate_dataset, DatasetConfig, LABEL_BR_BRPM, LABEL_HR_BPM};
pub use forest::{ForestModel, Node, Tree};
pub use knn::KnnModel;
pub use linear::LinearModel;
pub use metrics::{evaluate, Metrics};
pub use model_file::{decode_models, encode_models, load_models, save_models, MODEL_MAGIC};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_COUNT};

pub const BR_LABEL_RANGE_BRPM: (f64, f64) = (3.0, 36.0);
pub const HR_LABEL_RANGE_BPM: (f64, f64) = (48.0, 120.0);
pub const KNN_K: usize = 5;
pub const DEFAULT_SPLIT: f64 = 0.8;
const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    pub br_brpm: f64,
    pub hr_bpm: f64,
}

impl LabeledSample {
    pub fn new(features: FeatureVector, br_brpm: f64, hr_bpm: f64) -> Result<Self> {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        if !inside(br_brpm, BR_LABEL_RANGE_BRPM) || !inside(hr_bpm, HR_LABEL_RANGE_BPM) {
            return Err(Error::Param(format!(
                "labels ({br_brpm} BRPM, {hr_bpm} BPM) outside {BR_LABEL_RANGE_BRPM:?} / {HR_LABEL_RANGE_BPM:?}"
            )));
        }
        Ok(Self { features, br_brpm, hr_bpm })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear,
    Knn,
    RandomForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Linear, ModelKind::Knn, ModelKind::RandomForest];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "random_forest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linear" | "lr" => Some(ModelKind::Linear),
            "knn" => Some(ModelKind::Knn),
            "random_forest" | "rf" => Some(ModelKind::RandomForest),
            _ => None,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            ModelKind::Linear => 0,
            ModelKind::Knn => 1,
            ModelKind::RandomForest => 2,
        }
    }

    pub(crate) fn from_tag(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == b)
    }
}

/// Training provenance and the standardization applied before fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub seed: u64,
    pub split: f64,
    pub n_train: usize,
    pub means: [f64; FEATURE_COUNT],
    /// Constant features get 1 so they standardize to 0.
    pub stds: [f64; FEATURE_COUNT],
    pub ridge_raised: bool,
}

impl ModelMeta {
    pub fn standardize(&self, x: &[f64; FEATURE_COUNT]) -> Vec<f64> {
        x.iter().zip(&self.means).zip(&self.stds).map(|((v, m), s)| (v - m) / s).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    Linear(LinearModel),
    Knn(KnnModel),
    Forest(ForestModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub meta: ModelMeta,
    pub regressor: Regressor,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.regressor {
            Regressor::Linear(_) => ModelKind::Linear,
            Regressor::Knn(_) => ModelKind::Knn,
            Regressor::Forest(_) => ModelKind::RandomForest,
        }
    }

    pub fn predict(&self, features: &FeatureVector) -> f64 {
        let x = features.to_array();
        match &self.regressor {
            Regressor::Linear(m) => m.predict(&self.meta.standardize(&x)),
            Regressor::Knn(m) => m.predict(&self.meta.standardize(&x)),
            Regressor::Forest(m) => m.predict(&x),
        }
    }

    pub fn predict_many(&self, features: &[FeatureVector]) -> Vec<f64> {
        features.iter().map(|f| self.predict(f)).collect()
    }
}

/// The BR and HR regressors trained together.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPair {
    pub br: TrainedModel,
    pub hr: TrainedModel,
}

impl ModelPair {
    /// `(BRPM, BPM)`.
    pub fn predict(&self, features: &FeatureVector) -> (f64, f64) {
        (self.br.predict(features), self.hr.predict(features))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub models: ModelPair,
    pub br_metrics: Metrics,
    pub hr_metrics: Metrics,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

fn column_stats(rows: &[[f64; FEATURE_COUNT]]) -> ([f64; FEATURE_COUNT], [f64; FEATURE_COUNT]) {
    let n = rows.len() as f64;
    let mut means = [0.0; FEATURE_COUNT];
    let mut stds = [0.0; FEATURE_COUNT];
    for j in 0..FEATURE_COUNT {
        means[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
        stds[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    (means, stds)
}

/// Fits one regressor of `kind` to `(rows, labels)`.
pub fn fit(kind: ModelKind, rows: &[[f64; FEATURE_COUNT]], labels: &[f64], seed: u64, split: f64) -> Result<TrainedModel> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::Shape(format!("{} feature rows vs {} labels", rows.len(), labels.len())));
    }
    let (means, stds) = column_stats(rows);
    let mut meta = ModelMeta { seed, split, n_train: rows.len(), means, stds, ridge_raised: false };
    let z: Vec<Vec<f64>> = rows.iter().map(|r| meta.standardize(r)).collect();
    let regressor = match kind {
        ModelKind::Linear => {
            let (m, raised) = linear::fit_linear(&z, labels)?;
            meta.ridge_raised = raised;
            Regressor::Linear(m)
        }
        ModelKind::Knn => Regressor::Knn(KnnModel { k: KNN_K, samples: z, labels: labels.to_vec() }),
        ModelKind::RandomForest => {
            let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
            Regressor::Forest(forest::fit_forest(&raw, labels, seed))
        }
    };
    Ok(TrainedModel { meta, regressor })
}

/// Seeded shuffle, `split` fraction for training, metrics on the rest.
pub fn train_model(dataset: &[LabeledSample], kind: ModelKind, split: f64, seed: u64) -> Result<TrainOutcome> {
    if dataset.len() < MIN_SAMPLES {
        return Err(Error::Param(format!("training needs at least {MIN_SAMPLES} samples, got {}", dataset.len())));
    }
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::Param(format!("split must lie in (0, 1), got {split}")));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((split * n as f64).round() as usize).clamp(1, n - 1);
    let (train, test) = order.split_at(n_train);

    let rows = |idx: &[usize]| idx.iter().map(|&i| dataset[i].features.to_array()).collect::<Vec<_>>();
    let (train_rows, test_feats): (Vec<_>, Vec<_>) = (rows(train), test.iter().map(|&i| dataset[i].features).collect::<Vec<_>>());
    let br_train: Vec<f64> = train.iter().map(|&i| dataset[i].br_brpm).collect();
    let hr_train: Vec<f64> = train.iter().map(|&i| dataset[i].hr_bpm).collect();
    let br = fit(kind, &train_rows, &br_train, seed, split)?;
    let hr = fit(kind, &train_rows, &hr_train, crate::scene::derive_seed(seed, 0x4852), split)?;

    let br_test: Vec<f64> = test.iter().map(|&i| dataset[i].br_brpm).collect();
    let hr_test: Vec<f64> = test.iter().map(|&i| dataset[i].hr_bpm).collect();
    let br_metrics = evaluate(&br.predict_many(&test_feats), &br_test)?;
    let hr_metrics = evaluate(&hr.predict_many(&test_feats), &hr_test)?;
    Ok(TrainOutcome {
        models: ModelPair { br, hr },
        br_metrics,
        hr_metrics,
        train_indices: train.to_vec(),
        test_indices: test.to_vec(),
    })
}
