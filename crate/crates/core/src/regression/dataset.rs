//! Simulator-generated training sets: random seated subjects pushed
//! through the per-subject estimation chain at their peak bin.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::LabeledSample;
use crate::error::{Error, Result};
use crate::pipeline::analyze_slow_time;
use crate::radar::RadarConfig;
use crate::scene::{derive_seed, synthesize_slow_time, SubjectSpec};
use crate::vmd::VmdParams;

/// Label mean and spread `(mean, std)`, BRPM and BPM.
pub const LABEL_BR_BRPM: (f64, f64) = (18.42, 7.38);
pub const LABEL_HR_BPM: (f64, f64) = (91.98, 9.88);

/// Fraction of the unwrap velocity limit a breathing waveform may use.
const VELOCITY_MARGIN: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub samples: usize,
    pub seed: u64,
    /// Slow-time SNR range at the subject bin, dB.
    pub snr_db: (f64, f64),
    pub radar: RadarConfig,
    pub vmd: VmdParams,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self { samples: 400, seed: 0, snr_db: (10.0, 25.0), radar: RadarConfig::reference(), vmd: VmdParams::default() }
    }
}

fn truncated(rng: &mut ChaCha8Rng, (mean, std): (f64, f64), (lo, hi): (f64, f64)) -> f64 {
    let dist = Normal::new(mean, std).expect("positive spread");
    loop {
        let v = dist.sample(rng);
        if v >= lo && v <= hi {
            return v;
        }
    }
}

/// Random subject with labels drawn from the clinical spread.
fn random_subject(rng: &mut ChaCha8Rng, radar: &RadarConfig) -> SubjectSpec {
    let brpm = truncated(rng, LABEL_BR_BRPM, (4.0, 35.0));
    let bpm = truncated(rng, LABEL_HR_BPM, (50.0, 118.0));
    let br_hz = brpm / 60.0;
    let harmonic = rng.random_range(0.0..0.3);
    // peak chest speed 2π f A (1 + 2h) must stay under λ/(4 T_c)
    let v_max = VELOCITY_MARGIN * radar.wavelength_max_m() / (4.0 * radar.chirp_period_s);
    let a_cap = (v_max / (TAU * br_hz * (1.0 + 2.0 * harmonic))).min(8e-3);
    SubjectSpec {
        range_m: rng.random_range(0.8..3.0),
        azimuth_deg: 0.0,
        br_hz,
        hr_hz: bpm / 60.0,
        breath_amplitude_m: rng.random_range(1.5e-3..a_cap.max(1.6e-3)),
        heart_amplitude_m: rng.random_range(1e-4..4e-4),
        breath_harmonics: vec![(2, harmonic)],
        posture_jitter_m: rng.random_range(0.0..2e-4),
        ..SubjectSpec::default()
    }
}

/// `config.samples` labeled feature vectors. Sample `i` depends only on
/// `(seed, i)`, so the set is the same at any thread count.
pub fn generate_dataset(config: &DatasetConfig) -> Result<Vec<LabeledSample>> {
    if config.samples == 0 {
        return Err(Error::Param("dataset needs at least one sample".into()));
    }
    let fs = config.radar.slow_time_rate_hz();
    (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(config.seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let subject = random_subject(&mut rng, &config.radar);
            let snr = rng.random_range(config.snr_db.0..=config.snr_db.1);
            let slow = synthesize_slow_time(&subject, &config.radar, Some(snr), seed)?;
            let analysis = analyze_slow_time(&slow, fs, &config.vmd)?;
            LabeledSample::new(analysis.features.vector, subject.br_brpm(), subject.hr_bpm())
        })
        .collect()
}
