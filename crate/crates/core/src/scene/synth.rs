use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{chest_displacement, derive_seed, DataCube, SimScene, SubjectSpec};
use crate::error::{Error, Result};
use crate::radar::{angle_resolution, derive_params, RadarConfig};
use crate::real::Real;

const NOISE_TAG: u64 = 0xA5A5_0001;
const MOTION_TAG: u64 = 0x1000;

struct Target {
    amplitude: f64,
    /// `e^{j2π f_b n / f_adc}` for every fast-time sample.
    fast: Vec<Complex<f64>>,
    /// Slow-time phase per chirp, `4π(R + x[m])/λ`.
    slow_phase: Vec<f64>,
    /// Per-channel steering phase step `π sin θ`.
    steer: f64,
}

fn target(config: &RadarConfig, range_m: f64, azimuth_deg: f64, amplitude: f64, displacement: Option<Vec<f64>>) -> Target {
    let f_b = config.beat_frequency(range_m);
    let lambda = config.wavelength_max_m();
    let step = TAU * f_b / config.adc_rate_sps;
    let fast = (0..config.adc_samples).map(|n| Complex::from_polar(1.0, step * n as f64)).collect();
    let slow_phase = match displacement {
        Some(x) => x.iter().map(|xm| 4.0 * PI * (range_m + xm) / lambda).collect(),
        None => vec![4.0 * PI * range_m / lambda; config.num_chirps],
    };
    Target { amplitude, fast, slow_phase, steer: PI * azimuth_deg.to_radians().sin() }
}

/// Per-subject motion stream keyed by the subject's own parameters, so that
/// listing subjects in a different order yields the same cube.
fn motion_tag(s: &SubjectSpec) -> u64 {
    [s.range_m, s.azimuth_deg, s.br_hz, s.hr_hz]
        .iter()
        .fold(MOTION_TAG, |acc, v| derive_seed(acc, v.to_bits()))
}

/// Return amplitude of a subject: reflectivity over range squared.
pub(crate) fn subject_amplitude(s: &SubjectSpec) -> f64 {
    s.rcs_amplitude / (s.range_m * s.range_m)
}

/// Complex noise variance implied by the scene SNR, relative to the
/// strongest subject return (unit reference when there are no subjects).
pub fn noise_variance(scene: &SimScene) -> Option<f64> {
    let snr = scene.snr_db?;
    let reference = scene.subjects.iter().map(subject_amplitude).fold(0.0, f64::max);
    let reference = if reference > 0.0 { reference } else { 1.0 };
    Some(reference * reference / 10f64.powf(snr / 10.0))
}

/// Pairs of subjects closer than one range bin and one angle-resolution
/// cell, which the localizer cannot separate.
pub fn separation_warnings(scene: &SimScene, config: &RadarConfig) -> Vec<String> {
    let bin_m = config.range_of_bin(1);
    let res = angle_resolution(config.n_tx, config.n_rx);
    let mut out = Vec::new();
    for (i, a) in scene.subjects.iter().enumerate() {
        for (j, b) in scene.subjects.iter().enumerate().skip(i + 1) {
            if (a.range_m - b.range_m).abs() < bin_m && (a.azimuth_deg - b.azimuth_deg).abs() < res {
                out.push(format!(
                    "subjects {i} and {j} share a range-azimuth cell ({:.3} m, {:.1} deg apart)",
                    (a.range_m - b.range_m).abs(),
                    (a.azimuth_deg - b.azimuth_deg).abs()
                ));
            }
        }
    }
    out
}

/// Chest displacement `x[m]` of every subject exactly as [`synthesize`]
/// applies it.
pub fn subject_displacements(scene: &SimScene, config: &RadarConfig) -> Vec<Vec<f64>> {
    scene
        .subjects
        .iter()
        .map(|s| chest_displacement(s, config.num_chirps, config.chirp_period_s, derive_seed(scene.seed, motion_tag(s))))
        .collect()
}

/// Synthesizes the multi-channel IF cube for `scene`: every subject and
/// static reflector contributes `A·exp(j(2π f_b n/f_adc + 4π(R + x[m])/λ +
/// π j sin θ))`, followed by complex white noise at the scene SNR.
pub fn synthesize<T: Real>(scene: &SimScene, config: &RadarConfig) -> Result<DataCube<T>> {
    config.validate()?;
    scene.validate()?;
    let limits = derive_params(config)?;
    let check_range = |r: f64, what: String| -> Result<()> {
        if r > limits.r_max_constrained_m {
            Err(Error::Scene(format!(
                "{what} at {r} m is beyond the maximum detectable range {:.3} m",
                limits.r_max_constrained_m
            )))
        } else {
            Ok(())
        }
    };

    let mut targets = Vec::new();
    for ((i, s), x) in scene.subjects.iter().enumerate().zip(subject_displacements(scene, config)) {
        check_range(s.range_m, format!("subject {i}"))?;
        targets.push(target(config, s.range_m, s.azimuth_deg, subject_amplitude(s), Some(x)));
    }
    for (i, r) in scene.clutter.reflectors.iter().enumerate() {
        check_range(r.range_m, format!("reflector {i}"))?;
        targets.push(target(config, r.range_m, r.azimuth_deg, r.amplitude, None));
    }

    let (_, nj, nn) = (config.num_chirps, config.virtual_channels(), config.adc_samples);
    let noise_sigma = noise_variance(scene).map(|v| (v / 2.0).sqrt());
    let noise_seed = derive_seed(scene.seed, NOISE_TAG);

    let mut samples = vec![Complex::new(T::zero(), T::zero()); config.num_chirps * nj * nn];
    samples.par_chunks_mut(nj * nn).enumerate().for_each(|(m, chirp)| {
        let mut acc = vec![Complex::new(0.0f64, 0.0); nj * nn];
        for t in &targets {
            for j in 0..nj {
                let rot = Complex::from_polar(t.amplitude, t.slow_phase[m] + t.steer * j as f64);
                let row = &mut acc[j * nn..(j + 1) * nn];
                for (a, f) in row.iter_mut().zip(&t.fast) {
                    *a += rot * f;
                }
            }
        }
        if let Some(sigma) = noise_sigma {
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            rng.set_stream(m as u64);
            for a in acc.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *a += Complex::new(sigma * re, sigma * im);
            }
        }
        for (dst, src) in chirp.iter_mut().zip(&acc) {
            *dst = Complex::new(T::lit(src.re), T::lit(src.im));
        }
    });
    DataCube::new(*config, samples)
}

/// Slow-time series a single subject produces at its own range-azimuth
/// peak, `exp(j4π(R + x[m])/λ)` plus complex noise at `snr_db`. This is the
/// peak-bin equivalent of [`synthesize`] without the cube, used to build
/// large training sets cheaply.
pub fn synthesize_slow_time(subject: &SubjectSpec, config: &RadarConfig, snr_db: Option<f64>, seed: u64) -> Result<Vec<Complex<f64>>> {
    subject.validate()?;
    let x = chest_displacement(subject, config.num_chirps, config.chirp_period_s, derive_seed(seed, MOTION_TAG));
    let lambda = config.wavelength_max_m();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, NOISE_TAG));
    let sigma = snr_db.map(|s| (0.5 / 10f64.powf(s / 10.0)).sqrt());
    Ok(x
        .iter()
        .map(|xm| {
            let mut v = Complex::from_polar(1.0, 4.0 * PI * (subject.range_m + xm) / lambda);
            if let Some(sigma) = sigma {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                v += Complex::new(sigma * re, sigma * im);
            }
            v
        })
        .collect())
}
