use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{derive_seed, SubjectSpec};

/// Corner frequency of the body-sway low-pass.
const SWAY_CORNER_HZ: f64 = 0.1;

/// Chest displacement `x[m]` in metres for `num_chirps` slow-time samples:
/// breathing fundamental plus harmonics, a heartbeat tone with a
/// seed-dependent phase, and low-passed random-walk sway.
pub fn chest_displacement(subject: &SubjectSpec, num_chirps: usize, chirp_period_s: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xC4E5));
    let heart_phase: f64 = rng.random::<f64>() * TAU;
    let sway = sway_series(subject.posture_jitter_m, num_chirps, chirp_period_s, &mut rng);

    (0..num_chirps)
        .map(|m| {
            let t = m as f64 * chirp_period_s;
            let mut breath = (TAU * subject.br_hz * t).sin();
            for &(h, a) in &subject.breath_harmonics {
                breath += a * (TAU * h as f64 * subject.br_hz * t).sin();
            }
            subject.breath_amplitude_m * breath
                + subject.heart_amplitude_m * (TAU * subject.hr_hz * t + heart_phase).sin()
                + sway[m]
        })
        .collect()
}

fn sway_series(std_m: f64, len: usize, dt: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if std_m == 0.0 || len < 2 {
        return vec![0.0; len];
    }
    let alpha = 1.0 - (-TAU * SWAY_CORNER_HZ * dt).exp();
    let mut walk = 0.0;
    let mut smooth = 0.0;
    let mut out: Vec<f64> = (0..len)
        .map(|_| {
            let step: f64 = rng.sample(StandardNormal);
            walk += step;
            smooth += alpha * (walk - smooth);
            smooth
        })
        .collect();
    let mean = out.iter().sum::<f64>() / len as f64;
    let var = out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len as f64;
    let scale = if var > 0.0 { std_m / var.sqrt() } else { 0.0 };
    for v in &mut out {
        *v = (*v - mean) * scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex, FftPlanner};

    fn quiet(br: f64) -> SubjectSpec {
        SubjectSpec {
            br_hz: br,
            breath_harmonics: vec![],
            heart_amplitude_m: 0.0,
            posture_jitter_m: 0.0,
            ..SubjectSpec::default()
        }
    }

    fn spectrum(x: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf.iter().take(x.len() / 2).map(|c| c.norm()).collect()
    }

    #[test]
    fn zero_amplitudes_give_zero_series() {
        let s = SubjectSpec {
            breath_amplitude_m: 0.0,
            heart_amplitude_m: 0.0,
            posture_jitter_m: 0.0,
            ..SubjectSpec::default()
        };
        assert!(chest_displacement(&s, 512, 0.05, 3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_breathing_tone_peaks_at_expected_bin() {
        let x = chest_displacement(&quiet(0.25), 512, 0.05, 1);
        let spec = spectrum(&x);
        let peak = (1..spec.len()).max_by(|&a, &b| spec[a].total_cmp(&spec[b])).unwrap();
        assert_eq!(peak, (0.25f64 * 512.0 * 0.05).round() as usize);
    }

    #[test]
    fn harmonic_ratio_visible_in_spectrum() {
        // 0.25 Hz over 25.6 s is 6.4 cycles: use 1024 samples at 0.05 s
        // (51.2 s, 12.8 cycles) and a bin-aligned duration instead.
        let s = SubjectSpec { breath_harmonics: vec![(2, 0.3)], ..quiet(0.25) };
        let x = chest_displacement(&s, 800, 0.05, 1);
        let spec = spectrum(&x);
        // 40 s window: 0.25 Hz -> bin 10, 0.5 Hz -> bin 20
        let ratio = spec[20] / spec[10];
        assert!((ratio - 0.3).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn deterministic_in_seed_and_sway_scaled() {
        let s = SubjectSpec { posture_jitter_m: 5e-4, ..SubjectSpec::default() };
        let a = chest_displacement(&s, 512, 0.05, 11);
        let b = chest_displacement(&s, 512, 0.05, 11);
        let c = chest_displacement(&s, 512, 0.05, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sway = sway_series(5e-4, 512, 0.05, &mut rng);
        let var = sway.iter().map(|v| v * v).sum::<f64>() / 512.0;
        assert!((var.sqrt() - 5e-4).abs() < 1e-12);
    }
}
