use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use vsm_core::dsp::{fast_time_fft, unwrap_phase, WindowKind};
use vsm_core::fpga::{
    band_scan_estimate, compare_pipelines, cordic_atan2, dequantize, fixed_fft, peak_range, psd, quantize,
    run_fixed_pipeline, stream_unwrap, FixedComplex, FixedFormat, FpgaOptions, PsdMode,
};
use vsm_core::pipeline::PipelineOptions;
use vsm_core::scene::{single_subject_scene, synthesize, SimScene, SubjectSpec};
use vsm_core::RadarConfig;

const Q: FixedFormat = FixedFormat::Q12_20;

fn raw(v: f64) -> i32 {
    quantize(v, Q).unwrap().raw
}

fn fixed_row(values: &[Complex<f64>]) -> Vec<FixedComplex> {
    values.iter().map(|v| Complex::new(raw(v.re), raw(v.im))).collect()
}

fn deq(c: FixedComplex) -> Complex<f64> {
    Complex::new(c.re as f64, c.im as f64) * Q.ulp()
}

fn one_subject(range_m: f64) -> SimScene {
    SimScene { subjects: vec![SubjectSpec { range_m, ..SubjectSpec::default() }], seed: 3, ..SimScene::default() }
}

#[test]
fn quantization_error_is_half_ulp() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(-1.0..=1.0);
        assert!((dequantize(quantize(x, Q).unwrap()) - x).abs() <= (-21f64).exp2());
    }
}

#[test]
fn full_scale_random_fft_snr() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 512;
    let x: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let xq = fixed_row(&x);
    let fixed = fixed_fft(&xq, Q).unwrap();
    let mut oracle: Vec<Complex<f64>> = xq.iter().map(|&c| deq(c)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut oracle);
    let (mut sig, mut err) = (0.0, 0.0);
    for (f, o) in fixed.values.iter().zip(&oracle) {
        let o = o / n as f64;
        sig += o.norm_sqr();
        err += (deq(*f) - o).norm_sqr();
    }
    let snr = 10.0 * (sig / err).log10();
    assert!(snr >= 60.0, "{snr} dB");
    assert_eq!(fixed.saturations, 0);
}

#[test]
fn one_metre_target_peaks_at_bin_17() {
    let config = RadarConfig { num_chirps: 4, ..RadarConfig::reference() };
    let cube = synthesize::<f64>(&one_subject(1.0), &config).unwrap();
    let float = fast_time_fft(cube.row(0, 0), WindowKind::Rectangular).unwrap();
    let mut acc = vec![0i64; config.adc_samples];
    for m in 0..config.num_chirps {
        let spec = fixed_fft(&fixed_row(cube.row(m, 0)), Q).unwrap();
        let p = psd(&spec.values, PsdMode::Magnitude);
        assert!(p.iter().all(|&v| v >= 0));
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    let peak = peak_range(&acc, &config).unwrap().unwrap();
    assert_eq!(peak.bin, 17);
    let float_peak = (0..config.adc_samples / 2)
        .max_by(|&a, &b| float[a].norm().total_cmp(&float[b].norm()))
        .unwrap();
    assert_eq!(float_peak, 17);
    let expect = 17.0 * config.adc_rate_sps / config.adc_samples as f64 * 299_792_458.0 * config.chirp_duration_s
        / (2.0 * config.bandwidth_hz());
    assert!((peak.range_m - expect).abs() < 1e-12 && (peak.range_m - 0.997).abs() < 1e-3);
}

#[test]
fn nearer_of_two_targets_wins() {
    let config = RadarConfig { num_chirps: 4, ..RadarConfig::reference() };
    let scene = SimScene {
        subjects: vec![
            SubjectSpec { range_m: 2.5, ..SubjectSpec::default() },
            SubjectSpec { range_m: 1.2, azimuth_deg: 20.0, ..SubjectSpec::default() },
        ],
        ..SimScene::default()
    };
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let out = run_fixed_pipeline(&cube, &FpgaOptions { chirps: Some(4), ..FpgaOptions::default() }).err();
    // four chirps cannot host a band scan; the range stage alone decides
    assert!(out.is_some());
    let mut acc = vec![0i64; config.adc_samples];
    for m in 0..4 {
        for (a, v) in acc.iter_mut().zip(psd(&fixed_fft(&fixed_row(cube.row(m, 0)), Q).unwrap().values, PsdMode::Magnitude)) {
            *a += v;
        }
    }
    assert_eq!(peak_range(&acc, &config).unwrap().unwrap().bin, config.range_bin(1.2));
}

#[test]
fn all_zero_spectrum_has_no_target() {
    assert!(peak_range(&[0; 64], &RadarConfig::reference()).unwrap().is_none());
}

#[test]
fn cordic_matches_atan2_on_unit_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let a: f64 = rng.random_range(-PI..PI);
        let (re, im) = (quantize(a.cos(), Q).unwrap(), quantize(a.sin(), Q).unwrap());
        let got = dequantize(cordic_atan2(im, re, 24).unwrap().phase);
        let d = (got - dequantize(im).atan2(dequantize(re))).abs();
        worst = worst.max(d.min(TAU - d));
        assert!(got > -PI && got <= PI + Q.ulp());
    }
    assert!(worst <= 1e-5, "{worst}");
}

#[test]
fn unwrap_streams() {
    let (out, _) = stream_unwrap(&[raw(1.25); 40], Q);
    assert!(out.iter().all(|&v| v == raw(1.25)));

    let config = RadarConfig::reference();
    let cube = synthesize::<f64>(&one_subject(1.0), &config).unwrap();
    let fixed = run_fixed_pipeline(&cube, &FpgaOptions::default()).unwrap();
    let oracle = unwrap_phase(&fixed.phase.iter().map(|&p| p as f64 * Q.ulp()).collect::<Vec<_>>()).unwrap();
    let worst = fixed.unwrapped.iter().zip(&oracle).map(|(&u, o)| (u as f64 * Q.ulp() - o).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-4, "{worst}");
    let swing = oracle.iter().cloned().fold(f64::MIN, f64::max) - oracle.iter().cloned().fold(f64::MAX, f64::min);
    assert!(swing > TAU, "stream should cross the branch cut, swing {swing}");
}

#[test]
fn band_scan_on_simulated_subject() {
    let config = RadarConfig::reference();
    let subject = SubjectSpec { br_hz: 18.0 / 60.0, hr_hz: 87.0 / 60.0, posture_jitter_m: 0.0, ..SubjectSpec::default() };
    let scene = SimScene { subjects: vec![subject], snr_db: Some(20.0), seed: 9, ..SimScene::default() };
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let out = run_fixed_pipeline(&cube, &FpgaOptions::default()).unwrap();
    let bin_bpm = 60.0 * config.slow_time_rate_hz() / config.num_chirps as f64;
    assert!((out.br_brpm() - 18.0).abs() <= bin_bpm, "{}", out.br_brpm());
    assert!((out.hr_bpm() - 87.0).abs() <= bin_bpm, "{}", out.hr_bpm());
    assert_eq!(out.saturations(), 0);
}

#[test]
fn bin_centred_heartbeat_reads_exactly() {
    // at 20 Hz no power-of-two length puts 1 Hz on a bin; 16 Hz does
    let (m, fs) = (256, 16.0);
    let x: Vec<i32> = (0..m).map(|n| raw(0.8 * (TAU * n as f64 / fs).sin() + 2.0 * (TAU * 0.3125 * n as f64 / fs).cos())).collect();
    let s = band_scan_estimate(&x, fs, Q).unwrap();
    assert_eq!(s.hr_bpm(), 60.0);
    assert_eq!(s.br_brpm(), 18.75);
}

#[test]
fn hundred_twenty_eight_chirp_window() {
    let cube = synthesize::<f64>(&single_subject_scene(5, Some(20.0)), &RadarConfig::reference()).unwrap();
    let out = run_fixed_pipeline(&cube, &FpgaOptions { chirps: Some(128), ..FpgaOptions::default() }).unwrap();
    assert_eq!(out.phase.len(), 128);
    assert!(run_fixed_pipeline(&cube, &FpgaOptions { chirps: Some(100), ..FpgaOptions::default() }).is_err());
}

#[test]
fn clean_subject_agrees_with_float_path() {
    let config = RadarConfig::reference();
    let cube = synthesize::<f64>(&single_subject_scene(11, None), &config).unwrap();
    let r = compare_pipelines(&cube, &PipelineOptions::default(), &FpgaOptions { keep_samples: true, ..FpgaOptions::default() })
        .unwrap();
    assert!(r.delta_hr_bpm.unwrap() <= 2.0 && r.delta_br_brpm.unwrap() <= 2.0, "{r:?}");
    assert!(!r.float_low_confidence && !r.fixed_low_confidence);
    let cum = r.trace.cumulative_cycles();
    assert!(cum.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*cum.last().unwrap(), r.modeled_cycles);
    assert!(r.trace.stages.iter().all(|s| !s.samples.is_empty()));
    assert_eq!(r.saturations, 0);
}

#[test]
fn noise_only_is_low_confidence_in_both_paths() {
    let cube = synthesize::<f64>(&SimScene { snr_db: Some(15.0), seed: 7, ..SimScene::default() }, &RadarConfig::reference())
        .unwrap();
    let r = compare_pipelines(&cube, &PipelineOptions::default(), &FpgaOptions::default()).unwrap();
    assert!(r.float_low_confidence && r.fixed_low_confidence);
    assert!(r.confidence_agrees());
}

#[test]
fn literal_psd_is_selectable() {
    let cube = synthesize::<f64>(&one_subject(1.0), &RadarConfig::reference()).unwrap();
    let opts = FpgaOptions { keep_samples: true, ..FpgaOptions::default() };
    let lit = run_fixed_pipeline(&cube, &FpgaOptions { psd_mode: PsdMode::Literal, ..opts.clone() }).unwrap();
    let mag = run_fixed_pipeline(&cube, &opts).unwrap();
    assert_eq!(mag.range.bin, 17);
    assert_ne!(lit.trace.stage("psd_peak"), mag.trace.stage("psd_peak"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn impulse_is_flat(re in -1000.0f64..1000.0, im in -1000.0f64..1000.0) {
        let mut x = vec![Complex::new(0, 0); 64];
        x[0] = Complex::new(raw(re), raw(im));
        let s = fixed_fft(&x, Q).unwrap();
        let first = s.values[0];
        for v in &s.values {
            prop_assert!((v.re - first.re).abs() <= 1 && (v.im - first.im).abs() <= 1);
        }
    }

    #[test]
    fn delayed_impulse_has_flat_magnitude(pos in 1usize..64, amp in -1000.0f64..1000.0) {
        let mut x = vec![Complex::new(0, 0); 64];
        x[pos] = Complex::new(raw(amp), 0);
        let s = fixed_fft(&x, Q).unwrap();
        let expect = dequantize(quantize(amp, Q).unwrap()).abs() / 64.0;
        // twiddle quantization adds a relative error near 2^-20 per stage
        let tol = 8.0 * Q.ulp() + 6.0 * expect * (-20f64).exp2();
        for v in &s.values {
            prop_assert!((deq(*v).norm() - expect).abs() <= tol);
        }
    }

    #[test]
    fn psd_is_non_negative(v in prop::collection::vec((any::<i32>(), any::<i32>()), 1..64)) {
        let x: Vec<FixedComplex> = v.iter().map(|&(a, b)| Complex::new(a, b)).collect();
        prop_assert!(psd(&x, PsdMode::Magnitude).iter().all(|&p| p >= 0));
    }

    #[test]
    fn unwrap_is_causal(
        v in prop::collection::vec(-PI..PI, 2..80),
        cut in 1usize..80,
        tail in prop::collection::vec(-PI..PI, 1..20),
    ) {
        let cut = cut.min(v.len());
        let a: Vec<i32> = v.iter().map(|&p| raw(p)).collect();
        let mut b = a[..cut].to_vec();
        b.extend(tail.iter().map(|&p| raw(p)));
        let (ua, _) = stream_unwrap(&a, Q);
        let (ub, _) = stream_unwrap(&b, Q);
        prop_assert_eq!(&ua[..cut], &ub[..cut]);
    }

    #[test]
    fn band_scan_ignores_offsets(offset in -500.0f64..500.0, f in 0.9f64..1.9, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // keep the offset on the fixed grid so mean removal is exact
        let off = raw(offset);
        let x: Vec<i32> = (0..256)
            .map(|n| raw(1.5 * (TAU * 0.25 * n as f64 / 20.0).sin() + 0.3 * (TAU * f * n as f64 / 20.0).sin() + rng.random_range(-0.01..0.01)))
            .collect();
        let y: Vec<i32> = x.iter().map(|&v| v + off).collect();
        let a = band_scan_estimate(&x, 20.0, Q).unwrap();
        let b = band_scan_estimate(&y, 20.0, Q).unwrap();
        prop_assert_eq!((a.br.bin, a.hr.bin), (b.br.bin, b.hr.bin));
    }
}
