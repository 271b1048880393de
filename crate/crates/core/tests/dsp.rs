use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use proptest::prelude::*;
use vsm_core::dsp::{
    beamform, dc_offset_correct, di_variance_map, di_variance_map_from_spectra, extract_phase, fast_time_fft,
    localize, range_fft, unwrap_phase, AzimuthGrid, ChannelSpectra, WindowKind, DEFAULT_REL_THRESHOLD,
};
use vsm_core::real::wrap_to_pi;
use vsm_core::scene::{
    scenario_preset, subject_displacements, synthesize, ClutterSpec, Reflector, SimScene, SubjectSpec,
};
use vsm_core::{DataCube, RadarConfig};

type C = Complex<f64>;

fn small_config(chirps: usize, samples: usize) -> RadarConfig {
    RadarConfig { num_chirps: chirps, adc_samples: samples, ..RadarConfig::reference() }
}

fn cube_from(config: &RadarConfig, values: &[(f64, f64)]) -> DataCube<f64> {
    DataCube::new(config.clone(), values.iter().map(|&(re, im)| C::new(re, im)).collect()).unwrap()
}

fn peak_index(values: impl Iterator<Item = f64>) -> usize {
    values.enumerate().fold((0, f64::MIN), |best, (i, v)| if v > best.1 { (i, v) } else { best }).0
}

struct Scan {
    map: vsm_core::RangeAzimuthMap64,
    grid: AzimuthGrid<f64>,
}

fn scan(scene: &SimScene, config: &RadarConfig) -> Scan {
    let cube = synthesize::<f64>(scene, config).unwrap();
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let spectra = ChannelSpectra::compute(&cube, WindowKind::Hann).unwrap();
    let map = di_variance_map_from_spectra(&spectra, &grid).unwrap();
    Scan { map, grid }
}

fn truth_bins(scene: &SimScene, config: &RadarConfig, grid: &AzimuthGrid<f64>) -> Vec<(usize, usize)> {
    scene.subjects.iter().map(|s| (config.range_bin(s.range_m), grid.nearest(s.azimuth_deg))).collect()
}

fn matches_truth(found: &[(usize, usize)], truth: &[(usize, usize)]) -> bool {
    found.len() == truth.len()
        && truth.iter().all(|&(r, k)| {
            found.iter().any(|&(fr, fk)| fr.abs_diff(r) <= 1 && fk.abs_diff(k) <= 1)
        })
}

#[test]
fn broadside_and_steered_beams_peak_at_the_source_angle() {
    let config = small_config(1, 16);
    let j = config.virtual_channels();
    let grid = AzimuthGrid::default_for(j);
    for theta in [0.0f64, 30.0] {
        let step = PI * theta.to_radians().sin();
        let mut vals = Vec::new();
        for jj in 0..j {
            let v = C::from_polar(1.0, step * jj as f64);
            vals.extend(std::iter::repeat((v.re, v.im)).take(16));
        }
        let out = beamform(&cube_from(&config, &vals), &grid).unwrap();
        let got = peak_index((0..grid.len()).map(|k| out.row(k, 0)[0].norm()));

        // steering-vector correlation evaluated directly on the grid angles
        let oracle = peak_index(grid.angles_deg().iter().map(|a| {
            let d = PI * (theta.to_radians().sin() - a.to_radians().sin());
            (0..j).map(|jj| C::from_polar(1.0, d * jj as f64)).sum::<C>().norm()
        }));
        assert_eq!(got, oracle);
        assert!((grid.angles_deg()[got] - theta).abs() < 1e-9);
        assert!((out.row(got, 0)[0].norm() - j as f64).abs() < 1e-9);
    }
}

#[test]
fn single_channel_beamform_replicates_input() {
    let config = RadarConfig { n_tx: 1, n_rx: 1, ..small_config(2, 8) };
    let grid = AzimuthGrid::default_for(1);
    let vals: Vec<(f64, f64)> = (0..16).map(|i| (i as f64, -(i as f64) * 0.5)).collect();
    let cube = cube_from(&config, &vals);
    let out = beamform(&cube, &grid).unwrap();
    for k in 0..grid.len() {
        for m in 0..2 {
            assert_eq!(out.row(k, m), cube.row(m, 0));
        }
    }
}

#[test]
fn beamform_rejects_channel_mismatch() {
    let config = small_config(1, 8);
    let cube = DataCube::<f64>::zeros(config);
    assert!(beamform(&cube, &AzimuthGrid::default_for(4)).is_err());
}

#[test]
fn range_fft_rejects_non_power_of_two() {
    let config = small_config(1, 12);
    let cube = DataCube::<f64>::zeros(config.clone());
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let bf = beamform(&cube, &grid).unwrap();
    assert!(range_fft(&bf, WindowKind::Hann).is_err());
    assert!(ChannelSpectra::compute(&cube, WindowKind::Hann).is_err());
}

#[test]
fn one_metre_target_lands_in_bin_17() {
    let config = RadarConfig::reference();
    let slope: f64 = 2998.2e6 / 100e-6;
    let f_b = 2.0 * slope * 1.0 / 299_792_458.0;
    let oracle = (f_b / (6.0e6 / 512.0)).round() as usize;
    assert_eq!(oracle, 17);
    assert_eq!(config.range_bin(1.0), oracle);

    let scene = SimScene {
        clutter: ClutterSpec { reflectors: vec![Reflector { range_m: 1.0, azimuth_deg: 0.0, amplitude: 1.0 }] },
        ..SimScene::default()
    };
    let cfg = small_config(2, 512);
    let cube = synthesize::<f64>(&scene, &cfg).unwrap();
    let spectra = ChannelSpectra::compute(&cube, WindowKind::Hann).unwrap();
    let grid = AzimuthGrid::default_for(cfg.virtual_channels());
    let k = grid.nearest(0.0);
    let mags = spectra.mean_magnitudes(&grid, k).unwrap();
    assert_eq!(peak_index(mags.iter().copied()), 17);
}

#[test]
fn zero_cube_gives_zero_spectrum() {
    let config = small_config(3, 32);
    let cube = DataCube::<f64>::zeros(config.clone());
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let series = range_fft(&beamform(&cube, &grid).unwrap(), WindowKind::Hann).unwrap();
    assert!(series.as_slice().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn near_target_outshines_far_target() {
    let scene = SimScene {
        clutter: ClutterSpec {
            reflectors: vec![
                Reflector { range_m: 1.0, azimuth_deg: 0.0, amplitude: 1.0 },
                Reflector { range_m: 3.0, azimuth_deg: 0.0, amplitude: 1.0 / 9.0 },
            ],
        },
        ..SimScene::default()
    };
    let config = small_config(2, 512);
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let series = range_fft(&beamform(&cube, &grid).unwrap(), WindowKind::Hann).unwrap();
    let k = grid.nearest(0.0);
    let mag = |r: usize| series.get(k, r, 0).norm();
    let (b1, b3) = (config.range_bin(1.0), config.range_bin(3.0));
    let mags: Vec<f64> = (0..256).map(mag).collect();
    let local_max = |r: usize| (r - 2..=r + 2).all(|q| mags[q] <= mags[r]);
    let peak_near = |b: usize| (b - 1..=b + 1).max_by(|&a, &c| mags[a].total_cmp(&mags[c])).unwrap();
    let (p1, p3) = (peak_near(b1), peak_near(b3));
    assert!(local_max(p1) && local_max(p3));
    assert!(mags[p3] < mags[p1]);
    // amplitude ratio follows the 1/R² reflectivity passed to the simulator
    assert!((mags[p3] / mags[p1] - 1.0 / 9.0).abs() < 0.03);
}

#[test]
fn spectra_path_equals_beamform_then_fft() {
    let scene = SimScene {
        subjects: vec![SubjectSpec { range_m: 1.3, azimuth_deg: 12.0, ..SubjectSpec::default() }],
        snr_db: Some(10.0),
        seed: 4,
        ..SimScene::default()
    };
    let config = small_config(64, 128);
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let direct = range_fft(&beamform(&cube, &grid).unwrap(), WindowKind::Hann).unwrap();
    let spectra = ChannelSpectra::compute(&cube, WindowKind::Hann).unwrap();
    let steered = spectra.to_series(&grid).unwrap();
    assert_eq!(direct.dims(), steered.dims());
    let scale = direct.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (a, b) in direct.as_slice().iter().zip(steered.as_slice()) {
        assert!((a - b).norm() <= 1e-12 * scale);
    }
    let m1 = di_variance_map(&direct).unwrap();
    let m2 = di_variance_map_from_spectra(&spectra, &grid).unwrap();
    let d1 = localize(&m1, DEFAULT_REL_THRESHOLD, 4).unwrap();
    let d2 = localize(&m2, DEFAULT_REL_THRESHOLD, 4).unwrap();
    let cells = |l: &vsm_core::dsp::Localization<f64>| {
        l.detections.iter().map(|d| (d.range_bin, d.azimuth_bin)).collect::<Vec<_>>()
    };
    assert_eq!(cells(&d1), cells(&d2));
}

#[test]
fn empty_scene_has_no_detections() {
    let config = RadarConfig::reference();
    let scene = SimScene { snr_db: Some(10.0), seed: 9, ..SimScene::default() };
    let s = scan(&scene, &config);
    assert!(s.map.di_variance.iter().all(|v| *v >= 0.0 && v.is_finite()));
    let loc = localize(&s.map, DEFAULT_REL_THRESHOLD, 8).unwrap();
    assert!(loc.no_subjects());
    assert!(s.map.max() <= loc.threshold);
}

#[test]
fn two_subjects_give_two_maxima_at_truth() {
    let config = RadarConfig::reference();
    for snr in [None, Some(10.0)] {
        let scene = SimScene {
            subjects: vec![
                SubjectSpec { range_m: 1.0, azimuth_deg: -15.0, ..SubjectSpec::default() },
                // equal received amplitude: reflectivity scaled by R²
                SubjectSpec {
                    range_m: 2.0,
                    azimuth_deg: 15.0,
                    br_hz: 0.3,
                    hr_hz: 1.4,
                    rcs_amplitude: 0.25 * 4.0,
                    ..SubjectSpec::default()
                },
            ],
            snr_db: snr,
            seed: 21,
            ..SimScene::default()
        };
        let s = scan(&scene, &config);
        let loc = localize(&s.map, DEFAULT_REL_THRESHOLD, 8).unwrap();
        let found: Vec<_> = loc.detections.iter().map(|d| (d.range_bin, d.azimuth_bin)).collect();
        assert!(matches_truth(&found, &truth_bins(&scene, &config, &s.grid)), "{snr:?}: {found:?}");
    }
}

#[test]
fn static_reflector_is_not_a_subject() {
    let config = RadarConfig::reference();
    let scene = SimScene {
        subjects: vec![SubjectSpec { range_m: 1.0, azimuth_deg: 0.0, ..SubjectSpec::default() }],
        clutter: ClutterSpec { reflectors: vec![Reflector { range_m: 2.5, azimuth_deg: -30.0, amplitude: 2.0 }] },
        snr_db: Some(20.0),
        seed: 5,
        ..SimScene::default()
    };
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let spectra = ChannelSpectra::compute(&cube, WindowKind::Hann).unwrap();
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let map = di_variance_map_from_spectra(&spectra, &grid).unwrap();
    let loc = localize(&map, DEFAULT_REL_THRESHOLD, 8).unwrap();

    let (kr, rr) = (grid.nearest(-30.0), config.range_bin(2.5));
    let (ks, rs) = (grid.nearest(0.0), config.range_bin(1.0));
    let refl_mag = spectra.mean_magnitudes(&grid, kr).unwrap()[rr];
    let subj_mag = spectra.mean_magnitudes(&grid, ks).unwrap()[rs];
    assert!(refl_mag > subj_mag);
    assert!(map.get(kr, rr) < loc.threshold);
    assert_eq!(loc.detections.len(), 1);
    assert!(loc.detections[0].range_bin.abs_diff(rs) <= 1 && loc.detections[0].azimuth_bin.abs_diff(ks) <= 1);
}

#[test]
fn zigzag_five_detects_every_subject() {
    let config = RadarConfig::reference();
    let preset = scenario_preset("zigzag_five").unwrap().remove(0);
    let scene = SimScene { snr_db: None, ..preset.scene };
    let s = scan(&scene, &config);
    let loc = localize(&s.map, DEFAULT_REL_THRESHOLD, 8).unwrap();
    let found: Vec<_> = loc.detections.iter().map(|d| (d.range_bin, d.azimuth_bin)).collect();
    assert!(matches_truth(&found, &truth_bins(&scene, &config, &s.grid)), "{found:?}");
}

#[test]
fn subject_phase_tracks_chest_displacement() {
    let config = RadarConfig::reference();
    let scene = SimScene {
        subjects: vec![SubjectSpec { range_m: 1.0, azimuth_deg: 0.0, ..SubjectSpec::default() }],
        seed: 3,
        ..SimScene::default()
    };
    let cube = synthesize::<f64>(&scene, &config).unwrap();
    let spectra = ChannelSpectra::compute(&cube, WindowKind::Hann).unwrap();
    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let slow = spectra.slow_time(&grid, grid.nearest(0.0), 17).unwrap();
    let corrected = dc_offset_correct(&slow).unwrap().corrected;
    let wrapped = extract_phase(&corrected).unwrap();
    let unwrapped = unwrap_phase(&wrapped.values).unwrap();

    let lambda = config.wavelength_max_m();
    let x = &subject_displacements(&scene, &config)[0];
    let resid: Vec<f64> = unwrapped.iter().zip(x).map(|(p, xm)| p - 4.0 * PI * xm / lambda).collect();
    let offset = resid[0];
    let worst = resid.iter().map(|r| (r - offset).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max phase error {worst}");
    // the wrapped series itself equals the wrapped displacement phase
    for (w, xm) in wrapped.values.iter().zip(x) {
        let d = wrap_to_pi(w - (4.0 * PI * xm / lambda + offset));
        assert!(d.abs() <= 1e-6);
    }
}

#[test]
fn localize_ignores_subject_order() {
    let config = RadarConfig::reference();
    let a = SubjectSpec { range_m: 1.2, azimuth_deg: -20.0, ..SubjectSpec::default() };
    let b = SubjectSpec { range_m: 1.6, azimuth_deg: 18.0, br_hz: 0.2, hr_hz: 1.3, ..SubjectSpec::default() };
    let run = |subjects: Vec<SubjectSpec>| {
        let scene = SimScene { subjects, snr_db: Some(15.0), seed: 77, ..SimScene::default() };
        let s = scan(&scene, &config);
        let mut cells: Vec<_> =
            localize(&s.map, DEFAULT_REL_THRESHOLD, 8).unwrap().detections.iter().map(|d| (d.range_bin, d.azimuth_bin)).collect();
        cells.sort();
        cells
    };
    let ab = run(vec![a.clone(), b.clone()]);
    assert_eq!(ab.len(), 2);
    assert_eq!(ab, run(vec![b, a]));
}

fn unwrap_oracle(wrapped: &[f64]) -> Vec<f64> {
    // choose the 2π multiple that minimizes each successive jump
    let mut out = vec![wrapped[0]];
    for &w in &wrapped[1..] {
        let prev = *out.last().unwrap();
        let best = (-50..=50)
            .map(|k| w + TAU * k as f64)
            .min_by(|a, b| (a - prev).abs().total_cmp(&(b - prev).abs()))
            .unwrap();
        out.push(best);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds_for_rectangular_window(
        log_n in 3usize..10,
        seed in any::<u64>(),
    ) {
        let n = 1usize << log_n;
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let row: Vec<C> = (0..n).map(|_| C::new(next(), next())).collect();
        let spec = fast_time_fft(&row, WindowKind::Rectangular).unwrap();
        let time: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        let freq: f64 = spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((time - freq).abs() <= 1e-9 * time);
    }

    #[test]
    fn unwrap_inverts_wrap_for_slow_signals(
        start in -20.0f64..20.0,
        steps in prop::collection::vec(-3.1f64..3.1, 1..200),
    ) {
        let mut x = vec![start];
        for s in &steps {
            let last = *x.last().unwrap();
            x.push(last + s);
        }
        let wrapped: Vec<f64> = x.iter().map(|v| wrap_to_pi(*v)).collect();
        let un = unwrap_phase(&wrapped).unwrap();
        let k = ((un[0] - x[0]) / TAU).round();
        for (u, v) in un.iter().zip(&x) {
            prop_assert!((u - v - TAU * k).abs() <= 1e-9);
        }
        let oracle = unwrap_oracle(&wrapped);
        for (u, o) in un.iter().zip(&oracle) {
            prop_assert!((u - o).abs() <= 1e-12 * (1.0 + o.abs()));
        }
    }

    #[test]
    fn beamform_and_range_fft_are_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let config = small_config(2, 16);
        let len = 2 * config.virtual_channels() * 16;
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<(f64, f64)> = (0..len).map(|_| (next(), next())).collect();
        let y: Vec<(f64, f64)> = (0..len).map(|_| (next(), next())).collect();
        let mix: Vec<(f64, f64)> = x.iter().zip(&y).map(|(p, q)| (a * p.0 + b * q.0, a * p.1 + b * q.1)).collect();
        let grid = AzimuthGrid::default_for(config.virtual_channels());
        let run = |v: &[(f64, f64)]| {
            range_fft(&beamform(&cube_from(&config, v), &grid).unwrap(), WindowKind::Hann).unwrap()
        };
        let (sx, sy, sm) = (run(&x), run(&y), run(&mix));
        for ((px, py), pm) in sx.as_slice().iter().zip(sy.as_slice()).zip(sm.as_slice()) {
            let expect = px * a + py * b;
            prop_assert!((pm - expect).norm() <= 1e-10 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn dc_correction_is_idempotent(
        cx in -2.0f64..2.0,
        cy in -2.0f64..2.0,
        radius in 0.2f64..3.0,
        span in 0.5f64..6.0,
        start in -PI..PI,
    ) {
        let series: Vec<C> = (0..64)
            .map(|i| C::new(cx, cy) + C::from_polar(radius, start + span * i as f64 / 63.0))
            .collect();
        let first = dc_offset_correct(&series).unwrap();
        let second = dc_offset_correct(&first.corrected).unwrap();
        prop_assert!(second.fit.center.norm() <= 1e-9);
    }
}
