use proptest::prelude::*;
use vsm_core::radar::{derive_params, min_elevation, GeometryScene, PlannedSubject};
use vsm_core::RadarConfig;

fn scene(pairs: &[(f64, f64)]) -> GeometryScene {
    let subjects = pairs.iter().map(|&(r, l)| PlannedSubject { range_m: r, obstruction_m: l }).collect();
    GeometryScene::from_unsorted(subjects, 0.0, 0.0).unwrap()
}

/// Cumulative gaps so ranges are strictly increasing.
fn layout(gaps: &[f64], heights: &[f64]) -> Vec<(f64, f64)> {
    let mut r = 0.0;
    gaps.iter()
        .zip(heights)
        .map(|(g, l)| {
            r += g;
            (r, *l)
        })
        .collect()
}

#[test]
fn worked_three_subject_example() {
    let plan = min_elevation(&scene(&[(1.0, 0.4), (2.0, 0.3), (3.0, 0.2)]));
    assert_eq!(plan.per_subject_m[0], 0.0);
    assert!((plan.per_subject_m[1] - 0.8).abs() < 1e-12);
    assert!((plan.h_min_m - 0.9).abs() < 1e-12);
}

#[test]
fn raising_adc_rate_saturates_at_r_max() {
    let base = RadarConfig::reference();
    let mut prev = 0.0;
    let mut reached = false;
    for k in 0..48 {
        let cfg = RadarConfig { adc_rate_sps: base.adc_rate_sps * 1.25f64.powi(k), ..base };
        let d = derive_params(&cfg).unwrap();
        assert!(d.r_max_constrained_m >= prev && d.r_max_constrained_m <= d.r_max_m);
        reached |= d.r_max_constrained_m == d.r_max_m;
        prev = d.r_max_constrained_m;
    }
    assert!(reached);
}

proptest! {
    #[test]
    // 600 samples fill the reference ADC window
    fn more_samples_refine_range(n in 1usize..600) {
        let cfg = |n| RadarConfig { adc_samples: n, ..RadarConfig::reference() };
        let a = derive_params(&cfg(n)).unwrap();
        let b = derive_params(&cfg(n + 1)).unwrap();
        prop_assert!(b.range_resolution_m < a.range_resolution_m);
    }

    #[test]
    fn range_scaling_leaves_elevation_unchanged(
        gaps in prop::collection::vec(0.2f64..2.0, 1..7),
        heights in prop::collection::vec(0.0f64..1.0, 7),
        s in 0.1f64..10.0,
    ) {
        let pairs = layout(&gaps, &heights);
        let base = min_elevation(&scene(&pairs)).h_min_m;
        let ranges: Vec<_> = pairs.iter().map(|&(r, l)| (s * r, l)).collect();
        let both: Vec<_> = pairs.iter().map(|&(r, l)| (s * r, s * l)).collect();
        prop_assert!((min_elevation(&scene(&ranges)).h_min_m - base).abs() <= 1e-9 * base.max(1.0));
        prop_assert!((min_elevation(&scene(&both)).h_min_m - s * base).abs() <= 1e-9 * s * base.max(1.0));
    }

    #[test]
    fn appending_a_subject_never_lowers_elevation(
        gaps in prop::collection::vec(0.2f64..2.0, 1..7),
        heights in prop::collection::vec(0.0f64..1.0, 7),
        extra in 0.2f64..2.0,
        extra_l in 0.0f64..1.0,
    ) {
        let mut pairs = layout(&gaps, &heights);
        let base = min_elevation(&scene(&pairs)).h_min_m;
        pairs.push((pairs.last().unwrap().0 + extra, extra_l));
        prop_assert!(min_elevation(&scene(&pairs)).h_min_m >= base);
    }
}
