use super::{SimScene, SubjectSpec};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 5] = [
    "distance_sweep_1..7m",
    "azimuth_sweep_0..60",
    "elevation_sweep",
    "tilt_sweep",
    "zigzag_five",
];

/// Baseline per-sample SNR for the experiment presets.
const PRESET_SNR_DB: f64 = 20.0;
const SEATED_JITTER_M: f64 = 1e-4;
const STANDING_JITTER_M: f64 = 4e-4;

/// One scene of a preset together with a short label for file naming.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetScene {
    pub label: String,
    pub scene: SimScene,
}

fn seated(range_m: f64, azimuth_deg: f64) -> SubjectSpec {
    SubjectSpec { range_m, azimuth_deg, posture_jitter_m: SEATED_JITTER_M, ..SubjectSpec::default() }
}

fn single(label: String, subject: SubjectSpec, snr_db: f64, seed: u64) -> PresetScene {
    PresetScene {
        label,
        scene: SimScene { subjects: vec![subject], snr_db: Some(snr_db), seed, ..SimScene::default() },
    }
}

/// Scenes reproducing the named experiment layout. Sweep presets return
/// one scene per swept value.
pub fn scenario_preset(name: &str) -> Result<Vec<PresetScene>> {
    let scenes = match name {
        "distance_sweep_1..7m" | "distance_sweep" => (1..=7)
            .map(|r| single(format!("{r}m"), seated(r as f64, 0.0), PRESET_SNR_DB, r as u64))
            .collect(),
        "azimuth_sweep_0..60" | "azimuth_sweep" => [0.0, 20.0, -20.0, 40.0, -40.0, 60.0, -60.0]
            .iter()
            .enumerate()
            .map(|(i, &az)| single(format!("{az:+}deg"), seated(1.0, az), PRESET_SNR_DB, 100 + i as u64))
            .collect(),
        // Elevation and tilt move the beam off the chest wall; modeled as a
        // monotone SNR loss plus growing apparent sway.
        "elevation_sweep" => [0.0, 10.0, 15.0, 20.0]
            .iter()
            .enumerate()
            .map(|(i, &cm)| {
                let subject = SubjectSpec {
                    posture_jitter_m: SEATED_JITTER_M * (1.0 + cm / 5.0),
                    ..seated(1.0, 0.0)
                };
                let mut p = single(format!("{cm}cm"), subject, PRESET_SNR_DB - 0.75 * cm, 200 + i as u64);
                p.scene.radar_height_m = cm / 100.0;
                p
            })
            .collect(),
        "tilt_sweep" => [0.0, 10.0, 20.0, 30.0]
            .iter()
            .enumerate()
            .map(|(i, &deg)| {
                let subject = SubjectSpec {
                    posture_jitter_m: SEATED_JITTER_M * (1.0 + deg / 10.0),
                    ..seated(1.0, 0.0)
                };
                let mut p = single(format!("{deg}deg"), subject, PRESET_SNR_DB - 0.5 * deg, 300 + i as u64);
                p.scene.radar_tilt_deg = deg;
                p
            })
            .collect(),
        "zigzag_five" => vec![PresetScene { label: "zigzag".into(), scene: zigzag_five() }],
        _ => {
            return Err(Error::UnknownPreset { name: name.to_string(), available: PRESET_NAMES.join(", ") });
        }
    };
    Ok(scenes)
}

/// Five subjects in a zig-zag: three seated in front, two standing behind,
/// alternating sides of boresight.
fn zigzag_five() -> SimScene {
    let layout: [(f64, f64, f64, f64, bool); 5] = [
        // range m, azimuth deg, BRPM, BPM, standing
        (3.0, -20.0, 15.0, 66.0, false),
        (3.6, 20.0, 12.0, 75.0, false),
        (4.2, -20.0, 18.0, 84.0, false),
        (4.8, 20.0, 20.0, 90.0, true),
        (5.4, -20.0, 14.0, 99.0, true),
    ];
    let subjects = layout
        .iter()
        .map(|&(range_m, azimuth_deg, brpm, bpm, standing)| SubjectSpec {
            range_m,
            azimuth_deg,
            br_hz: brpm / 60.0,
            hr_hz: bpm / 60.0,
            posture_jitter_m: if standing { STANDING_JITTER_M } else { SEATED_JITTER_M },
            ..SubjectSpec::default()
        })
        .collect();
    SimScene {
        subjects,
        snr_db: Some(PRESET_SNR_DB),
        seed: 5,
        radar_height_m: 2.0,
        radar_tilt_deg: 10.0,
        ..SimScene::default()
    }
}

/// Random pair of seated subjects that occupy distinct range-azimuth cells:
/// either at least 0.25 m apart in range (about four bins) or at least 25°
/// apart in azimuth (more than one angle-resolution cell). The far subject
/// is at most 25% farther than the near one, which keeps both within the
/// detector's 12 dB dynamic range.
pub fn two_subject_scene(seed: u64, snr_db: Option<f64>) -> SimScene {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(super::derive_seed(seed, 0x2525));
    let subject = |range_m: f64, azimuth_deg: f64, rng: &mut rand_chacha::ChaCha8Rng| SubjectSpec {
        range_m,
        azimuth_deg,
        br_hz: rng.random_range(0.15..0.35),
        hr_hz: rng.random_range(0.9..1.8),
        breath_amplitude_m: rng.random_range(3e-3..5e-3),
        heart_amplitude_m: rng.random_range(1e-4..3e-4),
        ..seated(range_m, azimuth_deg)
    };
    let r_a: f64 = rng.random_range(1.2..2.4);
    let az_a: f64 = rng.random_range(-35.0..35.0);
    let (r_b, az_b) = if rng.random_bool(0.5) {
        let gap = rng.random_range(0.25..(0.25 * r_a).max(0.3));
        (r_a + gap, az_a + rng.random_range(-5.0..5.0))
    } else {
        let gap: f64 = rng.random_range(25.0..40.0);
        let az_b = if az_a > 0.0 { az_a - gap } else { az_a + gap };
        (r_a + rng.random_range(-0.1..0.1), az_b)
    };
    let a = subject(r_a, az_a, &mut rng);
    let b = subject(r_b, az_b, &mut rng);
    SimScene { subjects: vec![a, b], snr_db, seed, ..SimScene::default() }
}

/// One seated subject in front of the array, the input shape the
/// single-channel hardware path expects.
pub fn single_subject_scene(seed: u64, snr_db: Option<f64>) -> SimScene {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(super::derive_seed(seed, 0x5151));
    let range_m = rng.random_range(0.8..2.5);
    let azimuth_deg = rng.random_range(-20.0..20.0);
    let subject = SubjectSpec {
        br_hz: rng.random_range(0.15..0.35),
        hr_hz: rng.random_range(0.9..1.8),
        breath_amplitude_m: rng.random_range(3e-3..5e-3),
        heart_amplitude_m: rng.random_range(2e-4..4e-4),
        ..seated(range_m, azimuth_deg)
    };
    SimScene { subjects: vec![subject], snr_db, seed, ..SimScene::default() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_layout() {
        let p = scenario_preset("zigzag_five").unwrap();
        assert_eq!(p.len(), 1);
        let s = &p[0].scene.subjects;
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| x.range_m <= 6.0));
        for w in s.windows(2) {
            assert!(w[0].azimuth_deg.signum() != w[1].azimuth_deg.signum());
        }
        let standing = s.iter().filter(|x| x.posture_jitter_m > SEATED_JITTER_M).count();
        assert_eq!(standing, 2);
    }

    #[test]
    fn distance_sweep_has_seven_single_subject_scenes() {
        let p = scenario_preset("distance_sweep_1..7m").unwrap();
        assert_eq!(p.len(), 7);
        for (i, ps) in p.iter().enumerate() {
            assert_eq!(ps.scene.subjects.len(), 1);
            assert_eq!(ps.scene.subjects[0].range_m, (i + 1) as f64);
        }
    }

    #[test]
    fn azimuth_sweep_angles() {
        let p = scenario_preset("azimuth_sweep_0..60").unwrap();
        let mut az: Vec<f64> = p.iter().map(|s| s.scene.subjects[0].azimuth_deg).collect();
        az.sort_by(f64::total_cmp);
        assert_eq!(az, vec![-60.0, -40.0, -20.0, 0.0, 20.0, 40.0, 60.0]);
        assert!(p.iter().all(|s| s.scene.subjects[0].range_m == 1.0));
    }

    #[test]
    fn degradation_presets_are_monotone() {
        for name in ["elevation_sweep", "tilt_sweep"] {
            let p = scenario_preset(name).unwrap();
            for w in p.windows(2) {
                assert!(w[1].scene.snr_db.unwrap() < w[0].scene.snr_db.unwrap());
                assert!(w[1].scene.subjects[0].posture_jitter_m > w[0].scene.subjects[0].posture_jitter_m);
            }
        }
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = scenario_preset("nope").unwrap_err().to_string();
        assert!(err.contains("zigzag_five") && err.contains("tilt_sweep"), "{err}");
    }
}
