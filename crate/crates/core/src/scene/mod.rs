//! Parametric multi-subject scene simulator producing IF data cubes with
//! known ground truth.

mod cube;
mod file;
mod motion;
mod presets;
mod synth;

pub use cube::DataCube;
pub use file::{parse_scene, scene_to_string};
pub use motion::chest_displacement;
pub use presets::{scenario_preset, single_subject_scene, two_subject_scene, PresetScene, PRESET_NAMES};
pub use synth::{noise_variance, separation_warnings, subject_displacements, synthesize, synthesize_slow_time};

use crate::error::{Error, Result};

pub const BR_BAND_HZ: (f64, f64) = (0.05, 0.6);
pub const HR_BAND_HZ: (f64, f64) = (0.8, 2.0);
pub const BREATH_AMPLITUDE_RANGE_M: (f64, f64) = (1e-3, 12e-3);
pub const HEART_AMPLITUDE_RANGE_M: (f64, f64) = (1e-5, 5e-4);

/// Default vertical extent of a seated subject above chest level.
pub const DEFAULT_OBSTRUCTION_M: f64 = 0.4;

/// A breathing, heart-beating reflector.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSpec {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub br_hz: f64,
    pub hr_hz: f64,
    pub breath_amplitude_m: f64,
    pub heart_amplitude_m: f64,
    /// Extra breathing harmonics as `(index ≥ 2, amplitude relative to the
    /// fundamental)`.
    pub breath_harmonics: Vec<(u32, f64)>,
    pub rcs_amplitude: f64,
    /// Standard deviation of the low-passed random-walk body sway, m.
    pub posture_jitter_m: f64,
    pub obstruction_m: f64,
}

impl Default for SubjectSpec {
    fn default() -> Self {
        Self {
            range_m: 1.0,
            azimuth_deg: 0.0,
            br_hz: 0.25,
            hr_hz: 1.1,
            breath_amplitude_m: 4e-3,
            heart_amplitude_m: 3e-4,
            breath_harmonics: vec![(2, 0.1)],
            rcs_amplitude: 0.25,
            posture_jitter_m: 1e-4,
            obstruction_m: DEFAULT_OBSTRUCTION_M,
        }
    }
}

impl SubjectSpec {
    /// Checks physiological ranges. Zero amplitudes are allowed so that
    /// static or partial subjects can be modeled.
    pub fn validate(&self) -> Result<()> {
        let in_range = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-12 && v <= hi + 1e-12;
        if !(self.range_m.is_finite() && self.range_m > 0.0) {
            return Err(Error::Scene(format!("subject range must be positive, got {}", self.range_m)));
        }
        if !(self.azimuth_deg.abs() < 90.0) {
            return Err(Error::Scene(format!("subject azimuth {} outside (-90, 90)", self.azimuth_deg)));
        }
        if !in_range(self.br_hz, BR_BAND_HZ) {
            return Err(Error::Scene(format!("br_hz {} outside {:?}", self.br_hz, BR_BAND_HZ)));
        }
        if !in_range(self.hr_hz, HR_BAND_HZ) {
            return Err(Error::Scene(format!("hr_hz {} outside {:?}", self.hr_hz, HR_BAND_HZ)));
        }
        if self.breath_amplitude_m != 0.0 && !in_range(self.breath_amplitude_m, BREATH_AMPLITUDE_RANGE_M) {
            return Err(Error::Scene(format!(
                "breath amplitude {} m outside {:?}",
                self.breath_amplitude_m, BREATH_AMPLITUDE_RANGE_M
            )));
        }
        if self.heart_amplitude_m != 0.0 && !in_range(self.heart_amplitude_m, HEART_AMPLITUDE_RANGE_M) {
            return Err(Error::Scene(format!(
                "heart amplitude {} m outside {:?}",
                self.heart_amplitude_m, HEART_AMPLITUDE_RANGE_M
            )));
        }
        for &(h, a) in &self.breath_harmonics {
            if h < 2 || !a.is_finite() {
                return Err(Error::Scene(format!("invalid breathing harmonic ({h}, {a})")));
            }
        }
        if !(self.rcs_amplitude.is_finite() && self.rcs_amplitude >= 0.0) {
            return Err(Error::Scene(format!("rcs amplitude must be >= 0, got {}", self.rcs_amplitude)));
        }
        if !(self.posture_jitter_m.is_finite() && self.posture_jitter_m >= 0.0) {
            return Err(Error::Scene("posture jitter must be >= 0".into()));
        }
        if !(self.obstruction_m.is_finite() && self.obstruction_m >= 0.0) {
            return Err(Error::Scene("obstruction height must be >= 0".into()));
        }
        Ok(())
    }

    pub fn br_brpm(&self) -> f64 {
        self.br_hz * 60.0
    }

    pub fn hr_bpm(&self) -> f64 {
        self.hr_hz * 60.0
    }
}

/// Static point reflector (furniture, walls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflector {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClutterSpec {
    pub reflectors: Vec<Reflector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScene {
    pub subjects: Vec<SubjectSpec>,
    pub clutter: ClutterSpec,
    /// Per-sample SNR of the strongest subject return; `None` is noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub radar_height_m: f64,
    pub radar_tilt_deg: f64,
}

impl Default for SimScene {
    fn default() -> Self {
        Self {
            subjects: Vec::new(),
            clutter: ClutterSpec::default(),
            snr_db: None,
            seed: 0,
            radar_height_m: 0.0,
            radar_tilt_deg: 0.0,
        }
    }
}

impl SimScene {
    /// Range and obstruction of each subject for the elevation planner.
    pub fn geometry(&self) -> Result<crate::radar::GeometryScene> {
        let planned = self
            .subjects
            .iter()
            .map(|s| crate::radar::PlannedSubject { range_m: s.range_m, obstruction_m: s.obstruction_m })
            .collect();
        crate::radar::GeometryScene::from_unsorted(planned, self.radar_height_m, self.radar_tilt_deg)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.subjects.iter().enumerate() {
            s.validate().map_err(|e| Error::Scene(format!("subject {i}: {e}")))?;
        }
        for (i, r) in self.clutter.reflectors.iter().enumerate() {
            if !(r.amplitude.is_finite() && r.amplitude >= 0.0) {
                return Err(Error::Scene(format!("reflector {i}: amplitude must be >= 0")));
            }
            if !(r.range_m.is_finite() && r.range_m > 0.0) || !(r.azimuth_deg.abs() < 90.0) {
                return Err(Error::Scene(format!("reflector {i}: invalid position")));
            }
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::Scene(format!("snr_db must be finite, got {snr}")));
            }
        }
        Ok(())
    }
}

/// Mixes a scene seed with a stream tag into an independent 64-bit seed.
pub(crate) fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
