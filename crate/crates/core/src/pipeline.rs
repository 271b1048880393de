//! End-to-end float pipeline: localization over the range-azimuth map,
//! then per-subject phase, VMD, features and rate estimates.

use std::time::{Duration, Instant};

use num_complex::Complex;
use rayon::prelude::*;

use crate::dsp::{
    dc_offset_correct, di_variance_map_from_spectra, extract_phase, localize, unwrap_phase, AzimuthGrid, ChannelSpectra,
    CircleFit, Detection, Localization, PhaseSignal, RangeAzimuthMap, WindowKind, WrappedPhase, DEFAULT_REL_THRESHOLD,
};
use crate::error::Result;
use crate::features::{extract_features, ExtractedFeatures};
use crate::radar::RadarConfig;
use crate::real::Real;
use crate::regression::ModelPair;
use crate::scene::{DataCube, BR_BAND_HZ, HR_BAND_HZ};
use crate::vmd::{classify_modes, vmd_decompose, ModeAssignment, VmdParams, VmdResult};

pub const DEFAULT_MAX_SUBJECTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub window: WindowKind,
    pub rel_threshold: f64,
    pub max_subjects: usize,
    pub vmd: VmdParams,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            window: WindowKind::Hann,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            max_subjects: DEFAULT_MAX_SUBJECTS,
            vmd: VmdParams::default(),
        }
    }
}

/// Everything derived from one subject's slow-time series.
#[derive(Debug, Clone, PartialEq)]
pub struct VitalAnalysis<T> {
    pub dc_fit: CircleFit<T>,
    pub wrapped: WrappedPhase<T>,
    pub unwrapped: Vec<T>,
    pub vmd: VmdResult<T>,
    pub modes: ModeAssignment,
    pub features: ExtractedFeatures,
}

impl<T: Real> VitalAnalysis<T> {
    pub fn x_br(&self) -> &[T] {
        &self.vmd.modes[self.modes.br]
    }

    pub fn x_hr(&self) -> &[T] {
        &self.vmd.modes[self.modes.hr]
    }

    /// Welch-only rates `(BRPM, BPM)`.
    pub fn welch_rates(&self) -> (f64, f64) {
        (60.0 * self.features.vector.br_w, 60.0 * self.features.vector.hr_w)
    }

    pub fn low_confidence(&self) -> bool {
        self.modes.br_unresolved
            || self.modes.hr_unresolved
            || self.features.low_confidence()
            || self.dc_fit.status != crate::dsp::DcStatus::Converged
    }
}

/// DC correction, phase extraction, unwrapping, VMD, mode assignment and
/// feature extraction for one slow-time series sampled at `fs`.
pub fn analyze_slow_time<T: Real>(slow_time: &[Complex<T>], fs: f64, vmd: &VmdParams) -> Result<VitalAnalysis<T>> {
    let dc = dc_offset_correct(slow_time)?;
    let wrapped = extract_phase(&dc.corrected)?;
    let unwrapped = unwrap_phase(&wrapped.values)?;
    let result = vmd_decompose(&unwrapped, fs, vmd)?;
    let modes = classify_modes(&result, BR_BAND_HZ, HR_BAND_HZ)?;
    let features = extract_features(&result.modes[modes.br], &result.modes[modes.hr], None, fs)?;
    Ok(VitalAnalysis { dc_fit: dc.fit, wrapped, unwrapped, vmd: result, modes, features })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    Welch,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectReport<T> {
    pub id: usize,
    pub detection: Detection<T>,
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub slow_time: Vec<Complex<T>>,
    pub phase: PhaseSignal<T>,
    pub analysis: VitalAnalysis<T>,
    pub br_brpm: f64,
    pub hr_bpm: f64,
    pub source: EstimateSource,
}

impl<T: Real> SubjectReport<T> {
    pub fn low_confidence(&self) -> bool {
        self.analysis.low_confidence()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput<T> {
    pub config: RadarConfig,
    pub grid: AzimuthGrid<T>,
    pub map: RangeAzimuthMap<T>,
    pub localization: Localization<T>,
    pub subjects: Vec<SubjectReport<T>>,
    /// Wall time per stage, in execution order.
    pub timings: Vec<(&'static str, Duration)>,
}

impl<T> PipelineOutput<T> {
    pub fn no_subjects(&self) -> bool {
        self.subjects.is_empty()
    }
}

/// Runs the full chain on a cube. With a model the reported rates are the
/// regression predictions, otherwise the Welch estimates.
pub fn process_cube<T: Real>(cube: &DataCube<T>, options: &PipelineOptions, model: Option<&ModelPair>) -> Result<PipelineOutput<T>> {
    let config = *cube.config();
    let fs = config.slow_time_rate_hz();
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let grid = AzimuthGrid::default_for(config.virtual_channels());
    let spectra = ChannelSpectra::compute(cube, options.window)?;
    lap("range_fft", &mut timings);
    let map = di_variance_map_from_spectra(&spectra, &grid)?;
    lap("di_map", &mut timings);
    let localization = localize(&map, options.rel_threshold, options.max_subjects)?;
    lap("localize", &mut timings);

    let subjects = localization
        .detections
        .par_iter()
        .enumerate()
        .map(|(id, det)| {
            let slow_time = spectra.slow_time(&grid, det.azimuth_bin, det.range_bin)?;
            let analysis = analyze_slow_time(&slow_time, fs, &options.vmd)?;
            let ((br_brpm, hr_bpm), source) = match model {
                Some(m) => (m.predict(&analysis.features.vector), EstimateSource::Model),
                None => (analysis.welch_rates(), EstimateSource::Welch),
            };
            let phase = PhaseSignal {
                unwrapped: analysis.unwrapped.clone(),
                range_bin: det.range_bin,
                azimuth_bin: det.azimuth_bin,
                slow_time_rate_hz: fs,
            };
            Ok(SubjectReport {
                id,
                detection: *det,
                range_m: config.range_of_bin(det.range_bin),
                azimuth_deg: grid.angles_deg()[det.azimuth_bin],
                slow_time,
                phase,
                analysis,
                br_brpm,
                hr_bpm,
                source,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    lap("vitals", &mut timings);
    Ok(PipelineOutput { config, grid, map, localization, subjects, timings })
}
