//! Floating-point chain from IF data cube to per-subject unwrapped phase.

mod beamform;
mod dc_offset;
mod di_map;
mod localize;
mod phase;
mod range_fft;

pub use beamform::{beamform, AzimuthGrid, Beamformed};
pub use dc_offset::{dc_offset_correct, fit_circle, CircleFit, DcCorrection, DcStatus};
pub use di_map::{
    di_value, di_variance_map, di_variance_map_from_spectra, RangeAzimuthMap, MAGNITUDE_GATE, MAX_CIRCLE_RESIDUAL, MIN_MASK, NOISE_FLOOR_FACTOR,
};
pub use localize::{localize, Detection, Localization, DEFAULT_REL_THRESHOLD};
pub use phase::{extract_phase, unwrap_phase, PhaseSignal, WrappedPhase};
pub use range_fft::{fast_time_fft, range_fft, ChannelSpectra, RangeAzimuthSeries, WindowKind};
