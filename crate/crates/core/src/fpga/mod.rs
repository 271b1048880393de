//! Bit-accurate model of the fixed-point hardware chain and its
//! comparison against the float pipeline.

mod cordic;
mod estimate;
mod fft;
mod fixed;
mod pipeline;
mod unwrap;

pub use cordic::{cordic_atan2, CordicResult, CordicUnit, DEFAULT_ITERATIONS};
pub use estimate::{
    band_bins, band_scan_estimate, min_length_for_band, peak_range, psd, BandPick, BandScan, PsdMode, RangePeak,
    MIN_PEAK_RATIO,
};
pub use fft::{fixed_fft, FixedComplex, FixedSpectrum};
pub use fixed::{dequantize, quantize, quantize_counted, FixedFormat, FixedSample, Saturations};
pub use pipeline::{
    compare_pipelines, run_fixed_pipeline, ComparisonReport, CycleModel, FixedOutput, FpgaOptions, PipelineTrace,
    StageError, StageTrace,
};
pub use unwrap::{stream_unwrap, StreamUnwrapper};
