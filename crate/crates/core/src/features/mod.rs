//! Comb filtering, the three frequency estimators and the nine-feature
//! vector fed to the regressors.

mod autocorr;
mod comb;
mod peaks;
mod vector;
mod welch;

pub use autocorr::{autocorr_estimate, AUTOCORR_MIN_RATIO};
pub use comb::{comb_delay, comb_filter, comb_response, CombOutput};
pub use peaks::{peak_count_estimate, PEAK_PROMINENCE};
pub use vector::{extract_features, ExtractedFeatures, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use welch::{welch_estimate, welch_psd, WelchPsd, BR_WELCH_PEAKS, HR_WELCH_PEAKS};

use crate::error::{Error, Result};

/// A frequency estimate in Hz. `unresolved` marks an estimator that found
/// nothing usable in its band; `hz` is then 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub hz: f64,
    pub unresolved: bool,
}

impl Estimate {
    pub(crate) fn found(hz: f64) -> Self {
        Self { hz, unresolved: false }
    }

    pub(crate) fn none() -> Self {
        Self { hz: 0.0, unresolved: true }
    }
}

pub(crate) fn check_band(fs: f64, band: (f64, f64)) -> Result<()> {
    if !(fs > 0.0) {
        return Err(Error::Param(format!("sample rate must be positive, got {fs}")));
    }
    if !(band.0 >= 0.0 && band.0 < band.1 && band.1 <= fs / 2.0) {
        return Err(Error::Param(format!("band {band:?} must satisfy 0 <= lo < hi <= fs/2 = {}", fs / 2.0)));
    }
    Ok(())
}

/// Signal as mean-removed `f64`.
pub(crate) fn centered<T: crate::Real>(x: &[T]) -> Vec<f64> {
    let v: Vec<f64> = x.iter().map(|s| s.to_f64_lossy()).collect();
    let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
    v.into_iter().map(|s| s - mean).collect()
}
