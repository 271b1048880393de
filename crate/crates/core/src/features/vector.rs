use super::{autocorr_estimate, comb_filter, peak_count_estimate, welch_estimate, Estimate, BR_WELCH_PEAKS, HR_WELCH_PEAKS};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::scene::{BR_BAND_HZ, HR_BAND_HZ};

pub const FEATURE_COUNT: usize = 9;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["br_w", "br_a", "br_p", "hr_w", "hr_a", "hr_p", "hr_wc", "hr_ac", "hr_pc"];

const BR_LIMIT_HZ: f64 = 0.7;
const HR_LIMIT_HZ: f64 = 2.5;

/// The nine frequency estimates, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub br_w: f64,
    pub br_a: f64,
    pub br_p: f64,
    pub hr_w: f64,
    pub hr_a: f64,
    pub hr_p: f64,
    pub hr_wc: f64,
    pub hr_ac: f64,
    pub hr_pc: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [self.br_w, self.br_a, self.br_p, self.hr_w, self.hr_a, self.hr_p, self.hr_wc, self.hr_ac, self.hr_pc]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Param(format!("feature {} must be finite and >= 0, got {}", FEATURE_NAMES[i], v[i])));
        }
        let [br_w, br_a, br_p, hr_w, hr_a, hr_p, hr_wc, hr_ac, hr_pc] = v;
        Ok(Self { br_w, br_a, br_p, hr_w, hr_a, hr_p, hr_wc, hr_ac, hr_pc })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedFeatures {
    pub vector: FeatureVector,
    /// Estimator found nothing; the band midpoint was substituted.
    pub unresolved: [bool; FEATURE_COUNT],
    /// Estimate exceeded the physiological limit and was clamped.
    pub clamped: [bool; FEATURE_COUNT],
    pub comb_bypassed: bool,
}

impl ExtractedFeatures {
    pub fn low_confidence(&self) -> bool {
        self.comb_bypassed || self.unresolved.iter().any(|u| *u)
    }
}

fn estimates<T: Real>(x: &[T], fs: f64, band: (f64, f64), l_peaks: usize) -> Result<[Estimate; 3]> {
    Ok([
        welch_estimate(x, fs, band, l_peaks)?,
        autocorr_estimate(x, fs, band)?,
        peak_count_estimate(x, fs, band, x.len() as f64 / fs)?,
    ])
}

/// All nine features from the breathing and heartbeat modes. The comb is
/// tuned to `f_br_hint`, or to the breathing Welch estimate when absent,
/// and its warm-up samples are dropped before estimating.
pub fn extract_features<T: Real>(x_br: &[T], x_hr: &[T], f_br_hint: Option<f64>, fs: f64) -> Result<ExtractedFeatures> {
    let br = estimates(x_br, fs, BR_BAND_HZ, BR_WELCH_PEAKS)?;
    let hr = estimates(x_hr, fs, HR_BAND_HZ, HR_WELCH_PEAKS)?;
    let br_mid = 0.5 * (BR_BAND_HZ.0 + BR_BAND_HZ.1);
    let hr_mid = 0.5 * (HR_BAND_HZ.0 + HR_BAND_HZ.1);
    let br_w = if br[0].unresolved { br_mid } else { br[0].hz };
    let hint = f_br_hint.unwrap_or(br_w);

    let comb = comb_filter(x_hr, hint, fs)?;
    let (hr_c, comb_bypassed) = match comb.delay {
        Some(d) if comb.filtered.len() - d >= 64 => (estimates(&comb.filtered[d..], fs, HR_BAND_HZ, HR_WELCH_PEAKS)?, false),
        _ => (hr, true),
    };

    let mut values = [0.0; FEATURE_COUNT];
    let mut unresolved = [false; FEATURE_COUNT];
    let mut clamped = [false; FEATURE_COUNT];
    for (i, e) in br.iter().chain(&hr).chain(&hr_c).enumerate() {
        let (mid, limit) = if i < 3 { (br_mid, BR_LIMIT_HZ) } else { (hr_mid, HR_LIMIT_HZ) };
        unresolved[i] = e.unresolved;
        let v = if e.unresolved { mid } else { e.hz };
        clamped[i] = v > limit;
        values[i] = v.min(limit);
    }
    Ok(ExtractedFeatures { vector: FeatureVector::from_array(values)?, unresolved, clamped, comb_bypassed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn array_round_trip() {
        let v = FeatureVector::from_array([0.1, 0.2, 0.3, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5]).unwrap();
        assert_eq!(v.hr_wc, 1.3);
        assert_eq!(FeatureVector::from_array(v.to_array()).unwrap(), v);
        assert!(FeatureVector::from_array([f64::NAN; 9]).is_err());
        assert!(FeatureVector::from_array([-1.0; 9]).is_err());
    }

    #[test]
    fn zero_input_falls_back_to_midpoints() {
        let z = vec![0.0f64; 512];
        let f = extract_features(&z, &z, None, 20.0).unwrap();
        assert!(f.unresolved.iter().all(|u| *u));
        assert!(f.low_confidence());
        let v = f.vector.to_array();
        assert!(v[..3].iter().all(|x| (*x - 0.325).abs() < 1e-12));
        assert!(v[3..].iter().all(|x| (*x - 1.4).abs() < 1e-12));
    }

    #[test]
    fn clean_tones() {
        let br: Vec<f64> = (0..512).map(|i| 4.0 * (TAU * 0.25 * i as f64 / 20.0).sin()).collect();
        let hr: Vec<f64> = (0..512).map(|i| 0.3 * (TAU * 1.1 * i as f64 / 20.0).sin()).collect();
        let f = extract_features(&br, &hr, None, 20.0).unwrap();
        let bin = 20.0 / 1024.0;
        assert!((f.vector.br_w - 0.25).abs() <= bin);
        assert!((f.vector.br_a - 0.25).abs() <= bin);
        assert!((f.vector.hr_w - 1.1).abs() <= bin);
        assert!((f.vector.hr_wc - 1.1).abs() <= bin);
        assert!(!f.comb_bypassed);
        assert!(f.clamped.iter().all(|c| !c));
    }
}
