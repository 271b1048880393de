use super::{centered, check_band, Estimate};
use crate::error::{Error, Result};
use crate::real::Real;

/// A lag peak below this fraction of `R(0)` is not a period.
pub const AUTOCORR_MIN_RATIO: f64 = 0.1;
/// Multiples of the true period score almost as high under the unbiased
/// estimator; the shortest lag within this fraction of the best wins.
const SUBHARMONIC_RATIO: f64 = 0.9;

fn unbiased(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    x[..n].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Period from the unbiased autocorrelation, searched over lags
/// `[fs/band.1, fs/band.0]` and capped at half the signal length so every
/// lag averages at least `len/2` products.
pub fn autocorr_estimate<T: Real>(signal: &[T], fs: f64, band: (f64, f64)) -> Result<Estimate> {
    check_band(fs, band)?;
    let x = centered(signal);
    let lo = ((fs / band.1).ceil() as usize).max(1);
    let hi = if band.0 > 0.0 { (fs / band.0).floor() as usize } else { usize::MAX };
    let hi = hi.min(x.len() / 2);
    if hi <= lo {
        return Err(Error::Param(format!(
            "signal of {} samples too short for lags from {lo} at fs {fs} Hz",
            x.len()
        )));
    }
    let r0 = unbiased(&x, 0);
    if !(r0 > 0.0) {
        return Ok(Estimate::none());
    }
    // One extra lag either side so the search edges can still be maxima.
    let first = lo - 1;
    let r: Vec<f64> = (first..=hi + 1).map(|l| unbiased(&x, l)).collect();
    let at = |l: usize| r[l - first];
    let maxima: Vec<usize> = (lo..=hi).filter(|&l| at(l) >= at(l - 1) && at(l) > at(l + 1)).collect();
    let best = maxima.iter().map(|&l| at(l)).fold(f64::NEG_INFINITY, f64::max);
    if maxima.is_empty() || best < AUTOCORR_MIN_RATIO * r0 {
        return Ok(Estimate::none());
    }
    let lag = *maxima.iter().find(|&&l| at(l) >= SUBHARMONIC_RATIO * best).expect("best is a maximum");
    let (a, b, c) = (at(lag - 1), at(lag), at(lag + 1));
    let den = a - 2.0 * b + c;
    let delta = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
    Ok(Estimate::found(fs / (lag as f64 + delta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn one_hz_tone() {
        let x: Vec<f64> = (0..512).map(|i| (TAU * i as f64 / 20.0).sin()).collect();
        let e = autocorr_estimate(&x, 20.0, (0.8, 2.0)).unwrap();
        assert!(!e.unresolved);
        assert!((e.hz - 1.0).abs() < 1e-3, "{}", e.hz);
    }

    #[test]
    fn subharmonic_guard() {
        // lag 80 and 160 both correlate perfectly; the shorter one wins
        let x: Vec<f64> = (0..512).map(|i| (TAU * 0.25 * i as f64 / 20.0).cos()).collect();
        let e = autocorr_estimate(&x, 20.0, (0.05, 0.6)).unwrap();
        assert!((e.hz - 0.25).abs() < 0.005, "{}", e.hz);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(autocorr_estimate(&vec![1.0f64; 128], 20.0, (0.8, 2.0)).unwrap().unresolved);
        assert!(autocorr_estimate(&vec![1.0f64; 16], 20.0, (0.8, 2.0)).is_err());
    }
}
