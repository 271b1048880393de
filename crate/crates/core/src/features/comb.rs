use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CombOutput<T> {
    pub filtered: Vec<T>,
    /// Delay `D` in samples; `None` when the filter was bypassed.
    pub delay: Option<usize>,
}

impl<T> CombOutput<T> {
    pub fn bypassed(&self) -> bool {
        self.delay.is_none()
    }
}

/// Comb delay for a breathing fundamental, `round(fs / f_br)`.
pub fn comb_delay(f_br: f64, fs: f64) -> usize {
    (fs / f_br).round() as usize
}

/// Magnitude response `|1 − e^{−jωD}| / 2` of the comb at frequency `f`.
pub fn comb_response(f: f64, fs: f64, delay: usize) -> f64 {
    (std::f64::consts::PI * f * delay as f64 / fs).sin().abs()
}

/// `y[n] = (x[n] − x[n−D]) / 2` with zeros before the first sample.
pub fn comb_filter<T: Real>(x_hr: &[T], f_br: f64, fs: f64) -> Result<CombOutput<T>> {
    if !(fs > 0.0 && f_br > 0.0 && f_br < fs / 2.0) {
        return Err(Error::Param(format!("comb fundamental {f_br} Hz must lie in (0, fs/2) for fs = {fs} Hz")));
    }
    let d = comb_delay(f_br, fs);
    if d < 2 || d >= x_hr.len() {
        return Ok(CombOutput { filtered: x_hr.to_vec(), delay: None });
    }
    let half = T::lit(0.5);
    let filtered = (0..x_hr.len())
        .map(|n| {
            let past = if n >= d { x_hr[n - d] } else { T::zero() };
            (x_hr[n] - past) * half
        })
        .collect();
    Ok(CombOutput { filtered, delay: Some(d) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (TAU * f * i as f64 / fs).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn second_harmonic_is_notched() {
        assert_eq!(comb_delay(0.25, 20.0), 80);
        let x = tone(0.5, 20.0, 512);
        let y = comb_filter(&x, 0.25, 20.0).unwrap();
        assert_eq!(y.delay, Some(80));
        let steady = &y.filtered[80..];
        let atten_db = 20.0 * (rms(steady) / rms(&x[80..])).log10();
        assert!(atten_db <= -20.0, "{atten_db}");
        assert!(comb_response(0.5, 20.0, 80) < 1e-12);
    }

    #[test]
    fn dc_is_removed() {
        let y = comb_filter(&vec![3.0f64; 200], 0.25, 20.0).unwrap();
        assert!(y.filtered[80..].iter().all(|v| *v == 0.0));
        assert!(y.filtered[..80].iter().all(|v| *v == 1.5));
    }

    #[test]
    fn midway_tone_passes() {
        for k in 0..5 {
            let f = (k as f64 + 0.5) * 0.25;
            let g = comb_response(f, 20.0, 80);
            assert!(20.0 * g.log10() >= -3.0);
            let x = tone(f, 20.0, 1024);
            let y = comb_filter(&x, 0.25, 20.0).unwrap();
            let gain = rms(&y.filtered[80..]) / rms(&x[80..]);
            assert!(20.0 * gain.log10() >= -3.0, "k {k}: {gain}");
        }
    }

    #[test]
    fn bypass_and_errors() {
        let x = vec![1.0f64; 50];
        assert!(comb_filter(&x, 0.25, 20.0).unwrap().bypassed());
        // D = round(20/9) = 2 is the shortest allowed delay
        assert!(!comb_filter(&x, 9.0, 20.0).unwrap().bypassed());
        assert!(comb_filter(&x, 9.9, 20.0).unwrap().delay == Some(2));
        assert!(comb_filter(&x, 0.0, 20.0).is_err());
        assert!(comb_filter(&x, 10.0, 20.0).is_err());
    }
}
