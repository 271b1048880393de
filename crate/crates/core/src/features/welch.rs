use num_complex::Complex;
use rustfft::FftPlanner;

use super::{centered, check_band, Estimate};
use crate::error::{Error, Result};
use crate::real::Real;

pub const BR_WELCH_PEAKS: usize = 1;
pub const HR_WELCH_PEAKS: usize = 3;

const MAX_SEGMENT: usize = 256;
const ZERO_PAD: usize = 4;
/// Peaks weaker than this fraction of the strongest in-band peak are
/// window sidelobes, not separate components.
const MIN_PEAK_RATIO: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct WelchPsd {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
    pub segment_len: usize,
}

impl WelchPsd {
    pub fn bin_hz(&self) -> f64 {
        self.freqs_hz.get(1).copied().unwrap_or(0.0)
    }
}

/// One-sided Welch PSD: Hann segments of `min(256, len/2)` samples, 50%
/// overlap, per-segment mean removal, 4× zero padding.
pub fn welch_psd<T: Real>(signal: &[T], fs: f64) -> Result<WelchPsd> {
    if signal.len() < 64 {
        return Err(Error::Param(format!("Welch needs at least 64 samples, got {}", signal.len())));
    }
    if !(fs > 0.0) {
        return Err(Error::Param(format!("sample rate must be positive, got {fs}")));
    }
    let x: Vec<f64> = signal.iter().map(|s| s.to_f64_lossy()).collect();
    let seg = MAX_SEGMENT.min(x.len() / 2);
    let step = seg / 2;
    let nfft = seg * ZERO_PAD;
    let win: Vec<f64> = (0..seg).map(|n| 0.5 - 0.5 * (std::f64::consts::TAU * n as f64 / seg as f64).cos()).collect();
    let wss: f64 = win.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let half = nfft / 2 + 1;
    let mut power = vec![0.0; half];
    let mut count = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start + seg <= x.len() {
        let part = centered(&x[start..start + seg]);
        buf.fill(Complex::new(0.0, 0.0));
        for ((b, v), w) in buf.iter_mut().zip(&part).zip(&win) {
            b.re = v * w;
        }
        fft.process(&mut buf);
        for (p, b) in power.iter_mut().zip(&buf) {
            *p += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let scale = 1.0 / (fs * wss * count as f64);
    for (i, p) in power.iter_mut().enumerate() {
        *p *= if i == 0 || i == half - 1 { scale } else { 2.0 * scale };
    }
    let freqs_hz = (0..half).map(|i| i as f64 * fs / nfft as f64).collect();
    Ok(WelchPsd { freqs_hz, power, segment_len: seg })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Peak location refined by a parabola through the log-power of the peak
/// and its neighbors (exact for a Gaussian-shaped lobe).
fn refine(psd: &WelchPsd, i: usize) -> f64 {
    let (a, b, c) = (psd.power[i - 1], psd.power[i], psd.power[i + 1]);
    if a <= 0.0 || c <= 0.0 {
        return psd.freqs_hz[i];
    }
    let (la, lb, lc) = (a.ln(), b.ln(), c.ln());
    let den = la - 2.0 * lb + lc;
    let delta = if den < 0.0 { (0.5 * (la - lc) / den).clamp(-0.5, 0.5) } else { 0.0 };
    psd.freqs_hz[i] + delta * psd.bin_hz()
}

/// Welch frequency estimate in `band`. With `l_peaks = 1` this is the
/// strongest in-band peak; otherwise the power-weighted mean of up to
/// `l_peaks` distinct peaks.
pub fn welch_estimate<T: Real>(signal: &[T], fs: f64, band: (f64, f64), l_peaks: usize) -> Result<Estimate> {
    check_band(fs, band)?;
    if l_peaks == 0 {
        return Err(Error::Param("Welch estimate needs at least one peak".into()));
    }
    let psd = welch_psd(signal, fs)?;
    let floor = median(&psd.power);
    let p = &psd.power;
    let mut peaks: Vec<usize> = (1..p.len() - 1)
        .filter(|&i| {
            let f = psd.freqs_hz[i];
            f >= band.0 && f <= band.1 && p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > floor
        })
        .collect();
    peaks.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let Some(&top) = peaks.first() else {
        return Ok(Estimate::none());
    };
    // Peaks inside a stronger peak's Hann mainlobe are the same component.
    let mainlobe = 2.0 * fs / psd.segment_len as f64;
    let mut chosen: Vec<(f64, f64)> = Vec::with_capacity(l_peaks);
    for &i in &peaks {
        if chosen.len() == l_peaks || p[i] < MIN_PEAK_RATIO * p[top] {
            break;
        }
        let f = refine(&psd, i);
        if chosen.iter().all(|&(g, _)| (g - f).abs() > mainlobe) {
            chosen.push((f, p[i]));
        }
    }
    let total: f64 = chosen.iter().map(|c| c.1).sum();
    let hz = chosen.iter().map(|(f, w)| f * w).sum::<f64>() / total;
    Ok(Estimate::found(hz.clamp(band.0, band.1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(f: f64, amp: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| amp * (TAU * f * i as f64 / 20.0).sin()).collect()
    }

    #[test]
    fn psd_layout() {
        let psd = welch_psd(&tone(1.0, 1.0, 512), 20.0).unwrap();
        assert_eq!(psd.segment_len, 256);
        assert_eq!(psd.power.len(), 513);
        assert!((psd.bin_hz() - 20.0 / 1024.0).abs() < 1e-15);
        let short = welch_psd(&tone(1.0, 1.0, 100), 20.0).unwrap();
        assert_eq!(short.segment_len, 50);
        assert!(welch_psd(&tone(1.0, 1.0, 63), 20.0).is_err());
    }

    #[test]
    fn single_tones() {
        let br = welch_estimate(&tone(0.25, 1.0, 512), 20.0, (0.05, 0.6), 1).unwrap();
        assert!(!br.unresolved);
        assert!((br.hz - 0.25).abs() <= 20.0 / 1024.0, "{}", br.hz);
        let hr = welch_estimate(&tone(1.0, 1.0, 512), 20.0, (0.8, 2.0), 3).unwrap();
        assert!((hr.hz - 1.0).abs() <= 20.0 / 1024.0, "{}", hr.hz);
    }

    #[test]
    fn empty_band_is_unresolved() {
        let e = welch_estimate(&vec![0.0f64; 256], 20.0, (0.8, 2.0), 3).unwrap();
        assert!(e.unresolved);
        assert!(welch_estimate(&tone(1.0, 1.0, 256), 20.0, (2.0, 0.8), 3).is_err());
    }
}
