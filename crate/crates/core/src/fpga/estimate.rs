use num_complex::Complex;

use super::fft::{fixed_fft, FixedComplex};
use super::fixed::{shift_round, FixedFormat};
use crate::error::{Error, Result};
use crate::radar::RadarConfig;
use crate::scene::{BR_BAND_HZ, HR_BAND_HZ};

/// Peak-to-median power ratio below which a stage reports low confidence.
pub const MIN_PEAK_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsdMode {
    /// `Re(X)² + Im(X)²`.
    #[default]
    Magnitude,
    /// `Re(X²) + Im(X²)`, the expression as printed for the hardware block.
    Literal,
}

/// Power per bin, exact 64-bit products with `2·frac_bits` fractional bits.
pub fn psd(values: &[FixedComplex], mode: PsdMode) -> Vec<i64> {
    values
        .iter()
        .map(|v| {
            let (re, im) = (v.re as i64, v.im as i64);
            match mode {
                PsdMode::Magnitude => re * re + im * im,
                PsdMode::Literal => re * re - im * im + 2 * re * im,
            }
        })
        .collect()
}

fn median(v: &[i64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] as f64 + s[n / 2] as f64) / 2.0
    }
}

fn ratio(peak: i64, median: f64) -> f64 {
    if median > 0.0 {
        peak as f64 / median
    } else if peak > 0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangePeak {
    pub bin: usize,
    pub range_m: f64,
    pub peak_to_median: f64,
}

/// Strongest bin of an accumulated PSD over `1..N/2`, with `R = c·f_b/(2K)`.
/// `None` when every bin is zero.
pub fn peak_range(psd: &[i64], config: &RadarConfig) -> Result<Option<RangePeak>> {
    let half = psd.len() / 2;
    if half < 2 {
        return Err(Error::Size(format!("PSD of length {} has no positive range bins", psd.len())));
    }
    let band = &psd[1..half];
    let (i, &peak) = band.iter().enumerate().max_by_key(|(_, v)| **v).expect("non-empty");
    if peak <= 0 {
        return Ok(None);
    }
    let bin = i + 1;
    Ok(Some(RangePeak { bin, range_m: config.range_of_bin(bin), peak_to_median: ratio(peak, median(band)) }))
}

/// Bins of an `m`-point spectrum at `fs` whose centres lie in `band`.
pub fn band_bins(m: usize, fs: f64, band: (f64, f64)) -> std::ops::RangeInclusive<usize> {
    let lo = (band.0 * m as f64 / fs).ceil().max(1.0) as usize;
    let hi = ((band.1 * m as f64 / fs).floor() as usize).min(m / 2);
    lo..=hi
}

/// Smallest power-of-two length whose spectrum has a bin in `band`.
pub fn min_length_for_band(fs: f64, band: (f64, f64)) -> usize {
    let mut m = 2;
    while band_bins(m, fs, band).is_empty() {
        m *= 2;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPick {
    pub bin: usize,
    pub hz: f64,
    pub peak_to_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandScan {
    pub br: BandPick,
    pub hr: BandPick,
    /// Power of the mean-removed phase spectrum, `2·frac_bits` fractional bits.
    pub psd: Vec<i64>,
    pub saturations: u64,
    pub butterflies: u64,
}

impl BandScan {
    pub fn br_brpm(&self) -> f64 {
        60.0 * self.br.hz
    }

    pub fn hr_bpm(&self) -> f64 {
        60.0 * self.hr.hz
    }

    pub fn low_confidence(&self) -> bool {
        self.br.peak_to_median < MIN_PEAK_RATIO || self.hr.peak_to_median < MIN_PEAK_RATIO
    }
}

fn pick(psd: &[i64], m: usize, fs: f64, band: (f64, f64)) -> BandPick {
    let bins = band_bins(m, fs, band);
    let slice = &psd[bins.clone()];
    let (i, &peak) = slice.iter().enumerate().max_by_key(|(_, v)| **v).expect("band checked non-empty");
    let bin = bins.start() + i;
    BandPick { bin, hz: bin as f64 * fs / m as f64, peak_to_median: ratio(peak, median(slice)) }
}

/// Mean removal, an M-point fixed FFT of the unwrapped phase and the
/// strongest bin in each vital band.
pub fn band_scan_estimate(unwrapped: &[i32], fs: f64, fmt: FixedFormat) -> Result<BandScan> {
    let m = unwrapped.len();
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Size(format!("band scan needs a power-of-two length, got {m}")));
    }
    for band in [BR_BAND_HZ, HR_BAND_HZ] {
        if band_bins(m, fs, band).is_empty() {
            let need = min_length_for_band(fs, BR_BAND_HZ).max(min_length_for_band(fs, HR_BAND_HZ));
            return Err(Error::Size(format!(
                "{m} slow-time samples at {fs} Hz leave no bin in {:?} Hz; need M >= {need}",
                band
            )));
        }
    }
    let sum: i64 = unwrapped.iter().map(|&v| v as i64).sum();
    let mean = shift_round(sum, m.trailing_zeros());
    let centred: Vec<FixedComplex> =
        unwrapped.iter().map(|&v| Complex::new((v as i64 - mean).clamp(i32::MIN as i64, i32::MAX as i64) as i32, 0)).collect();
    let spec = fixed_fft(&centred, fmt)?;
    let power = psd(&spec.values, PsdMode::Magnitude);
    Ok(BandScan {
        br: pick(&power, m, fs, BR_BAND_HZ),
        hr: pick(&power, m, fs, HR_BAND_HZ),
        psd: power,
        saturations: spec.saturations,
        butterflies: spec.butterflies,
    })
}
