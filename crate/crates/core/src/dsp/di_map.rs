use num_complex::Complex;
use rayon::prelude::*;

use super::beamform::AzimuthGrid;
use super::dc_offset::{dc_offset_correct, DcStatus};
use super::phase::{extract_phase, unwrap_phase};
use super::range_fft::{ChannelSpectra, RangeAzimuthSeries};
use crate::error::{Error, Result};
use crate::real::Real;

/// Absolute detection floor as a multiple of the map median.
pub const NOISE_FLOOR_FACTOR: f64 = 10.0;

/// Magnitude-masked DI variance over (azimuth k, range bin r), rad².
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAzimuthMap<T> {
    pub di_variance: Vec<T>,
    pub azimuths: usize,
    pub bins: usize,
    /// Noise floor below which no bin is reported, rad².
    pub threshold_used: T,
}

impl<T: Real> RangeAzimuthMap<T> {
    pub fn new(di_variance: Vec<T>, azimuths: usize, bins: usize, threshold_used: T) -> Result<Self> {
        if di_variance.len() != azimuths * bins {
            return Err(Error::Shape(format!(
                "map has {} values, expected {azimuths}x{bins}",
                di_variance.len()
            )));
        }
        if di_variance.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Shape("map entries must be finite and non-negative".into()));
        }
        Ok(Self { di_variance, azimuths, bins, threshold_used })
    }

    pub fn get(&self, k: usize, r: usize) -> T {
        self.di_variance[k * self.bins + r]
    }

    pub fn max(&self) -> T {
        self.di_variance.iter().copied().fold(T::zero(), T::max)
    }
}

/// Bins whose magnitude mask (mean |Y| over the map's largest mean |Y|) is
/// below this are treated as empty and get a zero DI value.
pub const MIN_MASK: f64 = 0.02;

/// Bins whose mean |Y| is below this multiple of the map's median mean |Y|
/// are treated as noise and get a zero DI value. Without this gate a
/// noise-only map has unit mask everywhere and the random-walk variance of
/// unwrapped noise phase dominates.
pub const MAGNITUDE_GATE: f64 = 4.0;

fn mean_magnitude<T: Real>(slow_time: &[Complex<T>]) -> T {
    slow_time.iter().map(|v| v.norm_sqr().sqrt()).sum::<T>() / T::from_usize_lossy(slow_time.len())
}

/// Bins whose slow-time constellation departs from a circle by more than
/// this fraction of its radius (RMS) are mixtures of several moving
/// scatterers, typically sidelobes of two subjects at the same range, and
/// get a zero DI value.
pub const MAX_CIRCLE_RESIDUAL: f64 = 0.25;

fn phase_variance<T: Real>(slow_time: &[Complex<T>]) -> Result<T> {
    let dc = dc_offset_correct(slow_time)?;
    if dc.fit.status != DcStatus::Degenerate && dc.fit.rms_residual > dc.fit.radius * T::lit(MAX_CIRCLE_RESIDUAL) {
        return Ok(T::zero());
    }
    let phase = unwrap_phase(&extract_phase(&dc.corrected)?.values)?;
    let n = T::from_usize_lossy(phase.len());
    let mean = phase.iter().copied().sum::<T>() / n;
    Ok(phase.iter().map(|&p| (p - mean) * (p - mean)).sum::<T>() / n)
}

/// Unmasked DI statistic of one bin: `(variance of unwrapped DC-corrected
/// phase, mean |Y|)`.
pub fn di_value<T: Real>(slow_time: &[Complex<T>]) -> Result<(T, T)> {
    let mean_mag = mean_magnitude(slow_time);
    if mean_mag == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    Ok((phase_variance(slow_time)?, mean_mag))
}

#[derive(Clone, Copy)]
struct Gate<T> {
    peak: T,
    floor: T,
}

impl<T: Real> Gate<T> {
    fn new(mags: &[T]) -> Self {
        let peak = max_of(mags);
        let floor = (median(mags) * T::lit(MAGNITUDE_GATE)).max(peak * T::lit(MIN_MASK));
        Self { peak, floor }
    }

    fn value(&self, slow_time: &[Complex<T>], mean_mag: T) -> Result<T> {
        if !(self.peak > T::zero()) || mean_mag < self.floor || mean_mag == T::zero() {
            return Ok(T::zero());
        }
        Ok(phase_variance(slow_time)? * (mean_mag / self.peak))
    }
}

fn median<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    sorted[sorted.len() / 2]
}

fn finish<T: Real>(values: Vec<T>, azimuths: usize, bins: usize) -> Result<RangeAzimuthMap<T>> {
    let floor = median(&values) * T::lit(NOISE_FLOOR_FACTOR);
    RangeAzimuthMap::new(values, azimuths, bins, floor)
}

fn max_of<T: Real>(v: &[T]) -> T {
    v.iter().copied().fold(T::zero(), T::max)
}

fn check_chirps(m: usize) -> Result<()> {
    if m < 16 {
        return Err(Error::Param(format!("DI map needs at least 16 chirps, got {m}")));
    }
    Ok(())
}

/// DI variance of every bin of a materialized series.
pub fn di_variance_map<T: Real>(series: &RangeAzimuthSeries<T>) -> Result<RangeAzimuthMap<T>> {
    let (nk, nr, nm) = series.dims();
    check_chirps(nm)?;
    let mags: Vec<T> = (0..nk * nr).into_par_iter().map(|i| mean_magnitude(series.slow_time(i / nr, i % nr))).collect();
    let gate = Gate::new(&mags);
    let values = (0..nk * nr)
        .into_par_iter()
        .map(|i| gate.value(series.slow_time(i / nr, i % nr), mags[i]))
        .collect::<Result<Vec<_>>>()?;
    finish(values, nk, nr)
}

/// Same map as [`di_variance_map`] on the steered series, computed one
/// azimuth slab at a time without materializing the full series.
pub fn di_variance_map_from_spectra<T: Real>(
    spectra: &ChannelSpectra<T>,
    grid: &AzimuthGrid<T>,
) -> Result<RangeAzimuthMap<T>> {
    let (nm, _, nr) = spectra.dims();
    check_chirps(nm)?;
    let mags = (0..grid.len())
        .into_par_iter()
        .map(|k| spectra.mean_magnitudes(grid, k))
        .collect::<Result<Vec<_>>>()?
        .concat();
    let gate = Gate::new(&mags);
    // Only bins passing the gate need their series again; steer those one
    // at a time instead of rebuilding every slab.
    let values = (0..grid.len() * nr)
        .into_par_iter()
        .map(|i| {
            if mags[i] < gate.floor {
                return Ok(T::zero());
            }
            gate.value(&spectra.slow_time(grid, i / nr, i % nr)?, mags[i])
        })
        .collect::<Result<Vec<_>>>()?;
    finish(values, grid.len(), nr)
}
