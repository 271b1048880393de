use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::beamform::{AzimuthGrid, Beamformed};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::scene::DataCube;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    /// Periodic Hann.
    #[default]
    Hann,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients<T: Real>(self, n: usize) -> Vec<T> {
        match self {
            WindowKind::Rectangular => vec![T::one(); n],
            WindowKind::Hann => (0..n)
                .map(|i| {
                    let x = std::f64::consts::TAU * i as f64 / n as f64;
                    T::lit(0.5 - 0.5 * x.cos())
                })
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Hann => "hann",
            WindowKind::Rectangular => "rectangular",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hann" => Some(WindowKind::Hann),
            "rect" | "rectangular" | "none" => Some(WindowKind::Rectangular),
            _ => None,
        }
    }
}

fn plan<T: Real>(n: usize) -> Result<Arc<dyn Fft<T>>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Size(format!("fast-time length {n} is not a power of two")));
    }
    Ok(FftPlanner::<T>::new().plan_fft_forward(n))
}

/// Windowed forward FFT of one fast-time row; returns the positive half.
fn transform_row<T: Real>(
    fft: &dyn Fft<T>,
    window: &[T],
    row: &[Complex<T>],
    buf: &mut Vec<Complex<T>>,
    scratch: &mut [Complex<T>],
) {
    buf.clear();
    buf.extend(row.iter().zip(window).map(|(x, w)| x * *w));
    fft.process_with_scratch(buf, scratch);
    buf.truncate(row.len() / 2);
}

/// Full N-point windowed spectrum of one fast-time row.
pub fn fast_time_fft<T: Real>(row: &[Complex<T>], window: WindowKind) -> Result<Vec<Complex<T>>> {
    let fft = plan::<T>(row.len())?;
    let win = window.coefficients::<T>(row.len());
    let mut buf: Vec<Complex<T>> = row.iter().zip(&win).map(|(x, w)| x * *w).collect();
    fft.process(&mut buf);
    Ok(buf)
}

/// Complex range spectra indexed `(azimuth k, range bin r, chirp m)`, bins `[0, N/2)`.
#[derive(Debug, Clone)]
pub struct RangeAzimuthSeries<T> {
    values: Vec<Complex<T>>,
    azimuths: usize,
    bins: usize,
    chirps: usize,
}

impl<T: Real> RangeAzimuthSeries<T> {
    pub fn from_values(values: Vec<Complex<T>>, azimuths: usize, bins: usize, chirps: usize) -> Result<Self> {
        if values.len() != azimuths * bins * chirps {
            return Err(Error::Shape(format!(
                "series has {} values, expected {azimuths}x{bins}x{chirps}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Shape("series contains non-finite values".into()));
        }
        Ok(Self { values, azimuths, bins, chirps })
    }

    /// `(azimuths, range bins, chirps)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.azimuths, self.bins, self.chirps)
    }

    pub fn slow_time(&self, k: usize, r: usize) -> &[Complex<T>] {
        let start = (k * self.bins + r) * self.chirps;
        &self.values[start..start + self.chirps]
    }

    pub fn get(&self, k: usize, r: usize, m: usize) -> Complex<T> {
        self.values[(k * self.bins + r) * self.chirps + m]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.values
    }
}

/// Per (k, m): window, N-point FFT over fast time, keep the first N/2 bins.
pub fn range_fft<T: Real>(beamformed: &Beamformed<T>, window: WindowKind) -> Result<RangeAzimuthSeries<T>> {
    let (nk, nm, nn) = beamformed.dims();
    let fft = plan::<T>(nn)?;
    let win = window.coefficients::<T>(nn);
    let half = nn / 2;
    let zero = Complex::new(T::zero(), T::zero());
    let mut values = vec![zero; nk * half * nm];
    values.par_chunks_mut(half * nm).enumerate().for_each(|(k, slab)| {
        let mut buf = Vec::with_capacity(nn);
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        for m in 0..nm {
            transform_row(fft.as_ref(), &win, beamformed.row(k, m), &mut buf, &mut scratch);
            for (r, v) in buf.iter().enumerate() {
                slab[r * nm + m] = *v;
            }
        }
    });
    RangeAzimuthSeries::from_values(values, nk, half, nm)
}

/// Range spectra of every virtual channel, indexed `(chirp m, channel j, bin r)`.
///
/// Beamforming and the range FFT are both linear, so steering these spectra
/// gives the same series as `range_fft(beamform(cube))` at a fraction of the
/// cost when the azimuth grid is larger than the array.
#[derive(Debug, Clone)]
pub struct ChannelSpectra<T> {
    values: Vec<Complex<T>>,
    chirps: usize,
    channels: usize,
    bins: usize,
}

impl<T: Real> ChannelSpectra<T> {
    pub fn compute(cube: &DataCube<T>, window: WindowKind) -> Result<Self> {
        let (nm, nj, nn) = cube.dims();
        let fft = plan::<T>(nn)?;
        let win = window.coefficients::<T>(nn);
        let half = nn / 2;
        let zero = Complex::new(T::zero(), T::zero());
        let mut values = vec![zero; nm * nj * half];
        values.par_chunks_mut(nj * half).enumerate().for_each(|(m, chunk)| {
            let mut buf = Vec::with_capacity(nn);
            let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
            for j in 0..nj {
                transform_row(fft.as_ref(), &win, cube.row(m, j), &mut buf, &mut scratch);
                chunk[j * half..(j + 1) * half].copy_from_slice(&buf);
            }
        });
        Ok(Self { values, chirps: nm, channels: nj, bins: half })
    }

    /// `(chirps, channels, range bins)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.chirps, self.channels, self.bins)
    }

    pub fn get(&self, m: usize, j: usize, r: usize) -> Complex<T> {
        self.values[(m * self.channels + j) * self.bins + r]
    }

    fn check(&self, grid: &AzimuthGrid<T>) -> Result<()> {
        if grid.channels() != self.channels {
            return Err(Error::Shape(format!(
                "grid has {} channels, spectra have {}",
                grid.channels(),
                self.channels
            )));
        }
        Ok(())
    }

    /// Steered slow-time series at one (azimuth, range) bin.
    pub fn slow_time(&self, grid: &AzimuthGrid<T>, k: usize, r: usize) -> Result<Vec<Complex<T>>> {
        self.check(grid)?;
        let w = grid.weights(k);
        Ok((0..self.chirps)
            .map(|m| {
                let base = m * self.channels * self.bins + r;
                w.iter()
                    .enumerate()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (j, wj)| acc + self.values[base + j * self.bins] * wj)
            })
            .collect())
    }

    /// All slow-time series for azimuth bin `k`, laid out `(r, m)`.
    pub fn azimuth_slab(&self, grid: &AzimuthGrid<T>, k: usize) -> Result<Vec<Complex<T>>> {
        self.check(grid)?;
        let w = grid.weights(k);
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.bins * self.chirps];
        let mut row = vec![zero; self.bins];
        for m in 0..self.chirps {
            row.fill(zero);
            for (j, wj) in w.iter().enumerate() {
                let src = &self.values[(m * self.channels + j) * self.bins..][..self.bins];
                for (o, x) in row.iter_mut().zip(src) {
                    *o = *o + x * wj;
                }
            }
            for (r, v) in row.iter().enumerate() {
                out[r * self.chirps + m] = *v;
            }
        }
        Ok(out)
    }

    /// Mean |Y| over slow time of every range bin of azimuth bin `k`.
    pub fn mean_magnitudes(&self, grid: &AzimuthGrid<T>, k: usize) -> Result<Vec<T>> {
        self.check(grid)?;
        let w = grid.weights(k);
        let zero = Complex::new(T::zero(), T::zero());
        let mut acc = vec![T::zero(); self.bins];
        let mut row = vec![zero; self.bins];
        for m in 0..self.chirps {
            row.fill(zero);
            for (j, wj) in w.iter().enumerate() {
                let src = &self.values[(m * self.channels + j) * self.bins..][..self.bins];
                for (o, x) in row.iter_mut().zip(src) {
                    *o = *o + x * wj;
                }
            }
            for (a, v) in acc.iter_mut().zip(&row) {
                *a += v.norm_sqr().sqrt();
            }
        }
        let n = T::from_usize_lossy(self.chirps);
        Ok(acc.into_iter().map(|a| a / n).collect())
    }

    pub fn to_series(&self, grid: &AzimuthGrid<T>) -> Result<RangeAzimuthSeries<T>> {
        self.check(grid)?;
        let slabs: Vec<Vec<Complex<T>>> =
            (0..grid.len()).into_par_iter().map(|k| self.azimuth_slab(grid, k)).collect::<Result<_>>()?;
        RangeAzimuthSeries::from_values(slabs.concat(), grid.len(), self.bins, self.chirps)
    }
}
