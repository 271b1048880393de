use num_complex::Complex;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::scene::DataCube;

/// Azimuth bins with conventional half-wavelength ULA steering weights
/// `w_k^j = exp(−jπ j sin θ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AzimuthGrid<T> {
    angles_deg: Vec<f64>,
    channels: usize,
    weights: Vec<Complex<T>>,
}

impl<T: Real> AzimuthGrid<T> {
    pub fn new(angles_deg: Vec<f64>, channels: usize) -> Result<Self> {
        if angles_deg.is_empty() || channels == 0 {
            return Err(Error::Param("azimuth grid needs at least one angle and one channel".into()));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Param("azimuth grid angles must be strictly increasing".into()));
        }
        let mut weights = Vec::with_capacity(angles_deg.len() * channels);
        for &a in &angles_deg {
            let step = -PI * a.to_radians().sin();
            for j in 0..channels {
                let (s, c) = (step * j as f64).sin_cos();
                weights.push(Complex::new(T::lit(c), T::lit(s)));
            }
        }
        Ok(Self { angles_deg, channels, weights })
    }

    /// Uniform grid from `min_deg` to `max_deg` inclusive.
    pub fn uniform(min_deg: f64, max_deg: f64, step_deg: f64, channels: usize) -> Result<Self> {
        if !(step_deg > 0.0) || max_deg < min_deg {
            return Err(Error::Param("invalid azimuth grid bounds".into()));
        }
        let count = ((max_deg - min_deg) / step_deg + 1e-9).floor() as usize + 1;
        Self::new((0..count).map(|i| min_deg + i as f64 * step_deg).collect(), channels)
    }

    /// 61 bins over ±60° at 2° spacing.
    pub fn default_for(channels: usize) -> Self {
        Self::uniform(-60.0, 60.0, 2.0, channels).expect("static grid")
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn weights(&self, k: usize) -> &[Complex<T>] {
        &self.weights[k * self.channels..(k + 1) * self.channels]
    }

    /// Index of the grid angle closest to `deg`.
    pub fn nearest(&self, deg: f64) -> usize {
        (0..self.len())
            .min_by(|&a, &b| (self.angles_deg[a] - deg).abs().total_cmp(&(self.angles_deg[b] - deg).abs()))
            .unwrap_or(0)
    }
}

/// Beamformed fast-time data indexed `(azimuth k, chirp m, sample n)`.
#[derive(Debug, Clone)]
pub struct Beamformed<T> {
    pub(crate) values: Vec<Complex<T>>,
    pub(crate) azimuths: usize,
    pub(crate) chirps: usize,
    pub(crate) samples: usize,
}

impl<T: Real> Beamformed<T> {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.azimuths, self.chirps, self.samples)
    }

    pub fn row(&self, k: usize, m: usize) -> &[Complex<T>] {
        let start = (k * self.chirps + m) * self.samples;
        &self.values[start..start + self.samples]
    }
}

/// `out[k][m][n] = Σ_j cube[m][j][n] · w_k^j`.
pub fn beamform<T: Real>(cube: &DataCube<T>, grid: &AzimuthGrid<T>) -> Result<Beamformed<T>> {
    let (nm, nj, nn) = cube.dims();
    if grid.channels() != nj {
        return Err(Error::Shape(format!("grid has {} channels, cube has {nj}", grid.channels())));
    }
    let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len() * nm * nn];
    for k in 0..grid.len() {
        let w = grid.weights(k);
        for m in 0..nm {
            let out = &mut values[(k * nm + m) * nn..(k * nm + m + 1) * nn];
            for (j, wj) in w.iter().enumerate() {
                for (o, x) in out.iter_mut().zip(cube.row(m, j)) {
                    *o += x * wj;
                }
            }
        }
    }
    Ok(Beamformed { values, azimuths: grid.len(), chirps: nm, samples: nn })
}
