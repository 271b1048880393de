use num_complex::Complex;

use crate::error::{Error, Result};
use crate::radar::RadarConfig;
use crate::real::Real;

/// Complex IF samples indexed `(chirp m, virtual channel j, fast-time n)`,
/// stored chirp-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube<T> {
    samples: Vec<Complex<T>>,
    config: RadarConfig,
}

impl<T: Real> DataCube<T> {
    pub fn new(config: RadarConfig, samples: Vec<Complex<T>>) -> Result<Self> {
        let expected = config.num_chirps * config.virtual_channels() * config.adc_samples;
        if samples.len() != expected {
            return Err(Error::Shape(format!(
                "cube needs {} samples (M={}, J={}, N={}), got {}",
                expected,
                config.num_chirps,
                config.virtual_channels(),
                config.adc_samples,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Shape(format!("non-finite sample at flat index {i}")));
        }
        Ok(Self { samples, config })
    }

    pub fn zeros(config: RadarConfig) -> Self {
        let len = config.num_chirps * config.virtual_channels() * config.adc_samples;
        Self { samples: vec![Complex::new(T::zero(), T::zero()); len], config }
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    /// `(M, J, N)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.config.num_chirps, self.config.virtual_channels(), self.config.adc_samples)
    }

    #[inline]
    fn offset(&self, m: usize, j: usize, n: usize) -> usize {
        let (_, nj, nn) = self.dims();
        (m * nj + j) * nn + n
    }

    #[inline]
    pub fn get(&self, m: usize, j: usize, n: usize) -> Complex<T> {
        self.samples[self.offset(m, j, n)]
    }

    /// Fast-time samples of one chirp on one channel.
    pub fn row(&self, m: usize, j: usize) -> &[Complex<T>] {
        let start = self.offset(m, j, 0);
        &self.samples[start..start + self.config.adc_samples]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn cast<U: Real>(&self) -> DataCube<U> {
        DataCube {
            samples: self
                .samples
                .iter()
                .map(|c| Complex::new(U::lit(c.re.to_f64_lossy()), U::lit(c.im.to_f64_lossy())))
                .collect(),
            config: self.config,
        }
    }

    /// Elementwise sum of two cubes with identical configuration.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.config != other.config {
            return Err(Error::Shape("cannot add cubes with different configurations".into()));
        }
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
            config: self.config,
        })
    }
}
