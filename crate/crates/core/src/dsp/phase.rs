use num_complex::Complex;

use crate::error::{Error, Result};
use crate::real::{wrap_to_pi, Real};

/// Wrapped slow-time phase in (−π, π].
#[derive(Debug, Clone, PartialEq)]
pub struct WrappedPhase<T> {
    pub values: Vec<T>,
    /// Samples with zero magnitude; they hold the previous phase.
    pub zero_magnitude: usize,
}

/// Unwrapped phase of one localized bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSignal<T> {
    pub unwrapped: Vec<T>,
    pub range_bin: usize,
    pub azimuth_bin: usize,
    pub slow_time_rate_hz: f64,
}

impl<T: Real> PhaseSignal<T> {
    pub fn len(&self) -> usize {
        self.unwrapped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unwrapped.is_empty()
    }

    pub fn rewrapped(&self) -> Vec<T> {
        self.unwrapped.iter().map(|&x| wrap_to_pi(x)).collect()
    }
}

/// `atan2(Im, Re)` with −π folded onto π.
pub fn extract_phase<T: Real>(series: &[Complex<T>]) -> Result<WrappedPhase<T>> {
    if series.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Param("slow-time series contains non-finite samples".into()));
    }
    let mut values = Vec::with_capacity(series.len());
    let mut zero_magnitude = 0;
    let mut prev = T::zero();
    for v in series {
        let phi = if v.re == T::zero() && v.im == T::zero() {
            zero_magnitude += 1;
            prev
        } else {
            let a = v.im.atan2(v.re);
            if a <= -T::PI() {
                T::PI()
            } else {
                a
            }
        };
        values.push(phi);
        prev = phi;
    }
    Ok(WrappedPhase { values, zero_magnitude })
}

/// `out[0] = in[0]`, `out[m] = out[m−1] + wrapToPi(in[m] − in[m−1])`.
pub fn unwrap_phase<T: Real>(wrapped: &[T]) -> Result<Vec<T>> {
    if wrapped.len() < 2 {
        return Err(Error::Param(format!("unwrap needs at least 2 samples, got {}", wrapped.len())));
    }
    // Track the integer number of turns so samples that need no correction
    // are passed through bit-exactly.
    let two_pi = T::TAU();
    let mut turns = T::zero();
    let mut out = Vec::with_capacity(wrapped.len());
    out.push(wrapped[0]);
    for w in wrapped.windows(2) {
        let diff = w[1] - w[0];
        turns += ((wrap_to_pi(diff) - diff) / two_pi).round();
        out.push(w[1] + turns * two_pi);
    }
    Ok(out)
}
