use std::f64::consts::TAU;

use num_complex::Complex;

use super::fixed::{mul_raw, quantize, shift_round, FixedFormat, Saturations};
use crate::error::{Error, Result};

/// Raw complex fixed-point value.
pub type FixedComplex = Complex<i32>;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedSpectrum {
    /// `X[k] / N` in the input format.
    pub values: Vec<FixedComplex>,
    pub saturations: u64,
    pub butterflies: u64,
}

/// Twiddles `e^{−j2πk/N}`, `k < N/2`, in the data format.
fn twiddles(n: usize, fmt: FixedFormat) -> Vec<FixedComplex> {
    (0..n / 2)
        .map(|k| {
            let a = -TAU * k as f64 / n as f64;
            let q = |v: f64| quantize(v, fmt).expect("unit twiddle is finite").raw;
            Complex::new(q(a.cos()), q(a.sin()))
        })
        .collect()
}

/// Radix-2 decimation-in-time FFT. Every butterfly output is halved with
/// round-to-nearest-even, so the result is `X[k]/N` and cannot grow past
/// the input range.
pub fn fixed_fft(input: &[FixedComplex], fmt: FixedFormat) -> Result<FixedSpectrum> {
    let n = input.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Size(format!("fixed FFT length must be a power of two >= 2, got {n}")));
    }
    let bits = n.trailing_zeros();
    let mut x: Vec<FixedComplex> = (0..n).map(|i| input[i.reverse_bits() >> (usize::BITS - bits)]).collect();
    let tw = twiddles(n, fmt);
    let mut sat = Saturations::default();
    let mut butterflies = 0u64;
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for j in 0..len / 2 {
                let w = tw[j * stride];
                let (a, b) = (x[start + j], x[start + j + len / 2]);
                let t_re = mul_raw(b.re, w.re, fmt) - mul_raw(b.im, w.im, fmt);
                let t_im = mul_raw(b.re, w.im, fmt) + mul_raw(b.im, w.re, fmt);
                let half = |v: i64, sat: &mut Saturations| sat.clamp(shift_round(v, 1));
                x[start + j] = Complex::new(half(a.re as i64 + t_re, &mut sat), half(a.im as i64 + t_im, &mut sat));
                x[start + j + len / 2] =
                    Complex::new(half(a.re as i64 - t_re, &mut sat), half(a.im as i64 - t_im, &mut sat));
                butterflies += 1;
            }
        }
        len *= 2;
    }
    Ok(FixedSpectrum { values: x, saturations: sat.0, butterflies })
}
