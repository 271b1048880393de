use std::f64::consts::PI;

use super::fixed::{shift_round, FixedFormat, FixedSample};

pub const DEFAULT_ITERATIONS: u32 = 24;

/// Fractional bits of the internal angle accumulator.
const ANGLE_FRAC: u32 = 60;
/// Fractional bits of the gain-compensation constant.
const GAIN_FRAC: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CordicResult {
    pub phase: FixedSample,
    /// `sqrt(re² + im²)` after gain compensation.
    pub magnitude: FixedSample,
}

/// Vectoring-mode CORDIC. Inputs are normalized so the top set bit sits at
/// bit 59, leaving headroom for the 1.647 gain, and the angle accumulates
/// at 60 fractional bits before a single rounding into `re.format`.
/// Returns `None` at the origin.
pub fn cordic_atan2(im: FixedSample, re: FixedSample, iterations: u32) -> Option<CordicResult> {
    let fmt = re.format;
    let (mut x, mut y) = (re.raw as i64, im.raw as i64);
    if x == 0 && y == 0 {
        return None;
    }
    let shift = (x.unsigned_abs().max(y.unsigned_abs())).leading_zeros() as i32 - 4;
    x <<= shift;
    y <<= shift;
    let pi_acc = (PI * (ANGLE_FRAC as f64).exp2()) as i64;
    let mut z: i64 = 0;
    if x < 0 {
        z = if y >= 0 { pi_acc } else { -pi_acc };
        x = -x;
        y = -y;
    }
    let n = iterations.min(ANGLE_FRAC);
    for i in 0..n {
        let step = ((-(i as f64)).exp2().atan() * (ANGLE_FRAC as f64).exp2()) as i64;
        let (xs, ys) = (x >> i, y >> i);
        if y > 0 {
            x += ys;
            y -= xs;
            z += step;
        } else {
            x -= ys;
            y += xs;
            z -= step;
        }
    }
    let phase_raw = shift_round(z, ANGLE_FRAC - fmt.frac_bits()) as i32;
    let mag = x as i128 * gain(n) as i128;
    let mag_raw = shift_round_i128(mag, GAIN_FRAC + shift as u32);
    Some(CordicResult {
        phase: FixedSample { raw: phase_raw, format: fmt },
        magnitude: FixedSample { raw: mag_raw.clamp(i32::MIN as i128, i32::MAX as i128) as i32, format: fmt },
    })
}

fn shift_round_i128(v: i128, shift: u32) -> i128 {
    let q = v >> shift;
    let r = v - (q << shift);
    let half = 1i128 << (shift - 1);
    if r > half || (r == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// `Π 1/sqrt(1 + 2^-2i)` quantized to `GAIN_FRAC` bits.
fn gain(iterations: u32) -> i64 {
    let k: f64 = (0..iterations).map(|i| 1.0 / (1.0 + (-2.0 * i as f64).exp2()).sqrt()).product();
    (k * (GAIN_FRAC as f64).exp2()).round() as i64
}

/// Streaming phase extractor that repeats the previous phase when the
/// input sits at the origin.
#[derive(Debug, Clone)]
pub struct CordicUnit {
    pub iterations: u32,
    pub format: FixedFormat,
    prev: i32,
    pub held: u64,
}

impl CordicUnit {
    pub fn new(format: FixedFormat, iterations: u32) -> Self {
        Self { iterations, format, prev: 0, held: 0 }
    }

    pub fn phase(&mut self, re: i32, im: i32) -> i32 {
        let s = |raw| FixedSample { raw, format: self.format };
        match cordic_atan2(s(im), s(re), self.iterations) {
            Some(r) => self.prev = r.phase.raw,
            None => self.held += 1,
        }
        self.prev
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpga::fixed::{dequantize, quantize};

    fn q(v: f64) -> FixedSample {
        quantize(v, FixedFormat::Q12_20).unwrap()
    }

    #[test]
    fn diagonal_is_quarter_pi() {
        let r = cordic_atan2(q(1.0), q(1.0), DEFAULT_ITERATIONS).unwrap();
        assert!((dequantize(r.phase) - PI / 4.0).abs() <= (-20f64).exp2());
        assert!((dequantize(r.magnitude) - 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn all_quadrants() {
        for k in 0..64 {
            let a = -PI + (k as f64 + 0.5) * PI / 32.0;
            let (re, im) = (0.3 * a.cos(), 0.3 * a.sin());
            let r = cordic_atan2(q(im), q(re), DEFAULT_ITERATIONS).unwrap();
            let truth = (dequantize(q(im))).atan2(dequantize(q(re)));
            assert!((dequantize(r.phase) - truth).abs() <= 1e-5, "{a}");
        }
        let r = cordic_atan2(q(0.0), q(-1.0), DEFAULT_ITERATIONS).unwrap();
        assert!((dequantize(r.phase) - PI).abs() < 1e-6);
    }

    #[test]
    fn origin_holds_previous_phase() {
        assert!(cordic_atan2(q(0.0), q(0.0), DEFAULT_ITERATIONS).is_none());
        let mut unit = CordicUnit::new(FixedFormat::Q12_20, DEFAULT_ITERATIONS);
        let p = unit.phase(q(0.0).raw, q(0.5).raw);
        assert_eq!(unit.phase(0, 0), p);
        assert_eq!(unit.held, 1);
    }
}
