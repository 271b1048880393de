use crate::error::{Error, Result};

/// 32-bit two's-complement fixed point with `frac_bits` fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedFormat {
    frac_bits: u32,
}

impl Default for FixedFormat {
    fn default() -> Self {
        Self::Q12_20
    }
}

impl FixedFormat {
    pub const TOTAL_BITS: u32 = 32;
    pub const Q12_20: FixedFormat = FixedFormat { frac_bits: 20 };

    pub fn new(frac_bits: u32) -> Result<Self> {
        if frac_bits == 0 || frac_bits >= Self::TOTAL_BITS {
            return Err(Error::Fixed(format!("frac_bits must lie in 1..=31, got {frac_bits}")));
        }
        Ok(Self { frac_bits })
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    /// Value of one raw step.
    pub fn ulp(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_value(self) -> f64 {
        i32::MAX as f64 * self.ulp()
    }

    pub fn min_value(self) -> f64 {
        i32::MIN as f64 * self.ulp()
    }

    pub fn name(self) -> String {
        format!("Q{}.{}", Self::TOTAL_BITS - self.frac_bits, self.frac_bits)
    }

    pub(crate) fn one(self) -> i64 {
        1i64 << self.frac_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedSample {
    pub raw: i32,
    pub format: FixedFormat,
}

impl FixedSample {
    pub fn value(self) -> f64 {
        dequantize(self)
    }
}

/// Running count of values clamped to the format bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saturations(pub u64);

impl Saturations {
    /// Narrows to 32 bits, saturating and counting on overflow.
    #[inline]
    pub fn clamp(&mut self, v: i64) -> i32 {
        if v > i32::MAX as i64 {
            self.0 += 1;
            i32::MAX
        } else if v < i32::MIN as i64 {
            self.0 += 1;
            i32::MIN
        } else {
            v as i32
        }
    }
}

/// `v / 2^shift` rounded to nearest, ties to even.
#[inline]
pub(crate) fn shift_round(v: i64, shift: u32) -> i64 {
    if shift == 0 {
        return v;
    }
    let q = v >> shift;
    let r = v - (q << shift);
    let half = 1i64 << (shift - 1);
    if r > half || (r == half && q & 1 == 1) {
        q + 1
    } else {
        q
    }
}

/// Product of two raw values in the same format, rounded, not narrowed.
#[inline]
pub(crate) fn mul_raw(a: i32, b: i32, fmt: FixedFormat) -> i64 {
    shift_round(a as i64 * b as i64, fmt.frac_bits)
}

/// Round-to-nearest-even quantization; out-of-range values saturate and
/// are counted in `sat`.
pub fn quantize_counted(x: f64, fmt: FixedFormat, sat: &mut Saturations) -> Result<FixedSample> {
    if !x.is_finite() {
        return Err(Error::Fixed(format!("cannot quantize non-finite value {x}")));
    }
    let scaled = (x * fmt.one() as f64).round_ties_even();
    let raw = if scaled > i32::MAX as f64 {
        sat.0 += 1;
        i32::MAX
    } else if scaled < i32::MIN as f64 {
        sat.0 += 1;
        i32::MIN
    } else {
        scaled as i32
    };
    Ok(FixedSample { raw, format: fmt })
}

pub fn quantize(x: f64, fmt: FixedFormat) -> Result<FixedSample> {
    quantize_counted(x, fmt, &mut Saturations::default())
}

pub fn dequantize(s: FixedSample) -> f64 {
    s.raw as f64 * s.format.ulp()
}
