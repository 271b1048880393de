use std::f64::consts::{PI, TAU};

use super::fixed::{quantize, FixedFormat, Saturations};

/// One-sample-per-cycle unwrapper. Keeps the previous wrapped input and
/// the running output; each step adds the jump folded into `(−π, π]`.
#[derive(Debug, Clone)]
pub struct StreamUnwrapper {
    pi: i64,
    two_pi: i64,
    prev_in: Option<i32>,
    out: i64,
    pub saturations: Saturations,
}

impl StreamUnwrapper {
    pub fn new(format: FixedFormat) -> Self {
        let q = |v: f64| quantize(v, format).expect("π fits every format with ≥ 3 integer bits").raw as i64;
        Self { pi: q(PI), two_pi: q(TAU), prev_in: None, out: 0, saturations: Saturations::default() }
    }

    pub fn push(&mut self, phase: i32) -> i32 {
        self.out = match self.prev_in {
            None => phase as i64,
            Some(prev) => {
                let mut d = phase as i64 - prev as i64;
                while d > self.pi {
                    d -= self.two_pi;
                }
                while d <= -self.pi {
                    d += self.two_pi;
                }
                self.out + d
            }
        };
        self.prev_in = Some(phase);
        let narrowed = self.saturations.clamp(self.out);
        self.out = narrowed as i64;
        narrowed
    }

    pub fn reset(&mut self) {
        self.prev_in = None;
        self.out = 0;
    }
}

pub fn stream_unwrap(phase: &[i32], format: FixedFormat) -> (Vec<i32>, u64) {
    let mut u = StreamUnwrapper::new(format);
    let out = phase.iter().map(|&p| u.push(p)).collect();
    (out, u.saturations.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpga::fixed::dequantize;
    use crate::fpga::fixed::FixedSample;

    #[test]
    fn crosses_the_branch_cut() {
        let fmt = FixedFormat::Q12_20;
        let input: Vec<i32> = [0.0, PI - 0.1, -PI + 0.1].iter().map(|&v| quantize(v, fmt).unwrap().raw).collect();
        let (out, sat) = stream_unwrap(&input, fmt);
        assert_eq!(sat, 0);
        for (o, e) in out.iter().zip([0.0, PI - 0.1, PI + 0.1]) {
            assert!((dequantize(FixedSample { raw: *o, format: fmt }) - e).abs() <= (-18f64).exp2());
        }
    }
}
