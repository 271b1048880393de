//! Variational mode decomposition of the unwrapped phase and assignment of
//! modes to breathing, heartbeat and noise roles.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VmdInit {
    /// `ω_k = (fs/4)·k/K`.
    #[default]
    Uniform,
    /// `ω_k = (fs/4)·2^(k+1−K)`, dense at low frequency.
    Octave,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmdParams {
    pub k: usize,
    pub alpha: f64,
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub init: VmdInit,
}

impl Default for VmdParams {
    fn default() -> Self {
        Self { k: 4, alpha: 2000.0, tau: 0.0, tol: 1e-7, max_iter: 500, init: VmdInit::Uniform }
    }
}

impl VmdParams {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Param("VMD needs K ≥ 1".into()));
        }
        if !(self.alpha > 0.0) || !(self.tol > 0.0) || !(self.tau >= 0.0) || self.max_iter == 0 {
            return Err(Error::Param(format!(
                "invalid VMD parameters: alpha {} tol {} tau {} max_iter {}",
                self.alpha, self.tol, self.tau, self.max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmdResult<T> {
    /// Modes ordered by ascending center frequency.
    pub modes: Vec<Vec<T>>,
    pub center_freqs_hz: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `input − Σ modes`, including the removed mean.
    pub residual: Vec<T>,
    pub fs_hz: f64,
}

fn close_enough(a: &[Complex<f64>], b: &[Complex<f64>]) -> (f64, f64) {
    a.iter().zip(b).fold((0.0, 0.0), |(d, n), (x, y)| (d + (x - y).norm_sqr(), n + y.norm_sqr()))
}

/// ADMM minimization of the VMD augmented Lagrangian on a mirror-extended,
/// mean-removed copy of `signal`.
pub fn vmd_decompose<T: Real>(signal: &[T], fs: f64, params: &VmdParams) -> Result<VmdResult<T>> {
    params.validate()?;
    let len = signal.len();
    if len < 32 {
        return Err(Error::Param(format!("VMD needs at least 32 samples, got {len}")));
    }
    if !(fs > 0.0) {
        return Err(Error::Param("sample rate must be positive".into()));
    }
    let x: Vec<f64> = signal.iter().map(|v| v.to_f64_lossy()).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Param("VMD input contains non-finite samples".into()));
    }
    let mean = x.iter().sum::<f64>() / len as f64;

    // Whole-sample symmetric mirror, about half the length on each side. It
    // is a rotation of the even (DCT-I) extension, so it stays continuous
    // across the circular seam.
    let head = len / 2;
    let centered = |v: &f64| Complex::new(v - mean, 0.0);
    let mut ext: Vec<Complex<f64>> = Vec::with_capacity(2 * len - 2);
    ext.extend(x[1..=head].iter().rev().map(centered));
    ext.extend(x.iter().map(centered));
    ext.extend(x[head + 1..len - 1].iter().rev().map(centered));
    let n2 = ext.len();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n2).process(&mut ext);

    // One-sided spectrum: bins 0..=n2/2, normalized frequency i/n2.
    let half = n2 / 2 + 1;
    let f_hat: Vec<Complex<f64>> = ext[..half].to_vec();
    let freqs: Vec<f64> = (0..half).map(|i| i as f64 / n2 as f64).collect();

    let kk = params.k;
    let mut omega: Vec<f64> = (0..kk)
        .map(|k| match params.init {
            VmdInit::Uniform => 0.25 * k as f64 / kk as f64,
            VmdInit::Octave => 0.25 * 2f64.powi(k as i32 + 1 - kk as i32),
            VmdInit::Zero => 0.0,
        })
        .collect();
    let zero = Complex::new(0.0, 0.0);
    let mut u: Vec<Vec<Complex<f64>>> = vec![vec![zero; half]; kk];
    let mut lambda = vec![zero; half];
    let mut sum: Vec<Complex<f64>> = vec![zero; half];
    let two_alpha = 2.0 * params.alpha;
    let mut iterations = 0;
    let mut converged = false;
    let mut prev: Vec<Complex<f64>> = vec![zero; half];

    while iterations < params.max_iter {
        iterations += 1;
        let (mut diff, mut norm) = (0.0, 0.0);
        for k in 0..kk {
            prev.copy_from_slice(&u[k]);
            for i in 0..half {
                let others = sum[i] - u[k][i];
                let d = freqs[i] - omega[k];
                let v = (f_hat[i] - others + lambda[i] * 0.5) / (1.0 + two_alpha * d * d);
                sum[i] = others + v;
                u[k][i] = v;
            }
            let (num, den) = u[k]
                .iter()
                .zip(&freqs)
                .fold((0.0, 0.0), |(a, b), (c, f)| (a + f * c.norm_sqr(), b + c.norm_sqr()));
            if den > 0.0 {
                omega[k] = (num / den).clamp(0.0, 0.5);
            }
            let (d, n) = close_enough(&u[k], &prev);
            diff += d;
            norm += n;
        }
        if params.tau > 0.0 {
            for i in 0..half {
                lambda[i] += (f_hat[i] - sum[i]) * params.tau;
            }
        }
        if iterations > 1 && (norm == 0.0 || diff / norm < params.tol) {
            converged = true;
            break;
        }
    }

    // Back to time domain through the Hermitian extension, trimmed to the
    // original support.
    let inverse = planner.plan_fft_inverse(n2);
    let mut modes: Vec<(f64, Vec<T>)> = Vec::with_capacity(kk);
    for k in 0..kk {
        let mut full = vec![zero; n2];
        for i in 0..half {
            full[i] = u[k][i];
        }
        full[0].im = 0.0;
        if n2 % 2 == 0 {
            full[n2 / 2].im = 0.0;
        }
        for i in 1..n2 - half + 1 {
            full[n2 - i] = u[k][i].conj();
        }
        inverse.process(&mut full);
        let mode: Vec<T> = full[head..head + len].iter().map(|c| T::lit(c.re / n2 as f64)).collect();
        modes.push((omega[k] * fs, mode));
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut residual: Vec<T> = signal.to_vec();
    for (_, m) in &modes {
        for (r, v) in residual.iter_mut().zip(m) {
            *r -= *v;
        }
    }
    let (center_freqs_hz, modes) = modes.into_iter().unzip();
    Ok(VmdResult { modes, center_freqs_hz, iterations, converged, residual, fs_hz: fs })
}

/// Role of each mode after band assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAssignment {
    pub br: usize,
    pub hr: usize,
    pub eta_low: Option<usize>,
    pub eta_high: Option<usize>,
    /// No mode center fell in the band; `br`/`hr` hold the nearest mode.
    pub br_unresolved: bool,
    pub hr_unresolved: bool,
}

/// Power of `mode` inside `band` from its periodogram.
pub fn in_band_power<T: Real>(mode: &[T], fs: f64, band: (f64, f64)) -> f64 {
    let n = mode.len();
    let mut buf: Vec<Complex<f64>> = mode.iter().map(|v| Complex::new(v.to_f64_lossy(), 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    (0..=n / 2)
        .filter(|&i| {
            let f = i as f64 * fs / n as f64;
            f >= band.0 && f <= band.1
        })
        .map(|i| buf[i].norm_sqr())
        .sum()
}

fn band_distance(f: f64, band: (f64, f64)) -> f64 {
    if f < band.0 {
        band.0 - f
    } else if f > band.1 {
        f - band.1
    } else {
        0.0
    }
}

fn pick(freqs: &[f64], powers: &[f64], band: (f64, f64), taken: Option<usize>) -> (usize, bool) {
    let free = |i: &usize| Some(*i) != taken;
    let in_band = (0..freqs.len()).filter(free).filter(|&i| band_distance(freqs[i], band) == 0.0);
    // Highest in-band power, ties to the lower index.
    let best = in_band.fold(None::<usize>, |acc, i| match acc {
        Some(b) if powers[b] >= powers[i] => Some(b),
        _ => Some(i),
    });
    match best {
        Some(i) => (i, false),
        None => {
            let i = (0..freqs.len())
                .filter(free)
                .min_by(|&a, &b| band_distance(freqs[a], band).total_cmp(&band_distance(freqs[b], band)))
                .expect("at least two modes");
            (i, true)
        }
    }
}

pub fn classify_modes<T: Real>(result: &VmdResult<T>, br_band: (f64, f64), hr_band: (f64, f64)) -> Result<ModeAssignment> {
    let k = result.modes.len();
    if k < 2 {
        return Err(Error::Param(format!("mode classification needs at least 2 modes, got {k}")));
    }
    let f = &result.center_freqs_hz;
    let br_pow: Vec<f64> = result.modes.iter().map(|m| in_band_power(m, result.fs_hz, br_band)).collect();
    let hr_pow: Vec<f64> = result.modes.iter().map(|m| in_band_power(m, result.fs_hz, hr_band)).collect();
    let (br, br_unresolved) = pick(f, &br_pow, br_band, None);
    let (hr, hr_unresolved) = pick(f, &hr_pow, hr_band, Some(br));
    let mut rest: Vec<usize> = (0..k).filter(|&i| i != br && i != hr).collect();
    rest.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
    let eta_low = rest.first().copied();
    let eta_high = if rest.len() > 1 { rest.last().copied() } else { None };
    Ok(ModeAssignment { br, hr, eta_low, eta_high, br_unresolved, hr_unresolved })
}
