use std::time::{Duration, Instant};

use num_complex::Complex;
use rustfft::FftPlanner;

use super::cordic::{CordicUnit, DEFAULT_ITERATIONS};
use super::estimate::{band_scan_estimate, peak_range, psd, BandScan, PsdMode, RangePeak, MIN_PEAK_RATIO};
use super::fft::{fixed_fft, FixedComplex};
use super::fixed::{quantize_counted, FixedFormat, Saturations};
use super::unwrap::stream_unwrap;
use crate::dsp::unwrap_phase;
use crate::error::{Error, Result};
use crate::pipeline::{process_cube, PipelineOptions};
use crate::real::Real;
use crate::scene::DataCube;

/// Cycle cost of each hardware operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleModel {
    pub per_input_sample: u64,
    pub per_butterfly: u64,
    pub per_psd_bin: u64,
    pub per_cordic_iteration: u64,
    pub per_unwrap_sample: u64,
    /// Fill latency charged once per FFT invocation.
    pub fft_latency: u64,
}

impl Default for CycleModel {
    fn default() -> Self {
        Self {
            per_input_sample: 1,
            per_butterfly: 1,
            per_psd_bin: 1,
            per_cordic_iteration: 1,
            per_unwrap_sample: 1,
            fft_latency: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpgaOptions {
    pub format: FixedFormat,
    pub cordic_iterations: u32,
    /// Virtual channel fed to the single-channel hardware path.
    pub channel: usize,
    pub psd_mode: PsdMode,
    /// Use only the first `chirps` chirps; must be a power of two.
    pub chirps: Option<usize>,
    /// Keep per-stage sample buffers in the trace.
    pub keep_samples: bool,
    pub cycles: CycleModel,
}

impl Default for FpgaOptions {
    fn default() -> Self {
        Self {
            format: FixedFormat::Q12_20,
            cordic_iterations: DEFAULT_ITERATIONS,
            channel: 0,
            psd_mode: PsdMode::Magnitude,
            chirps: None,
            keep_samples: false,
            cycles: CycleModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub name: &'static str,
    pub multiplies: u64,
    pub adds: u64,
    pub cycles: u64,
    pub saturations: u64,
    /// Raw register values of a representative output buffer.
    pub samples: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineTrace {
    pub stages: Vec<StageTrace>,
}

impl PipelineTrace {
    pub fn total_cycles(&self) -> u64 {
        self.stages.iter().map(|s| s.cycles).sum()
    }

    pub fn total_saturations(&self) -> u64 {
        self.stages.iter().map(|s| s.saturations).sum()
    }

    /// Running cycle count at the end of each stage.
    pub fn cumulative_cycles(&self) -> Vec<u64> {
        self.stages
            .iter()
            .scan(0u64, |acc, s| {
                *acc += s.cycles;
                Some(*acc)
            })
            .collect()
    }

    pub fn stage(&self, name: &str) -> Option<&StageTrace> {
        self.stages.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedOutput {
    pub format: FixedFormat,
    /// False when the accumulated PSD was identically zero.
    pub target_found: bool,
    pub range: RangePeak,
    /// Per-chirp spectra at the selected bin.
    pub bin_values: Vec<FixedComplex>,
    pub phase: Vec<i32>,
    pub unwrapped: Vec<i32>,
    pub band: BandScan,
    pub trace: PipelineTrace,
    pub slow_time_rate_hz: f64,
    /// Spectra of every chirp, kept for the float comparison.
    pub(crate) inputs: Vec<Vec<FixedComplex>>,
    pub(crate) spectra: Vec<Vec<FixedComplex>>,
}

impl FixedOutput {
    pub fn br_brpm(&self) -> f64 {
        self.band.br_brpm()
    }

    pub fn hr_bpm(&self) -> f64 {
        self.band.hr_bpm()
    }

    pub fn saturations(&self) -> u64 {
        self.trace.total_saturations()
    }

    pub fn low_confidence(&self) -> bool {
        !self.target_found || self.range.peak_to_median < MIN_PEAK_RATIO || self.band.low_confidence()
    }
}

fn keep(on: bool, f: impl FnOnce() -> Vec<i64>) -> Vec<i64> {
    if on {
        f()
    } else {
        Vec::new()
    }
}

fn interleave(v: &[FixedComplex]) -> Vec<i64> {
    v.iter().flat_map(|c| [c.re as i64, c.im as i64]).collect()
}

/// Bit-accurate model of the hardware chain on one channel: quantize,
/// range FFT, PSD accumulation and peak pick, CORDIC phase, streaming
/// unwrap, band scan.
pub fn run_fixed_pipeline<T: Real>(cube: &DataCube<T>, options: &FpgaOptions) -> Result<FixedOutput> {
    let config = *cube.config();
    let (m_all, j, n) = cube.dims();
    if options.channel >= j {
        return Err(Error::Param(format!("channel {} out of range for {j} channels", options.channel)));
    }
    let m = options.chirps.unwrap_or(m_all);
    if m == 0 || m > m_all || !m.is_power_of_two() {
        return Err(Error::Param(format!("chirp count {m} must be a power of two no larger than {m_all}")));
    }
    let fmt = options.format;
    let cyc = options.cycles;
    let mut trace = PipelineTrace::default();

    let mut sat = Saturations::default();
    let inputs = (0..m)
        .map(|chirp| {
            cube.row(chirp, options.channel)
                .iter()
                .map(|v| {
                    let re = quantize_counted(v.re.to_f64_lossy(), fmt, &mut sat)?.raw;
                    let im = quantize_counted(v.im.to_f64_lossy(), fmt, &mut sat)?.raw;
                    Ok(Complex::new(re, im))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    trace.stages.push(StageTrace {
        name: "quantize",
        multiplies: 0,
        adds: 0,
        cycles: (m * n) as u64 * cyc.per_input_sample,
        saturations: sat.0,
        samples: keep(options.keep_samples, || interleave(&inputs[0])),
    });

    let mut spectra = Vec::with_capacity(m);
    let (mut fft_sat, mut bfly) = (0, 0);
    for row in &inputs {
        let s = fixed_fft(row, fmt)?;
        fft_sat += s.saturations;
        bfly += s.butterflies;
        spectra.push(s.values);
    }
    trace.stages.push(StageTrace {
        name: "range_fft",
        multiplies: 4 * bfly,
        adds: 6 * bfly,
        cycles: bfly * cyc.per_butterfly + m as u64 * cyc.fft_latency,
        saturations: fft_sat,
        samples: keep(options.keep_samples, || interleave(&spectra[0])),
    });

    let mut acc = vec![0i64; n];
    for s in &spectra {
        for (a, p) in acc.iter_mut().zip(psd(s, options.psd_mode)) {
            *a = a.saturating_add(p);
        }
    }
    let range = peak_range(&acc, &config)?;
    let target = range.is_some();
    let range = range.unwrap_or(RangePeak { bin: 1, range_m: config.range_of_bin(1), peak_to_median: 0.0 });
    let psd_ops = (m * n) as u64;
    trace.stages.push(StageTrace {
        name: "psd_peak",
        multiplies: 2 * psd_ops,
        adds: 2 * psd_ops + n as u64,
        cycles: psd_ops * cyc.per_psd_bin + n as u64,
        saturations: 0,
        samples: keep(options.keep_samples, || acc.clone()),
    });

    let bin_values: Vec<FixedComplex> = spectra.iter().map(|s| s[range.bin]).collect();
    let mut cordic = CordicUnit::new(fmt, options.cordic_iterations);
    let phase: Vec<i32> = bin_values.iter().map(|v| cordic.phase(v.re, v.im)).collect();
    let iters = m as u64 * options.cordic_iterations as u64;
    trace.stages.push(StageTrace {
        name: "cordic",
        multiplies: 2 * m as u64,
        adds: 3 * iters,
        cycles: iters * cyc.per_cordic_iteration,
        saturations: 0,
        samples: keep(options.keep_samples, || phase.iter().map(|&v| v as i64).collect()),
    });

    let (unwrapped, unwrap_sat) = stream_unwrap(&phase, fmt);
    trace.stages.push(StageTrace {
        name: "unwrap",
        multiplies: 0,
        adds: 3 * m as u64,
        cycles: m as u64 * cyc.per_unwrap_sample,
        saturations: unwrap_sat,
        samples: keep(options.keep_samples, || unwrapped.iter().map(|&v| v as i64).collect()),
    });

    let fs = config.slow_time_rate_hz();
    let band = band_scan_estimate(&unwrapped, fs, fmt)?;
    trace.stages.push(StageTrace {
        name: "band_scan",
        multiplies: 4 * band.butterflies + 2 * m as u64,
        adds: 6 * band.butterflies + 2 * m as u64,
        cycles: band.butterflies * cyc.per_butterfly + cyc.fft_latency + m as u64 * (1 + cyc.per_psd_bin),
        saturations: band.saturations,
        samples: keep(options.keep_samples, || band.psd.clone()),
    });

    Ok(FixedOutput {
        format: fmt,
        target_found: target,
        range,
        bin_values,
        phase,
        unwrapped,
        band,
        trace,
        slow_time_rate_hz: fs,
        inputs,
        spectra,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    /// Largest absolute deviation from the float reference on the same inputs.
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub float_rates: Option<(f64, f64)>,
    pub fixed_rates: (f64, f64),
    pub float_low_confidence: bool,
    pub fixed_low_confidence: bool,
    pub float_range_m: Option<f64>,
    pub fixed_range_m: f64,
    pub delta_br_brpm: Option<f64>,
    pub delta_hr_bpm: Option<f64>,
    pub fft_snr_db: f64,
    pub saturations: u64,
    pub modeled_cycles: u64,
    pub stage_errors: Vec<StageError>,
    pub float_wall: Duration,
    pub fixed_wall: Duration,
    pub trace: PipelineTrace,
}

impl ComparisonReport {
    /// Both paths agree on whether a usable subject is present.
    pub fn confidence_agrees(&self) -> bool {
        self.float_low_confidence == self.fixed_low_confidence
    }
}

fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Runs the float pipeline (strongest subject only) and the fixed-point
/// model on the same cube and measures where they diverge.
pub fn compare_pipelines<T: Real>(
    cube: &DataCube<T>,
    float_options: &PipelineOptions,
    fpga: &FpgaOptions,
) -> Result<ComparisonReport> {
    let t0 = Instant::now();
    let opts = PipelineOptions { max_subjects: 1, ..float_options.clone() };
    let float = process_cube(cube, &opts, None)?;
    let float_wall = t0.elapsed();
    let subject = float.subjects.first();

    let t1 = Instant::now();
    let fixed = run_fixed_pipeline(cube, fpga)?;
    let fixed_wall = t1.elapsed();

    let ulp = fixed.format.ulp();
    let deq = |c: &FixedComplex| Complex::new(c.re as f64 * ulp, c.im as f64 * ulp);
    let mut stage_errors = Vec::new();

    let mut q_err: f64 = 0.0;
    for (chirp, row) in fixed.inputs.iter().enumerate() {
        for (q, v) in row.iter().zip(cube.row(chirp, fpga.channel)) {
            let v = Complex::new(v.re.to_f64_lossy(), v.im.to_f64_lossy());
            q_err = q_err.max((deq(q) - v).norm());
        }
    }
    stage_errors.push(StageError { stage: "quantize", max_abs: q_err });

    let n = fixed.inputs[0].len();
    let plan = FftPlanner::<f64>::new().plan_fft_forward(n);
    let (mut sig, mut noise, mut fft_err) = (0.0, 0.0, 0.0f64);
    for (row, spec) in fixed.inputs.iter().zip(&fixed.spectra) {
        let mut buf: Vec<Complex<f64>> = row.iter().map(deq).collect();
        plan.process(&mut buf);
        for (r, s) in buf.iter().zip(spec) {
            let r = r / n as f64;
            let e = (deq(s) - r).norm_sqr();
            sig += r.norm_sqr();
            noise += e;
            fft_err = fft_err.max(e.sqrt());
        }
    }
    stage_errors.push(StageError { stage: "range_fft", max_abs: fft_err });
    let fft_snr_db = if noise > 0.0 { 10.0 * (sig / noise).log10() } else { f64::INFINITY };

    let phase_f: Vec<f64> = fixed.phase.iter().map(|&p| p as f64 * ulp).collect();
    let cordic_err = fixed
        .bin_values
        .iter()
        .zip(&phase_f)
        .filter(|(v, _)| v.re != 0 || v.im != 0)
        .map(|(v, p)| wrap_diff(deq(v).arg(), *p))
        .fold(0.0, f64::max);
    stage_errors.push(StageError { stage: "cordic", max_abs: cordic_err });

    let unwrap_ref = unwrap_phase(&phase_f)?;
    let unwrap_err = fixed.unwrapped.iter().zip(&unwrap_ref).map(|(&u, r)| (u as f64 * ulp - r).abs()).fold(0.0, f64::max);
    stage_errors.push(StageError { stage: "unwrap", max_abs: unwrap_err });

    let fixed_rates = (fixed.br_brpm(), fixed.hr_bpm());
    let float_rates = subject.map(|s| (s.br_brpm, s.hr_bpm));
    Ok(ComparisonReport {
        float_rates,
        fixed_rates,
        float_low_confidence: subject.is_none_or(|s| s.low_confidence()),
        fixed_low_confidence: fixed.low_confidence(),
        float_range_m: subject.map(|s| s.range_m),
        fixed_range_m: fixed.range.range_m,
        delta_br_brpm: float_rates.map(|(b, _)| (b - fixed_rates.0).abs()),
        delta_hr_bpm: float_rates.map(|(_, h)| (h - fixed_rates.1).abs()),
        fft_snr_db,
        saturations: fixed.saturations(),
        modeled_cycles: fixed.trace.total_cycles(),
        stage_errors,
        float_wall,
        fixed_wall,
        trace: fixed.trace,
    })
}
