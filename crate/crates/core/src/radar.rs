//! Radar configuration, derived hardware limits and the line-of-sight
//! elevation planner.

use crate::error::{Error, Result};
use crate::kv::{KvDoc, KvWriter};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Chirp and sampling parameters of an FMCW front end. Bandwidth and chirp
/// slope are derived from the start/stop frequencies and chirp duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarConfig {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// Active chirp duration `T_m`.
    pub chirp_duration_s: f64,
    /// Chirp repetition period `T_c` (slow-time sample interval).
    pub chirp_period_s: f64,
    pub num_chirps: usize,
    pub adc_samples: usize,
    pub adc_rate_sps: f64,
    pub n_tx: usize,
    pub n_rx: usize,
}

impl RadarConfig {
    /// The 2TX/4RX, 77 GHz, 512×512 configuration used throughout the
    /// vital-sign experiments.
    pub fn reference() -> Self {
        Self {
            f_min_hz: 77.0e9,
            f_max_hz: 77.0e9 + 2998.2e6,
            chirp_duration_s: 100e-6,
            chirp_period_s: 50e-3,
            num_chirps: 512,
            adc_samples: 512,
            adc_rate_sps: 6.0e6,
            n_tx: 2,
            n_rx: 4,
        }
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.f_max_hz - self.f_min_hz
    }

    /// Chirp slope `K_c` in Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth_hz() / self.chirp_duration_s
    }

    pub fn virtual_channels(&self) -> usize {
        self.n_tx * self.n_rx
    }

    pub fn slow_time_rate_hz(&self) -> f64 {
        1.0 / self.chirp_period_s
    }

    pub fn wavelength_max_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_min_hz
    }

    /// Beat frequency of a point reflector at `range_m`.
    pub fn beat_frequency(&self, range_m: f64) -> f64 {
        2.0 * self.chirp_slope() * range_m / SPEED_OF_LIGHT
    }

    /// Range corresponding to a beat frequency (`c·f_b / 2K_c`).
    pub fn range_of_beat(&self, f_b: f64) -> f64 {
        SPEED_OF_LIGHT * f_b / (2.0 * self.chirp_slope())
    }

    /// Fast-time FFT bin spacing in Hz.
    pub fn bin_spacing_hz(&self) -> f64 {
        self.adc_rate_sps / self.adc_samples as f64
    }

    /// Nearest range bin of a reflector at `range_m`.
    pub fn range_bin(&self, range_m: f64) -> usize {
        (self.beat_frequency(range_m) / self.bin_spacing_hz()).round() as usize
    }

    pub fn range_of_bin(&self, bin: usize) -> f64 {
        self.range_of_beat(bin as f64 * self.bin_spacing_hz())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &'static str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive(self.f_min_hz, "f_min_hz")?;
        positive(self.f_max_hz, "f_max_hz")?;
        positive(self.chirp_duration_s, "t_m_s")?;
        positive(self.chirp_period_s, "t_c_s")?;
        positive(self.adc_rate_sps, "adc_rate_sps")?;
        for (v, field) in [
            (self.num_chirps, "num_chirps"),
            (self.adc_samples, "adc_samples"),
            (self.n_tx, "n_tx"),
            (self.n_rx, "n_rx"),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.f_max_hz <= self.f_min_hz {
            return Err(Error::config(
                "f_max_hz",
                format!("must exceed f_min_hz ({} <= {})", self.f_max_hz, self.f_min_hz),
            ));
        }
        if self.chirp_duration_s >= self.chirp_period_s {
            return Err(Error::config(
                "t_m_s",
                format!(
                    "chirp duration {} s must be shorter than chirp period {} s",
                    self.chirp_duration_s, self.chirp_period_s
                ),
            ));
        }
        let window = self.adc_samples as f64 / self.adc_rate_sps;
        if window > self.chirp_duration_s * (1.0 + 1e-12) {
            return Err(Error::config(
                "adc_samples",
                format!("sampling window {window} s exceeds chirp duration"),
            ));
        }
        Ok(())
    }

    pub const FILE_KEYS: [&'static str; 9] = [
        "f_min_hz",
        "f_max_hz",
        "t_m_s",
        "t_c_s",
        "num_chirps",
        "adc_samples",
        "adc_rate_sps",
        "n_tx",
        "n_rx",
    ];

    /// Parses the flat key=value radar file. Every key is required.
    pub fn from_kv(doc: &KvDoc) -> Result<Self> {
        doc.reject_unknown(|k| Self::FILE_KEYS.contains(&k))?;
        let cfg = Self {
            f_min_hz: doc.require("f_min_hz")?,
            f_max_hz: doc.require("f_max_hz")?,
            chirp_duration_s: doc.require("t_m_s")?,
            chirp_period_s: doc.require("t_c_s")?,
            num_chirps: doc.require("num_chirps")?,
            adc_samples: doc.require("adc_samples")?,
            adc_rate_sps: doc.require("adc_rate_sps")?,
            n_tx: doc.require("n_tx")?,
            n_rx: doc.require("n_rx")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        Self::from_kv(&KvDoc::parse(text, origin)?)
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::default();
        w.comment("FMCW radar configuration; bandwidth and slope are derived")
            .entry("f_min_hz", self.f_min_hz)
            .entry("f_max_hz", self.f_max_hz)
            .entry("t_m_s", self.chirp_duration_s)
            .entry("t_c_s", self.chirp_period_s)
            .entry("num_chirps", self.num_chirps)
            .entry("adc_samples", self.adc_samples)
            .entry("adc_rate_sps", self.adc_rate_sps)
            .entry("n_tx", self.n_tx)
            .entry("n_rx", self.n_rx);
        w.finish()
    }
}

/// Limits implied by a [`RadarConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub lambda_max_m: f64,
    /// Unconstrained maximum range `c·T_m/2`.
    pub r_max_m: f64,
    /// Maximum range after the ADC Nyquist limit, never above `r_max_m`.
    pub r_max_constrained_m: f64,
    pub range_resolution_m: f64,
    pub virtual_channels: usize,
    pub angle_resolution_deg: f64,
    pub slow_time_rate_hz: f64,
    pub freq_resolution_hz: f64,
    pub range_bin_hz: f64,
    pub range_bin_m: f64,
}

pub fn derive_params(config: &RadarConfig) -> Result<DerivedParams> {
    config.validate()?;
    let r_max = SPEED_OF_LIGHT * config.chirp_duration_s / 2.0;
    let r_max_constrained = (r_max * config.adc_rate_sps / (2.0 * config.bandwidth_hz())).min(r_max);
    let range_bin_hz = config.bin_spacing_hz();
    Ok(DerivedParams {
        lambda_max_m: config.wavelength_max_m(),
        r_max_m: r_max,
        r_max_constrained_m: r_max_constrained,
        range_resolution_m: r_max_constrained / (config.adc_samples as f64 / 2.0),
        virtual_channels: config.virtual_channels(),
        angle_resolution_deg: angle_resolution(config.n_tx, config.n_rx),
        slow_time_rate_hz: config.slow_time_rate_hz(),
        freq_resolution_hz: 1.0 / (config.num_chirps as f64 * config.chirp_period_s),
        range_bin_hz,
        range_bin_m: config.range_of_beat(range_bin_hz),
    })
}

/// Angular resolution of a half-wavelength virtual ULA with `n_tx·n_rx`
/// elements (2/J radians), in degrees rounded to 0.1°.
pub fn angle_resolution(n_tx: usize, n_rx: usize) -> f64 {
    let j = (n_tx * n_rx).max(1) as f64;
    let deg = (2.0 / j).to_degrees();
    (deg * 10.0).round() / 10.0
}

/// One subject in the elevation planner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedSubject {
    pub range_m: f64,
    /// Vertical extent above the common chest-level plane.
    pub obstruction_m: f64,
}

/// Subjects ordered by strictly increasing range plus the radar mounting.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryScene {
    subjects: Vec<PlannedSubject>,
    pub radar_height_m: f64,
    pub radar_tilt_deg: f64,
}

impl GeometryScene {
    pub fn new(subjects: Vec<PlannedSubject>, radar_height_m: f64, radar_tilt_deg: f64) -> Result<Self> {
        for (i, s) in subjects.iter().enumerate() {
            if !(s.range_m.is_finite() && s.range_m > 0.0) {
                return Err(Error::Geometry(format!("subject {i}: range must be positive, got {}", s.range_m)));
            }
            if !(s.obstruction_m.is_finite() && s.obstruction_m >= 0.0) {
                return Err(Error::Geometry(format!(
                    "subject {i}: obstruction height must be non-negative, got {}",
                    s.obstruction_m
                )));
            }
        }
        for (i, pair) in subjects.windows(2).enumerate() {
            if pair[1].range_m <= pair[0].range_m {
                return Err(Error::Geometry(format!(
                    "ranges must be strictly increasing: subject {} at {} m follows {} m",
                    i + 1,
                    pair[1].range_m,
                    pair[0].range_m
                )));
            }
        }
        Ok(Self { subjects, radar_height_m, radar_tilt_deg })
    }

    /// Builds a scene from `(range, obstruction)` pairs in any order.
    pub fn from_unsorted(mut subjects: Vec<PlannedSubject>, radar_height_m: f64, radar_tilt_deg: f64) -> Result<Self> {
        subjects.sort_by(|a, b| a.range_m.total_cmp(&b.range_m));
        Self::new(subjects, radar_height_m, radar_tilt_deg)
    }

    pub fn subjects(&self) -> &[PlannedSubject] {
        &self.subjects
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElevationPlan {
    pub per_subject_m: Vec<f64>,
    pub h_min_m: f64,
}

/// Minimum radar elevation giving every subject an unobstructed view of
/// its chest: `h_i = max_{j<i} l_j·R_i/(R_i − R_j)`, `h_1 = 0`.
pub fn min_elevation(scene: &GeometryScene) -> ElevationPlan {
    let s = &scene.subjects;
    let per_subject: Vec<f64> = (0..s.len())
        .map(|i| {
            s[..i]
                .iter()
                .map(|front| front.obstruction_m * s[i].range_m / (s[i].range_m - front.range_m))
                .fold(0.0, f64::max)
        })
        .collect();
    let h_min = per_subject.iter().copied().fold(0.0, f64::max);
    ElevationPlan { per_subject_m: per_subject, h_min_m: h_min }
}
