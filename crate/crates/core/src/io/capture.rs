//! Binary capture files: a 90-byte header followed by interleaved int16
//! I/Q samples, chirp-major, then channel, then fast time.
//!
//! Header layout, little endian:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 8 | magic `FMCWVIT1` |
//! | 8 | 2 | version (u16, 1) |
//! | 10 | 8 | f_min_hz (f64) |
//! | 18 | 8 | f_max_hz (f64) |
//! | 26 | 8 | chirp_duration_s (f64) |
//! | 34 | 8 | chirp_period_s (f64) |
//! | 42 | 8 | num_chirps (u64) |
//! | 50 | 8 | adc_samples (u64) |
//! | 58 | 8 | adc_rate_sps (f64) |
//! | 66 | 8 | n_tx (u64) |
//! | 74 | 8 | n_rx (u64) |
//! | 82 | 8 | full_scale (f64): the value stored as ±32767 |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::radar::RadarConfig;
use crate::real::Real;
use crate::scene::DataCube;

pub const CAPTURE_MAGIC: &[u8; 8] = b"FMCWVIT1";
pub const CAPTURE_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 90;
pub const FULL_SCALE_CODE: f64 = 32767.0;

const FIELD_NAMES: [&str; 10] = [
    "f_min_hz",
    "f_max_hz",
    "chirp_duration_s",
    "chirp_period_s",
    "num_chirps",
    "adc_samples",
    "adc_rate_sps",
    "n_tx",
    "n_rx",
    "full_scale",
];

fn field_offset(i: usize) -> u64 {
    10 + 8 * i as u64
}

fn err(offset: u64, reason: impl Into<String>) -> Error {
    Error::Capture { offset, reason: reason.into() }
}

/// Smallest power of two (at least 1.0) covering every component.
pub fn full_scale_for<T: Real>(cube: &DataCube<T>) -> f64 {
    let peak = cube.as_slice().iter().map(|v| v.re.abs().max(v.im.abs()).to_f64_lossy()).fold(0.0, f64::max);
    let mut fs = 1.0;
    while fs < peak {
        fs *= 2.0;
    }
    fs
}

pub fn encode_header(config: &RadarConfig, full_scale: f64) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_LEN);
    h.extend_from_slice(CAPTURE_MAGIC);
    h.extend_from_slice(&CAPTURE_VERSION.to_le_bytes());
    for v in [config.f_min_hz, config.f_max_hz, config.chirp_duration_s, config.chirp_period_s] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h.extend_from_slice(&(config.num_chirps as u64).to_le_bytes());
    h.extend_from_slice(&(config.adc_samples as u64).to_le_bytes());
    h.extend_from_slice(&config.adc_rate_sps.to_le_bytes());
    h.extend_from_slice(&(config.n_tx as u64).to_le_bytes());
    h.extend_from_slice(&(config.n_rx as u64).to_le_bytes());
    h.extend_from_slice(&full_scale.to_le_bytes());
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureHeader {
    pub version: u16,
    pub config: RadarConfig,
    pub full_scale: f64,
}

impl CaptureHeader {
    pub fn payload_len(&self) -> Result<u64> {
        let c = &self.config;
        (c.num_chirps as u64)
            .checked_mul(c.virtual_channels() as u64)
            .and_then(|v| v.checked_mul(c.adc_samples as u64))
            .and_then(|v| v.checked_mul(4))
            .ok_or_else(|| err(field_offset(4), "dimensions overflow the payload size"))
    }
}

/// Parses and validates a header without touching the payload.
pub fn decode_header(h: &[u8]) -> Result<CaptureHeader> {
    if h.len() < HEADER_LEN {
        return Err(err(h.len() as u64, format!("header needs {HEADER_LEN} bytes, file has {}", h.len())));
    }
    if &h[..8] != CAPTURE_MAGIC {
        return Err(err(0, format!("bad magic {:?}, expected \"FMCWVIT1\"", String::from_utf8_lossy(&h[..8]))));
    }
    let version = u16::from_le_bytes([h[8], h[9]]);
    if version != CAPTURE_VERSION {
        return Err(err(8, format!("unsupported version {version}")));
    }
    let word = |i: usize| {
        let o = field_offset(i) as usize;
        <[u8; 8]>::try_from(&h[o..o + 8]).expect("eight bytes")
    };
    let float = |i: usize| -> Result<f64> {
        let v = f64::from_le_bytes(word(i));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(field_offset(i), format!("{} is not finite", FIELD_NAMES[i])))
        }
    };
    let count = |i: usize| -> Result<usize> {
        let v = u64::from_le_bytes(word(i));
        if v == 0 {
            return Err(err(field_offset(i), format!("{} must be positive", FIELD_NAMES[i])));
        }
        usize::try_from(v).ok().filter(|&v| v <= u32::MAX as usize).ok_or_else(|| {
            err(field_offset(i), format!("{} = {v} overflows the supported dimensions", FIELD_NAMES[i]))
        })
    };
    let config = RadarConfig {
        f_min_hz: float(0)?,
        f_max_hz: float(1)?,
        chirp_duration_s: float(2)?,
        chirp_period_s: float(3)?,
        num_chirps: count(4)?,
        adc_samples: count(5)?,
        adc_rate_sps: float(6)?,
        n_tx: count(7)?,
        n_rx: count(8)?,
    };
    let full_scale = float(9)?;
    if full_scale <= 0.0 {
        return Err(err(field_offset(9), format!("full_scale must be positive, got {full_scale}")));
    }
    config.validate().map_err(|e| {
        let at = match &e {
            Error::Config { field, .. } => FIELD_NAMES.iter().position(|n| n == field).map_or(10, field_offset),
            _ => 10,
        };
        err(at, e.to_string())
    })?;
    let header = CaptureHeader { version, config, full_scale };
    header.payload_len()?;
    Ok(header)
}

fn to_code(v: f64, full_scale: f64) -> i16 {
    (v / full_scale * FULL_SCALE_CODE).round().clamp(-FULL_SCALE_CODE, FULL_SCALE_CODE) as i16
}

/// Header plus payload in memory.
pub fn encode_capture<T: Real>(cube: &DataCube<T>) -> Vec<u8> {
    let full_scale = full_scale_for(cube);
    let mut out = encode_header(cube.config(), full_scale);
    out.reserve(cube.as_slice().len() * 4);
    for v in cube.as_slice() {
        out.extend_from_slice(&to_code(v.re.to_f64_lossy(), full_scale).to_le_bytes());
        out.extend_from_slice(&to_code(v.im.to_f64_lossy(), full_scale).to_le_bytes());
    }
    out
}

fn decode_payload<T: Real>(header: &CaptureHeader, payload: &[u8]) -> Result<DataCube<T>> {
    let scale = header.full_scale / FULL_SCALE_CODE;
    let samples = payload
        .chunks_exact(4)
        .map(|c| {
            let re = i16::from_le_bytes([c[0], c[1]]) as f64 * scale;
            let im = i16::from_le_bytes([c[2], c[3]]) as f64 * scale;
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    DataCube::new(header.config, samples)
}

fn check_len(header: &CaptureHeader, actual_payload: u64) -> Result<()> {
    let expected = header.payload_len()?;
    if actual_payload != expected {
        let what = if actual_payload < expected { "truncated payload" } else { "trailing bytes after payload" };
        return Err(err(
            HEADER_LEN as u64 + actual_payload.min(expected),
            format!(
                "{what}: expected {} bytes in total, found {}",
                HEADER_LEN as u64 + expected,
                HEADER_LEN as u64 + actual_payload
            ),
        ));
    }
    Ok(())
}

pub fn decode_capture<T: Real>(bytes: &[u8]) -> Result<DataCube<T>> {
    let header = decode_header(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    check_len(&header, payload.len() as u64)?;
    decode_payload(&header, payload)
}

/// Writes `cube`; returns the full scale stored in the header.
pub fn write_capture<T: Real>(cube: &DataCube<T>, path: &Path) -> Result<f64> {
    let mut w = BufWriter::new(File::create(path)?);
    let bytes = encode_capture(cube);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(f64::from_le_bytes(bytes[82..90].try_into().expect("eight bytes")))
}

/// Reads the header first and validates it before any payload is read.
pub fn read_capture<T: Real>(path: &Path) -> Result<DataCube<T>> {
    let file = File::open(path)?;
    let total = file.metadata()?.len();
    let mut r = BufReader::new(file);
    let mut h = vec![0u8; HEADER_LEN.min(total as usize)];
    r.read_exact(&mut h)?;
    let header = decode_header(&h)?;
    check_len(&header, total - HEADER_LEN as u64)?;
    let mut payload = vec![0u8; header.payload_len()? as usize];
    r.read_exact(&mut payload)?;
    decode_payload(&header, &payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DataCube<f64> {
        let config = RadarConfig { num_chirps: 2, adc_samples: 4, n_tx: 1, n_rx: 2, ..RadarConfig::reference() };
        let samples = (0..16).map(|i| Complex::new(i as f64 / 20.0 - 0.4, 0.3 - i as f64 / 40.0)).collect();
        DataCube::new(config, samples).unwrap()
    }

    #[test]
    fn header_is_ninety_bytes() {
        let bytes = encode_capture(&tiny());
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 4);
        assert_eq!(&bytes[..8], b"FMCWVIT1");
        let h = decode_header(&bytes).unwrap();
        assert_eq!(h.config, *tiny().config());
        assert_eq!(h.full_scale, 1.0);
    }

    #[test]
    fn codes_order_i_before_q() {
        let bytes = encode_capture(&tiny());
        assert_eq!(i16::from_le_bytes([bytes[90], bytes[91]]), to_code(-0.4, 1.0));
        assert_eq!(i16::from_le_bytes([bytes[92], bytes[93]]), to_code(0.3, 1.0));
        assert_eq!(to_code(1.0, 1.0), 32767);
        assert_eq!(to_code(-1.0, 1.0), -32767);
    }

    #[test]
    fn loud_cubes_raise_full_scale() {
        let mut c = tiny().into_samples();
        c[3] = Complex::new(3.1, 0.0);
        let cube = DataCube::new(*tiny().config(), c).unwrap();
        assert_eq!(full_scale_for(&cube), 4.0);
        let back: DataCube<f64> = decode_capture(&encode_capture(&cube)).unwrap();
        assert!((back.as_slice()[3].re - 3.1).abs() <= 4.0 / 65534.0);
    }
}
