//! CSV emission and the feature/label tables used for training.

use std::fs::File;
use std::path::Path;

use crate::dsp::AzimuthGrid;
use crate::error::{Error, Result};
use crate::features::{ExtractedFeatures, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::fpga::{ComparisonReport, PipelineTrace};
use crate::pipeline::{EstimateSource, PipelineOutput, SubjectReport};
use crate::radar::RadarConfig;
use crate::real::Real;
use crate::regression::LabeledSample;
use crate::vmd::VmdResult;

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { path: path.display().to_string(), line, reason: e.to_string() }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_writer(File::create(path)?))
}

fn row<I, S>(w: &mut csv::Writer<File>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| csv_err(path, e))
}

fn finish(mut w: csv::Writer<File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn write_map_csv<T: Real>(
    path: &Path,
    output: &PipelineOutput<T>,
) -> Result<()> {
    write_map(path, &output.map.di_variance, output.map.bins, &output.grid, &output.config)
}

fn write_map<T: Real>(path: &Path, di: &[T], bins: usize, grid: &AzimuthGrid<T>, config: &RadarConfig) -> Result<()> {
    let mut w = writer(path)?;
    row(&mut w, path, ["azimuth_bin", "azimuth_deg", "range_bin", "range_m", "di_variance"])?;
    for (k, deg) in grid.angles_deg().iter().enumerate() {
        for r in 0..bins {
            let v = di[k * bins + r].to_f64_lossy();
            row(
                &mut w,
                path,
                [k.to_string(), deg.to_string(), r.to_string(), config.range_of_bin(r).to_string(), v.to_string()],
            )?;
        }
    }
    finish(w)
}

pub fn write_phase_csv<T: Real>(path: &Path, subject: &SubjectReport<T>) -> Result<()> {
    let mut w = writer(path)?;
    row(&mut w, path, ["sample", "time_s", "wrapped_rad", "unwrapped_rad"])?;
    let fs = subject.phase.slow_time_rate_hz;
    for (m, (u, p)) in subject.phase.unwrapped.iter().zip(&subject.analysis.wrapped.values).enumerate() {
        row(
            &mut w,
            path,
            [m.to_string(), (m as f64 / fs).to_string(), p.to_f64_lossy().to_string(), u.to_f64_lossy().to_string()],
        )?;
    }
    finish(w)
}

pub fn write_modes_csv<T: Real>(path: &Path, vmd: &VmdResult<T>) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["sample".to_string(), "time_s".to_string()];
    header.extend(vmd.center_freqs_hz.iter().enumerate().map(|(k, f)| format!("mode_{k}_{f:.4}hz")));
    row(&mut w, path, &header)?;
    let len = vmd.modes.first().map_or(0, Vec::len);
    for m in 0..len {
        let mut fields = vec![m.to_string(), (m as f64 / vmd.fs_hz).to_string()];
        fields.extend(vmd.modes.iter().map(|mode| mode[m].to_f64_lossy().to_string()));
        row(&mut w, path, &fields)?;
    }
    finish(w)
}

pub const ESTIMATE_COLUMNS: [&str; 7] =
    ["subject_id", "range_m", "azimuth_deg", "br_brpm", "hr_bpm", "confidence", "source"];

/// One row per subject; a header alone when nothing was found.
pub fn write_estimates_csv<T: Real>(path: &Path, subjects: &[SubjectReport<T>]) -> Result<()> {
    let mut w = writer(path)?;
    row(&mut w, path, ESTIMATE_COLUMNS)?;
    for s in subjects {
        row(
            &mut w,
            path,
            [
                s.id.to_string(),
                s.range_m.to_string(),
                s.azimuth_deg.to_string(),
                s.br_brpm.to_string(),
                s.hr_bpm.to_string(),
                if s.low_confidence() { "low" } else { "high" }.to_string(),
                match s.source {
                    EstimateSource::Welch => "welch",
                    EstimateSource::Model => "model",
                }
                .to_string(),
            ],
        )?;
    }
    finish(w)
}

/// Feature rows in the fixed order plus the low-confidence flag.
pub fn write_features_csv(path: &Path, rows: &[ExtractedFeatures]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.push("low_confidence");
    row(&mut w, path, &header)?;
    for f in rows {
        let mut fields: Vec<String> = f.vector.to_array().iter().map(|v| v.to_string()).collect();
        fields.push(u8::from(f.low_confidence()).to_string());
        row(&mut w, path, &fields)?;
    }
    finish(w)
}

pub fn write_labels_csv(path: &Path, samples: &[LabeledSample]) -> Result<()> {
    let mut w = writer(path)?;
    row(&mut w, path, ["br_brpm", "hr_bpm"])?;
    for s in samples {
        row(&mut w, path, [s.br_brpm.to_string(), s.hr_bpm.to_string()])?;
    }
    finish(w)
}

/// Reads the named numeric columns of a headed CSV.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let parse_err = |line: usize, reason: String| Error::Parse { path: path.display().to_string(), line, reason };
    let idx = names
        .iter()
        .map(|n| header.iter().position(|h| h.trim() == *n).ok_or_else(|| parse_err(1, format!("missing column '{n}'"))))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let vals = idx
            .iter()
            .zip(names)
            .map(|(&i, n)| {
                let s = rec.get(i).unwrap_or("").trim();
                s.parse::<f64>().map_err(|_| parse_err(line, format!("column '{n}': '{s}' is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(vals);
    }
    Ok(out)
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureVector>> {
    read_columns(path, &FEATURE_NAMES)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let arr: [f64; FEATURE_COUNT] = v.try_into().expect("column count fixed");
            FeatureVector::from_array(arr).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 2,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    Ok(read_columns(path, &["br_brpm", "hr_bpm"])?.into_iter().map(|v| (v[0], v[1])).collect())
}

/// Pairs feature rows with labels into validated samples.
pub fn read_dataset(features: &Path, labels: &Path) -> Result<Vec<LabeledSample>> {
    let f = read_features_csv(features)?;
    let l = read_labels_csv(labels)?;
    if f.len() != l.len() {
        return Err(Error::Shape(format!("{} feature rows vs {} label rows", f.len(), l.len())));
    }
    f.into_iter()
        .zip(l)
        .enumerate()
        .map(|(i, (f, (br, hr)))| {
            LabeledSample::new(f, br, hr).map_err(|e| Error::Parse {
                path: labels.display().to_string(),
                line: i + 2,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// `stage,index,raw_hex` for every kept register value.
pub fn write_fpga_trace(path: &Path, trace: &PipelineTrace) -> Result<()> {
    let mut w = writer(path)?;
    row(&mut w, path, ["stage", "index", "raw_hex"])?;
    for s in &trace.stages {
        for (i, v) in s.samples.iter().enumerate() {
            row(&mut w, path, [s.name.to_string(), i.to_string(), format!("{:#018x}", *v as u64)])?;
        }
    }
    finish(w)
}

/// `key = value` lines with fixed field names.
pub fn format_fpga_report(r: &ComparisonReport) -> String {
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |v| v.to_string());
    let mut s = String::new();
    let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
    kv("delta_hr_bpm", opt(r.delta_hr_bpm));
    kv("delta_br_brpm", opt(r.delta_br_brpm));
    kv("saturations", r.saturations.to_string());
    kv("modeled_cycles", r.modeled_cycles.to_string());
    kv("float_br_brpm", opt(r.float_rates.map(|v| v.0)));
    kv("float_hr_bpm", opt(r.float_rates.map(|v| v.1)));
    kv("fixed_br_brpm", r.fixed_rates.0.to_string());
    kv("fixed_hr_bpm", r.fixed_rates.1.to_string());
    kv("float_range_m", opt(r.float_range_m));
    kv("fixed_range_m", r.fixed_range_m.to_string());
    kv("float_low_confidence", r.float_low_confidence.to_string());
    kv("fixed_low_confidence", r.fixed_low_confidence.to_string());
    kv("fft_snr_db", r.fft_snr_db.to_string());
    for e in &r.stage_errors {
        kv(&format!("max_error_{}", e.stage), e.max_abs.to_string());
    }
    for st in &r.trace.stages {
        kv(&format!("cycles_{}", st.name), st.cycles.to_string());
        kv(&format!("multiplies_{}", st.name), st.multiplies.to_string());
        kv(&format!("adds_{}", st.name), st.adds.to_string());
    }
    kv("float_wall_s", r.float_wall.as_secs_f64().to_string());
    kv("fixed_wall_s", r.fixed_wall.as_secs_f64().to_string());
    s
}

/// Every per-run CSV: map, estimates and per-subject phase, modes and
/// features.
pub fn write_pipeline_outputs<T: Real>(dir: &Path, output: &PipelineOutput<T>) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut note = |name: String| written.push(name);
    write_map_csv(&dir.join("range_azimuth_map.csv"), output)?;
    note("range_azimuth_map.csv".into());
    for s in &output.subjects {
        write_phase_csv(&dir.join(format!("phase_{}.csv", s.id)), s)?;
        note(format!("phase_{}.csv", s.id));
        write_modes_csv(&dir.join(format!("modes_{}.csv", s.id)), &s.analysis.vmd)?;
        note(format!("modes_{}.csv", s.id));
    }
    let features: Vec<ExtractedFeatures> = output.subjects.iter().map(|s| s.analysis.features.clone()).collect();
    write_features_csv(&dir.join("features.csv"), &features)?;
    note("features.csv".into());
    write_estimates_csv(&dir.join("estimates.csv"), &output.subjects)?;
    note("estimates.csv".into());
    Ok(written)
}
