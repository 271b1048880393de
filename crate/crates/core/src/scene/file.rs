//! Scene description files: flat key=value with indexed `subject.<i>.*`
//! and `clutter.<i>.*` blocks.

use super::{ClutterSpec, Reflector, SimScene, SubjectSpec};
use crate::error::{Error, Result};
use crate::kv::{KvDoc, KvWriter};

const SUBJECT_FIELDS: [&str; 10] = [
    "range_m",
    "azimuth_deg",
    "br_hz",
    "hr_hz",
    "breath_amp_m",
    "heart_amp_m",
    "harmonics",
    "rcs",
    "jitter_m",
    "obstruction_m",
];
const CLUTTER_FIELDS: [&str; 3] = ["range_m", "azimuth_deg", "amplitude"];
const TOP_LEVEL: [&str; 4] = ["seed", "snr_db", "radar_height_m", "radar_tilt_deg"];

fn allowed_key(key: &str) -> bool {
    if TOP_LEVEL.contains(&key) {
        return true;
    }
    let parts: Vec<&str> = key.split('.').collect();
    match parts.as_slice() {
        ["subject", idx, field] => idx.parse::<usize>().is_ok() && SUBJECT_FIELDS.contains(field),
        ["clutter", idx, field] => idx.parse::<usize>().is_ok() && CLUTTER_FIELDS.contains(field),
        _ => false,
    }
}

fn parse_harmonics(text: &str, origin: &str) -> Result<Vec<(u32, f64)>> {
    if text.is_empty() || text == "none" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|item| {
            let (h, a) = item.trim().split_once(':').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: 0,
                reason: format!("harmonic '{item}' must be index:amplitude"),
            })?;
            let h = h.trim().parse::<u32>();
            let a = a.trim().parse::<f64>();
            match (h, a) {
                (Ok(h), Ok(a)) => Ok((h, a)),
                _ => Err(Error::Parse { path: origin.to_string(), line: 0, reason: format!("bad harmonic '{item}'") }),
            }
        })
        .collect()
}

/// Parses a scene file. Unlisted subject fields take [`SubjectSpec`]
/// defaults; `snr_db` absent or `none` means noiseless.
pub fn parse_scene(text: &str, origin: &str) -> Result<SimScene> {
    let doc = KvDoc::parse(text, origin)?;
    doc.reject_unknown(allowed_key)?;
    let snr_db = match doc.raw("snr_db") {
        None | Some("none") | Some("inf") => None,
        Some(_) => Some(doc.require::<f64>("snr_db")?),
    };
    let defaults = SubjectSpec::default();
    let mut subjects = Vec::new();
    for i in doc.indices("subject")? {
        let key = |f: &str| format!("subject.{i}.{f}");
        let harmonics = match doc.raw(&key("harmonics")) {
            Some(text) => parse_harmonics(text, origin)?,
            None => defaults.breath_harmonics.clone(),
        };
        subjects.push(SubjectSpec {
            range_m: doc.require(&key("range_m"))?,
            azimuth_deg: doc.get_or(&key("azimuth_deg"), defaults.azimuth_deg)?,
            br_hz: doc.get_or(&key("br_hz"), defaults.br_hz)?,
            hr_hz: doc.get_or(&key("hr_hz"), defaults.hr_hz)?,
            breath_amplitude_m: doc.get_or(&key("breath_amp_m"), defaults.breath_amplitude_m)?,
            heart_amplitude_m: doc.get_or(&key("heart_amp_m"), defaults.heart_amplitude_m)?,
            breath_harmonics: harmonics,
            rcs_amplitude: doc.get_or(&key("rcs"), defaults.rcs_amplitude)?,
            posture_jitter_m: doc.get_or(&key("jitter_m"), defaults.posture_jitter_m)?,
            obstruction_m: doc.get_or(&key("obstruction_m"), defaults.obstruction_m)?,
        });
    }
    let mut reflectors = Vec::new();
    for i in doc.indices("clutter")? {
        let key = |f: &str| format!("clutter.{i}.{f}");
        reflectors.push(Reflector {
            range_m: doc.require(&key("range_m"))?,
            azimuth_deg: doc.get_or(&key("azimuth_deg"), 0.0)?,
            amplitude: doc.require(&key("amplitude"))?,
        });
    }
    let scene = SimScene {
        subjects,
        clutter: ClutterSpec { reflectors },
        snr_db,
        seed: doc.get_or("seed", 0)?,
        radar_height_m: doc.get_or("radar_height_m", 0.0)?,
        radar_tilt_deg: doc.get_or("radar_tilt_deg", 0.0)?,
    };
    scene.validate()?;
    Ok(scene)
}

pub fn scene_to_string(scene: &SimScene) -> String {
    let mut w = KvWriter::default();
    w.comment("simulated radar scene").entry("seed", scene.seed);
    match scene.snr_db {
        Some(s) => w.entry("snr_db", s),
        None => w.entry("snr_db", "none"),
    };
    w.entry("radar_height_m", scene.radar_height_m).entry("radar_tilt_deg", scene.radar_tilt_deg);
    for (i, s) in scene.subjects.iter().enumerate() {
        let harmonics = if s.breath_harmonics.is_empty() {
            "none".to_string()
        } else {
            s.breath_harmonics.iter().map(|(h, a)| format!("{h}:{a}")).collect::<Vec<_>>().join(",")
        };
        w.blank()
            .entry(&format!("subject.{i}.range_m"), s.range_m)
            .entry(&format!("subject.{i}.azimuth_deg"), s.azimuth_deg)
            .entry(&format!("subject.{i}.br_hz"), s.br_hz)
            .entry(&format!("subject.{i}.hr_hz"), s.hr_hz)
            .entry(&format!("subject.{i}.breath_amp_m"), s.breath_amplitude_m)
            .entry(&format!("subject.{i}.heart_amp_m"), s.heart_amplitude_m)
            .entry(&format!("subject.{i}.harmonics"), harmonics)
            .entry(&format!("subject.{i}.rcs"), s.rcs_amplitude)
            .entry(&format!("subject.{i}.jitter_m"), s.posture_jitter_m)
            .entry(&format!("subject.{i}.obstruction_m"), s.obstruction_m);
    }
    for (i, r) in scene.clutter.reflectors.iter().enumerate() {
        w.blank()
            .entry(&format!("clutter.{i}.range_m"), r.range_m)
            .entry(&format!("clutter.{i}.azimuth_deg"), r.azimuth_deg)
            .entry(&format!("clutter.{i}.amplitude"), r.amplitude);
    }
    w.finish()
}
