use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use vsm_core::fpga::{compare_pipelines, FpgaOptions};
use vsm_core::io::{self, RunManifest};
use vsm_core::pipeline::{process_cube, PipelineOptions};
use vsm_core::regression::{
    evaluate, generate_dataset, load_models, save_models, train_model, DatasetConfig, ModelKind, DEFAULT_SPLIT,
};
use vsm_core::scene::{parse_scene, scenario_preset, scene_to_string, synthesize};
use vsm_core::{min_elevation, DataCube64, RadarConfig};

#[derive(Parser, Debug)]
#[command(name = "vsm", version, about = "FMCW radar vital-sign toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a capture from a scene file.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        /// Radar key=value file; the reference configuration when omitted.
        #[arg(long)]
        radar: Option<PathBuf>,
        /// Overrides the scene's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the estimation pipeline on a capture.
    Process {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Also run the fixed-point model and write fpga_report.txt.
        #[arg(long)]
        fixed_point: bool,
        /// With --fixed-point, dump register values to fpga_trace.csv.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the minimum radar elevation for a scene.
    Plan {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Fit BR and HR regressors to a feature/label table.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value = "random_forest")]
        model_kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SPLIT)]
        split: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on a feature/label table.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Write the scene files of a named experiment layout.
    Preset {
        #[arg(long)]
        name: String,
        /// A file for single-scene presets, a directory for sweeps.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a simulator training set as features.csv and labels.csv.
    Dataset {
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        radar: Option<PathBuf>,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    NoSubjects,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) => f.write_str(m),
            Failure::NoSubjects => f.write_str("no subjects found"),
        }
    }
}

impl From<vsm_core::Error> for Failure {
    fn from(e: vsm_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_radar(path: Option<&Path>) -> Result<RadarConfig, Failure> {
    match path {
        Some(p) => Ok(RadarConfig::parse_str(&read_text(p)?, &p.display().to_string())?),
        None => Ok(RadarConfig::reference()),
    }
}

fn simulate(scene: &Path, radar: Option<&Path>, seed: Option<u64>, out: &Path) -> Outcome {
    let mut s = parse_scene(&read_text(scene)?, &scene.display().to_string())?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let config = load_radar(radar)?;
    for w in vsm_core::scene::separation_warnings(&s, &config) {
        eprintln!("warning: {w}");
    }
    let cube: DataCube64 = synthesize(&s, &config)?;
    let full_scale = io::write_capture(&cube, out)?;
    println!("wrote {} ({} subjects, full scale {full_scale})", out.display(), s.subjects.len());
    Ok(())
}

fn process(args: &[String], input: &Path, model: Option<&Path>, fixed_point: bool, trace: bool, out_dir: &Path) -> Outcome {
    let cube: DataCube64 = io::read_capture(input)?;
    let models = model.map(load_models).transpose()?;
    let options = PipelineOptions::default();
    let output = process_cube(&cube, &options, models.as_ref())?;

    let fpga = FpgaOptions { keep_samples: trace, ..FpgaOptions::default() };
    let report = if fixed_point {
        let t = Instant::now();
        let r = compare_pipelines(&cube, &options, &fpga)?;
        Some((r, t.elapsed()))
    } else {
        None
    };

    let mut outputs = vec!["range_azimuth_map.csv".to_string()];
    for s in &output.subjects {
        outputs.push(format!("phase_{}.csv", s.id));
        outputs.push(format!("modes_{}.csv", s.id));
    }
    outputs.extend(["features.csv".to_string(), "estimates.csv".to_string()]);
    if report.is_some() {
        outputs.push("fpga_report.txt".into());
        if trace {
            outputs.push("fpga_trace.csv".into());
        }
    }
    let mut timings: Vec<(String, f64)> =
        output.timings.iter().map(|(n, d)| (n.to_string(), d.as_secs_f64())).collect();
    if let Some((_, d)) = &report {
        timings.push(("fixed_point_compare".into(), d.as_secs_f64()));
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "process".into(),
        args: args.to_vec(),
        inputs: std::iter::once(input).chain(model).map(|p| p.display().to_string()).collect(),
        seed: None,
        options: vec![
            ("window".into(), format!("{:?}", options.window)),
            ("rel_threshold".into(), options.rel_threshold.to_string()),
            ("max_subjects".into(), options.max_subjects.to_string()),
            ("vmd".into(), format!("{:?}", options.vmd)),
            ("fixed_point".into(), fixed_point.to_string()),
        ],
        output_dir: out_dir.display().to_string(),
        outputs,
        timings_s: timings,
    };
    std::fs::create_dir_all(out_dir)?;
    manifest.write(&out_dir.join("manifest.json"))?;
    io::write_pipeline_outputs(out_dir, &output)?;
    if let Some((r, _)) = &report {
        std::fs::write(out_dir.join("fpga_report.txt"), io::format_fpga_report(r))?;
        if trace {
            io::write_fpga_trace(&out_dir.join("fpga_trace.csv"), &r.trace)?;
        }
    }

    for s in &output.subjects {
        println!(
            "subject {}: range {:.3} m, azimuth {:+.1} deg, BR {:.2} BRPM, HR {:.2} BPM{}",
            s.id,
            s.range_m,
            s.azimuth_deg,
            s.br_brpm,
            s.hr_bpm,
            if s.low_confidence() { " (low confidence)" } else { "" }
        );
    }
    if output.no_subjects() {
        return Err(Failure::NoSubjects);
    }
    Ok(())
}

/// Micrometre precision with trailing zeros dropped.
fn metres(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn plan(scene: &Path) -> Outcome {
    let s = parse_scene(&read_text(scene)?, &scene.display().to_string())?;
    let geometry = s.geometry()?;
    let p = min_elevation(&geometry);
    println!("subject\trange_m\tobstruction_m\th_i_m");
    for (i, (g, h)) in geometry.subjects().iter().zip(&p.per_subject_m).enumerate() {
        println!("{}\t{}\t{}\t{}", i + 1, metres(g.range_m), metres(g.obstruction_m), metres(*h));
    }
    println!("h_min = {} m", metres(p.h_min_m));
    Ok(())
}

fn parse_kind(s: &str) -> Result<ModelKind, Failure> {
    ModelKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        Failure::Usage(format!("unknown model kind '{s}'; expected one of {}", names.join(", ")))
    })
}

fn train(features: &Path, labels: &Path, kind: &str, seed: u64, split: f64, out: &Path) -> Outcome {
    let kind = parse_kind(kind)?;
    let data = io::read_dataset(features, labels)?;
    let outcome = train_model(&data, kind, split, seed)?;
    save_models(out, &outcome.models)?;
    println!("model {} trained on {} samples, held out {}", kind.name(), outcome.train_indices.len(), outcome.test_indices.len());
    println!("br: r2 {:.4} mae {:.4} BRPM", outcome.br_metrics.r2, outcome.br_metrics.mae);
    println!("hr: r2 {:.4} mae {:.4} BPM", outcome.hr_metrics.r2, outcome.hr_metrics.mae);
    Ok(())
}

fn evaluate_cmd(model: &Path, features: &Path, labels: &Path) -> Outcome {
    let models = load_models(model)?;
    let data = io::read_dataset(features, labels)?;
    let feats: Vec<_> = data.iter().map(|s| s.features).collect();
    let br = evaluate(&models.br.predict_many(&feats), &data.iter().map(|s| s.br_brpm).collect::<Vec<_>>())?;
    let hr = evaluate(&models.hr.predict_many(&feats), &data.iter().map(|s| s.hr_bpm).collect::<Vec<_>>())?;
    println!("kind {} samples {}", models.br.kind().name(), data.len());
    println!("br: r2 {:.4} mae {:.4} BRPM{}", br.r2, br.mae, if br.r2_undefined { " (r2 undefined)" } else { "" });
    println!("hr: r2 {:.4} mae {:.4} BPM{}", hr.r2, hr.mae, if hr.r2_undefined { " (r2 undefined)" } else { "" });
    Ok(())
}

fn preset(name: &str, out: &Path) -> Outcome {
    let scenes = scenario_preset(name).map_err(|e| Failure::Usage(e.to_string()))?;
    if let [only] = scenes.as_slice() {
        std::fs::write(out, scene_to_string(&only.scene))?;
        println!("wrote {}", out.display());
        return Ok(());
    }
    std::fs::create_dir_all(out)?;
    for s in &scenes {
        let path = out.join(format!("{}.scene", s.label));
        std::fs::write(&path, scene_to_string(&s.scene))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn dataset(samples: usize, seed: u64, radar: Option<&Path>, features: &Path, labels: &Path) -> Outcome {
    let config = DatasetConfig { samples, seed, radar: load_radar(radar)?, ..DatasetConfig::default() };
    let data = generate_dataset(&config)?;
    let rows: Vec<_> = data
        .iter()
        .map(|s| vsm_core::features::ExtractedFeatures {
            vector: s.features,
            unresolved: [false; 9],
            clamped: [false; 9],
            comb_bypassed: false,
        })
        .collect();
    io::write_features_csv(features, &rows)?;
    io::write_labels_csv(labels, &data)?;
    println!("wrote {} samples to {} and {}", data.len(), features.display(), labels.display());
    Ok(())
}

fn run(args: Vec<String>) -> Outcome {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Failure::Usage(e.to_string()));
        }
    };
    match cli.command {
        Command::Simulate { scene, radar, seed, out } => simulate(&scene, radar.as_deref(), seed, &out),
        Command::Process { input, model, fixed_point, trace, out_dir } => {
            process(&args, &input, model.as_deref(), fixed_point, trace, &out_dir)
        }
        Command::Plan { scene } => plan(&scene),
        Command::Train { features, labels, model_kind, seed, split, out } => {
            train(&features, &labels, &model_kind, seed, split, &out)
        }
        Command::Evaluate { model, features, labels } => evaluate_cmd(&model, &features, &labels),
        Command::Preset { name, out } => preset(&name, &out),
        Command::Dataset { samples, seed, radar, features, labels } => {
            dataset(samples, seed, radar.as_deref(), &features, &labels)
        }
        Command::Replay { manifest } => {
            let m = RunManifest::read(&manifest)?;
            if m.args.first().is_none() || m.command == "replay" {
                return Err(Failure::Data(format!("{}: no replayable command", manifest.display())));
            }
            run(m.args)
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("VSM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Failure::Usage(format!("VSM_THREADS must be a count, got '{v}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = init_threads().and_then(|_| run(std::env::args().collect()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("vsm: {f}");
            ExitCode::from(match f {
                Failure::Usage(_) => 1,
                Failure::Data(_) => 2,
                Failure::NoSubjects => 3,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        for line in [
            "vsm simulate --scene s --out f",
            "vsm process --in f --model m --fixed-point --out-dir d",
            "vsm plan --scene s",
            "vsm train --features f --labels l --model-kind rf --seed 3 --out m",
            "vsm evaluate --model m --features f --labels l",
            "vsm preset --name zigzag_five --out s",
            "vsm dataset --samples 10 --features f --labels l",
        ] {
            assert!(Cli::try_parse_from(line.split(' ')).is_ok(), "{line}");
        }
        assert!(Cli::try_parse_from(["vsm", "process", "--out-dir", "d"]).is_err());
    }

    #[test]
    fn metre_formatting() {
        assert_eq!(metres(0.3 * 3.0), "0.9");
        assert_eq!(metres(0.0), "0");
        assert_eq!(metres(1.25), "1.25");
    }

    #[test]
    fn model_kind_names() {
        assert!(parse_kind("linear").is_ok() && parse_kind("knn").is_ok() && parse_kind("random_forest").is_ok());
        assert!(matches!(parse_kind("svr"), Err(Failure::Usage(_))));
    }
}
