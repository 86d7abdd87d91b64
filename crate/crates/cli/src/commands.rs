//! Command-line interface.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stixel_core::imageio::{load_records, save_graymap, save_records};
use stixel_core::oracle::MAX_ORACLE_HEIGHT;
use stixel_core::{evaluate, RecordSet, StixelError};

use crate::bench::{bench_image, column_scaling, height_scaling, mad, median, time_frame, Scaling};
use crate::config::{ParamFlags, RunConfig};
use crate::error::CliError;
use crate::fuzz::run_fuzz;
use crate::pipeline::{collect_inputs, estimate_files, Estimator};
use crate::synth::{generate_frame, SceneSpec};

#[derive(Debug, Parser)]
#[command(
    name = "stixels",
    version,
    about = "Multi-stixel segmentation of disparity maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment disparity maps into stixels
    Estimate(EstimateArgs),
    /// Time the pipeline
    Bench(BenchArgs),
    /// Score estimated stixels against ground truth
    Eval(EvalArgs),
    /// Write synthetic disparity frames with ground truth
    Synth(SynthArgs),
    /// Compare the solver with exhaustive search on random columns
    #[command(hide = true)]
    OracleFuzz(FuzzArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// `key = value` config file; flags override it
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamFlags,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(self.config.as_deref(), &self.params)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Disparity file (.pgm or .txt) or a directory of them
    pub input: PathBuf,
    /// Stixel record file to write
    #[arg(short, long)]
    pub output: PathBuf,
    /// Directory for color overlays (`<stem>.ppm`)
    #[arg(long, value_name = "DIR")]
    pub overlay_dir: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Disparity file to time; a synthetic frame is used otherwise
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub width: usize,
    #[arg(long, default_value_t = 440)]
    pub height: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also fit runtime exponents over image height and column count
    #[arg(long)]
    pub scaling: bool,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Ground-truth record file
    #[arg(long)]
    pub gt: PathBuf,
    /// Estimated record file
    #[arg(long)]
    pub pred: PathBuf,
    /// Also print one line per frame
    #[arg(long)]
    pub per_frame: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output directory: `frames/`, `gt.txt` and `scene.cfg`
    #[arg(short, long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub frames: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scene description (`key = value`, `box = x0 width vb height [disparity]`)
    #[arg(long, value_name = "FILE")]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub max_height: usize,
    #[arg(long, default_value_t = 16)]
    pub max_d_range: usize,
    #[arg(long, default_value_t = 0.1)]
    pub invalid_fraction: f64,
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Data(StixelError::from(e))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => estimate(&a, out),
        Command::Bench(a) => bench(&a, out),
        Command::Eval(a) => eval(&a, out),
        Command::Synth(a) => synth(&a, out),
        Command::OracleFuzz(a) => oracle_fuzz(&a, out),
    }
}

pub fn estimate(a: &EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.cfg.load()?;
    let inputs = collect_inputs(&a.input)?;
    if inputs.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no disparity files",
            a.input.display()
        )));
    }
    let est = Estimator::new(cfg)?;
    let s = estimate_files(&est, &inputs, &a.output, a.overlay_dir.as_deref())?;
    writeln!(
        out,
        "{} frames, {} stixels ({} objects), {:.1} ms/frame",
        s.frames,
        s.stixels,
        s.objects,
        1e3 * s.seconds / s.frames as f64
    )
    .map_err(io_err)
}

fn print_scaling(out: &mut dyn Write, label: &str, s: &Scaling) -> Result<(), CliError> {
    for p in &s.points {
        writeln!(out, "  {label} {:>5}  {:>9.3} ms", p.size, 1e3 * p.best_s).map_err(io_err)?;
    }
    writeln!(out, "  exponent {:.3}", s.exponent).map_err(io_err)
}

pub fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = a.cfg.load()?;
    let s = cfg.params.stixel_width;
    let img = match &a.input {
        Some(path) => Estimator::new(cfg.clone())?.load(path)?,
        None => {
            if cfg.v_horizon.is_none() {
                cfg.v_horizon = Some(0.7 * a.height as f64);
            }
            bench_image(a.width, a.height, a.seed, s)?
        }
    };
    let est = Estimator::new(cfg.clone())?;
    let t = time_frame(&est, &img, cfg.repeat)?;
    let (m, d) = (median(&t), mad(&t));
    writeln!(
        out,
        "frame {}x{}, {} columns, threads {}, repeat {}",
        img.width(),
        img.height(),
        img.width() / s,
        cfg.threads,
        t.len()
    )
    .map_err(io_err)?;
    writeln!(
        out,
        "median {:.3} ms, MAD {:.3} ms, {:.1} fps",
        1e3 * m,
        1e3 * d,
        1.0 / m
    )
    .map_err(io_err)?;
    if a.scaling {
        let repeat = cfg.repeat.max(3);
        writeln!(out, "height scaling (64 columns)").map_err(io_err)?;
        print_scaling(
            out,
            "h",
            &height_scaling(&cfg, &[128, 256, 512, 1024], 64, repeat)?,
        )?;
        writeln!(out, "column scaling (h = 256)").map_err(io_err)?;
        print_scaling(
            out,
            "columns",
            &column_scaling(&cfg, &[64, 128, 256, 512], 256, repeat)?,
        )?;
    }
    Ok(())
}

pub fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let gt = load_records(&a.gt)?;
    let pred = load_records(&a.pred)?;
    let r = evaluate(&gt, &pred)?;
    writeln!(out, "frames               {}", r.frames.len()).map_err(io_err)?;
    writeln!(
        out,
        "detection rate       {:.2} % ({}/{})",
        100.0 * r.detection_rate,
        r.detected,
        r.total_gt
    )
    .map_err(io_err)?;
    writeln!(out, "false positives      {}", r.total_false_positives).map_err(io_err)?;
    writeln!(
        out,
        "frames with FP       {:.2} % ({}/{})",
        r.false_positive_frame_pct(),
        r.frames_with_false_positives(),
        r.frames.len()
    )
    .map_err(io_err)?;
    if a.per_frame {
        for f in &r.frames {
            writeln!(
                out,
                "frame {} gt {} detected {} fp {}",
                f.frame, f.gt_stixels, f.detected, f.false_positives
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Raw sample value for invalid pixels in written graymaps.
fn invalid_raw(cfg: &RunConfig) -> Result<u16, CliError> {
    let v = cfg.invalid_value;
    if v.fract() == 0.0 && (0.0..=65535.0).contains(&v) {
        Ok(v as u16)
    } else {
        Err(CliError::Config(format!(
            "`invalid_value` {v} is not a 16-bit sample"
        )))
    }
}

pub fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = a.cfg.load()?;
    let mut spec = match &a.scene {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Data(StixelError::from(e).in_file(path)))?;
            SceneSpec::parse(&text)?
        }
        None => SceneSpec::standard(640, 240),
    };
    if let Some(w) = a.width {
        spec.width = w;
    }
    if let Some(h) = a.height {
        spec.height = h;
        if a.scene.is_none() {
            spec.ground.v_horizon = 0.7 * h as f64;
        }
    }
    spec.validate()?;
    let invalid = invalid_raw(&cfg)?;
    let max_raw = (spec.d_range - 1) as f64 * cfg.disparity_scale;
    if max_raw > 65535.0 || invalid as f64 <= max_raw {
        return Err(CliError::Config(
            "`disparity_scale` leaves no room for the invalid sample value".into(),
        ));
    }

    let frames_dir = a.out_dir.join("frames");
    fs::create_dir_all(&frames_dir)
        .map_err(|e| CliError::Data(StixelError::from(e).in_file(&frames_dir)))?;
    let s = cfg.params.stixel_width;
    let mut gt = RecordSet::default();
    for frame in 0..a.frames {
        let f = generate_frame(&spec, a.seed, frame, s)?;
        save_graymap(
            frames_dir.join(format!("frame_{frame:04}.pgm")),
            &f.image,
            cfg.disparity_scale,
            invalid,
        )?;
        gt.frames.insert(frame);
        for r in f.ground_truth {
            gt.push(r);
        }
    }
    save_records(a.out_dir.join("gt.txt"), &gt)?;

    cfg.params.ground.alpha = spec.ground.alpha;
    cfg.v_horizon = Some(spec.ground.v_horizon);
    cfg.params.sensor.d_range = spec.d_range;
    let cfg_path = a.out_dir.join("scene.cfg");
    fs::write(&cfg_path, cfg.to_text())
        .map_err(|e| CliError::Data(StixelError::from(e).in_file(&cfg_path)))?;
    writeln!(
        out,
        "{} frames of {}x{} with {} ground-truth stixels in {}",
        a.frames,
        spec.width,
        spec.height,
        gt.records.len(),
        a.out_dir.display()
    )
    .map_err(io_err)
}

pub fn oracle_fuzz(a: &FuzzArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.max_height == 0 || a.max_height > MAX_ORACLE_HEIGHT {
        return Err(CliError::Config(format!(
            "--max-height must lie in 1..={MAX_ORACLE_HEIGHT}"
        )));
    }
    if a.max_d_range < 2 || !(0.0..1.0).contains(&a.invalid_fraction) {
        return Err(CliError::Config(
            "--max-d-range must be at least 2 and --invalid-fraction in [0, 1)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let r = run_fuzz(
        &mut rng,
        a.cases,
        1..=a.max_height,
        2..=a.max_d_range,
        a.invalid_fraction,
        1e-9,
        1e-6,
    )?;
    writeln!(
        out,
        "{} cases, max cost diff {:.3e}, max rescore diff {:.3e}, {} failures",
        r.cases,
        r.max_cost_diff,
        r.max_rescore_diff,
        r.failures.len()
    )
    .map_err(io_err)?;
    for f in &r.failures {
        writeln!(out, "  {f}").map_err(io_err)?;
    }
    if r.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{} of {} cases disagree",
            r.failures.len(),
            r.cases
        )))
    }
}
