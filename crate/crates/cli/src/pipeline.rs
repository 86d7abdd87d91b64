//! Frame-level estimation and file handling shared by the subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::{ThreadPool, ThreadPoolBuilder};
use stixel_core::imageio::{self, write_stixels, RECORD_HEADER};
use stixel_core::{
    build_pair_cost_lut, reduce_and_transpose, solve_frame, solve_frame_parallel, DisparityImage,
    PairCostLut, StixelColumn, StixelError,
};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct Estimator {
    cfg: RunConfig,
    pair: PairCostLut,
    pool: Option<ThreadPool>,
}

impl Estimator {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let pair = build_pair_cost_lut(&cfg.params.sensor);
        let pool = if cfg.threads > 1 {
            let pool = ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(Estimator { cfg, pair, pool })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Column reduction, per-column tables, DP and backtracking for one frame.
    pub fn estimate(&self, img: &DisparityImage) -> Result<Vec<StixelColumn>, CliError> {
        let params = self.cfg.params_for_height(img.height());
        let cols = reduce_and_transpose(img, params.stixel_width)?;
        let out = match &self.pool {
            Some(pool) => pool.install(|| solve_frame_parallel(&cols, &self.pair, &params)),
            None => solve_frame(&cols, &self.pair, &params),
        };
        Ok(out?)
    }

    /// Loads a disparity file and invalidates samples outside `[0, d_range)`.
    pub fn load(&self, path: &Path) -> Result<DisparityImage, CliError> {
        let mut img =
            imageio::load_disparity(path, self.cfg.disparity_scale, self.cfg.invalid_value)?;
        img.mask_out_of_range(self.cfg.params.sensor.d_range);
        Ok(img)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameInput {
    pub frame: u64,
    pub path: PathBuf,
}

fn is_disparity_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "txt")
    )
}

/// Trailing decimal digits of the file stem, e.g. 12 for `frame_0012.pgm`.
pub fn frame_id_from_path(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// A single file, or every `.pgm`/`.txt` file of a directory sorted by name.
/// Frame ids come from the trailing digits of each name, falling back to the
/// position in the sorted list.
pub fn collect_inputs(path: &Path) -> Result<Vec<FrameInput>, CliError> {
    let meta = fs::metadata(path).map_err(|e| StixelError::from(e).in_file(path))?;
    if !meta.is_dir() {
        let frame = frame_id_from_path(path).unwrap_or(0);
        return Ok(vec![FrameInput {
            frame,
            path: path.to_path_buf(),
        }]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| StixelError::from(e).in_file(path))? {
        let p = entry
            .map_err(|e| StixelError::from(e).in_file(path))?
            .path();
        if p.is_file() && is_disparity_file(&p) {
            files.push(p);
        }
    }
    files.sort();
    let mut inputs: Vec<FrameInput> = files
        .into_iter()
        .enumerate()
        .map(|(i, p)| FrameInput {
            frame: frame_id_from_path(&p).unwrap_or(i as u64),
            path: p,
        })
        .collect();
    inputs.sort_by_key(|f| f.frame);
    if let Some(pair) = inputs.windows(2).find(|p| p[0].frame == p[1].frame) {
        return Err(CliError::Config(format!(
            "{} and {} map to the same frame id {}",
            pair[0].path.display(),
            pair[1].path.display(),
            pair[0].frame
        )));
    }
    Ok(inputs)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub frames: usize,
    pub stixels: usize,
    pub objects: usize,
    pub seconds: f64,
}

/// Estimates every input and writes one record file, frames in id order.
/// With `overlay_dir`, also writes `<stem>.ppm` per frame there.
pub fn estimate_files(
    est: &Estimator,
    inputs: &[FrameInput],
    output: &Path,
    overlay_dir: Option<&Path>,
) -> Result<RunSummary, CliError> {
    let file = fs::File::create(output).map_err(|e| StixelError::from(e).in_file(output))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{RECORD_HEADER}").map_err(StixelError::from)?;
    if let Some(dir) = overlay_dir {
        fs::create_dir_all(dir).map_err(|e| StixelError::from(e).in_file(dir))?;
    }
    let s = est.config().params.stixel_width;
    let d_range = est.config().params.sensor.d_range;
    let mut summary = RunSummary::default();
    for input in inputs {
        let img = est.load(&input.path)?;
        let t = std::time::Instant::now();
        let cols = est.estimate(&img)?;
        summary.seconds += t.elapsed().as_secs_f64();
        writeln!(w, "frame {}", input.frame).map_err(StixelError::from)?;
        write_stixels(&mut w, input.frame, &cols, s)?;
        summary.frames += 1;
        for c in &cols {
            summary.stixels += c.stixels.len();
            summary.objects += c
                .stixels
                .iter()
                .filter(|st| st.class == stixel_core::StixelClass::Object)
                .count();
        }
        if let Some(dir) = overlay_dir {
            let stem = input
                .path
                .file_stem()
                .map(|s| s.to_os_string())
                .unwrap_or_default();
            let path = dir.join(stem).with_extension("ppm");
            imageio::save_overlay(&path, &img, &cols, s, d_range)?;
        }
    }
    w.flush()
        .map_err(|e| StixelError::from(e).in_file(output))?;
    Ok(summary)
}
