//! Wall-clock timing of the estimation pipeline.

use std::time::Instant;

use stixel_core::DisparityImage;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::Estimator;
use crate::synth::{generate_frame, SceneSpec};

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation.
pub fn mad(xs: &[f64]) -> f64 {
    let m = median(xs);
    median(&xs.iter().map(|x| (x - m).abs()).collect::<Vec<_>>())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Seconds per call after one warm-up call.
pub fn time_frame(
    est: &Estimator,
    img: &DisparityImage,
    repeat: usize,
) -> Result<Vec<f64>, CliError> {
    est.estimate(img)?;
    let mut out = Vec::with_capacity(repeat);
    for _ in 0..repeat.max(1) {
        let t = Instant::now();
        let cols = est.estimate(img)?;
        out.push(t.elapsed().as_secs_f64());
        std::hint::black_box(cols);
    }
    Ok(out)
}

/// Standard synthetic scene used for timing.
pub fn bench_image(
    width: usize,
    height: usize,
    seed: u64,
    stixel_width: usize,
) -> Result<DisparityImage, CliError> {
    let spec = SceneSpec::standard(width, height);
    Ok(generate_frame(&spec, seed, 0, stixel_width)?.image)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub size: usize,
    /// Fastest frame over all rounds.
    pub best_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub points: Vec<ScalingPoint>,
    pub exponent: f64,
}

/// Times every case once per round, cycling through the cases so that a slow
/// spell of the host hits all sizes alike, and keeps each case's fastest run.
fn interleaved_best(
    cases: &[(Estimator, DisparityImage)],
    rounds: usize,
) -> Result<Vec<f64>, CliError> {
    let mut best = vec![f64::INFINITY; cases.len()];
    for (est, img) in cases {
        est.estimate(img)?;
    }
    for _ in 0..rounds.max(1) {
        for ((est, img), b) in cases.iter().zip(&mut best) {
            let t = Instant::now();
            std::hint::black_box(est.estimate(img)?);
            *b = b.min(t.elapsed().as_secs_f64());
        }
    }
    Ok(best)
}

fn scaling(
    cfg: &RunConfig,
    sizes: &[usize],
    shape: impl Fn(usize) -> (usize, usize),
    rounds: usize,
) -> Result<Scaling, CliError> {
    let s = cfg.params.stixel_width;
    let cases = sizes
        .iter()
        .map(|&size| {
            let (cols, height) = shape(size);
            let mut cfg = cfg.clone();
            cfg.v_horizon = Some(0.7 * height as f64);
            Ok((Estimator::new(cfg)?, bench_image(cols * s, height, 7, s)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let best = interleaved_best(&cases, rounds)?;
    let xs: Vec<f64> = sizes.iter().map(|&x| x as f64).collect();
    Ok(Scaling {
        exponent: fit_exponent(&xs, &best),
        points: sizes
            .iter()
            .zip(best)
            .map(|(&size, best_s)| ScalingPoint { size, best_s })
            .collect(),
    })
}

/// Frame time for each image height at a fixed column count.
pub fn height_scaling(
    cfg: &RunConfig,
    heights: &[usize],
    cols: usize,
    rounds: usize,
) -> Result<Scaling, CliError> {
    scaling(cfg, heights, |h| (cols, h), rounds)
}

/// Frame time for each column count at a fixed height.
pub fn column_scaling(
    cfg: &RunConfig,
    counts: &[usize],
    height: usize,
    rounds: usize,
) -> Result<Scaling, CliError> {
    scaling(cfg, counts, |c| (c, height), rounds)
}
