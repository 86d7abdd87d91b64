//! Synthetic disparity frames: a ground plane, fronto-parallel boxes standing
//! on it and a sky at disparity 0, with Gaussian noise, outliers and invalid
//! pixels. Ground truth comes from the noise-free label map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use stixel_core::{DisparityImage, GroundModel, StixelClass, StixelRecord, INVALID};

use crate::error::CliError;

/// Box in model rows (v = 0 at the image bottom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub x0: usize,
    pub width: usize,
    pub vb: usize,
    pub height: usize,
    pub disparity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub ground: GroundModel,
    pub d_range: usize,
    /// Fixed boxes. When empty, `random_boxes` boxes are drawn per frame.
    pub boxes: Vec<BoxSpec>,
    pub random_boxes: usize,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
    pub invalid_fraction: f64,
}

impl SceneSpec {
    /// Horizon at `0.3 * height` from the image top, ground slope 0.4, three
    /// random boxes, sigma 0.5 and 2% outliers.
    pub fn standard(width: usize, height: usize) -> Self {
        SceneSpec {
            width,
            height,
            ground: GroundModel::new(0.4, 0.7 * height as f64),
            d_range: 128,
            boxes: Vec::new(),
            random_boxes: 3,
            noise_sigma: 0.5,
            outlier_fraction: 0.02,
            invalid_fraction: 0.0,
        }
    }

    /// Reads `key = value` lines over [`SceneSpec::standard`] defaults.
    /// `box = x0 width vb height [disparity]` adds a fixed box; without a
    /// disparity the box stands on the ground.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut spec = SceneSpec::standard(640, 240);
        let mut horizon = None;
        let mut boxes = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Config(format!("scene line {}: {msg}", n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_f = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(format!("invalid number `{v}`")))
            };
            let parse_u = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| bad(format!("invalid integer `{v}`")))
            };
            match key {
                "width" => spec.width = parse_u(value)?,
                "height" => spec.height = parse_u(value)?,
                "alpha" => spec.ground.alpha = parse_f(value)?,
                "v_horizon" => horizon = Some(parse_f(value)?),
                "d_range" => spec.d_range = parse_u(value)?,
                "boxes" => spec.random_boxes = parse_u(value)?,
                "noise_sigma" => spec.noise_sigma = parse_f(value)?,
                "outlier_fraction" => spec.outlier_fraction = parse_f(value)?,
                "invalid_fraction" => spec.invalid_fraction = parse_f(value)?,
                "box" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    if !(4..=5).contains(&f.len()) {
                        return Err(bad("box needs `x0 width vb height [disparity]`".into()));
                    }
                    let disparity = f.get(4).map(|v| parse_f(v)).transpose()?;
                    boxes.push((
                        parse_u(f[0])?,
                        parse_u(f[1])?,
                        parse_u(f[2])?,
                        parse_u(f[3])?,
                        disparity,
                    ));
                }
                other => return Err(bad(format!("unknown scene key `{other}`"))),
            }
        }
        spec.ground.v_horizon = horizon.unwrap_or(0.7 * spec.height as f64);
        spec.boxes = boxes
            .into_iter()
            .map(|(x0, width, vb, height, d)| BoxSpec {
                x0,
                width,
                vb,
                height,
                disparity: d.unwrap_or_else(|| spec.ground.disparity(vb as f64)),
            })
            .collect();
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("scene: {m}")));
        if self.width == 0 || self.height == 0 {
            return bad("image must be non-empty");
        }
        if !(0.0..1.0).contains(&self.outlier_fraction)
            || !(0.0..1.0).contains(&self.invalid_fraction)
        {
            return bad("fractions must lie in [0, 1)");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative");
        }
        if self.d_range < 2 {
            return bad("d_range must be at least 2");
        }
        for b in &self.boxes {
            if b.width == 0 || b.height == 0 || b.x0 + b.width > self.width || b.vb >= self.height {
                return bad("box outside the image");
            }
        }
        Ok(())
    }

    /// Highest representable disparity.
    fn d_max(&self) -> f64 {
        (self.d_range - 1) as f64
    }
}

/// Draws `n` boxes standing on the ground in disjoint, `stixel_width`-aligned
/// column ranges, each at least 20 rows tall where the image allows.
pub fn random_boxes<R: Rng>(
    rng: &mut R,
    spec: &SceneSpec,
    n: usize,
    stixel_width: usize,
) -> Vec<BoxSpec> {
    let bands = spec.width / stixel_width.max(1);
    if n == 0 || bands < 2 * n {
        return Vec::new();
    }
    let slot = bands / n;
    let v_hor = spec.ground.v_horizon.clamp(1.0, spec.height as f64) as usize;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let max_w = (slot - 1).clamp(1, 12);
        let w = rng.random_range(max_w.min(3)..=max_w);
        let start = i * slot + rng.random_range(0..=slot - 1 - w);
        let lo = (0.1 * v_hor as f64) as usize;
        let hi = ((0.75 * v_hor as f64) as usize).max(lo);
        let vb = rng.random_range(lo..=hi);
        let room = spec.height - vb;
        let height = rng.random_range(room.min(20)..=room.min(60));
        out.push(BoxSpec {
            x0: start * stixel_width,
            width: w * stixel_width,
            vb,
            height,
            disparity: spec.ground.disparity(vb as f64).min(spec.d_max()),
        });
    }
    out
}

/// Noise-free disparity and box label per pixel, row-major from the image top.
/// Overlapping boxes resolve to the nearest (largest disparity).
pub fn clean_scene(spec: &SceneSpec, boxes: &[BoxSpec]) -> (Vec<f64>, Vec<Option<usize>>) {
    let (w, h) = (spec.width, spec.height);
    let mut disp = vec![0.0; w * h];
    let mut label = vec![None; w * h];
    for row in 0..h {
        let d = spec
            .ground
            .disparity((h - 1 - row) as f64)
            .min(spec.d_max());
        disp[row * w..(row + 1) * w].fill(d);
    }
    for (i, b) in boxes.iter().enumerate() {
        for v in b.vb..(b.vb + b.height).min(h) {
            let row = h - 1 - v;
            for x in b.x0..(b.x0 + b.width).min(w) {
                let p = row * w + x;
                let nearer = label[p].is_none_or(|j: usize| b.disparity > boxes[j].disparity);
                if nearer {
                    disp[p] = b.disparity;
                    label[p] = Some(i);
                }
            }
        }
    }
    (disp, label)
}

/// One ground-truth record per band and visible run of each box.
pub fn ground_truth(
    spec: &SceneSpec,
    boxes: &[BoxSpec],
    label: &[Option<usize>],
    frame: u64,
    stixel_width: usize,
) -> Vec<StixelRecord> {
    let (w, h) = (spec.width, spec.height);
    let s = stixel_width.max(1);
    let mut out = Vec::new();
    for c in 0..w / s {
        let x0 = c * s;
        for (i, b) in boxes.iter().enumerate() {
            let present = |v: usize| (x0..x0 + s).any(|x| label[(h - 1 - v) * w + x] == Some(i));
            let mut v = 0;
            while v < h {
                if !present(v) {
                    v += 1;
                    continue;
                }
                let vb = v;
                while v < h && present(v) {
                    v += 1;
                }
                out.push(StixelRecord {
                    frame,
                    column: c,
                    x0,
                    width: s,
                    vb,
                    vt: v - 1,
                    class: StixelClass::Object,
                    disparity: b.disparity,
                    cost: 0.0,
                });
            }
        }
    }
    out.sort_by_key(|r| (r.column, r.vb));
    out
}

#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub image: DisparityImage,
    pub boxes: Vec<BoxSpec>,
    pub ground_truth: Vec<StixelRecord>,
}

/// Frame `frame` of the sequence seeded by `seed`. Each frame uses its own
/// ChaCha8 stream, so frames can be generated independently.
pub fn generate_frame(
    spec: &SceneSpec,
    seed: u64,
    frame: u64,
    stixel_width: usize,
) -> Result<SyntheticFrame, CliError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    let boxes = if spec.boxes.is_empty() {
        random_boxes(&mut rng, spec, spec.random_boxes, stixel_width)
    } else {
        spec.boxes.clone()
    };
    let (clean, label) = clean_scene(spec, &boxes);
    let noise =
        Normal::new(0.0, spec.noise_sigma).map_err(|e| CliError::Config(format!("scene: {e}")))?;
    let d_max = spec.d_max();
    let data = clean
        .iter()
        .map(|&d| {
            if spec.invalid_fraction > 0.0 && rng.random_bool(spec.invalid_fraction) {
                INVALID
            } else if spec.outlier_fraction > 0.0 && rng.random_bool(spec.outlier_fraction) {
                rng.random_range(0.0..d_max) as f32
            } else {
                (d + noise.sample(&mut rng)).clamp(0.0, d_max) as f32
            }
        })
        .collect();
    let image = DisparityImage::new(spec.width, spec.height, data)?;
    let ground_truth = ground_truth(spec, &boxes, &label, frame, stixel_width);
    Ok(SyntheticFrame {
        image,
        boxes,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(w: usize, h: usize) -> SceneSpec {
        SceneSpec {
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            random_boxes: 0,
            ..SceneSpec::standard(w, h)
        }
    }

    #[test]
    fn empty_scene_is_ground_ramp_and_sky() {
        let spec = quiet(20, 50);
        let f = generate_frame(&spec, 1, 0, 5).unwrap();
        for v in 0..50 {
            let expect = (0.4 * (35.0 - v as f64)).max(0.0) as f32;
            assert_eq!(f.image.at_model_row(7, v), expect, "v={v}");
        }
        assert!(f.ground_truth.is_empty());
    }

    #[test]
    fn fixed_box_ground_truth() {
        let spec = SceneSpec::parse("width = 30\nheight = 40\nboxes = 0\nnoise_sigma = 0\noutlier_fraction = 0\nbox = 5 10 8 12\n").unwrap();
        assert_eq!(spec.ground.v_horizon, 28.0);
        assert_eq!(spec.boxes[0].disparity, 0.4 * 20.0);
        let f = generate_frame(&spec, 0, 3, 5).unwrap();
        assert_eq!(f.ground_truth.len(), 2);
        for (r, col) in f.ground_truth.iter().zip([1, 2]) {
            assert_eq!(
                (r.frame, r.column, r.x0, r.vb, r.vt),
                (3, col, col * 5, 8, 19)
            );
        }
        assert_eq!(f.image.at_model_row(6, 10), 8.0);
        assert_eq!(f.image.at_model_row(4, 10), (0.4f64 * 18.0) as f32);
    }

    #[test]
    fn nearer_box_occludes() {
        let spec = quiet(10, 30);
        let boxes = [
            BoxSpec {
                x0: 0,
                width: 10,
                vb: 2,
                height: 20,
                disparity: 5.0,
            },
            BoxSpec {
                x0: 0,
                width: 5,
                vb: 5,
                height: 5,
                disparity: 9.0,
            },
        ];
        let (disp, label) = clean_scene(&spec, &boxes);
        let gt = ground_truth(&spec, &boxes, &label, 0, 5);
        assert_eq!(disp[(29 - 6) * 10], 9.0);
        let col0: Vec<(usize, usize)> = gt
            .iter()
            .filter(|r| r.column == 0)
            .map(|r| (r.vb, r.vt))
            .collect();
        assert_eq!(col0, vec![(2, 4), (5, 9), (10, 21)]);
        assert_eq!(gt.iter().filter(|r| r.column == 1).count(), 1);
    }

    #[test]
    fn random_boxes_are_disjoint_aligned_and_grounded() {
        let spec = SceneSpec::standard(640, 240);
        for seed in 0..50 {
            let f = generate_frame(&spec, seed, seed, 5).unwrap();
            assert_eq!(f.boxes.len(), 3);
            let mut spans: Vec<(usize, usize)> =
                f.boxes.iter().map(|b| (b.x0, b.x0 + b.width)).collect();
            spans.sort();
            for b in &f.boxes {
                assert_eq!(b.x0 % 5, 0);
                assert_eq!(b.width % 5, 0);
                assert!(b.height >= 20);
                assert!((b.disparity - spec.ground.disparity(b.vb as f64)).abs() < 1e-12);
            }
            assert!(spans.windows(2).all(|p| p[0].1 < p[1].0));
        }
    }

    #[test]
    fn deterministic_per_frame() {
        let spec = SceneSpec::standard(100, 60);
        let a = generate_frame(&spec, 9, 4, 5).unwrap();
        let b = generate_frame(&spec, 9, 4, 5).unwrap();
        let c = generate_frame(&spec, 9, 5, 5).unwrap();
        assert_eq!(a.image, b.image);
        assert_ne!(a.image, c.image);
    }

    #[test]
    fn corruption_rates() {
        let mut spec = quiet(200, 100);
        spec.invalid_fraction = 0.1;
        spec.outlier_fraction = 0.0;
        let f = generate_frame(&spec, 2, 0, 5).unwrap();
        let invalid = f.image.data().iter().filter(|d| d.is_nan()).count() as f64 / 20000.0;
        assert!((invalid - 0.1).abs() < 0.01, "{invalid}");
    }

    #[test]
    fn rejects_bad_scenes() {
        assert!(SceneSpec::parse("colour = red").is_err());
        assert!(SceneSpec::parse("width = 10\nbox = 5 10 0 3").is_err());
        assert!(SceneSpec::parse("outlier_fraction = 1.5").is_err());
    }
}
