//! Disparity images and their reduction to one-pixel-wide columns.

use crate::error::{Result, StixelError};

/// In-memory marker for a pixel without a disparity measurement.
pub const INVALID: f32 = f32::NAN;

/// Returns the measurement as `f64`, or `None` for the invalid marker.
#[inline]
pub fn measurement(d: f32) -> Option<f64> {
    if d.is_nan() {
        None
    } else {
        Some(d as f64)
    }
}

/// Dense disparity map stored row-major, top image row first.
///
/// Image row `r` corresponds to model row `v = height - 1 - r`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DisparityImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(StixelError::param(
                "image",
                format!("dimensions must be positive, got {width}x{height}"),
            ));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| StixelError::param("image", "dimensions overflow"))?;
        if data.len() != expected {
            return Err(StixelError::param(
                "image",
                format!(
                    "expected {expected} samples for {width}x{height}, got {}",
                    data.len()
                ),
            ));
        }
        Ok(DisparityImage {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Sample at column `x` and image row `row` (top = 0).
    pub fn get(&self, x: usize, row: usize) -> f32 {
        self.data[row * self.width + x]
    }

    pub fn set(&mut self, x: usize, row: usize, d: f32) {
        self.data[row * self.width + x] = d;
    }

    /// Sample at column `x` and model row `v` (bottom = 0).
    pub fn at_model_row(&self, x: usize, v: usize) -> f32 {
        self.get(x, self.height - 1 - v)
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Marks every sample outside `[0, d_range)` invalid and returns how many were changed.
    pub fn mask_out_of_range(&mut self, d_range: usize) -> usize {
        let limit = d_range as f32;
        let mut masked = 0;
        for d in &mut self.data {
            if !d.is_nan() && !(*d >= 0.0 && *d < limit) {
                *d = INVALID;
                masked += 1;
            }
        }
        masked
    }
}

/// Reduced image in column-major layout: column `c` occupies the contiguous
/// range `c * height .. (c + 1) * height`, indexed by model row.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnImage {
    n_cols: usize,
    height: usize,
    data: Vec<f32>,
}

impl ColumnImage {
    pub fn from_columns(columns: &[Vec<f32>]) -> Result<Self> {
        let height = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || height == 0 {
            return Err(StixelError::param(
                "columns",
                "need at least one non-empty column",
            ));
        }
        if columns.iter().any(|c| c.len() != height) {
            return Err(StixelError::param(
                "columns",
                "all columns must have the same height",
            ));
        }
        Ok(ColumnImage {
            n_cols: columns.len(),
            height,
            data: columns.concat(),
        })
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn column(&self, c: usize) -> &[f32] {
        &self.data[c * self.height..(c + 1) * self.height]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Averages each band of `stixel_width` pixels per row over its valid
/// samples and stores the result transposed. Trailing `width % stixel_width`
/// pixels are dropped.
pub fn reduce_and_transpose(img: &DisparityImage, stixel_width: usize) -> Result<ColumnImage> {
    if stixel_width == 0 {
        return Err(StixelError::param("stixel_width", "must be at least 1"));
    }
    let n_cols = img.width / stixel_width;
    if n_cols == 0 {
        return Err(StixelError::NoColumns {
            width: img.width,
            stixel_width,
        });
    }
    let h = img.height;
    let mut data = vec![INVALID; n_cols * h];
    for row in 0..h {
        let v = h - 1 - row;
        for (c, band) in img.row(row).chunks_exact(stixel_width).enumerate() {
            let (sum, count) = band
                .iter()
                .filter_map(|&d| measurement(d))
                .fold((0.0f64, 0usize), |(s, n), d| (s + d, n + 1));
            if count > 0 {
                data[c * h + v] = (sum / count as f64) as f32;
            }
        }
    }
    Ok(ColumnImage {
        n_cols,
        height: h,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn averages_band() {
        let img = DisparityImage::new(5, 1, vec![2.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
        let cols = reduce_and_transpose(&img, 5).unwrap();
        assert_eq!(cols.n_cols(), 1);
        assert_eq!(cols.column(0), &[6.0]);
    }

    #[test]
    fn skips_invalid_samples() {
        let img = DisparityImage::new(5, 1, vec![INVALID, 4.0, 6.0, 8.0, 10.0]).unwrap();
        assert_eq!(reduce_and_transpose(&img, 5).unwrap().column(0), &[7.0]);
        let img = DisparityImage::filled(5, 1, INVALID).unwrap();
        assert!(reduce_and_transpose(&img, 5).unwrap().column(0)[0].is_nan());
    }

    #[test]
    fn drops_remainder() {
        let img = DisparityImage::new(7, 2, (0..14).map(|x| x as f32).collect()).unwrap();
        let cols = reduce_and_transpose(&img, 5).unwrap();
        assert_eq!(cols.n_cols(), 1);
        // model row 0 is the bottom image row
        assert_eq!(cols.column(0), &[9.0, 2.0]);
    }

    #[test]
    fn too_narrow() {
        let img = DisparityImage::filled(3, 2, 1.0).unwrap();
        assert!(matches!(
            reduce_and_transpose(&img, 5),
            Err(StixelError::NoColumns { .. })
        ));
    }

    #[test]
    fn masks_out_of_range() {
        let mut img = DisparityImage::new(4, 1, vec![-1.0, 0.0, 15.9, 16.0]).unwrap();
        assert_eq!(img.mask_out_of_range(16), 2);
        assert!(img.get(0, 0).is_nan() && img.get(3, 0).is_nan());
    }

    fn image_strategy() -> impl Strategy<Value = DisparityImage> {
        (1usize..12, 1usize..6).prop_flat_map(|(w, h)| {
            prop::collection::vec(prop_oneof![4 => 0.0f32..64.0, 1 => Just(INVALID)], w * h)
                .prop_map(move |data| DisparityImage::new(w, h, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn width_one_is_transpose(img in image_strategy()) {
            let cols = reduce_and_transpose(&img, 1).unwrap();
            for x in 0..img.width() {
                for v in 0..img.height() {
                    let a = cols.column(x)[v];
                    let b = img.at_model_row(x, v);
                    prop_assert!(a == b || (a.is_nan() && b.is_nan()));
                }
            }
        }

        #[test]
        fn reduced_value_within_band_range(img in image_strategy(), s in 1usize..4) {
            prop_assume!(img.width() >= s);
            let cols = reduce_and_transpose(&img, s).unwrap();
            prop_assert_eq!(cols.n_cols(), img.width() / s);
            for c in 0..cols.n_cols() {
                let col = cols.column(c);
                prop_assert_eq!(col.len(), img.height());
                for (v, &d) in col.iter().enumerate() {
                    let band: Vec<f32> = (c * s..c * s + s)
                        .map(|x| img.at_model_row(x, v))
                        .filter(|d| !d.is_nan())
                        .collect();
                    if band.is_empty() {
                        prop_assert!(d.is_nan());
                    } else {
                        let lo = band.iter().cloned().fold(f32::INFINITY, f32::min);
                        let hi = band.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
                        prop_assert!(d >= lo && d <= hi);
                    }
                }
            }
        }
    }
}
