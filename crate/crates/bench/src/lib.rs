//! Inputs shared by the criterion benches.

use stixel_core::{DisparityImage, GroundModel, StixelParams};

/// Default parameters with the horizon at 70% of the height.
pub fn params(height: usize) -> StixelParams {
    StixelParams::new(GroundModel::new(0.4, 0.7 * height as f64))
}

/// A ground plane with one box every 40 pixels and a deterministic ripple
/// standing in for sensor noise.
pub fn scene(width: usize, height: usize) -> DisparityImage {
    let ground = params(height).ground;
    let base = 0.15 * height as f64;
    let mut img = DisparityImage::filled(width, height, 0.0).unwrap();
    for x in 0..width {
        let boxed = x % 40 < 15;
        for v in 0..height {
            let d = if boxed && (base..2.0 * base).contains(&(v as f64)) {
                ground.disparity(base)
            } else {
                ground.disparity(v as f64)
            };
            let ripple = 0.3 * ((x * 7 + v * 13) % 11) as f64 / 11.0;
            img.set(x, height - 1 - v, (d + ripple) as f32);
        }
    }
    img
}

/// Column `x` of `scene`, in model-row order.
pub fn column(img: &DisparityImage, x: usize) -> Vec<f32> {
    (0..img.height()).map(|v| img.at_model_row(x, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_has_boxes_on_ground() {
        let img = scene(80, 100);
        let col = column(&img, 5);
        assert_eq!(col.len(), 100);
        // rows 15..30 hold the box at the ground disparity of row 15
        assert!((col[20] - col[16]).abs() < 0.31);
        assert!(col[0] > col[50]);
        assert!(column(&img, 20)[20] < col[20]);
    }
}
