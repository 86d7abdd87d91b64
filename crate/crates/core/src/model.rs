//! Stixel classes, their disparity models and the per-pixel sensor cost.
//!
//! Rows are indexed in model space: `v = 0` is the bottom image row and `v`
//! grows upward. All costs are negative log-likelihoods in natural-log units.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, StixelError};
use crate::prior::PriorParams;

/// Semantic label of a stixel. The derived order (Ground < Object < Sky) is
/// the tie-breaking order used by every argmin in the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StixelClass {
    Ground,
    Object,
    Sky,
}

impl StixelClass {
    pub const ALL: [StixelClass; 3] = [StixelClass::Ground, StixelClass::Object, StixelClass::Sky];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            StixelClass::Ground => "ground",
            StixelClass::Object => "object",
            StixelClass::Sky => "sky",
        }
    }
}

impl fmt::Display for StixelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StixelClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ground" => Ok(StixelClass::Ground),
            "object" => Ok(StixelClass::Object),
            "sky" => Ok(StixelClass::Sky),
            other => Err(format!("unknown stixel class `{other}`")),
        }
    }
}

/// Planar ground: disparity decreases linearly with the row up to the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundModel {
    /// Disparity change per image row.
    pub alpha: f64,
    /// Model row at which the ground disparity reaches zero. May lie outside the image.
    pub v_horizon: f64,
}

impl GroundModel {
    pub fn new(alpha: f64, v_horizon: f64) -> Self {
        GroundModel { alpha, v_horizon }
    }

    /// Ground disparity at row `v`, clamped at zero above the horizon.
    pub fn disparity(&self, v: f64) -> f64 {
        (self.alpha * (self.v_horizon - v)).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(StixelError::param(
                "alpha",
                format!("must be positive and finite, got {}", self.alpha),
            ));
        }
        if !self.v_horizon.is_finite() {
            return Err(StixelError::param("v_horizon", "must be finite"));
        }
        Ok(())
    }
}

/// Per-class disparity noise, `sigma(f) = base + slope * f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub base: [f64; 3],
    pub slope: [f64; 3],
}

impl NoiseModel {
    pub fn constant(sigma: f64) -> Self {
        NoiseModel {
            base: [sigma; 3],
            slope: [0.0; 3],
        }
    }

    pub fn sigma(&self, class: StixelClass, f: f64) -> f64 {
        let i = class.index();
        self.base[i] + self.slope[i] * f
    }

    fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if !(self.base[i] > 0.0 && self.base[i].is_finite()) {
                return Err(StixelError::param(
                    "sigma",
                    format!("base sigma must be positive, got {}", self.base[i]),
                ));
            }
            // sigma is linear in f, so non-negative slopes keep it positive on [0, d_range)
            if !(self.slope[i] >= 0.0 && self.slope[i].is_finite()) {
                return Err(StixelError::param(
                    "sigma_slope",
                    format!("must be non-negative, got {}", self.slope[i]),
                ));
            }
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::constant(1.0)
    }
}

/// Gaussian-plus-uniform sensor model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorParams {
    pub p_out: f64,
    pub d_range: usize,
    pub a_norm: f64,
    pub noise: NoiseModel,
}

impl SensorParams {
    /// Cost of a measurement explained by the uniform outlier component.
    pub fn outlier_cost(&self) -> f64 {
        (self.d_range as f64).ln() - self.p_out.ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_out > 0.0 && self.p_out < 1.0) {
            return Err(StixelError::param(
                "p_out",
                format!("must lie in (0, 1), got {}", self.p_out),
            ));
        }
        if self.d_range < 2 || self.d_range > u16::MAX as usize {
            return Err(StixelError::param(
                "d_range",
                format!("must lie in [2, 65535], got {}", self.d_range),
            ));
        }
        if !(self.a_norm > 0.0 && self.a_norm.is_finite()) {
            return Err(StixelError::param(
                "a_norm",
                format!("must be positive, got {}", self.a_norm),
            ));
        }
        self.noise.validate()
    }
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams {
            p_out: 0.15,
            d_range: 128,
            a_norm: 1.0,
            noise: NoiseModel::default(),
        }
    }
}

/// Everything the estimator needs besides the image itself.
#[derive(Debug, Clone, PartialEq)]
pub struct StixelParams {
    pub ground: GroundModel,
    pub sensor: SensorParams,
    pub prior: PriorParams,
    /// Width in pixels of the image band reduced into one column.
    pub stixel_width: usize,
}

impl StixelParams {
    pub fn new(ground: GroundModel) -> Self {
        StixelParams {
            ground,
            sensor: SensorParams::default(),
            prior: PriorParams::default(),
            stixel_width: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stixel_width == 0 {
            return Err(StixelError::param("stixel_width", "must be at least 1"));
        }
        self.ground.validate()?;
        self.sensor.validate()?;
        self.prior.validate()
    }
}

/// Theoretical disparity of `class` at row `v`. `object_disparity` is the
/// stixel's mean disparity and is only read for objects.
pub fn model_disparity(
    class: StixelClass,
    ground: &GroundModel,
    v: f64,
    object_disparity: f64,
) -> f64 {
    match class {
        StixelClass::Ground => ground.disparity(v),
        StixelClass::Object => object_disparity,
        StixelClass::Sky => 0.0,
    }
}

/// Negative log-likelihood of measurement `measured` under a stixel of
/// `class` whose model predicts `model`. `None` is an invalid measurement and
/// always costs the outlier cap.
pub fn pixel_cost(
    measured: Option<f64>,
    model: f64,
    class: StixelClass,
    sensor: &SensorParams,
) -> f64 {
    let cap = sensor.outlier_cost();
    let Some(d) = measured else {
        return cap;
    };
    let sigma = sensor.noise.sigma(class, model);
    let diff = d - model;
    let gaussian = sensor.a_norm.ln() + (sigma * (2.0 * PI).sqrt()).ln()
        - (1.0 - sensor.p_out).ln()
        + diff * diff / (2.0 * sigma * sigma);
    cap.min(gaussian)
}

/// Round half up to an integer disparity level in `[0, d_range - 1]`.
#[inline]
pub fn round_disparity(d: f64, d_range: usize) -> usize {
    // max/min also map NaN to 0, and truncating a non-negative value floors it
    let x = (d + 0.5).max(0.0).min((d_range - 1) as f64);
    x as u32 as usize
}
