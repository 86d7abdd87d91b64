//! Flat `key = value` run configuration.
//!
//! Values are layered: built-in defaults, then an optional config file, then
//! command-line flags named exactly like the keys. Unknown keys are errors.

use std::fs;
use std::path::Path;

use stixel_core::{GroundModel, StixelParams};

use crate::error::CliError;

macro_rules! config_keys {
    ($($(#[doc = $doc:literal])* $key:ident),* $(,)?) => {
        /// Every key accepted in a config file.
        pub const CONFIG_KEYS: &[&str] = &[$(stringify!($key)),*];

        /// Command-line overrides, one flag per config key.
        #[derive(Debug, Default, Clone, clap::Args)]
        pub struct ParamFlags {
            $(
                $(#[doc = $doc])*
                #[arg(long = stringify!($key), value_name = "VALUE")]
                pub $key: Option<String>,
            )*
        }

        impl ParamFlags {
            pub fn overrides(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$key {
                        out.push((stringify!($key), v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

config_keys! {
    /// Pixels per stixel column [default: 5]
    stixel_width,
    /// Number of disparity levels [default: 128]
    d_range,
    /// Outlier probability of the sensor model [default: 0.15]
    p_out,
    /// Gaussian normalization constant [default: 1]
    a_norm,
    /// Disparity noise of ground pixels [default: 1]
    sigma_ground,
    /// Disparity noise of object pixels [default: 1]
    sigma_object,
    /// Disparity noise of sky pixels [default: 1]
    sigma_sky,
    /// Noise growth per disparity level for ground [default: 0]
    sigma_slope_ground,
    /// Noise growth per disparity level for objects [default: 0]
    sigma_slope_object,
    /// Noise growth per disparity level for sky [default: 0]
    sigma_slope_sky,
    /// Ground disparity change per row [default: 0.4]
    alpha,
    /// Horizon row counted from the image bottom [default: half the image height]
    v_horizon,
    /// Cost per stixel [default: 4]
    c_bic,
    /// Weight of the gravity penalty (inf = forbidden) [default: 1]
    c_gravity,
    /// Weight of the ordering penalty (inf = forbidden) [default: 1]
    c_ordering,
    /// Weight of the diving penalty (inf = forbidden) [default: 1]
    c_diving,
    /// Disparity slack before ordering, gravity and diving apply [default: 1]
    ordering_margin,
    /// Unary cost of a ground stixel at the column base [default: 0]
    first_cost_ground,
    /// Unary cost of an object stixel at the column base [default: 2]
    first_cost_object,
    /// Raw sample units per disparity level [default: 256]
    disparity_scale,
    /// Raw sample value marking an invalid disparity [default: 65535]
    invalid_value,
    /// Worker threads for column-parallel solving [default: 1]
    threads,
    /// Timed repetitions in `bench` [default: 10]
    repeat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Ground `v_horizon` is a placeholder until [`RunConfig::params_for_height`] resolves it.
    pub params: StixelParams,
    pub v_horizon: Option<f64>,
    pub disparity_scale: f64,
    pub invalid_value: f64,
    pub threads: usize,
    pub repeat: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: StixelParams::new(GroundModel::new(0.4, 0.0)),
            v_horizon: None,
            disparity_scale: 256.0,
            invalid_value: 65535.0,
            threads: 1,
            repeat: 10,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let p = &mut self.params;
        match key {
            "stixel_width" => p.stixel_width = num(key, value)?,
            "d_range" => p.sensor.d_range = num(key, value)?,
            "p_out" => p.sensor.p_out = num(key, value)?,
            "a_norm" => p.sensor.a_norm = num(key, value)?,
            "sigma_ground" => p.sensor.noise.base[0] = num(key, value)?,
            "sigma_object" => p.sensor.noise.base[1] = num(key, value)?,
            "sigma_sky" => p.sensor.noise.base[2] = num(key, value)?,
            "sigma_slope_ground" => p.sensor.noise.slope[0] = num(key, value)?,
            "sigma_slope_object" => p.sensor.noise.slope[1] = num(key, value)?,
            "sigma_slope_sky" => p.sensor.noise.slope[2] = num(key, value)?,
            "alpha" => p.ground.alpha = num(key, value)?,
            "v_horizon" => self.v_horizon = Some(num(key, value)?),
            "c_bic" => p.prior.c_bic = num(key, value)?,
            "c_gravity" => p.prior.c_gravity = num(key, value)?,
            "c_ordering" => p.prior.c_ordering = num(key, value)?,
            "c_diving" => p.prior.c_diving = num(key, value)?,
            "ordering_margin" => p.prior.ordering_margin = num(key, value)?,
            "first_cost_ground" => p.prior.first_stixel_costs[0] = num(key, value)?,
            "first_cost_object" => p.prior.first_stixel_costs[1] = num(key, value)?,
            "disparity_scale" => self.disparity_scale = num(key, value)?,
            "invalid_value" => self.invalid_value = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "repeat" => self.repeat = num(key, value)?,
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply_flags(&mut self, flags: &ParamFlags) -> Result<(), CliError> {
        for (key, value) in flags.overrides() {
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Defaults, then `file`, then `flags`.
    pub fn load(file: Option<&Path>, flags: &ParamFlags) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.threads == 0 {
            return Err(CliError::Config("`threads` must be at least 1".into()));
        }
        if !(self.disparity_scale > 0.0 && self.disparity_scale.is_finite()) {
            return Err(CliError::Config(
                "`disparity_scale` must be positive".into(),
            ));
        }
        let mut p = self.params.clone();
        p.ground.v_horizon = self.v_horizon.unwrap_or(0.0);
        p.validate().map_err(|e| CliError::Config(e.to_string()))
    }

    /// Parameters for an image of `height` rows.
    pub fn params_for_height(&self, height: usize) -> StixelParams {
        let mut p = self.params.clone();
        p.ground.v_horizon = self.v_horizon.unwrap_or(height as f64 / 2.0);
        p
    }

    /// Serializes every key so the output can be read back as a config file.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let n = &p.sensor.noise;
        let mut lines = vec![
            format!("stixel_width = {}", p.stixel_width),
            format!("d_range = {}", p.sensor.d_range),
            format!("p_out = {}", p.sensor.p_out),
            format!("a_norm = {}", p.sensor.a_norm),
            format!("sigma_ground = {}", n.base[0]),
            format!("sigma_object = {}", n.base[1]),
            format!("sigma_sky = {}", n.base[2]),
            format!("sigma_slope_ground = {}", n.slope[0]),
            format!("sigma_slope_object = {}", n.slope[1]),
            format!("sigma_slope_sky = {}", n.slope[2]),
            format!("alpha = {}", p.ground.alpha),
        ];
        if let Some(v) = self.v_horizon {
            lines.push(format!("v_horizon = {v}"));
        }
        lines.extend([
            format!("c_bic = {}", p.prior.c_bic),
            format!("c_gravity = {}", p.prior.c_gravity),
            format!("c_ordering = {}", p.prior.c_ordering),
            format!("c_diving = {}", p.prior.c_diving),
            format!("ordering_margin = {}", p.prior.ordering_margin),
            format!("first_cost_ground = {}", p.prior.first_stixel_costs[0]),
            format!("first_cost_object = {}", p.prior.first_stixel_costs[1]),
            format!("disparity_scale = {}", self.disparity_scale),
            format!("invalid_value = {}", self.invalid_value),
            format!("threads = {}", self.threads),
            format!("repeat = {}", self.repeat),
        ]);
        lines.join("\n") + "\n"
    }
}
