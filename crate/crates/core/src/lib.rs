//! Multi-stixel segmentation of dense disparity maps.
//!
//! Each image band of `stixel_width` pixels is reduced to one column, and
//! every column is split into ground, object and sky stixels by minimizing a
//! data cost (Gaussian-plus-uniform sensor model) plus a world-model prior
//! with dynamic programming. Prefix-sum tables make every stixel's data cost
//! an O(1) lookup, so a column costs O(h^2).
//!
//! ```
//! use stixel_core::{
//!     build_pair_cost_lut, reduce_and_transpose, solve_frame, DisparityImage, GroundModel, StixelParams,
//! };
//!
//! let mut params = StixelParams::new(GroundModel::new(0.4, 30.0));
//! params.sensor.d_range = 32;
//! let img = DisparityImage::filled(10, 40, 0.0).unwrap();
//! let cols = reduce_and_transpose(&img, params.stixel_width).unwrap();
//! let pair = build_pair_cost_lut(&params.sensor);
//! let frame = solve_frame(&cols, &pair, &params).unwrap();
//! assert_eq!(frame.len(), 2);
//! ```

pub mod costlut;
pub mod error;
pub mod imageio;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod preprocess;
pub mod prior;
pub mod solver;

pub use costlut::{build_column_luts, build_pair_cost_lut, prefix_sum, ColumnLuts, PairCostLut};
pub use error::{Result, StixelError};
pub use imageio::{RecordSet, StixelRecord};
pub use metrics::{evaluate, EvalReport};
pub use model::{
    model_disparity, pixel_cost, GroundModel, NoiseModel, SensorParams, StixelClass, StixelParams,
};
pub use preprocess::{reduce_and_transpose, ColumnImage, DisparityImage, INVALID};
pub use prior::{first_stixel_cost, transition_cost, PriorParams, StixelSummary};
pub use solver::{
    backtrack, estimate_column, estimate_column_with, solve_column, solve_frame,
    solve_frame_parallel, ColumnWorkspace, CostTable, IndexTable, Stixel, StixelColumn,
};
