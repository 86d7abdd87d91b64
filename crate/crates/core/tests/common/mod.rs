#![allow(dead_code)]

use rand::Rng;
use stixel_core::{GroundModel, NoiseModel, PriorParams, SensorParams, StixelParams, INVALID};

/// Random column of quarter-pixel disparities with some invalid samples.
pub fn random_column<R: Rng>(rng: &mut R, h: usize, d_range: usize, invalid: f64) -> Vec<f32> {
    (0..h)
        .map(|_| {
            if rng.random_bool(invalid) {
                INVALID
            } else {
                rng.random_range(0..(d_range * 4) as u32) as f32 * 0.25
            }
        })
        .collect()
}

fn weight<R: Rng>(rng: &mut R) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => f64::INFINITY,
        _ => rng.random_range(0.0..4.0),
    }
}

/// Random but valid parameters for small columns.
pub fn random_params<R: Rng>(rng: &mut R, h: usize, d_range: usize) -> StixelParams {
    let first_ground = if rng.random_bool(0.2) {
        f64::INFINITY
    } else {
        rng.random_range(0.0..3.0)
    };
    let first_object = if first_ground.is_infinite() {
        rng.random_range(0.0..3.0)
    } else {
        weight(rng)
    };
    StixelParams {
        ground: GroundModel::new(
            rng.random_range(0.2..2.0),
            rng.random_range(0.0..h as f64 * 1.5),
        ),
        sensor: SensorParams {
            p_out: rng.random_range(0.05..0.5),
            d_range,
            a_norm: rng.random_range(0.5..2.0),
            noise: NoiseModel {
                base: [
                    rng.random_range(0.3..2.0),
                    rng.random_range(0.3..2.0),
                    rng.random_range(0.3..2.0),
                ],
                slope: [rng.random_range(0.0..0.1), rng.random_range(0.0..0.1), 0.0],
            },
        },
        prior: PriorParams {
            c_bic: if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..5.0)
            },
            c_gravity: weight(rng),
            c_ordering: weight(rng),
            c_diving: weight(rng),
            ordering_margin: if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..3.0)
            },
            first_stixel_costs: [first_ground, first_object, f64::INFINITY],
        },
        stixel_width: 1,
    }
}
