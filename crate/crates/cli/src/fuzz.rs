//! Randomized comparison of the DP solver against exhaustive search.

use rand::Rng;
use stixel_core::oracle::{brute_force_column, score_segmentation};
use stixel_core::{build_pair_cost_lut, estimate_column, GroundModel, StixelParams, INVALID};

use crate::error::CliError;

/// Quarter-level disparities in `[0, d_range)`, `invalid_frac` of them invalid.
pub fn random_column<R: Rng>(rng: &mut R, h: usize, d_range: usize, invalid_frac: f64) -> Vec<f32> {
    (0..h)
        .map(|_| {
            if rng.random_bool(invalid_frac) {
                INVALID
            } else {
                rng.random_range(0..(d_range * 4) as u32) as f32 / 4.0
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

/// Random model and prior parameters for columns of height `h`, including
/// zero and infinite weights.
pub fn random_params<R: Rng>(rng: &mut R, h: usize, d_range: usize) -> StixelParams {
    let ground = GroundModel::new(
        rng.random_range(0.05..1.5),
        rng.random_range(0.0..h as f64 * 1.5),
    );
    let mut p = StixelParams::new(ground);
    p.stixel_width = 1;
    p.sensor.d_range = d_range;
    p.sensor.p_out = rng.random_range(0.01..0.5);
    p.sensor.a_norm = rng.random_range(0.5..2.0);
    for c in 0..3 {
        p.sensor.noise.base[c] = rng.random_range(0.3..3.0);
        p.sensor.noise.slope[c] = if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..0.2)
        };
    }
    p.prior.c_bic = rng.random_range(0.0..8.0);
    p.prior.c_ordering = weight(rng);
    p.prior.c_gravity = weight(rng);
    p.prior.c_diving = weight(rng);
    p.prior.ordering_margin = rng.random_range(0.0..3.0);
    p.prior.first_stixel_costs[0] = weight(rng);
    p.prior.first_stixel_costs[1] = if p.prior.first_stixel_costs[0].is_infinite() {
        rng.random_range(0.0..4.0)
    } else {
        weight(rng)
    };
    p
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FuzzReport {
    pub cases: usize,
    pub max_cost_diff: f64,
    pub max_rescore_diff: f64,
    pub failures: Vec<String>,
}

fn diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// Solves each random column with the DP and with exhaustive search.
/// A case fails when the optimal costs differ by more than `cost_tol` or the
/// DP segmentation rescored from scratch misses its reported cost by more
/// than `rescore_tol`.
pub fn run_fuzz<R: Rng>(
    rng: &mut R,
    cases: usize,
    heights: std::ops::RangeInclusive<usize>,
    d_ranges: std::ops::RangeInclusive<usize>,
    invalid_frac: f64,
    cost_tol: f64,
    rescore_tol: f64,
) -> Result<FuzzReport, CliError> {
    let mut report = FuzzReport::default();
    for case in 0..cases {
        let h = rng.random_range(heights.clone());
        let d_range = rng.random_range(d_ranges.clone());
        let params = random_params(rng, h, d_range);
        let col = random_column(rng, h, d_range, invalid_frac);
        let pair = build_pair_cost_lut(&params.sensor);
        let dp = estimate_column(&col, 0, &pair, &params)?;
        let oracle = brute_force_column(&col, &params)?;
        let rescored = score_segmentation(&col, &dp.stixels, &params);
        let dc = diff(dp.cost, oracle.cost);
        let dr = diff(rescored, dp.cost);
        report.cases += 1;
        report.max_cost_diff = report.max_cost_diff.max(dc);
        report.max_rescore_diff = report.max_rescore_diff.max(dr);
        if !(dc <= cost_tol && dr <= rescore_tol) {
            report.failures.push(format!(
                "case {case}: h={h} d_range={d_range} dp={} oracle={} rescored={rescored}",
                dp.cost, oracle.cost
            ));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_fuzz_run_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = run_fuzz(&mut rng, 40, 1..=7, 4..=10, 0.1, 1e-9, 1e-6).unwrap();
        assert_eq!(r.cases, 40);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
    }

    #[test]
    fn random_params_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let h = rng.random_range(1..12);
            random_params(&mut rng, h, 8).validate().unwrap();
        }
    }
}
