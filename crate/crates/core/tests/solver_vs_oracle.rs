mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stixel_core::oracle::{brute_force_column, score_segmentation, segmentation_count};
use stixel_core::solver::State;
use stixel_core::{
    backtrack, build_column_luts, build_pair_cost_lut, estimate_column, first_stixel_cost,
    solve_column, transition_cost, ColumnImage, PriorParams, StixelClass, StixelParams,
    StixelSummary,
};

use common::{random_column, random_params};

#[test]
fn dp_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..300 {
        let h = rng.random_range(1..=9);
        let d_range = rng.random_range(4..=16);
        let params = random_params(&mut rng, h, d_range);
        params.validate().unwrap();
        let col = random_column(&mut rng, h, d_range, 0.1);
        let pair = build_pair_cost_lut(&params.sensor);
        let dp = estimate_column(&col, 0, &pair, &params).unwrap();
        let oracle = brute_force_column(&col, &params).unwrap();
        assert_eq!(oracle.enumerated, segmentation_count(h));
        assert!(
            (dp.cost - oracle.cost).abs() < 1e-9,
            "case {case}: dp {} oracle {} col {col:?} params {params:?}",
            dp.cost,
            oracle.cost
        );
        let rescored = score_segmentation(&col, &dp.stixels, &params);
        assert!(
            (rescored - oracle.cost).abs() < 1e-6,
            "case {case}: rescored {rescored}"
        );
    }
}

#[test]
fn every_recorded_argmin_reproduces_its_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let h = rng.random_range(1..=30);
        let d_range = rng.random_range(4..=24);
        let params = random_params(&mut rng, h, d_range);
        let col = random_column(&mut rng, h, d_range, 0.1);
        let pair = build_pair_cost_lut(&params.sensor);
        let luts = build_column_luts(&col, &pair, &params);
        let (costs, index) = solve_column(&luts, &params);
        for k in 0..h {
            let mut states = vec![State::Ground, State::Sky];
            states.extend((0..d_range as u16).map(State::Object));
            assert!(StixelClass::ALL
                .iter()
                .any(|&c| costs.class_cost(c, k).is_finite()));
            for state in states {
                let c = costs.get(state, k);
                if !c.is_finite() {
                    continue;
                }
                let link = index.get(state, k).expect("finite state has a link");
                let j = link.start as usize;
                let class = state.class();
                let f = match state {
                    State::Object(f) => f as f64,
                    State::Ground => params.ground.disparity(j as f64),
                    State::Sky => 0.0,
                };
                if let State::Object(level) = state {
                    assert_eq!(luts.mean_level(j, k), level as usize);
                }
                let data = luts.stixel_data_cost(class, j, k);
                let upper = StixelSummary::new(class, j, k, f);
                let expected = match link.prev {
                    None => data + first_stixel_cost(&upper, &params.prior),
                    Some(prev) => {
                        let lstart = index.get(prev, j - 1).unwrap().start as usize;
                        let lf = match prev {
                            State::Object(f) => f as f64,
                            State::Ground => params.ground.disparity(lstart as f64),
                            State::Sky => 0.0,
                        };
                        let lower = StixelSummary::new(prev.class(), lstart, j - 1, lf);
                        data + (costs.get(prev, j - 1)
                            + transition_cost(&upper, &lower, &params.ground, &params.prior))
                    }
                };
                assert_eq!(c, expected, "state {state:?} row {k}");
            }
        }
    }
}

#[test]
fn segmentations_tile_the_column() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let h = rng.random_range(1..=60);
        let params = random_params(&mut rng, h, 32);
        let col = random_column(&mut rng, h, 32, 0.1);
        let pair = build_pair_cost_lut(&params.sensor);
        let out = estimate_column(&col, 4, &pair, &params).unwrap();
        assert_eq!(out.stixels.first().unwrap().vb, 0);
        assert_eq!(out.stixels.last().unwrap().vt, h - 1);
        assert!(out.stixels.windows(2).all(|w| w[1].vb == w[0].vt + 1));
        assert_eq!(out.stixels.iter().map(|s| s.height()).sum::<usize>(), h);
        // forbidden configurations never appear
        assert_ne!(out.stixels[0].class, StixelClass::Sky);
        for w in out.stixels.windows(2) {
            let pair = (w[1].class, w[0].class);
            assert!(!matches!(
                pair,
                (StixelClass::Ground, StixelClass::Sky)
                    | (StixelClass::Ground, StixelClass::Ground)
                    | (StixelClass::Sky, StixelClass::Sky)
                    | (StixelClass::Object, StixelClass::Sky)
            ));
        }
    }
}

#[test]
fn zero_prior_gives_pure_data_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let h = rng.random_range(1..=40);
        let mut params = random_params(&mut rng, h, 24);
        params.prior = PriorParams {
            c_bic: 0.0,
            c_gravity: 0.0,
            c_ordering: 0.0,
            c_diving: 0.0,
            ordering_margin: 0.0,
            first_stixel_costs: [0.0, 0.0, f64::INFINITY],
        };
        let col = random_column(&mut rng, h, 24, 0.1);
        let pair = build_pair_cost_lut(&params.sensor);
        let luts = build_column_luts(&col, &pair, &params);
        let out = estimate_column(&col, 0, &pair, &params).unwrap();
        let data: f64 = out
            .stixels
            .iter()
            .map(|s| luts.stixel_data_cost(s.class, s.vb, s.vt))
            .sum();
        assert!((out.cost - data).abs() < 1e-9);
    }
}

#[test]
fn larger_bic_never_adds_stixels() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut strictly_fewer = 0;
    for _ in 0..60 {
        let h = rng.random_range(5..=50);
        let base = random_params(&mut rng, h, 32);
        let col = random_column(&mut rng, h, 32, 0.05);
        let pair = build_pair_cost_lut(&base.sensor);
        let mut last = usize::MAX;
        for bic in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0] {
            let params = StixelParams {
                prior: PriorParams {
                    c_bic: bic,
                    ..base.prior
                },
                ..base.clone()
            };
            let n = estimate_column(&col, 0, &pair, &params)
                .unwrap()
                .stixels
                .len();
            assert!(
                n <= last,
                "stixel count grew from {last} to {n} at c_bic {bic}"
            );
            if n < last && last != usize::MAX {
                strictly_fewer += 1;
            }
            last = n;
        }
    }
    assert!(strictly_fewer > 0);
}

#[test]
fn costs_grow_with_prior_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let h = rng.random_range(2..=40);
        let base = random_params(&mut rng, h, 16);
        let col = random_column(&mut rng, h, 16, 0.1);
        let pair = build_pair_cost_lut(&base.sensor);
        let lo = solve_column(&build_column_luts(&col, &pair, &base), &base).0;
        let mut heavier = base.clone();
        heavier.prior.c_bic += 1.0;
        heavier.prior.c_ordering += 0.5;
        heavier.prior.c_gravity += 0.5;
        heavier.prior.c_diving += 0.5;
        let hi = solve_column(&build_column_luts(&col, &pair, &heavier), &heavier).0;
        for k in 0..h {
            for class in StixelClass::ALL {
                assert!(hi.class_cost(class, k) >= lo.class_cost(class, k) - 1e-12);
            }
        }
    }
}

#[test]
fn backtrack_recovers_optimal_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..100 {
        let h = rng.random_range(1..=10);
        let params = random_params(&mut rng, h, 16);
        let col = random_column(&mut rng, h, 16, 0.1);
        let pair = build_pair_cost_lut(&params.sensor);
        let luts = build_column_luts(&col, &pair, &params);
        let (costs, index) = solve_column(&luts, &params);
        let st = backtrack(&costs, &index, &params.ground, 0).unwrap();
        let rescored = score_segmentation(&col, &st, &params);
        assert!((rescored - costs.best(h - 1).0).abs() < 1e-9);
    }
}

#[test]
fn identical_columns_identical_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let params = random_params(&mut rng, 80, 32);
    let col = random_column(&mut rng, 80, 32, 0.1);
    let frame = ColumnImage::from_columns(&vec![col; 6]).unwrap();
    let pair = build_pair_cost_lut(&params.sensor);
    let out = stixel_core::solve_frame(&frame, &pair, &params).unwrap();
    for c in &out[1..] {
        assert_eq!(c.cost, out[0].cost);
        assert_eq!(c.stixels.len(), out[0].stixels.len());
        for (a, b) in c.stixels.iter().zip(&out[0].stixels) {
            assert_eq!(
                (a.vb, a.vt, a.class, a.disparity),
                (b.vb, b.vt, b.class, b.disparity)
            );
        }
    }
}
