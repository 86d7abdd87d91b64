//! Exhaustive reference solver for small columns.
//!
//! Enumerates every composition of the column into stixels and every class
//! assignment, scoring each with per-pixel sums of [`pixel_cost`] and the
//! prior functions. No prefix sums or look-up tables are involved.

use crate::error::{Result, StixelError};
use crate::model::{pixel_cost, round_disparity, StixelClass, StixelParams};
use crate::preprocess::measurement;
use crate::prior::{first_stixel_cost, transition_cost, StixelSummary};
use crate::solver::Stixel;

/// Largest column height the enumerator accepts.
pub const MAX_ORACLE_HEIGHT: usize = 12;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub cost: f64,
    pub stixels: Vec<Stixel>,
    pub enumerated: u64,
}

/// Number of labeled segmentations of a column of height `h`:
/// `sum_{N=1..h} C(h-1, N-1) * 3^N`.
pub fn segmentation_count(h: usize) -> u64 {
    if h == 0 {
        return 0;
    }
    let mut binom = 1u64;
    let mut pow3 = 3u64;
    let mut total = 0u64;
    for n in 1..=h as u64 {
        total += binom * pow3;
        binom = binom * (h as u64 - n) / n;
        pow3 *= 3;
    }
    total
}

/// Mean level of rows `vb..=vt` by direct summation.
pub fn direct_mean_level(column: &[f32], vb: usize, vt: usize, d_range: usize) -> usize {
    let (sum, n) = column[vb..=vt]
        .iter()
        .filter_map(|&d| measurement(d))
        .fold((0.0f64, 0usize), |(s, n), d| (s + d, n + 1));
    let mean = if n == 0 { 0.0 } else { sum / n as f64 };
    round_disparity(mean, d_range)
}

/// Data cost of a stixel by summing pixel costs; objects are scored against
/// their rounded mean with rounded measurements, like the tabulated path.
pub fn direct_data_cost(
    column: &[f32],
    class: StixelClass,
    vb: usize,
    vt: usize,
    params: &StixelParams,
) -> (f64, f64) {
    let sensor = &params.sensor;
    match class {
        StixelClass::Object => {
            let f = direct_mean_level(column, vb, vt, sensor.d_range);
            let cost = (vb..=vt)
                .map(|v| {
                    let d =
                        measurement(column[v]).map(|d| round_disparity(d, sensor.d_range) as f64);
                    pixel_cost(d, f as f64, class, sensor)
                })
                .sum();
            (cost, f as f64)
        }
        StixelClass::Ground => {
            let cost = (vb..=vt)
                .map(|v| {
                    pixel_cost(
                        measurement(column[v]),
                        params.ground.disparity(v as f64),
                        class,
                        sensor,
                    )
                })
                .sum();
            (cost, params.ground.disparity(vb as f64))
        }
        StixelClass::Sky => {
            let cost = (vb..=vt)
                .map(|v| pixel_cost(measurement(column[v]), 0.0, class, sensor))
                .sum();
            (cost, 0.0)
        }
    }
}

/// Total cost of a segmentation scored from scratch by direct summation.
pub fn score_segmentation(column: &[f32], stixels: &[Stixel], params: &StixelParams) -> f64 {
    let mut total = 0.0;
    let mut below: Option<StixelSummary> = None;
    for s in stixels {
        let (data, f) = direct_data_cost(column, s.class, s.vb, s.vt, params);
        let summary = StixelSummary::new(s.class, s.vb, s.vt, f);
        let prior = match &below {
            None => first_stixel_cost(&summary, &params.prior),
            Some(lower) => transition_cost(&summary, lower, &params.ground, &params.prior),
        };
        total += data + prior;
        below = Some(summary);
    }
    total
}

struct Search<'a> {
    column: &'a [f32],
    params: &'a StixelParams,
    /// data cost and representative disparity per (class, vb, vt)
    data: Vec<(f64, f64)>,
    path: Vec<Stixel>,
    best: Option<(f64, Vec<Stixel>)>,
    enumerated: u64,
}

impl Search<'_> {
    fn data(&self, class: StixelClass, vb: usize, vt: usize) -> (f64, f64) {
        let h = self.column.len();
        self.data[(class.index() * h + vb) * h + vt]
    }

    fn extend(&mut self, vb: usize, acc: f64) {
        let h = self.column.len();
        if vb == h {
            self.enumerated += 1;
            if self.best.as_ref().is_none_or(|(c, _)| acc < *c) {
                self.best = Some((acc, self.path.clone()));
            }
            return;
        }
        for vt in vb..h {
            for class in StixelClass::ALL {
                let (data, f) = self.data(class, vb, vt);
                let summary = StixelSummary::new(class, vb, vt, f);
                let prior = match self.path.last() {
                    None => first_stixel_cost(&summary, &self.params.prior),
                    Some(lower) => transition_cost(
                        &summary,
                        &lower.summary(),
                        &self.params.ground,
                        &self.params.prior,
                    ),
                };
                let cost = data + prior;
                self.path.push(Stixel {
                    column: 0,
                    vb,
                    vt,
                    class,
                    disparity: f,
                    cost,
                });
                self.extend(vt + 1, acc + cost);
                self.path.pop();
            }
        }
    }
}

/// Minimum-cost segmentation of `column` by exhaustive enumeration.
pub fn brute_force_column(column: &[f32], params: &StixelParams) -> Result<OracleResult> {
    let h = column.len();
    if h > MAX_ORACLE_HEIGHT {
        return Err(StixelError::OracleTooLarge {
            height: h,
            limit: MAX_ORACLE_HEIGHT,
        });
    }
    if h == 0 {
        return Err(StixelError::param("column", "must not be empty"));
    }
    let mut data = vec![(0.0, 0.0); 3 * h * h];
    for class in StixelClass::ALL {
        for vb in 0..h {
            for vt in vb..h {
                data[(class.index() * h + vb) * h + vt] =
                    direct_data_cost(column, class, vb, vt, params);
            }
        }
    }
    let mut search = Search {
        column,
        params,
        data,
        path: Vec::with_capacity(h),
        best: None,
        enumerated: 0,
    };
    search.extend(0, 0.0);
    let (cost, stixels) = search
        .best
        .expect("at least one segmentation is enumerated");
    Ok(OracleResult {
        cost,
        stixels,
        enumerated: search.enumerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GroundModel;

    fn params() -> StixelParams {
        let mut p = StixelParams::new(GroundModel::new(0.5, 8.0));
        p.sensor.d_range = 16;
        p
    }

    #[test]
    fn counts() {
        assert_eq!(segmentation_count(1), 3);
        assert_eq!(segmentation_count(2), 12);
        // 3 * 4^(h-1)
        for h in 1..=12 {
            assert_eq!(segmentation_count(h), 3 * 4u64.pow(h as u32 - 1));
        }
    }

    #[test]
    fn enumerates_every_candidate() {
        let p = params();
        for h in 1..=6 {
            let col: Vec<f32> = (0..h).map(|v| v as f32).collect();
            let r = brute_force_column(&col, &p).unwrap();
            assert_eq!(r.enumerated, segmentation_count(h));
            assert!((score_segmentation(&col, &r.stixels, &p) - r.cost).abs() < 1e-12);
        }
    }

    #[test]
    fn refuses_tall_columns() {
        let col = vec![1.0; MAX_ORACLE_HEIGHT + 1];
        assert!(matches!(
            brute_force_column(&col, &params()),
            Err(StixelError::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn single_row_picks_cheapest_class() {
        let p = params();
        let col = [3.0];
        let r = brute_force_column(&col, &p).unwrap();
        let expected = StixelClass::ALL
            .iter()
            .map(|&c| {
                let (d, f) = direct_data_cost(&col, c, 0, 0, &p);
                d + first_stixel_cost(&StixelSummary::new(c, 0, 0, f), &p.prior)
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.cost, expected);
    }
}
