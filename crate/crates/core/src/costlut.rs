//! Look-up tables that make the data cost of any stixel an O(1) query.
//!
//! The pair table holds the object pixel cost for every (mean, measurement)
//! level pair and depends only on the sensor model. The per-column tables are
//! prefix sums with a leading zero, so rows `vb..=vt` cost `t[vt + 1] - t[vb]`.

use std::io::{Read, Write};

use crate::error::{Result, StixelError};
use crate::model::{pixel_cost, round_disparity, SensorParams, StixelClass, StixelParams};
use crate::preprocess::measurement;

/// `d_range x d_range` object pixel costs: row `m` is the stixel mean level,
/// column `d` the rounded measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCostLut {
    d_range: usize,
    outlier_cost: f64,
    data: Vec<f64>,
}

impl PairCostLut {
    pub fn d_range(&self) -> usize {
        self.d_range
    }

    pub fn get(&self, mean: usize, measured: usize) -> f64 {
        self.data[mean * self.d_range + measured]
    }

    pub fn row(&self, mean: usize) -> &[f64] {
        &self.data[mean * self.d_range..(mean + 1) * self.d_range]
    }

    /// Cost charged for an invalid measurement.
    pub fn outlier_cost(&self) -> f64 {
        self.outlier_cost
    }

    /// Little-endian dump: `u32` rows, `u32` columns, then row-major `f64`s.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.d_range as u32;
        w.write_all(&dim.to_le_bytes())?;
        w.write_all(&dim.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a table written by [`PairCostLut::write_to`] and checks it against `sensor`.
    pub fn read_from<R: Read>(mut r: R, sensor: &SensorParams) -> Result<Self> {
        let mut dims = [0u8; 8];
        r.read_exact(&mut dims)
            .map_err(|_| StixelError::parse(0, "truncated pair table header"))?;
        let rows = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
        if rows != cols || rows != sensor.d_range {
            return Err(StixelError::parse(
                0,
                format!(
                    "pair table is {rows}x{cols}, expected {0}x{0}",
                    sensor.d_range
                ),
            ));
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut buf = [0u8; 8];
        for i in 0..rows * cols {
            r.read_exact(&mut buf)
                .map_err(|_| StixelError::parse(8 + 8 * i, "truncated pair table payload"))?;
            data.push(f64::from_le_bytes(buf));
        }
        Ok(PairCostLut {
            d_range: rows,
            outlier_cost: sensor.outlier_cost(),
            data,
        })
    }
}

/// Tabulates the object pixel cost for every integer mean and measurement.
pub fn build_pair_cost_lut(sensor: &SensorParams) -> PairCostLut {
    let n = sensor.d_range;
    let mut data = Vec::with_capacity(n * n);
    for m in 0..n {
        for d in 0..n {
            data.push(pixel_cost(
                Some(d as f64),
                m as f64,
                StixelClass::Object,
                sensor,
            ));
        }
    }
    PairCostLut {
        d_range: n,
        outlier_cost: sensor.outlier_cost(),
        data,
    }
}

/// Running sum with a leading zero: `out[k] = values[..k].sum()`.
pub fn prefix_sum(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for v in values {
        acc += v;
        out.push(acc);
    }
    out
}

/// Prefix-sum tables for one reduced column.
#[derive(Debug, Clone, Default)]
pub struct ColumnLuts {
    height: usize,
    d_range: usize,
    ground: Vec<f64>,
    sky: Vec<f64>,
    /// `d_range` rows of `height + 1` entries.
    object: Vec<f64>,
    disp_prefix: Vec<f64>,
    valid_prefix: Vec<u32>,
    levels: Vec<u16>,
}

impl ColumnLuts {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn d_range(&self) -> usize {
        self.d_range
    }

    pub fn ground_prefix(&self) -> &[f64] {
        &self.ground
    }

    pub fn sky_prefix(&self) -> &[f64] {
        &self.sky
    }

    pub fn object_prefix(&self, mean: usize) -> &[f64] {
        let stride = self.height + 1;
        &self.object[mean * stride..(mean + 1) * stride]
    }

    /// All object prefix rows, `height + 1` entries per mean level.
    pub fn object_table(&self) -> &[f64] {
        &self.object
    }

    pub fn disparity_prefix(&self) -> &[f64] {
        &self.disp_prefix
    }

    pub fn valid_count_prefix(&self) -> &[u32] {
        &self.valid_prefix
    }

    /// Mean of the valid disparities in rows `vb..=vt`, or 0 if there are none.
    #[inline]
    pub fn mean_disparity(&self, vb: usize, vt: usize) -> f64 {
        let n = self.valid_prefix[vt + 1] - self.valid_prefix[vb];
        if n == 0 {
            0.0
        } else {
            (self.disp_prefix[vt + 1] - self.disp_prefix[vb]) / n as f64
        }
    }

    /// Integer mean level used to index the object table.
    #[inline]
    pub fn mean_level(&self, vb: usize, vt: usize) -> usize {
        round_disparity(self.mean_disparity(vb, vt), self.d_range)
    }

    #[inline]
    pub fn ground_cost(&self, vb: usize, vt: usize) -> f64 {
        self.ground[vt + 1] - self.ground[vb]
    }

    #[inline]
    pub fn sky_cost(&self, vb: usize, vt: usize) -> f64 {
        self.sky[vt + 1] - self.sky[vb]
    }

    /// Object cost of rows `vb..=vt` against mean level `mean`.
    #[inline]
    pub fn object_cost(&self, mean: usize, vb: usize, vt: usize) -> f64 {
        let row = mean * (self.height + 1);
        self.object[row + vt + 1] - self.object[row + vb]
    }

    /// Data cost of a stixel; objects use their own rounded mean.
    pub fn stixel_data_cost(&self, class: StixelClass, vb: usize, vt: usize) -> f64 {
        match class {
            StixelClass::Ground => self.ground_cost(vb, vt),
            StixelClass::Sky => self.sky_cost(vb, vt),
            StixelClass::Object => self.object_cost(self.mean_level(vb, vt), vb, vt),
        }
    }
}

/// Builds the prefix tables of one column indexed by model row.
pub fn build_column_luts(column: &[f32], pair: &PairCostLut, params: &StixelParams) -> ColumnLuts {
    let mut luts = ColumnLuts::default();
    luts.rebuild(column, pair, params);
    luts
}

impl ColumnLuts {
    /// Refills the tables for `column`, reusing the allocations.
    pub fn rebuild(&mut self, column: &[f32], pair: &PairCostLut, params: &StixelParams) {
        let h = column.len();
        let n = pair.d_range;
        let sensor = &params.sensor;
        self.height = h;
        self.d_range = n;

        for v in [&mut self.ground, &mut self.sky, &mut self.disp_prefix] {
            v.clear();
            v.push(0.0);
        }
        self.valid_prefix.clear();
        self.valid_prefix.push(0);
        self.levels.clear();
        let (mut g, mut s, mut d_acc, mut cnt) = (0.0, 0.0, 0.0, 0u32);
        for (v, &raw) in column.iter().enumerate() {
            let d = measurement(raw);
            g += pixel_cost(
                d,
                params.ground.disparity(v as f64),
                StixelClass::Ground,
                sensor,
            );
            s += pixel_cost(d, 0.0, StixelClass::Sky, sensor);
            if let Some(d) = d {
                d_acc += d;
                cnt += 1;
            }
            self.ground.push(g);
            self.sky.push(s);
            self.disp_prefix.push(d_acc);
            self.valid_prefix.push(cnt);
            // invalid pixels index the extra outlier column of the pair table
            self.levels
                .push(d.map_or(n, |d| round_disparity(d, n)) as u16);
        }

        // four levels at a time keeps independent running sums in flight
        const LANES: usize = 4;
        let stride = h + 1;
        let w = n + 1;
        self.object.resize(n * stride, 0.0);
        let mut costs = vec![0.0; LANES * w];
        for (b, block) in self.object.chunks_mut(LANES * stride).enumerate() {
            let mut outs: Vec<&mut [f64]> = block.chunks_exact_mut(stride).collect();
            for (r, c) in costs.chunks_exact_mut(w).take(outs.len()).enumerate() {
                c[..n].copy_from_slice(pair.row(b * LANES + r));
                c[n] = pair.outlier_cost;
            }
            if let [o0, o1, o2, o3] = &mut outs[..] {
                let mut acc = [0.0; LANES];
                for (v, &level) in self.levels.iter().enumerate() {
                    let l = level as usize;
                    acc[0] += costs[l];
                    acc[1] += costs[w + l];
                    acc[2] += costs[2 * w + l];
                    acc[3] += costs[3 * w + l];
                    o0[v + 1] = acc[0];
                    o1[v + 1] = acc[1];
                    o2[v + 1] = acc[2];
                    o3[v + 1] = acc[3];
                }
                for o in [o0, o1, o2, o3] {
                    o[0] = 0.0;
                }
            } else {
                for (out, c) in outs.iter_mut().zip(costs.chunks_exact(w)) {
                    let mut acc = 0.0;
                    out[0] = 0.0;
                    for (slot, &level) in out[1..].iter_mut().zip(&self.levels) {
                        acc += c[level as usize];
                        *slot = acc;
                    }
                }
            }
        }
    }
}
