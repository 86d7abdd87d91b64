//! Column-wise dynamic program and backtracking.
//!
//! `C[Ground][k]` and `C[Sky][k]` hold the cheapest segmentation of rows
//! `0..=k` whose top stixel has that class. Object states are additionally
//! keyed by the rounded mean disparity of the top stixel, because the
//! ordering prior between two stacked objects depends on the lower one's
//! disparity. Keeping one state per level makes the recurrence exact; the
//! best object predecessor for every upper level is found with an O(d_range)
//! sweep per row, so a column costs O(h^2 + h * d_range).
//!
//! Every argmin uses strict less-than over candidates enumerated by split row
//! ascending, then predecessor class Ground, Object, Sky, then predecessor
//! level ascending; the first minimal candidate wins.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::costlut::{ColumnLuts, PairCostLut};
use crate::error::{Result, StixelError};
use crate::model::round_disparity;
use crate::model::{GroundModel, StixelClass, StixelParams};
use crate::preprocess::ColumnImage;
use crate::prior::{
    first_stixel_cost, ground_contact_penalty, ordering_penalty, transition_cost, StixelSummary,
};

const UNSET: u32 = u32::MAX;

/// A DP state: the class of the top stixel, plus its mean level for objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Ground,
    Object(u16),
    Sky,
}

impl State {
    pub fn class(self) -> StixelClass {
        match self {
            State::Ground => StixelClass::Ground,
            State::Object(_) => StixelClass::Object,
            State::Sky => StixelClass::Sky,
        }
    }
}

/// Back-pointer of a state: the top stixel spans `start..=k`, and `prev` is
/// the state at row `start - 1` (`None` when `start == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub start: u32,
    pub prev: Option<State>,
}

impl Link {
    const EMPTY: Link = Link {
        start: UNSET,
        prev: None,
    };
}

/// Minimum aggregated costs per row and state.
#[derive(Debug, Clone, Default)]
pub struct CostTable {
    height: usize,
    d_range: usize,
    ground: Vec<f64>,
    sky: Vec<f64>,
    object: Vec<f64>,
}

impl CostTable {
    pub fn new(height: usize, d_range: usize) -> Self {
        CostTable {
            height,
            d_range,
            ground: vec![f64::INFINITY; height],
            sky: vec![f64::INFINITY; height],
            object: vec![f64::INFINITY; height * d_range],
        }
    }

    fn reset(&mut self, height: usize, d_range: usize) {
        self.height = height;
        self.d_range = d_range;
        for (v, len) in [
            (&mut self.ground, height),
            (&mut self.sky, height),
            (&mut self.object, height * d_range),
        ] {
            v.clear();
            v.resize(len, f64::INFINITY);
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn d_range(&self) -> usize {
        self.d_range
    }

    pub fn get(&self, state: State, k: usize) -> f64 {
        match state {
            State::Ground => self.ground[k],
            State::Sky => self.sky[k],
            State::Object(f) => self.object[k * self.d_range + f as usize],
        }
    }

    pub fn set(&mut self, state: State, k: usize, cost: f64) {
        match state {
            State::Ground => self.ground[k] = cost,
            State::Sky => self.sky[k] = cost,
            State::Object(f) => self.object[k * self.d_range + f as usize] = cost,
        }
    }

    /// Object costs at row `k`, one per mean level.
    pub fn object_row(&self, k: usize) -> &[f64] {
        &self.object[k * self.d_range..(k + 1) * self.d_range]
    }

    /// Cheapest object state at row `k` (lowest level on ties).
    pub fn best_object(&self, k: usize) -> (f64, State) {
        let mut best = (f64::INFINITY, State::Object(0));
        for (f, &c) in self.object_row(k).iter().enumerate() {
            if c < best.0 {
                best = (c, State::Object(f as u16));
            }
        }
        best
    }

    /// `min(GR^k, OB^k, SK^k)` and the state attaining it.
    pub fn best(&self, k: usize) -> (f64, State) {
        let mut best = (self.ground[k], State::Ground);
        let obj = self.best_object(k);
        if obj.0 < best.0 {
            best = obj;
        }
        if self.sky[k] < best.0 {
            best = (self.sky[k], State::Sky);
        }
        best
    }

    /// Per-class minimum at row `k`.
    pub fn class_cost(&self, class: StixelClass, k: usize) -> f64 {
        match class {
            StixelClass::Ground => self.ground[k],
            StixelClass::Sky => self.sky[k],
            StixelClass::Object => self.best_object(k).0,
        }
    }
}

/// Back-pointers matching a [`CostTable`].
#[derive(Debug, Clone, Default)]
pub struct IndexTable {
    height: usize,
    d_range: usize,
    ground: Vec<Link>,
    sky: Vec<Link>,
    object: Vec<Link>,
}

impl IndexTable {
    pub fn new(height: usize, d_range: usize) -> Self {
        IndexTable {
            height,
            d_range,
            ground: vec![Link::EMPTY; height],
            sky: vec![Link::EMPTY; height],
            object: vec![Link::EMPTY; height * d_range],
        }
    }

    /// Stale object links are kept: they are only read behind a finite cost,
    /// and every finite cost is written together with its link.
    fn reset(&mut self, height: usize, d_range: usize) {
        self.height = height;
        self.d_range = d_range;
        for v in [&mut self.ground, &mut self.sky] {
            v.clear();
            v.resize(height, Link::EMPTY);
        }
        self.object.resize(height * d_range, Link::EMPTY);
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, state: State, k: usize) -> Option<Link> {
        let link = match state {
            State::Ground => self.ground[k],
            State::Sky => self.sky[k],
            State::Object(f) => self.object[k * self.d_range + f as usize],
        };
        (link.start != UNSET).then_some(link)
    }

    pub fn set(&mut self, state: State, k: usize, link: Link) {
        match state {
            State::Ground => self.ground[k] = link,
            State::Sky => self.sky[k] = link,
            State::Object(f) => self.object[k * self.d_range + f as usize] = link,
        }
    }
}

/// One segment of a column in model rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stixel {
    pub column: usize,
    pub vb: usize,
    pub vt: usize,
    pub class: StixelClass,
    /// Rounded mean for objects; model disparity at `vb` for ground and sky.
    pub disparity: f64,
    /// Data plus prior cost this stixel adds to the column total.
    pub cost: f64,
}

impl Stixel {
    pub fn height(&self) -> usize {
        self.vt - self.vb + 1
    }

    pub fn summary(&self) -> StixelSummary {
        StixelSummary::new(self.class, self.vb, self.vt, self.disparity)
    }
}

/// The segmentation of one column, bottom stixel first.
#[derive(Debug, Clone, PartialEq)]
pub struct StixelColumn {
    pub index: usize,
    pub stixels: Vec<Stixel>,
    pub cost: f64,
}

fn dummy(class: StixelClass, vb: usize) -> StixelSummary {
    StixelSummary::new(class, vb, vb, 0.0)
}

/// Prior for upper/lower class pairs whose cost does not depend on geometry
/// or disparity: everything except object over ground or object.
fn class_only_transition(upper: StixelClass, lower: StixelClass, params: &StixelParams) -> f64 {
    transition_cost(
        &dummy(upper, 1),
        &dummy(lower, 0),
        &params.ground,
        &params.prior,
    )
}

/// Best predecessor at row `k` for an upper stixel whose transition cost only
/// depends on the classes.
fn best_static_predecessor(
    ground: f64,
    object: (f64, u16),
    sky: f64,
    to_class: &[f64; 3],
) -> (f64, Option<State>) {
    let mut best = (f64::INFINITY, None);
    for (lower_cost, state, t) in [
        (ground, State::Ground, to_class[0]),
        (object.0, State::Object(object.1), to_class[1]),
        (sky, State::Sky, to_class[2]),
    ] {
        let c = lower_cost + t;
        if c < best.0 {
            best = (c, Some(state));
        }
    }
    best
}

/// Finished object rows in sparse form, for pricing an object stacked on top
/// of row `k` at any level without an O(d_range) pass per query.
#[derive(Debug, Default)]
struct ObjectRows {
    stride: usize,
    /// Finite entries of row `k` below each level, `stride` per row.
    rank: Vec<u32>,
    /// Start of each row's entries in the arrays below; one extra end entry.
    offset: Vec<usize>,
    value: Vec<f64>,
    /// Minimum over entries at or after each position, lowest level on ties.
    suffix: Vec<(f64, u16)>,
    /// Running minimum of `value - c_ordering * level`, lowest level on ties.
    prefix: Vec<(f64, u16)>,
    /// Ground cost of each row, and sky cost plus the object-over-sky prior.
    ground: Vec<f64>,
    sky: Vec<f64>,
}

impl ObjectRows {
    fn reset(&mut self, h: usize, n: usize) {
        self.stride = n + 1;
        // every row is written by push_row before it is read
        self.rank.resize(h * self.stride, 0);
        for v in [&mut self.ground, &mut self.sky] {
            v.clear();
            v.resize(h, f64::INFINITY);
        }
        self.offset.clear();
        self.offset.push(0);
        self.value.clear();
        self.suffix.clear();
        self.prefix.clear();
    }

    /// Indexes finished row `k` whose finite levels are `levels`, ascending.
    /// Rows must arrive in order.
    fn push_row(
        &mut self,
        k: usize,
        row: &[f64],
        levels: &[u16],
        ground: f64,
        sky: f64,
        slope: f64,
    ) {
        debug_assert_eq!(self.offset.len(), k + 1);
        let start = self.value.len();
        let rank = &mut self.rank[k * self.stride..(k + 1) * self.stride];
        let mut from = 0;
        let mut running = (f64::INFINITY, 0u16);
        for (i, &level) in levels.iter().enumerate() {
            let f = level as usize;
            rank[from..=f].fill(i as u32);
            from = f + 1;
            let v = row[f];
            debug_assert!(v < f64::INFINITY);
            self.value.push(v);
            let shifted = v - slope * f as f64;
            if shifted < running.0 {
                running = (shifted, level);
            }
            self.prefix.push(running);
            self.suffix.push((v, level));
        }
        rank[from..].fill(levels.len() as u32);
        for i in (start..self.suffix.len().saturating_sub(1)).rev() {
            if self.suffix[i + 1].0 < self.suffix[i].0 {
                self.suffix[i] = self.suffix[i + 1];
            }
        }
        self.offset.push(self.value.len());
        self.ground[k] = ground;
        self.sky[k] = sky;
    }

    /// Entries of row `k` with level below `t`.
    #[inline]
    fn count_below(&self, k: usize, t: usize) -> usize {
        self.rank[k * self.stride + t] as usize
    }

    /// Cheapest object state of row `k` (lowest level on ties).
    fn best(&self, k: usize) -> (f64, u16) {
        let (a, b) = (self.offset[k], self.offset[k + 1]);
        if a < b {
            self.suffix[a]
        } else {
            (f64::INFINITY, 0)
        }
    }

    /// Cheapest predecessor at row `k` of an object of level `f` starting at
    /// row `k + 1`, transition included. Candidates go Ground, Object, Sky.
    fn resolve(
        &self,
        k: usize,
        f: usize,
        params: &StixelParams,
        first_penalized: usize,
    ) -> (f64, Option<State>) {
        let prior = &params.prior;
        let level = f as f64;
        let mut best = (f64::INFINITY, None);

        let lower_ground = self.ground[k];
        if lower_ground.is_finite() {
            let g = params.ground.disparity((k + 1) as f64);
            let c = lower_ground + (prior.c_bic + ground_contact_penalty(level, g, prior));
            if c < best.0 {
                best = (c, Some(State::Ground));
            }
        }

        // levels f' >= free_from carry no ordering penalty
        let (a, b) = (self.offset[k], self.offset[k + 1]);
        let free_from = (f + 1).saturating_sub(first_penalized);
        let i = a + self.count_below(k, free_from);
        let mut pick = if i < b {
            self.suffix[i]
        } else {
            (f64::INFINITY, 0)
        };
        if prior.c_ordering.is_finite() && f >= first_penalized {
            let m = self.count_below(k, f - first_penalized + 1);
            if m > 0 {
                let (shifted, x) = self.prefix[a + m - 1];
                let score = shifted + prior.c_ordering * (level - prior.ordering_margin);
                if score <= pick.0 {
                    let j = a + self.count_below(k, x as usize);
                    pick = (self.value[j], x);
                }
            }
        }
        if pick.0.is_finite() {
            let t = prior.c_bic + ordering_penalty(level, pick.1 as f64, prior);
            let c = pick.0 + t;
            if c < best.0 {
                best = (c, Some(State::Object(pick.1)));
            }
        }

        if self.sky[k] < best.0 {
            best = (self.sky[k], Some(State::Sky));
        }
        best
    }
}

/// Buffers reused across columns by [`estimate_column_with`].
#[derive(Debug, Default)]
pub struct ColumnWorkspace {
    luts: ColumnLuts,
    costs: CostTable,
    index: IndexTable,
    rows: ObjectRows,
    /// Memoized [`ObjectRows::resolve`] per row and level; NaN until needed.
    pred_cost: Vec<f64>,
    pred_prev: Vec<Option<State>>,
    /// Object levels of the current row that became finite.
    touched: Vec<u16>,
}

/// Fills the cost and index tables of one column.
pub fn solve_column(luts: &ColumnLuts, params: &StixelParams) -> (CostTable, IndexTable) {
    let mut ws = ColumnWorkspace::default();
    fill_tables(luts, params, &mut ws);
    (ws.costs, ws.index)
}

fn fill_tables(luts: &ColumnLuts, params: &StixelParams, ws: &mut ColumnWorkspace) {
    let h = luts.height();
    let n = luts.d_range();
    let prior = &params.prior;
    ws.costs.reset(h, n);
    ws.index.reset(h, n);
    ws.rows.reset(h, n);
    let ColumnWorkspace {
        costs,
        index,
        rows,
        pred_cost,
        pred_prev,
        touched,
        ..
    } = ws;

    use StixelClass::*;
    let to_ground = [Ground, Object, Sky].map(|l| class_only_transition(Ground, l, params));
    let to_sky = [Ground, Object, Sky].map(|l| class_only_transition(Sky, l, params));
    let object_over_sky = class_only_transition(Object, Sky, params);

    let first_ground = first_stixel_cost(&dummy(Ground, 0), prior);
    let first_object = first_stixel_cost(&dummy(Object, 0), prior);
    let first_sky = first_stixel_cost(&dummy(Sky, 0), prior);

    // an object of level f on one of level f' is penalized iff f - f' >= first_penalized
    let first_penalized = if prior.ordering_margin >= n as f64 {
        n
    } else {
        prior.ordering_margin as usize + 1
    };

    // best predecessors of a stixel starting at row k + 1
    let mut pred_ground = vec![(f64::INFINITY, None); h];
    let mut pred_sky = vec![(f64::INFINITY, None); h];
    pred_cost.clear();
    pred_cost.resize(h.saturating_sub(1) * n, f64::NAN);
    pred_prev.resize(h.saturating_sub(1) * n, None);

    let gp = luts.ground_prefix();
    let sp = luts.sky_prefix();
    let dp = luts.disparity_prefix();
    let vp = luts.valid_count_prefix();
    let op = luts.object_table();
    let stride = h + 1;

    for k in 0..h {
        let start = Link {
            start: 0,
            prev: None,
        };
        let mut best_g = luts.ground_cost(0, k) + first_ground;
        let mut link_g = start;
        let mut best_s = luts.sky_cost(0, k) + first_sky;
        let mut link_s = start;
        let obj_row = &mut costs.object[k * n..(k + 1) * n];
        let obj_link = &mut index.object[k * n..(k + 1) * n];
        touched.clear();
        {
            let f = luts.mean_level(0, k);
            let c = luts.object_cost(f, 0, k) + first_object;
            if c < obj_row[f] {
                touched.push(f as u16);
                obj_row[f] = c;
                obj_link[f] = start;
            }
        }

        let (g_top, s_top, d_top, v_top) = (gp[k + 1], sp[k + 1], dp[k + 1], vp[k + 1]);
        let cols = gp[1..=k]
            .iter()
            .zip(&sp[1..=k])
            .zip(dp[1..=k].iter().zip(&vp[1..=k]))
            .zip(pred_ground[..k].iter().zip(&pred_sky[..k]));
        for (below, (((&g, &s), (&d, &v)), (pg, ps))) in cols.enumerate() {
            let j = below + 1;

            let c = (g_top - g) + pg.0;
            if c < best_g {
                best_g = c;
                link_g = Link {
                    start: j as u32,
                    prev: pg.1,
                };
            }

            let c = (s_top - s) + ps.0;
            if c < best_s {
                best_s = c;
                link_s = Link {
                    start: j as u32,
                    prev: ps.1,
                };
            }

            let valid = v_top - v;
            let mean = if valid == 0 {
                0.0
            } else {
                (d_top - d) / valid as f64
            };
            let f = round_disparity(mean, n);
            let p = below * n + f;
            let mut pc = pred_cost[p];
            if pc.is_nan() {
                let (c, prev) = rows.resolve(below, f, params, first_penalized);
                pred_cost[p] = c;
                pred_prev[p] = prev;
                pc = c;
            }
            let data = op[f * stride + k + 1] - op[f * stride + j];
            let c = data + pc;
            if c < obj_row[f] {
                if obj_row[f] == f64::INFINITY {
                    touched.push(f as u16);
                }
                obj_row[f] = c;
                obj_link[f] = Link {
                    start: j as u32,
                    prev: pred_prev[p],
                };
            }
        }

        if best_g.is_finite() {
            costs.ground[k] = best_g;
            index.ground[k] = link_g;
        }
        if best_s.is_finite() {
            costs.sky[k] = best_s;
            index.sky[k] = link_s;
        }

        if k + 1 < h {
            let (g, s) = (costs.ground[k], costs.sky[k]);
            touched.sort_unstable();
            rows.push_row(
                k,
                &costs.object[k * n..(k + 1) * n],
                touched,
                g,
                s + object_over_sky,
                prior.c_ordering,
            );
            let best_object = rows.best(k);
            pred_ground[k] = best_static_predecessor(g, best_object, s, &to_ground);
            pred_sky[k] = best_static_predecessor(g, best_object, s, &to_sky);
        }
    }
}

/// Follows the index table from the cheapest state at the top row and
/// returns the stixels bottom to top.
pub fn backtrack(
    costs: &CostTable,
    index: &IndexTable,
    ground: &GroundModel,
    column: usize,
) -> Result<Vec<Stixel>> {
    let h = costs.height;
    if h == 0 {
        return Ok(Vec::new());
    }
    let (total, mut state) = costs.best(h - 1);
    if !total.is_finite() {
        return Err(StixelError::CorruptIndexTable {
            row: h - 1,
            reason: "no finite segmentation".into(),
        });
    }
    let mut out = Vec::new();
    let mut k = h - 1;
    loop {
        if out.len() >= h {
            return Err(StixelError::CorruptIndexTable {
                row: k,
                reason: "more links than rows".into(),
            });
        }
        let link = index
            .get(state, k)
            .ok_or_else(|| StixelError::CorruptIndexTable {
                row: k,
                reason: format!("no link for {state:?}"),
            })?;
        let vb = link.start as usize;
        if vb > k {
            return Err(StixelError::CorruptIndexTable {
                row: k,
                reason: format!("link start {vb} lies above the row"),
            });
        }
        let here = costs.get(state, k);
        let class = state.class();
        let disparity = match state {
            State::Object(f) => f as f64,
            State::Ground => ground.disparity(vb as f64),
            State::Sky => 0.0,
        };
        let below = match (vb, link.prev) {
            (0, None) => 0.0,
            (0, Some(_)) | (_, None) => {
                return Err(StixelError::CorruptIndexTable {
                    row: k,
                    reason: format!("start {vb} disagrees with predecessor {:?}", link.prev),
                })
            }
            (_, Some(prev)) => costs.get(prev, vb - 1),
        };
        out.push(Stixel {
            column,
            vb,
            vt: k,
            class,
            disparity,
            cost: here - below,
        });
        match link.prev {
            None => break,
            Some(prev) => {
                state = prev;
                k = vb - 1;
            }
        }
    }
    out.reverse();
    Ok(out)
}

/// LUTs, DP and backtracking for one reduced column.
pub fn estimate_column(
    column: &[f32],
    index: usize,
    pair: &PairCostLut,
    params: &StixelParams,
) -> Result<StixelColumn> {
    thread_local! {
        static WORKSPACE: RefCell<ColumnWorkspace> = RefCell::new(ColumnWorkspace::default());
    }
    WORKSPACE.with(|ws| estimate_column_with(column, index, pair, params, &mut ws.borrow_mut()))
}

/// [`estimate_column`] with caller-provided buffers.
pub fn estimate_column_with(
    column: &[f32],
    index: usize,
    pair: &PairCostLut,
    params: &StixelParams,
    ws: &mut ColumnWorkspace,
) -> Result<StixelColumn> {
    let mut luts = std::mem::take(&mut ws.luts);
    luts.rebuild(column, pair, params);
    fill_tables(&luts, params, ws);
    ws.luts = luts;
    let stixels = backtrack(&ws.costs, &ws.index, &params.ground, index).map_err(|e| {
        StixelError::Column {
            index,
            source: Box::new(e),
        }
    })?;
    Ok(StixelColumn {
        index,
        cost: ws.costs.best(column.len() - 1).0,
        stixels,
    })
}

fn check_frame(pair: &PairCostLut, params: &StixelParams) -> Result<()> {
    params.validate()?;
    if pair.d_range() != params.sensor.d_range {
        return Err(StixelError::param(
            "d_range",
            format!(
                "pair table has {} levels, parameters {}",
                pair.d_range(),
                params.sensor.d_range
            ),
        ));
    }
    Ok(())
}

/// Segments every column of a frame sequentially.
pub fn solve_frame(
    cols: &ColumnImage,
    pair: &PairCostLut,
    params: &StixelParams,
) -> Result<Vec<StixelColumn>> {
    check_frame(pair, params)?;
    cols.columns()
        .enumerate()
        .map(|(i, c)| estimate_column(c, i, pair, params))
        .collect()
}

/// Same result as [`solve_frame`], with columns spread over the current
/// rayon pool. Output order is by column index regardless of scheduling.
pub fn solve_frame_parallel(
    cols: &ColumnImage,
    pair: &PairCostLut,
    params: &StixelParams,
) -> Result<Vec<StixelColumn>> {
    check_frame(pair, params)?;
    (0..cols.n_cols())
        .into_par_iter()
        .map(|i| estimate_column(cols.column(i), i, pair, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costlut::{build_column_luts, build_pair_cost_lut};
    use crate::model::{pixel_cost, NoiseModel};
    use crate::preprocess::INVALID;
    use crate::prior::PriorParams;

    fn params(d_range: usize) -> StixelParams {
        let mut p = StixelParams::new(GroundModel::new(0.5, 30.0));
        p.sensor.d_range = d_range;
        p.sensor.noise = NoiseModel::constant(1.0);
        p
    }

    fn run(col: &[f32], p: &StixelParams) -> (ColumnLuts, CostTable, IndexTable) {
        let pair = build_pair_cost_lut(&p.sensor);
        let luts = build_column_luts(col, &pair, p);
        let (c, i) = solve_column(&luts, p);
        (luts, c, i)
    }

    #[test]
    fn single_row_base_case() {
        let p = params(32);
        let (luts, costs, index) = run(&[3.0], &p);
        let base = [
            luts.stixel_data_cost(StixelClass::Ground, 0, 0)
                + first_stixel_cost(&dummy(StixelClass::Ground, 0), &p.prior),
            luts.stixel_data_cost(StixelClass::Object, 0, 0)
                + first_stixel_cost(&dummy(StixelClass::Object, 0), &p.prior),
            f64::INFINITY,
        ];
        let expected = base.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(costs.best(0).0, expected);
        let st = backtrack(&costs, &index, &p.ground, 0).unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!((st[0].vb, st[0].vt), (0, 0));
    }

    #[test]
    fn exact_ground_column_costs_h_times_pixel_cost() {
        let mut p = params(64);
        p.prior = PriorParams {
            c_bic: 0.0,
            c_gravity: 0.0,
            c_ordering: 0.0,
            c_diving: 0.0,
            ordering_margin: 0.0,
            first_stixel_costs: [0.0, 0.0, f64::INFINITY],
        };
        let h = 20;
        let col: Vec<f32> = (0..h)
            .map(|v| p.ground.disparity(v as f64) as f32)
            .collect();
        let (_, costs, _) = run(&col, &p);
        let per_pixel = pixel_cost(Some(0.0), 0.0, StixelClass::Ground, &p.sensor);
        let expected = h as f64 * per_pixel;
        assert!((costs.best(h - 1).0 - expected).abs() < 1e-9);
        assert!((costs.class_cost(StixelClass::Ground, h - 1) - expected).abs() < 1e-9);
    }

    #[test]
    fn hand_built_index_table() {
        let h = 10;
        let mut costs = CostTable::new(h, 4);
        let mut index = IndexTable::new(h, 4);
        costs.set(State::Ground, 4, 3.0);
        index.set(
            State::Ground,
            4,
            Link {
                start: 0,
                prev: None,
            },
        );
        costs.set(State::Object(2), 9, 5.0);
        index.set(
            State::Object(2),
            9,
            Link {
                start: 5,
                prev: Some(State::Ground),
            },
        );
        let g = GroundModel::new(0.5, 30.0);
        let st = backtrack(&costs, &index, &g, 7).unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(
            (st[0].vb, st[0].vt, st[0].class),
            (0, 4, StixelClass::Ground)
        );
        assert_eq!(
            (st[1].vb, st[1].vt, st[1].class),
            (5, 9, StixelClass::Object)
        );
        assert_eq!(st[1].disparity, 2.0);
        assert_eq!(st[1].cost, 2.0);
        assert!(st.iter().all(|s| s.column == 7));
    }

    #[test]
    fn corrupt_tables_fail() {
        let h = 6;
        let g = GroundModel::new(0.5, 30.0);
        let mut costs = CostTable::new(h, 4);
        let mut index = IndexTable::new(h, 4);
        costs.set(State::Ground, 5, 1.0);
        // missing link
        assert!(backtrack(&costs, &index, &g, 0).is_err());
        // self-loop
        costs.set(State::Sky, 2, 1.0);
        index.set(
            State::Ground,
            5,
            Link {
                start: 3,
                prev: Some(State::Sky),
            },
        );
        index.set(
            State::Sky,
            2,
            Link {
                start: 3,
                prev: Some(State::Ground),
            },
        );
        assert!(matches!(
            backtrack(&costs, &index, &g, 0),
            Err(StixelError::CorruptIndexTable { .. })
        ));
        // all-infinite top row
        let costs = CostTable::new(h, 4);
        assert!(backtrack(&costs, &index, &g, 0).is_err());
    }

    #[test]
    fn stixel_costs_sum_to_total() {
        let p = params(32);
        let col: Vec<f32> = (0..40)
            .map(|v| match v {
                0..=14 => p.ground.disparity(v as f64) as f32,
                15..=24 => 12.0,
                25 => INVALID,
                _ => 0.3,
            })
            .collect();
        let (_, costs, index) = run(&col, &p);
        let st = backtrack(&costs, &index, &p.ground, 0).unwrap();
        let total: f64 = st.iter().map(|s| s.cost).sum();
        assert!((total - costs.best(39).0).abs() < 1e-9);
        assert_eq!(st.first().unwrap().vb, 0);
        assert_eq!(st.last().unwrap().vt, 39);
        assert!(st.windows(2).all(|w| w[1].vb == w[0].vt + 1));
        assert!(st
            .iter()
            .any(|s| s.class == StixelClass::Object && s.disparity == 12.0));
    }

    #[test]
    fn frame_matches_per_column_calls() {
        let p = params(32);
        let pair = build_pair_cost_lut(&p.sensor);
        let a: Vec<f32> = (0..25).map(|v| (v % 7) as f32).collect();
        let b: Vec<f32> = (0..25)
            .map(|v| p.ground.disparity(v as f64) as f32)
            .collect();
        let frame = ColumnImage::from_columns(&[a.clone(), b.clone(), a.clone()]).unwrap();
        let seq = solve_frame(&frame, &pair, &p).unwrap();
        let par = solve_frame_parallel(&frame, &pair, &p).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[0].stixels.len(), seq[2].stixels.len());
        for (x, y) in seq[0].stixels.iter().zip(&seq[2].stixels) {
            assert_eq!(
                (x.vb, x.vt, x.class, x.disparity, x.cost),
                (y.vb, y.vt, y.class, y.disparity, y.cost)
            );
        }
        let single = estimate_column(&b, 1, &pair, &p).unwrap();
        assert_eq!(seq[1], single);
    }

    #[test]
    fn frame_rejects_mismatched_pair_table() {
        let p = params(32);
        let pair = build_pair_cost_lut(&params(16).sensor);
        let frame = ColumnImage::from_columns(&[vec![1.0; 4]]).unwrap();
        assert!(solve_frame(&frame, &pair, &p).is_err());
    }
}
