//! Detection rate and false positives against ground-truth stixels.
//!
//! All areas are counted in original image pixels: a record covers
//! `width` pixel columns starting at `x0` and rows `vb..=vt`. Only object
//! records take part; ground-truth ground or sky records are ignored.

use std::collections::BTreeMap;

use crate::error::{Result, StixelError};
use crate::imageio::{RecordSet, StixelRecord};
use crate::model::StixelClass;

/// A ground-truth obstacle uses the same record layout as estimates.
pub type GroundTruthStixel = StixelRecord;

/// Minimum number of free-space pixels for an object to count as a false positive (exclusive).
pub const FREE_SPACE_PIXEL_LIMIT: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameEval {
    pub frame: u64,
    pub gt_stixels: usize,
    pub detected: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub detection_rate: f64,
    pub detected: usize,
    pub total_gt: usize,
    pub estimated_objects: usize,
    pub total_false_positives: usize,
    pub frames: Vec<FrameEval>,
}

impl EvalReport {
    pub fn frames_with_false_positives(&self) -> usize {
        self.frames.iter().filter(|f| f.false_positives > 0).count()
    }

    /// Percentage of frames with at least one false positive.
    pub fn false_positive_frame_pct(&self) -> f64 {
        if self.frames.is_empty() {
            0.0
        } else {
            100.0 * self.frames_with_false_positives() as f64 / self.frames.len() as f64
        }
    }
}

fn objects<'a>(
    records: impl IntoIterator<Item = &'a StixelRecord>,
) -> impl Iterator<Item = &'a StixelRecord> {
    records
        .into_iter()
        .filter(|r| r.class == StixelClass::Object)
}

/// Disjoint, sorted row intervals covered by estimated objects per pixel column.
fn object_coverage<'a>(
    est: impl IntoIterator<Item = &'a StixelRecord>,
) -> BTreeMap<usize, Vec<(usize, usize)>> {
    let mut cov: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for r in objects(est) {
        for x in r.x0..r.x0 + r.width {
            cov.entry(x).or_default().push((r.vb, r.vt));
        }
    }
    for spans in cov.values_mut() {
        spans.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
        for &(b, t) in spans.iter() {
            match merged.last_mut() {
                Some(last) if b <= last.1 + 1 => last.1 = last.1.max(t),
                _ => merged.push((b, t)),
            }
        }
        *spans = merged;
    }
    cov
}

fn is_detected(gt: &StixelRecord, coverage: &BTreeMap<usize, Vec<(usize, usize)>>) -> bool {
    let overlap: usize = (gt.x0..gt.x0 + gt.width)
        .filter_map(|x| coverage.get(&x))
        .flat_map(|spans| spans.iter())
        .map(|&(b, t)| {
            let lo = b.max(gt.vb);
            let hi = t.min(gt.vt);
            if lo <= hi {
                hi - lo + 1
            } else {
                0
            }
        })
        .sum();
    2 * overlap > gt.area()
}

/// Number of ground-truth obstacles covered by estimated objects on more than half their area.
pub fn detected_count<'a>(
    gt: impl IntoIterator<Item = &'a StixelRecord>,
    est: impl IntoIterator<Item = &'a StixelRecord>,
) -> (usize, usize) {
    let coverage = object_coverage(est);
    let mut total = 0;
    let mut detected = 0;
    for g in objects(gt) {
        total += 1;
        if is_detected(g, &coverage) {
            detected += 1;
        }
    }
    (detected, total)
}

/// Fraction of ground-truth obstacles detected; 1.0 when there are none.
pub fn detection_rate<'a>(
    gt: impl IntoIterator<Item = &'a StixelRecord>,
    est: impl IntoIterator<Item = &'a StixelRecord>,
) -> f64 {
    let (detected, total) = detected_count(gt, est);
    if total == 0 {
        1.0
    } else {
        detected as f64 / total as f64
    }
}

/// Lowest obstacle base per pixel column; rows below it are free space.
fn free_space_limits<'a>(gt: impl IntoIterator<Item = &'a StixelRecord>) -> BTreeMap<usize, usize> {
    let mut limits: BTreeMap<usize, usize> = BTreeMap::new();
    for g in objects(gt) {
        for x in g.x0..g.x0 + g.width {
            let e = limits.entry(x).or_insert(g.vb);
            *e = (*e).min(g.vb);
        }
    }
    limits
}

/// Pixels of `stixel` lying below every ground-truth obstacle of their column.
/// Columns without obstacles are free space over their full height.
fn free_space_pixels(stixel: &StixelRecord, limits: &BTreeMap<usize, usize>) -> usize {
    (stixel.x0..stixel.x0 + stixel.width)
        .map(|x| match limits.get(&x) {
            None => stixel.height(),
            Some(&top) if stixel.vb >= top => 0,
            Some(&top) => top.min(stixel.vt + 1) - stixel.vb,
        })
        .sum()
}

/// Estimated objects with more than [`FREE_SPACE_PIXEL_LIMIT`] pixels in ground-truth free space.
pub fn false_positives<'a>(
    gt: impl IntoIterator<Item = &'a StixelRecord>,
    est: impl IntoIterator<Item = &'a StixelRecord>,
) -> usize {
    let limits = free_space_limits(gt);
    objects(est)
        .filter(|s| free_space_pixels(s, &limits) > FREE_SPACE_PIXEL_LIMIT)
        .count()
}

/// Scores every ground-truth frame. Frames without predictions count as
/// empty predictions; predicted frames absent from the ground truth are an error.
pub fn evaluate(gt: &RecordSet, pred: &RecordSet) -> Result<EvalReport> {
    let unknown: Vec<u64> = pred.frames.difference(&gt.frames).copied().collect();
    if !unknown.is_empty() {
        return Err(StixelError::FrameMismatch { frames: unknown });
    }
    let mut gt_by_frame: BTreeMap<u64, Vec<&StixelRecord>> =
        gt.frames.iter().map(|&f| (f, Vec::new())).collect();
    for r in &gt.records {
        gt_by_frame.entry(r.frame).or_default().push(r);
    }
    let mut pred_by_frame: BTreeMap<u64, Vec<&StixelRecord>> = BTreeMap::new();
    for r in &pred.records {
        pred_by_frame.entry(r.frame).or_default().push(r);
    }

    let mut frames = Vec::with_capacity(gt_by_frame.len());
    let mut estimated_objects = 0;
    for (&frame, g) in &gt_by_frame {
        let p = pred_by_frame.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        estimated_objects += objects(p.iter().copied()).count();
        let (detected, total) = detected_count(g.iter().copied(), p.iter().copied());
        frames.push(FrameEval {
            frame,
            gt_stixels: total,
            detected,
            false_positives: false_positives(g.iter().copied(), p.iter().copied()),
        });
    }
    let detected = frames.iter().map(|f| f.detected).sum();
    let total_gt = frames.iter().map(|f| f.gt_stixels).sum();
    Ok(EvalReport {
        detection_rate: if total_gt == 0 {
            1.0
        } else {
            detected as f64 / total_gt as f64
        },
        detected,
        total_gt,
        estimated_objects,
        total_false_positives: frames.iter().map(|f| f.false_positives).sum(),
        frames,
    })
}
