//! World-model prior: the unary cost of the bottom stixel and the pairwise
//! cost between vertically adjacent stixels.

use crate::error::{Result, StixelError};
use crate::model::{GroundModel, StixelClass};

/// Weights of the world-model constraints. Penalty weights may be `+inf`,
/// turning the corresponding soft constraint into a hard one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorParams {
    /// Model-complexity cost paid by every stixel.
    pub c_bic: f64,
    /// Weight for objects standing nearer than the ground at their base.
    pub c_gravity: f64,
    /// Weight for an object stacked on a farther object.
    pub c_ordering: f64,
    /// Weight for objects whose base lies behind the ground.
    pub c_diving: f64,
    /// Disparity slack before ordering, gravity and diving penalties start.
    pub ordering_margin: f64,
    /// Unary cost of the bottom stixel per class. The sky entry is ignored:
    /// sky is never allowed at the column base.
    pub first_stixel_costs: [f64; 3],
}

impl Default for PriorParams {
    fn default() -> Self {
        PriorParams {
            c_bic: 4.0,
            c_gravity: 1.0,
            c_ordering: 1.0,
            c_diving: 1.0,
            ordering_margin: 1.0,
            first_stixel_costs: [0.0, 2.0, f64::INFINITY],
        }
    }
}

impl PriorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_bic >= 0.0 && self.c_bic.is_finite()) {
            return Err(StixelError::param(
                "c_bic",
                format!("must be finite and non-negative, got {}", self.c_bic),
            ));
        }
        for (name, w) in [
            ("c_gravity", self.c_gravity),
            ("c_ordering", self.c_ordering),
            ("c_diving", self.c_diving),
        ] {
            if !(w >= 0.0) {
                return Err(StixelError::param(
                    name,
                    format!("must be non-negative, got {w}"),
                ));
            }
        }
        if !(self.ordering_margin >= 0.0 && self.ordering_margin.is_finite()) {
            return Err(StixelError::param(
                "ordering_margin",
                format!(
                    "must be finite and non-negative, got {}",
                    self.ordering_margin
                ),
            ));
        }
        let [g, o, _] = self.first_stixel_costs;
        if !(g >= 0.0 && o >= 0.0) {
            return Err(StixelError::param(
                "first_stixel_costs",
                "must be non-negative",
            ));
        }
        if !g.is_finite() && !o.is_finite() {
            return Err(StixelError::param(
                "first_stixel_costs",
                "ground or object must be allowed at the column base",
            ));
        }
        Ok(())
    }
}

/// What the prior needs to know about a stixel at a junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StixelSummary {
    pub class: StixelClass,
    pub vb: usize,
    pub vt: usize,
    /// Rounded mean for objects, model disparity at `vb` otherwise.
    pub disparity: f64,
}

impl StixelSummary {
    pub fn new(class: StixelClass, vb: usize, vt: usize, disparity: f64) -> Self {
        debug_assert!(vb <= vt);
        StixelSummary {
            class,
            vb,
            vt,
            disparity,
        }
    }
}

#[inline]
fn penalty(weight: f64, excess: f64) -> f64 {
    if excess > 0.0 {
        weight * excess
    } else {
        0.0
    }
}

/// Unary prior of the bottom-most stixel of a column.
pub fn first_stixel_cost(first: &StixelSummary, prior: &PriorParams) -> f64 {
    debug_assert_eq!(first.vb, 0);
    match first.class {
        StixelClass::Sky => f64::INFINITY,
        class => prior.first_stixel_costs[class.index()] + prior.c_bic,
    }
}

/// Ordering penalty for an object of disparity `upper` stacked directly on an
/// object of disparity `lower`, excluding the complexity cost.
#[inline]
pub fn ordering_penalty(upper: f64, lower: f64, prior: &PriorParams) -> f64 {
    penalty(prior.c_ordering, upper - lower - prior.ordering_margin)
}

/// Gravity and diving penalty for an object of disparity `object` whose base
/// touches ground of disparity `ground`, excluding the complexity cost.
#[inline]
pub fn ground_contact_penalty(object: f64, ground: f64, prior: &PriorParams) -> f64 {
    let m = prior.ordering_margin;
    penalty(prior.c_gravity, object - ground - m) + penalty(prior.c_diving, ground - m - object)
}

/// Pairwise prior between `upper` and the stixel `lower` right beneath it.
#[inline]
pub fn transition_cost(
    upper: &StixelSummary,
    lower: &StixelSummary,
    ground: &GroundModel,
    prior: &PriorParams,
) -> f64 {
    debug_assert_eq!(upper.vb, lower.vt + 1, "stixels must be adjacent");
    use StixelClass::*;
    let extra = match (upper.class, lower.class) {
        (Ground, Sky) | (Ground, Ground) | (Sky, Sky) => f64::INFINITY,
        (Object, Sky) => f64::INFINITY,
        (Object, Object) => ordering_penalty(upper.disparity, lower.disparity, prior),
        (Object, Ground) => {
            ground_contact_penalty(upper.disparity, ground.disparity(upper.vb as f64), prior)
        }
        (Ground, Object) | (Sky, Object) | (Sky, Ground) => 0.0,
    };
    prior.c_bic + extra
}
