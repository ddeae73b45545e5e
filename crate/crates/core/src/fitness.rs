//! Directed-locomotion fitness.
//!
//! ```text
//! f = |p| / (L + eps) * (p / (delta + 1) - penalty)
//! ```
//!
//! `p` is the displacement projected on the target bearing, `L` the path
//! length, `delta` the angle between displacement and target, and
//! `penalty = penalty_coefficient * |orthogonal displacement|`. The target
//! bearing is measured in the robot's spawn frame.

use serde::{Deserialize, Serialize};

use crate::simulation::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessParams {
    /// Target bearing (rad) counter-clockwise from the spawn heading.
    pub beta0: f64,
    pub epsilon: f64,
    /// Per metre of sideways displacement.
    pub penalty_coefficient: f64,
}

impl Default for FitnessParams {
    fn default() -> Self {
        FitnessParams {
            beta0: core::f64::consts::FRAC_PI_3,
            epsilon: 1e-10,
            penalty_coefficient: 0.01,
        }
    }
}

impl FitnessParams {
    pub fn invalid_field(&self) -> Option<&'static str> {
        if !self.beta0.is_finite() {
            return Some("beta0");
        }
        if !(self.epsilon > 0.0) {
            return Some("epsilon");
        }
        if !(self.penalty_coefficient >= 0.0) {
            return Some("penalty_coefficient");
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    #[serde(rename = "distProjection")]
    pub dist_projection: f64,
    #[serde(rename = "lengthTraj")]
    pub length_traj: f64,
    pub delta: f64,
    pub penalty: f64,
    pub fitness: f64,
}

impl FitnessBreakdown {
    pub const ZERO: FitnessBreakdown = FitnessBreakdown {
        dist_projection: 0.0,
        length_traj: 0.0,
        delta: 0.0,
        penalty: 0.0,
        fitness: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitnessError {
    #[error("trajectory needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

pub fn evaluate_directed(traj: &Trajectory, params: &FitnessParams) -> Result<FitnessBreakdown, FitnessError> {
    evaluate_path(
        traj.samples.iter().map(|s| (s.x, s.y)),
        traj.start.yaw,
        params,
    )
}

/// Fitness of a planar path given the spawn yaw.
pub fn evaluate_path<I>(points: I, spawn_yaw: f64, params: &FitnessParams) -> Result<FitnessBreakdown, FitnessError>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut iter = points.into_iter();
    let Some(first) = iter.next() else {
        return Err(FitnessError::TooFewSamples(0));
    };
    let mut count = 1usize;
    let mut last = first;
    let mut length = 0.0;
    for p in iter {
        length += libm::hypot(p.0 - last.0, p.1 - last.1);
        last = p;
        count += 1;
    }
    if count < 2 {
        return Err(FitnessError::TooFewSamples(count));
    }

    let bearing = spawn_yaw + params.beta0;
    let (uy, ux) = (libm::sin(bearing), libm::cos(bearing));
    let dx = last.0 - first.0;
    let dy = last.1 - first.1;
    let dist_projection = dx * ux + dy * uy;
    let orthogonal = (dx * uy - dy * ux).abs();
    // atan2 stays accurate near 0 and pi, where acos of the cosine does not.
    let delta = if dx == 0.0 && dy == 0.0 {
        0.0
    } else {
        libm::atan2(orthogonal, dist_projection)
    };
    let penalty = params.penalty_coefficient * orthogonal;
    let fitness = dist_projection.abs() / (length + params.epsilon) * (dist_projection / (delta + 1.0) - penalty);
    Ok(FitnessBreakdown {
        dist_projection,
        length_traj: length,
        delta,
        penalty,
        fitness,
    })
}
