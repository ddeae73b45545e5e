//! Central pattern generator: one differential oscillator pair per actuated
//! joint, coupled through the x-states, with a tanh output layer.
//!
//! ```text
//! dx_i/dt =  w_i * y_i + sum_j W_ij * x_j
//! dy_i/dt = -w_i * x_i
//! ```
//!
//! Integration splits each tick into half-kick, drift, half-kick
//! (Störmer-Verlet). For an uncoupled oscillator this keeps `x^2 + y^2`
//! within `O((w dt)^2)` of its initial value instead of the `O(w dt)`
//! wobble of a single-sided symplectic Euler step.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::decoder::BrainSpec;
use crate::morphology::ModuleKind;

/// States are clamped to this magnitude after every update.
pub const STATE_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpgConfig {
    /// Intrinsic angular frequency (rad/s).
    pub base_frequency: f64,
    /// Output gain applied inside the tanh.
    pub gain: f64,
    /// Multiplier on decoded coupling weights.
    pub coupling_scale: f64,
}

impl Default for CpgConfig {
    fn default() -> Self {
        CpgConfig {
            base_frequency: core::f64::consts::TAU,
            gain: 1.0,
            coupling_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    /// Angle fraction in [-1, 1].
    Hinge,
    /// Extension fraction in [0, 1].
    Linear,
}

impl OutputMode {
    pub fn for_kind(kind: ModuleKind) -> Self {
        if kind == ModuleKind::LinearActuator {
            OutputMode::Linear
        } else {
            OutputMode::Hinge
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator {
    pub x: f64,
    pub y: f64,
    pub omega: f64,
    pub mode: OutputMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpgNetwork {
    pub oscillators: Vec<Oscillator>,
    /// `(source, target, weight)`, already scaled.
    pub couplings: Vec<(usize, usize, f64)>,
    pub gain: f64,
    coupling_input: Vec<f64>,
}

/// Joint targets for one tick, in oscillator order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointTargets {
    pub values: Vec<f64>,
}

impl CpgNetwork {
    pub fn new(brain: &BrainSpec, config: &CpgConfig) -> Self {
        let start = core::f64::consts::FRAC_1_SQRT_2;
        let oscillators = brain
            .joints
            .iter()
            .map(|j| Oscillator {
                x: start,
                y: start,
                omega: config.base_frequency,
                mode: OutputMode::for_kind(j.kind),
            })
            .collect::<Vec<_>>();
        let couplings = brain
            .edges
            .iter()
            .map(|e| (e.source, e.target, e.weight * config.coupling_scale))
            .collect();
        CpgNetwork {
            coupling_input: alloc::vec![0.0; oscillators.len()],
            oscillators,
            couplings,
            gain: config.gain,
        }
    }

    pub fn len(&self) -> usize {
        self.oscillators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.oscillators.is_empty()
    }

    pub fn outputs(&self) -> JointTargets {
        let mut t = JointTargets::default();
        self.outputs_into(&mut t);
        t
    }

    pub fn outputs_into(&self, targets: &mut JointTargets) {
        targets.values.clear();
        targets.values.extend(self.oscillators.iter().map(|o| {
            let s = libm::tanh(self.gain * o.x);
            match o.mode {
                OutputMode::Hinge => s,
                OutputMode::Linear => 0.5 * (s + 1.0),
            }
        }));
    }

    /// Advances by `dt` seconds.
    pub fn advance(&mut self, dt: f64) {
        debug_assert!(dt > 0.0);
        let half = 0.5 * dt;
        for o in &mut self.oscillators {
            o.y -= half * o.omega * o.x;
        }
        self.coupling_input.iter_mut().for_each(|c| *c = 0.0);
        for &(s, t, w) in &self.couplings {
            self.coupling_input[t] += w * self.oscillators[s].x;
        }
        for (o, c) in self.oscillators.iter_mut().zip(&self.coupling_input) {
            o.x = (o.x + dt * (o.omega * o.y + c)).clamp(-STATE_LIMIT, STATE_LIMIT);
        }
        for o in &mut self.oscillators {
            o.y = (o.y - half * o.omega * o.x).clamp(-STATE_LIMIT, STATE_LIMIT);
        }
    }

    /// Advances by `dt` and returns the new joint targets.
    pub fn step(&mut self, dt: f64) -> JointTargets {
        self.advance(dt);
        self.outputs()
    }
}
