//! Trajectory and fitness breakdown text output.

use std::fmt::Write as _;

use morphevo_core::fitness::FitnessBreakdown;
use morphevo_core::simulation::Trajectory;

/// `t,x,y` rows with a header.
pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from("t,x,y\n");
    for s in &t.samples {
        let _ = writeln!(out, "{},{},{}", s.t, s.x, s.y);
    }
    out
}

pub fn breakdown_text(b: &FitnessBreakdown) -> String {
    format!(
        "fitness {}\ndistProjection {}\nlengthTraj {}\ndelta {}\npenalty {}\n",
        b.fitness, b.dist_projection, b.length_traj, b.delta, b.penalty
    )
}
