//! Reduced-order robot physics.
//!
//! The robot is one floating body whose shape changes with its joints.
//! Joints are kinematic: each follows its controller target with a
//! first-order lag and moves the subtree beyond it. Every module is a
//! 5 cm cube of 100 g that touches the ground as a sphere of half the module
//! size, through a penalty spring-damper along the terrain normal and
//! regularized Coulomb friction. The translational state lives at the centre
//! of mass, so a limb swinging in the air shifts the core rather than the
//! whole robot; only ground contact can move the centre of mass sideways.
//!
//! Each controller tick of `dt` is split into `substeps` physics steps of
//! semi-implicit Euler. Gyroscopic coupling is neglected.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::controller::{CpgConfig, CpgNetwork, JointTargets};
use crate::decoder::BrainSpec;
use crate::morphology::{BodyGraph, ModuleKind};
use crate::terrain::Heightmap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub gravity: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction: f64,
    /// Tangential speed below which friction scales linearly with slip.
    pub friction_slip_speed: f64,
    /// First-order joint tracking rate (1/s).
    pub joint_tracking_rate: f64,
    pub sample_period: f64,
    /// Pre-roll with the controller frozen, excluded from the trajectory.
    pub settle_time: f64,
    pub substeps: u32,
    pub module_size: f64,
    pub module_mass: f64,
    pub actuator_stroke: f64,
    /// Hinge angle at controller output +-1 (rad).
    pub hinge_range: f64,
    /// Servo speed limit (rad/s).
    pub max_hinge_speed: f64,
    /// Actuator speed limit (m/s).
    pub max_extension_speed: f64,
    /// Speeds above this abort the run as unstable (m/s).
    pub max_speed: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.005,
            duration: 30.0,
            gravity: 9.81,
            contact_stiffness: 5000.0,
            contact_damping: 50.0,
            friction: 0.8,
            friction_slip_speed: 0.01,
            joint_tracking_rate: 10.0,
            sample_period: 0.1,
            settle_time: 2.0,
            substeps: 4,
            module_size: 0.05,
            module_mass: 0.1,
            actuator_stroke: 0.05,
            hinge_range: core::f64::consts::FRAC_PI_2,
            max_hinge_speed: 6.0,
            max_extension_speed: 0.25,
            max_speed: 100.0,
        }
    }
}

fn whole_multiple(total: f64, step: f64) -> Option<u64> {
    let n = libm::round(total / step);
    if (n * step - total).abs() <= 1e-9 * total.abs().max(1.0) {
        Some(n as u64)
    } else {
        None
    }
}

impl SimConfig {
    pub fn invalid_field(&self) -> Option<&'static str> {
        let positive = [
            ("dt", self.dt),
            ("duration", self.duration),
            ("gravity", self.gravity),
            ("contact_stiffness", self.contact_stiffness),
            ("contact_damping", self.contact_damping),
            ("friction", self.friction),
            ("friction_slip_speed", self.friction_slip_speed),
            ("joint_tracking_rate", self.joint_tracking_rate),
            ("sample_period", self.sample_period),
            ("module_size", self.module_size),
            ("module_mass", self.module_mass),
            ("actuator_stroke", self.actuator_stroke),
            ("hinge_range", self.hinge_range),
            ("max_hinge_speed", self.max_hinge_speed),
            ("max_extension_speed", self.max_extension_speed),
            ("max_speed", self.max_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Some(name);
            }
        }
        if !(self.settle_time >= 0.0) {
            return Some("settle_time");
        }
        if self.substeps == 0 {
            return Some("substeps");
        }
        if whole_multiple(self.duration, self.dt).is_none() {
            return Some("duration");
        }
        if whole_multiple(self.sample_period, self.dt).is_none_or(|n| n == 0) {
            return Some("sample_period");
        }
        if whole_multiple(self.settle_time, self.dt).is_none() && self.settle_time > 0.0 {
            return Some("settle_time");
        }
        None
    }

    pub fn ticks(&self) -> u64 {
        whole_multiple(self.duration, self.dt).unwrap_or(0)
    }

    pub fn ticks_per_sample(&self) -> u64 {
        whole_multiple(self.sample_period, self.dt).unwrap_or(1).max(1)
    }

    pub fn settle_ticks(&self) -> u64 {
        whole_multiple(self.settle_time, self.dt).unwrap_or(0)
    }

    pub fn expected_samples(&self) -> usize {
        (self.ticks() / self.ticks_per_sample()) as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation parameter `{0}`")]
    Config(&'static str),
    #[error("body is invalid: {0}")]
    InvalidBody(alloc::string::String),
    #[error("brain has {brain} oscillators but the body has {body} joints")]
    JointMismatch { brain: usize, body: usize },
    #[error("unstable simulation at t = {time:.3} s (speed {speed:.1} m/s)")]
    Unstable { time: f64, speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    /// Contact queries that fell outside the terrain and were clamped.
    pub out_of_bounds: u64,
    /// Oscillator or joint values that hit their limits.
    pub clamp_events: u64,
    pub max_penetration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Core pose at the end of the settling pre-roll.
    pub start: Pose,
    pub stats: SimStats,
}

#[derive(Debug, Clone, Copy)]
enum JointMotion {
    Hinge { axis: Unit<Vector3<f64>> },
    Linear { direction: Vector3<f64> },
}

#[derive(Debug, Clone)]
struct Link {
    parent: Option<usize>,
    /// Rest offset from the parent's centre.
    offset: Vector3<f64>,
    /// Joint carried by this module (moves its children).
    joint: Option<(usize, JointMotion)>,
}

#[derive(Debug, Clone, Copy)]
struct JointState {
    position: f64,
    lower: f64,
    upper: f64,
    scale: f64,
    linear: bool,
}

/// A running simulation of one robot.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    terrain: &'a Heightmap,
    config: SimConfig,
    links: Vec<Link>,
    joints: Vec<JointState>,
    controller: CpgNetwork,
    targets: JointTargets,
    radius: f64,
    total_mass: f64,
    self_inertia: f64,
    // Body-frame module centres relative to the core, current and previous.
    shape: Vec<Vector3<f64>>,
    shape_prev: Vec<Vector3<f64>>,
    rotations: Vec<Matrix3<f64>>,
    com_offset: Vector3<f64>,
    com_offset_prev: Vector3<f64>,
    com: Vector3<f64>,
    velocity: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
    angular_velocity: Vector3<f64>,
    time: f64,
    stats: SimStats,
}

fn dir_vec(d: crate::morphology::Dir) -> Vector3<f64> {
    let [x, y, z] = d.as_f64();
    Vector3::new(x, y, z)
}

impl<'a> Simulator<'a> {
    pub fn new(
        body: &BodyGraph,
        brain: &BrainSpec,
        terrain: &'a Heightmap,
        config: &SimConfig,
        cpg: &CpgConfig,
    ) -> Result<Self, SimError> {
        if let Some(field) = config.invalid_field() {
            return Err(SimError::Config(field));
        }
        let report = body.validate();
        if !report.is_ok() {
            return Err(SimError::InvalidBody(alloc::format!("{report}")));
        }
        let grid = body.to_grid().map_err(|e| SimError::InvalidBody(alloc::format!("{e}")))?;
        let joint_count = grid.active_joints().count();
        if brain.joints.len() != joint_count {
            return Err(SimError::JointMismatch {
                brain: brain.joints.len(),
                body: joint_count,
            });
        }

        let s = config.module_size;
        let mut links = Vec::with_capacity(grid.len());
        let mut joints = Vec::new();
        for p in &grid.placements {
            let offset = match p.parent {
                Some(parent) => {
                    let pc = grid.placements[parent].cell;
                    Vector3::new(
                        f64::from(p.cell.x - pc.x),
                        f64::from(p.cell.y - pc.y),
                        f64::from(p.cell.z - pc.z),
                    ) * s
                }
                None => Vector3::zeros(),
            };
            let joint = match p.kind {
                ModuleKind::HingeHorizontal | ModuleKind::HingeVertical => {
                    let axis = if p.kind == ModuleKind::HingeHorizontal {
                        p.frame.left()
                    } else {
                        p.frame.up
                    };
                    joints.push(JointState {
                        position: 0.0,
                        lower: -config.hinge_range,
                        upper: config.hinge_range,
                        scale: config.hinge_range,
                        linear: false,
                    });
                    Some((
                        joints.len() - 1,
                        JointMotion::Hinge {
                            axis: Unit::new_normalize(dir_vec(axis)),
                        },
                    ))
                }
                ModuleKind::LinearActuator => {
                    joints.push(JointState {
                        position: 0.5 * config.actuator_stroke,
                        lower: 0.0,
                        upper: config.actuator_stroke,
                        scale: config.actuator_stroke,
                        linear: true,
                    });
                    Some((
                        joints.len() - 1,
                        JointMotion::Linear {
                            direction: dir_vec(p.frame.forward),
                        },
                    ))
                }
                _ => None,
            };
            links.push(Link {
                parent: p.parent,
                offset,
                joint,
            });
        }

        let n = links.len();
        let controller = CpgNetwork::new(brain, cpg);
        let mut sim = Simulator {
            terrain,
            config: *config,
            links,
            joints,
            targets: controller.outputs(),
            controller,
            radius: 0.5 * s,
            total_mass: config.module_mass * n as f64,
            self_inertia: config.module_mass * s * s / 6.0,
            shape: alloc::vec![Vector3::zeros(); n],
            shape_prev: alloc::vec![Vector3::zeros(); n],
            rotations: alloc::vec![Matrix3::identity(); n],
            com_offset: Vector3::zeros(),
            com_offset_prev: Vector3::zeros(),
            com: Vector3::zeros(),
            velocity: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
            angular_velocity: Vector3::zeros(),
            time: 0.0,
            stats: SimStats::default(),
        };
        sim.update_shape();
        sim.shape_prev.clone_from(&sim.shape);
        sim.com_offset_prev = sim.com_offset;
        sim.spawn();
        Ok(sim)
    }

    /// Places the robot just above the terrain under the origin.
    fn spawn(&mut self) {
        let mut lift = f64::NEG_INFINITY;
        for r in &self.shape {
            let rel = r - self.com_offset;
            let ground = self.terrain.height_at(r.x, r.y);
            lift = lift.max(ground + self.radius - rel.z);
        }
        let c = self.com_offset;
        self.com = Vector3::new(c.x, c.y, lift + 0.002);
    }

    fn update_shape(&mut self) {
        for i in 0..self.links.len() {
            let link = &self.links[i];
            let (pos, rot) = match link.parent {
                None => (Vector3::zeros(), Matrix3::identity()),
                Some(p) => {
                    let pr = self.rotations[p];
                    let pp = self.shape[p];
                    match self.links[p].joint {
                        Some((j, JointMotion::Hinge { axis })) => {
                            let jr = UnitQuaternion::from_axis_angle(&axis, self.joints[j].position)
                                .to_rotation_matrix()
                                .into_inner();
                            (pp + pr * (jr * link.offset), pr * jr)
                        }
                        Some((j, JointMotion::Linear { direction })) => {
                            (pp + pr * (link.offset + direction * self.joints[j].position), pr)
                        }
                        None => (pp + pr * link.offset, pr),
                    }
                }
            };
            self.shape[i] = pos;
            self.rotations[i] = rot;
        }
        let sum: Vector3<f64> = self.shape.iter().sum();
        self.com_offset = sum / self.shape.len() as f64;
    }

    pub fn core_position(&self) -> Vector3<f64> {
        self.com - self.orientation * self.com_offset
    }

    pub fn module_positions(&self) -> Vec<Vector3<f64>> {
        self.shape
            .iter()
            .map(|r| self.com + self.orientation * (r - self.com_offset))
            .collect()
    }

    pub fn orientation(&self) -> UnitQuaternion<f64> {
        self.orientation
    }

    /// Joint coordinates in oscillator order: radians for hinges, metres of
    /// extension for linear actuators.
    pub fn joint_positions(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.position).collect()
    }

    pub fn yaw(&self) -> f64 {
        let x = self.orientation * Vector3::x();
        libm::atan2(x.y, x.x)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn stats(&self) -> SimStats {
        self.stats
    }

    fn world_inertia(&self) -> Matrix3<f64> {
        let m = self.config.module_mass;
        let mut inertia = Matrix3::identity() * (self.self_inertia * self.shape.len() as f64);
        for r in &self.shape {
            let d = self.orientation * (r - self.com_offset);
            inertia += (Matrix3::identity() * d.norm_squared() - d * d.transpose()) * m;
        }
        inertia
    }

    /// Rigid-body kinetic energy of the assembly (J).
    pub fn kinetic_energy(&self) -> f64 {
        let w = self.angular_velocity;
        0.5 * self.total_mass * self.velocity.norm_squared() + 0.5 * w.dot(&(self.world_inertia() * w))
    }

    fn track_joints(&mut self, h: f64) {
        let alpha = 1.0 - libm::exp(-self.config.joint_tracking_rate * h);
        let hinge_step = self.config.max_hinge_speed * h;
        let linear_step = self.config.max_extension_speed * h;
        for (j, target) in self.joints.iter_mut().zip(&self.targets.values) {
            let goal = target * j.scale;
            let limit = if j.linear { linear_step } else { hinge_step };
            let next = j.position + (alpha * (goal - j.position)).clamp(-limit, limit);
            let clamped = next.clamp(j.lower, j.upper);
            if clamped != next {
                self.stats.clamp_events += 1;
            }
            j.position = clamped;
            debug_assert!(!j.linear || (0.0..=self.config.actuator_stroke).contains(&j.position));
        }
    }

    fn physics_step(&mut self, h: f64) -> Result<(), SimError> {
        core::mem::swap(&mut self.shape, &mut self.shape_prev);
        self.shape.clone_from(&self.shape_prev);
        self.com_offset_prev = self.com_offset;
        self.update_shape();

        let cfg = &self.config;
        let mut reach: f64 = 0.0;
        let mut force = Vector3::new(0.0, 0.0, -cfg.gravity * self.total_mass);
        let mut torque = Vector3::zeros();
        let com_rate = (self.com_offset - self.com_offset_prev) / h;
        for i in 0..self.shape.len() {
            let arm = self.orientation * (self.shape[i] - self.com_offset);
            reach = reach.max(arm.norm());
            let pos = self.com + arm;
            let sample = self.terrain.sample(pos.x, pos.y);
            let n = self.terrain.normal_at(pos.x, pos.y);
            let normal = Vector3::new(n[0], n[1], n[2]);
            let penetration = self.radius - (pos.z - sample.height) * normal.z;
            if penetration <= 0.0 {
                continue;
            }
            if sample.clamped {
                self.stats.out_of_bounds += 1;
            }
            self.stats.max_penetration = self.stats.max_penetration.max(penetration);
            let shape_rate = (self.shape[i] - self.shape_prev[i]) / h - com_rate;
            let v = self.velocity + self.angular_velocity.cross(&arm) + self.orientation * shape_rate;
            let vn = v.dot(&normal);
            let fn_mag = (cfg.contact_stiffness * penetration - cfg.contact_damping * vn).max(0.0);
            let vt = v - normal * vn;
            let slip = vt.norm();
            let friction = if slip > 0.0 {
                -vt * (cfg.friction * fn_mag / slip.max(cfg.friction_slip_speed))
            } else {
                Vector3::zeros()
            };
            let f = normal * fn_mag + friction;
            force += f;
            torque += arm.cross(&f);
        }

        self.velocity += force * (h / self.total_mass);
        let inertia = self.world_inertia();
        if let Some(inv) = inertia.try_inverse() {
            self.angular_velocity += inv * torque * h;
        }
        self.com += self.velocity * h;
        let spin = self.angular_velocity * h;
        self.orientation = UnitQuaternion::from_scaled_axis(spin) * self.orientation;
        self.orientation.renormalize();

        // Upper bound on the fastest module's rigid-body speed.
        let speed = self.velocity.norm() + self.angular_velocity.norm() * reach;
        if !speed.is_finite() || speed > self.config.max_speed {
            return Err(SimError::Unstable {
                time: self.time,
                speed,
            });
        }
        Ok(())
    }

    fn tick(&mut self, controlled: bool) -> Result<(), SimError> {
        let dt = self.config.dt;
        if controlled {
            self.controller.advance(dt);
            self.controller.outputs_into(&mut self.targets);
        }
        let substeps = self.config.substeps;
        let h = dt / f64::from(substeps);
        for _ in 0..substeps {
            if controlled {
                self.track_joints(h);
            }
            self.physics_step(h)?;
        }
        Ok(())
    }

    /// Runs the settling pre-roll with joints frozen.
    pub fn settle(&mut self) -> Result<(), SimError> {
        for _ in 0..self.config.settle_ticks() {
            self.tick(false)?;
        }
        Ok(())
    }

    /// One controlled tick of `dt`.
    pub fn step(&mut self) -> Result<(), SimError> {
        self.tick(true)?;
        self.time += self.config.dt;
        Ok(())
    }

    fn pose(&self) -> Pose {
        let c = self.core_position();
        Pose {
            x: c.x,
            y: c.y,
            z: c.z,
            yaw: self.yaw(),
        }
    }

    /// Settles, then steps for the configured duration, sampling the core.
    pub fn run(mut self) -> Result<Trajectory, SimError> {
        self.settle()?;
        let start = self.pose();
        let every = self.config.ticks_per_sample();
        let ticks = self.config.ticks();
        let mut samples = Vec::with_capacity(self.config.expected_samples());
        samples.push(TrajectorySample {
            t: 0.0,
            x: start.x,
            y: start.y,
        });
        for k in 1..=ticks {
            self.step()?;
            if k % every == 0 {
                let c = self.core_position();
                samples.push(TrajectorySample {
                    t: k as f64 * self.config.dt,
                    x: c.x,
                    y: c.y,
                });
            }
        }
        Ok(Trajectory {
            samples,
            start,
            stats: self.stats,
        })
    }
}

/// Simulates `body` driven by `brain` on `terrain`.
pub fn simulate(
    body: &BodyGraph,
    brain: &BrainSpec,
    terrain: &Heightmap,
    config: &SimConfig,
    cpg: &CpgConfig,
) -> Result<Trajectory, SimError> {
    Simulator::new(body, brain, terrain, config, cpg)?.run()
}
