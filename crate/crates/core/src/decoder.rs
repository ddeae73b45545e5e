//! Genotype to phenotype mapping.
//!
//! The body CPPN is queried at grid cells (coordinates divided by
//! `grid_radius`) and answers with six values:
//!
//! | output | meaning                                   |
//! |--------|-------------------------------------------|
//! | 0      | leave the cell empty                      |
//! | 1      | brick                                     |
//! | 2      | horizontal hinge                          |
//! | 3      | vertical hinge                            |
//! | 4      | linear actuator                           |
//! | 5      | brick rotation (> 0 means 90°)            |
//!
//! Output 0 sits where the core's score would be; the core is never placed
//! twice, so it doubles as the empty vote. A cell stays empty when output 0
//! wins the argmax or the winning score is not positive.
//!
//! The brain CPPN maps a pair of oscillator coordinates (source, target) to
//! a coupling weight.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::descriptors::DescriptorVector;
use crate::genome::{Activation, CompiledCppn, Cppn, InnovationRegistry};
use crate::morphology::{BodyGraph, BodyNode, Cell, Frame, ModuleKind, Rotation, Slot, MAX_MODULES};

pub const BODY_INPUTS: usize = 3;
pub const BODY_OUTPUTS: usize = 6;
pub const BRAIN_INPUTS: usize = 6;
pub const BRAIN_OUTPUTS: usize = 1;

const ROTATION_OUTPUT: usize = 5;
const KIND_BY_OUTPUT: [Option<ModuleKind>; 5] = [
    None,
    Some(ModuleKind::Brick),
    Some(ModuleKind::HingeHorizontal),
    Some(ModuleKind::HingeVertical),
    Some(ModuleKind::LinearActuator),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeLimits {
    pub max_modules: usize,
    /// Cells with any coordinate beyond this are never filled; also the
    /// coordinate normalizer for CPPN inputs.
    pub grid_radius: i32,
    pub linear_actuator_enabled: bool,
    /// Oscillators are coupled when their cells are within this Manhattan distance.
    pub coupling_radius: i32,
    /// Coupling weights are clamped to `±weight_clamp`.
    pub weight_clamp: f64,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        DecodeLimits {
            max_modules: MAX_MODULES,
            grid_radius: 5,
            linear_actuator_enabled: true,
            coupling_radius: 2,
            weight_clamp: 1.0,
        }
    }
}

impl DecodeLimits {
    pub fn invalid_field(&self) -> Option<&'static str> {
        if self.max_modules < 1 || self.max_modules > MAX_MODULES {
            return Some("max_modules");
        }
        if self.grid_radius < 1 {
            return Some("grid_radius");
        }
        if self.coupling_radius < 0 {
            return Some("coupling_radius");
        }
        if !(self.weight_clamp > 0.0) {
            return Some("weight_clamp");
        }
        None
    }

    fn normalize(&self, c: Cell) -> [f64; 3] {
        let r = f64::from(self.grid_radius);
        [f64::from(c.x) / r, f64::from(c.y) / r, f64::from(c.z) / r]
    }

    fn in_range(&self, c: Cell) -> bool {
        c.x.abs() <= self.grid_radius && c.y.abs() <= self.grid_radius && c.z.abs() <= self.grid_radius
    }
}

pub fn body_registry() -> InnovationRegistry {
    InnovationRegistry::new(BODY_INPUTS, BODY_OUTPUTS)
}

pub fn brain_registry() -> InnovationRegistry {
    InnovationRegistry::new(BRAIN_INPUTS, BRAIN_OUTPUTS)
}

/// Output activation used for freshly created body and brain genomes.
pub const OUTPUT_ACTIVATION: Activation = Activation::Tanh;

struct Grown {
    kind: ModuleKind,
    rotation: Rotation,
    cell: Cell,
    frame: Frame,
    parent: Option<(usize, Slot)>,
}

/// Grows a body breadth-first from the core.
///
/// Open slots are visited in BFS order of their module, then by face index.
/// Decoding never fails; a genome that cannot be evaluated yields the
/// core-only body.
pub fn decode_body(genome: &Cppn, limits: &DecodeLimits) -> BodyGraph {
    let Ok(net) = genome.compile() else {
        return BodyGraph::core_only();
    };
    if genome.input_count != BODY_INPUTS || genome.output_count != BODY_OUTPUTS {
        return BodyGraph::core_only();
    }
    let mut modules = alloc::vec![Grown {
        kind: ModuleKind::Core,
        rotation: Rotation::Deg0,
        cell: Cell::ORIGIN,
        frame: Frame::CORE,
        parent: None,
    }];
    let mut occupied: BTreeSet<Cell> = BTreeSet::from([Cell::ORIGIN]);
    let mut queue = VecDeque::from([0usize]);
    let mut scores = [0.0; BODY_OUTPUTS];
    'grow: while let Some(m) = queue.pop_front() {
        let (kind, cell, frame) = (modules[m].kind, modules[m].cell, modules[m].frame);
        for slot in kind.child_slots() {
            if modules.len() >= limits.max_modules {
                break 'grow;
            }
            let dir = frame.face_direction(kind, slot).expect("child slots exist");
            let target = cell.step(dir);
            if occupied.contains(&target) || !limits.in_range(target) {
                continue;
            }
            if net.evaluate_into(&limits.normalize(target), &mut scores).is_err() {
                continue;
            }
            let Some(new_kind) = choose_kind(&scores, limits) else {
                continue;
            };
            let rotation = if new_kind == ModuleKind::Brick && scores[ROTATION_OUTPUT] > 0.0 {
                Rotation::Deg90
            } else {
                Rotation::Deg0
            };
            let arrival = Frame {
                forward: dir,
                up: frame.up,
            };
            let frame = if rotation == Rotation::Deg90 {
                arrival.rolled()
            } else {
                arrival
            };
            occupied.insert(target);
            modules.push(Grown {
                kind: new_kind,
                rotation,
                cell: target,
                frame,
                parent: Some((m, slot)),
            });
            queue.push_back(modules.len() - 1);
        }
    }
    assemble(&modules)
}

fn choose_kind(scores: &[f64; BODY_OUTPUTS], limits: &DecodeLimits) -> Option<ModuleKind> {
    let mut best: Option<(usize, f64)> = None;
    for (i, kind) in KIND_BY_OUTPUT.iter().enumerate() {
        if *kind == Some(ModuleKind::LinearActuator) && !limits.linear_actuator_enabled {
            continue;
        }
        // Strict comparison: the lowest index wins ties.
        if best.is_none_or(|(_, s)| scores[i] > s) {
            best = Some((i, scores[i]));
        }
    }
    let (i, score) = best?;
    if score <= 0.0 {
        return None;
    }
    KIND_BY_OUTPUT[i]
}

fn assemble(modules: &[Grown]) -> BodyGraph {
    let mut nodes: Vec<Option<BodyNode>> = modules
        .iter()
        .map(|g| {
            Some(BodyNode {
                kind: g.kind,
                rotation: g.rotation,
                children: Default::default(),
            })
        })
        .collect();
    // Children always come after their parent, so fold back to front.
    for i in (1..modules.len()).rev() {
        let (parent, slot) = modules[i].parent.expect("non-root has a parent");
        let node = nodes[i].take().expect("each node attached once");
        nodes[parent]
            .as_mut()
            .expect("parent still present")
            .children
            .insert(slot, node);
    }
    BodyGraph::from_root(nodes[0].take().expect("root"))
}

/// An oscillator-carrying module of a body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointRef {
    /// Index into the body's grid placements.
    pub placement: usize,
    pub cell: Cell,
    pub kind: ModuleKind,
}

/// Coupling `target += weight * source` between two oscillators, indexed
/// into [`BrainSpec::joints`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpgEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BrainSpec {
    pub joints: Vec<JointRef>,
    pub edges: Vec<CpgEdge>,
}

/// Weights for every coupled oscillator pair, self pairs included.
///
/// Invalid bodies have no joints; a genome that cannot be evaluated gives
/// zero weights.
pub fn decode_brain(genome: &Cppn, body: &BodyGraph, limits: &DecodeLimits) -> BrainSpec {
    let Ok(grid) = body.to_grid() else {
        return BrainSpec::default();
    };
    let joints: Vec<JointRef> = grid
        .active_joints()
        .map(|i| JointRef {
            placement: i,
            cell: grid.placements[i].cell,
            kind: grid.placements[i].kind,
        })
        .collect();
    let net: Option<CompiledCppn> = if genome.input_count == BRAIN_INPUTS && genome.output_count == BRAIN_OUTPUTS {
        genome.compile().ok()
    } else {
        None
    };
    let mut edges = Vec::new();
    let mut input = [0.0; BRAIN_INPUTS];
    let mut out = [0.0; BRAIN_OUTPUTS];
    for (s, src) in joints.iter().enumerate() {
        for (t, dst) in joints.iter().enumerate() {
            if src.cell.manhattan(dst.cell) > limits.coupling_radius {
                continue;
            }
            input[..3].copy_from_slice(&limits.normalize(src.cell));
            input[3..].copy_from_slice(&limits.normalize(dst.cell));
            let raw = match &net {
                Some(net) => match net.evaluate_into(&input, &mut out) {
                    Ok(()) => out[0],
                    Err(_) => 0.0,
                },
                None => 0.0,
            };
            edges.push(CpgEdge {
                source: s,
                target: t,
                weight: raw.clamp(-limits.weight_clamp, limits.weight_clamp),
            });
        }
    }
    BrainSpec { joints, edges }
}

/// One member of a population: both genomes plus cached phenotype data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub body_genome: Cppn,
    pub brain_genome: Cppn,
    #[serde(skip)]
    pub body: BodyGraph,
    pub fitness: Option<f64>,
    #[serde(skip)]
    pub descriptors: Option<DescriptorVector>,
}

impl Individual {
    pub fn new(id: u64, body_genome: Cppn, brain_genome: Cppn, limits: &DecodeLimits) -> Self {
        let body = decode_body(&body_genome, limits);
        Individual {
            id,
            body_genome,
            brain_genome,
            body,
            fitness: None,
            descriptors: None,
        }
    }

    pub fn linear_actuator_count(&self) -> usize {
        self.body.count_kind(ModuleKind::LinearActuator)
    }
}
