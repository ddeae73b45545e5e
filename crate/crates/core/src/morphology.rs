//! Robot bodies: the module set, the body tree and its projection onto the
//! integer morphology grid.
//!
//! Every module occupies one grid cell. The core sits at the origin with its
//! forward axis pointing east (+x) and its up axis along +z. A child attached
//! to face `k` of its parent sits one cell away along that face's outward
//! normal and inherits the parent's up axis, with its own forward axis
//! pointing away from the parent. Lateral faces are numbered
//! `0 = forward, 1 = left, 2 = back, 3 = right` on four-slot modules and
//! `0 = forward, 1 = back` on two-slot modules; the back face of every
//! non-core module is the one facing its parent.
//!
//! A brick with a 90° rotation is rolled about its attachment axis so that
//! its left face points along the parent's up axis. Anything attached to its
//! left or right face therefore grows vertically.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Hard cap on modules per body, core included.
pub const MAX_MODULES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleKind {
    Core,
    Brick,
    HingeHorizontal,
    HingeVertical,
    LinearActuator,
}

impl ModuleKind {
    pub const ALL: [ModuleKind; 5] = [
        ModuleKind::Core,
        ModuleKind::Brick,
        ModuleKind::HingeHorizontal,
        ModuleKind::HingeVertical,
        ModuleKind::LinearActuator,
    ];

    /// Number of attachment faces, including the one facing the parent.
    pub fn slot_count(self) -> u8 {
        match self {
            ModuleKind::Core | ModuleKind::Brick => 4,
            _ => 2,
        }
    }

    /// Face that connects to the parent; `None` for the core.
    pub fn parent_slot(self) -> Option<Slot> {
        match self {
            ModuleKind::Core => None,
            ModuleKind::Brick => Some(Slot(2)),
            _ => Some(Slot(1)),
        }
    }

    /// Faces available for children, in ascending order.
    pub fn child_slots(self) -> impl Iterator<Item = Slot> {
        let parent = self.parent_slot();
        (0..self.slot_count())
            .map(Slot)
            .filter(move |s| Some(*s) != parent)
    }

    /// Hinges and linear actuators carry an actuated joint.
    pub fn is_active_joint(self) -> bool {
        matches!(
            self,
            ModuleKind::HingeHorizontal | ModuleKind::HingeVertical | ModuleKind::LinearActuator
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ModuleKind::Core => "core",
            ModuleKind::Brick => "brick",
            ModuleKind::HingeHorizontal => "hinge_horizontal",
            ModuleKind::HingeVertical => "hinge_vertical",
            ModuleKind::LinearActuator => "linear_actuator",
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Attachment face index on a module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Slot(pub u8);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rotation {
    #[default]
    #[serde(rename = "0")]
    Deg0,
    #[serde(rename = "90")]
    Deg90,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyNode {
    pub kind: ModuleKind,
    #[serde(default)]
    pub rotation: Rotation,
    #[serde(default)]
    pub children: BTreeMap<Slot, BodyNode>,
}

impl BodyNode {
    pub fn new(kind: ModuleKind) -> Self {
        BodyNode {
            kind,
            rotation: Rotation::Deg0,
            children: BTreeMap::new(),
        }
    }

    pub fn rotated(mut self) -> Self {
        self.rotation = Rotation::Deg90;
        self
    }

    /// Builder helper: attach `child` at `slot`, replacing any previous child.
    pub fn with(mut self, slot: u8, child: BodyNode) -> Self {
        self.children.insert(Slot(slot), child);
        self
    }

    pub fn count(&self) -> usize {
        1 + self.children.values().map(BodyNode::count).sum::<usize>()
    }
}

/// A robot body: a tree of modules rooted at the core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyGraph {
    pub root: BodyNode,
}

impl Default for BodyGraph {
    fn default() -> Self {
        Self::core_only()
    }
}

impl BodyGraph {
    pub fn core_only() -> Self {
        BodyGraph {
            root: BodyNode::new(ModuleKind::Core),
        }
    }

    pub fn from_root(root: BodyNode) -> Self {
        BodyGraph { root }
    }

    pub fn module_count(&self) -> usize {
        self.root.count()
    }

    /// Checks every structural constraint and the grid projection.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let count = self.module_count();
        if count > MAX_MODULES {
            violations.push(Violation::TooManyModules { count });
        }
        if self.root.kind != ModuleKind::Core {
            violations.push(Violation::RootNotCore {
                kind: self.root.kind,
            });
        }
        check_node(&self.root, String::from("root"), true, &mut violations);
        if let Err(GridError::Collision { cell, path }) = self.to_grid() {
            violations.push(Violation::CellCollision { cell, path });
        }
        ValidationReport { violations }
    }

    /// Projects the body onto the morphology grid.
    ///
    /// Placement order is depth-first pre-order with children visited in
    /// ascending slot order; that order is shared by every consumer that
    /// indexes joints.
    pub fn to_grid(&self) -> Result<BodyGrid, GridError> {
        let mut grid = BodyGrid {
            placements: Vec::new(),
            index: BTreeMap::new(),
        };
        place(
            &self.root,
            Cell::ORIGIN,
            Frame::CORE,
            None,
            String::from("root"),
            &mut grid,
        )?;
        Ok(grid)
    }

    pub fn count_kind(&self, kind: ModuleKind) -> usize {
        fn walk(node: &BodyNode, kind: ModuleKind) -> usize {
            usize::from(node.kind == kind) + node.children.values().map(|c| walk(c, kind)).sum::<usize>()
        }
        walk(&self.root, kind)
    }
}

fn check_node(node: &BodyNode, path: String, is_root: bool, out: &mut Vec<Violation>) {
    if !is_root && node.kind == ModuleKind::Core {
        out.push(Violation::ExtraCore { path: path.clone() });
    }
    if node.rotation == Rotation::Deg90 && node.kind != ModuleKind::Brick {
        out.push(Violation::RotationNotAllowed {
            path: path.clone(),
            kind: node.kind,
        });
    }
    let parent_slot = if is_root { None } else { node.kind.parent_slot() };
    for (slot, child) in &node.children {
        let child_path = alloc::format!("{path}/{}", slot.0);
        if slot.0 >= node.kind.slot_count() {
            out.push(Violation::SlotOutOfRange {
                path: child_path.clone(),
                slot: *slot,
                kind: node.kind,
            });
        } else if Some(*slot) == parent_slot {
            out.push(Violation::ParentSlotOccupied {
                path: child_path.clone(),
            });
        }
        check_node(child, child_path, false, out);
    }
}

fn place(
    node: &BodyNode,
    cell: Cell,
    arrival: Frame,
    parent: Option<usize>,
    path: String,
    grid: &mut BodyGrid,
) -> Result<(), GridError> {
    if grid.index.contains_key(&cell) {
        return Err(GridError::Collision { cell, path });
    }
    let frame = if node.rotation == Rotation::Deg90 {
        arrival.rolled()
    } else {
        arrival
    };
    let me = grid.placements.len();
    grid.index.insert(cell, me);
    grid.placements.push(Placement {
        cell,
        kind: node.kind,
        rotation: node.rotation,
        frame,
        parent,
        children: Vec::new(),
        path: path.clone(),
    });
    if let Some(p) = parent {
        grid.placements[p].children.push(me);
    }
    for (slot, child) in &node.children {
        let dir = frame.face_direction(node.kind, *slot).ok_or_else(|| GridError::BadSlot {
            path: alloc::format!("{path}/{}", slot.0),
        })?;
        let child_frame = Frame {
            forward: dir,
            up: frame.up,
        };
        place(
            child,
            cell.step(dir),
            child_frame,
            Some(me),
            alloc::format!("{path}/{}", slot.0),
            grid,
        )?;
    }
    Ok(())
}

/// Integer grid coordinate, in module units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Cell { x, y, z }
    }

    pub fn step(self, d: Dir) -> Cell {
        Cell::new(self.x + d.0[0], self.y + d.0[1], self.z + d.0[2])
    }

    pub fn manhattan(self, other: Cell) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs() + (self.z - other.z).abs()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Signed unit axis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dir(pub [i32; 3]);

impl Dir {
    pub const EAST: Dir = Dir([1, 0, 0]);
    pub const UP: Dir = Dir([0, 0, 1]);

    pub fn cross(self, o: Dir) -> Dir {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Dir([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }


    pub fn as_f64(self) -> [f64; 3] {
        [f64::from(self.0[0]), f64::from(self.0[1]), f64::from(self.0[2])]
    }
}

impl core::ops::Neg for Dir {
    type Output = Dir;

    fn neg(self) -> Dir {
        Dir([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Orientation of a module on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    pub forward: Dir,
    pub up: Dir,
}

impl Frame {
    pub const CORE: Frame = Frame {
        forward: Dir::EAST,
        up: Dir::UP,
    };

    pub fn left(self) -> Dir {
        self.up.cross(self.forward)
    }

    /// Roll by 90° about the forward axis: the old up becomes the left side.
    pub fn rolled(self) -> Frame {
        Frame {
            forward: self.forward,
            up: self.forward.cross(self.up),
        }
    }

    pub fn face_direction(self, kind: ModuleKind, slot: Slot) -> Option<Dir> {
        match (kind.slot_count(), slot.0) {
            (4, 0) | (2, 0) => Some(self.forward),
            (4, 1) => Some(self.left()),
            (4, 2) | (2, 1) => Some(-self.forward),
            (4, 3) => Some(-self.left()),
            _ => None,
        }
    }
}

/// One module placed on the grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub cell: Cell,
    pub kind: ModuleKind,
    pub rotation: Rotation,
    /// Frame after applying the module's own rotation.
    pub frame: Frame,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub path: String,
}

impl Placement {
    /// Faces connected to another module (parent link plus children).
    pub fn attached_faces(&self) -> usize {
        self.children.len() + usize::from(self.parent.is_some())
    }
}

/// Grid projection of a body. Placements are stored in tree pre-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BodyGrid {
    pub placements: Vec<Placement>,
    index: BTreeMap<Cell, usize>,
}

impl BodyGrid {
    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn kind_at(&self, cell: Cell) -> Option<ModuleKind> {
        self.index.get(&cell).map(|&i| self.placements[i].kind)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.index.contains_key(&cell)
    }

    /// Cell to kind map, ordered by coordinate.
    pub fn cells(&self) -> BTreeMap<Cell, ModuleKind> {
        self.index
            .iter()
            .map(|(c, &i)| (*c, self.placements[i].kind))
            .collect()
    }

    /// Inclusive (min, max) corners of the bounding box.
    pub fn bounds(&self) -> (Cell, Cell) {
        let mut lo = Cell::ORIGIN;
        let mut hi = Cell::ORIGIN;
        for p in &self.placements {
            lo = Cell::new(lo.x.min(p.cell.x), lo.y.min(p.cell.y), lo.z.min(p.cell.z));
            hi = Cell::new(hi.x.max(p.cell.x), hi.y.max(p.cell.y), hi.z.max(p.cell.z));
        }
        (lo, hi)
    }

    /// Indices of actuated modules, in placement order.
    pub fn active_joints(&self) -> impl Iterator<Item = usize> + '_ {
        self.placements
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind.is_active_joint())
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("cell collision at {cell} (module {path})")]
    Collision { cell: Cell, path: String },
    #[error("slot does not exist on module {path}")]
    BadSlot { path: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TooManyModules { count: usize },
    RootNotCore { kind: ModuleKind },
    ExtraCore { path: String },
    RotationNotAllowed { path: String, kind: ModuleKind },
    SlotOutOfRange { path: String, slot: Slot, kind: ModuleKind },
    ParentSlotOccupied { path: String },
    CellCollision { cell: Cell, path: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyModules { count } => {
                write!(f, "module_count > {MAX_MODULES} (found {count})")
            }
            Violation::RootNotCore { kind } => write!(f, "root: root module is {kind}, expected core"),
            Violation::ExtraCore { path } => write!(f, "{path}: core module below the root"),
            Violation::RotationNotAllowed { path, kind } => {
                write!(f, "{path}: {kind} cannot be rotated")
            }
            Violation::SlotOutOfRange { path, slot, kind } => {
                write!(f, "{path}: slot {} does not exist on {kind}", slot.0)
            }
            Violation::ParentSlotOccupied { path } => {
                write!(f, "{path}: child attached to the parent-facing slot")
            }
            Violation::CellCollision { cell, path } => {
                write!(f, "cell collision at {cell} ({path})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
