//! Morphological descriptors, computed on the grid projection of a body.
//!
//! With `m` modules:
//!
//! * branching: modules with all four faces attached over
//!   `floor((m - 2) / 3)`; zero below five modules.
//! * coverage: `m` over the volume of the cell bounding box.
//! * relative joints: actuated modules attached on both faces over
//!   `floor((m - 1) / 2)`, capped at 1.
//! * relative limbs: non-core modules with a single attached face over
//!   `2 * floor((m - 6) / 3) + [(m - 6) mod 3 > 0] + 4` for `m >= 6`,
//!   else `m - 1`.
//! * relative limb length: mean limb length over `m - 1`, where a limb is
//!   the unbranched run of modules ending in a leaf.
//! * proportion: short over long side of the (x, y) bounding box.
//! * absolute size: `m`.
//! * symmetry: best mirror match ratio across the x or y axis through the
//!   core, on the (x, y) projection.

use alloc::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::morphology::{BodyGraph, BodyGrid, GridError, ModuleKind, MAX_MODULES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub branching: f64,
    pub coverage: f64,
    pub rel_joints: f64,
    pub rel_limbs: f64,
    pub rel_limb_length: f64,
    pub proportion: f64,
    pub absolute_size: u32,
    pub symmetry: f64,
}

/// Column names in report order.
pub const DESCRIPTOR_NAMES: [&str; 8] = [
    "branching",
    "coverage",
    "rel_joints",
    "rel_limbs",
    "rel_limb_length",
    "proportion",
    "absolute_size",
    "symmetry",
];

impl DescriptorVector {
    pub fn size_normalized(&self) -> f64 {
        f64::from(self.absolute_size) / MAX_MODULES as f64
    }

    /// Values in [`DESCRIPTOR_NAMES`] order, absolute size as a count.
    pub fn values(&self) -> [f64; 8] {
        [
            self.branching,
            self.coverage,
            self.rel_joints,
            self.rel_limbs,
            self.rel_limb_length,
            self.proportion,
            f64::from(self.absolute_size),
            self.symmetry,
        ]
    }

    pub fn normalized(&self) -> [f64; 8] {
        let mut v = self.values();
        v[6] = self.size_normalized();
        v
    }
}

pub fn descriptor_vector(body: &BodyGraph) -> Result<DescriptorVector, GridError> {
    Ok(from_grid(&body.to_grid()?))
}

pub fn branching_normalizer(m: usize) -> usize {
    if m >= 5 {
        (m - 2) / 3
    } else {
        0
    }
}

pub fn joint_normalizer(m: usize) -> usize {
    m.saturating_sub(1) / 2
}

pub fn limb_normalizer(m: usize) -> usize {
    if m >= 6 {
        let r = m - 6;
        2 * (r / 3) + usize::from(!r.is_multiple_of(3)) + 4
    } else {
        m.saturating_sub(1)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        (num as f64 / den as f64).min(1.0)
    }
}

pub fn from_grid(grid: &BodyGrid) -> DescriptorVector {
    let m = grid.len();
    let p = &grid.placements;

    let fully = p.iter().filter(|n| n.attached_faces() == 4).count();
    let branching = ratio(fully, branching_normalizer(m));

    let (lo, hi) = grid.bounds();
    let w = (hi.x - lo.x + 1) as usize;
    let l = (hi.y - lo.y + 1) as usize;
    let h = (hi.z - lo.z + 1) as usize;
    let coverage = m as f64 / (w * l * h) as f64;

    let joints = p
        .iter()
        .filter(|n| n.kind.is_active_joint() && n.attached_faces() >= 2)
        .count();
    let rel_joints = ratio(joints, joint_normalizer(m));

    let leaves: alloc::vec::Vec<usize> = (0..m)
        .filter(|&i| p[i].kind != ModuleKind::Core && p[i].attached_faces() == 1)
        .collect();
    let rel_limbs = ratio(leaves.len(), limb_normalizer(m));

    let rel_limb_length = if leaves.is_empty() || m < 2 {
        0.0
    } else {
        let total: usize = leaves
            .iter()
            .map(|&leaf| {
                let mut len = 1;
                let mut cur = p[leaf].parent;
                while let Some(c) = cur {
                    if p[c].kind == ModuleKind::Core || p[c].attached_faces() != 2 {
                        break;
                    }
                    len += 1;
                    cur = p[c].parent;
                }
                len
            })
            .sum();
        (total as f64 / leaves.len() as f64 / (m - 1) as f64).min(1.0)
    };

    let (short, long) = if w <= l { (w, l) } else { (l, w) };
    let proportion = short as f64 / long as f64;

    let projected: BTreeSet<(i32, i32)> = p.iter().map(|n| (n.cell.x, n.cell.y)).collect();
    let symmetry = mirror_score(&projected, |(x, y)| (x, -y)).max(mirror_score(&projected, |(x, y)| (-x, y)));

    DescriptorVector {
        branching,
        coverage,
        rel_joints,
        rel_limbs,
        rel_limb_length,
        proportion,
        absolute_size: m as u32,
        symmetry,
    }
}

/// Fraction of off-axis cells whose mirror image is occupied; 1 when every
/// cell lies on the axis.
fn mirror_score(cells: &BTreeSet<(i32, i32)>, mirror: impl Fn((i32, i32)) -> (i32, i32)) -> f64 {
    let mut off_axis = 0usize;
    let mut matched = 0usize;
    for &c in cells {
        let m = mirror(c);
        if m == c {
            continue;
        }
        off_axis += 1;
        if cells.contains(&m) {
            matched += 1;
        }
    }
    if off_axis == 0 {
        1.0
    } else {
        matched as f64 / off_axis as f64
    }
}

/// Descriptor rows keyed by individual id. Invalid bodies are skipped.
pub fn descriptor_matrix<'a, I>(population: I) -> BTreeMap<u64, DescriptorVector>
where
    I: IntoIterator<Item = (u64, &'a BodyGraph)>,
{
    population
        .into_iter()
        .filter_map(|(id, body)| descriptor_vector(body).ok().map(|d| (id, d)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::BodyNode;
    use alloc::vec::Vec;
    use ModuleKind::*;

    fn brick() -> BodyNode {
        BodyNode::new(Brick)
    }

    #[test]
    fn normalizer_tables() {
        let b: Vec<_> = (1..=10).map(branching_normalizer).collect();
        assert_eq!(b, [0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let j: Vec<_> = (1..=10).map(joint_normalizer).collect();
        assert_eq!(j, [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        let l: Vec<_> = (1..=10).map(limb_normalizer).collect();
        assert_eq!(l, [0, 1, 2, 3, 4, 4, 5, 5, 6, 7]);
    }

    #[test]
    fn core_only() {
        let d = descriptor_vector(&BodyGraph::core_only()).unwrap();
        assert_eq!(
            d,
            DescriptorVector {
                branching: 0.0,
                coverage: 1.0,
                rel_joints: 0.0,
                rel_limbs: 0.0,
                rel_limb_length: 0.0,
                proportion: 1.0,
                absolute_size: 1,
                symmetry: 1.0,
            }
        );
    }

    #[test]
    fn hinge_chain_caps_joint_ratio() {
        let h = || BodyNode::new(HingeHorizontal);
        let body = BodyGraph::from_root(BodyNode::new(Core).with(0, h().with(0, h().with(0, h().with(0, brick())))));
        let d = descriptor_vector(&body).unwrap();
        assert_eq!(d.rel_joints, 1.0);
    }

    #[test]
    fn matrix_is_ordered_and_consistent() {
        let a = BodyGraph::core_only();
        let b = BodyGraph::from_root(BodyNode::new(Core).with(1, brick()));
        let m = descriptor_matrix([(7, &b), (2, &a), (5, &b)]);
        assert_eq!(m.keys().copied().collect::<Vec<_>>(), [2, 5, 7]);
        assert_eq!(m[&5], m[&7]);
        assert_eq!(m[&7], descriptor_vector(&b).unwrap());
        assert!(descriptor_matrix(core::iter::empty()).is_empty());
    }
}
