//! Sparse voxel octree storage.
//!
//! Nodes live in one array with the root at index 0. A node describes its
//! eight octants with two masks: `valid_mask` marks occupied octants and
//! `leaf_mask` marks which of those are voxels at full depth. Child nodes
//! of one parent are stored contiguously in ascending octant order starting
//! at `child_base`, and leaf colors likewise from `attr_base`. A child's slot
//! is the popcount of the relevant mask below its octant bit.
//!
//! Octant numbering is `(bx << 2) | (by << 1) | bz` where a set bit means
//! the upper half along that axis.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::ingest::VoxelGrid;

pub const MAX_DEPTH: u32 = 16;

pub const MAGIC: [u8; 4] = *b"SVOA";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 20;
pub const NODE_BYTES: usize = 12;
pub const ATTR_BYTES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VoxelAttribute {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: u8,
}

impl VoxelAttribute {
    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b, a: 255 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SvoNode {
    pub child_base: u32,
    pub attr_base: u32,
    pub valid_mask: u8,
    pub leaf_mask: u8,
}

impl SvoNode {
    /// Occupied octants that are interior nodes.
    pub fn node_mask(&self) -> u8 {
        self.valid_mask & !self.leaf_mask
    }

    /// Occupied octants that are leaf voxels.
    pub fn voxel_mask(&self) -> u8 {
        self.valid_mask & self.leaf_mask
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildRef {
    Absent,
    Node(u32),
    Leaf(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvoModel {
    /// Levels below the root; leaves sit at exactly this depth.
    pub depth: u32,
    pub nodes: Vec<SvoNode>,
    pub attributes: Vec<VoxelAttribute>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("depth {0} out of range 1..=16")]
    DepthOutOfRange(u32),
    #[error("grid resolution {resolution} does not match 2^{depth}")]
    ResolutionMismatch { resolution: u32, depth: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload: need {expected} bytes, have {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("{extra} trailing bytes after payload")]
    TrailingBytes { extra: u64 },
    #[error("depth {0} out of range 1..=16")]
    DepthOutOfRange(u32),
    #[error("node {node}: reserved field is {value}, expected 0")]
    ReservedNonZero { node: u32, value: u16 },
    #[error("node {node}: child or attribute index out of range")]
    IndexOutOfRange { node: u32 },
    #[error("invalid structure: {0}")]
    InvalidStructure(Violation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DepthOutOfRange,
    MissingRoot,
    LeafNotValid,
    ChildOutOfRange,
    AttributeOutOfRange,
    NotTopological,
    LeafAtWrongDepth,
    NodeAtLeafDepth,
    EmptySubtree,
    SharedNode,
    UnreachableNode,
    AttributeNotReferenced,
    SharedAttribute,
}

impl ViolationKind {
    fn message(self) -> &'static str {
        match self {
            Self::DepthOutOfRange => "depth out of range",
            Self::MissingRoot => "missing root",
            Self::LeafNotValid => "leaf not valid",
            Self::ChildOutOfRange => "child index out of range",
            Self::AttributeOutOfRange => "attribute index out of range",
            Self::NotTopological => "child stored before parent",
            Self::LeafAtWrongDepth => "leaf above full depth",
            Self::NodeAtLeafDepth => "interior node at full depth",
            Self::EmptySubtree => "empty subtree stored",
            Self::SharedNode => "node has two parents",
            Self::UnreachableNode => "node unreachable from root",
            Self::AttributeNotReferenced => "attribute not referenced",
            Self::SharedAttribute => "attribute referenced twice",
        }
    }
}

/// One broken invariant; `index` is the offending node, or the attribute
/// for the attribute kinds, or `None` for model-level problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub index: Option<u32>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} at {i}", self.kind.message()),
            None => f.write_str(self.kind.message()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvoStats {
    pub node_count: u64,
    pub leaf_count: u64,
    pub byte_size: u64,
    pub depth: u32,
    /// Fraction of the `8^depth` full-resolution cells that are set.
    pub fill_ratio: f64,
}

fn rank(mask: u8, octant: u8) -> u32 {
    (mask & ((1u16 << octant) - 1) as u8).count_ones()
}

fn morton(x: u32, y: u32, z: u32, depth: u32) -> u64 {
    let mut code = 0u64;
    for level in (0..depth).rev() {
        let octant = ((x >> level) & 1) << 2 | ((y >> level) & 1) << 1 | ((z >> level) & 1);
        code = code << 3 | octant as u64;
    }
    code
}

impl SvoModel {
    /// A model with only an empty root.
    pub fn empty(depth: u32) -> Self {
        Self {
            depth,
            nodes: vec![SvoNode::default()],
            attributes: Vec::new(),
        }
    }

    /// Builds the octree bottom-up from a dense grid of resolution `2^depth`.
    ///
    /// Nodes are laid out level by level; within a level they follow Morton
    /// order, which is also the ascending-octant order of their parents.
    pub fn build_from_grid(grid: &VoxelGrid, depth: u32) -> Result<Self, BuildError> {
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(BuildError::DepthOutOfRange(depth));
        }
        if grid.depth() != depth {
            return Err(BuildError::ResolutionMismatch {
                resolution: grid.resolution(),
                depth,
            });
        }

        let mut voxels: Vec<(u64, [u32; 3])> = grid
            .iter_set()
            .map(|[x, y, z]| (morton(x, y, z, depth), [x, y, z]))
            .collect();
        voxels.sort_unstable_by_key(|v| v.0);

        let d = depth as usize;
        let mut levels: Vec<Vec<u64>> = vec![Vec::new(); d + 1];
        levels[d] = voxels.iter().map(|v| v.0).collect();
        for l in (0..d).rev() {
            let mut parents: Vec<u64> = levels[l + 1].iter().map(|c| c >> 3).collect();
            parents.dedup();
            levels[l] = parents;
        }
        if levels[0].is_empty() {
            levels[0].push(0);
        }

        let mut offsets = vec![0usize; d];
        for l in 1..d {
            offsets[l] = offsets[l - 1] + levels[l - 1].len();
        }
        let mut nodes = Vec::with_capacity(offsets[d - 1] + levels[d - 1].len());
        for l in 0..d {
            let children = &levels[l + 1];
            let mut cursor = 0usize;
            for &code in &levels[l] {
                let first = cursor;
                let mut valid = 0u8;
                while cursor < children.len() && children[cursor] >> 3 == code {
                    valid |= 1 << (children[cursor] & 7);
                    cursor += 1;
                }
                let node = if l + 1 == d {
                    SvoNode {
                        child_base: 0,
                        attr_base: if valid != 0 { first as u32 } else { 0 },
                        valid_mask: valid,
                        leaf_mask: valid,
                    }
                } else {
                    SvoNode {
                        child_base: if valid != 0 {
                            (offsets[l + 1] + first) as u32
                        } else {
                            0
                        },
                        attr_base: 0,
                        valid_mask: valid,
                        leaf_mask: 0,
                    }
                };
                nodes.push(node);
            }
        }

        let attributes = voxels
            .iter()
            .map(|&(_, [x, y, z])| grid.color_at(x, y, z))
            .collect();
        Ok(Self {
            depth,
            nodes,
            attributes,
        })
    }

    /// Resolves octant `octant` of node `node_index`.
    pub fn node_child(&self, node_index: u32, octant: u8) -> ChildRef {
        let node = &self.nodes[node_index as usize];
        let bit = 1u8 << octant;
        if node.valid_mask & bit == 0 {
            ChildRef::Absent
        } else if node.leaf_mask & bit != 0 {
            ChildRef::Leaf(node.attr_base + rank(node.voxel_mask(), octant))
        } else {
            ChildRef::Node(node.child_base + rank(node.node_mask(), octant))
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let mut push = |index: Option<u32>, kind| out.push(Violation { index, kind });
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            push(None, ViolationKind::DepthOutOfRange);
        }
        if self.nodes.is_empty() {
            push(None, ViolationKind::MissingRoot);
            return ValidationReport { violations: out };
        }

        let n_nodes = self.nodes.len() as u64;
        let n_attrs = self.attributes.len() as u64;
        // per-node structural checks; `followable` marks nodes whose children can be walked
        let mut followable = vec![true; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            let idx = Some(i as u32);
            if node.leaf_mask & !node.valid_mask != 0 {
                push(idx, ViolationKind::LeafNotValid);
                followable[i] = false;
            }
            let inner = node.node_mask().count_ones() as u64;
            if inner > 0 {
                if node.child_base as u64 + inner > n_nodes {
                    push(idx, ViolationKind::ChildOutOfRange);
                    followable[i] = false;
                } else if node.child_base as u64 <= i as u64 {
                    push(idx, ViolationKind::NotTopological);
                    followable[i] = false;
                }
            }
            let leaves = node.voxel_mask().count_ones() as u64;
            if leaves > 0 && node.attr_base as u64 + leaves > n_attrs {
                push(idx, ViolationKind::AttributeOutOfRange);
                followable[i] = false;
            }
            if i > 0 && node.valid_mask == 0 {
                push(idx, ViolationKind::EmptySubtree);
            }
        }

        // walk from the root to check levels, sharing and reachability
        let mut level_of: Vec<Option<u32>> = vec![None; self.nodes.len()];
        let mut attr_refs = vec![0u32; self.attributes.len()];
        let mut queue = VecDeque::from([(0u32, 0u32)]);
        level_of[0] = Some(0);
        while let Some((i, level)) = queue.pop_front() {
            let node = self.nodes[i as usize];
            let idx = Some(i);
            let at_last = level + 1 >= self.depth;
            if !followable[i as usize] {
                continue;
            }
            if node.voxel_mask() != 0 && !at_last {
                push(idx, ViolationKind::LeafAtWrongDepth);
            }
            if node.node_mask() != 0 && at_last {
                push(idx, ViolationKind::NodeAtLeafDepth);
                continue;
            }
            for k in 0..node.voxel_mask().count_ones() {
                attr_refs[(node.attr_base + k) as usize] += 1;
            }
            for k in 0..node.node_mask().count_ones() {
                let child = node.child_base + k;
                match level_of[child as usize] {
                    Some(_) => push(Some(child), ViolationKind::SharedNode),
                    None => {
                        level_of[child as usize] = Some(level + 1);
                        queue.push_back((child, level + 1));
                    }
                }
            }
        }
        for (i, level) in level_of.iter().enumerate() {
            if level.is_none() {
                push(Some(i as u32), ViolationKind::UnreachableNode);
            }
        }
        for (i, &refs) in attr_refs.iter().enumerate() {
            match refs {
                0 => push(Some(i as u32), ViolationKind::AttributeNotReferenced),
                1 => {}
                _ => push(Some(i as u32), ViolationKind::SharedAttribute),
            }
        }
        ValidationReport { violations: out }
    }

    pub fn stats(&self) -> SvoStats {
        let leaf_count = self
            .nodes
            .iter()
            .map(|n| n.voxel_mask().count_ones() as u64)
            .sum::<u64>();
        let cells = 8f64.powi(self.depth as i32);
        SvoStats {
            node_count: self.nodes.len() as u64,
            leaf_count,
            byte_size: self.serialized_len() as u64,
            depth: self.depth,
            fill_ratio: leaf_count as f64 / cells,
        }
    }

    pub fn serialized_len(&self) -> usize {
        HEADER_BYTES + NODE_BYTES * self.nodes.len() + ATTR_BYTES * self.attributes.len()
    }

    /// Every leaf voxel as `(x, y, z)` with its color, found by walking the tree.
    pub fn leaves(&self) -> Vec<([u32; 3], VoxelAttribute)> {
        let mut out = Vec::with_capacity(self.attributes.len());
        let mut stack = vec![(0u32, [0u32; 3])];
        while let Some((i, base)) = stack.pop() {
            for octant in 0..8u8 {
                let coord = [
                    base[0] * 2 + (octant >> 2 & 1) as u32,
                    base[1] * 2 + (octant >> 1 & 1) as u32,
                    base[2] * 2 + (octant & 1) as u32,
                ];
                match self.node_child(i, octant) {
                    ChildRef::Absent => {}
                    ChildRef::Leaf(a) => out.push((coord, self.attributes[a as usize])),
                    ChildRef::Node(c) => stack.push((c, coord)),
                }
            }
        }
        out
    }

    /// Little-endian `.svo` encoding.
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        out.extend_from_slice(&MAGIC);
        for v in [
            FORMAT_VERSION,
            self.depth,
            self.nodes.len() as u32,
            self.attributes.len() as u32,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for n in &self.nodes {
            out.extend_from_slice(&n.child_base.to_le_bytes());
            out.extend_from_slice(&n.attr_base.to_le_bytes());
            out.extend_from_slice(&[n.valid_mask, n.leaf_mask, 0, 0]);
        }
        for a in &self.attributes {
            out.extend_from_slice(&[a.r, a.g, a.b, a.a]);
        }
        out
    }

    pub fn deserialize(bytes: &[u8]) -> Result<Self, FormatError> {
        let actual = bytes.len() as u64;
        if bytes.len() < HEADER_BYTES {
            if bytes.len() >= 4 && bytes[..4] != MAGIC {
                return Err(FormatError::BadMagic(bytes[..4].try_into().unwrap()));
            }
            return Err(FormatError::Truncated {
                expected: HEADER_BYTES as u64,
                actual,
            });
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = word(4);
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let depth = word(8);
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(FormatError::DepthOutOfRange(depth));
        }
        let node_count = word(12) as u64;
        let attr_count = word(16) as u64;
        let expected =
            HEADER_BYTES as u64 + NODE_BYTES as u64 * node_count + ATTR_BYTES as u64 * attr_count;
        if actual < expected {
            return Err(FormatError::Truncated { expected, actual });
        }
        if actual > expected {
            return Err(FormatError::TrailingBytes {
                extra: actual - expected,
            });
        }

        let mut nodes = Vec::with_capacity(node_count as usize);
        for (i, rec) in bytes[HEADER_BYTES..]
            .chunks_exact(NODE_BYTES)
            .take(node_count as usize)
            .enumerate()
        {
            let reserved = u16::from_le_bytes([rec[10], rec[11]]);
            if reserved != 0 {
                return Err(FormatError::ReservedNonZero {
                    node: i as u32,
                    value: reserved,
                });
            }
            nodes.push(SvoNode {
                child_base: u32::from_le_bytes(rec[0..4].try_into().unwrap()),
                attr_base: u32::from_le_bytes(rec[4..8].try_into().unwrap()),
                valid_mask: rec[8],
                leaf_mask: rec[9],
            });
        }
        let attr_start = HEADER_BYTES + NODE_BYTES * node_count as usize;
        let attributes = bytes[attr_start..]
            .chunks_exact(ATTR_BYTES)
            .map(|c| VoxelAttribute {
                r: c[0],
                g: c[1],
                b: c[2],
                a: c[3],
            })
            .collect();

        let model = Self {
            depth,
            nodes,
            attributes,
        };
        let report = model.validate();
        if let Some(v) = report.violations.iter().find(|v| {
            matches!(
                v.kind,
                ViolationKind::ChildOutOfRange | ViolationKind::AttributeOutOfRange
            )
        }) {
            return Err(FormatError::IndexOutOfRange {
                node: v.index.unwrap_or(0),
            });
        }
        if let Some(&v) = report.violations.first() {
            return Err(FormatError::InvalidStructure(v));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{gen_primitive, ColorMode, PrimitiveKind};

    fn grid(depth: u32, voxels: &[[u32; 3]]) -> VoxelGrid {
        let mut g = VoxelGrid::with_depth(depth).unwrap();
        for &[x, y, z] in voxels {
            g.set(x, y, z, true);
        }
        g
    }

    /// Counts nodes by recursively subdividing the dense grid.
    fn reference_node_count(g: &VoxelGrid, origin: [u32; 3], size: u32) -> usize {
        let occupied = (0..size).any(|dx| {
            (0..size)
                .any(|dy| (0..size).any(|dz| g.get(origin[0] + dx, origin[1] + dy, origin[2] + dz)))
        });
        if !occupied || size == 1 {
            return 0;
        }
        if size == 2 {
            return 1;
        }
        let h = size / 2;
        let mut n = 1;
        for o in 0..8u32 {
            let sub = [
                origin[0] + (o >> 2 & 1) * h,
                origin[1] + (o >> 1 & 1) * h,
                origin[2] + (o & 1) * h,
            ];
            n += reference_node_count(g, sub, h);
        }
        n
    }

    #[test]
    fn empty_grid_gives_bare_root() {
        let m = SvoModel::build_from_grid(&VoxelGrid::with_depth(3).unwrap(), 3).unwrap();
        assert_eq!(m.nodes.len(), 1);
        assert_eq!(m.nodes[0].valid_mask, 0);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn full_depth_one() {
        let g = gen_primitive(PrimitiveKind::BoxShell, 1, ColorMode::default()).unwrap();
        let m = SvoModel::build_from_grid(&g, 1).unwrap();
        assert_eq!(m.nodes.len(), 1);
        assert_eq!(m.nodes[0].valid_mask, 0xFF);
        assert_eq!(m.nodes[0].leaf_mask, 0xFF);
        assert_eq!(m.attributes.len(), 8);
    }

    #[test]
    fn single_voxel_chain() {
        let g = grid(3, &[[0, 0, 0]]);
        let m = SvoModel::build_from_grid(&g, 3).unwrap();
        assert_eq!(reference_node_count(&g, [0; 3], 8), 3);
        assert_eq!(m.nodes.len(), 3);
        assert_eq!(m.attributes.len(), 1);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn node_count_matches_subdivision_reference() {
        for kind in [
            PrimitiveKind::Sphere,
            PrimitiveKind::Checker,
            PrimitiveKind::Menger,
        ] {
            let g = gen_primitive(kind, 2, ColorMode::default()).unwrap();
            let d = g.depth();
            let m = SvoModel::build_from_grid(&g, d).unwrap();
            assert_eq!(
                m.nodes.len(),
                reference_node_count(&g, [0; 3], g.resolution()),
                "{kind}"
            );
        }
    }

    #[test]
    fn build_rejects_mismatch() {
        let g = VoxelGrid::with_depth(3).unwrap();
        assert_eq!(
            SvoModel::build_from_grid(&g, 2),
            Err(BuildError::ResolutionMismatch {
                resolution: 8,
                depth: 2
            })
        );
        assert_eq!(
            SvoModel::build_from_grid(&g, 0),
            Err(BuildError::DepthOutOfRange(0))
        );
        assert_eq!(
            SvoModel::build_from_grid(&g, 17),
            Err(BuildError::DepthOutOfRange(17))
        );
    }

    fn one_node(valid: u8, leaf: u8) -> SvoModel {
        SvoModel {
            depth: 2,
            nodes: vec![SvoNode {
                child_base: 10,
                attr_base: 20,
                valid_mask: valid,
                leaf_mask: leaf,
            }],
            attributes: Vec::new(),
        }
    }

    #[test]
    fn node_child_addressing() {
        let m = one_node(0x00, 0x00);
        for o in 0..8 {
            assert_eq!(m.node_child(0, o), ChildRef::Absent);
        }
        let m = one_node(0xFF, 0x00);
        for o in 0..8 {
            assert_eq!(m.node_child(0, o), ChildRef::Node(10 + o as u32));
        }
        let m = one_node(0b1010_0100, 0b0010_0000);
        // popcount-rank oracle written out over the mask bits
        let rank_below = |mask: u8, o: u8| (0..o).filter(|b| mask >> b & 1 == 1).count() as u32;
        assert_eq!(rank_below(0b0010_0000, 5), 0);
        assert_eq!(rank_below(0b1000_0100, 7), 1);
        assert_eq!(m.node_child(0, 5), ChildRef::Leaf(20));
        assert_eq!(m.node_child(0, 7), ChildRef::Node(11));
        assert_eq!(m.node_child(0, 2), ChildRef::Node(10));
        assert_eq!(m.node_child(0, 0), ChildRef::Absent);
    }

    #[test]
    fn validate_reports_constructed_violations() {
        let fresh = SvoModel::build_from_grid(
            &gen_primitive(PrimitiveKind::Sphere, 3, ColorMode::default()).unwrap(),
            3,
        )
        .unwrap();
        assert!(fresh.validate().is_valid());

        let mut bad = fresh.clone();
        bad.nodes[0].valid_mask &= 0xFE;
        bad.nodes[0].leaf_mask = 0x01;
        let report = bad.validate();
        assert!(report.violations.contains(&Violation {
            index: Some(0),
            kind: ViolationKind::LeafNotValid
        }));
        assert_eq!(report.violations[0].to_string(), "leaf not valid at 0");

        let mut bad = fresh.clone();
        bad.nodes[0].child_base = bad.nodes.len() as u32;
        assert!(bad.validate().violations.contains(&Violation {
            index: Some(0),
            kind: ViolationKind::ChildOutOfRange
        }));
    }

    #[test]
    fn stats_examples() {
        let s = SvoModel::empty(3).stats();
        assert_eq!((s.node_count, s.leaf_count), (1, 0));
        let full = gen_primitive(PrimitiveKind::BoxShell, 1, ColorMode::default()).unwrap();
        let s = SvoModel::build_from_grid(&full, 1).unwrap().stats();
        assert_eq!((s.node_count, s.leaf_count), (1, 8));
        assert_eq!(s.fill_ratio, 1.0);

        let sponge = gen_primitive(PrimitiveKind::Menger, 3, ColorMode::default()).unwrap();
        let m = SvoModel::build_from_grid(&sponge, sponge.depth()).unwrap();
        let s = m.stats();
        assert_eq!(s.leaf_count, 20 * 20 * 20);
        assert_eq!(s.byte_size, m.serialize().len() as u64);
    }

    #[test]
    fn leaves_recover_grid() {
        let g = gen_primitive(PrimitiveKind::Sphere, 4, ColorMode::HeightPalette).unwrap();
        let m = SvoModel::build_from_grid(&g, 4).unwrap();
        let mut got: Vec<_> = m.leaves();
        got.sort_by_key(|l| l.0);
        let want: Vec<_> = g
            .iter_set()
            .map(|c| (c, g.color_at(c[0], c[1], c[2])))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn serialize_examples() {
        let g = gen_primitive(PrimitiveKind::Checker, 3, ColorMode::default()).unwrap();
        let m = SvoModel::build_from_grid(&g, 3).unwrap();
        let bytes = m.serialize();
        assert_eq!(&bytes[..4], b"SVOA");
        let back = SvoModel::deserialize(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.serialize(), bytes);

        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(
            SvoModel::deserialize(&wrong),
            Err(FormatError::BadMagic(_))
        ));
    }

    #[test]
    fn empty_model_layout() {
        let bytes = SvoModel::empty(1).serialize();
        assert_eq!(bytes.len(), HEADER_BYTES + NODE_BYTES);
        assert_eq!(
            bytes,
            [
                b"SVOA".as_slice(),
                &1u32.to_le_bytes(),
                &1u32.to_le_bytes(),
                &1u32.to_le_bytes(),
                &0u32.to_le_bytes(),
                &[0u8; 12],
            ]
            .concat()
        );
    }
}
