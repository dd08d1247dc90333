//! Top-down parametric octree traversal.
//!
//! The octree occupies the box `[-h, +h]` per axis in the model's local
//! frame, where `h` is half the object's scale. Each node carries the ray
//! parameters at which the ray crosses its entry, middle and exit planes;
//! children are visited in the order the ray passes through them, so the
//! first occupied leaf reached is the nearest one.
//!
//! Axes where the ray travels in the negative direction are mirrored: the
//! traversal walks octants as if the direction were positive and XORs the
//! mirror mask back in whenever it addresses a real child.
//!
//! A zero direction component has no finite plane crossings. Its parameters
//! are `+inf` for planes above the origin and `-inf` otherwise, so a ray lying
//! exactly on a plane belongs to the upper side.

use arrayvec::ArrayVec;

use crate::math::{MathError, Ray, Vec3};
use crate::svo::{ChildRef, SvoModel, VoxelAttribute, MAX_DEPTH};

/// Returned by [`next_node`] once the ray leaves the parent node.
pub const EXIT: u8 = 8;

const AXIS_BIT: [u8; 3] = [4, 2, 1];

/// Octree extent in local units, centered on the local origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OctreeBounds {
    half_extent: Vec3,
}

impl OctreeBounds {
    pub fn new(half_extent: Vec3) -> Result<Self, MathError> {
        let ok = half_extent.is_finite()
            && half_extent.x > 0.0
            && half_extent.y > 0.0
            && half_extent.z > 0.0;
        if !ok {
            return Err(MathError::InvalidScale(half_extent.to_array()));
        }
        Ok(Self { half_extent })
    }

    /// Bounds for an object of the given (valid, positive) scale.
    pub fn from_scale(scale: Vec3) -> Self {
        Self {
            half_extent: scale * 0.5,
        }
    }

    pub fn half_extent(&self) -> Vec3 {
        self.half_extent
    }
}

/// Slab parameters of a ray against the root box, in mirrored space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxParams {
    /// Entry parameter per axis.
    pub t0: [f64; 3],
    /// Exit parameter per axis.
    pub t1: [f64; 3],
    /// Octant bits of the mirrored axes.
    pub mirror: u8,
}

impl BoxParams {
    pub fn t_enter(&self) -> f64 {
        max3(self.t0)
    }

    pub fn t_exit(&self) -> f64 {
        min3(self.t1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalHit {
    /// Entry parameter of the hit leaf, clamped to 0.
    pub t_hit: f64,
    /// Root box entry and exit.
    pub t_enter: f64,
    pub t_exit: f64,
    pub attribute: VoxelAttribute,
    pub normal_local: Vec3,
    /// Full-depth integer coordinate of the hit leaf.
    pub voxel: [u32; 3],
    /// Real octants from the root down to the leaf.
    pub leaf_path: ArrayVec<u8, { MAX_DEPTH as usize }>,
}

/// A leaf the ray passes through, as reported by [`walk`].
#[derive(Debug, Clone, PartialEq)]
pub struct LeafVisit {
    pub voxel: [u32; 3],
    pub attribute_index: u32,
    /// Unclamped entry and exit parameters of the leaf cell.
    pub t_enter: f64,
    pub t_exit: f64,
    /// Axis of the entry plane (0 = x, 1 = y, 2 = z).
    pub entry_axis: usize,
    pub path: ArrayVec<u8, { MAX_DEPTH as usize }>,
}

fn max3(v: [f64; 3]) -> f64 {
    v[0].max(v[1]).max(v[2])
}

fn min3(v: [f64; 3]) -> f64 {
    v[0].min(v[1]).min(v[2])
}

/// Axis of the largest value, ties going to x, then y.
fn argmax3(v: [f64; 3]) -> usize {
    if v[0] >= v[1] && v[0] >= v[2] {
        0
    } else if v[1] >= v[2] {
        1
    } else {
        2
    }
}

/// Axis of the smallest value, ties going to x, then y.
fn argmin3(v: [f64; 3]) -> usize {
    if v[0] <= v[1] && v[0] <= v[2] {
        0
    } else if v[1] <= v[2] {
        1
    } else {
        2
    }
}

/// Ray parameter at which coordinate `origin + t * dir` reaches `plane`.
fn plane_param(plane: f64, origin: f64, dir: f64) -> f64 {
    if dir == 0.0 {
        if plane > origin {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (plane - origin) / dir
    }
}

/// Slab test against the root box. Returns `None` when the ray misses the
/// box or the box lies entirely behind the origin.
pub fn ray_box_params(ray: &Ray, bounds: &OctreeBounds) -> Option<BoxParams> {
    let h = bounds.half_extent.to_array();
    let o = ray.origin.to_array();
    let d = ray.direction.to_array();
    let mut params = BoxParams {
        t0: [0.0; 3],
        t1: [0.0; 3],
        mirror: 0,
    };
    for a in 0..3 {
        // reflecting o and d about the center swaps which face is entered first
        let (entry, exit) = if d[a] < 0.0 {
            params.mirror |= AXIS_BIT[a];
            (h[a], -h[a])
        } else {
            (-h[a], h[a])
        };
        params.t0[a] = plane_param(entry, o[a], d[a]);
        params.t1[a] = plane_param(exit, o[a], d[a]);
    }
    let (enter, exit) = (params.t_enter(), params.t_exit());
    if enter >= exit || exit < 0.0 {
        None
    } else {
        Some(params)
    }
}

/// First child octant (mirrored space) entered by the ray, from the node's
/// entry parameters `t0` and midplane parameters `tm`.
pub fn first_node(t0: [f64; 3], tm: [f64; 3]) -> u8 {
    let entry = argmax3(t0);
    let mut octant = 0;
    for a in 0..3 {
        if a != entry && tm[a] < t0[entry] {
            octant |= AXIS_BIT[a];
        }
    }
    octant
}

/// Octant entered after leaving `current` through the plane of its smallest
/// exit parameter, or [`EXIT`] if that plane is the parent's boundary.
pub fn next_node(t1: [f64; 3], current: u8) -> u8 {
    let bit = AXIS_BIT[argmin3(t1)];
    if current & bit != 0 {
        EXIT
    } else {
        current | bit
    }
}

#[derive(Clone, Copy)]
struct Frame {
    node: u32,
    level: u32,
    /// Real (unmirrored) integer coordinate of this node at its level.
    coord: [u32; 3],
    t0: [f64; 3],
    t1: [f64; 3],
    tm: [f64; 3],
    /// Next child to visit, mirrored space, or `EXIT`.
    pending: u8,
    /// Real octant of the child most recently taken.
    taken: u8,
}

/// Visits, front to back, every leaf whose cell overlaps the ray for a
/// positive length of `t >= 0`. `on_leaf` returns `false` to stop early.
///
/// Iterative, with a stack of at most `MAX_DEPTH` frames. The model must be
/// valid (see [`SvoModel::validate`]).
pub fn walk<F>(
    model: &SvoModel,
    ray: &Ray,
    bounds: &OctreeBounds,
    mut on_leaf: F,
) -> Option<BoxParams>
where
    F: FnMut(&LeafVisit) -> bool,
{
    let params = ray_box_params(ray, bounds)?;
    let h = bounds.half_extent.to_array();
    let o = ray.origin.to_array();
    let d = ray.direction.to_array();
    let mirror = params.mirror;

    let midplanes = |level: u32, coord: [u32; 3]| {
        let mut tm = [0.0; 3];
        for a in 0..3 {
            let half_cell = h[a] / (1u64 << level) as f64;
            let plane = -h[a] + (2 * coord[a] + 1) as f64 * half_cell;
            tm[a] = plane_param(plane, o[a], d[a]);
        }
        tm
    };

    let mut stack: ArrayVec<Frame, { MAX_DEPTH as usize }> = ArrayVec::new();
    let tm = midplanes(0, [0; 3]);
    stack.push(Frame {
        node: 0,
        level: 0,
        coord: [0; 3],
        t0: params.t0,
        t1: params.t1,
        tm,
        pending: first_node(params.t0, tm),
        taken: 0,
    });

    while let Some(top) = stack.last_mut() {
        if top.pending == EXIT {
            stack.pop();
            continue;
        }
        let child = top.pending;
        let mut ct0 = [0.0; 3];
        let mut ct1 = [0.0; 3];
        for a in 0..3 {
            if child & AXIS_BIT[a] != 0 {
                ct0[a] = top.tm[a];
                ct1[a] = top.t1[a];
            } else {
                ct0[a] = top.t0[a];
                ct1[a] = top.tm[a];
            }
        }
        top.pending = next_node(ct1, child);

        let (enter, exit) = (max3(ct0), min3(ct1));
        if enter.max(0.0) >= exit {
            // behind the origin, or only grazed
            continue;
        }
        let real = child ^ mirror;
        top.taken = real;
        let coord = [
            top.coord[0] * 2 + (real >> 2 & 1) as u32,
            top.coord[1] * 2 + (real >> 1 & 1) as u32,
            top.coord[2] * 2 + (real & 1) as u32,
        ];
        let (node, level) = (top.node, top.level);
        match model.node_child(node, real) {
            ChildRef::Absent => {}
            ChildRef::Leaf(attribute_index) => {
                let visit = LeafVisit {
                    voxel: coord,
                    attribute_index,
                    t_enter: enter,
                    t_exit: exit,
                    entry_axis: argmax3(ct0),
                    path: stack.iter().map(|f| f.taken).collect(),
                };
                if !on_leaf(&visit) {
                    break;
                }
            }
            ChildRef::Node(index) => {
                let tm = midplanes(level + 1, coord);
                let frame = Frame {
                    node: index,
                    level: level + 1,
                    coord,
                    t0: ct0,
                    t1: ct1,
                    tm,
                    pending: first_node(ct0, tm),
                    taken: 0,
                };
                debug_assert!(!stack.is_full(), "model deeper than MAX_DEPTH");
                if stack.try_push(frame).is_err() {
                    continue;
                }
            }
        }
    }
    Some(params)
}

/// Nearest leaf hit of a local-space ray, or `None` on a miss.
pub fn traverse(model: &SvoModel, ray: &Ray, bounds: &OctreeBounds) -> Option<TraversalHit> {
    let mut first = None;
    let params = walk(model, ray, bounds, |leaf| {
        first = Some(leaf.clone());
        false
    })?;
    let leaf = first?;
    let mut normal = [0.0; 3];
    let axis = leaf.entry_axis;
    normal[axis] = if ray.direction[axis] > 0.0 { -1.0 } else { 1.0 };
    Some(TraversalHit {
        t_hit: leaf.t_enter.max(0.0),
        t_enter: params.t_enter(),
        t_exit: params.t_exit(),
        attribute: model.attributes[leaf.attribute_index as usize],
        normal_local: Vec3::from_array(normal),
        voxel: leaf.voxel,
        leaf_path: leaf.path,
    })
}

/// All leaves pierced by the ray, in visiting order.
pub fn pierced_leaves(model: &SvoModel, ray: &Ray, bounds: &OctreeBounds) -> Vec<LeafVisit> {
    let mut out = Vec::new();
    walk(model, ray, bounds, |leaf| {
        out.push(leaf.clone());
        true
    });
    out
}
