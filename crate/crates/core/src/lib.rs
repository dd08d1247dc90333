//! Ray tracing of rigid-body animated sparse voxel octrees.
//!
//! Models stay static in their own local frame; animation only changes each
//! object's [`RigidTransform`], and rays are moved into the local frame
//! before octree traversal.

pub mod ingest;
pub mod math;
pub mod render;
pub mod scene;
pub mod svo;
pub mod traversal;

pub use ingest::{gen_primitive, parse_binvox, ColorMode, IngestError, PrimitiveKind, VoxelGrid};
pub use math::{Mat3, MathError, Quaternion, Ray, RigidTransform, Vec3};
pub use render::{
    generate_primary_ray, render_frame, FrameStats, HitBuffer, HitKind, HitRecord, Image,
    RenderError, RenderOptions,
};
pub use scene::{
    load_scene, AnimationTrack, BoundingSphere, Camera, Keyframe, Scene, SceneError, SceneObject,
};
pub use svo::{BuildError, FormatError, SvoModel, SvoNode, SvoStats, VoxelAttribute};
pub use traversal::{traverse, OctreeBounds, TraversalHit};
