//! Shared fixtures for the criterion benchmarks.

use voxanim_core::{gen_primitive, ColorMode, OctreeBounds, PrimitiveKind, Ray, SvoModel, Vec3};

pub fn primitive_model(kind: PrimitiveKind, depth: u32) -> SvoModel {
    let grid = gen_primitive(kind, depth, ColorMode::PositionHash).expect("valid primitive");
    SvoModel::build_from_grid(&grid, grid.depth()).expect("valid depth")
}

pub fn unit_bounds() -> OctreeBounds {
    OctreeBounds::from_scale(Vec3::ONE)
}

/// `n * n` rays from a point outside the unit cube, fanned across it.
pub fn ray_fan(n: u32) -> Vec<Ray> {
    let origin = Vec3::new(1.7, 1.3, 2.1);
    let mut rays = Vec::with_capacity((n * n) as usize);
    for i in 0..n {
        for j in 0..n {
            let u = (i as f64 + 0.5) / n as f64 - 0.5;
            let v = (j as f64 + 0.5) / n as f64 - 0.5;
            let target = Vec3::new(u * 1.2, v * 1.2, 0.3 * (u - v));
            rays.push(Ray::new(origin, target - origin).expect("origin is off the fan"));
        }
    }
    rays
}
