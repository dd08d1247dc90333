//! Shared test helpers: a dense-grid DDA oracle and random fixtures.
#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use voxanim_core::scene::{Camera, Scene, SceneObject};
use voxanim_core::{Quaternion, Ray, RigidTransform, SvoModel, Vec3, VoxelGrid};

/// First occupied voxel along a local-space ray through a dense grid
/// spanning `[-h, h]`, by Amanatides-Woo stepping. Plane crossings are
/// recomputed from the grid lines at every step rather than accumulated.
pub fn dda_first_hit(grid: &VoxelGrid, ray: &Ray, h: Vec3) -> Option<([u32; 3], f64)> {
    let res = grid.resolution() as i64;
    let o = ray.origin.to_array();
    let d = ray.direction.to_array();
    let h = h.to_array();
    let cell: Vec<f64> = (0..3).map(|a| 2.0 * h[a] / res as f64).collect();

    // slab test
    let (mut t_in, mut t_out) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < -h[a] || o[a] >= h[a] {
                return None;
            }
            continue;
        }
        let ta = (-h[a] - o[a]) / d[a];
        let tb = (h[a] - o[a]) / d[a];
        t_in = t_in.max(ta.min(tb));
        t_out = t_out.min(ta.max(tb));
    }
    let start = t_in.max(0.0);
    if start >= t_out {
        return None;
    }

    // voxel containing the midpoint of the first tiny step, so a start on
    // a boundary picks the cell the ray moves into
    let mut v = [0i64; 3];
    let probe = start + (t_out - start).min(1e-9);
    for a in 0..3 {
        let u = (o[a] + probe * d[a] + h[a]) / cell[a];
        v[a] = (u.floor() as i64).clamp(0, res - 1);
    }
    let step: Vec<i64> = d.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect();
    let mut t_enter = start;
    loop {
        if grid.get(v[0] as u32, v[1] as u32, v[2] as u32) {
            return Some(([v[0] as u32, v[1] as u32, v[2] as u32], t_enter));
        }
        let mut next = [f64::INFINITY; 3];
        for a in 0..3 {
            if d[a] != 0.0 {
                let line = if d[a] > 0.0 { v[a] + 1 } else { v[a] };
                next[a] = (-h[a] + line as f64 * cell[a] - o[a]) / d[a];
            }
        }
        let axis = (0..3).min_by(|&a, &b| next[a].total_cmp(&next[b])).unwrap();
        if next[axis] >= t_out {
            return None;
        }
        t_enter = next[axis];
        v[axis] += step[axis];
        if !(0..res).contains(&v[axis]) {
            return None;
        }
    }
}

pub fn random_grid<R: Rng>(rng: &mut R, depth: u32) -> VoxelGrid {
    let mut grid = VoxelGrid::with_depth(depth).unwrap();
    let r = grid.resolution();
    let density = rng.gen_range(0.02..0.4);
    for x in 0..r {
        for y in 0..r {
            for z in 0..r {
                if rng.gen_bool(density) {
                    grid.set(x, y, z, true);
                }
            }
        }
    }
    grid
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let len = v.length();
        if len > 1e-3 && len <= 1.0 {
            return v * (1.0 / len);
        }
    }
}

pub fn random_rotation<R: Rng>(rng: &mut R) -> Quaternion {
    let angle = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    Quaternion::from_axis_angle(random_unit(rng), angle).unwrap()
}

pub fn random_transform<R: Rng>(rng: &mut R, spread: f64) -> RigidTransform {
    let translation = Vec3::new(
        rng.gen_range(-spread..spread),
        rng.gen_range(-spread..spread),
        rng.gen_range(-spread..spread),
    );
    let scale = Vec3::new(
        rng.gen_range(0.3..3.0),
        rng.gen_range(0.3..3.0),
        rng.gen_range(0.3..3.0),
    );
    RigidTransform::new(
        random_rotation(rng).to_rotation().unwrap(),
        translation,
        scale,
    )
    .unwrap()
}

/// Ray aimed at a random point near the box, from a random origin that is
/// sometimes inside it.
pub fn random_ray_near_box<R: Rng>(rng: &mut R, h: Vec3) -> Ray {
    let target = Vec3::new(
        rng.gen_range(-1.2..1.2) * h.x,
        rng.gen_range(-1.2..1.2) * h.y,
        rng.gen_range(-1.2..1.2) * h.z,
    );
    let origin = if rng.gen_bool(0.1) {
        Vec3::new(
            rng.gen_range(-1.0..1.0) * h.x,
            rng.gen_range(-1.0..1.0) * h.y,
            rng.gen_range(-1.0..1.0) * h.z,
        )
    } else {
        target + random_unit(rng) * (rng.gen_range(1.0..4.0) * h.length())
    };
    match Ray::new(origin, target - origin) {
        Ok(r) => r,
        Err(_) => Ray::new(origin, random_unit(rng)).unwrap(),
    }
}

pub fn random_scene<R: Rng>(rng: &mut R, objects: u32, depth: u32) -> Scene {
    let cam =
        Camera::look_at(Vec3::new(0.0, 0.0, 12.0), Vec3::ZERO, Vec3::Y, 60.0, 16, 12).unwrap();
    let mut scene = Scene::new(cam);
    for id in 0..objects {
        let grid = random_grid(rng, depth);
        let model = Arc::new(SvoModel::build_from_grid(&grid, depth).unwrap());
        scene
            .add_object(SceneObject::new(id, model, random_transform(rng, 4.0)))
            .unwrap();
    }
    scene
}
