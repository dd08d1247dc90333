//! Built-in scenes used when no scene file is given, and by the benchmarks.

use std::sync::Arc;

use voxanim_core::scene::{AnimationTrack, Camera, Keyframe, Scene, SceneObject};
use voxanim_core::{
    gen_primitive, ColorMode, PrimitiveKind, Quaternion, RigidTransform, SvoModel, Vec3,
};

fn model(kind: PrimitiveKind, depth: u32, colors: ColorMode) -> Arc<SvoModel> {
    let grid = gen_primitive(kind, depth, colors).expect("demo primitive parameters are valid");
    Arc::new(SvoModel::build_from_grid(&grid, grid.depth()).expect("grid depth in range"))
}

fn about_y(deg: f64) -> Quaternion {
    Quaternion::from_axis_angle(Vec3::Y, deg.to_radians()).expect("unit axis")
}

fn camera(width: u32, height: u32) -> Camera {
    Camera::look_at(
        Vec3::new(0.0, 1.5, 13.0),
        Vec3::new(0.0, 0.3, 0.0),
        Vec3::Y,
        50.0,
        width,
        height,
    )
    .expect("demo camera is valid")
}

fn place(scene: &mut Scene, id: u32, model: Arc<SvoModel>, at: Vec3, rot: Quaternion, scale: f64) {
    let tf = RigidTransform::new(
        rot.to_rotation().expect("unit quaternion"),
        at,
        Vec3::splat(scale),
    )
    .expect("demo transform is valid");
    scene
        .add_object(SceneObject::new(id, model, tf))
        .expect("demo ids are unique");
}

/// Four objects under a fixed camera: a spinning Menger sponge and a
/// sliding sphere are animated over four seconds, a box shell and a second
/// sphere stay put.
pub fn demo_scene(width: u32, height: u32) -> Scene {
    let mut scene = Scene::new(camera(width, height));
    scene.background = [24, 28, 36];

    let sponge_at = Vec3::new(-3.2, 0.6, 0.0);
    place(
        &mut scene,
        0,
        model(PrimitiveKind::Menger, 3, ColorMode::HeightPalette),
        sponge_at,
        Quaternion::IDENTITY,
        3.2,
    );
    let ball = model(PrimitiveKind::Sphere, 6, ColorMode::PositionHash);
    let ball_from = Vec3::new(0.5, -1.6, 2.5);
    place(
        &mut scene,
        1,
        ball.clone(),
        ball_from,
        Quaternion::IDENTITY,
        2.2,
    );
    place(
        &mut scene,
        2,
        model(
            PrimitiveKind::BoxShell,
            5,
            "#c8a040".parse().expect("valid color"),
        ),
        Vec3::new(3.4, 1.0, -2.0),
        about_y(30.0),
        3.0,
    );
    place(
        &mut scene,
        3,
        ball,
        Vec3::new(0.2, 2.6, -4.0),
        Quaternion::IDENTITY,
        3.0,
    );

    let spin: Vec<Keyframe> = [0.0, 120.0, 240.0, 359.0]
        .iter()
        .enumerate()
        .map(|(i, &deg)| {
            Keyframe::new(
                i as f64 * 4.0 / 3.0,
                sponge_at,
                about_y(deg),
                Vec3::splat(3.2),
            )
        })
        .collect();
    scene
        .add_track(AnimationTrack::new(0, spin).expect("sorted keys"))
        .expect("object exists");
    let slide = vec![
        Keyframe::new(0.0, ball_from, Quaternion::IDENTITY, Vec3::splat(2.2)),
        Keyframe::new(
            2.0,
            ball_from + Vec3::new(2.2, 0.4, 0.0),
            about_y(90.0),
            Vec3::splat(2.2),
        ),
        Keyframe::new(4.0, ball_from, about_y(180.0), Vec3::splat(2.2)),
    ];
    scene
        .add_track(AnimationTrack::new(1, slide).expect("sorted keys"))
        .expect("object exists");
    scene
}

/// One spinning sponge filling most of the view.
pub fn single_object_scene(width: u32, height: u32) -> Scene {
    let mut scene = Scene::new(camera(width, height));
    scene.background = [24, 28, 36];
    let at = Vec3::new(0.0, 0.3, 0.0);
    place(
        &mut scene,
        0,
        model(PrimitiveKind::Menger, 3, ColorMode::HeightPalette),
        at,
        Quaternion::IDENTITY,
        5.0,
    );
    let spin: Vec<Keyframe> = [0.0, 120.0, 240.0, 359.0]
        .iter()
        .enumerate()
        .map(|(i, &deg)| Keyframe::new(i as f64 * 4.0 / 3.0, at, about_y(deg), Vec3::splat(5.0)))
        .collect();
    scene
        .add_track(AnimationTrack::new(0, spin).expect("sorted keys"))
        .expect("object exists");
    scene
}
