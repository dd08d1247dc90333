//! Scene of independently transformed octree models.
//!
//! Each object's cube is centered on its local origin and spans
//! `[-s/2, +s/2]` per axis for scale `s`, so rotation pivots about the model
//! center and the bounding sphere center is just the translation.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::math::{Mat3, MathError, Quaternion, RigidTransform, Vec3};
use crate::svo::{FormatError, SvoModel};
use crate::traversal::OctreeBounds;

pub const DEFAULT_WIDTH: u32 = 640;
pub const DEFAULT_HEIGHT: u32 = 480;
pub const DEFAULT_FOV_DEG: f64 = 60.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model not found: {}", .0.display())]
    ModelNotFound(PathBuf),
    #[error("reading model {}: {source}", .path.display())]
    ModelIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("model {}: {source}", .path.display())]
    ModelInvalid { path: PathBuf, source: FormatError },
    #[error("{location}: unknown model name {name:?}")]
    UnknownModel { location: String, name: String },
    #[error("{location}: duplicate object id {id}")]
    DuplicateId { location: String, id: u32 },
    #[error("{location}: keyframe times must be strictly increasing")]
    UnsortedKeyframes { location: String },
    #[error("{location}: track has no keyframes")]
    EmptyTrack { location: String },
    #[error("{location}: track references unknown object {id}")]
    UnknownObject { location: String, id: u32 },
    #[error("{location}: bad rotation: {source}")]
    BadRotation { location: String, source: MathError },
    #[error("{location}: {source}")]
    BadTransform { location: String, source: MathError },
    #[error("camera: {0}")]
    BadCamera(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Sphere through the corners of the object's scaled cube. Depends only on
/// translation and scale, so it is unchanged by rotation.
pub fn bounding_sphere(transform: &RigidTransform) -> BoundingSphere {
    BoundingSphere {
        center: transform.translation,
        radius: 0.5 * transform.scale.length(),
    }
}

#[derive(Debug, Clone)]
pub struct SceneObject {
    pub id: u32,
    pub model: Arc<SvoModel>,
    transform: RigidTransform,
    sphere: BoundingSphere,
    /// Transform changed since the last `mark_clean`.
    pub dirty: bool,
}

impl SceneObject {
    pub fn new(id: u32, model: Arc<SvoModel>, transform: RigidTransform) -> Self {
        Self {
            id,
            model,
            sphere: bounding_sphere(&transform),
            transform,
            dirty: false,
        }
    }

    pub fn transform(&self) -> &RigidTransform {
        &self.transform
    }

    /// Replaces the transform; the object becomes dirty only if it changed.
    pub fn set_transform(&mut self, transform: RigidTransform) {
        if transform != self.transform {
            self.transform = transform;
            self.sphere = bounding_sphere(&transform);
            self.dirty = true;
        }
    }

    pub fn bounding_sphere(&self) -> BoundingSphere {
        self.sphere
    }

    pub fn bounds(&self) -> OctreeBounds {
        OctreeBounds::from_scale(self.transform.scale)
    }
}

/// Pinhole camera. `orientation` columns are the camera's right, up and
/// backward axes in world space; it looks along the negated third column.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub orientation: Mat3,
    pub vertical_fov_deg: f64,
    pub width: u32,
    pub height: u32,
    pub dirty: bool,
}

impl Camera {
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        up: Vec3,
        vertical_fov_deg: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, SceneError> {
        if !(vertical_fov_deg > 0.0 && vertical_fov_deg < 180.0) {
            return Err(SceneError::BadCamera(format!(
                "fov {vertical_fov_deg} outside (0, 180)"
            )));
        }
        if width == 0 || height == 0 {
            return Err(SceneError::BadCamera(format!(
                "resolution {width}x{height}"
            )));
        }
        let orientation = look_orientation(position, target, up)?;
        Ok(Self {
            position,
            orientation,
            vertical_fov_deg,
            width,
            height,
            dirty: true,
        })
    }

    pub fn forward(&self) -> Vec3 {
        -self.orientation.col(2)
    }

    pub fn set_pose(&mut self, position: Vec3, orientation: Mat3) {
        if position != self.position || orientation != self.orientation {
            self.position = position;
            self.orientation = orientation;
            self.dirty = true;
        }
    }

    pub fn set_resolution(&mut self, width: u32, height: u32) {
        if (width, height) != (self.width, self.height) {
            self.width = width;
            self.height = height;
            self.dirty = true;
        }
    }
}

fn look_orientation(position: Vec3, target: Vec3, up: Vec3) -> Result<Mat3, SceneError> {
    let forward = (target - position)
        .try_normalize()
        .ok_or_else(|| SceneError::BadCamera("look_at equals position".into()))?;
    let right = forward
        .cross(up)
        .try_normalize()
        .ok_or_else(|| SceneError::BadCamera("up is parallel to the view direction".into()))?;
    let true_up = right.cross(forward);
    Ok(Mat3::from_cols(right, true_up, -forward))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    pub time: f64,
    pub translation: Vec3,
    pub rotation: Quaternion,
    pub scale: Vec3,
}

impl Keyframe {
    pub fn new(time: f64, translation: Vec3, rotation: Quaternion, scale: Vec3) -> Self {
        Self {
            time,
            translation,
            rotation,
            scale,
        }
    }
}

/// Strictly increasing; NaN never is.
fn increasing(a: f64, b: f64) -> bool {
    a.partial_cmp(&b) == Some(std::cmp::Ordering::Less)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnimationTrack {
    object: u32,
    keys: Vec<Keyframe>,
}

impl AnimationTrack {
    /// Checks ordering and that every key yields a valid transform.
    pub fn new(object: u32, keys: Vec<Keyframe>) -> Result<Self, SceneError> {
        let location = format!("track for object {object}");
        if keys.is_empty() {
            return Err(SceneError::EmptyTrack { location });
        }
        if keys.windows(2).any(|w| !increasing(w[0].time, w[1].time)) {
            return Err(SceneError::UnsortedKeyframes { location });
        }
        for (i, k) in keys.iter().enumerate() {
            let rotation = k
                .rotation
                .to_rotation()
                .map_err(|source| SceneError::BadRotation {
                    location: format!("{location}, key {i}"),
                    source,
                })?;
            RigidTransform::new(rotation, k.translation, k.scale).map_err(|source| {
                SceneError::BadTransform {
                    location: format!("{location}, key {i}"),
                    source,
                }
            })?;
        }
        Ok(Self { object, keys })
    }

    pub fn object(&self) -> u32 {
        self.object
    }

    pub fn keys(&self) -> &[Keyframe] {
        &self.keys
    }

    /// Transform at `time`: linear translation and scale, shortest-arc
    /// normalized quaternion interpolation, clamped at both ends.
    pub fn sample(&self, time: f64) -> RigidTransform {
        let keys = &self.keys;
        let first = &keys[0];
        let last = &keys[keys.len() - 1];
        let (translation, rotation, scale) = if time <= first.time {
            (first.translation, first.rotation, first.scale)
        } else if time >= last.time {
            (last.translation, last.rotation, last.scale)
        } else {
            let i = keys.partition_point(|k| k.time <= time) - 1;
            let (a, b) = (&keys[i], &keys[i + 1]);
            let s = (time - a.time) / (b.time - a.time);
            let q = a.rotation.nlerp(b.rotation, s).unwrap_or(a.rotation);
            (
                a.translation.lerp(b.translation, s),
                q,
                a.scale.lerp(b.scale, s),
            )
        };
        RigidTransform {
            // validated in `new`; interpolants of unit quaternions stay well away from zero
            rotation: rotation.to_rotation().unwrap_or(Mat3::IDENTITY),
            translation,
            scale,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    /// Sorted by id.
    objects: Vec<SceneObject>,
    tracks: Vec<AnimationTrack>,
    pub camera: Camera,
    pub background: [u8; 3],
}

impl Scene {
    pub fn new(camera: Camera) -> Self {
        Self {
            objects: Vec::new(),
            tracks: Vec::new(),
            camera,
            background: [0, 0, 0],
        }
    }

    pub fn add_object(&mut self, object: SceneObject) -> Result<(), SceneError> {
        match self.objects.binary_search_by_key(&object.id, |o| o.id) {
            Ok(_) => Err(SceneError::DuplicateId {
                location: "objects".into(),
                id: object.id,
            }),
            Err(pos) => {
                self.objects.insert(pos, object);
                Ok(())
            }
        }
    }

    pub fn add_track(&mut self, track: AnimationTrack) -> Result<(), SceneError> {
        if self.object(track.object).is_none() {
            return Err(SceneError::UnknownObject {
                location: "tracks".into(),
                id: track.object,
            });
        }
        self.tracks.push(track);
        Ok(())
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn tracks(&self) -> &[AnimationTrack] {
        &self.tracks
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn object_mut(&mut self, id: u32) -> Option<&mut SceneObject> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &mut self.objects[i])
    }

    /// Applies every track at `time` (negative times clamp to 0). Objects
    /// whose transform changes become dirty; flags accumulate until
    /// [`Scene::mark_clean`].
    pub fn evaluate_animation(&mut self, time: f64) {
        let time = time.max(0.0);
        for track in &self.tracks {
            let tf = track.sample(time);
            if let Ok(i) = self.objects.binary_search_by_key(&track.object, |o| o.id) {
                self.objects[i].set_transform(tf);
            }
        }
    }

    pub fn mark_clean(&mut self) {
        for o in &mut self.objects {
            o.dirty = false;
        }
        self.camera.dirty = false;
    }

    pub fn any_dirty(&self) -> bool {
        self.camera.dirty || self.objects.iter().any(|o| o.dirty)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default)]
    models: BTreeMap<String, String>,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    tracks: Vec<TrackDoc>,
    #[serde(default)]
    camera: CameraDoc,
    #[serde(default)]
    background: [u8; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: u32,
    model: String,
    translation: Option<[f64; 3]>,
    rotation: Option<RotationDoc>,
    scale: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RotationDoc {
    AxisAngle { axis: [f64; 3], angle_deg: f64 },
    Quat { quat: [f64; 4] },
}

impl RotationDoc {
    fn to_quaternion(&self) -> Result<Quaternion, MathError> {
        match *self {
            RotationDoc::AxisAngle { axis, angle_deg } => {
                Quaternion::from_axis_angle(Vec3::from_array(axis), angle_deg.to_radians())
            }
            RotationDoc::Quat { quat: [w, x, y, z] } => Quaternion::new(w, x, y, z).normalize(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrackDoc {
    object: u32,
    keys: Vec<KeyDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyDoc {
    time: f64,
    translation: Option<[f64; 3]>,
    rotation: Option<RotationDoc>,
    scale: Option<[f64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CameraDoc {
    position: [f64; 3],
    look_at: [f64; 3],
    up: [f64; 3],
    fov_deg: f64,
}

impl Default for CameraDoc {
    fn default() -> Self {
        Self {
            position: [0.0, 0.0, 5.0],
            look_at: [0.0, 0.0, 0.0],
            up: [0.0, 1.0, 0.0],
            fov_deg: DEFAULT_FOV_DEG,
        }
    }
}

fn rotation_or_identity(
    doc: &Option<RotationDoc>,
    location: &str,
) -> Result<Quaternion, SceneError> {
    match doc {
        None => Ok(Quaternion::IDENTITY),
        Some(r) => r.to_quaternion().map_err(|source| SceneError::BadRotation {
            location: location.to_string(),
            source,
        }),
    }
}

/// Parses a scene document; model paths resolve against `base_dir`.
///
/// The camera starts dirty and at the default resolution; every object
/// starts clean at its authored transform.
pub fn load_scene(text: &str, base_dir: &Path) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(text)?;

    let mut models: HashMap<&str, Arc<SvoModel>> = HashMap::new();
    for (name, rel) in &doc.models {
        let path = base_dir.join(rel);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(SceneError::ModelNotFound(path))
            }
            Err(source) => return Err(SceneError::ModelIo { path, source }),
        };
        let model = SvoModel::deserialize(&bytes)
            .map_err(|source| SceneError::ModelInvalid { path, source })?;
        models.insert(name.as_str(), Arc::new(model));
    }

    let c = &doc.camera;
    let camera = Camera::look_at(
        Vec3::from_array(c.position),
        Vec3::from_array(c.look_at),
        Vec3::from_array(c.up),
        c.fov_deg,
        DEFAULT_WIDTH,
        DEFAULT_HEIGHT,
    )?;
    let mut scene = Scene::new(camera);
    scene.background = doc.background;

    for (i, o) in doc.objects.iter().enumerate() {
        let location = format!("objects[{i}]");
        let model =
            models
                .get(o.model.as_str())
                .cloned()
                .ok_or_else(|| SceneError::UnknownModel {
                    location: location.clone(),
                    name: o.model.clone(),
                })?;
        let q = rotation_or_identity(&o.rotation, &format!("{location}.rotation"))?;
        let rotation = q.to_rotation().map_err(|source| SceneError::BadRotation {
            location: format!("{location}.rotation"),
            source,
        })?;
        let transform = RigidTransform::new(
            rotation,
            Vec3::from_array(o.translation.unwrap_or([0.0; 3])),
            Vec3::from_array(o.scale.unwrap_or([1.0; 3])),
        )
        .map_err(|source| SceneError::BadTransform {
            location: location.clone(),
            source,
        })?;
        scene
            .add_object(SceneObject::new(o.id, model, transform))
            .map_err(|_| SceneError::DuplicateId { location, id: o.id })?;
    }

    for (i, t) in doc.tracks.iter().enumerate() {
        let location = format!("tracks[{i}]");
        if scene.object(t.object).is_none() {
            return Err(SceneError::UnknownObject {
                location,
                id: t.object,
            });
        }
        if t.keys.is_empty() {
            return Err(SceneError::EmptyTrack { location });
        }
        let mut keys = Vec::with_capacity(t.keys.len());
        for (k, key) in t.keys.iter().enumerate() {
            if k > 0 && !increasing(t.keys[k - 1].time, key.time) {
                return Err(SceneError::UnsortedKeyframes {
                    location: format!("{location}.keys[{k}]"),
                });
            }
            let rotation =
                rotation_or_identity(&key.rotation, &format!("{location}.keys[{k}].rotation"))?;
            keys.push(Keyframe::new(
                key.time,
                Vec3::from_array(key.translation.unwrap_or([0.0; 3])),
                rotation,
                Vec3::from_array(key.scale.unwrap_or([1.0; 3])),
            ));
        }
        let track = AnimationTrack::new(t.object, keys).map_err(|e| match e {
            SceneError::BadTransform { source, .. } => {
                SceneError::BadTransform { location, source }
            }
            other => other,
        })?;
        scene.add_track(track)?;
    }
    Ok(scene)
}
