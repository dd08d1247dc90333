//! Frame rendering. Objects are culled by bounding sphere and traced front
//! to back; a per-pixel hit buffer lets unchanged pixels skip tracing.

use std::cmp::Ordering;
use std::time::Instant;

use thiserror::Error;

use crate::math::{Ray, Vec3};
use crate::scene::{BoundingSphere, Camera, Scene, SceneObject};
use crate::traversal::traverse;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("pixel ({px}, {py}) outside {width}x{height}")]
    PixelOutOfRange {
        px: u32,
        py: u32,
        width: u32,
        height: u32,
    },
    #[error("hit buffer is {got:?} but the camera is {expected:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        got: (u32, u32),
    },
}

/// Ray through the center of pixel `(px, py)`, row 0 at the top.
pub fn generate_primary_ray(camera: &Camera, px: u32, py: u32) -> Result<Ray, RenderError> {
    if px >= camera.width || py >= camera.height {
        return Err(RenderError::PixelOutOfRange {
            px,
            py,
            width: camera.width,
            height: camera.height,
        });
    }
    let (w, h) = (camera.width as f64, camera.height as f64);
    let tan_half = (camera.vertical_fov_deg.to_radians() * 0.5).tan();
    let sx = (2.0 * (px as f64 + 0.5) / w - 1.0) * tan_half * (w / h);
    let sy = (1.0 - 2.0 * (py as f64 + 0.5) / h) * tan_half;
    let local = Vec3::new(sx, sy, -1.0);
    let direction = camera.orientation.mul_vec(local);
    Ok(Ray {
        origin: camera.position,
        direction: direction * (1.0 / direction.length()),
    })
}

/// Result of testing a ray against one object's bounding sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereHit {
    pub object: u32,
    /// Closest distance between the sphere center and the ray's line.
    pub d: f64,
    /// Ray parameter of the closest approach; the sort key.
    pub t_center: f64,
    /// Ray parameter where the ray enters the sphere, clamped to 0. No hit
    /// in this object can come earlier.
    pub t_boundary: f64,
}

/// `l = c - o`, `d = sqrt(l·l - (l·dir)²)`; a hit needs `d < r` and a
/// sphere not wholly behind the origin. The ray direction must be unit.
pub fn ray_sphere_test(ray: &Ray, object: u32, sphere: &BoundingSphere) -> Option<SphereHit> {
    let l = sphere.center - ray.origin;
    let t_center = l.dot(ray.direction);
    let d = (l.dot(l) - t_center * t_center).max(0.0).sqrt();
    if d >= sphere.radius {
        return None;
    }
    let half_chord = (sphere.radius * sphere.radius - d * d).sqrt();
    // the far intersection must not be behind the origin
    if t_center + half_chord >= 0.0 {
        Some(SphereHit {
            object,
            d,
            t_center,
            t_boundary: (t_center - half_chord).max(0.0),
        })
    } else {
        None
    }
}

/// Candidate entry for an object that is traced without a sphere test. The
/// boundary `t_center - r` never exceeds any hit parameter in the object.
fn unculled_candidate(ray: &Ray, object: &SceneObject) -> SphereHit {
    let sphere = object.bounding_sphere();
    let l = sphere.center - ray.origin;
    let t_center = l.dot(ray.direction);
    SphereHit {
        object: object.id,
        d: (l.dot(l) - t_center * t_center).max(0.0).sqrt(),
        t_center,
        t_boundary: (t_center - sphere.radius).max(0.0),
    }
}

fn by_depth(a: &SphereHit, b: &SphereHit) -> Ordering {
    a.t_center
        .total_cmp(&b.t_center)
        .then(a.object.cmp(&b.object))
}

/// Objects whose spheres the ray hits, nearest sphere center first.
pub fn cull_and_sort(scene: &Scene, ray: &Ray) -> Vec<SphereHit> {
    let mut hits: Vec<SphereHit> = scene
        .objects()
        .iter()
        .filter_map(|o| ray_sphere_test(ray, o.id, &o.bounding_sphere()))
        .collect();
    hits.sort_by(by_depth);
    hits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HitKind {
    /// The ray crossed no bounding sphere.
    #[default]
    Miss,
    SingleSphere,
    MultiSphere,
}

impl HitKind {
    pub fn from_sphere_count(n: usize) -> Self {
        match n {
            0 => HitKind::Miss,
            1 => HitKind::SingleSphere,
            _ => HitKind::MultiSphere,
        }
    }
}

/// Last traced result for one pixel. `object` is `None` when no voxel was
/// hit; `hit_kind` records how many spheres the ray crossed either way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    /// Voxel color (unshaded).
    pub color: [u8; 3],
    /// World-space face normal.
    pub normal: Vec3,
    /// Hit depth along the ray; infinite on a miss.
    pub t: f64,
    pub object: Option<u32>,
    pub hit_kind: HitKind,
}

impl HitRecord {
    pub const MISS: HitRecord = HitRecord {
        color: [0, 0, 0],
        normal: Vec3::ZERO,
        t: f64::INFINITY,
        object: None,
        hit_kind: HitKind::Miss,
    };

    pub fn is_hit(&self) -> bool {
        self.object.is_some()
    }
}

impl Default for HitRecord {
    fn default() -> Self {
        Self::MISS
    }
}

/// Per-pixel records of the previous frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HitBuffer {
    width: u32,
    height: u32,
    records: Vec<HitRecord>,
}

impl HitBuffer {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            records: vec![HitRecord::MISS; width as usize * height as usize],
        }
    }

    pub fn for_camera(camera: &Camera) -> Self {
        Self::new(camera.width, camera.height)
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, px: u32, py: u32) -> &HitRecord {
        &self.records[py as usize * self.width as usize + px as usize]
    }

    pub fn records(&self) -> &[HitRecord] {
        &self.records
    }
}

/// Outcome of tracing one ray against a candidate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOutcome {
    pub record: HitRecord,
    pub traversals: u32,
}

/// Traces `candidates` in the given order and keeps the nearest hit, ties
/// going to the lower object id.
///
/// With `early_exit`, a candidate is skipped when the best hit so far is
/// closer than its sphere boundary, and tracing stops once that holds for
/// every remaining candidate.
pub fn trace_ray(
    scene: &Scene,
    ray: &Ray,
    candidates: &[SphereHit],
    early_exit: bool,
) -> TraceOutcome {
    let mut best: Option<(f64, u32, Vec3, [u8; 3])> = None;
    let mut traversals = 0;
    // smallest boundary among the candidates still to come
    let suffix_min: Vec<f64> = if early_exit {
        let mut v = vec![f64::INFINITY; candidates.len() + 1];
        for k in (0..candidates.len()).rev() {
            v[k] = v[k + 1].min(candidates[k].t_boundary);
        }
        v
    } else {
        Vec::new()
    };

    for (k, cand) in candidates.iter().enumerate() {
        if early_exit {
            if let Some((t, ..)) = best {
                if t < suffix_min[k] {
                    break;
                }
                if t < cand.t_boundary {
                    continue;
                }
            }
        }
        let Some(object) = scene.object(cand.object) else {
            continue;
        };
        traversals += 1;
        let tf = object.transform();
        let local = tf.ray_to_local(ray);
        if let Some(hit) = traverse(&object.model, &local, &object.bounds()) {
            let closer = match best {
                None => true,
                Some((t, id, ..)) => (hit.t_hit, object.id) < (t, id),
            };
            if closer {
                let a = hit.attribute;
                best = Some((
                    hit.t_hit,
                    object.id,
                    tf.vector_to_world(hit.normal_local),
                    [a.r, a.g, a.b],
                ));
            }
        }
    }

    let hit_kind = HitKind::from_sphere_count(candidates.len());
    let record = match best {
        Some((t, id, normal, color)) => HitRecord {
            color,
            normal,
            t,
            object: Some(id),
            hit_kind,
        },
        None => HitRecord {
            hit_kind,
            ..HitRecord::MISS
        },
    };
    TraceOutcome { record, traversals }
}

/// Headlight Lambert with 0.2 ambient; misses show the background.
pub fn shade(record: &HitRecord, ray: &Ray, background: [u8; 3]) -> [u8; 3] {
    if !record.is_hit() {
        return background;
    }
    let lambert = record.normal.dot(-ray.direction).max(0.0);
    let factor = 0.2 + 0.8 * lambert;
    record
        .color
        .map(|c| (c as f64 * factor).round().clamp(0.0, 255.0) as u8)
}

/// 8-bit RGB image, row-major from the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 3],
        }
    }

    pub fn pixel(&self, px: u32, py: u32) -> [u8; 3] {
        let i = (py as usize * self.width as usize + px as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, px: u32, py: u32, rgb: [u8; 3]) {
        let i = (py as usize * self.width as usize + px as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    /// Binary PPM (P6).
    pub fn write_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameStats {
    pub rays: u64,
    pub sphere_tests: u64,
    pub svo_traversals: u64,
    pub pixels_reused: u64,
    pub pixels_traced: u64,
    pub render_ms: f64,
}

impl FrameStats {
    pub fn merge(&mut self, o: &FrameStats) {
        self.rays += o.rays;
        self.sphere_tests += o.sphere_tests;
        self.svo_traversals += o.svo_traversals;
        self.pixels_reused += o.pixels_reused;
        self.pixels_traced += o.pixels_traced;
        self.render_ms += o.render_ms;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    /// Skip objects whose bounding sphere the ray misses.
    pub culling: bool,
    /// Trace front to back with early termination; otherwise id order, exhaustive.
    pub sorting: bool,
    /// Worker threads; 0 means one.
    pub threads: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            culling: true,
            sorting: true,
            threads: 1,
        }
    }
}

impl RenderOptions {
    pub fn unoptimized() -> Self {
        Self {
            culling: false,
            sorting: false,
            threads: 1,
        }
    }

    pub fn with_threads(self, threads: usize) -> Self {
        Self { threads, ..self }
    }
}

struct PixelContext<'a> {
    scene: &'a Scene,
    opts: RenderOptions,
    use_hbo: bool,
    spheres: Vec<SphereHit>,
    candidates: Vec<SphereHit>,
    stats: FrameStats,
}

impl PixelContext<'_> {
    /// One pixel of the hit buffer flow. A clean camera and a single
    /// intersected sphere allow reuse or a one-object trace.
    fn render(&mut self, ray: &Ray, previous: Option<&HitRecord>) -> HitRecord {
        let scene = self.scene;
        self.stats.rays += 1;
        let test_spheres = self.opts.culling || self.use_hbo;
        self.spheres.clear();
        if test_spheres {
            for o in scene.objects() {
                self.stats.sphere_tests += 1;
                if let Some(h) = ray_sphere_test(ray, o.id, &o.bounding_sphere()) {
                    self.spheres.push(h);
                }
            }
        }

        if let Some(prev) = previous {
            if !scene.camera.dirty && self.spheres.len() == 1 {
                let only = self.spheres[0];
                let object_dirty = scene.object(only.object).is_none_or(|o| o.dirty);
                if prev.hit_kind == HitKind::SingleSphere
                    && prev.object == Some(only.object)
                    && !object_dirty
                {
                    self.stats.pixels_reused += 1;
                    return *prev;
                }
                self.stats.pixels_traced += 1;
                let out = trace_ray(scene, ray, &self.spheres, false);
                self.stats.svo_traversals += out.traversals as u64;
                return out.record;
            }
        }

        self.stats.pixels_traced += 1;
        self.candidates.clear();
        if self.opts.culling {
            self.candidates.extend_from_slice(&self.spheres);
        } else {
            self.candidates
                .extend(scene.objects().iter().map(|o| unculled_candidate(ray, o)));
        }
        if self.opts.sorting {
            self.candidates.sort_by(by_depth);
        }
        let out = trace_ray(scene, ray, &self.candidates, self.opts.sorting);
        self.stats.svo_traversals += out.traversals as u64;
        let mut record = out.record;
        if test_spheres {
            record.hit_kind = HitKind::from_sphere_count(self.spheres.len());
        }
        record
    }
}

/// Renders the scene from its camera.
///
/// With a hit buffer, each pixel follows the reuse flow and the buffer is
/// overwritten with this frame's records. Rows are split into contiguous
/// bands, one per thread, so output does not depend on the thread count.
/// Dirty flags are left for the caller to clear.
pub fn render_frame(
    scene: &Scene,
    opts: RenderOptions,
    hbo: Option<&mut HitBuffer>,
) -> Result<(Image, FrameStats), RenderError> {
    let start = Instant::now();
    let camera = &scene.camera;
    let (width, height) = (camera.width, camera.height);
    if let Some(buf) = hbo.as_deref() {
        if buf.dimensions() != (width, height) {
            return Err(RenderError::DimensionMismatch {
                expected: (width, height),
                got: buf.dimensions(),
            });
        }
    }
    let use_hbo = hbo.is_some();
    let mut image = Image::new(width, height);
    let threads = opts.threads.clamp(1, height as usize);
    let band_rows = (height as usize).div_ceil(threads);
    let row_px = width as usize;

    let render_band = |first_row: usize,
                       pixels: &mut [u8],
                       mut records: Option<&mut [HitRecord]>| {
        let mut ctx = PixelContext {
            scene,
            opts,
            use_hbo,
            spheres: Vec::with_capacity(scene.objects().len()),
            candidates: Vec::with_capacity(scene.objects().len()),
            stats: FrameStats::default(),
        };
        let rows = pixels.len() / (row_px * 3);
        for r in 0..rows {
            let py = (first_row + r) as u32;
            for px in 0..width {
                let i = r * row_px + px as usize;
                let ray = generate_primary_ray(camera, px, py).expect("pixel in range");
                let previous = records.as_deref().map(|recs| recs[i]);
                let record = ctx.render(&ray, previous.as_ref());
                if let Some(recs) = records.as_deref_mut() {
                    recs[i] = record;
                }
                pixels[i * 3..i * 3 + 3].copy_from_slice(&shade(&record, &ray, scene.background));
            }
        }
        ctx.stats
    };

    let pixel_bands = image.pixels.chunks_mut(band_rows * row_px * 3);
    let mut record_bands: Vec<Option<&mut [HitRecord]>> = match hbo {
        Some(buf) => buf
            .records
            .chunks_mut(band_rows * row_px)
            .map(Some)
            .collect(),
        None => (0..threads).map(|_| None).collect(),
    };
    record_bands.resize_with(threads, || None);

    let mut stats = FrameStats::default();
    if threads == 1 {
        let pixels = &mut image.pixels[..];
        stats = render_band(0, pixels, record_bands.pop().flatten());
    } else {
        let band_stats: Vec<FrameStats> = std::thread::scope(|s| {
            let handles: Vec<_> = pixel_bands
                .zip(record_bands)
                .enumerate()
                .map(|(b, (pixels, records))| {
                    let render_band = &render_band;
                    s.spawn(move || render_band(b * band_rows, pixels, records))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("render worker panicked"))
                .collect()
        });
        for b in &band_stats {
            stats.merge(b);
        }
    }
    stats.render_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((image, stats))
}
