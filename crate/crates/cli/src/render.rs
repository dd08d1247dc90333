use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use voxanim_core::scene::Scene;
use voxanim_core::{render_frame, FrameStats, HitBuffer, RenderOptions};

use crate::build::write_atomic;
use crate::error::CliError;

pub const CSV_HEADER: &str = "mode,frame,ms,rays,sphere_tests,svo_traversals,pixels_reused";
pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    pub culling: bool,
    pub sorting: bool,
    pub hbo: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            culling: true,
            sorting: true,
            hbo: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    pub out_dir: PathBuf,
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub fps: f64,
    pub toggles: Toggles,
    pub threads: usize,
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.width == 0 || self.height == 0 {
            return Err(CliError::Usage(format!(
                "size {}x{} must be at least 1x1",
                self.width, self.height
            )));
        }
        if self.frames == 0 {
            return Err(CliError::Usage("--frames must be at least 1".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(CliError::Usage(format!(
                "--fps {} must be positive",
                self.fps
            )));
        }
        Ok(())
    }
}

/// `WxH`, both at least 1.
pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: u32 = w
        .trim()
        .parse()
        .map_err(|_| format!("bad width in {s:?}"))?;
    let h: u32 = h
        .trim()
        .parse()
        .map_err(|_| format!("bad height in {s:?}"))?;
    if w == 0 || h == 0 {
        return Err(format!("size {s:?} must be at least 1x1"));
    }
    Ok((w, h))
}

/// `--threads`, else `VOXANIM_THREADS`, else the hardware thread count.
pub fn resolve_threads(flag: Option<usize>) -> usize {
    flag.filter(|&n| n > 0)
        .or_else(|| {
            std::env::var("VOXANIM_THREADS")
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&n: &usize| n > 0)
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn frame_file_name(k: u32) -> String {
    format!("frame_{k:05}.ppm")
}

pub(crate) fn csv_row(mode: &str, frame: u32, ms: f64, s: &FrameStats) -> String {
    format!(
        "{mode},{frame},{ms},{},{},{},{}",
        s.rays, s.sphere_tests, s.svo_traversals, s.pixels_reused
    )
}

/// Renders `frames` frames at `k / fps` seconds into `out_dir`, writing a
/// CSV row per frame to `csv`. Frame files written before a failure are
/// removed.
pub fn cmd_render(
    scene: &mut Scene,
    cfg: &RenderConfig,
    csv: &mut dyn Write,
) -> Result<Vec<FrameStats>, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::io(&cfg.out_dir, e))?;
    let mut written = Vec::new();
    let result = render_frames(scene, cfg, csv, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
    }
    result
}

fn render_frames(
    scene: &mut Scene,
    cfg: &RenderConfig,
    csv: &mut dyn Write,
    written: &mut Vec<PathBuf>,
) -> Result<Vec<FrameStats>, CliError> {
    let csv_err = |e| CliError::io("<csv output>", e);
    scene.camera.set_resolution(cfg.width, cfg.height);
    let opts = RenderOptions {
        culling: cfg.toggles.culling,
        sorting: cfg.toggles.sorting,
        threads: cfg.threads,
    };
    let mut hbo = cfg
        .toggles
        .hbo
        .then(|| HitBuffer::new(cfg.width, cfg.height));
    writeln!(csv, "{CSV_HEADER}").map_err(csv_err)?;
    let mut all = Vec::with_capacity(cfg.frames as usize);
    for k in 0..cfg.frames {
        scene.evaluate_animation(k as f64 / cfg.fps);
        let start = Instant::now();
        let (image, stats) = render_frame(scene, opts, hbo.as_mut())?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        scene.mark_clean();
        let path = cfg.out_dir.join(frame_file_name(k));
        write_atomic(&path, &image.write_ppm())?;
        written.push(path);
        writeln!(csv, "{}", csv_row("render", k, ms, &stats)).map_err(csv_err)?;
        all.push(stats);
    }
    csv.flush().map_err(csv_err)?;
    Ok(all)
}
