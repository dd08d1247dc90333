use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use voxanim_core::scene::Scene;
use voxanim_core::{render_frame, FrameStats, HitBuffer, RenderOptions};

use crate::error::CliError;
use crate::render::{csv_row, CSV_HEADER};

pub const SUMMARY_HEADER: &str = "mode,avg_ms,fps";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    /// Animation frozen at t = 0, every optimization off.
    Static,
    /// Animation on, culling, sorting and the hit buffer off.
    Animated,
    /// Animation on with culling, sorting and the hit buffer.
    AnimatedOpt,
}

impl BenchMode {
    pub const ALL: [BenchMode; 3] = [
        BenchMode::Static,
        BenchMode::Animated,
        BenchMode::AnimatedOpt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BenchMode::Static => "static",
            BenchMode::Animated => "animated",
            BenchMode::AnimatedOpt => "animated-opt",
        }
    }

    pub fn animates(self) -> bool {
        self != BenchMode::Static
    }

    pub fn options(self, threads: usize) -> RenderOptions {
        match self {
            BenchMode::AnimatedOpt => RenderOptions::default().with_threads(threads),
            _ => RenderOptions::unoptimized().with_threads(threads),
        }
    }

    pub fn uses_hbo(self) -> bool {
        self == BenchMode::AnimatedOpt
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BenchMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown mode {s:?} (expected static, animated or animated-opt)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchLength {
    Frames(u32),
    /// Render until this much wall-clock render time has accumulated.
    Seconds(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub mode: BenchMode,
    pub length: BenchLength,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub threads: usize,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample {
    pub frame: u32,
    pub ms: f64,
    pub rays: u64,
    pub sphere_tests: u64,
    pub svo_traversals: u64,
    pub pixels_reused: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub mode: BenchMode,
    pub samples: Vec<FrameSample>,
    pub avg_ms: f64,
    pub fps: f64,
    /// Summed counters; `pixels_traced` is not part of the CSV and reads
    /// back as 0.
    pub totals: FrameStats,
}

pub fn fps_from_avg_ms(avg_ms: f64) -> f64 {
    1000.0 / avg_ms
}

impl BenchReport {
    pub fn from_samples(mode: BenchMode, samples: Vec<FrameSample>, totals: FrameStats) -> Self {
        let avg_ms = samples.iter().map(|s| s.ms).sum::<f64>() / samples.len().max(1) as f64;
        Self {
            mode,
            samples,
            avg_ms,
            fps: fps_from_avg_ms(avg_ms),
            totals,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let stats = FrameStats {
                rays: s.rays,
                sphere_tests: s.sphere_tests,
                svo_traversals: s.svo_traversals,
                pixels_reused: s.pixels_reused,
                ..FrameStats::default()
            };
            out.push_str(&csv_row(self.mode.as_str(), s.frame, s.ms, &stats));
            out.push('\n');
        }
        out.push_str(SUMMARY_HEADER);
        out.push('\n');
        out.push_str(&self.summary_line());
        out.push('\n');
        out
    }

    pub fn summary_line(&self) -> String {
        format!("{},{},{}", self.mode, self.avg_ms, self.fps)
    }

    pub fn parse_csv(text: &str) -> Result<Self, CliError> {
        let err = |line: usize, reason: String| CliError::Csv { line, reason };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        match lines.next() {
            Some((_, CSV_HEADER)) => {}
            other => {
                return Err(err(
                    1,
                    format!("expected header, got {:?}", other.map(|l| l.1)),
                ))
            }
        }
        let mut mode = None;
        let mut samples = Vec::new();
        let mut totals = FrameStats::default();
        let summary = loop {
            let Some((n, line)) = lines.next() else {
                return Err(err(0, "missing summary".into()));
            };
            if line == SUMMARY_HEADER {
                let (n, line) = lines
                    .next()
                    .ok_or_else(|| err(n + 1, "missing summary values".into()))?;
                break (n, line);
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(err(n, format!("expected 7 fields, got {}", f.len())));
            }
            let row_mode: BenchMode = f[0]
                .parse()
                .map_err(|_| err(n, format!("bad mode {:?}", f[0])))?;
            if *mode.get_or_insert(row_mode) != row_mode {
                return Err(err(n, "mixed modes".into()));
            }
            let int = |i: usize| {
                f[i].parse::<u64>()
                    .map_err(|_| err(n, format!("bad integer {:?}", f[i])))
            };
            let sample = FrameSample {
                frame: f[1]
                    .parse()
                    .map_err(|_| err(n, format!("bad frame {:?}", f[1])))?,
                ms: f[2]
                    .parse()
                    .map_err(|_| err(n, format!("bad ms {:?}", f[2])))?,
                rays: int(3)?,
                sphere_tests: int(4)?,
                svo_traversals: int(5)?,
                pixels_reused: int(6)?,
            };
            totals.merge(&FrameStats {
                rays: sample.rays,
                sphere_tests: sample.sphere_tests,
                svo_traversals: sample.svo_traversals,
                pixels_reused: sample.pixels_reused,
                pixels_traced: 0,
                render_ms: sample.ms,
            });
            samples.push(sample);
        };
        let (n, line) = summary;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(err(
                n,
                format!("expected 3 summary fields, got {}", f.len()),
            ));
        }
        let summary_mode: BenchMode = f[0]
            .parse()
            .map_err(|_| err(n, format!("bad mode {:?}", f[0])))?;
        if mode.is_some_and(|m| m != summary_mode) {
            return Err(err(n, "summary mode differs from rows".into()));
        }
        let num = |i: usize| {
            f[i].parse::<f64>()
                .map_err(|_| err(n, format!("bad number {:?}", f[i])))
        };
        Ok(Self {
            mode: summary_mode,
            samples,
            avg_ms: num(1)?,
            fps: num(2)?,
            totals,
        })
    }
}

/// Runs the benchmark on `scene` with the camera held where the scene put it.
/// Only `render_frame` is timed.
pub fn cmd_bench(scene: &mut Scene, cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    if cfg.width == 0 || cfg.height == 0 {
        return Err(CliError::Usage(format!(
            "size {}x{} must be at least 1x1",
            cfg.width, cfg.height
        )));
    }
    if !(cfg.fps.is_finite() && cfg.fps > 0.0) {
        return Err(CliError::Usage(format!(
            "--fps {} must be positive",
            cfg.fps
        )));
    }
    match cfg.length {
        BenchLength::Frames(0) => {
            return Err(CliError::Usage("--frames must be at least 1".into()))
        }
        BenchLength::Seconds(s) if !(s.is_finite() && s > 0.0) => {
            return Err(CliError::Usage(format!("--seconds {s} must be positive")))
        }
        _ => {}
    }
    scene.camera.set_resolution(cfg.width, cfg.height);
    let opts = cfg.mode.options(cfg.threads);
    let mut hbo = cfg
        .mode
        .uses_hbo()
        .then(|| HitBuffer::new(cfg.width, cfg.height));
    scene.evaluate_animation(0.0);

    let mut samples = Vec::new();
    let mut totals = FrameStats::default();
    let mut elapsed_ms = 0.0;
    for k in 0u32.. {
        if cfg.mode.animates() {
            scene.evaluate_animation(k as f64 / cfg.fps);
        }
        let start = Instant::now();
        let (_, stats) = render_frame(scene, opts, hbo.as_mut())?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        scene.mark_clean();
        elapsed_ms += ms;
        totals.merge(&FrameStats {
            render_ms: 0.0,
            ..stats
        });
        samples.push(FrameSample {
            frame: k,
            ms,
            rays: stats.rays,
            sphere_tests: stats.sphere_tests,
            svo_traversals: stats.svo_traversals,
            pixels_reused: stats.pixels_reused,
        });
        let done = match cfg.length {
            BenchLength::Frames(n) => k + 1 >= n,
            BenchLength::Seconds(s) => elapsed_ms >= s * 1e3,
        };
        if done {
            break;
        }
    }
    totals.render_ms = elapsed_ms;
    Ok(BenchReport::from_samples(cfg.mode, samples, totals))
}
