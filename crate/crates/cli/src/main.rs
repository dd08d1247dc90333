use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use voxanim_cli::bench::{cmd_bench, BenchConfig, BenchLength, BenchMode};
use voxanim_cli::build::{cmd_build, BuildArgs, BuildSource};
use voxanim_cli::render::{
    cmd_render, parse_size, resolve_threads, RenderConfig, Toggles, DEFAULT_FPS,
};
use voxanim_cli::{demo, info, CliError};
use voxanim_core::scene::Scene;
use voxanim_core::{load_scene, ColorMode, PrimitiveKind};

#[derive(Parser)]
#[command(
    name = "voxanim",
    version,
    about = "Ray tracer for rigid-body animated sparse voxel octrees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Sphere,
    BoxShell,
    Menger,
    Checker,
}

impl From<Shape> for PrimitiveKind {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Sphere => PrimitiveKind::Sphere,
            Shape::BoxShell => PrimitiveKind::BoxShell,
            Shape::Menger => PrimitiveKind::Menger,
            Shape::Checker => PrimitiveKind::Checker,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Static,
    Animated,
    AnimatedOpt,
}

impl From<Mode> for BenchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Static => BenchMode::Static,
            Mode::Animated => BenchMode::Animated,
            Mode::AnimatedOpt => BenchMode::AnimatedOpt,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a .svo model from a binvox file or a generated primitive.
    #[command(group(ArgGroup::new("source").required(true).args(["input", "shape"])))]
    Build {
        /// Binvox file to ingest.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Primitive to generate.
        #[arg(long, value_enum)]
        shape: Option<Shape>,
        /// Octree depth (sponge level for menger). Binvox input may be reduced.
        #[arg(long)]
        depth: Option<u32>,
        /// Voxel colors: hash, height or #rrggbb.
        #[arg(long, default_value = "hash")]
        color: ColorMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print model statistics.
    Info { path: PathBuf },
    /// Render an animation sequence to PPM frames.
    Render {
        /// Scene document; the built-in demo scene when omitted.
        #[arg(long)]
        scene: Option<PathBuf>,
        /// Output directory for frame files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "640x480", value_parser = parse_size)]
        size: (u32, u32),
        #[arg(long, default_value_t = 1)]
        frames: u32,
        #[arg(long, default_value_t = DEFAULT_FPS)]
        fps: f64,
        #[arg(long)]
        no_culling: bool,
        #[arg(long)]
        no_sorting: bool,
        #[arg(long)]
        no_hbo: bool,
        #[arg(long)]
        threads: Option<usize>,
        /// Per-frame stats; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time one benchmark mode and report average frame time.
    #[command(group(ArgGroup::new("length").args(["frames", "seconds"])))]
    Bench {
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Frame count (default 60).
        #[arg(long)]
        frames: Option<u32>,
        /// Render for this many seconds instead of a frame count.
        #[arg(long)]
        seconds: Option<f64>,
        #[arg(long, default_value = "640x480", value_parser = parse_size)]
        size: (u32, u32),
        #[arg(long, default_value_t = DEFAULT_FPS)]
        fps: f64,
        #[arg(long)]
        threads: Option<usize>,
        /// Full report; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn open_scene(path: Option<&Path>, size: (u32, u32)) -> Result<Scene, CliError> {
    let Some(path) = path else {
        return Ok(demo::demo_scene(size.0, size.1));
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    load_scene(&text, base).map_err(|source| CliError::Scene {
        path: path.to_path_buf(),
        source,
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build {
            input,
            shape,
            depth,
            color,
            out,
        } => {
            let source = match (input, shape) {
                (Some(path), _) => BuildSource::Binvox(path),
                (None, Some(shape)) => BuildSource::Primitive(shape.into()),
                (None, None) => unreachable!("clap requires one source"),
            };
            let args = BuildArgs {
                source,
                out,
                depth,
                colors: color,
            };
            let stats = cmd_build(&args)?;
            println!(
                "wrote {}: depth {}, {} nodes, {} leaves, {} bytes",
                args.out.display(),
                stats.depth,
                stats.node_count,
                stats.leaf_count,
                stats.byte_size
            );
        }
        Command::Info { path } => println!("{}", info::cmd_info(&path)?),
        Command::Render {
            scene,
            out,
            size,
            frames,
            fps,
            no_culling,
            no_sorting,
            no_hbo,
            threads,
            csv,
        } => {
            let mut scene = open_scene(scene.as_deref(), size)?;
            let cfg = RenderConfig {
                out_dir: out,
                width: size.0,
                height: size.1,
                frames,
                fps,
                toggles: Toggles {
                    culling: !no_culling,
                    sorting: !no_sorting,
                    hbo: !no_hbo,
                },
                threads: resolve_threads(threads),
            };
            let mut sink = output(csv.as_deref())?;
            cmd_render(&mut scene, &cfg, &mut sink)?;
        }
        Command::Bench {
            scene,
            mode,
            frames,
            seconds,
            size,
            fps,
            threads,
            csv,
        } => {
            let mut scene = open_scene(scene.as_deref(), size)?;
            let length = match seconds {
                Some(s) => BenchLength::Seconds(s),
                None => BenchLength::Frames(frames.unwrap_or(60)),
            };
            let cfg = BenchConfig {
                mode: mode.into(),
                length,
                width: size.0,
                height: size.1,
                fps,
                threads: resolve_threads(threads),
            };
            let report = cmd_bench(&mut scene, &cfg)?;
            match csv {
                Some(path) => {
                    let mut sink = output(Some(&path))?;
                    sink.write_all(report.to_csv().as_bytes())
                        .and_then(|_| sink.flush())
                        .map_err(|e| CliError::io(&path, e))?;
                    println!("{}", report.summary_line());
                }
                None => print!("{}", report.to_csv()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
