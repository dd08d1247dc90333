use std::path::{Path, PathBuf};

use voxanim_core::ingest::parse_binvox;
use voxanim_core::{gen_primitive, ColorMode, PrimitiveKind, SvoModel, SvoStats, VoxelGrid};

use crate::error::CliError;

pub const DEFAULT_PRIMITIVE_DEPTH: u32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum BuildSource {
    Binvox(PathBuf),
    Primitive(PrimitiveKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildArgs {
    pub source: BuildSource,
    pub out: PathBuf,
    /// Octree depth. Binvox input defaults to its own resolution and may be
    /// reduced; for a Menger sponge this is the sponge level.
    pub depth: Option<u32>,
    pub colors: ColorMode,
}

/// Builds a validated octree from the source and writes it to `out`.
pub fn cmd_build(args: &BuildArgs) -> Result<SvoStats, CliError> {
    let grid = match &args.source {
        BuildSource::Binvox(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            let mut grid = parse_binvox(&bytes).map_err(|source| CliError::Ingest {
                path: path.clone(),
                source,
            })?;
            grid.set_color_mode(args.colors);
            match args.depth {
                Some(d) if d > grid.depth() => {
                    return Err(CliError::Usage(format!(
                        "--depth {d} exceeds the input resolution {} (depth {})",
                        grid.resolution(),
                        grid.depth()
                    )))
                }
                Some(d) if d < grid.depth() => reduce(&grid, d),
                _ => grid,
            }
        }
        BuildSource::Primitive(kind) => {
            let depth = args.depth.unwrap_or(DEFAULT_PRIMITIVE_DEPTH);
            gen_primitive(*kind, depth, args.colors).map_err(CliError::Generate)?
        }
    };
    let model = SvoModel::build_from_grid(&grid, grid.depth())?;
    let report = model.validate();
    if !report.is_valid() {
        return Err(CliError::InvalidModel(report.to_string()));
    }
    write_atomic(&args.out, &model.serialize())?;
    Ok(model.stats())
}

/// Coarsens a grid to `depth`: a cell is set if any fine voxel inside it is.
pub fn reduce(grid: &VoxelGrid, depth: u32) -> VoxelGrid {
    let mut out = VoxelGrid::with_depth(depth).expect("depth below the input depth");
    out.set_color_mode(grid.color_mode());
    let shift = grid.depth() - depth;
    for [x, y, z] in grid.iter_set() {
        out.set(x >> shift, y >> shift, z >> shift, true);
    }
    out
}

/// Writes through a sibling temporary file so a failed write leaves no
/// partial output behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    if let Err(e) = std::fs::write(&tmp, bytes) {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}
