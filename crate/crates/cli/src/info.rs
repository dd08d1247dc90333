use std::fmt;
use std::path::{Path, PathBuf};

use voxanim_core::{RigidTransform, SvoModel, SvoStats};

use crate::error::CliError;

/// Per-object animation state: rotation, translation and scale in f64.
pub const ANIMATION_STATE_BYTES: usize = std::mem::size_of::<RigidTransform>();
pub const ANIMATION_STATE_LIMIT: usize = 128;

const _: () = assert!(ANIMATION_STATE_BYTES <= ANIMATION_STATE_LIMIT);

#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    pub path: PathBuf,
    pub stats: SvoStats,
    pub file_bytes: u64,
    pub animation_state_bytes: usize,
}

pub fn cmd_info(path: &Path) -> Result<InfoReport, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let model = SvoModel::deserialize(&bytes).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(InfoReport {
        path: path.to_path_buf(),
        stats: model.stats(),
        file_bytes: bytes.len() as u64,
        animation_state_bytes: ANIMATION_STATE_BYTES,
    })
}

impl fmt::Display for InfoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.stats;
        writeln!(f, "file: {}", self.path.display())?;
        writeln!(f, "depth: {}", s.depth)?;
        writeln!(f, "resolution: {}", 1u64 << s.depth)?;
        writeln!(f, "node_count: {}", s.node_count)?;
        writeln!(f, "leaf_count: {}", s.leaf_count)?;
        writeln!(f, "byte_size: {}", s.byte_size)?;
        writeln!(f, "fill_ratio: {:.6}", s.fill_ratio)?;
        write!(
            f,
            "animation_state_bytes: {} (limit {})",
            self.animation_state_bytes, ANIMATION_STATE_LIMIT
        )
    }
}
