//! Dense voxel grids from binvox files and procedural generators.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::svo::VoxelAttribute;

/// Largest grid depth held densely in memory (1024³ voxels).
pub const MAX_GRID_DEPTH: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("binvox header, line {line}: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error("binvox data holds more voxels than dims allow ({decoded} > {expected})")]
    DimMismatch { expected: u64, decoded: u64 },
    #[error("binvox run-length data ends early ({decoded} of {expected} voxels)")]
    TruncatedRle { expected: u64, decoded: u64 },
    #[error("grid resolution {0} must be a power of two between 2 and 1024")]
    InvalidResolution(u64),
    #[error("generator depth {0} out of range 1..=10")]
    DepthOutOfRange(u32),
    #[error("menger level {0} needs more than 1024 voxels per axis")]
    MengerTooDeep(u32),
    #[error("unknown shape {0:?} (expected sphere, box_shell, menger or checker)")]
    UnknownShape(String),
    #[error("unknown color mode {0:?} (expected hash, height or #rrggbb)")]
    UnknownColorMode(String),
}

/// How colors are synthesized for set voxels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorMode {
    Constant(VoxelAttribute),
    /// Eight-entry palette banded along +y.
    HeightPalette,
    #[default]
    PositionHash,
}

impl FromStr for ColorMode {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hash" => Ok(ColorMode::PositionHash),
            "height" => Ok(ColorMode::HeightPalette),
            hex if hex.len() == 7 && hex.starts_with('#') => {
                let channel = |i: usize| {
                    u8::from_str_radix(&hex[i..i + 2], 16)
                        .map_err(|_| IngestError::UnknownColorMode(s.to_string()))
                };
                Ok(ColorMode::Constant(VoxelAttribute::rgb(
                    channel(1)?,
                    channel(3)?,
                    channel(5)?,
                )))
            }
            _ => Err(IngestError::UnknownColorMode(s.to_string())),
        }
    }
}

const HEIGHT_PALETTE: [VoxelAttribute; 8] = [
    VoxelAttribute::rgb(70, 60, 160),
    VoxelAttribute::rgb(50, 110, 200),
    VoxelAttribute::rgb(40, 170, 190),
    VoxelAttribute::rgb(60, 190, 110),
    VoxelAttribute::rgb(150, 200, 60),
    VoxelAttribute::rgb(230, 200, 50),
    VoxelAttribute::rgb(240, 130, 40),
    VoxelAttribute::rgb(220, 60, 50),
];

impl ColorMode {
    pub fn color_at(&self, resolution: u32, x: u32, y: u32, z: u32) -> VoxelAttribute {
        match *self {
            ColorMode::Constant(c) => c,
            ColorMode::HeightPalette => {
                let band = (y as u64 * HEIGHT_PALETTE.len() as u64) / resolution as u64;
                HEIGHT_PALETTE[band as usize]
            }
            ColorMode::PositionHash => {
                let mut h = (x as u64) | ((y as u64) << 21) | ((z as u64) << 42);
                // splitmix64 finalizer
                h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                h ^= h >> 31;
                let ch = |shift: u32| 72 + ((h >> shift) & 0xff) as u8 % 184;
                VoxelAttribute::rgb(ch(0), ch(8), ch(16))
            }
        }
    }
}

/// Cubic occupancy grid with a power-of-two resolution.
#[derive(Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    resolution: u32,
    bits: Vec<u64>,
    colors: ColorMode,
}

impl fmt::Debug for VoxelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VoxelGrid")
            .field("resolution", &self.resolution)
            .field("set", &self.count())
            .field("colors", &self.colors)
            .finish()
    }
}

impl VoxelGrid {
    pub fn new(resolution: u32) -> Result<Self, IngestError> {
        if resolution < 2 || !resolution.is_power_of_two() || resolution > 1 << MAX_GRID_DEPTH {
            return Err(IngestError::InvalidResolution(resolution as u64));
        }
        let cells = (resolution as usize).pow(3);
        Ok(Self {
            resolution,
            bits: vec![0; cells.div_ceil(64)],
            colors: ColorMode::default(),
        })
    }

    pub fn with_depth(depth: u32) -> Result<Self, IngestError> {
        if !(1..=MAX_GRID_DEPTH).contains(&depth) {
            return Err(IngestError::DepthOutOfRange(depth));
        }
        Self::new(1 << depth)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// log2 of the resolution.
    pub fn depth(&self) -> u32 {
        self.resolution.trailing_zeros()
    }

    pub fn color_mode(&self) -> ColorMode {
        self.colors
    }

    pub fn set_color_mode(&mut self, colors: ColorMode) {
        self.colors = colors;
    }

    fn index(&self, x: u32, y: u32, z: u32) -> usize {
        let r = self.resolution as usize;
        debug_assert!(x < self.resolution && y < self.resolution && z < self.resolution);
        (x as usize * r + y as usize) * r + z as usize
    }

    pub fn get(&self, x: u32, y: u32, z: u32) -> bool {
        let i = self.index(x, y, z);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: u32, y: u32, z: u32, on: bool) {
        let i = self.index(x, y, z);
        if on {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn color_at(&self, x: u32, y: u32, z: u32) -> VoxelAttribute {
        self.colors.color_at(self.resolution, x, y, z)
    }

    /// Coordinates of set voxels in x-major, then y, then z order.
    pub fn iter_set(&self) -> impl Iterator<Item = [u32; 3]> + '_ {
        let r = self.resolution as usize;
        self.bits.iter().enumerate().flat_map(move |(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                let i = w * 64 + bit;
                Some([(i / (r * r)) as u32, ((i / r) % r) as u32, (i % r) as u32])
            })
        })
    }
}

/// Header fields of a binvox file other than the voxel data.
#[derive(Debug, Clone, PartialEq)]
pub struct BinvoxHeader {
    pub dims: [u32; 3],
    pub translate: [f64; 3],
    pub scale: f64,
}

/// Parses a binvox version-1 file into a grid padded to a power of two.
///
/// Voxel `(x, y, z)` is run-length position `x * d1 * d2 + z * d2 + y` for
/// `dim d0 d1 d2`, i.e. y varies fastest, then z, then x.
pub fn parse_binvox(bytes: &[u8]) -> Result<VoxelGrid, IngestError> {
    parse_binvox_with_header(bytes).map(|(grid, _)| grid)
}

pub fn parse_binvox_with_header(bytes: &[u8]) -> Result<(VoxelGrid, BinvoxHeader), IngestError> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut next_line = |pos: &mut usize| -> Result<(usize, String), IngestError> {
        line_no += 1;
        let rest = &bytes[*pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(IngestError::BadHeader {
                line: line_no,
                reason: "unexpected end of header".into(),
            })?;
        *pos += end + 1;
        let text = std::str::from_utf8(&rest[..end]).map_err(|_| IngestError::BadHeader {
            line: line_no,
            reason: "header is not ASCII".into(),
        })?;
        Ok((line_no, text.trim().to_string()))
    };

    let (first, magic) = next_line(&mut pos)?;
    if magic != "#binvox 1" {
        return Err(IngestError::BadHeader {
            line: first,
            reason: format!("expected \"#binvox 1\", found {magic:?}"),
        });
    }

    let mut dims = None;
    let mut translate = [0.0; 3];
    let mut scale = 1.0;
    loop {
        let (line, text) = next_line(&mut pos)?;
        let bad = |reason: &str| IngestError::BadHeader {
            line,
            reason: reason.to_string(),
        };
        let mut words = text.split_whitespace();
        match words.next() {
            Some("data") => break,
            Some("dim") => {
                let v: Vec<u32> = words
                    .map(|w| w.parse().map_err(|_| bad("dim values must be integers")))
                    .collect::<Result<_, _>>()?;
                if v.len() != 3 || v.contains(&0) {
                    return Err(bad("dim needs three positive integers"));
                }
                dims = Some([v[0], v[1], v[2]]);
            }
            Some("translate") => {
                let v: Vec<f64> = words
                    .map(|w| {
                        w.parse()
                            .map_err(|_| bad("translate values must be numbers"))
                    })
                    .collect::<Result<_, _>>()?;
                if v.len() != 3 {
                    return Err(bad("translate needs three numbers"));
                }
                translate = [v[0], v[1], v[2]];
            }
            Some("scale") => {
                scale = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("scale needs a number"))?;
            }
            Some(other) => return Err(bad(&format!("unknown header keyword {other:?}"))),
            None => return Err(bad("empty header line")),
        }
    }
    let dims = dims.ok_or(IngestError::BadHeader {
        line: line_no,
        reason: "missing dim line before data".into(),
    })?;

    let largest = dims.iter().copied().max().unwrap_or(1) as u64;
    let resolution = largest.next_power_of_two().max(2);
    if resolution > 1 << MAX_GRID_DEPTH {
        return Err(IngestError::InvalidResolution(resolution));
    }
    let mut grid = VoxelGrid::new(resolution as u32)?;

    let [d0, d1, d2] = dims.map(|d| d as u64);
    let expected = d0 * d1 * d2;
    let data = &bytes[pos..];
    let mut decoded = 0u64;
    for pair in data.chunks(2) {
        let &[value, count] = pair else {
            return Err(IngestError::TruncatedRle { expected, decoded });
        };
        let end = decoded + count as u64;
        if end > expected {
            return Err(IngestError::DimMismatch {
                expected,
                decoded: end,
            });
        }
        if value != 0 {
            for i in decoded..end {
                let x = i / (d1 * d2);
                let z = (i / d2) % d1;
                let y = i % d2;
                grid.set(x as u32, y as u32, z as u32, true);
            }
        }
        decoded = end;
    }
    if decoded != expected {
        return Err(IngestError::TruncatedRle { expected, decoded });
    }
    Ok((
        grid,
        BinvoxHeader {
            dims,
            translate,
            scale,
        },
    ))
}

/// Encodes a grid as binvox (cubic dims equal to the grid resolution).
pub fn write_binvox(grid: &VoxelGrid) -> Vec<u8> {
    let r = grid.resolution();
    let mut out =
        format!("#binvox 1\ndim {r} {r} {r}\ntranslate 0 0 0\nscale 1\ndata\n").into_bytes();
    let mut run: Option<(u8, u8)> = None;
    for x in 0..r {
        for z in 0..r {
            for y in 0..r {
                let v = grid.get(x, y, z) as u8;
                run = match run {
                    Some((value, count)) if value == v && count < u8::MAX => {
                        Some((value, count + 1))
                    }
                    Some((value, count)) => {
                        out.extend_from_slice(&[value, count]);
                        Some((v, 1))
                    }
                    None => Some((v, 1)),
                };
            }
        }
    }
    if let Some((value, count)) = run {
        out.extend_from_slice(&[value, count]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// Solid sphere inscribed in the cube.
    Sphere,
    /// One-voxel-thick hollow cube.
    BoxShell,
    /// Menger sponge; depth is the sponge level.
    Menger,
    /// Voxels with even `x + y + z`.
    Checker,
}

impl FromStr for PrimitiveKind {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(Self::Sphere),
            "box_shell" => Ok(Self::BoxShell),
            "menger" => Ok(Self::Menger),
            "checker" => Ok(Self::Checker),
            other => Err(IngestError::UnknownShape(other.to_string())),
        }
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::BoxShell => "box_shell",
            Self::Menger => "menger",
            Self::Checker => "checker",
        })
    }
}

/// Generates a deterministic test grid.
///
/// For every kind except `Menger` the resolution is `2^depth`. A Menger
/// sponge of level `depth` spans `3^depth` voxels from the low corner of the
/// smallest power-of-two grid that holds it.
pub fn gen_primitive(
    kind: PrimitiveKind,
    depth: u32,
    colors: ColorMode,
) -> Result<VoxelGrid, IngestError> {
    if !(1..=MAX_GRID_DEPTH).contains(&depth) {
        return Err(IngestError::DepthOutOfRange(depth));
    }
    let mut grid = match kind {
        PrimitiveKind::Menger => {
            let side = 3u64.pow(depth);
            let resolution = side.next_power_of_two();
            if resolution > 1 << MAX_GRID_DEPTH {
                return Err(IngestError::MengerTooDeep(depth));
            }
            let mut grid = VoxelGrid::new(resolution as u32)?;
            let side = side as u32;
            for x in 0..side {
                for y in 0..side {
                    for z in 0..side {
                        if in_menger(x, y, z) {
                            grid.set(x, y, z, true);
                        }
                    }
                }
            }
            grid
        }
        _ => {
            let mut grid = VoxelGrid::with_depth(depth)?;
            let r = grid.resolution();
            for x in 0..r {
                for y in 0..r {
                    for z in 0..r {
                        let on = match kind {
                            PrimitiveKind::Sphere => {
                                // voxel center within radius r/2 of the cube center, in doubled units
                                let d = |c: u32| (2 * c as i64 + 1 - r as i64).pow(2);
                                d(x) + d(y) + d(z) <= (r as i64).pow(2)
                            }
                            PrimitiveKind::BoxShell => {
                                [x, y, z].iter().any(|&c| c == 0 || c == r - 1)
                            }
                            PrimitiveKind::Checker => (x + y + z) % 2 == 0,
                            PrimitiveKind::Menger => unreachable!(),
                        };
                        if on {
                            grid.set(x, y, z, true);
                        }
                    }
                }
            }
            grid
        }
    };
    grid.set_color_mode(colors);
    Ok(grid)
}

/// A cell survives unless two of its base-3 digits at the same position are 1.
fn in_menger(mut x: u32, mut y: u32, mut z: u32) -> bool {
    while x > 0 || y > 0 || z > 0 {
        let ones = (x % 3 == 1) as u8 + (y % 3 == 1) as u8 + (z % 3 == 1) as u8;
        if ones >= 2 {
            return false;
        }
        x /= 3;
        y /= 3;
        z /= 3;
    }
    true
}
