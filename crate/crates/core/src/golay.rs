//! Extended binary Golay [24,12,8] codec and the square marker built on it.
//!
//! Codewords are systematic, `c = [m | m·B]`, with the 12 data bits in the top half
//! of the 24-bit word. Decoding is a syndrome table lookup: every error pattern of
//! weight 0..=3 has a distinct syndrome, and all other syndromes are uncorrectable.

use crate::imaging::GrayImage;
use std::sync::OnceLock;
use thiserror::Error;

/// 12-bit marker identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkerId(u16);

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MarkerError {
    #[error("marker id {0} out of range 0..=4095")]
    IdOutOfRange(u32),
    #[error("canonical patch must be {expected}x{expected}, got {0}x{1}", expected = PATCH_SIZE)]
    PatchSize(u32, u32),
    #[error("cell size must be at least 1 px")]
    CellSize,
}

impl MarkerId {
    pub const MAX: u16 = 4095;

    pub fn new(value: u32) -> Result<Self, MarkerError> {
        if value > u32::from(Self::MAX) {
            return Err(MarkerError::IdOutOfRange(value));
        }
        Ok(Self(value as u16))
    }

    pub fn value(self) -> u16 {
        self.0
    }
}

impl std::fmt::Display for MarkerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// 24-bit word; bit 23 carries the most significant data bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Codeword24(u32);

impl Codeword24 {
    pub const MASK: u32 = 0x00FF_FFFF;

    pub fn from_bits(bits: u32) -> Self {
        Self(bits & Self::MASK)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }
}

/// Rows of the bordered-circulant parity matrix B; column 0 is bit 11.
///
/// The upper-left 11x11 block is the circulant built from the quadratic residues
/// mod 11. B is symmetric and self-inverse over GF(2).
pub const PARITY_ROWS: [u16; 12] = [
    0b1101_1100_0101,
    0b1011_1000_1011,
    0b0111_0001_0111,
    0b1110_0010_1101,
    0b1100_0101_1011,
    0b1000_1011_0111,
    0b0001_0110_1111,
    0b0010_1101_1101,
    0b0101_1011_1001,
    0b1011_0111_0001,
    0b0110_1110_0011,
    0b1111_1111_1110,
];

/// `m·B` for a 12-bit row vector `m` (bit 11 = first component).
fn mul_parity(m: u16) -> u16 {
    PARITY_ROWS
        .iter()
        .enumerate()
        .filter(|(i, _)| m >> (11 - i) & 1 == 1)
        .fold(0, |acc, (_, row)| acc ^ row)
}

pub fn golay_encode(id: MarkerId) -> Codeword24 {
    let m = id.0;
    Codeword24((u32::from(m) << 12) | u32::from(mul_parity(m)))
}

fn syndrome(word: u32) -> u16 {
    let data = ((word >> 12) & 0xFFF) as u16;
    let check = (word & 0xFFF) as u16;
    mul_parity(data) ^ check
}

const NO_LEADER: u32 = u32::MAX;

/// Syndrome -> minimum-weight error pattern (weight <= 3), or `NO_LEADER`.
fn coset_leaders() -> &'static [u32; 4096] {
    static TABLE: OnceLock<Box<[u32; 4096]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([NO_LEADER; 4096]);
        t[0] = 0;
        for a in 0..24 {
            let e1 = 1u32 << a;
            t[syndrome(e1) as usize] = e1;
            for b in a + 1..24 {
                let e2 = e1 | 1 << b;
                t[syndrome(e2) as usize] = e2;
                for c in b + 1..24 {
                    let e3 = e2 | 1 << c;
                    t[syndrome(e3) as usize] = e3;
                }
            }
        }
        t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Corrected { id: MarkerId, corrected: u8 },
    Uncorrectable,
}

/// Nearest-codeword decoding for up to three bit errors.
pub fn golay_decode(word: u32) -> Decoded {
    let word = word & Codeword24::MASK;
    let leader = coset_leaders()[syndrome(word) as usize];
    if leader == NO_LEADER {
        return Decoded::Uncorrectable;
    }
    let fixed = word ^ leader;
    Decoded::Corrected {
        id: MarkerId((fixed >> 12) as u16),
        corrected: leader.count_ones() as u8,
    }
}

/// Grid side in cells, including the black border ring.
pub const GRID: usize = 7;
/// Canonical patch resolution.
pub const CELL_PX: u32 = 8;
pub const PATCH_SIZE: u32 = GRID as u32 * CELL_PX;
pub const DEFAULT_MIN_CONTRAST: f64 = 30.0;
const CENTER: usize = GRID / 2;

/// Interior cells carrying codeword bits, MSB first, row-major, centre skipped.
fn data_cells() -> impl Iterator<Item = (usize, usize)> {
    (1..GRID - 1)
        .flat_map(|r| (1..GRID - 1).map(move |c| (r, c)))
        .filter(|&(r, c)| (r, c) != (CENTER, CENTER))
}

fn is_border(r: usize, c: usize) -> bool {
    r == 0 || c == 0 || r == GRID - 1 || c == GRID - 1
}

/// Cell colours of a marker on the 7x7 grid, `true` = black.
pub fn marker_cells(id: MarkerId) -> [[bool; GRID]; GRID] {
    let word = golay_encode(id).bits();
    let mut cells = [[false; GRID]; GRID];
    for (r, row) in cells.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = is_border(r, c);
        }
    }
    for (k, (r, c)) in data_cells().enumerate() {
        cells[r][c] = word >> (23 - k) & 1 == 1;
    }
    cells
}

/// Marker bitmap with a one-cell white quiet zone: `9 * cell_px` pixels square.
pub fn render_marker(id: MarkerId, cell_px: u32) -> Result<GrayImage, MarkerError> {
    if cell_px == 0 {
        return Err(MarkerError::CellSize);
    }
    let cells = marker_cells(id);
    let side = (GRID as u32 + 2) * cell_px;
    Ok(GrayImage::from_fn(side, side, |x, y| {
        let (cx, cy) = (x / cell_px, y / cell_px);
        if cx == 0 || cy == 0 || cx > GRID as u32 || cy > GRID as u32 {
            return 255;
        }
        if cells[cy as usize - 1][cx as usize - 1] {
            0
        } else {
            255
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerRead {
    pub id: MarkerId,
    /// Clockwise quarter turns applied to the sampled grid before it decoded.
    pub rotation: u8,
    pub corrected: u8,
}

/// Rotate a square grid 90 degrees clockwise.
fn rotate_cw<T: Copy + Default>(g: &[[T; GRID]; GRID]) -> [[T; GRID]; GRID] {
    let mut out = [[T::default(); GRID]; GRID];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = g[GRID - 1 - c][r];
        }
    }
    out
}

fn grid_word(cells: &[[bool; GRID]; GRID]) -> u32 {
    data_cells().fold(0u32, |acc, (r, c)| acc << 1 | u32::from(cells[r][c]))
}

/// Decode a fronto-parallel 56x56 patch covering the 7x7 grid (no quiet zone).
///
/// Each cell is the mean of its central 4x4 pixels. The border ring gives the black
/// reference and the centre cell the white reference; cells darker than their
/// midpoint read as 1. All four orientations are decoded and the one needing the
/// fewest corrections wins. Returns `None` for low contrast, a border cell that
/// does not read black, no decodable orientation, or a tie between orientations
/// that decode to different ids.
pub fn read_canonical(
    patch: &GrayImage,
    min_contrast: f64,
) -> Result<Option<MarkerRead>, MarkerError> {
    if patch.width() != PATCH_SIZE || patch.height() != PATCH_SIZE {
        return Err(MarkerError::PatchSize(patch.width(), patch.height()));
    }
    let mut means = [[0.0f64; GRID]; GRID];
    for (r, row) in means.iter_mut().enumerate() {
        for (c, m) in row.iter_mut().enumerate() {
            let (x0, y0) = (c as u32 * CELL_PX + 2, r as u32 * CELL_PX + 2);
            let mut sum = 0u32;
            for y in y0..y0 + 4 {
                for x in x0..x0 + 4 {
                    sum += u32::from(patch.get(x, y));
                }
            }
            *m = f64::from(sum) / 16.0;
        }
    }
    let border: Vec<f64> = (0..GRID)
        .flat_map(|r| (0..GRID).map(move |c| (r, c)))
        .filter(|&(r, c)| is_border(r, c))
        .map(|(r, c)| means[r][c])
        .collect();
    let black_ref = border.iter().sum::<f64>() / border.len() as f64;
    let white_ref = means[CENTER][CENTER];
    if white_ref - black_ref < min_contrast {
        return Ok(None);
    }
    let mid = (black_ref + white_ref) / 2.0;
    if border.iter().any(|&b| b >= mid) {
        return Ok(None);
    }
    let mut cells = [[false; GRID]; GRID];
    for r in 0..GRID {
        for c in 0..GRID {
            cells[r][c] = means[r][c] < mid;
        }
    }

    let mut best: Option<MarkerRead> = None;
    let mut conflict = false;
    for rotation in 0..4u8 {
        if let Decoded::Corrected { id, corrected } = golay_decode(grid_word(&cells)) {
            match best {
                Some(b) if corrected > b.corrected => {}
                Some(b) if corrected == b.corrected => conflict |= id != b.id,
                _ => {
                    best = Some(MarkerRead {
                        id,
                        rotation,
                        corrected,
                    });
                    conflict = false;
                }
            }
        }
        cells = rotate_cw(&cells);
    }
    Ok(if conflict { None } else { best })
}
