//! Size normalization and directional thinning of rasterized glyphs.

use crate::image::{component_count, BinaryImage, ImageError};

/// Side of the normalized square image.
pub const NORM_SIZE: usize = 64;
/// Longer side of the foreground box after normalization (4-pixel margin).
pub const NORM_EXTENT: usize = 56;

/// Scales the foreground bounding box (aspect preserved, nearest neighbor) so its
/// longer side is [`NORM_EXTENT`] and centers it on a [`NORM_SIZE`] square.
///
/// A single-pixel box is not scaled.
pub fn normalize(img: &BinaryImage) -> Result<BinaryImage, ImageError> {
    let (x0, y0, x1, y1) = img.bbox().ok_or(ImageError::EmptyImage)?;
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let long = bw.max(bh);
    let scale = if long == 1 { 1.0 } else { NORM_EXTENT as f64 / long as f64 };
    let ow = ((bw as f64 * scale).round() as usize).clamp(1, NORM_EXTENT);
    let oh = ((bh as f64 * scale).round() as usize).clamp(1, NORM_EXTENT);
    let off_x = (NORM_SIZE - ow).div_ceil(2);
    let off_y = (NORM_SIZE - oh).div_ceil(2);

    let mut out = BinaryImage::new(NORM_SIZE, NORM_SIZE);
    for oy in 0..oh {
        let sy = y0 + oy * bh / oh;
        for ox in 0..ow {
            let sx = x0 + ox * bw / ow;
            if img.get(sx, sy) {
                out.set(off_x + ox, off_y + oy, true);
            }
        }
    }
    Ok(out)
}

/// Compass side a thinning sub-pass peels from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    North,
    East,
    South,
    West,
}

impl Side {
    pub const CYCLE: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

    fn offset(self) -> (i64, i64) {
        match self {
            Side::North => (0, -1),
            Side::East => (1, 0),
            Side::South => (0, 1),
            Side::West => (-1, 0),
        }
    }
}

/// Clockwise ring starting north: N, NE, E, SE, S, SW, W, NW.
const RING: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

fn ring(img: &BinaryImage, x: i64, y: i64) -> [bool; 8] {
    RING.map(|(dx, dy)| img.at(x + dx, y + dy))
}

/// Number of background→foreground transitions walking once around the ring.
pub fn crossing_number(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&i| !ring[i] && ring[(i + 1) % 8]).count()
}

/// A border pixel on `side` is removable when it has between two and six
/// foreground neighbors (never an end point) and exactly one crossing, so its
/// neighbors stay connected without it.
fn removable(img: &BinaryImage, x: i64, y: i64, side: Side) -> bool {
    let (dx, dy) = side.offset();
    if img.at(x + dx, y + dy) {
        return false;
    }
    let r = ring(img, x, y);
    let neighbors = r.iter().filter(|&&b| b).count();
    (2..=6).contains(&neighbors) && crossing_number(&r) == 1
}

/// One parallel sub-pass; returns how many pixels were removed.
pub fn thin_pass(img: &mut BinaryImage, side: Side) -> usize {
    let doomed: Vec<(usize, usize)> = img
        .foreground()
        .filter(|&(x, y)| removable(img, x as i64, y as i64, side))
        .collect();
    for &(x, y) in &doomed {
        img.set(x, y, false);
    }
    doomed.len()
}

/// Yokoi's 8-connectivity number: how many separate foreground arcs the
/// pixel joins. Deleting a pixel with value 1 leaves the topology unchanged.
pub fn connectivity_number(ring: &[bool; 8]) -> usize {
    let bg = |i: usize| !ring[i % 8];
    [0, 2, 4, 6]
        .iter()
        .filter(|&&k| bg(k) && !(bg(k + 1) && bg(k + 2)))
        .count()
}

const BLOCK: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Deletes, in raster order, one topology-preserving pixel from every solid
/// 2×2 block that has one. Blocks where every pixel holds a branch together
/// stay. Returns how many pixels were removed.
fn break_blocks(img: &mut BinaryImage) -> usize {
    let mut removed = 0;
    for y in 0..img.height().saturating_sub(1) {
        for x in 0..img.width().saturating_sub(1) {
            if !BLOCK.iter().all(|&(dx, dy)| img.get(x + dx, y + dy)) {
                continue;
            }
            let simple = BLOCK
                .iter()
                .map(|&(dx, dy)| (x + dx, y + dy))
                .find(|&(px, py)| connectivity_number(&ring(img, px as i64, py as i64)) == 1);
            if let Some((px, py)) = simple {
                img.set(px, py, false);
                removed += 1;
            }
        }
    }
    removed
}

/// Last resort for a block whose every pixel anchors a branch, as where two
/// strokes cross: removes the first block pixel whose loss keeps the number of
/// connected components, opening a loop instead of splitting the glyph.
fn open_loop_block(img: &mut BinaryImage) -> bool {
    let before = component_count(img);
    for y in 0..img.height().saturating_sub(1) {
        for x in 0..img.width().saturating_sub(1) {
            if !BLOCK.iter().all(|&(dx, dy)| img.get(x + dx, y + dy)) {
                continue;
            }
            for &(dx, dy) in &BLOCK {
                img.set(x + dx, y + dy, false);
                if component_count(img) == before {
                    return true;
                }
                img.set(x + dx, y + dy, true);
            }
        }
    }
    false
}

/// Reduces the foreground to a unit-width skeleton by peeling border pixels
/// from the north, east, south and west in turn until a full cycle removes
/// nothing, then breaking up any solid 2×2 blocks left at junctions, and
/// repeating both until neither changes the image.
pub fn thin(img: &BinaryImage) -> BinaryImage {
    let mut out = img.clone();
    loop {
        loop {
            let removed: usize = Side::CYCLE.iter().map(|&side| thin_pass(&mut out, side)).sum();
            if removed == 0 {
                break;
            }
        }
        if break_blocks(&mut out) == 0 && !open_loop_block(&mut out) {
            return out;
        }
    }
}

/// Whether any 2×2 window is entirely foreground.
pub fn has_solid_2x2(img: &BinaryImage) -> bool {
    img.foreground()
        .any(|(x, y)| img.get(x + 1, y) && img.get(x, y + 1) && img.get(x + 1, y + 1))
}
