//! Centroid-anchored 12-sector pixel-distribution features, plus per-segment
//! stroke angles.

use std::fmt;
use std::str::FromStr;

use crate::image::{BinaryImage, ImageError};
use crate::stroke::Stroke;

/// Number of 30° angular blocks around the centroid.
pub const SECTORS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub cx: f64,
    pub cy: f64,
}

/// Fraction of foreground pixels per sector, indexed counter-clockwise from
/// the positive x-axis in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; SECTORS]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for FeatureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("expected {SECTORS} comma-separated numbers: {0}")]
pub struct ParseFeatureError(String);

impl FromStr for FeatureVector {
    type Err = ParseFeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| ParseFeatureError(e.to_string()))?;
        let arr: [f64; SECTORS] = values
            .try_into()
            .map_err(|v: Vec<f64>| ParseFeatureError(format!("got {} values", v.len())))?;
        Ok(FeatureVector(arr))
    }
}

/// Mean foreground pixel position.
pub fn centroid(img: &BinaryImage) -> Result<Centroid, ImageError> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in img.foreground() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    if n == 0 {
        return Err(ImageError::EmptyImage);
    }
    Ok(Centroid {
        cx: sx / n as f64,
        cy: sy / n as f64,
    })
}

/// `floor(angle / 30°)` with `angle = atan2(py - cy, px - cx)` in `[0°, 360°)`.
///
/// Evaluated exactly: the quadrant comes from the signs and the block inside
/// it from comparing squared offsets against `tan 30°` and `tan 60°`, so
/// axis-aligned offsets never fall into the wrong block through rounding.
/// The centroid itself maps to sector 0.
pub fn sector_index(px: f64, py: f64, c: Centroid) -> usize {
    let (dx, dy) = (px - c.cx, py - c.cy);
    if dx == 0.0 && dy == 0.0 {
        return 0;
    }
    // Rotate into the first quadrant: u > 0, v >= 0.
    let (quadrant, u, v) = if dx > 0.0 && dy >= 0.0 {
        (0, dx, dy)
    } else if dx <= 0.0 && dy > 0.0 {
        (1, dy, -dx)
    } else if dx < 0.0 && dy <= 0.0 {
        (2, -dx, -dy)
    } else {
        (3, -dy, dx)
    };
    let block = if 3.0 * v * v < u * u {
        0
    } else if v * v < 3.0 * u * u {
        1
    } else {
        2
    };
    quadrant * 3 + block
}

/// Sector histogram of a set of points around their own centroid.
pub fn point_features(points: &[(f64, f64)]) -> Option<FeatureVector> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let c = Centroid {
        cx: points.iter().map(|p| p.0).sum::<f64>() / n,
        cy: points.iter().map(|p| p.1).sum::<f64>() / n,
    };
    let mut counts = [0usize; SECTORS];
    for &(x, y) in points {
        counts[sector_index(x, y, c)] += 1;
    }
    Some(FeatureVector(counts.map(|k| k as f64 / n)))
}

pub fn extract_features(img: &BinaryImage) -> Result<FeatureVector, ImageError> {
    let c = centroid(img)?;
    let mut counts = [0usize; SECTORS];
    let mut total = 0usize;
    for (x, y) in img.foreground() {
        counts[sector_index(x as f64, y as f64, c)] += 1;
        total += 1;
    }
    Ok(FeatureVector(counts.map(|k| k as f64 / total as f64)))
}

/// Direction of every consecutive point pair in degrees, `[0, 360)`.
pub fn segment_angles(s: &Stroke) -> Vec<f64> {
    s.points
        .windows(2)
        .map(|w| {
            let deg = (w[1].y - w[0].y).atan2(w[1].x - w[0].x).to_degrees();
            let deg = if deg < 0.0 { deg + 360.0 } else { deg };
            if deg >= 360.0 {
                0.0
            } else {
                deg
            }
        })
        .collect()
}
