//! Radial shape descriptor ("flag vector").
//!
//! Rays are cast from the region's centre of gravity at `2πk/n`. Each ray's arm is
//! the distance to the first boundary crossing: where the region is left when the
//! centre lies inside it, or where it is first entered when the centre falls in a
//! hole. Arms are divided by the region's largest radial extent (the farthest
//! region sample over all rays), so values are scale-free and lie in `[0, 1]`.
//! Samples are snapped to the nearest pixel. A lone pixel reaches exactly half a
//! pixel along most rays, so an extent of at most 0.5 px yields the zero vector.

use super::ShapeError;
use crate::imaging::BinaryImage;
use crate::segmentation::{centroid, region_pixels, RegionNode};

pub const DEFAULT_RAYS: usize = 70;
const STEP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct FlagVector(pub Vec<f64>);

impl FlagVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cyclic left shift by `k`.
    pub fn shifted(&self, k: usize) -> FlagVector {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let n = v.len();
            v.rotate_left(k % n);
        }
        FlagVector(v)
    }
}

pub fn extract_flag_vector(
    img: &BinaryImage,
    node: &RegionNode,
    rays: usize,
) -> Result<FlagVector, ShapeError> {
    if rays == 0 {
        return Err(ShapeError::ZeroRays);
    }
    let pixels = region_pixels(node, img);
    if pixels.is_empty() {
        return Err(ShapeError::EmptyRegion);
    }
    let c = centroid(node, img).map_err(|_| ShapeError::EmptyRegion)?;

    let b = node.bbox;
    let (bw, bh) = (b.width() as usize, b.height() as usize);
    let mut member = vec![false; bw * bh];
    for p in &pixels {
        member[(p.y - b.min_y) as usize * bw + (p.x - b.min_x) as usize] = true;
    }
    let inside = |x: f64, y: f64| -> bool {
        let (px, py) = (x.round() as i64, y.round() as i64);
        let (lx, ly) = (px - i64::from(b.min_x), py - i64::from(b.min_y));
        lx >= 0
            && ly >= 0
            && (lx as usize) < bw
            && (ly as usize) < bh
            && member[ly as usize * bw + lx as usize]
    };

    let steps = (b.diagonal() / STEP).ceil() as usize;
    let mut arms = Vec::with_capacity(rays);
    let mut extent = 0.0f64;
    for k in 0..rays {
        let theta = std::f64::consts::TAU * k as f64 / rays as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        let start_inside = inside(c.x, c.y);
        let mut arm = None;
        let mut last_inside = if start_inside { Some(0.0) } else { None };
        for s in 1..=steps {
            let t = s as f64 * STEP;
            let hit = inside(c.x + t * dx, c.y + t * dy);
            if hit {
                last_inside = Some(t);
            }
            if arm.is_none() && hit != start_inside {
                arm = Some(if start_inside {
                    (s - 1) as f64 * STEP
                } else {
                    t
                });
            }
        }
        let farthest = last_inside.unwrap_or(0.0);
        extent = extent.max(farthest);
        arms.push(arm.unwrap_or(farthest));
    }
    if extent <= 0.5 {
        return Ok(FlagVector(vec![0.0; rays]));
    }
    Ok(FlagVector(
        arms.into_iter()
            .map(|a| (a / extent).clamp(0.0, 1.0))
            .collect(),
    ))
}

/// Lexicographically greatest cyclic shift.
pub fn canonicalize(v: &FlagVector) -> FlagVector {
    let n = v.0.len();
    let cmp_shift = |a: usize, b: usize| {
        (0..n)
            .map(|i| v.0[(a + i) % n].total_cmp(&v.0[(b + i) % n]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    let best = (0..n).fold(
        0,
        |best, k| if cmp_shift(k, best).is_gt() { k } else { best },
    );
    v.shifted(best)
}
