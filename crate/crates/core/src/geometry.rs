//! Planar homographies and perspective patch extraction.
//!
//! Continuous coordinates follow the pixel-edge convention: pixel `(i, j)` covers
//! `[i, i+1) x [j, j+1)` and its centre sits at `(i + 0.5, j + 0.5)`.

use crate::imaging::GrayImage;
use crate::segmentation::QuadCandidate;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate point correspondences (singular system)")]
    Degenerate,
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("output patch must be at least 1x1")]
    EmptyPatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// 3x3 projective transform, row-major, normalized so that the last element is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub const IDENTITY: Homography = Homography {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Build from a raw matrix, rescaling so that `m[2][2] == 1`.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, GeometryError> {
        let s = m[2][2];
        if s.abs() < 1e-15 || !m.iter().flatten().all(|v| v.is_finite()) {
            return Err(GeometryError::Degenerate);
        }
        let mut out = m;
        out.iter_mut().flatten().for_each(|v| *v /= s);
        let h = Self { m: out };
        if h.determinant().abs() < 1e-15 {
            return Err(GeometryError::Degenerate);
        }
        Ok(h)
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Projective application with perspective divide.
    pub fn apply(&self, p: Point2) -> Result<Point2, GeometryError> {
        let m = &self.m;
        let w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
        if w.abs() < 1e-12 {
            return Err(GeometryError::PointAtInfinity);
        }
        Ok(Point2 {
            x: (m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w,
            y: (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w,
        })
    }
}

/// Homography mapping each `src[i]` onto `dst[i]` (4-point DLT with `h33 = 1`).
pub fn homography_from_points(
    src: &[Point2; 4],
    dst: &[Point2; 4],
) -> Result<Homography, GeometryError> {
    if has_collinear_triple(src) || has_collinear_triple(dst) {
        return Err(GeometryError::Degenerate);
    }
    let mut a = [[0.0f64; 9]; 8];
    for i in 0..4 {
        let (x, y) = (src[i].x, src[i].y);
        let (u, v) = (dst[i].x, dst[i].y);
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    let h = solve8(a).ok_or(GeometryError::Degenerate)?;
    Homography::from_matrix([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])
}

fn has_collinear_triple(p: &[Point2; 4]) -> bool {
    let scale = p
        .iter()
        .flat_map(|a| p.iter().map(move |b| a.dist(*b)))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return true;
    }
    const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];
    TRIPLES.iter().any(|&(i, j, k)| {
        let cross = (p[j].x - p[i].x) * (p[k].y - p[i].y) - (p[j].y - p[i].y) * (p[k].x - p[i].x);
        cross.abs() <= 1e-12 * scale * scale
    })
}

/// Gaussian elimination with partial pivoting on an augmented 8x9 system.
fn solve8(mut a: [[f64; 9]; 8]) -> Option<[f64; 8]> {
    let norm = a
        .iter()
        .flat_map(|r| r[..8].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return None;
    }
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * norm {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col];
                for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * p;
                }
            }
        }
    }
    let mut x = [0.0f64; 8];
    for row in (0..8).rev() {
        let mut s = a[row][8];
        for k in row + 1..8 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Bilinear sample at a continuous position; out-of-image neighbours read as white.
pub fn sample_bilinear(img: &GrayImage, p: Point2) -> f64 {
    let fx = p.x - 0.5;
    let fy = p.y - 0.5;
    let x0 = fx.floor();
    let y0 = fy.floor();
    let tx = fx - x0;
    let ty = fy - y0;
    let (w, h) = (i64::from(img.width()), i64::from(img.height()));
    let px = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w || y >= h {
            255.0
        } else {
            f64::from(img.get(x as u32, y as u32))
        }
    };
    let (xi, yi) = (x0 as i64, y0 as i64);
    let top = px(xi, yi) * (1.0 - tx) + px(xi + 1, yi) * tx;
    let bottom = px(xi, yi + 1) * (1.0 - tx) + px(xi + 1, yi + 1) * tx;
    top * (1.0 - ty) + bottom * ty
}

/// Resample the quad's interior into an `out_w x out_h` fronto-parallel patch.
///
/// The patch corners `(0,0), (out_w,0), (out_w,out_h), (0,out_h)` map onto the quad
/// corners in order. Each output pixel centre is mapped through the homography and
/// sampled bilinearly.
pub fn warp_patch(
    img: &GrayImage,
    quad: &QuadCandidate,
    out_w: u32,
    out_h: u32,
) -> Result<GrayImage, GeometryError> {
    warp_corners(img, &quad.corners, out_w, out_h)
}

/// [`warp_patch`] for a bare corner array.
pub fn warp_corners(
    img: &GrayImage,
    corners: &[Point2; 4],
    out_w: u32,
    out_h: u32,
) -> Result<GrayImage, GeometryError> {
    if out_w == 0 || out_h == 0 {
        return Err(GeometryError::EmptyPatch);
    }
    let (w, h) = (f64::from(out_w), f64::from(out_h));
    let canonical = [
        Point2::new(0.0, 0.0),
        Point2::new(w, 0.0),
        Point2::new(w, h),
        Point2::new(0.0, h),
    ];
    let hom = homography_from_points(&canonical, corners)?;
    let mut pixels = Vec::with_capacity(out_w as usize * out_h as usize);
    for y in 0..out_h {
        for x in 0..out_w {
            let centre = Point2::new(f64::from(x) + 0.5, f64::from(y) + 0.5);
            let v = match hom.apply(centre) {
                Ok(src) => sample_bilinear(img, src),
                Err(_) => 255.0,
            };
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(GrayImage::new(out_w, out_h, pixels).expect("dimensions checked"))
}
