//! Synthetic scenes: placed markers and the five benchmark silhouettes.

use crate::geometry::{homography_from_points, sample_bilinear, GeometryError, Point2};
use crate::golay::{render_marker, MarkerError, MarkerId, GRID};
use crate::imaging::{BinaryImage, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Disc,
    Square,
    Triangle,
    Cross,
    Ring,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Disc,
        ShapeKind::Square,
        ShapeKind::Triangle,
        ShapeKind::Cross,
        ShapeKind::Ring,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Disc => "disc",
            ShapeKind::Square => "square",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Cross => "cross",
            ShapeKind::Ring => "ring",
        }
    }

    /// Membership in the unrotated shape of outer radius `r` centred at the origin.
    fn contains(self, x: f64, y: f64, r: f64) -> bool {
        match self {
            ShapeKind::Disc => x.hypot(y) <= r,
            ShapeKind::Square => x.abs() <= r && y.abs() <= r,
            ShapeKind::Triangle => {
                // equilateral, circumradius r, apothem r/2
                [-90f64, 30.0, 150.0].iter().all(|deg| {
                    let a = deg.to_radians();
                    x * a.cos() + y * a.sin() <= r / 2.0
                })
            }
            ShapeKind::Cross => {
                let arm = r / 3.0;
                (x.abs() <= arm && y.abs() <= r) || (y.abs() <= arm && x.abs() <= r)
            }
            ShapeKind::Ring => {
                let d = x.hypot(y);
                d <= r && d >= r / 2.0
            }
        }
    }
}

/// Draw a silhouette of outer size `size` px, rotated by `angle` radians about
/// `(cx, cy)`, into `mask`.
pub fn draw_shape(
    mask: &mut BinaryImage,
    kind: ShapeKind,
    cx: f64,
    cy: f64,
    size: f64,
    angle: f64,
) {
    let r = size / 2.0;
    let (s, c) = angle.sin_cos();
    let reach = r * std::f64::consts::SQRT_2 + 1.0;
    let x0 = (cx - reach).floor().max(0.0) as u32;
    let y0 = (cy - reach).floor().max(0.0) as u32;
    let x1 = ((cx + reach).ceil() as u32).min(mask.width() - 1);
    let y1 = ((cy + reach).ceil() as u32).min(mask.height() - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (f64::from(x) - cx, f64::from(y) - cy);
            // rotate the sample back into the shape frame
            let (u, v) = (c * dx + s * dy, -s * dx + c * dy);
            if kind.contains(u, v, r) {
                mask.set(x, y, true);
            }
        }
    }
}

/// A single centred silhouette on a canvas just large enough to hold it.
pub fn render_shape(kind: ShapeKind, size: f64, angle: f64) -> BinaryImage {
    let side = (size * std::f64::consts::SQRT_2).ceil() as u32 + 8;
    let mut mask = BinaryImage::empty(side, side);
    let c = f64::from(side) / 2.0;
    draw_shape(&mut mask, kind, c, c, size, angle);
    mask
}

/// Paste a rendered marker (with quiet zone) so that its grid corners land on
/// `corners` (clockwise from the grid's top-left). Returns the ground-truth corners.
pub fn place_marker(
    scene: &mut GrayImage,
    id: MarkerId,
    cell_px: u32,
    corners: [Point2; 4],
) -> Result<[Point2; 4], MarkerError> {
    let marker = render_marker(id, cell_px)?;
    let (lo, hi) = (f64::from(cell_px), f64::from(cell_px) * (GRID as f64 + 1.0));
    let grid = [
        Point2::new(lo, lo),
        Point2::new(hi, lo),
        Point2::new(hi, hi),
        Point2::new(lo, hi),
    ];
    paste_warped(scene, &marker, &grid, &corners).map_err(|_| MarkerError::CellSize)?;
    Ok(corners)
}

/// Axis-aligned placement with the quiet zone's top-left at `(x, y)`, optionally
/// turned by `quarter_turns` clockwise. Returns the grid corners in scene coordinates.
pub fn place_marker_aligned(
    scene: &mut GrayImage,
    id: MarkerId,
    cell_px: u32,
    x: u32,
    y: u32,
    quarter_turns: u8,
) -> Result<[Point2; 4], MarkerError> {
    let mut marker = render_marker(id, cell_px)?;
    for _ in 0..quarter_turns % 4 {
        marker = marker.rotate90();
    }
    for my in 0..marker.height() {
        for mx in 0..marker.width() {
            let (sx, sy) = (x + mx, y + my);
            if sx < scene.width() && sy < scene.height() {
                scene.set(sx, sy, marker.get(mx, my));
            }
        }
    }
    let (lo, hi) = (f64::from(cell_px), f64::from(cell_px) * (GRID as f64 + 1.0));
    let (fx, fy) = (f64::from(x), f64::from(y));
    Ok([
        Point2::new(fx + lo, fy + lo),
        Point2::new(fx + hi, fy + lo),
        Point2::new(fx + hi, fy + hi),
        Point2::new(fx + lo, fy + hi),
    ])
}

/// Inverse-map every scene pixel near `dst` into `src` and copy the bilinear sample.
/// Scene pixels whose preimage falls outside `src` are left untouched.
pub fn paste_warped(
    scene: &mut GrayImage,
    src: &GrayImage,
    src_pts: &[Point2; 4],
    dst_pts: &[Point2; 4],
) -> Result<(), GeometryError> {
    let to_src = homography_from_points(dst_pts, src_pts)?;
    let to_dst = homography_from_points(src_pts, dst_pts)?;
    let (sw, sh) = (f64::from(src.width()), f64::from(src.height()));
    let outline = [
        Point2::new(0.0, 0.0),
        Point2::new(sw, 0.0),
        Point2::new(sw, sh),
        Point2::new(0.0, sh),
    ];
    let mut bounds = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in outline {
        let q = to_dst.apply(p)?;
        bounds = (
            bounds.0.min(q.x),
            bounds.1.min(q.y),
            bounds.2.max(q.x),
            bounds.3.max(q.y),
        );
    }
    let x0 = bounds.0.floor().max(0.0) as u32;
    let y0 = bounds.1.floor().max(0.0) as u32;
    let x1 = (bounds.2.ceil().max(0.0) as u32).min(scene.width());
    let y1 = (bounds.3.ceil().max(0.0) as u32).min(scene.height());
    for y in y0..y1 {
        for x in x0..x1 {
            let Ok(p) = to_src.apply(Point2::new(f64::from(x) + 0.5, f64::from(y) + 0.5)) else {
                continue;
            };
            if p.x < 0.0 || p.y < 0.0 || p.x >= sw || p.y >= sh {
                continue;
            }
            scene.set(
                x,
                y,
                sample_bilinear(src, p).round().clamp(0.0, 255.0) as u8,
            );
        }
    }
    Ok(())
}
