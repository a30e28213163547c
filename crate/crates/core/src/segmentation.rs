//! Region hierarchy, polygon approximation and quad candidates.
//!
//! Contours come from Suzuki–Abe border following: foreground is 8-connected,
//! background 4-connected, and everything outside the raster counts as background.
//! Each border becomes a [`RegionNode`]; outer borders own their holes as children
//! and holes own whatever regions sit inside them.

use crate::geometry::Point2;
use crate::imaging::BinaryImage;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("region has no pixels")]
    EmptyRegion,
}

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    fn to_f64(self) -> (f64, f64) {
        (f64::from(self.x), f64::from(self.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    Outer,
    Hole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    /// Closed, 8-connected boundary; all points are foreground pixels.
    pub points: Vec<PixelPoint>,
    pub kind: ContourKind,
}

impl Contour {
    /// Closed polyline length through the pixel coordinates.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let (ax, ay) = self.points[i].to_f64();
                let (bx, by) = self.points[(i + 1) % n].to_f64();
                (ax - bx).hypot(ay - by)
            })
            .sum()
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub min_x: i32,
    pub min_y: i32,
    pub max_x: i32,
    pub max_y: i32,
}

impl BBox {
    fn of(points: &[PixelPoint]) -> BBox {
        let mut b = BBox {
            min_x: i32::MAX,
            min_y: i32::MAX,
            max_x: i32::MIN,
            max_y: i32::MIN,
        };
        for p in points {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        b
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.min_x <= other.min_x
            && self.min_y <= other.min_y
            && self.max_x >= other.max_x
            && self.max_y >= other.max_y
    }

    pub fn width(&self) -> i32 {
        self.max_x - self.min_x + 1
    }

    pub fn height(&self) -> i32 {
        self.max_y - self.min_y + 1
    }

    /// Diagonal length of the box in pixels.
    pub fn diagonal(&self) -> f64 {
        f64::from(self.width()).hypot(f64::from(self.height()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionNode {
    pub contour: Contour,
    pub children: Vec<RegionNode>,
    /// Foreground pixels of the region for outer nodes, background pixels of the
    /// hole for hole nodes. Nested regions are not included.
    pub pixel_count: usize,
    pub bbox: BBox,
}

impl RegionNode {
    pub fn is_outer(&self) -> bool {
        self.contour.kind == ContourKind::Outer
    }

    /// Depth-first pre-order walk over this node and all descendants.
    pub fn walk(&self) -> impl Iterator<Item = &RegionNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }
}

/// Pre-order walk over a forest.
pub fn walk_all(nodes: &[RegionNode]) -> impl Iterator<Item = &RegionNode> {
    nodes.iter().flat_map(RegionNode::walk)
}

// Neighbour offsets in clockwise order (y grows downward): W NW N NE E SE S SW.
const DIRS: [(i32, i32); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];
const EAST: usize = 4;

fn dir_index(dx: i32, dy: i32) -> usize {
    DIRS.iter()
        .position(|&d| d == (dx, dy))
        .expect("neighbour offset")
}

struct RawBorder {
    points: Vec<PixelPoint>,
    kind: ContourKind,
    parent: Option<usize>,
    start: PixelPoint,
}

/// Suzuki–Abe border following over a zero-padded copy of the mask.
fn follow_borders(img: &BinaryImage) -> Vec<RawBorder> {
    let w = img.width() as usize + 2;
    let h = img.height() as usize + 2;
    let mut f = vec![0i32; w * h];
    for y in 0..img.height() as usize {
        for x in 0..img.width() as usize {
            if img.get(x as u32, y as u32) {
                f[(y + 1) * w + x + 1] = 1;
            }
        }
    }
    let at = |x: i32, y: i32| y as usize * w + x as usize;

    let mut borders: Vec<RawBorder> = Vec::new();
    let mut nbd = 1i32;
    for y in 1..h as i32 - 1 {
        let mut lnbd = 1i32;
        for x in 1..w as i32 - 1 {
            let v = f[at(x, y)];
            if v == 0 {
                continue;
            }
            let start = if v == 1 && f[at(x - 1, y)] == 0 {
                Some((ContourKind::Outer, (x - 1, y)))
            } else if v >= 1 && f[at(x + 1, y)] == 0 {
                if v > 1 {
                    lnbd = v;
                }
                Some((ContourKind::Hole, (x + 1, y)))
            } else {
                None
            };

            if let Some((kind, (sx, sy))) = start {
                nbd += 1;
                let parent = if lnbd <= 1 {
                    None
                } else {
                    let prev = (lnbd - 2) as usize;
                    if (kind == ContourKind::Outer) != (borders[prev].kind == ContourKind::Outer) {
                        Some(prev)
                    } else {
                        borders[prev].parent
                    }
                };

                let mut points = Vec::new();
                let k0 = dir_index(sx - x, sy - y);
                let first = (0..8)
                    .map(|t| DIRS[(k0 + t) % 8])
                    .find(|&(dx, dy)| f[at(x + dx, y + dy)] != 0);
                match first {
                    None => {
                        points.push(PixelPoint::new(x - 1, y - 1));
                        f[at(x, y)] = -nbd;
                    }
                    Some((dx1, dy1)) => {
                        let p1 = (x + dx1, y + dy1);
                        let mut p2 = p1;
                        let mut p3 = (x, y);
                        loop {
                            points.push(PixelPoint::new(p3.0 - 1, p3.1 - 1));
                            let k = dir_index(p2.0 - p3.0, p2.1 - p3.1);
                            let mut east_zero = false;
                            let mut p4 = p3;
                            for t in 1..=8 {
                                let kk = (k + 8 - t) % 8;
                                let (dx, dy) = DIRS[kk];
                                let q = (p3.0 + dx, p3.1 + dy);
                                if f[at(q.0, q.1)] != 0 {
                                    p4 = q;
                                    break;
                                }
                                if kk == EAST {
                                    east_zero = true;
                                }
                            }
                            let i3 = at(p3.0, p3.1);
                            if east_zero {
                                f[i3] = -nbd;
                            } else if f[i3] == 1 {
                                f[i3] = nbd;
                            }
                            if p4 == (x, y) && p3 == p1 {
                                break;
                            }
                            p2 = p3;
                            p3 = p4;
                        }
                    }
                }
                borders.push(RawBorder {
                    points,
                    kind,
                    parent,
                    start: PixelPoint::new(x - 1, y - 1),
                });
            }

            let v = f[at(x, y)];
            if v != 1 {
                lnbd = v.abs();
            }
        }
    }
    borders
}

/// Connected-component labels: foreground 8-connected, background 4-connected.
/// Returns per-pixel labels plus the pixel count of each label (index 0 unused).
fn label_components(img: &BinaryImage) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut labels = vec![0u32; (w * h) as usize];
    let mut counts = vec![0usize];
    let mut stack = Vec::new();
    for start in 0..(w * h) {
        if labels[start as usize] != 0 {
            continue;
        }
        let fg = img.mask()[start as usize] != 0;
        let label = counts.len() as u32;
        let mut count = 0usize;
        labels[start as usize] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            count += 1;
            let (x, y) = (i % w, i / w);
            for (dx, dy) in DIRS {
                if !fg && dx != 0 && dy != 0 {
                    continue;
                }
                let (nx, ny) = (x + i64::from(dx), y + i64::from(dy));
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if labels[j] == 0 && (img.mask()[j] != 0) == fg {
                    labels[j] = label;
                    stack.push(j as i64);
                }
            }
        }
        counts.push(count);
    }
    (labels, counts)
}

/// Trace every region boundary and assemble the containment tree.
///
/// Nodes (and children) appear in raster order of the first boundary pixel met.
pub fn trace_contours(img: &BinaryImage) -> Vec<RegionNode> {
    let borders = follow_borders(img);
    if borders.is_empty() {
        return Vec::new();
    }
    let (labels, counts) = label_components(img);
    let w = img.width() as i32;
    let pixel_count = |b: &RawBorder| -> usize {
        let p = match b.kind {
            ContourKind::Outer => b.start,
            ContourKind::Hole => PixelPoint::new(b.start.x + 1, b.start.y),
        };
        counts[labels[(p.y * w + p.x) as usize] as usize]
    };

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); borders.len()];
    let mut roots = Vec::new();
    for (i, b) in borders.iter().enumerate() {
        match b.parent {
            Some(p) => children[p].push(i),
            None => roots.push(i),
        }
    }

    fn build(
        i: usize,
        borders: &[RawBorder],
        children: &[Vec<usize>],
        count: &dyn Fn(&RawBorder) -> usize,
    ) -> RegionNode {
        let b = &borders[i];
        RegionNode {
            contour: Contour {
                points: b.points.clone(),
                kind: b.kind,
            },
            children: children[i]
                .iter()
                .map(|&c| build(c, borders, children, count))
                .collect(),
            pixel_count: count(b),
            bbox: BBox::of(&b.points),
        }
    }
    roots
        .into_iter()
        .map(|i| build(i, &borders, &children, &pixel_count))
        .collect()
}

/// Pixels belonging to the region a node bounds.
///
/// Outer nodes yield their 8-connected foreground component, hole nodes the
/// 4-connected background pixels of the hole.
pub fn region_pixels(node: &RegionNode, img: &BinaryImage) -> Vec<PixelPoint> {
    let (seed, fg) = match node.contour.kind {
        ContourKind::Outer => (node.contour.points[0], true),
        ContourKind::Hole => {
            let s = node.contour.points[0];
            (PixelPoint::new(s.x + 1, s.y), false)
        }
    };
    if img.get_signed(i64::from(seed.x), i64::from(seed.y)) != fg {
        return Vec::new();
    }
    let (w, h) = (img.width() as i32, img.height() as i32);
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    let mut stack = vec![seed];
    seen[(seed.y * w + seed.x) as usize] = true;
    while let Some(p) = stack.pop() {
        out.push(p);
        for (dx, dy) in DIRS {
            if !fg && dx != 0 && dy != 0 {
                continue;
            }
            let q = PixelPoint::new(p.x + dx, p.y + dy);
            if q.x < 0 || q.y < 0 || q.x >= w || q.y >= h {
                continue;
            }
            let idx = (q.y * w + q.x) as usize;
            if !seen[idx] && img.get(q.x as u32, q.y as u32) == fg {
                seen[idx] = true;
                stack.push(q);
            }
        }
    }
    out.sort_unstable_by_key(|p| (p.y, p.x));
    out
}

/// Mean pixel coordinate of the region's own pixels (pixel-index coordinates).
pub fn centroid(node: &RegionNode, img: &BinaryImage) -> Result<Point2, SegmentationError> {
    let pixels = region_pixels(node, img);
    if pixels.is_empty() {
        return Err(SegmentationError::EmptyRegion);
    }
    let n = pixels.len() as f64;
    let (sx, sy) = pixels.iter().fold((0.0, 0.0), |(sx, sy), p| {
        (sx + f64::from(p.x), sy + f64::from(p.y))
    });
    Ok(Point2::new(sx / n, sy / n))
}

fn segment_distance(p: PixelPoint, a: PixelPoint, b: PixelPoint) -> f64 {
    let (px, py) = p.to_f64();
    let (ax, ay) = a.to_f64();
    let (bx, by) = b.to_f64();
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (px - ax).hypot(py - ay);
    }
    let t = (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0);
    (px - ax - t * dx).hypot(py - ay - t * dy)
}

fn dist2(a: PixelPoint, b: PixelPoint) -> i64 {
    let dx = i64::from(a.x - b.x);
    let dy = i64::from(a.y - b.y);
    dx * dx + dy * dy
}

fn farthest_from(points: &[PixelPoint], from: usize) -> usize {
    let mut best = from;
    let mut best_d = -1;
    for (i, &p) in points.iter().enumerate() {
        let d = dist2(points[from], p);
        if d > best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Ramer–Douglas–Peucker simplification of a closed contour.
///
/// The contour is split at a mutually farthest pair of points and each arc is
/// simplified independently. The result is a subsequence of the input in contour
/// order, and every input point lies within `eps` of the output polygon.
pub fn polygon_approx(contour: &Contour, eps: f64) -> Vec<PixelPoint> {
    let pts = &contour.points;
    let n = pts.len();
    if n <= 2 {
        return pts.clone();
    }
    // walk to a pair where each point is the other's farthest
    let mut a = farthest_from(pts, 0);
    let mut b = farthest_from(pts, a);
    for _ in 0..n {
        let next = farthest_from(pts, b);
        if dist2(pts[next], pts[b]) <= dist2(pts[a], pts[b]) {
            break;
        }
        a = b;
        b = next;
    }
    if a == b {
        return vec![pts[a]];
    }
    let (a, b) = (a.min(b), a.max(b));

    let mut keep = vec![false; n];
    keep[a] = true;
    keep[b] = true;
    // arcs as (start, end) with end expressed past n when wrapping
    let mut stack = vec![(a, b), (b, a + n)];
    while let Some((s, e)) = stack.pop() {
        if e <= s + 1 {
            continue;
        }
        let (ps, pe) = (pts[s % n], pts[e % n]);
        let mut best = s;
        let mut best_d = -1.0;
        for i in s + 1..e {
            let d = segment_distance(pts[i % n], ps, pe);
            if d > best_d {
                best = i;
                best_d = d;
            }
        }
        if best_d > eps {
            keep[best % n] = true;
            stack.push((s, best));
            stack.push((best, e));
        }
    }
    pts.iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .collect()
}

/// A convex four-cornered marker candidate.
///
/// Corners are in pixel-edge coordinates, clockwise on screen (y down), starting
/// with the corner closest to the image origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCandidate {
    pub corners: [Point2; 4],
    pub perimeter: f64,
    pub area: f64,
}

fn signed_area(c: &[Point2; 4]) -> f64 {
    (0..4)
        .map(|i| {
            let (p, q) = (c[i], c[(i + 1) % 4]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
        / 2.0
}

impl QuadCandidate {
    /// Normalize corner order and compute perimeter and area.
    pub fn from_corners(corners: [Point2; 4]) -> Self {
        let mut c = corners;
        if signed_area(&c) < 0.0 {
            c.reverse();
        }
        let start = (0..4)
            .min_by(|&i, &j| {
                let key = |p: Point2| (p.x * p.x + p.y * p.y, p.y, p.x);
                let (a, b) = (key(c[i]), key(c[j]));
                a.0.total_cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(a.2.total_cmp(&b.2))
            })
            .expect("four corners");
        c.rotate_left(start);
        let perimeter = (0..4).map(|i| c[i].dist(c[(i + 1) % 4])).sum();
        QuadCandidate {
            corners: c,
            perimeter,
            area: signed_area(&c),
        }
    }

    /// Every turn has the same strictly positive orientation.
    pub fn is_strictly_convex(&self) -> bool {
        (0..4).all(|i| {
            let (a, b, c) = (
                self.corners[i],
                self.corners[(i + 1) % 4],
                self.corners[(i + 2) % 4],
            );
            (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x) > 0.0
        })
    }

    /// Axis-aligned bounds `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.corners.iter().fold(
            (
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY,
            ),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }

    /// Point-in-polygon test for a convex quad.
    pub fn contains(&self, p: Point2) -> bool {
        (0..4).all(|i| {
            let (a, b) = (self.corners[i], self.corners[(i + 1) % 4]);
            (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    pub min_area: f64,
    pub eps_frac: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            min_area: 100.0,
            eps_frac: 0.05,
        }
    }
}

/// Vertex pixel centres pushed half a pixel diagonal outward from the quad centre.
fn vertices_to_corners(v: &[PixelPoint]) -> [Point2; 4] {
    let centres: Vec<Point2> = v
        .iter()
        .map(|p| Point2::new(f64::from(p.x) + 0.5, f64::from(p.y) + 0.5))
        .collect();
    let cx = centres.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = centres.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let push = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = [Point2::default(); 4];
    for (o, p) in out.iter_mut().zip(&centres) {
        let (dx, dy) = (p.x - cx, p.y - cy);
        let len = dx.hypot(dy);
        *o = if len > 0.0 {
            Point2::new(p.x + push * dx / len, p.y + push * dy / len)
        } else {
            *p
        };
    }
    out
}

/// Outer contours that simplify to a convex quadrilateral of sufficient area.
pub fn find_quads(nodes: &[RegionNode], params: QuadParams) -> Vec<QuadCandidate> {
    walk_all(nodes)
        .filter(|n| n.is_outer() && n.contour.points.len() >= 4)
        .filter_map(|n| {
            let eps = params.eps_frac * n.contour.perimeter();
            if eps <= 0.0 {
                return None;
            }
            let poly = polygon_approx(&n.contour, eps);
            if poly.len() != 4 {
                return None;
            }
            let quad = QuadCandidate::from_corners(vertices_to_corners(&poly));
            (quad.is_strictly_convex() && quad.area >= params.min_area).then_some(quad)
        })
        .collect()
}
