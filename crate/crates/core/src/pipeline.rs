//! End-to-end detection: threshold, trace, find quads, rectify, identify.

use crate::geometry::{warp_patch, Point2};
use crate::golay::{read_canonical, MarkerId, DEFAULT_MIN_CONTRAST, PATCH_SIZE};
use crate::imaging::{threshold_adaptive, threshold_global, BinaryImage, GrayImage};
use crate::segmentation::{centroid, find_quads, trace_contours, QuadCandidate, QuadParams};
use crate::shape::{canonicalize, extract_flag_vector, MlpModel, ShapeError, DEFAULT_RAYS};
use crate::template::{TemplateError, TemplateLibrary};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    Global(u8),
    Adaptive { window: u32, c: i32 },
}

impl Default for ThresholdMethod {
    fn default() -> Self {
        ThresholdMethod::Adaptive { window: 15, c: 7 }
    }
}

impl ThresholdMethod {
    pub fn apply(&self, img: &GrayImage) -> BinaryImage {
        match *self {
            ThresholdMethod::Global(t) => threshold_global(img, t),
            ThresholdMethod::Adaptive { window, c } => threshold_adaptive(img, window, c),
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMethod::Global(t) => write!(f, "global:{t}"),
            ThresholdMethod::Adaptive { window, c } => write!(f, "adaptive:{window},{c}"),
        }
    }
}

/// Parses `global:<t>` or `adaptive:<window>,<c>`.
impl FromStr for ThresholdMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("expected global:<t> or adaptive:<w>,<c>, got {s:?}"))?;
        match kind {
            "global" => args
                .parse()
                .map(ThresholdMethod::Global)
                .map_err(|_| format!("bad global threshold {args:?}")),
            "adaptive" => {
                let (w, c) = args
                    .split_once(',')
                    .ok_or_else(|| format!("expected <window>,<c>, got {args:?}"))?;
                let window: u32 = w.parse().map_err(|_| format!("bad window {w:?}"))?;
                let c: i32 = c.parse().map_err(|_| format!("bad offset {c:?}"))?;
                if window < 3 || window.is_multiple_of(2) {
                    return Err(format!("window must be odd and >= 3, got {window}"));
                }
                Ok(ThresholdMethod::Adaptive { window, c })
            }
            other => Err(format!("unknown threshold method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub threshold: ThresholdMethod,
    pub quad: QuadParams,
    pub min_contrast: f64,
    /// Bounding-box IoU above which two detections are the same marker.
    pub dedupe_iou: f64,
    pub rays: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMethod::default(),
            quad: QuadParams::default(),
            min_contrast: DEFAULT_MIN_CONTRAST,
            dedupe_iou: 0.5,
            rays: DEFAULT_RAYS,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("adaptive window must be odd and >= 3, got {0}")]
    Window(u32),
    #[error("{0} must be finite and non-negative")]
    Negative(&'static str),
    #[error("eps_frac must be in (0, 1), got {0}")]
    EpsFrac(f64),
    #[error("dedupe IoU must be in [0, 1], got {0}")]
    Iou(f64),
    #[error("ray count must be positive")]
    Rays,
}

impl DetectConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let ThresholdMethod::Adaptive { window, .. } = self.threshold {
            if window < 3 || window % 2 == 0 {
                return Err(ConfigError::Window(window));
            }
        }
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !non_negative(self.quad.min_area) {
            return Err(ConfigError::Negative("min_area"));
        }
        if !non_negative(self.min_contrast) {
            return Err(ConfigError::Negative("min_contrast"));
        }
        if !(self.quad.eps_frac > 0.0 && self.quad.eps_frac < 1.0) {
            return Err(ConfigError::EpsFrac(self.quad.eps_frac));
        }
        if !(0.0..=1.0).contains(&self.dedupe_iou) {
            return Err(ConfigError::Iou(self.dedupe_iou));
        }
        if self.rays == 0 {
            return Err(ConfigError::Rays);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerDetection {
    pub id: MarkerId,
    /// Quad corners in image coordinates, clockwise from the one nearest the origin.
    pub corners: [Point2; 4],
    /// Clockwise quarter turns that brought the sampled grid upright.
    pub rotation: u8,
    pub corrected_bits: u8,
}

fn bbox_iou(a: &QuadCandidate, b: &QuadCandidate) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.bounds();
    let (bx0, by0, bx1, by1) = b.bounds();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    let union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Locate and decode every Golay marker in a frame.
///
/// Overlapping detections (bounding-box IoU above `dedupe_iou`) collapse to the one
/// with fewest corrected bits, then larger area. A detection lying wholly inside a
/// larger decoded marker is dropped: marker interiors carry data, not markers.
/// Output is sorted by the first corner's `(y, x)`.
pub fn detect_markers(img: &GrayImage, cfg: &DetectConfig) -> Vec<MarkerDetection> {
    let mask = cfg.threshold.apply(img);
    let nodes = trace_contours(&mask);
    let quads = find_quads(&nodes, cfg.quad);

    let mut found: Vec<(QuadCandidate, MarkerDetection)> = quads
        .into_iter()
        .filter_map(|q| {
            let patch = warp_patch(img, &q, PATCH_SIZE, PATCH_SIZE).ok()?;
            let read = read_canonical(&patch, cfg.min_contrast).ok()??;
            Some((
                q,
                MarkerDetection {
                    id: read.id,
                    corners: q.corners,
                    rotation: read.rotation,
                    corrected_bits: read.corrected,
                },
            ))
        })
        .collect();

    found.sort_by(|(qa, a), (qb, b)| {
        a.corrected_bits
            .cmp(&b.corrected_bits)
            .then(qb.area.total_cmp(&qa.area))
    });
    let mut kept: Vec<(QuadCandidate, MarkerDetection)> = Vec::new();
    for (q, d) in found {
        if kept.iter().any(|(k, _)| bbox_iou(k, &q) > cfg.dedupe_iou) {
            continue;
        }
        kept.push((q, d));
    }
    let outer: Vec<QuadCandidate> = kept.iter().map(|(q, _)| *q).collect();
    let mut out: Vec<MarkerDetection> = kept
        .into_iter()
        .filter(|(q, _)| {
            !outer
                .iter()
                .any(|o| o.area > q.area && q.corners.iter().all(|&c| o.contains(c)))
        })
        .map(|(_, d)| d)
        .collect();
    out.sort_by(|a, b| corner_order(&a.corners[0], &b.corners[0]));
    out
}

fn corner_order(a: &Point2, b: &Point2) -> Ordering {
    a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDetection {
    pub label: String,
    pub confidence: f64,
    pub centroid: Point2,
    pub pixel_count: usize,
}

/// Classify every top-level region of at least `quad.min_area` pixels, largest first.
pub fn recognize_shapes(
    img: &GrayImage,
    cfg: &DetectConfig,
    model: &MlpModel,
) -> Result<Vec<ShapeDetection>, ShapeError> {
    if model.input_dim() != cfg.rays {
        return Err(ShapeError::Dimension {
            expected: cfg.rays,
            got: model.input_dim(),
        });
    }
    let mask = cfg.threshold.apply(img);
    let mut out = Vec::new();
    for node in trace_contours(&mask) {
        if (node.pixel_count as f64) < cfg.quad.min_area {
            continue;
        }
        let v = canonicalize(&extract_flag_vector(&mask, &node, cfg.rays)?);
        let c = model.classify(v.values())?;
        out.push(ShapeDetection {
            label: c.label,
            confidence: c.confidence,
            centroid: centroid(&node, &mask).map_err(|_| ShapeError::EmptyRegion)?,
            pixel_count: node.pixel_count,
        });
    }
    out.sort_by_key(|s| std::cmp::Reverse(s.pixel_count));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDetection {
    pub label: String,
    pub score: f64,
    pub corners: [Point2; 4],
}

/// Rectify every quad candidate to the library's patch size and correlate it.
///
/// An image that already has the library's patch size is matched as a whole and
/// reported with its own outline as corners.
pub fn match_templates(
    img: &GrayImage,
    cfg: &DetectConfig,
    lib: &TemplateLibrary,
) -> Result<Vec<TemplateDetection>, TemplateError> {
    let (pw, ph) = lib.patch_size();
    if (img.width(), img.height()) == (pw, ph) {
        let (w, h) = (f64::from(pw), f64::from(ph));
        let outline = [
            Point2::new(0.0, 0.0),
            Point2::new(w, 0.0),
            Point2::new(w, h),
            Point2::new(0.0, h),
        ];
        return Ok(lib
            .best_match(img)?
            .map(|m| TemplateDetection {
                label: m.label,
                score: m.score,
                corners: outline,
            })
            .into_iter()
            .collect());
    }
    let mask = cfg.threshold.apply(img);
    let quads = find_quads(&trace_contours(&mask), cfg.quad);
    let mut out = Vec::new();
    for q in quads {
        let Ok(patch) = warp_patch(img, &q, pw, ph) else {
            continue;
        };
        match lib.best_match(&patch) {
            Ok(Some(m)) => out.push(TemplateDetection {
                label: m.label,
                score: m.score,
                corners: q.corners,
            }),
            Ok(None) | Err(TemplateError::ZeroVariance) => {}
            Err(e) => return Err(e),
        }
    }
    out.sort_by(|a, b| corner_order(&a.corners[0], &b.corners[0]));
    Ok(out)
}
