//! Local vs. remote detection latency.

use super::client::{Client, ClientError, DEFAULT_TIMEOUT};
use super::protocol::{Request, Response, WireDetection};
use crate::imaging::GrayImage;
use crate::pipeline::{detect_markers, DetectConfig};
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error(transparent)]
    Remote(#[from] ClientError),
    #[error("unexpected reply to DETECT_MARKERS")]
    UnexpectedReply,
    #[error("remote result differs from local result at iteration {0}")]
    Mismatch(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeStats {
    pub mode: &'static str,
    pub iterations: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

impl ModeStats {
    pub fn from_samples(mode: &'static str, samples_ms: &[f64]) -> Self {
        assert!(!samples_ms.is_empty(), "no samples");
        let mut s = samples_ms.to_vec();
        s.sort_by(f64::total_cmp);
        let (min, max) = (s[0], s[s.len() - 1]);
        let mean = (s.iter().sum::<f64>() / s.len() as f64).clamp(min, max);
        Self {
            mode,
            iterations: s.len(),
            mean_ms: mean,
            p50_ms: percentile(&s, 50.0),
            p95_ms: percentile(&s, 95.0),
            min_ms: min,
            max_ms: max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyStats {
    pub local: ModeStats,
    pub remote: Option<ModeStats>,
}

pub const TSV_HEADER: &str = "mode\titers\tmean_ms\tp50_ms\tp95_ms\tmin_ms\tmax_ms";

impl LatencyStats {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for m in std::iter::once(&self.local).chain(self.remote.as_ref()) {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
                m.mode, m.iterations, m.mean_ms, m.p50_ms, m.p95_ms, m.min_ms, m.max_ms
            );
        }
        out
    }
}

/// Time `iters` local runs of marker detection and, with `remote`, the same number
/// of round trips to a server over one connection. Every remote result must equal
/// the local one.
pub fn bench(
    img: &GrayImage,
    cfg: &DetectConfig,
    iters: usize,
    remote: Option<&str>,
) -> Result<LatencyStats, BenchError> {
    if iters == 0 {
        return Err(BenchError::ZeroIterations);
    }
    let mut reference: Option<Vec<WireDetection>> = None;
    let mut local = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t = Instant::now();
        let dets = detect_markers(img, cfg);
        local.push(t.elapsed().as_secs_f64() * 1e3);
        let wire: Vec<WireDetection> = dets.iter().map(WireDetection::from).collect();
        match &reference {
            None => reference = Some(wire),
            Some(r) => assert_eq!(r, &wire, "local detection is not deterministic"),
        }
    }
    let reference = reference.expect("iters >= 1");

    let remote = match remote {
        None => None,
        Some(addr) => {
            let mut client = Client::connect(addr, DEFAULT_TIMEOUT)?;
            let req = Request::DetectMarkers(img.clone());
            let mut samples = Vec::with_capacity(iters);
            for i in 0..iters {
                let t = Instant::now();
                let reply = client.call(&req)?;
                samples.push(t.elapsed().as_secs_f64() * 1e3);
                match reply {
                    Response::Detections(d) if d == reference => {}
                    Response::Detections(_) => return Err(BenchError::Mismatch(i)),
                    _ => return Err(BenchError::UnexpectedReply),
                }
            }
            Some(ModeStats::from_samples("remote", &samples))
        }
    };
    Ok(LatencyStats {
        local: ModeStats::from_samples("local", &local),
        remote,
    })
}
