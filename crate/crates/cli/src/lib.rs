//! Command-line front end for the `armark` binary.

use armark_core::geometry::Point2;
use armark_core::golay::{render_marker, MarkerId};
use armark_core::imaging::{pgm_read, pgm_write, GrayImage};
use armark_core::pipeline::{
    detect_markers, match_templates, recognize_shapes, DetectConfig, ThresholdMethod,
};
use armark_core::service::{
    self, client_request, ClientError, Registry, Request, Response, Server, WireDetection,
};
use armark_core::shape::{load_dataset_dir, MlpModel, TrainConfig, MASK_THRESHOLD};
use armark_core::template::TemplateLibrary;
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const DEFAULT_PORT: u16 = 7700;

pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const IO: u8 = 2;
    pub const NOTHING_FOUND: u8 = 3;
    pub const REMOTE: u8 = 4;
}

#[derive(Debug, Parser, PartialEq)]
#[command(
    name = "armark",
    version,
    about = "Fiducial marker detection, shape classification and recognition offload"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
}

#[derive(Debug, Subcommand, PartialEq)]
pub enum Command {
    /// Render a marker (with quiet zone) to a PGM file
    MarkerGen {
        #[arg(long, value_parser = clap::value_parser!(u16).range(0..=4095))]
        id: u16,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=256))]
        cell_px: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect markers in a PGM image
    Detect {
        image: PathBuf,
        /// Recognition server as host[:port]
        #[arg(long)]
        remote: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// global:T or adaptive:WINDOW,C
        #[arg(long, default_value = "adaptive:15,7")]
        threshold: ThresholdMethod,
    },
    /// Train a shape classifier from one subdirectory of PGM masks per class
    Train {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Hidden layer sizes, comma separated
        #[arg(long, value_delimiter = ',', default_value = "32")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 70)]
        rays: usize,
    },
    /// Classify the largest silhouette in a PGM image
    Classify {
        image: PathBuf,
        #[arg(long, required_unless_present = "remote")]
        model: Option<PathBuf>,
        #[arg(long)]
        remote: Option<String>,
    },
    /// Identify quads in an image against a directory of PGM templates
    Match {
        image: PathBuf,
        #[arg(long)]
        templates: PathBuf,
        #[arg(long, default_value_t = TemplateLibrary::DEFAULT_MIN_SCORE)]
        min_score: f64,
    },
    /// Run the recognition server
    Serve {
        #[arg(long, env = "ARC_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "0.0.0.0")]
        host: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Time local and optionally remote marker detection
    Bench {
        image: PathBuf,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        iters: u64,
        #[arg(long)]
        remote: Option<String>,
    },
}

pub fn parse_args<I, T>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv).map(|c| c.command)
}

/// Failure with its exit code and a message for the error stream.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::new(exit::IO, format!("{}: {e}", path.display()))
    }

    fn remote(e: ClientError) -> Self {
        Self::new(exit::REMOTE, format!("remote: {e}"))
    }
}

/// Append the default port (`ARC_PORT`, else 7700) when `remote` names only a host.
pub fn remote_addr(remote: &str) -> String {
    if remote.parse::<std::net::SocketAddr>().is_ok() {
        return remote.to_string();
    }
    if let Some((host, port)) = remote.rsplit_once(':') {
        if !host.contains(':') && port.parse::<u16>().is_ok() {
            return remote.to_string();
        }
    }
    let port = std::env::var("ARC_PORT")
        .ok()
        .and_then(|p| p.parse::<u16>().ok())
        .unwrap_or(DEFAULT_PORT);
    if remote.contains(':') && !remote.starts_with('[') {
        format!("[{remote}]:{port}")
    } else {
        format!("{remote}:{port}")
    }
}

fn read_image(path: &Path) -> Result<GrayImage, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    pgm_read(&bytes).map_err(|e| Failure::io(path, e))
}

fn read_model(path: &Path) -> Result<MlpModel, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    MlpModel::load(&bytes).map_err(|e| Failure::io(path, e))
}

fn shape_config(rays: usize) -> DetectConfig {
    DetectConfig {
        threshold: ThresholdMethod::Global(MASK_THRESHOLD),
        rays,
        ..DetectConfig::default()
    }
}

fn corner_cols(out: &mut String, corners: &[Point2; 4]) {
    for p in corners {
        let _ = write!(out, "\t{:.2}\t{:.2}", p.x, p.y);
    }
}

fn detection_rows(dets: &[WireDetection]) -> String {
    let mut out = String::new();
    for d in dets {
        let _ = write!(out, "{}\t{}\t{}", d.id, d.rotation, d.corrected);
        corner_cols(&mut out, &d.corner_points());
        out.push('\n');
    }
    out
}

fn found(rows: String) -> Result<String, Failure> {
    if rows.is_empty() {
        Err(Failure::new(exit::NOTHING_FOUND, "nothing found"))
    } else {
        Ok(rows)
    }
}

/// Execute a command and return its data output.
fn execute(cmd: Command, diag: &mut dyn Write) -> Result<String, Failure> {
    match cmd {
        Command::MarkerGen { id, cell_px, out } => {
            let id = MarkerId::new(u32::from(id))
                .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            let img =
                render_marker(id, cell_px).map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            std::fs::write(&out, pgm_write(&img)).map_err(|e| Failure::io(&out, e))?;
            Ok(String::new())
        }
        Command::Detect {
            image,
            remote,
            format: Format::Tsv,
            threshold,
        } => {
            let img = read_image(&image)?;
            let dets: Vec<WireDetection> = match remote {
                Some(r) => match client_request(&remote_addr(&r), &Request::DetectMarkers(img))
                    .map_err(Failure::remote)?
                {
                    Response::Detections(d) => d,
                    other => {
                        return Err(Failure::new(
                            exit::REMOTE,
                            format!("unexpected reply {other:?}"),
                        ))
                    }
                },
                None => {
                    let cfg = DetectConfig {
                        threshold,
                        ..DetectConfig::default()
                    };
                    cfg.validate()
                        .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
                    detect_markers(&img, &cfg)
                        .iter()
                        .map(WireDetection::from)
                        .collect()
                }
            };
            found(detection_rows(&dets))
        }
        Command::Train {
            data,
            out,
            hidden,
            epochs,
            lr,
            seed,
            rays,
        } => {
            if rays == 0 || hidden.contains(&0) {
                return Err(Failure::new(
                    exit::USAGE,
                    "rays and hidden sizes must be positive",
                ));
            }
            let set = load_dataset_dir(&data, rays).map_err(|e| Failure::io(&data, e))?;
            if set.is_empty() {
                return Err(Failure::new(
                    exit::NOTHING_FOUND,
                    format!("{}: no training masks", data.display()),
                ));
            }
            let mut dims = vec![rays];
            dims.extend(&hidden);
            dims.push(set.labels().len());
            let model = MlpModel::init(&dims, seed)
                .and_then(|m| m.with_labels(set.labels().to_vec()))
                .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                seed,
                shuffle: true,
            };
            let outcome = model
                .train(&set, &cfg)
                .map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
            let _ = writeln!(
                diag,
                "trained {} on {} samples, training accuracy {:.4}",
                dims.iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("-"),
                set.len(),
                outcome.model.accuracy(&set).unwrap_or(0.0)
            );
            std::fs::write(&out, outcome.model.save()).map_err(|e| Failure::io(&out, e))?;
            let loss = outcome.loss_trace.last().copied().unwrap_or(f64::NAN);
            Ok(format!("{loss:.6}\n"))
        }
        Command::Classify {
            image,
            model,
            remote,
        } => {
            let img = read_image(&image)?;
            let (label, confidence) = match remote {
                Some(r) => match client_request(&remote_addr(&r), &Request::ClassifyImage(img))
                    .map_err(Failure::remote)?
                {
                    Response::ImageClass(c) => (c.label, f64::from(c.confidence)),
                    other => {
                        return Err(Failure::new(
                            exit::REMOTE,
                            format!("unexpected reply {other:?}"),
                        ))
                    }
                },
                None => {
                    let path = model.expect("clap requires --model without --remote");
                    let model = read_model(&path)?;
                    let cfg = shape_config(model.input_dim());
                    let found =
                        recognize_shapes(&img, &cfg, &model).map_err(|e| Failure::io(&path, e))?;
                    match found.into_iter().next() {
                        // round through the wire type so local and remote print identically
                        Some(s) => (s.label, f64::from(s.confidence as f32)),
                        None => (String::new(), 0.0),
                    }
                }
            };
            if label.is_empty() {
                return Err(Failure::new(exit::NOTHING_FOUND, "no region to classify"));
            }
            Ok(format!("{label}\t{confidence:.4}\n"))
        }
        Command::Match {
            image,
            templates,
            min_score,
        } => {
            let img = read_image(&image)?;
            let lib = TemplateLibrary::load_dir(&templates, min_score)
                .map_err(|e| Failure::io(&templates, e))?;
            let found_rows = match_templates(&img, &DetectConfig::default(), &lib)
                .map_err(|e| Failure::io(&image, e))?;
            let mut rows = String::new();
            for m in found_rows {
                let _ = write!(rows, "{}\t{:.4}", m.label, m.score);
                corner_cols(&mut rows, &m.corners);
                rows.push('\n');
            }
            found(rows)
        }
        Command::Serve {
            port,
            host,
            model,
            templates,
        } => {
            let registry = Registry {
                model: model.as_deref().map(read_model).transpose()?,
                templates: templates
                    .as_deref()
                    .map(|d| {
                        TemplateLibrary::load_dir(d, TemplateLibrary::DEFAULT_MIN_SCORE)
                            .map_err(|e| Failure::io(d, e))
                    })
                    .transpose()?,
                ..Registry::default()
            };
            let server = Server::bind((host.as_str(), port), registry)
                .map_err(|e| Failure::new(exit::IO, format!("cannot bind {host}:{port}: {e}")))?;
            let addr = server
                .local_addr()
                .map_err(|e| Failure::new(exit::IO, e.to_string()))?;
            let _ = writeln!(diag, "listening on {addr}");
            let _ = diag.flush();
            server
                .run()
                .map_err(|e| Failure::new(exit::IO, e.to_string()))?;
            Ok(String::new())
        }
        Command::Bench {
            image,
            iters,
            remote,
        } => {
            let img = read_image(&image)?;
            let addr = remote.as_deref().map(remote_addr);
            let stats = service::bench(
                &img,
                &DetectConfig::default(),
                iters as usize,
                addr.as_deref(),
            )
            .map_err(|e| match e {
                service::BenchError::ZeroIterations => Failure::new(exit::USAGE, e.to_string()),
                _ => Failure::new(exit::REMOTE, e.to_string()),
            })?;
            Ok(stats.to_tsv())
        }
    }
}

/// Run a parsed command. Data goes to `out`, diagnostics to `err`; returns the exit code.
pub fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(cmd, err) {
        Ok(data) => {
            if out
                .write_all(data.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return exit::IO;
            }
            exit::OK
        }
        Err(f) => {
            let _ = writeln!(err, "armark: {}", f.message);
            f.code
        }
    }
}
