use super::protocol::{
    read_frame, write_frame, ClassifyReply, ErrorCode, Frame, ProtocolError, Request, Response,
    WireDetection,
};
use crate::pipeline::{detect_markers, recognize_shapes, DetectConfig, ThresholdMethod};
use crate::shape::MlpModel;
use crate::template::TemplateLibrary;
use std::io::{self, BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

/// Everything a server hosts. Read-only once the server starts.
#[derive(Debug, Clone)]
pub struct Registry {
    pub model: Option<MlpModel>,
    pub templates: Option<TemplateLibrary>,
    pub detect_config: DetectConfig,
    /// Used for `CLASSIFY_IMAGE`; silhouettes want a global threshold.
    pub shape_config: DetectConfig,
}

impl Default for Registry {
    fn default() -> Self {
        Self {
            model: None,
            templates: None,
            detect_config: DetectConfig::default(),
            shape_config: DetectConfig {
                threshold: ThresholdMethod::Global(crate::shape::MASK_THRESHOLD),
                ..DetectConfig::default()
            },
        }
    }
}

impl Registry {
    /// Compute the reply to a decoded request exactly as a local caller would.
    pub fn respond(&self, req: &Request) -> Response {
        match req {
            Request::Ping => Response::Pong,
            Request::DetectMarkers(img) => {
                let dets = detect_markers(img, &self.detect_config);
                Response::Detections(dets.iter().map(WireDetection::from).collect())
            }
            Request::ClassifyVector(v) => {
                let Some(model) = &self.model else {
                    return Response::error(ErrorCode::ModelMissing, "server has no model loaded");
                };
                if v.len() != model.input_dim() {
                    return Response::error(
                        ErrorCode::Malformed,
                        format!(
                            "vector has {} values, model expects {}",
                            v.len(),
                            model.input_dim()
                        ),
                    );
                }
                if !v.iter().all(|x| x.is_finite()) {
                    return Response::error(
                        ErrorCode::Malformed,
                        "vector contains non-finite values",
                    );
                }
                let x: Vec<f64> = v.iter().map(|&f| f64::from(f)).collect();
                match model.classify(&x) {
                    Ok(c) => Response::VectorClass(ClassifyReply {
                        label: c.label,
                        confidence: c.confidence as f32,
                    }),
                    Err(e) => Response::error(ErrorCode::Internal, e.to_string()),
                }
            }
            Request::ClassifyImage(img) => {
                let Some(model) = &self.model else {
                    return Response::error(ErrorCode::ModelMissing, "server has no model loaded");
                };
                match recognize_shapes(img, &self.shape_config, model) {
                    Ok(found) => Response::ImageClass(match found.into_iter().next() {
                        Some(s) => ClassifyReply {
                            label: s.label,
                            confidence: s.confidence as f32,
                        },
                        None => ClassifyReply {
                            label: String::new(),
                            confidence: 0.0,
                        },
                    }),
                    Err(e) => Response::error(ErrorCode::Internal, e.to_string()),
                }
            }
        }
    }

    /// Map one request frame to its response frame. Never panics.
    pub fn handle_frame(&self, frame: &Frame) -> Frame {
        let response = match Request::from_frame(frame) {
            Ok(req) => catch_unwind(AssertUnwindSafe(|| self.respond(&req))).unwrap_or_else(|_| {
                Response::error(ErrorCode::Internal, "request handler panicked")
            }),
            Err(ProtocolError::UnexpectedType(t)) => Response::error(
                ErrorCode::Unsupported,
                format!("unsupported message type 0x{t:02x}"),
            ),
            Err(e) => Response::error(ErrorCode::Malformed, e.to_string()),
        };
        response.to_frame().unwrap_or_else(|e| {
            Response::error(ErrorCode::Internal, e.to_string())
                .to_frame()
                .expect("error frames always encode")
        })
    }
}

fn serve_connection(stream: TcpStream, registry: &Registry) {
    let _ = stream.set_nodelay(true);
    let Ok(write_half) = stream.try_clone() else {
        return;
    };
    let mut reader = BufReader::new(stream);
    let mut writer = BufWriter::new(write_half);
    loop {
        match read_frame(&mut reader) {
            Ok(Some(frame)) => {
                let reply = registry.handle_frame(&frame);
                if write_frame(&mut writer, &reply).is_err() {
                    return;
                }
            }
            Ok(None) => return,
            Err(ProtocolError::Io(_)) | Err(ProtocolError::Truncated { .. }) => return,
            Err(e) => {
                // framing is lost; report and hang up
                let reply = Response::error(ErrorCode::Malformed, e.to_string());
                if let Ok(f) = reply.to_frame() {
                    let _ = write_frame(&mut writer, &f);
                }
                return;
            }
        }
    }
}

/// TCP recognition server: one thread per connection, requests answered in order.
pub struct Server {
    listener: TcpListener,
    registry: Arc<Registry>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, registry: Registry) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            registry: Arc::new(registry),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serve until the process exits.
    pub fn run(self) -> io::Result<()> {
        self.accept_loop(&AtomicBool::new(false))
    }

    fn accept_loop(&self, stop: &AtomicBool) -> io::Result<()> {
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) if e.kind() == io::ErrorKind::ConnectionAborted => continue,
                Err(e) => return Err(e),
            };
            let registry = Arc::clone(&self.registry);
            std::thread::spawn(move || serve_connection(stream, &registry));
        }
        Ok(())
    }

    /// Run the accept loop on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let join = std::thread::spawn(move || self.accept_loop(&flag));
        Ok(ServerHandle {
            addr,
            stop,
            join: Some(join),
        })
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stop accepting connections. Connections already open run to completion.
    pub fn shutdown(mut self) -> io::Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> io::Result<()> {
        let Some(join) = self.join.take() else {
            return Ok(());
        };
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        join.join()
            .unwrap_or_else(|_| Err(io::Error::other("accept loop panicked")))
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}
