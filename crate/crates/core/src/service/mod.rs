//! Recognition offload: a TCP server hosting the pipeline and models, a thin
//! client, and a latency comparison between local and remote execution.

mod bench;
mod client;
pub mod protocol;
mod server;

pub use bench::{bench, BenchError, LatencyStats, ModeStats, TSV_HEADER};
pub use client::{client_request, Client, ClientError, DEFAULT_TIMEOUT};
pub use protocol::{
    decode_frame, encode_frame, ClassifyReply, ErrorCode, Frame, ProtocolError, Request, Response,
    WireDetection,
};
pub use server::{Registry, Server, ServerHandle};
