use super::protocol::{read_frame, write_frame, Frame, ProtocolError, Request, Response};
use std::io::{self, BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;
use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot connect to {addr}: {source}")]
    Connect { addr: String, source: io::Error },
    #[error("connection closed by server")]
    Closed,
    #[error("server error {code}: {message}")]
    Server { code: u8, message: String },
    #[error("response type 0x{got:02x} does not answer request type 0x{sent:02x}")]
    Mismatch { sent: u8, got: u8 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// A persistent connection; requests are sent one at a time.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl Client {
    pub fn connect(addr: &str, timeout: Duration) -> Result<Client, ClientError> {
        let connect_err = |source| ClientError::Connect {
            addr: addr.to_string(),
            source,
        };
        let addrs: Vec<_> = addr.to_socket_addrs().map_err(connect_err)?.collect();
        let mut last = io::Error::new(io::ErrorKind::NotFound, "address resolved to nothing");
        for a in addrs {
            match TcpStream::connect_timeout(&a, timeout) {
                Ok(stream) => {
                    stream
                        .set_read_timeout(Some(timeout))
                        .map_err(connect_err)?;
                    stream
                        .set_write_timeout(Some(timeout))
                        .map_err(connect_err)?;
                    let _ = stream.set_nodelay(true);
                    let w = stream.try_clone().map_err(connect_err)?;
                    return Ok(Client {
                        reader: BufReader::new(stream),
                        writer: BufWriter::new(w),
                    });
                }
                Err(e) => last = e,
            }
        }
        Err(connect_err(last))
    }

    /// Send a raw frame and return whatever frame comes back.
    pub fn call_raw(&mut self, frame: &Frame) -> Result<Frame, ClientError> {
        write_frame(&mut self.writer, frame)?;
        read_frame(&mut self.reader)?.ok_or(ClientError::Closed)
    }

    /// ERROR replies surface as [`ClientError::Server`].
    pub fn call(&mut self, req: &Request) -> Result<Response, ClientError> {
        let frame = req.to_frame()?;
        let reply = self.call_raw(&frame)?;
        match Response::from_frame(&reply)? {
            Response::Error { code, message } => Err(ClientError::Server { code, message }),
            r if reply.kind == frame.kind | super::protocol::RESPONSE_FLAG => Ok(r),
            _ => Err(ClientError::Mismatch {
                sent: frame.kind,
                got: reply.kind,
            }),
        }
    }
}

/// One-shot request over a fresh connection with the default timeout.
pub fn client_request(addr: &str, req: &Request) -> Result<Response, ClientError> {
    Client::connect(addr, DEFAULT_TIMEOUT)?.call(req)
}
