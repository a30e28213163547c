//! Length-prefixed binary framing and message payloads.
//!
//! ```text
//! frame   = "ARC1" | type:u8 | len:u32be | payload[len]
//! ```
//! Every multi-byte integer and real on the wire is big-endian.

use crate::geometry::Point2;
use crate::imaging::GrayImage;
use crate::pipeline::MarkerDetection;
use std::io::{self, Read, Write};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"ARC1";
pub const HEADER_LEN: usize = 9;
pub const MAX_PAYLOAD: usize = 16 * 1024 * 1024;

pub const DETECT_MARKERS: u8 = 0x01;
pub const CLASSIFY_VECTOR: u8 = 0x02;
pub const CLASSIFY_IMAGE: u8 = 0x03;
pub const PING: u8 = 0x05;
pub const RESPONSE_FLAG: u8 = 0x80;
pub const ERROR: u8 = 0xFF;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("payload of {0} bytes exceeds the 16 MiB limit")]
    Oversize(usize),
    #[error("truncated frame: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("unexpected message type 0x{0:02x}")]
    UnexpectedType(u8),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ProtocolError {
    fn malformed(msg: impl Into<String>) -> Self {
        ProtocolError::Malformed(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: u8, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn encode(&self) -> Result<Vec<u8>, ProtocolError> {
        encode_frame(self.kind, &self.payload)
    }
}

pub fn encode_frame(kind: u8, payload: &[u8]) -> Result<Vec<u8>, ProtocolError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(ProtocolError::Oversize(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(kind);
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(payload);
    Ok(out)
}

fn parse_header(h: &[u8; HEADER_LEN]) -> Result<(u8, usize), ProtocolError> {
    let magic = [h[0], h[1], h[2], h[3]];
    if magic != MAGIC {
        return Err(ProtocolError::BadMagic(magic));
    }
    let len = u32::from_be_bytes([h[5], h[6], h[7], h[8]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::Oversize(len));
    }
    Ok((h[4], len))
}

/// Decode exactly one frame from `bytes`.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, ProtocolError> {
    if bytes.len() < HEADER_LEN {
        return Err(ProtocolError::Truncated {
            needed: HEADER_LEN,
            have: bytes.len(),
        });
    }
    let header: [u8; HEADER_LEN] = bytes[..HEADER_LEN].try_into().expect("length checked");
    let (kind, len) = parse_header(&header)?;
    let total = HEADER_LEN + len;
    if bytes.len() < total {
        return Err(ProtocolError::Truncated {
            needed: total,
            have: bytes.len(),
        });
    }
    if bytes.len() > total {
        return Err(ProtocolError::TrailingBytes(bytes.len() - total));
    }
    Ok(Frame {
        kind,
        payload: bytes[HEADER_LEN..].to_vec(),
    })
}

/// Read one frame; `Ok(None)` on a clean end of stream before any header byte.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Frame>, ProtocolError> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => {
                return Err(ProtocolError::Truncated {
                    needed: HEADER_LEN,
                    have: got,
                })
            }
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let (kind, len) = parse_header(&header)?;
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => ProtocolError::Truncated {
            needed: HEADER_LEN + len,
            have: HEADER_LEN,
        },
        _ => ProtocolError::Io(e),
    })?;
    Ok(Some(Frame { kind, payload }))
}

pub fn write_frame(w: &mut impl Write, frame: &Frame) -> Result<(), ProtocolError> {
    w.write_all(&frame.encode()?)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    Malformed = 1,
    Unsupported = 2,
    Internal = 3,
    ModelMissing = 4,
}

impl ErrorCode {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            1 => Some(ErrorCode::Malformed),
            2 => Some(ErrorCode::Unsupported),
            3 => Some(ErrorCode::Internal),
            4 => Some(ErrorCode::ModelMissing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Request {
    DetectMarkers(GrayImage),
    ClassifyVector(Vec<f32>),
    ClassifyImage(GrayImage),
    Ping,
}

/// A detection as carried on the wire (corners narrowed to f32).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireDetection {
    pub id: u16,
    pub corrected: u8,
    pub rotation: u8,
    /// `x0 y0 x1 y1 x2 y2 x3 y3`
    pub corners: [f32; 8],
}

impl From<&MarkerDetection> for WireDetection {
    fn from(d: &MarkerDetection) -> Self {
        let mut corners = [0f32; 8];
        for (i, p) in d.corners.iter().enumerate() {
            corners[2 * i] = p.x as f32;
            corners[2 * i + 1] = p.y as f32;
        }
        Self {
            id: d.id.value(),
            corrected: d.corrected_bits,
            rotation: d.rotation,
            corners,
        }
    }
}

impl WireDetection {
    pub fn corner_points(&self) -> [Point2; 4] {
        std::array::from_fn(|i| {
            Point2::new(
                f64::from(self.corners[2 * i]),
                f64::from(self.corners[2 * i + 1]),
            )
        })
    }
}

/// Classification reply; an empty label means nothing was classified.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyReply {
    pub label: String,
    pub confidence: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Detections(Vec<WireDetection>),
    VectorClass(ClassifyReply),
    ImageClass(ClassifyReply),
    Pong,
    Error { code: u8, message: String },
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ProtocolError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| ProtocolError::malformed("payload too short"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, ProtocolError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, ProtocolError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn f32(&mut self) -> Result<f32, ProtocolError> {
        let b = self.take(4)?;
        Ok(f32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn finish(&self) -> Result<(), ProtocolError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(ProtocolError::malformed(format!(
                "{} unexpected trailing bytes",
                self.buf.len() - self.pos
            )))
        }
    }
}

fn encode_image(img: &GrayImage) -> Result<Vec<u8>, ProtocolError> {
    let (w, h) = (img.width(), img.height());
    if w > u32::from(u16::MAX) || h > u32::from(u16::MAX) {
        return Err(ProtocolError::malformed(format!(
            "image {w}x{h} exceeds 65535 per side"
        )));
    }
    let mut p = Vec::with_capacity(4 + img.pixels().len());
    p.extend_from_slice(&(w as u16).to_be_bytes());
    p.extend_from_slice(&(h as u16).to_be_bytes());
    p.extend_from_slice(img.pixels());
    Ok(p)
}

fn decode_image(payload: &[u8]) -> Result<GrayImage, ProtocolError> {
    let mut c = Cursor::new(payload);
    let w = c.u16()?;
    let h = c.u16()?;
    if w == 0 || h == 0 {
        return Err(ProtocolError::malformed(
            "image dimensions must be non-zero",
        ));
    }
    let px = c.take(usize::from(w) * usize::from(h))?;
    c.finish()?;
    GrayImage::new(u32::from(w), u32::from(h), px.to_vec())
        .map_err(|e| ProtocolError::malformed(e.to_string()))
}

fn encode_classify(r: &ClassifyReply) -> Result<Vec<u8>, ProtocolError> {
    let label = r.label.as_bytes();
    if label.len() > 255 {
        return Err(ProtocolError::malformed("label longer than 255 bytes"));
    }
    let mut p = Vec::with_capacity(5 + label.len());
    p.push(label.len() as u8);
    p.extend_from_slice(label);
    p.extend_from_slice(&r.confidence.to_be_bytes());
    Ok(p)
}

fn decode_classify(payload: &[u8]) -> Result<ClassifyReply, ProtocolError> {
    let mut c = Cursor::new(payload);
    let n = c.u8()?;
    let label = std::str::from_utf8(c.take(usize::from(n))?)
        .map_err(|_| ProtocolError::malformed("label is not UTF-8"))?
        .to_string();
    let confidence = c.f32()?;
    c.finish()?;
    Ok(ClassifyReply { label, confidence })
}

impl Request {
    pub fn kind(&self) -> u8 {
        match self {
            Request::DetectMarkers(_) => DETECT_MARKERS,
            Request::ClassifyVector(_) => CLASSIFY_VECTOR,
            Request::ClassifyImage(_) => CLASSIFY_IMAGE,
            Request::Ping => PING,
        }
    }

    pub fn to_frame(&self) -> Result<Frame, ProtocolError> {
        let payload = match self {
            Request::DetectMarkers(img) | Request::ClassifyImage(img) => encode_image(img)?,
            Request::ClassifyVector(v) => {
                let dim = u16::try_from(v.len())
                    .map_err(|_| ProtocolError::malformed("vector longer than 65535"))?;
                let mut p = Vec::with_capacity(2 + 4 * v.len());
                p.extend_from_slice(&dim.to_be_bytes());
                for x in v {
                    p.extend_from_slice(&x.to_be_bytes());
                }
                p
            }
            Request::Ping => Vec::new(),
        };
        Ok(Frame::new(self.kind(), payload))
    }

    /// `UnexpectedType` for a type byte that is not a request.
    pub fn from_frame(f: &Frame) -> Result<Request, ProtocolError> {
        match f.kind {
            DETECT_MARKERS => Ok(Request::DetectMarkers(decode_image(&f.payload)?)),
            CLASSIFY_IMAGE => Ok(Request::ClassifyImage(decode_image(&f.payload)?)),
            CLASSIFY_VECTOR => {
                let mut c = Cursor::new(&f.payload);
                let dim = c.u16()?;
                let v = (0..dim).map(|_| c.f32()).collect::<Result<Vec<_>, _>>()?;
                c.finish()?;
                Ok(Request::ClassifyVector(v))
            }
            PING => {
                Cursor::new(&f.payload).finish()?;
                Ok(Request::Ping)
            }
            other => Err(ProtocolError::UnexpectedType(other)),
        }
    }
}

impl Response {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Response {
        Response::Error {
            code: code as u8,
            message: message.into(),
        }
    }

    pub fn to_frame(&self) -> Result<Frame, ProtocolError> {
        Ok(match self {
            Response::Detections(dets) => {
                let n = u16::try_from(dets.len())
                    .map_err(|_| ProtocolError::malformed("too many detections"))?;
                let mut p = Vec::with_capacity(2 + dets.len() * 36);
                p.extend_from_slice(&n.to_be_bytes());
                for d in dets {
                    p.extend_from_slice(&d.id.to_be_bytes());
                    p.push(d.corrected);
                    p.push(d.rotation);
                    for c in d.corners {
                        p.extend_from_slice(&c.to_be_bytes());
                    }
                }
                Frame::new(DETECT_MARKERS | RESPONSE_FLAG, p)
            }
            Response::VectorClass(r) => {
                Frame::new(CLASSIFY_VECTOR | RESPONSE_FLAG, encode_classify(r)?)
            }
            Response::ImageClass(r) => {
                Frame::new(CLASSIFY_IMAGE | RESPONSE_FLAG, encode_classify(r)?)
            }
            Response::Pong => Frame::new(PING | RESPONSE_FLAG, Vec::new()),
            Response::Error { code, message } => {
                let mut msg = message.as_bytes();
                if msg.len() > usize::from(u16::MAX) {
                    msg = &msg[..usize::from(u16::MAX)];
                }
                let mut p = Vec::with_capacity(3 + msg.len());
                p.push(*code);
                p.extend_from_slice(&(msg.len() as u16).to_be_bytes());
                p.extend_from_slice(msg);
                Frame::new(ERROR, p)
            }
        })
    }

    pub fn from_frame(f: &Frame) -> Result<Response, ProtocolError> {
        const DETECT_REPLY: u8 = DETECT_MARKERS | RESPONSE_FLAG;
        const VECTOR_REPLY: u8 = CLASSIFY_VECTOR | RESPONSE_FLAG;
        const IMAGE_REPLY: u8 = CLASSIFY_IMAGE | RESPONSE_FLAG;
        const PONG: u8 = PING | RESPONSE_FLAG;
        match f.kind {
            DETECT_REPLY => {
                let mut c = Cursor::new(&f.payload);
                let n = c.u16()?;
                let mut dets = Vec::with_capacity(usize::from(n));
                for _ in 0..n {
                    let id = c.u16()?;
                    let corrected = c.u8()?;
                    let rotation = c.u8()?;
                    let mut corners = [0f32; 8];
                    for v in &mut corners {
                        *v = c.f32()?;
                    }
                    dets.push(WireDetection {
                        id,
                        corrected,
                        rotation,
                        corners,
                    });
                }
                c.finish()?;
                Ok(Response::Detections(dets))
            }
            VECTOR_REPLY => Ok(Response::VectorClass(decode_classify(&f.payload)?)),
            IMAGE_REPLY => Ok(Response::ImageClass(decode_classify(&f.payload)?)),
            PONG => {
                Cursor::new(&f.payload).finish()?;
                Ok(Response::Pong)
            }
            ERROR => {
                let mut c = Cursor::new(&f.payload);
                let code = c.u8()?;
                let n = c.u16()?;
                let message = String::from_utf8_lossy(c.take(usize::from(n))?).into_owned();
                c.finish()?;
                Ok(Response::Error { code, message })
            }
            other => Err(ProtocolError::UnexpectedType(other)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ping_golden_bytes() {
        let bytes = Request::Ping.to_frame().unwrap().encode().unwrap();
        assert_eq!(
            bytes,
            [0x41, 0x52, 0x43, 0x31, 0x05, 0x00, 0x00, 0x00, 0x00]
        );
        let pong = Response::Pong.to_frame().unwrap().encode().unwrap();
        assert_eq!(pong, [0x41, 0x52, 0x43, 0x31, 0x85, 0x00, 0x00, 0x00, 0x00]);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut bytes = encode_frame(PING, &[]).unwrap();
        bytes[3] = b'2';
        assert!(matches!(decode_frame(&bytes), Err(ProtocolError::BadMagic(m)) if &m == b"ARC2"));
        let full = encode_frame(DETECT_MARKERS, &[1, 2, 3]).unwrap();
        assert!(matches!(
            decode_frame(&full[..5]),
            Err(ProtocolError::Truncated { .. })
        ));
        assert!(matches!(
            decode_frame(&full[..10]),
            Err(ProtocolError::Truncated {
                needed: 12,
                have: 10
            })
        ));
        let mut extra = full.clone();
        extra.push(0);
        assert!(matches!(
            decode_frame(&extra),
            Err(ProtocolError::TrailingBytes(1))
        ));
    }

    #[test]
    fn oversize() {
        let big = vec![0u8; MAX_PAYLOAD + 1];
        assert!(matches!(
            encode_frame(DETECT_MARKERS, &big),
            Err(ProtocolError::Oversize(_))
        ));
        let mut header = MAGIC.to_vec();
        header.push(DETECT_MARKERS);
        header.extend_from_slice(&((MAX_PAYLOAD + 1) as u32).to_be_bytes());
        assert!(matches!(
            decode_frame(&header),
            Err(ProtocolError::Oversize(_))
        ));
        assert!(matches!(
            read_frame(&mut header.as_slice()),
            Err(ProtocolError::Oversize(_))
        ));
    }

    #[test]
    fn stream_reading() {
        let mut buf = encode_frame(PING, &[]).unwrap();
        buf.extend(encode_frame(CLASSIFY_IMAGE, &[0, 1, 0, 1, 9]).unwrap());
        let mut r = buf.as_slice();
        assert_eq!(read_frame(&mut r).unwrap(), Some(Frame::new(PING, vec![])));
        assert_eq!(
            read_frame(&mut r).unwrap(),
            Some(Frame::new(CLASSIFY_IMAGE, vec![0, 1, 0, 1, 9]))
        );
        assert_eq!(read_frame(&mut r).unwrap(), None);
        let cut = &buf[..4];
        assert!(matches!(
            read_frame(&mut &cut[..]),
            Err(ProtocolError::Truncated { .. })
        ));
    }

    #[test]
    fn request_payload_layout() {
        let img = GrayImage::new(2, 1, vec![7, 9]).unwrap();
        let f = Request::DetectMarkers(img.clone()).to_frame().unwrap();
        assert_eq!(f.payload, vec![0, 2, 0, 1, 7, 9]);
        assert_eq!(
            Request::from_frame(&f).unwrap(),
            Request::DetectMarkers(img)
        );

        let f = Request::ClassifyVector(vec![1.0, -2.5]).to_frame().unwrap();
        assert_eq!(f.payload, vec![0, 2, 0x3f, 0x80, 0, 0, 0xc0, 0x20, 0, 0]);

        let short = Frame::new(DETECT_MARKERS, vec![0, 2, 0, 2, 1, 2, 3]);
        assert!(matches!(
            Request::from_frame(&short),
            Err(ProtocolError::Malformed(_))
        ));
        let zero = Frame::new(CLASSIFY_IMAGE, vec![0, 0, 0, 1]);
        assert!(matches!(
            Request::from_frame(&zero),
            Err(ProtocolError::Malformed(_))
        ));
        assert!(matches!(
            Request::from_frame(&Frame::new(0x04, vec![])),
            Err(ProtocolError::UnexpectedType(4))
        ));
    }

    #[test]
    fn response_payload_layout() {
        let d = WireDetection {
            id: 1234,
            corrected: 1,
            rotation: 3,
            corners: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        };
        let f = Response::Detections(vec![d]).to_frame().unwrap();
        assert_eq!(f.kind, 0x81);
        assert_eq!(f.payload.len(), 2 + 2 + 1 + 1 + 32);
        assert_eq!(&f.payload[..6], &[0, 1, 0x04, 0xd2, 1, 3]);
        assert_eq!(
            Response::from_frame(&f).unwrap(),
            Response::Detections(vec![d])
        );

        let r = ClassifyReply {
            label: "disc".into(),
            confidence: 0.5,
        };
        let f = Response::ImageClass(r.clone()).to_frame().unwrap();
        assert_eq!(f.kind, 0x83);
        assert_eq!(f.payload, vec![4, b'd', b'i', b's', b'c', 0x3f, 0, 0, 0]);
        assert_eq!(Response::from_frame(&f).unwrap(), Response::ImageClass(r));

        let f = Response::error(ErrorCode::Unsupported, "nope")
            .to_frame()
            .unwrap();
        assert_eq!(f.kind, 0xFF);
        assert_eq!(f.payload, vec![2, 0, 4, b'n', b'o', b'p', b'e']);
    }

    proptest! {
        #[test]
        fn frame_round_trip(kind in any::<u8>(), payload in proptest::collection::vec(any::<u8>(), 0..1024)) {
            let bytes = encode_frame(kind, &payload).unwrap();
            prop_assert_eq!(bytes.len(), HEADER_LEN + payload.len());
            let f = decode_frame(&bytes).unwrap();
            prop_assert_eq!(f, Frame::new(kind, payload));
        }

        #[test]
        fn vector_request_round_trip(v in proptest::collection::vec(-1e6f32..1e6, 0..200)) {
            let f = Request::ClassifyVector(v.clone()).to_frame().unwrap();
            prop_assert_eq!(Request::from_frame(&f).unwrap(), Request::ClassifyVector(v));
        }
    }
}
