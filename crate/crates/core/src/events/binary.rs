//! Fixed-stride little-endian record format.
//!
//! File header (16 bytes): magic `BF2E`, u16 version, u16 width, u16 height,
//! 6 reserved zero bytes. Each record (16 bytes): u16 x, u16 y, u64 t,
//! u8 polarity, u8 label (0 noise, 1 signal, 255 unlabeled), 2 pad bytes.

use super::{Event, Label, LabeledStream, Polarity, SensorGeometry};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 4] = *b"BF2E";
pub const BINARY_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;
const RECORD_LEN: usize = 16;
const UNLABELED: u8 = 255;

pub fn write_binary(stream: &LabeledStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.len());
    let g = stream.geometry();
    out.extend_from_slice(&BINARY_MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&g.width().to_le_bytes());
    out.extend_from_slice(&g.height().to_le_bytes());
    out.extend_from_slice(&[0u8; 6]);
    for e in stream {
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.extend_from_slice(&e.t.to_le_bytes());
        out.push(e.polarity.as_u8());
        out.push(e.label.map_or(UNLABELED, Label::as_u8));
        out.extend_from_slice(&[0, 0]);
    }
    out
}

/// Decodes a binary file into its geometry and raw (unvalidated) events.
pub fn read_binary(bytes: &[u8]) -> Result<(SensorGeometry, Vec<Event>)> {
    let bad = |message: String| Error::Parse { line: 0, message };
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("file too short for header ({} bytes)", bytes.len())));
    }
    if bytes[0..4] != BINARY_MAGIC {
        return Err(bad("bad magic, not a BF2E file".into()));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let version = u16_at(4);
    if version != BINARY_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let geometry = SensorGeometry::new(u16_at(6), u16_at(8))?;
    let body = &bytes[HEADER_LEN..];
    if !body.len().is_multiple_of(RECORD_LEN) {
        return Err(bad(format!(
            "record area of {} bytes is not a multiple of {RECORD_LEN}",
            body.len()
        )));
    }
    let mut events = Vec::with_capacity(body.len() / RECORD_LEN);
    for (i, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        // Records are numbered from 1 in error messages.
        let record = i + 1;
        let polarity = Polarity::from_u8(rec[12]).ok_or_else(|| Error::Parse {
            line: record,
            message: format!("bad polarity byte {}", rec[12]),
        })?;
        let label = match rec[13] {
            UNLABELED => None,
            v => Some(Label::from_u8(v).ok_or_else(|| Error::Parse {
                line: record,
                message: format!("bad label byte {v}"),
            })?),
        };
        let mut t = [0u8; 8];
        t.copy_from_slice(&rec[4..12]);
        events.push(Event {
            x: u16::from_le_bytes([rec[0], rec[1]]),
            y: u16::from_le_bytes([rec[2], rec[3]]),
            t: u64::from_le_bytes(t),
            polarity,
            label,
        });
    }
    Ok((geometry, events))
}
