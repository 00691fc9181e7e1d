//! L2.5 header wire format.
//!
//! ```text
//! header   := total_len:u16 field*
//! field    := type:u8 len:u16 value[len]
//! 0x01 nonce          u64
//! 0x02 prev hop       x:f64 y:f64
//! 0x03 dest area      UTF-8 area label
//! 0x04 routable pfx   UTF-8 name URI
//! 0x05 provider area  UTF-8 area label
//! ```
//!
//! All integers and floats are big-endian. `total_len` counts the bytes that
//! follow it. Nonce and previous-hop position are mandatory.

use crate::error::HeaderError;
use crate::geo::{GeoArea, GeoGrid, Position};
use crate::ndn::Name;

const T_NONCE: u8 = 0x01;
const T_PREV_HOP: u8 = 0x02;
const T_DEST_AREA: u8 = 0x03;
const T_PREFIX: u8 = 0x04;
const T_PROVIDER: u8 = 0x05;

const FIELD_OVERHEAD: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct L25Header {
    pub nonce: u64,
    pub prev_hop: Position,
    pub dest_area: Option<GeoArea>,
    pub routable_prefix: Option<Name>,
    /// Set by the responder on Data only.
    pub provider_area: Option<GeoArea>,
}

impl L25Header {
    pub fn interest(
        nonce: u64,
        prev_hop: Position,
        dest_area: Option<GeoArea>,
        routable_prefix: Name,
    ) -> Self {
        L25Header {
            nonce,
            prev_hop,
            dest_area,
            routable_prefix: Some(routable_prefix),
            provider_area: None,
        }
    }

    pub fn data(
        nonce: u64,
        prev_hop: Position,
        provider_area: Option<GeoArea>,
        routable_prefix: Option<Name>,
    ) -> Self {
        L25Header {
            nonce,
            prev_hop,
            dest_area: None,
            routable_prefix,
            provider_area,
        }
    }

    /// Encoded size in bytes without building the buffer.
    pub fn wire_len(&self, grid: &GeoGrid) -> usize {
        let label = |a: &GeoArea| FIELD_OVERHEAD + label_len(grid, a);
        2 + FIELD_OVERHEAD
            + 8
            + FIELD_OVERHEAD
            + 16
            + self.dest_area.as_ref().map_or(0, label)
            + self
                .routable_prefix
                .as_ref()
                .map_or(0, |p| FIELD_OVERHEAD + p.wire_len())
            + self.provider_area.as_ref().map_or(0, label)
    }

    pub fn encode(&self, grid: &GeoGrid) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len(grid));
        out.extend_from_slice(&[0, 0]);
        put(&mut out, T_NONCE, &self.nonce.to_be_bytes());
        let mut pos = [0u8; 16];
        pos[..8].copy_from_slice(&self.prev_hop.x.to_be_bytes());
        pos[8..].copy_from_slice(&self.prev_hop.y.to_be_bytes());
        put(&mut out, T_PREV_HOP, &pos);
        if let Some(a) = &self.dest_area {
            put(&mut out, T_DEST_AREA, grid.label(a).as_bytes());
        }
        if let Some(p) = &self.routable_prefix {
            put(&mut out, T_PREFIX, p.to_string().as_bytes());
        }
        if let Some(a) = &self.provider_area {
            put(&mut out, T_PROVIDER, grid.label(a).as_bytes());
        }
        let total = (out.len() - 2) as u16;
        out[..2].copy_from_slice(&total.to_be_bytes());
        out
    }

    /// Decodes one header and returns it with the number of bytes consumed.
    pub fn decode(buf: &[u8], grid: &GeoGrid) -> Result<(Self, usize), HeaderError> {
        if buf.len() < 2 {
            return Err(HeaderError::Truncated);
        }
        let total = u16::from_be_bytes([buf[0], buf[1]]) as usize;
        let body = buf.get(2..2 + total).ok_or(HeaderError::Truncated)?;

        let mut nonce = None;
        let mut prev_hop = None;
        let mut dest_area = None;
        let mut routable_prefix = None;
        let mut provider_area = None;

        let mut rest = body;
        while !rest.is_empty() {
            if rest.len() < FIELD_OVERHEAD {
                return Err(HeaderError::Truncated);
            }
            let ty = rest[0];
            let len = u16::from_be_bytes([rest[1], rest[2]]) as usize;
            let value = rest
                .get(FIELD_OVERHEAD..FIELD_OVERHEAD + len)
                .ok_or(HeaderError::Truncated)?;
            rest = &rest[FIELD_OVERHEAD + len..];
            match ty {
                T_NONCE => {
                    let b: [u8; 8] = value.try_into().map_err(|_| HeaderError::FieldLength(ty))?;
                    nonce = Some(u64::from_be_bytes(b));
                }
                T_PREV_HOP => {
                    if value.len() != 16 {
                        return Err(HeaderError::FieldLength(ty));
                    }
                    let x = f64::from_be_bytes(value[..8].try_into().expect("8 bytes"));
                    let y = f64::from_be_bytes(value[8..].try_into().expect("8 bytes"));
                    prev_hop = Some(Position::new(x, y));
                }
                T_DEST_AREA | T_PROVIDER => {
                    let s = std::str::from_utf8(value).map_err(|_| HeaderError::Utf8)?;
                    let area = grid
                        .parse_label(s)
                        .map_err(|_| HeaderError::Area(s.to_string()))?;
                    if ty == T_DEST_AREA {
                        dest_area = Some(area);
                    } else {
                        provider_area = Some(area);
                    }
                }
                T_PREFIX => {
                    let s = std::str::from_utf8(value).map_err(|_| HeaderError::Utf8)?;
                    routable_prefix = Some(
                        s.parse::<Name>()
                            .map_err(|_| HeaderError::Name(s.to_string()))?,
                    );
                }
                other => return Err(HeaderError::UnknownField(other)),
            }
        }

        let header = L25Header {
            nonce: nonce.ok_or(HeaderError::Missing("nonce"))?,
            prev_hop: prev_hop.ok_or(HeaderError::Missing("previous hop"))?,
            dest_area,
            routable_prefix,
            provider_area,
        };
        Ok((header, 2 + total))
    }
}

fn put(out: &mut Vec<u8>, ty: u8, value: &[u8]) {
    out.push(ty);
    out.extend_from_slice(&(value.len() as u16).to_be_bytes());
    out.extend_from_slice(value);
}

fn label_len(grid: &GeoGrid, area: &GeoArea) -> usize {
    grid.tag.len() + 2 + 2 * area.precision as usize
}
