//! Wire formats. Integers are big-endian, positions are three `f64` in
//! meters. Every packet starts with a 9-byte header: origin (4), sequence
//! number (4), type (1).

use crate::error::PacketError;
use crate::geometry::Vec3;
use crate::routing::NodeId;

pub const HEADER_LEN: usize = 9;
pub const MOBILITY_UPDATE_LEN: usize = 1000;
pub const PATH_SCORE_LEN: usize = HEADER_LEN + 24 + 24 + 8 + 2;
const MOBILITY_UPDATE_FIXED: usize = HEADER_LEN + 8 + 24 + 24 + 1;
pub const MAX_ANNOUNCED_WAYPOINTS: usize = (MOBILITY_UPDATE_LEN - MOBILITY_UPDATE_FIXED) / 24;
const DATA_FIXED: usize = HEADER_LEN + 4 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PacketKind {
    Hello = 1,
    Tc = 2,
    Ogm = 3,
    MobilityUpdate = 4,
    PathScore = 5,
    Data = 6,
}

impl PacketKind {
    pub fn name(self) -> &'static str {
        match self {
            PacketKind::Hello => "HELLO",
            PacketKind::Tc => "TC",
            PacketKind::Ogm => "OGM",
            PacketKind::MobilityUpdate => "MOBILITY",
            PacketKind::PathScore => "PATHSCORE",
            PacketKind::Data => "DATA",
        }
    }

    fn from_byte(b: u8) -> Result<Self, PacketError> {
        Ok(match b {
            1 => PacketKind::Hello,
            2 => PacketKind::Tc,
            3 => PacketKind::Ogm,
            4 => PacketKind::MobilityUpdate,
            5 => PacketKind::PathScore,
            6 => PacketKind::Data,
            other => return Err(PacketError::UnknownType(other)),
        })
    }
}

/// OLSR neighbor sensing: the sender's current 1-hop neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct Hello {
    pub origin: NodeId,
    pub seq: u32,
    pub neighbors: Vec<NodeId>,
}

/// OLSR topology control: links advertised by the originator.
#[derive(Debug, Clone, PartialEq)]
pub struct Tc {
    pub origin: NodeId,
    pub seq: u32,
    pub links: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ogm {
    pub origin: NodeId,
    pub seq: u32,
    /// Node the forwarder received this copy from (the originator itself on
    /// the first hop). Lets a node recognise its own rebroadcast echoed back.
    pub prev_sender: NodeId,
    /// Rebroadcasts so far; 0 when heard from the originator.
    pub hop_count: u8,
}

/// Individual mobility data flooded for predictive path planning.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityUpdatePacket {
    pub origin: NodeId,
    pub seq: u32,
    /// Time the position was measured.
    pub timestamp: f64,
    pub position: Vec3,
    pub steering: Vec3,
    pub waypoints: Vec<Vec3>,
}

/// Stigmergic flood packet: only the latest forwarder's positions and the
/// accumulated reverse-path score travel with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathScorePacket {
    pub origin: NodeId,
    pub seq: u32,
    pub forwarder_position: Vec3,
    pub predicted_position: Vec3,
    pub score: f64,
    pub hop_count: u16,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPacket {
    pub origin: NodeId,
    pub seq: u32,
    pub destination: NodeId,
    pub ttl: u8,
    pub created_at: f64,
    /// Total frame size in bytes (padding included).
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Packet {
    Hello(Hello),
    Tc(Tc),
    Ogm(Ogm),
    MobilityUpdate(MobilityUpdatePacket),
    PathScore(PathScorePacket),
    Data(DataPacket),
}

impl Packet {
    pub fn kind(&self) -> PacketKind {
        match self {
            Packet::Hello(_) => PacketKind::Hello,
            Packet::Tc(_) => PacketKind::Tc,
            Packet::Ogm(_) => PacketKind::Ogm,
            Packet::MobilityUpdate(_) => PacketKind::MobilityUpdate,
            Packet::PathScore(_) => PacketKind::PathScore,
            Packet::Data(_) => PacketKind::Data,
        }
    }

    pub fn origin(&self) -> NodeId {
        match self {
            Packet::Hello(p) => p.origin,
            Packet::Tc(p) => p.origin,
            Packet::Ogm(p) => p.origin,
            Packet::MobilityUpdate(p) => p.origin,
            Packet::PathScore(p) => p.origin,
            Packet::Data(p) => p.origin,
        }
    }

    pub fn seq(&self) -> u32 {
        match self {
            Packet::Hello(p) => p.seq,
            Packet::Tc(p) => p.seq,
            Packet::Ogm(p) => p.seq,
            Packet::MobilityUpdate(p) => p.seq,
            Packet::PathScore(p) => p.seq,
            Packet::Data(p) => p.seq,
        }
    }

    pub fn wire_size(&self) -> usize {
        match self {
            Packet::Hello(p) => HEADER_LEN + 4 * p.neighbors.len(),
            Packet::Tc(p) => HEADER_LEN + 8 * p.links.len(),
            Packet::Ogm(_) => HEADER_LEN + 5,
            Packet::MobilityUpdate(_) => MOBILITY_UPDATE_LEN,
            Packet::PathScore(_) => PATH_SCORE_LEN,
            Packet::Data(p) => p.size.max(DATA_FIXED),
        }
    }

    pub fn is_control(&self) -> bool {
        !matches!(self, Packet::Data(_))
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn header(origin: NodeId, seq: u32, kind: PacketKind, capacity: usize) -> Self {
        let mut w = Writer(Vec::with_capacity(capacity));
        w.u32(origin.0);
        w.u32(seq);
        w.0.push(kind as u8);
        w
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_be_bytes());
    }
    fn vec3(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }
    fn pad_to(mut self, len: usize) -> Vec<u8> {
        debug_assert!(self.0.len() <= len);
        self.0.resize(len, 0);
        self.0
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PacketError> {
        let end = self.pos + n;
        if end > self.buf.len() {
            return Err(PacketError::Truncated {
                needed: end,
                got: self.buf.len(),
            });
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, PacketError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, PacketError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, PacketError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, PacketError> {
        Ok(f64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn vec3(&mut self) -> Result<Vec3, PacketError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
    fn finish(&self, kind: &'static str) -> Result<(), PacketError> {
        match self.remaining() {
            0 => Ok(()),
            extra => Err(PacketError::TrailingBytes { kind, extra }),
        }
    }
}

pub fn serialize_packet(packet: &Packet) -> Result<Vec<u8>, PacketError> {
    let size = packet.wire_size();
    let mut w = Writer::header(packet.origin(), packet.seq(), packet.kind(), size);
    match packet {
        Packet::Hello(p) => p.neighbors.iter().for_each(|n| w.u32(n.0)),
        Packet::Tc(p) => p.links.iter().for_each(|(a, b)| {
            w.u32(a.0);
            w.u32(b.0);
        }),
        Packet::Ogm(p) => {
            w.u32(p.prev_sender.0);
            w.0.push(p.hop_count);
        }
        Packet::MobilityUpdate(p) => {
            if p.waypoints.len() > MAX_ANNOUNCED_WAYPOINTS {
                return Err(PacketError::Invalid(format!(
                    "{} waypoints exceed the {MAX_ANNOUNCED_WAYPOINTS} that fit in a mobility update",
                    p.waypoints.len()
                )));
            }
            w.f64(p.timestamp);
            w.vec3(p.position);
            w.vec3(p.steering);
            w.0.push(p.waypoints.len() as u8);
            p.waypoints.iter().for_each(|&wp| w.vec3(wp));
        }
        Packet::PathScore(p) => {
            w.vec3(p.forwarder_position);
            w.vec3(p.predicted_position);
            w.f64(p.score);
            w.0.extend_from_slice(&p.hop_count.to_be_bytes());
        }
        Packet::Data(p) => {
            w.u32(p.destination.0);
            w.0.push(p.ttl);
            w.f64(p.created_at);
        }
    }
    Ok(w.pad_to(size))
}

pub fn deserialize_packet(bytes: &[u8]) -> Result<Packet, PacketError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let origin = NodeId(r.u32()?);
    let seq = r.u32()?;
    let kind = PacketKind::from_byte(r.u8()?)?;
    let ids = |r: &mut Reader, width: usize| -> Result<usize, PacketError> {
        if r.remaining() % width != 0 {
            return Err(PacketError::Invalid(format!(
                "{} body of {} bytes is not a multiple of {width}",
                kind.name(),
                r.remaining()
            )));
        }
        Ok(r.remaining() / width)
    };
    let packet = match kind {
        PacketKind::Hello => {
            let n = ids(&mut r, 4)?;
            let neighbors = (0..n).map(|_| r.u32().map(NodeId)).collect::<Result<_, _>>()?;
            Packet::Hello(Hello {
                origin,
                seq,
                neighbors,
            })
        }
        PacketKind::Tc => {
            let n = ids(&mut r, 8)?;
            let links = (0..n)
                .map(|_| Ok((NodeId(r.u32()?), NodeId(r.u32()?))))
                .collect::<Result<_, PacketError>>()?;
            Packet::Tc(Tc { origin, seq, links })
        }
        PacketKind::Ogm => {
            let prev_sender = NodeId(r.u32()?);
            let hop_count = r.u8()?;
            r.finish("OGM")?;
            Packet::Ogm(Ogm { origin, seq, prev_sender, hop_count })
        }
        PacketKind::MobilityUpdate => {
            if bytes.len() != MOBILITY_UPDATE_LEN {
                return Err(PacketError::Invalid(format!(
                    "mobility update must be {MOBILITY_UPDATE_LEN} bytes, got {}",
                    bytes.len()
                )));
            }
            let timestamp = r.f64()?;
            let position = r.vec3()?;
            let steering = r.vec3()?;
            let count = r.u8()? as usize;
            if count > MAX_ANNOUNCED_WAYPOINTS {
                return Err(PacketError::Invalid(format!("waypoint count {count} too large")));
            }
            let waypoints = (0..count).map(|_| r.vec3()).collect::<Result<_, _>>()?;
            if r.buf[r.pos..].iter().any(|&b| b != 0) {
                return Err(PacketError::Invalid("non-zero padding in mobility update".into()));
            }
            Packet::MobilityUpdate(MobilityUpdatePacket {
                origin,
                seq,
                timestamp,
                position,
                steering,
                waypoints,
            })
        }
        PacketKind::PathScore => {
            let forwarder_position = r.vec3()?;
            let predicted_position = r.vec3()?;
            let score = r.f64()?;
            let hop_count = r.u16()?;
            r.finish("PATHSCORE")?;
            if !(0.0..=1.0).contains(&score) {
                return Err(PacketError::Invalid(format!("path score {score} outside [0, 1]")));
            }
            Packet::PathScore(PathScorePacket {
                origin,
                seq,
                forwarder_position,
                predicted_position,
                score,
                hop_count,
            })
        }
        PacketKind::Data => {
            let destination = NodeId(r.u32()?);
            let ttl = r.u8()?;
            let created_at = r.f64()?;
            Packet::Data(DataPacket {
                origin,
                seq,
                destination,
                ttl,
                created_at,
                size: bytes.len(),
            })
        }
    };
    Ok(packet)
}
