//! Fixed-layout binary frames exchanged between leader and follower.
//!
//! Wire image: magic `MF`, version, kind, sequence (u32 LE), timestamp in
//! microseconds (u64 LE), payload length (u16 LE), payload, CRC-32/IEEE of
//! everything before it (u32 LE). Payload values are little-endian f32.

use thiserror::Error;

use crate::kinematics::{FINGERS, JOINTS_PER_FINGER};
use crate::mapping::{HapticCommand, SensorFrame, PALM_SENSORS};

pub const MAGIC: [u8; 2] = [0x4D, 0x46];
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 18;
pub const CRC_LEN: usize = 4;
pub const MIN_FRAME_LEN: usize = HEADER_LEN + CRC_LEN;
pub const ENCODER_VALUES: usize = FINGERS * JOINTS_PER_FINGER;
pub const SENSOR_VALUES: usize = FINGERS + PALM_SENSORS;
pub const COMMAND_VALUES: usize = 2 * FINGERS + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameKind {
    Encoder = 0x01,
    Sensor = 0x02,
    HapticCommand = 0x03,
    Heartbeat = 0x04,
}

impl FrameKind {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(FrameKind::Encoder),
            0x02 => Some(FrameKind::Sensor),
            0x03 => Some(FrameKind::HapticCommand),
            0x04 => Some(FrameKind::Heartbeat),
            _ => None,
        }
    }

    pub fn payload_len(self) -> usize {
        4 * match self {
            FrameKind::Encoder => ENCODER_VALUES,
            FrameKind::Sensor => SENSOR_VALUES,
            FrameKind::HapticCommand => COMMAND_VALUES,
            FrameKind::Heartbeat => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated frame: need {needed} bytes, have {got}")]
    Truncated { needed: usize, got: usize },
    #[error("crc mismatch: computed {computed:#010x}, frame carries {carried:#010x}")]
    BadCrc { computed: u32, carried: u32 },
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unknown frame kind {0:#04x}")]
    UnknownKind(u8),
    #[error("{extra} bytes after the declared payload")]
    TrailingBytes { extra: usize },
    #[error("{kind:?} payload must be {expected} bytes, header declares {declared}")]
    BadPayloadLength {
        kind: FrameKind,
        expected: usize,
        declared: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Joint angles in rad, finger-major.
    Encoder([f32; ENCODER_VALUES]),
    /// Five fingertip forces then 27 palm temperatures.
    Sensor([f32; SENSOR_VALUES]),
    /// Five currents, five duties, palm setpoint.
    Command([f32; COMMAND_VALUES]),
    Heartbeat,
}

impl Payload {
    pub fn kind(&self) -> FrameKind {
        match self {
            Payload::Encoder(_) => FrameKind::Encoder,
            Payload::Sensor(_) => FrameKind::Sensor,
            Payload::Command(_) => FrameKind::HapticCommand,
            Payload::Heartbeat => FrameKind::Heartbeat,
        }
    }

    pub fn values(&self) -> &[f32] {
        match self {
            Payload::Encoder(v) => v,
            Payload::Sensor(v) => v,
            Payload::Command(v) => v,
            Payload::Heartbeat => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub sequence: u32,
    pub timestamp_us: u64,
    pub payload: Payload,
}

fn narrow<const N: usize>(values: impl IntoIterator<Item = f64>) -> [f32; N] {
    let mut out = [0.0f32; N];
    for (o, v) in out.iter_mut().zip(values) {
        *o = v as f32;
    }
    out
}

pub fn seconds_to_us(t: f64) -> u64 {
    (t * 1e6).round().max(0.0) as u64
}

impl Frame {
    pub fn kind(&self) -> FrameKind {
        self.payload.kind()
    }

    pub fn heartbeat(sequence: u32, timestamp_us: u64) -> Self {
        Frame {
            sequence,
            timestamp_us,
            payload: Payload::Heartbeat,
        }
    }

    pub fn encoder(sequence: u32, timestamp_us: u64, angles: &[f64; ENCODER_VALUES]) -> Self {
        Frame {
            sequence,
            timestamp_us,
            payload: Payload::Encoder(narrow(angles.iter().copied())),
        }
    }

    pub fn sensor(sequence: u32, timestamp_us: u64, frame: &SensorFrame) -> Self {
        let values = frame.forces.iter().chain(&frame.palm_temps).copied();
        Frame {
            sequence,
            timestamp_us,
            payload: Payload::Sensor(narrow(values)),
        }
    }

    pub fn command(timestamp_us: u64, cmd: &HapticCommand) -> Self {
        let values = cmd
            .motor_current
            .iter()
            .chain(&cmd.pwm_duty)
            .copied()
            .chain(std::iter::once(cmd.palm_setpoint));
        Frame {
            sequence: cmd.sequence,
            timestamp_us,
            payload: Payload::Command(narrow(values)),
        }
    }

    pub fn timestamp_s(&self) -> f64 {
        self.timestamp_us as f64 / 1e6
    }

    pub fn encoder_angles(&self) -> Option<[f64; ENCODER_VALUES]> {
        match &self.payload {
            Payload::Encoder(v) => Some(v.map(f64::from)),
            _ => None,
        }
    }

    pub fn sensor_frame(&self) -> Option<SensorFrame> {
        match &self.payload {
            Payload::Sensor(v) => Some(SensorFrame {
                forces: std::array::from_fn(|i| f64::from(v[i])),
                palm_temps: std::array::from_fn(|i| f64::from(v[FINGERS + i])),
                timestamp: self.timestamp_s(),
            }),
            _ => None,
        }
    }

    pub fn haptic_command(&self) -> Option<HapticCommand> {
        match &self.payload {
            Payload::Command(v) => Some(HapticCommand {
                sequence: self.sequence,
                motor_current: std::array::from_fn(|i| f64::from(v[i])),
                pwm_duty: std::array::from_fn(|i| f64::from(v[FINGERS + i])),
                palm_setpoint: f64::from(v[2 * FINGERS]),
            }),
            _ => None,
        }
    }

    pub fn encoded_len(&self) -> usize {
        MIN_FRAME_LEN + self.kind().payload_len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut out);
        out
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        let start = out.len();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.kind() as u8);
        out.extend_from_slice(&self.sequence.to_le_bytes());
        out.extend_from_slice(&self.timestamp_us.to_le_bytes());
        out.extend_from_slice(&(self.kind().payload_len() as u16).to_le_bytes());
        for v in self.payload.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
    }

    /// Decode one complete datagram. The CRC is checked before any header
    /// field is trusted, so every single-bit corruption reports `BadCrc`.
    pub fn decode(bytes: &[u8]) -> Result<Frame, DecodeError> {
        if bytes.len() < MIN_FRAME_LEN {
            return Err(DecodeError::Truncated {
                needed: MIN_FRAME_LEN,
                got: bytes.len(),
            });
        }
        let (body, tail) = bytes.split_at(bytes.len() - CRC_LEN);
        let carried = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if computed != carried {
            return Err(DecodeError::BadCrc { computed, carried });
        }
        let magic = [body[0], body[1]];
        if magic != MAGIC {
            return Err(DecodeError::BadMagic(magic));
        }
        if body[2] != VERSION {
            return Err(DecodeError::BadVersion(body[2]));
        }
        let kind = FrameKind::from_byte(body[3]).ok_or(DecodeError::UnknownKind(body[3]))?;
        let sequence = u32::from_le_bytes(body[4..8].try_into().unwrap());
        let timestamp_us = u64::from_le_bytes(body[8..16].try_into().unwrap());
        let declared = u16::from_le_bytes(body[16..18].try_into().unwrap()) as usize;
        let present = body.len() - HEADER_LEN;
        if declared > present {
            return Err(DecodeError::Truncated {
                needed: MIN_FRAME_LEN + declared,
                got: bytes.len(),
            });
        }
        if declared < present {
            return Err(DecodeError::TrailingBytes {
                extra: present - declared,
            });
        }
        if declared != kind.payload_len() {
            return Err(DecodeError::BadPayloadLength {
                kind,
                expected: kind.payload_len(),
                declared,
            });
        }
        let raw = &body[HEADER_LEN..];
        let mut floats = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| floats.by_ref().take(n).collect::<Vec<f32>>();
        let payload = match kind {
            FrameKind::Encoder => Payload::Encoder(take(ENCODER_VALUES).try_into().unwrap()),
            FrameKind::Sensor => Payload::Sensor(take(SENSOR_VALUES).try_into().unwrap()),
            FrameKind::HapticCommand => Payload::Command(take(COMMAND_VALUES).try_into().unwrap()),
            FrameKind::Heartbeat => Payload::Heartbeat,
        };
        Ok(Frame {
            sequence,
            timestamp_us,
            payload,
        })
    }

    /// Length of the frame at the start of `bytes`, read from its header.
    pub fn peek_len(bytes: &[u8]) -> Option<usize> {
        (bytes.len() >= HEADER_LEN)
            .then(|| MIN_FRAME_LEN + u16::from_le_bytes([bytes[16], bytes[17]]) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heartbeat_image() {
        let img = Frame::heartbeat(1, 0).encode();
        assert_eq!(img.len(), 22);
        assert_eq!(
            &img[..18],
            &[0x4D, 0x46, 1, 4, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]
        );
        assert_eq!(Frame::decode(&img).unwrap(), Frame::heartbeat(1, 0));
    }

    #[test]
    fn typed_payloads_round_trip() {
        let cmd = HapticCommand {
            sequence: 7,
            motor_current: [0.875, 0.0, 1.0, 2.0, 3.5],
            pwm_duty: [1.0, 0.0, 0.5, 0.25, 0.125],
            palm_setpoint: 40.0,
        };
        let f = Frame::decode(&Frame::command(10, &cmd).encode()).unwrap();
        assert_eq!(f.haptic_command().unwrap(), cmd);
        let s = SensorFrame::uniform([1.0, 2.0, 0.5, 0.0, 4.0], 24.0, 0.01);
        let back = Frame::decode(&Frame::sensor(3, 10_000, &s).encode()).unwrap();
        assert_eq!(back.sensor_frame().unwrap(), s);
    }

    #[test]
    fn rejections_are_specific() {
        let mut img = Frame::heartbeat(1, 0).encode();
        assert!(matches!(
            Frame::decode(&img[..21]),
            Err(DecodeError::Truncated { .. })
        ));
        img[0] = 0;
        assert!(matches!(
            Frame::decode(&img),
            Err(DecodeError::BadCrc { .. })
        ));
        let reseal = |mut body: Vec<u8>| {
            body.truncate(body.len() - 4);
            let crc = crc32fast::hash(&body);
            body.extend_from_slice(&crc.to_le_bytes());
            body
        };
        let img = reseal(img);
        assert_eq!(Frame::decode(&img), Err(DecodeError::BadMagic([0, 0x46])));
        let mut v = Frame::heartbeat(1, 0).encode();
        v[2] = 2;
        assert_eq!(Frame::decode(&reseal(v)), Err(DecodeError::BadVersion(2)));
        let mut k = Frame::heartbeat(1, 0).encode();
        k[3] = 9;
        assert_eq!(Frame::decode(&reseal(k)), Err(DecodeError::UnknownKind(9)));
        let mut l = Frame::heartbeat(1, 0).encode();
        l[16] = 4;
        assert!(matches!(
            Frame::decode(&reseal(l)),
            Err(DecodeError::Truncated { .. })
        ));
        let mut p = Frame::heartbeat(1, 0).encode();
        p.splice(18..18, [0u8; 4]);
        p[16] = 4;
        assert!(matches!(
            Frame::decode(&reseal(p)),
            Err(DecodeError::BadPayloadLength { declared: 4, .. })
        ));
    }
}
