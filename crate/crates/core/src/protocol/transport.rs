//! Datagram carriers for encoded frames: UDP sockets, an in-memory loopback
//! pair, and an append-only frame log for offline replay.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::path::Path;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::codec::{DecodeError, Frame, HEADER_LEN};

pub const LEADER_TO_FOLLOWER_PORT: u16 = 47001;
pub const FOLLOWER_TO_LEADER_PORT: u16 = 47002;
const MAX_DATAGRAM: usize = 1024;

pub trait Transport: Send {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()>;
    /// Next datagram, or `None` if nothing arrived within `timeout`.
    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>>;
}

pub struct UdpTransport {
    socket: UdpSocket,
    peer: SocketAddr,
    buf: Vec<u8>,
}

impl UdpTransport {
    /// Listen on `local`, send to `peer`.
    pub fn bind(local: impl ToSocketAddrs, peer: impl ToSocketAddrs) -> io::Result<Self> {
        let socket = UdpSocket::bind(local)?;
        let peer = peer
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no peer address"))?;
        Ok(UdpTransport {
            socket,
            peer,
            buf: vec![0; MAX_DATAGRAM],
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn set_peer(&mut self, peer: SocketAddr) {
        self.peer = peer;
    }

    /// Two transports on ephemeral loopback ports, addressed to each other.
    pub fn loopback_pair() -> io::Result<(Self, Self)> {
        let mut a = UdpTransport::bind("127.0.0.1:0", "127.0.0.1:9")?;
        let mut b = UdpTransport::bind("127.0.0.1:0", "127.0.0.1:9")?;
        a.set_peer(b.local_addr()?);
        b.set_peer(a.local_addr()?);
        Ok((a, b))
    }
}

impl Transport for UdpTransport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.socket.send_to(bytes, self.peer).map(|_| ())
    }

    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        self.socket
            .set_read_timeout(Some(timeout.max(Duration::from_micros(1))))?;
        match self.socket.recv_from(&mut self.buf) {
            Ok((n, _)) => Ok(Some(self.buf[..n].to_vec())),
            Err(e)
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                ) =>
            {
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

impl MemoryTransport {
    pub fn pair() -> (Self, Self) {
        let (tx_a, rx_b) = mpsc::channel();
        let (tx_b, rx_a) = mpsc::channel();
        (
            MemoryTransport { tx: tx_a, rx: rx_a },
            MemoryTransport { tx: tx_b, rx: rx_b },
        )
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.tx
            .send(bytes.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer hung up"))
    }

    fn recv(&mut self, timeout: Duration) -> io::Result<Option<Vec<u8>>> {
        match self.rx.recv_timeout(timeout) {
            Ok(b) => Ok(Some(b)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => {
                Err(io::Error::new(io::ErrorKind::BrokenPipe, "peer hung up"))
            }
        }
    }
}

/// Concatenated wire images, exactly as sent.
pub struct FrameLogWriter<W: Write> {
    out: W,
}

impl FrameLogWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(FrameLogWriter::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write> FrameLogWriter<W> {
    pub fn new(out: W) -> Self {
        FrameLogWriter { out }
    }

    pub fn append(&mut self, frame: &Frame) -> io::Result<()> {
        self.out.write_all(&frame.encode())
    }

    pub fn append_raw(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.out.write_all(bytes)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrameLogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("frame at byte {offset}: {source}")]
    Decode { offset: usize, source: DecodeError },
}

/// Split a frame log back into frames.
pub fn read_frame_log(bytes: &[u8]) -> Result<Vec<Frame>, FrameLogError> {
    let mut frames = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        let len = Frame::peek_len(rest).ok_or(FrameLogError::Decode {
            offset,
            source: DecodeError::Truncated {
                needed: HEADER_LEN,
                got: rest.len(),
            },
        })?;
        let end = len.min(rest.len());
        let frame = Frame::decode(&rest[..end])
            .map_err(|source| FrameLogError::Decode { offset, source })?;
        frames.push(frame);
        offset += end;
    }
    Ok(frames)
}

pub fn load_frame_log(path: impl AsRef<Path>) -> Result<Vec<Frame>, FrameLogError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    read_frame_log(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memory_pair_is_bidirectional() {
        let (mut a, mut b) = MemoryTransport::pair();
        a.send(&[1, 2]).unwrap();
        b.send(&[3]).unwrap();
        assert_eq!(b.recv(Duration::from_millis(10)).unwrap(), Some(vec![1, 2]));
        assert_eq!(a.recv(Duration::from_millis(10)).unwrap(), Some(vec![3]));
        assert_eq!(a.recv(Duration::from_millis(1)).unwrap(), None);
    }

    #[test]
    fn udp_loopback_carries_frames() {
        let (mut a, mut b) = UdpTransport::loopback_pair().unwrap();
        let f = Frame::heartbeat(5, 123);
        a.send(&f.encode()).unwrap();
        let got = b.recv(Duration::from_secs(2)).unwrap().unwrap();
        assert_eq!(Frame::decode(&got).unwrap(), f);
    }

    #[test]
    fn frame_log_round_trip() {
        let mut w = FrameLogWriter::new(Vec::new());
        let frames = [
            Frame::heartbeat(1, 0),
            Frame::encoder(2, 10_000, &[0.5; 20]),
            Frame::heartbeat(3, 20_000),
        ];
        for f in &frames {
            w.append(f).unwrap();
        }
        let bytes = w.into_inner();
        assert_eq!(read_frame_log(&bytes).unwrap(), frames);
        let err = read_frame_log(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(err, FrameLogError::Decode { .. }));
    }
}
