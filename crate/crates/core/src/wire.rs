//! Binary wire protocol of the sensing board.
//!
//! Each frame is 38 octets:
//!
//! ```text
//! offset  size  field
//! 0       2     sync marker 0xAA 0x55
//! 2       2     sequence counter, u16 little-endian (wraps at 65536)
//! 4       32    16 channel readings, u16 little-endian, low 12 bits used
//! 36      2     CRC-16/CCITT-FALSE over bytes 2..36, little-endian
//! ```
//!
//! The stream decoder tolerates arbitrary garbage between frames: it scans
//! for the sync marker, validates the checksum and the 12-bit channel range,
//! and on failure advances a single octet so that a corrupted frame cannot
//! swallow a valid one that overlaps its tail. Sequence numbers are unwrapped
//! into a monotone 64-bit counter; timestamps derive from that counter and
//! the configured acquisition rate.

use crate::error::{Error, Result};
use crate::types::{TactileFrame, ADC_MAX, CHANNEL_COUNT, DEFAULT_SAMPLE_RATE};

pub const SYNC: [u8; 2] = [0xAA, 0x55];
pub const FRAME_LEN: usize = 4 + 2 * CHANNEL_COUNT + 2;

/// CRC-16/CCITT-FALSE: polynomial 0x1021, initial value 0xFFFF, no input or
/// output reflection, no final xor. Check value: crc(b"123456789") == 0x29B1.
pub fn crc16_ccitt_false(data: &[u8]) -> u16 {
    const TABLE: [u16; 256] = crc_table();
    let mut crc = 0xFFFFu16;
    for &byte in data {
        let idx = ((crc >> 8) ^ u16::from(byte)) & 0xFF;
        crc = (crc << 8) ^ TABLE[idx as usize];
    }
    crc
}

const fn crc_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// Serializes one frame. Only the low 16 bits of the sequence go on the
/// wire; the decoder reconstructs the rest.
pub fn encode_frame(frame: &TactileFrame) -> Result<[u8; FRAME_LEN]> {
    let mut raw = [0u8; FRAME_LEN];
    raw[..2].copy_from_slice(&SYNC);
    raw[2..4].copy_from_slice(&(frame.sequence as u16).to_le_bytes());
    for (index, &value) in frame.channels.iter().enumerate() {
        if value > ADC_MAX {
            return Err(Error::ChannelOutOfRange { index, value });
        }
        raw[4 + 2 * index..6 + 2 * index].copy_from_slice(&value.to_le_bytes());
    }
    let crc = crc16_ccitt_false(&raw[2..FRAME_LEN - 2]);
    raw[FRAME_LEN - 2..].copy_from_slice(&crc.to_le_bytes());
    Ok(raw)
}

/// Strict single-frame decode: the slice must be exactly one well-formed
/// frame. Timestamps assume the nominal acquisition rate; use
/// [`StreamDecoder`] for continuous input or non-default rates.
pub fn decode_frame(raw: &[u8]) -> Result<TactileFrame> {
    if raw.len() != FRAME_LEN {
        return Err(Error::InvalidFrame(format!(
            "expected {FRAME_LEN} octets, got {}",
            raw.len()
        )));
    }
    if raw[..2] != SYNC {
        return Err(Error::InvalidFrame("missing sync marker".into()));
    }
    let (wire_sequence, channels) = parse_body(raw)?;
    TactileFrame::new(
        u64::from(wire_sequence),
        f64::from(wire_sequence) / DEFAULT_SAMPLE_RATE,
        channels,
    )
}

fn parse_body(raw: &[u8]) -> Result<(u16, [u16; CHANNEL_COUNT])> {
    let stored = u16::from_le_bytes([raw[FRAME_LEN - 2], raw[FRAME_LEN - 1]]);
    let computed = crc16_ccitt_false(&raw[2..FRAME_LEN - 2]);
    if stored != computed {
        return Err(Error::InvalidFrame(format!(
            "crc mismatch: stored {stored:#06x}, computed {computed:#06x}"
        )));
    }
    let wire_sequence = u16::from_le_bytes([raw[2], raw[3]]);
    let mut channels = [0u16; CHANNEL_COUNT];
    for (index, slot) in channels.iter_mut().enumerate() {
        let value = u16::from_le_bytes([raw[4 + 2 * index], raw[5 + 2 * index]]);
        if value > ADC_MAX {
            return Err(Error::ChannelOutOfRange { index, value });
        }
        *slot = value;
    }
    Ok((wire_sequence, channels))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecoderStats {
    pub frames_decoded: u64,
    /// Sync candidates whose checksum or channel range failed.
    pub frames_corrupted: u64,
    /// Octets discarded while hunting for a sync marker.
    pub bytes_skipped: u64,
}

/// Incremental decoder for a byte stream arriving in arbitrary chunks.
/// Carries less than one frame of state between calls, so memory stays
/// bounded no matter how the input is sliced.
#[derive(Debug, Clone)]
pub struct StreamDecoder {
    sample_rate: f64,
    pending: Vec<u8>,
    last_wire_sequence: Option<u16>,
    epoch: u64,
    stats: DecoderStats,
}

impl StreamDecoder {
    pub fn new(sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample rate {sample_rate} must be positive"
            )));
        }
        Ok(Self {
            sample_rate,
            pending: Vec::with_capacity(FRAME_LEN),
            last_wire_sequence: None,
            epoch: 0,
            stats: DecoderStats::default(),
        })
    }

    pub fn stats(&self) -> DecoderStats {
        self.stats
    }

    /// Feeds one chunk and returns every frame completed by it.
    pub fn push(&mut self, bytes: &[u8]) -> Vec<TactileFrame> {
        let pending = std::mem::take(&mut self.pending);
        let total = pending.len() + bytes.len();
        let at = |i: usize| {
            if i < pending.len() {
                pending[i]
            } else {
                bytes[i - pending.len()]
            }
        };

        let mut frames = Vec::new();
        let mut pos = 0;
        while pos < total {
            if at(pos) != SYNC[0] {
                pos += 1;
                self.stats.bytes_skipped += 1;
                continue;
            }
            if pos + 1 >= total {
                break; // lone sync byte at the end of input: wait for more
            }
            if at(pos + 1) != SYNC[1] {
                pos += 1;
                self.stats.bytes_skipped += 1;
                continue;
            }
            if pos + FRAME_LEN > total {
                break; // incomplete candidate frame: wait for more
            }
            let mut raw = [0u8; FRAME_LEN];
            for (offset, slot) in raw.iter_mut().enumerate() {
                *slot = at(pos + offset);
            }
            match parse_body(&raw) {
                Ok((wire_sequence, channels)) => {
                    let sequence = self.unwrap(wire_sequence);
                    frames.push(TactileFrame {
                        sequence,
                        timestamp: sequence as f64 / self.sample_rate,
                        channels,
                    });
                    self.stats.frames_decoded += 1;
                    pos += FRAME_LEN;
                }
                Err(_) => {
                    // False or corrupted sync: a genuine frame may start
                    // inside this window, so advance one octet only.
                    self.stats.frames_corrupted += 1;
                    self.stats.bytes_skipped += 1;
                    pos += 1;
                }
            }
        }
        self.pending = (pos..total).map(at).collect();
        debug_assert!(self.pending.len() < FRAME_LEN);
        frames
    }

    /// Extends the 16-bit wire counter to 64 bits. A backward jump of more
    /// than half the counter range is a wrap; smaller backward jumps are
    /// treated as stream disorder and left in the current epoch.
    fn unwrap(&mut self, wire_sequence: u16) -> u64 {
        if let Some(prev) = self.last_wire_sequence {
            if wire_sequence < prev && prev - wire_sequence > 32768 {
                self.epoch += 1;
            }
        }
        self.last_wire_sequence = Some(wire_sequence);
        self.epoch * 65536 + u64::from(wire_sequence)
    }
}

impl Default for StreamDecoder {
    fn default() -> Self {
        Self::new(DEFAULT_SAMPLE_RATE).expect("default rate is valid")
    }
}

/// One-shot convenience over [`StreamDecoder`] at the nominal rate.
pub fn decode_stream(bytes: &[u8]) -> (Vec<TactileFrame>, DecoderStats) {
    let mut decoder = StreamDecoder::default();
    let frames = decoder.push(bytes);
    (frames, decoder.stats())
}
