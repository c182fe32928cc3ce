use std::io::{Read, Write};

use super::StereoBuffer;
use crate::error::{Error, Result};

pub const WAV_HEADER_LEN: usize = 44;
const CHANNELS: u16 = 2;
const BITS: u16 = 16;

fn to_i16(s: f32) -> i16 {
    (s.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

/// Canonical 44-byte RIFF/WAVE header followed by interleaved 16-bit
/// little-endian PCM. Returns the number of bytes written.
pub fn write_pcm<W: Write>(buffer: &StereoBuffer, mut sink: W) -> Result<usize> {
    buffer.validate()?;
    let block_align = CHANNELS * BITS / 8;
    let data_len = u32::try_from(buffer.len() * block_align as usize)
        .map_err(|_| Error::Domain("buffer too long for a WAV file".into()))?;
    let byte_rate = buffer.sample_rate * block_align as u32;

    let mut out = Vec::with_capacity(WAV_HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&CHANNELS.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&BITS.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for (&l, &r) in buffer.left.iter().zip(&buffer.right) {
        out.extend_from_slice(&to_i16(l).to_le_bytes());
        out.extend_from_slice(&to_i16(r).to_le_bytes());
    }
    sink.write_all(&out)?;
    sink.flush()?;
    Ok(out.len())
}

/// Reads back exactly the layout [`write_pcm`] produces.
pub fn read_pcm<R: Read>(mut source: R) -> Result<StereoBuffer> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let bad = |m: &str| Error::Domain(format!("wav: {m}"));
    if bytes.len() < WAV_HEADER_LEN || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    if &bytes[12..16] != b"fmt " || u32_at(16) != 16 || u16_at(20) != 1 {
        return Err(bad("expected 16-byte PCM fmt chunk"));
    }
    if u16_at(22) != CHANNELS || u16_at(34) != BITS {
        return Err(bad("expected 2-channel 16-bit audio"));
    }
    let sample_rate = u32_at(24);
    if &bytes[36..40] != b"data" {
        return Err(bad("missing data chunk"));
    }
    let data_len = u32_at(40) as usize;
    let data = bytes
        .get(WAV_HEADER_LEN..WAV_HEADER_LEN + data_len)
        .ok_or_else(|| bad("truncated data chunk"))?;
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for frame in data.chunks_exact(4) {
        left.push(i16::from_le_bytes([frame[0], frame[1]]) as f32 / 32767.0);
        right.push(i16::from_le_bytes([frame[2], frame[3]]) as f32 / 32767.0);
    }
    StereoBuffer::new(sample_rate, left, right)
}
