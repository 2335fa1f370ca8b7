//! Minimal RIFF/WAVE codec for PCM integer and IEEE float data.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use super::{AudioClip, AudioError};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encodings understood by the reader and writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm8,
    Pcm16,
    Pcm24,
    Pcm32,
    Float32,
}

impl WavEncoding {
    fn format_tag(self) -> u16 {
        match self {
            WavEncoding::Float32 => FORMAT_IEEE_FLOAT,
            _ => FORMAT_PCM,
        }
    }

    pub fn bits_per_sample(self) -> u16 {
        match self {
            WavEncoding::Pcm8 => 8,
            WavEncoding::Pcm16 => 16,
            WavEncoding::Pcm24 => 24,
            WavEncoding::Pcm32 | WavEncoding::Float32 => 32,
        }
    }

    fn bytes_per_sample(self) -> usize {
        self.bits_per_sample() as usize / 8
    }
}

#[derive(Debug, Clone, Copy)]
struct FormatChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits_per_sample: u16,
}

/// Decodes a WAV file to a mono clip at its native rate.
///
/// Multi-channel data is averaged per frame; integer samples are divided by
/// the format's full-scale value.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| match source.kind() {
        ErrorKind::NotFound => AudioError::NotFound(path.to_path_buf()),
        _ => AudioError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    decode_wav(&bytes)
}

/// Decodes an in-memory WAV byte stream.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 {
        return Err(malformed("riff", "file shorter than the 12-byte RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("riff", "missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("wave", "missing WAVE form type"));
    }

    let mut format = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => format = Some(parse_format(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word aligned
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let format = format.ok_or_else(|| malformed("fmt", "no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("data", "no data chunk"))?;
    let encoding = resolve_encoding(&format)?;

    let channels = format.channels as usize;
    let width = encoding.bytes_per_sample();
    if format.block_align as usize != channels * width {
        return Err(malformed(
            "block_align",
            format!(
                "block_align {} does not match {} channels of {} bytes",
                format.block_align, channels, width
            ),
        ));
    }
    let frame_bytes = channels * width;
    let num_frames = data.len() / frame_bytes;
    let mut samples = Vec::with_capacity(num_frames);
    for frame in data.chunks_exact(frame_bytes) {
        let sum: f64 = frame.chunks_exact(width).map(|s| decode_sample(s, encoding)).sum();
        samples.push(sum / channels as f64);
    }
    AudioClip::from_clamped(samples, format.sample_rate)
}

fn parse_format(body: &[u8]) -> Result<FormatChunk, AudioError> {
    if body.len() < 16 {
        return Err(malformed("fmt", "fmt chunk shorter than 16 bytes"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([body[i], body[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(body[i..i + 4].try_into().unwrap());
    let mut format_tag = u16_at(0);
    let channels = u16_at(2);
    let sample_rate = u32_at(4);
    let block_align = u16_at(12);
    let bits_per_sample = u16_at(14);
    if format_tag == FORMAT_EXTENSIBLE {
        if body.len() < 40 {
            return Err(malformed("fmt", "extensible fmt chunk shorter than 40 bytes"));
        }
        format_tag = u16_at(24);
    }
    if channels == 0 {
        return Err(malformed("channels", "channel count is zero"));
    }
    if sample_rate == 0 {
        return Err(malformed("sample_rate", "sample rate is zero"));
    }
    Ok(FormatChunk {
        format_tag,
        channels,
        sample_rate,
        block_align,
        bits_per_sample,
    })
}

fn resolve_encoding(format: &FormatChunk) -> Result<WavEncoding, AudioError> {
    match (format.format_tag, format.bits_per_sample) {
        (FORMAT_PCM, 8) => Ok(WavEncoding::Pcm8),
        (FORMAT_PCM, 16) => Ok(WavEncoding::Pcm16),
        (FORMAT_PCM, 24) => Ok(WavEncoding::Pcm24),
        (FORMAT_PCM, 32) => Ok(WavEncoding::Pcm32),
        (FORMAT_IEEE_FLOAT, 32) => Ok(WavEncoding::Float32),
        (FORMAT_PCM, bits) | (FORMAT_IEEE_FLOAT, bits) => Err(AudioError::UnsupportedEncoding {
            field: "bits_per_sample",
            value: bits as u32,
        }),
        (tag, _) => Err(AudioError::UnsupportedEncoding {
            field: "format_tag",
            value: tag as u32,
        }),
    }
}

fn decode_sample(raw: &[u8], encoding: WavEncoding) -> f64 {
    match encoding {
        WavEncoding::Pcm8 => (raw[0] as f64 - 128.0) / 128.0,
        WavEncoding::Pcm16 => i16::from_le_bytes([raw[0], raw[1]]) as f64 / 32768.0,
        WavEncoding::Pcm24 => {
            let v = i32::from_le_bytes([0, raw[0], raw[1], raw[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        WavEncoding::Pcm32 => {
            i32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64 / 2_147_483_648.0
        }
        WavEncoding::Float32 => f32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]) as f64,
    }
}

fn malformed(field: &'static str, detail: impl Into<String>) -> AudioError {
    AudioError::MalformedHeader {
        field,
        detail: detail.into(),
    }
}

/// Encodes interleaved samples as a WAV byte stream.
pub fn encode_wav(
    interleaved: &[f64],
    channels: u16,
    sample_rate: u32,
    encoding: WavEncoding,
) -> Vec<u8> {
    assert!(channels > 0, "channel count must be positive");
    let width = encoding.bytes_per_sample();
    let data_len = interleaved.len() * width;
    let block_align = channels as usize * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&encoding.format_tag().to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&((sample_rate as usize * block_align) as u32).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&encoding.bits_per_sample().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in interleaved {
        let s = if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 };
        match encoding {
            WavEncoding::Pcm8 => out.push((quantize(s, 128.0) + 128) as u8),
            WavEncoding::Pcm16 => {
                out.extend_from_slice(&(quantize(s, 32768.0) as i16).to_le_bytes())
            }
            WavEncoding::Pcm24 => {
                let v = quantize(s, 8_388_608.0).to_le_bytes();
                out.extend_from_slice(&v[0..3]);
            }
            WavEncoding::Pcm32 => {
                out.extend_from_slice(&(quantize(s, 2_147_483_648.0) as i32).to_le_bytes())
            }
            WavEncoding::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

fn quantize(s: f64, full_scale: f64) -> i64 {
    ((s * full_scale).round() as i64).clamp(-(full_scale as i64), full_scale as i64 - 1)
}

/// Writes a mono clip.
pub fn write_wav(
    path: impl AsRef<Path>,
    clip: &AudioClip,
    encoding: WavEncoding,
) -> Result<(), AudioError> {
    write_wav_interleaved(path, clip.samples(), 1, clip.sample_rate(), encoding)
}

pub fn write_wav_interleaved(
    path: impl AsRef<Path>,
    interleaved: &[f64],
    channels: u16,
    sample_rate: u32,
    encoding: WavEncoding,
) -> Result<(), AudioError> {
    let path = path.as_ref();
    fs::write(path, encode_wav(interleaved, channels, sample_rate, encoding)).map_err(|source| {
        AudioError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}
