//! The HFV1 frame file: a little-endian header followed by raw sample
//! records.
//!
//! Header layout (44 bytes):
//! magic "HOMF", u32 version = 1, u32 frame_count, u32 samples_per_frame,
//! f64 sample_period_s, u32 adc_bits, u32 signal_pulse_center,
//! u32 dark_pulse_center, f64 area_gain.
//!
//! Records hold one unsigned byte per sample when `adc_bits <= 8`, two
//! little-endian bytes otherwise.

use std::fs;
use std::io::Write;
use std::path::Path;

use focktomo_core::acquisition::{AcquisitionSpec, FrameRecord};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"HOMF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;

#[derive(Debug, Error)]
pub enum Hfv1Error {
    #[error("bad magic at byte offset 0 (expected \"HOMF\")")]
    BadMagic,
    #[error("unsupported version {found} at byte offset 4 (expected {VERSION})")]
    BadVersion { found: u32 },
    #[error("truncated payload: need {needed} bytes at offset {offset}, only {available} left")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("header field {field} has invalid value {value} at byte offset {offset}")]
    BadField { field: &'static str, value: u64, offset: usize },
    #[error("frame {index} has {got} samples, header says {expected}")]
    FrameShape { index: u32, got: usize, expected: usize },
    #[error("sample value {value} does not fit {bits} bits")]
    SampleRange { value: u16, bits: u32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Hfv1Error>;

fn wide(bits: u32) -> bool {
    bits > 8
}

/// Serialize a frame set to HFV1 bytes.
pub fn encode_frames(spec: &AcquisitionSpec, frames: &[FrameRecord]) -> Result<Vec<u8>> {
    let n = spec.samples_per_frame as usize;
    let per = if wide(spec.adc_bits) { 2 } else { 1 };
    let mut out = Vec::with_capacity(HEADER_LEN + frames.len() * n * per);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(frames.len() as u32).to_le_bytes());
    out.extend_from_slice(&spec.samples_per_frame.to_le_bytes());
    out.extend_from_slice(&spec.sample_period_s.to_le_bytes());
    out.extend_from_slice(&spec.adc_bits.to_le_bytes());
    out.extend_from_slice(&spec.signal_pulse_center.to_le_bytes());
    out.extend_from_slice(&spec.dark_pulse_center.to_le_bytes());
    out.extend_from_slice(&spec.area_gain.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    let max = spec.max_code();
    for frame in frames {
        if frame.samples.len() != n {
            return Err(Hfv1Error::FrameShape {
                index: frame.index,
                got: frame.samples.len(),
                expected: n,
            });
        }
        for &s in &frame.samples {
            if s > max {
                return Err(Hfv1Error::SampleRange { value: s, bits: spec.adc_bits });
            }
            if wide(spec.adc_bits) {
                out.extend_from_slice(&s.to_le_bytes());
            } else {
                out.push(s as u8);
            }
        }
    }
    Ok(out)
}

/// Parse HFV1 bytes. Non-header acquisition fields come back at their
/// defaults; pipeline callers override them from the run configuration.
pub fn decode_frames(bytes: &[u8]) -> Result<(AcquisitionSpec, Vec<FrameRecord>)> {
    let need = |offset: usize, needed: usize| -> Result<()> {
        if bytes.len() < offset + needed {
            Err(Hfv1Error::Truncated { offset, needed, available: bytes.len().saturating_sub(offset) })
        } else {
            Ok(())
        }
    };
    need(0, HEADER_LEN)?;
    if &bytes[0..4] != MAGIC {
        return Err(Hfv1Error::BadMagic);
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Hfv1Error::BadVersion { found: version });
    }
    let frame_count = u32_at(8);
    let samples_per_frame = u32_at(12);
    if samples_per_frame == 0 {
        return Err(Hfv1Error::BadField { field: "samples_per_frame", value: 0, offset: 12 });
    }
    let sample_period_s = f64_at(16);
    let adc_bits = u32_at(24);
    if !(1..=16).contains(&adc_bits) {
        return Err(Hfv1Error::BadField { field: "adc_bits", value: adc_bits as u64, offset: 24 });
    }
    let signal_pulse_center = u32_at(28);
    let dark_pulse_center = u32_at(32);
    let area_gain = f64_at(36);
    let spec = AcquisitionSpec {
        samples_per_frame,
        sample_period_s,
        adc_bits,
        signal_pulse_center,
        dark_pulse_center,
        area_gain,
        ..AcquisitionSpec::default()
    };

    let n = samples_per_frame as usize;
    let per = if wide(adc_bits) { 2 } else { 1 };
    let mut frames = Vec::with_capacity(frame_count as usize);
    let mut offset = HEADER_LEN;
    for index in 0..frame_count {
        need(offset, n * per)?;
        let mut samples = Vec::with_capacity(n);
        if wide(adc_bits) {
            for k in 0..n {
                let o = offset + 2 * k;
                samples.push(u16::from_le_bytes([bytes[o], bytes[o + 1]]));
            }
        } else {
            samples.extend(bytes[offset..offset + n].iter().map(|&b| b as u16));
        }
        frames.push(FrameRecord { index, samples });
        offset += n * per;
    }
    Ok((spec, frames))
}

/// Write a frame set to disk, byte-exactly reproducible.
pub fn write_frames(path: &Path, spec: &AcquisitionSpec, frames: &[FrameRecord]) -> Result<()> {
    let bytes = encode_frames(spec, frames)?;
    let io = |source| Hfv1Error::Io { path: path.display().to_string(), source };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(&bytes).map_err(io)?;
    Ok(())
}

/// Exact inverse of `write_frames`.
pub fn read_frames(path: &Path) -> Result<(AcquisitionSpec, Vec<FrameRecord>)> {
    let bytes = fs::read(path)
        .map_err(|source| Hfv1Error::Io { path: path.display().to_string(), source })?;
    decode_frames(&bytes)
}
