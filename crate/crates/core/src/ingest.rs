//! Pulse-area extraction, vacuum calibration, histogramming, and the LO
//! shot-noise linearity sweep.

use alloc::vec::Vec;

use crate::acquisition::{synthesize_frames, AcquisitionSpec, FrameRecord};
use crate::error::{Error, Result};
use crate::stats;

/// Integrated areas of the two pulses of one frame, baseline-subtracted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseAreas {
    pub signal_area: f64,
    pub dark_area: f64,
    /// Baseline level estimated from the samples outside both windows.
    pub baseline: f64,
}

/// Binned phase-averaged quadrature distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Center of bin 0; bin k is centered at `center_offset + k * bin_width`.
    pub center_offset: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn center(&self, k: usize) -> f64 {
        self.center_offset + k as f64 * self.bin_width
    }

    /// Empirical probability density of bin k.
    pub fn density(&self, k: usize) -> f64 {
        self.counts[k] as f64 / (self.total as f64 * self.bin_width)
    }

    /// Empirical density at an arbitrary point (0 outside the binned range).
    pub fn density_at(&self, x: f64) -> f64 {
        let t = (x - (self.center_offset - 0.5 * self.bin_width)) / self.bin_width;
        if t < 0.0 {
            return 0.0;
        }
        let k = t as usize;
        if k >= self.counts.len() {
            return 0.0;
        }
        self.density(k)
    }
}

/// Integrate both pulses of a frame.
///
/// Baseline is the mean of all samples outside the two windows; each area
/// is the baseline-subtracted sum over its window (center +- 3 FWHM).
pub fn extract_areas(frame: &FrameRecord, spec: &AcquisitionSpec) -> Result<PulseAreas> {
    use alloc::format;
    let n = spec.samples_per_frame as usize;
    if frame.samples.len() != n {
        return Err(Error::Spec(format!(
            "frame {} has {} samples, spec says {n}",
            frame.index,
            frame.samples.len()
        )));
    }
    let hw = spec.window_halfwidth() as i64;
    let sc = spec.signal_pulse_center as i64;
    let dc = spec.dark_pulse_center as i64;
    if sc - hw < 0 || dc + hw >= n as i64 {
        return Err(Error::Spec(format!("pulse windows exceed the frame")));
    }
    if sc + hw >= dc - hw {
        return Err(Error::Spec(format!("pulse integration windows overlap")));
    }
    let in_window = |j: i64| (j - sc).abs() <= hw || (j - dc).abs() <= hw;
    let mut base_sum = 0.0;
    let mut base_n = 0u32;
    for (j, &s) in frame.samples.iter().enumerate() {
        if !in_window(j as i64) {
            base_sum += s as f64;
            base_n += 1;
        }
    }
    if base_n == 0 {
        return Err(Error::Spec(format!("no baseline samples outside the pulse windows")));
    }
    let baseline = base_sum / base_n as f64;
    let window_sum = |c: i64| -> f64 {
        ((c - hw)..=(c + hw)).map(|j| frame.samples[j as usize] as f64 - baseline).sum()
    };
    Ok(PulseAreas { signal_area: window_sum(sc), dark_area: window_sum(dc), baseline })
}

/// Vacuum calibration derived from the dark-pulse areas: the scale maps
/// their variance to exactly 1/4 and their mean to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub dark_mean: f64,
    /// Digitizer area units per unit quadrature.
    pub scale: f64,
}

impl Calibration {
    pub fn from_dark_areas(dark_areas: &[f64]) -> Result<Self> {
        if dark_areas.len() < 1000 {
            return Err(Error::Calibration("need at least 1000 dark pulses"));
        }
        let var = stats::variance(dark_areas);
        if !(var > 0.0) {
            return Err(Error::Calibration("dark-area variance is not positive"));
        }
        Ok(Calibration {
            dark_mean: stats::mean(dark_areas),
            scale: libm::sqrt(var / crate::state::VACUUM_VARIANCE),
        })
    }

    pub fn apply(&self, areas: &[f64]) -> Vec<f64> {
        areas.iter().map(|a| (a - self.dark_mean) / self.scale).collect()
    }
}

/// Calibrate signal areas against the dark-pulse vacuum reference.
///
/// Returns the calibrated quadratures and the scale (units per quadrature).
pub fn calibrate_quadratures(
    signal_areas: &[f64],
    dark_areas: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let cal = Calibration::from_dark_areas(dark_areas)?;
    Ok((cal.apply(signal_areas), cal.scale))
}

/// Uniform binning covering [min, max].
pub fn build_histogram(xs: &[f64], bin_width: f64) -> Result<Histogram> {
    if xs.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    if !(bin_width > 0.0) {
        return Err(Error::Domain { what: "bin_width", value: bin_width });
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in xs {
        min = min.min(x);
        max = max.max(x);
    }
    let nbins = (libm::floor((max - min) / bin_width) as usize) + 1;
    let mut counts = alloc::vec![0u64; nbins];
    for &x in xs {
        let k = (libm::floor((x - min) / bin_width) as usize).min(nbins - 1);
        counts[k] += 1;
    }
    Ok(Histogram {
        bin_width,
        center_offset: min + 0.5 * bin_width,
        counts,
        total: xs.len() as u64,
    })
}

/// Dark-pulse area variance as a function of LO power.
///
/// For each power a vacuum-only acquisition is synthesized (both pulses
/// carry vacuum draws) with the electronic-noise floor fixed at the base
/// spec's level, and the extracted dark-area variance is recorded.
pub fn shot_noise_sweep(
    powers_mw: &[f64],
    spec: &AcquisitionSpec,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    shot_noise_sweep_with(powers_mw, spec, seed, 50_000)
}

pub fn shot_noise_sweep_with(
    powers_mw: &[f64],
    spec: &AcquisitionSpec,
    seed: u64,
    frames_per_point: usize,
) -> Result<Vec<(f64, f64)>> {
    if powers_mw.len() < 3 {
        return Err(Error::Domain { what: "sweep points", value: powers_mw.len() as f64 });
    }
    for &p in powers_mw {
        if !(p > 0.0) {
            return Err(Error::Domain { what: "lo power", value: p });
        }
    }
    let mut out = Vec::with_capacity(powers_mw.len());
    for (i, &p) in powers_mw.iter().enumerate() {
        // dark_count_fraction = 1 substitutes every signal pulse with a
        // vacuum draw, making the acquisition vacuum-only.
        let sub = AcquisitionSpec { dark_count_fraction: 1.0, ..spec.at_lo_power(p) };
        let zeros = alloc::vec![0.0f64; frames_per_point];
        let synth = synthesize_frames(&zeros, &sub, crate::rng::child_seed(seed, i as u64))?;
        let mut darks = Vec::with_capacity(frames_per_point);
        for frame in &synth.frames {
            darks.push(extract_areas(frame, &sub)?.dark_area);
        }
        out.push((p, stats::variance(&darks)));
    }
    Ok(out)
}
