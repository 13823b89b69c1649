//! Monte Carlo quadrature sampling and synthesis of digitizer frames.
//!
//! Each frame holds two LO pulses: the signal pulse carries a quadrature
//! drawn from the state's phase-averaged marginal, the dark pulse an
//! independent vacuum draw usable as the shot-noise reference. White
//! Gaussian electronic noise is added per sample and the trace is offset to
//! mid-scale and quantized to the configured bit depth.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid;
use crate::rng::{substream, NormalSource, Substream};
use crate::state::{phase_averaged_pdf, DensityMatrix};

/// Digitizer and pulse geometry of the acquisition chain.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionSpec {
    pub samples_per_frame: u32,
    pub sample_period_s: f64,
    pub adc_bits: u32,
    pub rep_period_s: f64,
    pub pulse_fwhm_s: f64,
    pub signal_pulse_center: u32,
    pub dark_pulse_center: u32,
    pub lo_power_mw: f64,
    /// Ratio of dark-pulse area variance to electronic-noise area variance,
    /// in dB, as measured by the extraction procedure. `INFINITY` disables
    /// electronic noise.
    pub sn_ratio_db: f64,
    /// Digitizer area units per unit quadrature.
    pub area_gain: f64,
    /// Fraction of frames whose signal pulse is replaced by a vacuum draw
    /// (trigger dark counts).
    pub dark_count_fraction: f64,
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        AcquisitionSpec {
            samples_per_frame: 250,
            sample_period_s: 1e-10,
            adc_bits: 8,
            rep_period_s: 1.0 / 82.0e6,
            pulse_fwhm_s: 2e-9,
            signal_pulse_center: 60,
            dark_pulse_center: 182,
            lo_power_mw: 7.0,
            sn_ratio_db: 12.0,
            area_gain: 500.0,
            dark_count_fraction: 0.01,
        }
    }
}

impl AcquisitionSpec {
    /// Pulse FWHM in samples.
    pub fn fwhm_samples(&self) -> f64 {
        self.pulse_fwhm_s / self.sample_period_s
    }

    /// Half-width of the pulse integration window, in samples
    /// (3 FWHM each side of the center).
    pub fn window_halfwidth(&self) -> u32 {
        libm::round(3.0 * self.fwhm_samples()) as u32
    }

    /// Number of samples in one integration window.
    pub fn window_len(&self) -> u32 {
        2 * self.window_halfwidth() + 1
    }

    /// Number of samples outside both windows (the baseline region).
    pub fn baseline_len(&self) -> u32 {
        self.samples_per_frame.saturating_sub(2 * self.window_len())
    }

    /// Mid-scale offset of the trace.
    pub fn mid_scale(&self) -> f64 {
        (1u32 << (self.adc_bits - 1)) as f64
    }

    pub fn max_code(&self) -> u16 {
        if self.adc_bits >= 16 {
            u16::MAX
        } else {
            ((1u32 << self.adc_bits) - 1) as u16
        }
    }

    /// Per-sample standard deviation of the electronic noise.
    ///
    /// Chosen so that the area variance produced by the extraction
    /// procedure on noise-only frames (direct window noise plus the shared
    /// baseline-estimate term) sits `sn_ratio_db` below the dark-pulse area
    /// variance: sigma_e^2 = shot / ((R - 1) W (1 + W / N_b)).
    pub fn electronic_noise_sigma(&self) -> f64 {
        if self.sn_ratio_db.is_infinite() {
            return 0.0;
        }
        let shot = self.area_gain * self.area_gain * crate::state::VACUUM_VARIANCE;
        let ratio = libm::pow(10.0, self.sn_ratio_db / 10.0);
        let w = self.window_len() as f64;
        let nb = self.baseline_len() as f64;
        libm::sqrt(shot / ((ratio - 1.0) * w * (1.0 + w / nb)))
    }

    /// Spec for a vacuum-only acquisition at a different LO power.
    ///
    /// The pulse-area gain scales with the LO field amplitude, i.e. with
    /// sqrt(power); the electronic noise floor stays fixed, so the S/N
    /// entry is remapped to keep `electronic_noise_sigma` invariant.
    pub fn at_lo_power(&self, power_mw: f64) -> AcquisitionSpec {
        let p = power_mw / self.lo_power_mw;
        let sn = if self.sn_ratio_db.is_infinite() {
            f64::INFINITY
        } else {
            let r = libm::pow(10.0, self.sn_ratio_db / 10.0);
            10.0 * libm::log10(1.0 + p * (r - 1.0))
        };
        AcquisitionSpec {
            lo_power_mw: power_mw,
            area_gain: self.area_gain * libm::sqrt(p),
            sn_ratio_db: sn,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        use alloc::format;
        if self.samples_per_frame == 0 {
            return Err(Error::Spec(format!("samples_per_frame must be positive")));
        }
        if !(1..=16).contains(&self.adc_bits) {
            return Err(Error::Spec(format!("adc_bits {} outside 1..=16", self.adc_bits)));
        }
        for (name, v) in [
            ("sample_period_s", self.sample_period_s),
            ("rep_period_s", self.rep_period_s),
            ("pulse_fwhm_s", self.pulse_fwhm_s),
            ("lo_power_mw", self.lo_power_mw),
            ("area_gain", self.area_gain),
        ] {
            if !(v > 0.0) {
                return Err(Error::Spec(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.sn_ratio_db > 0.0) {
            return Err(Error::Spec(format!(
                "sn_ratio_db must be positive (or +inf to disable noise), got {}",
                self.sn_ratio_db
            )));
        }
        if !(0.0..=1.0).contains(&self.dark_count_fraction) {
            return Err(Error::Spec(format!(
                "dark_count_fraction {} outside [0, 1]",
                self.dark_count_fraction
            )));
        }
        let hw = self.window_halfwidth();
        for (name, c) in
            [("signal", self.signal_pulse_center), ("dark", self.dark_pulse_center)]
        {
            if c < hw || c + hw >= self.samples_per_frame {
                return Err(Error::Spec(format!(
                    "{name} pulse window [{c} +- {hw}] exceeds the {}-sample frame",
                    self.samples_per_frame
                )));
            }
        }
        if self.signal_pulse_center + hw >= self.dark_pulse_center.saturating_sub(hw) {
            return Err(Error::Spec(format!("pulse integration windows overlap")));
        }
        let spacing = libm::round(self.rep_period_s / self.sample_period_s) as u32;
        let actual = self.dark_pulse_center - self.signal_pulse_center;
        if actual != spacing {
            return Err(Error::Spec(format!(
                "pulse spacing {actual} samples does not match one repetition period \
                 ({spacing} samples)"
            )));
        }
        if self.baseline_len() == 0 {
            return Err(Error::Spec(format!("no samples left outside the pulse windows")));
        }
        Ok(())
    }
}

/// One digitized frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRecord {
    pub index: u32,
    pub samples: Vec<u16>,
}

/// Frames plus bookkeeping from one synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub frames: Vec<FrameRecord>,
    pub clipped_samples: u64,
    pub total_samples: u64,
    /// Frames whose signal pulse was replaced by a trigger dark count.
    pub substituted_frames: u64,
}

impl SynthesisOutput {
    pub fn clipped_fraction(&self) -> f64 {
        if self.total_samples == 0 {
            0.0
        } else {
            self.clipped_samples as f64 / self.total_samples as f64
        }
    }
}

/// Draw `n` i.i.d. samples from the phase-averaged marginal of `state`.
///
/// Inverse-CDF lookup on a cumulative tabulated over [-6, 6] in steps of
/// 1e-3, linearly interpolated; bit-identical for a fixed seed.
pub fn sample_quadratures(state: &DensityMatrix, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut pdf = Vec::with_capacity(grid::GRID_LEN);
    for i in 0..grid::GRID_LEN {
        pdf.push(phase_averaged_pdf(state, grid::grid_x(i))?);
    }
    let mut cdf = Vec::with_capacity(grid::GRID_LEN);
    let mut acc = 0.0;
    cdf.push(0.0);
    for i in 1..grid::GRID_LEN {
        acc += 0.5 * (pdf[i - 1] + pdf[i]) * grid::GRID_STEP;
        cdf.push(acc);
    }
    let total = *cdf.last().expect("non-empty");
    if !(total > 0.0) {
        return Err(Error::Domain { what: "total probability mass", value: total });
    }
    for c in cdf.iter_mut() {
        *c /= total;
    }

    let mut rng = substream(seed, Substream::Sampling);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.gen();
        let i = cdf.partition_point(|&c| c <= u).min(grid::GRID_LEN - 1);
        // u lies in [cdf[i-1], cdf[i])
        let lo = cdf[i - 1];
        let hi = cdf[i];
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.0 };
        out.push(grid::grid_x(i - 1) + frac * grid::GRID_STEP);
    }
    Ok(out)
}

/// Gaussian pulse shape normalized to unit area over the integration window.
struct PulseShape {
    /// Window half-width in samples.
    halfwidth: i64,
    /// shape[j + halfwidth] for offsets j in [-halfwidth, halfwidth].
    weights: Vec<f64>,
}

impl PulseShape {
    fn new(spec: &AcquisitionSpec) -> Self {
        let hw = spec.window_halfwidth() as i64;
        let sigma = spec.fwhm_samples() / (2.0 * libm::sqrt(2.0 * libm::log(2.0)));
        let mut weights: Vec<f64> =
            (-hw..=hw).map(|j| libm::exp(-(j * j) as f64 / (2.0 * sigma * sigma))).collect();
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        PulseShape { halfwidth: hw, weights }
    }
}

/// Render one frame with the given pulse areas (digitizer area units).
///
/// Exposed so edge cases (zero areas, zero noise) can be exercised without
/// a random stream; `synthesize_frames` goes through here for every frame.
pub fn render_frame(
    index: u32,
    signal_area: f64,
    dark_area: f64,
    spec: &AcquisitionSpec,
    noise: Option<(&mut rand_chacha::ChaCha12Rng, &mut NormalSource)>,
) -> (FrameRecord, u64) {
    let shape = PulseShape::new(spec);
    render_frame_with(index, signal_area, dark_area, spec, &shape, noise)
}

fn render_frame_with(
    index: u32,
    signal_area: f64,
    dark_area: f64,
    spec: &AcquisitionSpec,
    shape: &PulseShape,
    noise: Option<(&mut rand_chacha::ChaCha12Rng, &mut NormalSource)>,
) -> (FrameRecord, u64) {
    let n = spec.samples_per_frame as usize;
    let mid = spec.mid_scale();
    let mut trace: Vec<f64> = alloc::vec![mid; n];
    for (center, area) in [
        (spec.signal_pulse_center as i64, signal_area),
        (spec.dark_pulse_center as i64, dark_area),
    ] {
        for (k, w) in shape.weights.iter().enumerate() {
            let j = center - shape.halfwidth + k as i64;
            if (0..n as i64).contains(&j) {
                trace[j as usize] += area * w;
            }
        }
    }
    if let Some((rng, normal)) = noise {
        let sigma = spec.electronic_noise_sigma();
        if sigma > 0.0 {
            for t in trace.iter_mut() {
                *t += sigma * normal.sample(rng);
            }
        }
    }
    let max = spec.max_code();
    let mut clipped = 0u64;
    let samples = trace
        .iter()
        .map(|&t| {
            let q = libm::round(t);
            if q < 0.0 {
                clipped += 1;
                0
            } else if q > max as f64 {
                clipped += 1;
                max
            } else {
                q as u16
            }
        })
        .collect();
    (FrameRecord { index, samples }, clipped)
}

/// Synthesize one frame per quadrature value.
///
/// Signal-pulse area is `area_gain * x_i` (or a fresh vacuum draw for the
/// dark-count fraction of frames); dark-pulse area is `area_gain * v_i`
/// with v_i an independent vacuum draw of variance 1/4.
pub fn synthesize_frames(
    xs: &[f64],
    spec: &AcquisitionSpec,
    seed: u64,
) -> Result<SynthesisOutput> {
    spec.validate()?;
    let shape = PulseShape::new(spec);
    let mut vacuum_rng = substream(seed, Substream::Vacuum);
    let mut vacuum_normal = NormalSource::new();
    let mut noise_rng = substream(seed, Substream::Noise);
    let mut noise_normal = NormalSource::new();
    let mut dark_rng = substream(seed, Substream::DarkCounts);
    let mut dark_normal = NormalSource::new();
    let vac_sigma = libm::sqrt(crate::state::VACUUM_VARIANCE);

    let mut frames = Vec::with_capacity(xs.len());
    let mut clipped = 0u64;
    let mut substituted = 0u64;
    for (i, &x) in xs.iter().enumerate() {
        let x_eff = if spec.dark_count_fraction > 0.0
            && dark_rng.gen::<f64>() < spec.dark_count_fraction
        {
            substituted += 1;
            vac_sigma * dark_normal.sample(&mut dark_rng)
        } else {
            x
        };
        let v = vac_sigma * vacuum_normal.sample(&mut vacuum_rng);
        let (frame, c) = render_frame_with(
            i as u32,
            spec.area_gain * x_eff,
            spec.area_gain * v,
            spec,
            &shape,
            Some((&mut noise_rng, &mut noise_normal)),
        );
        clipped += c;
        frames.push(frame);
    }
    Ok(SynthesisOutput {
        frames,
        clipped_samples: clipped,
        total_samples: xs.len() as u64 * spec.samples_per_frame as u64,
        substituted_frames: substituted,
    })
}
