//! Run configuration: a flat key=value file, overridable by CLI flags,
//! with `FOCKTOMO_SEED` as the lowest-priority seed source.

use std::fmt;
use std::path::{Path, PathBuf};

use focktomo_core::acquisition::AcquisitionSpec;
use focktomo_core::budget::{EfficiencyBudget, FilterSpec};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: cannot parse `{text}` (expected key = value)")]
    Syntax { path: String, line: usize, text: String },
    #[error("{path}:{line}: unknown key `{key}`")]
    UnknownKey { path: String, line: usize, key: String },
    #[error("{path}:{line}: key `{key}`: {reason}")]
    BadValue { path: String, line: usize, key: String, reason: String },
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("no seed given: set `seed` in the config, pass --seed, or export FOCKTOMO_SEED")]
    MissingSeed,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The measured state: a Fock order or an explicit diagonal mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Diagonal(Vec<f64>),
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Fock(n) => write!(f, "fock:{n}"),
            StateSpec::Diagonal(d) => {
                write!(f, "diag:")?;
                for (i, p) in d.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub state: StateSpec,
    /// Target measured total detection efficiency.
    pub eta: f64,
    pub samples: usize,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub bin_width: f64,
    /// Highest reconstructed diagonal order.
    pub max_order: usize,
    pub mle_max_iters: usize,
    pub mle_tol: f64,
    pub acquisition: AcquisitionSpec,
    pub budget: EfficiencyBudget,
    pub filter: FilterSpec,
    pub sweep_powers_mw: Vec<f64>,
    pub sweep_frames_per_point: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            state: StateSpec::Fock(1),
            eta: 0.574,
            samples: 200_000,
            seed: None,
            out_dir: PathBuf::from("run"),
            bin_width: 0.05,
            max_order: 9,
            mle_max_iters: 500,
            mle_tol: 1e-6,
            acquisition: AcquisitionSpec::default(),
            budget: EfficiencyBudget {
                eta_hd: 0.90,
                eta_dc: 0.99,
                eta_exp: 0.70,
                p_s: 0.86,
                p_t: 0.98,
            },
            filter: FilterSpec {
                sigma_f: 50.0,
                sigma_p: 430.0,
                kappa_i: 0.40347329239296453,
                kappa_p: 1.0,
            },
            sweep_powers_mw: vec![1.0, 2.0, 3.0, 5.0, 7.0, 9.0],
            sweep_frames_per_point: 50_000,
        }
    }
}

/// CLI-level overrides; a set flag always wins over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub samples: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Load from an optional file, apply overrides, then the environment
    /// seed, then validate.
    pub fn resolve(
        file: Option<&Path>,
        overrides: &Overrides,
        env_seed: Option<u64>,
    ) -> Result<RunConfig, ConfigError> {
        let mut config = match file {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = overrides.seed {
            config.seed = Some(seed);
        }
        if let Some(eta) = overrides.eta {
            config.eta = eta;
        }
        if let Some(samples) = overrides.samples {
            config.samples = samples;
        }
        if let Some(out) = &overrides.out_dir {
            config.out_dir = out.clone();
        }
        if config.seed.is_none() {
            config.seed = env_seed;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut config = RunConfig::default();
        let pathstr = path.display().to_string();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.split('#').next().unwrap_or("").trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: pathstr.clone(),
                line,
                text: trimmed.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            config.apply(key, value).map_err(|reason| match reason {
                ApplyError::Unknown => {
                    ConfigError::UnknownKey { path: pathstr.clone(), line, key: key.to_string() }
                }
                ApplyError::Bad(reason) => ConfigError::BadValue {
                    path: pathstr.clone(),
                    line,
                    key: key.to_string(),
                    reason,
                },
            })?;
        }
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ApplyError> {
        fn num<T: std::str::FromStr>(value: &str) -> Result<T, ApplyError>
        where
            T::Err: fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ApplyError::Bad(e.to_string()))
        }
        match key {
            "state" => self.state = parse_state(value)?,
            "eta" => self.eta = num(value)?,
            "samples" => self.samples = num(value)?,
            "seed" => self.seed = Some(num(value)?),
            "out" => self.out_dir = PathBuf::from(value),
            "bin_width" => self.bin_width = num(value)?,
            "max_order" => self.max_order = num(value)?,
            "mle_max_iters" => self.mle_max_iters = num(value)?,
            "mle_tol" => self.mle_tol = num(value)?,
            "budget.eta_hd" => self.budget.eta_hd = num(value)?,
            "budget.eta_dc" => self.budget.eta_dc = num(value)?,
            "budget.eta_exp" => self.budget.eta_exp = num(value)?,
            "budget.p_s" => self.budget.p_s = num(value)?,
            "budget.p_t" => self.budget.p_t = num(value)?,
            "filter.sigma_f_ghz" => self.filter.sigma_f = num(value)?,
            "filter.sigma_p_ghz" => self.filter.sigma_p = num(value)?,
            "filter.kappa_i" => self.filter.kappa_i = num(value)?,
            "filter.kappa_p" => self.filter.kappa_p = num(value)?,
            "acq.samples_per_frame" => self.acquisition.samples_per_frame = num(value)?,
            "acq.sample_period_s" => self.acquisition.sample_period_s = num(value)?,
            "acq.adc_bits" => self.acquisition.adc_bits = num(value)?,
            "acq.rep_period_s" => self.acquisition.rep_period_s = num(value)?,
            "acq.pulse_fwhm_s" => self.acquisition.pulse_fwhm_s = num(value)?,
            "acq.signal_pulse_center" => self.acquisition.signal_pulse_center = num(value)?,
            "acq.dark_pulse_center" => self.acquisition.dark_pulse_center = num(value)?,
            "acq.lo_power_mw" => self.acquisition.lo_power_mw = num(value)?,
            "acq.sn_ratio_db" => self.acquisition.sn_ratio_db = num(value)?,
            "acq.area_gain" => self.acquisition.area_gain = num(value)?,
            "acq.dark_count_fraction" => self.acquisition.dark_count_fraction = num(value)?,
            "sweep.powers_mw" => {
                let powers: Result<Vec<f64>, _> =
                    value.split(',').map(|p| num::<f64>(p.trim())).collect();
                self.sweep_powers_mw = powers?;
            }
            "sweep.frames_per_point" => self.sweep_frames_per_point = num(value)?,
            _ => return Err(ApplyError::Unknown),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: String| ConfigError::Invalid { key: key.into(), reason };
        if self.seed.is_none() {
            return Err(ConfigError::MissingSeed);
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) || self.eta.is_nan() {
            return Err(invalid("eta", format!("{} outside [0, 1]", self.eta)));
        }
        if let StateSpec::Diagonal(d) = &self.state {
            if d.is_empty() || d.iter().any(|p| *p < 0.0 || p.is_nan()) {
                return Err(invalid("state", "diagonal entries must be nonnegative".into()));
            }
            let trace: f64 = d.iter().sum();
            if (trace - 1.0).abs() > 1e-9 {
                return Err(invalid("state", format!("diagonal trace {trace} is not 1")));
            }
            if d.len() > 11 {
                return Err(invalid("state", "at most 11 diagonal entries supported".into()));
            }
        }
        if let StateSpec::Fock(n) = self.state {
            if n > 10 {
                return Err(invalid("state", format!("fock order {n} above the cap of 10")));
            }
        }
        if !(self.bin_width > 0.0) {
            return Err(invalid("bin_width", format!("{} must be positive", self.bin_width)));
        }
        if self.max_order > 10 {
            return Err(invalid("max_order", format!("{} above the cap of 10", self.max_order)));
        }
        self.acquisition.validate().map_err(|e| invalid("acq", e.to_string()))?;
        self.budget.validate().map_err(|e| invalid("budget", e.to_string()))?;
        self.filter.validate().map_err(|e| invalid("filter", e.to_string()))?;
        if self.sweep_powers_mw.len() < 3 {
            return Err(invalid("sweep.powers_mw", "need at least 3 points".into()));
        }
        // The chain's ceiling: electronic noise and trigger dark counts act
        // as loss stages that the state-level loss cannot undo.
        let ceiling = self.chain_ceiling();
        if self.eta > ceiling + 1e-12 {
            return Err(invalid(
                "eta",
                format!(
                    "target {} exceeds the chain ceiling {ceiling:.6} set by acq.sn_ratio_db \
                     and acq.dark_count_fraction",
                    self.eta
                ),
            ));
        }
        Ok(())
    }

    /// Loss equivalent of the electronic noise under vacuum calibration.
    pub fn eta_electronic(&self) -> f64 {
        if self.acquisition.sn_ratio_db.is_infinite() {
            return 1.0;
        }
        let r = 10f64.powf(self.acquisition.sn_ratio_db / 10.0);
        (r - 1.0) / r
    }

    /// Loss equivalent of the trigger dark counts.
    pub fn eta_dark_counts(&self) -> f64 {
        1.0 - self.acquisition.dark_count_fraction
    }

    /// Largest target efficiency the chain can measure.
    pub fn chain_ceiling(&self) -> f64 {
        self.eta_electronic() * self.eta_dark_counts()
    }

    /// State-level loss that makes the measured chain efficiency equal the
    /// configured target.
    pub fn eta_state_loss(&self) -> f64 {
        (self.eta / self.chain_ceiling()).min(1.0)
    }
}

enum ApplyError {
    Unknown,
    Bad(String),
}

fn parse_state(value: &str) -> Result<StateSpec, ApplyError> {
    if let Some(n) = value.strip_prefix("fock:") {
        return Ok(StateSpec::Fock(
            n.trim().parse().map_err(|_| ApplyError::Bad(format!("bad fock order `{n}`")))?,
        ));
    }
    if let Some(d) = value.strip_prefix("diag:") {
        let parsed: Result<Vec<f64>, _> = d
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| ApplyError::Bad(format!("bad entry `{p}`"))))
            .collect();
        return Ok(StateSpec::Diagonal(parsed?));
    }
    Err(ApplyError::Bad(format!("`{value}` is neither fock:<n> nor diag:<p0,p1,...>")))
}
