//! Run configuration: a TOML document plus command-line overrides.
//!
//! ```toml
//! metric = "ber"            # outage | ber | capacity | moments
//! modulation = "ook"
//! gamma_th_db = 0.0
//! format = "csv"            # csv | json
//! gain_constant = 15.0      # optional; derived from hop 1 when absent
//! mu2_offset_db = 0.0       # hop-2 SNR relative to the sweep axis
//! modulations_file = "extra.ndjson"
//!
//! [hop1]
//! fixture = "egg_a"         # or omega/lambda/a/b/c
//! detection = "im_dd"       # heterodyne | im_dd
//! mu_db = 20.0              # or avg_snr_db
//!
//! [hop2]
//! omega = 0.45
//! lambda = 0.3
//! a = 1.2
//! b = 0.5
//! c = 0.9
//! detection = "im_dd"
//!
//! [sweep]
//! start_db = 0.0
//! stop_db = 50.0
//! step_db = 5.0
//!
//! [monte_carlo]
//! samples = 1000000         # 0 disables simulation
//! seed = 1
//!
//! [quadrature]
//! step = 0.05
//! half_width = 40.0
//! ```

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::egg_channel::{db_to_linear, Detection, EggParams, HopConfig};
use crate::fixtures;
use crate::mellin_barnes::QuadratureSpec;
use crate::metrics::{ModulationRegistry, ModulationScheme};
use crate::relay_chain::RelayConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Ber,
    Capacity,
    Moments,
}

impl Metric {
    /// `true` when the metric should fall as SNR grows.
    pub fn decreasing(self) -> bool {
        matches!(self, Self::Outage | Self::Ber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DetectionName {
    Heterodyne,
    #[serde(alias = "imdd", alias = "im/dd")]
    #[value(alias = "imdd")]
    ImDd,
}

impl From<DetectionName> for Detection {
    fn from(d: DetectionName) -> Self {
        match d {
            DetectionName::Heterodyne => Detection::Heterodyne,
            DetectionName::ImDd => Detection::ImDd,
        }
    }
}

/// How a hop's dB value maps to the channel: directly as `μ_r`, or as the average SNR `γ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SnrKind {
    #[default]
    Mu,
    Average,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub detection: DetectionName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_snr_db: Option<f64>,
}

impl HopSpec {
    pub fn fixture(name: &str, detection: DetectionName, mu_db: f64) -> Self {
        Self {
            fixture: Some(name.to_string()),
            omega: None,
            lambda: None,
            a: None,
            b: None,
            c: None,
            detection,
            mu_db: Some(mu_db),
            avg_snr_db: None,
        }
    }

    fn explicit(&self) -> [Option<f64>; 5] {
        [self.omega, self.lambda, self.a, self.b, self.c]
    }

    pub fn params(&self, label: &str) -> Result<EggParams, CliError> {
        let explicit = self.explicit();
        match (&self.fixture, explicit.iter().all(Option::is_some), explicit.iter().any(Option::is_some)) {
            (Some(name), _, false) => Ok(fixtures::params(name)?),
            (None, true, _) => {
                let [omega, lambda, a, b, c] = explicit.map(Option::unwrap);
                Ok(EggParams::new(omega, lambda, a, b, c)?)
            }
            (Some(_), _, true) => {
                Err(CliError::Config(format!("[{label}] sets both `fixture` and explicit parameters; keep one")))
            }
            (None, _, _) => {
                Err(CliError::Config(format!("[{label}] needs `fixture = \"...\"` or all of omega, lambda, a, b, c")))
            }
        }
    }

    pub fn snr_kind(&self) -> SnrKind {
        if self.avg_snr_db.is_some() {
            SnrKind::Average
        } else {
            SnrKind::Mu
        }
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.mu_db.or(self.avg_snr_db)
    }

    /// The hop with its SNR set to `db` (interpreted per [`SnrKind`]).
    pub fn build(&self, label: &str, db: f64) -> Result<HopConfig, CliError> {
        let egg = self.params(label)?;
        let detection = self.detection.into();
        let linear = db_to_linear(db);
        Ok(match self.snr_kind() {
            SnrKind::Mu => HopConfig::new(egg, detection, linear)?,
            SnrKind::Average => HopConfig::from_average_snr(egg, detection, linear)?,
        })
    }

    fn validate(&self, label: &str) -> Result<(), CliError> {
        self.params(label)?;
        if self.mu_db.is_some() && self.avg_snr_db.is_some() {
            return Err(CliError::Config(format!("[{label}] sets both mu_db and avg_snr_db; keep one")));
        }
        match self.snr_db() {
            Some(db) if !db.is_finite() => Err(CliError::Config(format!("[{label}] SNR must be finite, got {db}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self { start_db: 0.0, stop_db: 50.0, step_db: 5.0 }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<(), CliError> {
        let Self { start_db, stop_db, step_db } = *self;
        if ![start_db, stop_db, step_db].iter().all(|v| v.is_finite()) {
            return Err(CliError::Config("sweep grid values must be finite".into()));
        }
        if step_db <= 0.0 {
            return Err(CliError::Config(format!("sweep step must be > 0 dB, got {step_db}")));
        }
        if stop_db < start_db {
            return Err(CliError::Config(format!("sweep grid is empty: stop {stop_db} dB < start {start_db} dB")));
        }
        Ok(())
    }

    /// Grid points; the stop value is included when it lies on the grid.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start_db + k as f64 * self.step_db).collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    /// Parses `start:stop:step` in dB.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad grid value {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [start_db, stop_db, step_db] => Ok(Self { start_db, stop_db, step_db }),
            _ => Err(format!("grid must be start:stop:step, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSettings {
    #[serde(default)]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    1
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self { samples: 0, seed: default_seed() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

impl QuadratureOverrides {
    pub fn spec(&self) -> QuadratureSpec {
        let mut spec = QuadratureSpec::default();
        if let Some(step) = self.step {
            spec.step = step;
        }
        if let Some(hw) = self.half_width {
            spec.half_width = hw;
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub hop1: HopSpec,
    pub hop2: HopSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_constant: Option<f64>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<String>,
    #[serde(default)]
    pub gamma_th_db: f64,
    #[serde(default)]
    pub mu2_offset_db: f64,
    #[serde(default)]
    pub sweep: Grid,
    #[serde(default)]
    pub monte_carlo: MonteCarloSettings,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulations_file: Option<PathBuf>,
}

fn default_metric() -> Metric {
    Metric::Outage
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hop1: HopSpec::fixture("egg_a", DetectionName::ImDd, 20.0),
            hop2: HopSpec::fixture("egg_b", DetectionName::ImDd, 20.0),
            gain_constant: None,
            metric: default_metric(),
            modulation: None,
            gamma_th_db: 0.0,
            mu2_offset_db: 0.0,
            sweep: Grid::default(),
            monte_carlo: MonteCarloSettings::default(),
            format: OutputFormat::Csv,
            quadrature: QuadratureOverrides::default(),
            modulations_file: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(file) = &cfg.modulations_file {
            if file.is_relative() {
                cfg.modulations_file = path.parent().map(|dir| dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.hop1.validate("hop1")?;
        self.hop2.validate("hop2")?;
        self.sweep.validate()?;
        if let Some(c) = self.gain_constant {
            if !(c.is_finite() && c > 0.0) {
                return Err(CliError::Config(format!("gain_constant must be positive, got {c}")));
            }
        }
        if !self.gamma_th_db.is_finite() || !self.mu2_offset_db.is_finite() {
            return Err(CliError::Config("gamma_th_db and mu2_offset_db must be finite".into()));
        }
        if self.monte_carlo.samples != 0 && self.monte_carlo.samples < crate::monte_carlo::MIN_SAMPLES {
            return Err(CliError::Config(format!(
                "monte_carlo.samples must be 0 (off) or at least {}",
                crate::monte_carlo::MIN_SAMPLES
            )));
        }
        self.quadrature.spec().validate()?;
        if self.metric == Metric::Ber {
            self.modulation_scheme()?;
        }
        Ok(())
    }

    pub fn registry(&self) -> Result<ModulationRegistry, CliError> {
        let mut reg = ModulationRegistry::builtin();
        if let Some(path) = &self.modulations_file {
            reg.extend_from_file(path)?;
        }
        Ok(reg)
    }

    /// The configured scheme, or the natural one for the destination hop's detection.
    pub fn modulation_scheme(&self) -> Result<ModulationScheme, CliError> {
        let name = match &self.modulation {
            Some(name) => name.clone(),
            None => match Detection::from(self.hop2.detection) {
                Detection::Heterodyne => "bpsk".into(),
                Detection::ImDd => "ook".into(),
            },
        };
        let reg = self.registry()?;
        reg.get(&name).cloned().map_err(|_| {
            CliError::Config(format!(
                "unknown modulation {name:?}; available: {}",
                reg.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }

    /// Per-hop SNRs (dB) of a single-point evaluation.
    pub fn point_db(&self) -> (f64, f64) {
        let mu1 = self.hop1.snr_db().unwrap_or(20.0);
        let mu2 = self.hop2.snr_db().unwrap_or(mu1 + self.mu2_offset_db);
        (mu1, mu2)
    }

    /// The relay with hop SNRs `(db1, db2)`; `C` follows the override or hop 1.
    pub fn relay_at(&self, db1: f64, db2: f64) -> Result<RelayConfig, CliError> {
        let hop1 = self.hop1.build("hop1", db1)?;
        let hop2 = self.hop2.build("hop2", db2)?;
        Ok(match self.gain_constant {
            Some(c) => RelayConfig::with_gain_constant(hop1, hop2, c)?,
            None => RelayConfig::new(hop1, hop2)?,
        })
    }
}
