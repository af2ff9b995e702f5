//! Outage probability, average BER over a modulation registry, and ergodic capacity.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::egg_channel::Detection;
use crate::error::{Error, Result};
use crate::mellin_barnes::{gamma_real, GammaFactor, QuadratureSpec};
use crate::relay_chain::{asymptotic_power_terms, e2e_cdf_with, survival_terms, RelayConfig, SurvivalForm};

/// Detection techniques a modulation scheme can be used with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidDetection {
    ImDd,
    Heterodyne,
    Both,
}

impl ValidDetection {
    pub fn allows(self, d: Detection) -> bool {
        matches!((self, d), (Self::Both, _) | (Self::ImDd, Detection::ImDd) | (Self::Heterodyne, Detection::Heterodyne))
    }
}

/// Conditional BER `δ/(2Γ(p)) Σ_k Γ(p, q_k γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationScheme {
    pub name: String,
    pub delta: f64,
    pub p: f64,
    pub n_terms: usize,
    pub q: Vec<f64>,
    pub valid_detection: ValidDetection,
}

impl ModulationScheme {
    pub fn ook() -> Self {
        Self::single("ook", 1.0, 0.25, ValidDetection::ImDd)
    }

    pub fn bpsk() -> Self {
        Self::single("bpsk", 1.0, 1.0, ValidDetection::Heterodyne)
    }

    fn single(name: &str, delta: f64, q: f64, valid_detection: ValidDetection) -> Self {
        Self { name: name.into(), delta, p: 0.5, n_terms: 1, q: vec![q], valid_detection }
    }

    /// Gray-coded M-PSK: `δ = 2/max(log₂M, 2)`, `q_k = sin²((2k−1)π/M)`.
    pub fn psk(m: u32) -> Result<Self> {
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("M-PSK needs M a power of two ≥ 4, got {m}")));
        }
        let bits = f64::from(m.trailing_zeros());
        let n = (m / 4).max(1) as usize;
        let q = (1..=n).map(|k| (((2 * k - 1) as f64) * PI / f64::from(m)).sin().powi(2)).collect();
        let name = if m == 4 { "qpsk".to_string() } else { format!("{m}-psk") };
        Ok(Self {
            name,
            delta: 2.0 / bits.max(2.0),
            p: 0.5,
            n_terms: n,
            q,
            valid_detection: ValidDetection::Heterodyne,
        })
    }

    /// Square Gray-coded M-QAM: `δ = 4(1 − 1/√M)/log₂M`, `q_k = 3(2k−1)²/(2(M−1))`.
    pub fn qam(m: u32) -> Result<Self> {
        let side = f64::from(m).sqrt().round() as u32;
        if m < 4 || side * side != m || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("M-QAM needs M an even power of two ≥ 4, got {m}")));
        }
        let bits = f64::from(m.trailing_zeros());
        let n = (side / 2) as usize;
        let q = (1..=n).map(|k| 3.0 * ((2 * k - 1) as f64).powi(2) / (2.0 * (f64::from(m) - 1.0))).collect();
        Ok(Self {
            name: format!("{m}-qam"),
            delta: 4.0 / bits * (1.0 - 1.0 / f64::from(side)),
            p: 0.5,
            n_terms: n,
            q,
            valid_detection: ValidDetection::Heterodyne,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(format!("modulation {:?}: {what}", self.name)));
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.p.is_finite() && self.p > 0.0) {
            return bad(format!("p must be positive, got {}", self.p));
        }
        if self.n_terms == 0 || self.q.len() != self.n_terms {
            return bad(format!("expected {} q values, got {}", self.n_terms, self.q.len()));
        }
        if let Some(q) = self.q.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
            return bad(format!("q values must be positive, got {q}"));
        }
        Ok(())
    }

    /// Limit of the conditional BER as `γ → 0⁺`, `δ n / 2`.
    pub fn ber_at_zero_snr(&self) -> f64 {
        0.5 * self.delta * self.n_terms as f64
    }

    /// Checks [`conditional_ber`] through the incomplete-gamma path against an independent
    /// closed form (`½ erfc` for `p = ½`, the finite Poisson sum for integer `p`) at
    /// `γ ∈ {1, 10, 100}`. Other `p` values can only be checked for range.
    pub fn verify(&self, rel_tol: f64) -> Result<()> {
        self.validate()?;
        for g in [1.0, 10.0, 100.0] {
            let got = ber_incomplete_gamma(self, g);
            let Some(want) = reference_ber(self, g) else {
                if !(got > 0.0 && got <= self.ber_at_zero_snr()) {
                    return Err(Error::InvalidParameter(format!("{}: BER {got} out of range at γ={g}", self.name)));
                }
                continue;
            };
            if ((got - want) / want).abs() > rel_tol {
                return Err(Error::InvalidParameter(format!(
                    "{}: incomplete-gamma BER {got} disagrees with reference {want} at γ={g}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn ber_incomplete_gamma(m: &ModulationScheme, gamma: f64) -> f64 {
    0.5 * m.delta * m.q.iter().map(|q| gamma_ur(m.p, q * gamma)).sum::<f64>()
}

/// Independent closed form of the conditional BER where one exists.
pub fn reference_ber(m: &ModulationScheme, gamma: f64) -> Option<f64> {
    let per_term = |x: f64| -> Option<f64> {
        if m.p == 0.5 {
            Some(erfc(x.sqrt()))
        } else if m.p.fract() == 0.0 && m.p <= 50.0 {
            // Γ(n, x)/Γ(n) = e^{−x} Σ_{k<n} x^k/k!
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..m.p as usize {
                term *= x / k as f64;
                sum += term;
            }
            Some((-x).exp() * sum)
        } else {
            None
        }
    };
    let total: Option<f64> = m.q.iter().map(|q| per_term(q * gamma)).sum();
    total.map(|t| 0.5 * m.delta * t)
}

/// `δ/(2Γ(p)) Σ_k Γ(p, q_k γ)`; uses `erfc` directly when `p = ½`.
pub fn conditional_ber(m: &ModulationScheme, gamma: f64) -> f64 {
    let gamma = gamma.max(0.0);
    if m.p == 0.5 {
        0.5 * m.delta * m.q.iter().map(|q| erfc((q * gamma).sqrt())).sum::<f64>()
    } else {
        ber_incomplete_gamma(m, gamma)
    }
}

/// Named modulation schemes, each verified against its reference BER when inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationRegistry {
    schemes: BTreeMap<String, ModulationScheme>,
}

/// Relative agreement required between the incomplete-gamma and reference BER paths.
pub const REGISTRY_TOLERANCE: f64 = 1e-10;

impl ModulationRegistry {
    pub fn empty() -> Self {
        Self { schemes: BTreeMap::new() }
    }

    /// OOK, BPSK, QPSK, 8/16-PSK and 16/64-QAM.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        let schemes = [
            Ok(ModulationScheme::ook()),
            Ok(ModulationScheme::bpsk()),
            ModulationScheme::psk(4),
            ModulationScheme::psk(8),
            ModulationScheme::psk(16),
            ModulationScheme::qam(16),
            ModulationScheme::qam(64),
        ];
        for s in schemes {
            reg.insert(s.expect("built-in parameters are valid")).expect("built-in schemes verify");
        }
        reg
    }

    pub fn insert(&mut self, scheme: ModulationScheme) -> Result<()> {
        scheme.verify(REGISTRY_TOLERANCE)?;
        self.schemes.insert(scheme.name.to_ascii_lowercase(), scheme);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&ModulationScheme> {
        self.schemes.get(&name.to_ascii_lowercase()).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown modulation {name:?}; available: {}",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModulationScheme> {
        self.schemes.values()
    }

    /// Adds schemes from a JSON array, a single JSON object, or NDJSON (one object per line).
    pub fn extend_from_str(&mut self, text: &str) -> Result<usize> {
        let parse_err = |e: serde_json::Error| Error::InvalidParameter(format!("modulation registry: {e}"));
        let trimmed = text.trim_start();
        let schemes: Vec<ModulationScheme> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(parse_err)?
        } else {
            serde_json::Deserializer::from_str(trimmed)
                .into_iter::<ModulationScheme>()
                .collect::<std::result::Result<_, _>>()
                .map_err(parse_err)?
        };
        let count = schemes.len();
        for s in schemes {
            self.insert(s)?;
        }
        Ok(count)
    }

    pub fn extend_from_file(&mut self, path: &std::path::Path) -> Result<usize> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("reading {}: {e}", path.display())))?;
        self.extend_from_str(&text)
    }
}

impl Default for ModulationRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Probabilities clamped to `[0, 1]` for display; the raw value stays available.
pub fn clamp_probability(raw: f64) -> f64 {
    raw.clamp(0.0, 1.0)
}

/// `P(γ ≤ γ_th)`.
pub fn outage_probability(rc: &RelayConfig, gamma_th: f64) -> Result<f64> {
    outage_probability_with(rc, gamma_th, &QuadratureSpec::default())
}

pub fn outage_probability_with(rc: &RelayConfig, gamma_th: f64, spec: &QuadratureSpec) -> Result<f64> {
    e2e_cdf_with(rc, gamma_th, spec)
}

fn check_scheme(rc: &RelayConfig, m: &ModulationScheme) -> Result<()> {
    rc.validate()?;
    m.validate()?;
    if !m.valid_detection.allows(rc.hop2.detection) {
        return Err(Error::InvalidParameter(format!(
            "modulation {} is not usable with {:?} detection",
            m.name, rc.hop2.detection
        )));
    }
    Ok(())
}

/// `E[conditional_ber(γ)] = δ Σ_k {½ − Σ J_k/(2Γ(p))}` with `J_k` the survival kernels
/// weighted by `Γ(p − s)` at argument `q_k · base₁`.
pub fn average_ber_exact(rc: &RelayConfig, m: &ModulationScheme) -> Result<f64> {
    average_ber_exact_with(rc, m, &QuadratureSpec::default())
}

pub fn average_ber_exact_with(rc: &RelayConfig, m: &ModulationScheme, spec: &QuadratureSpec) -> Result<f64> {
    check_scheme(rc, m)?;
    let gp = gamma_real(m.p)?;
    let mut total = 0.0;
    for &q in &m.q {
        let j = survival_terms(rc, q, &[GammaFactor::num(m.p, -1.0)], SurvivalForm::Survival)?
            .iter()
            .map(|t| t.evaluate(spec))
            .sum::<Result<f64>>()?;
        total += 0.5 - j / (2.0 * gp);
    }
    Ok(m.delta * total)
}

/// High-SNR BER from the CDF expansion: `δ/(2Γ(p)) Σ_k Σ coef Γ(p+α) (scale/q_k)^α`.
pub fn average_ber_asymptotic(rc: &RelayConfig, m: &ModulationScheme) -> Result<f64> {
    check_scheme(rc, m)?;
    let terms = asymptotic_power_terms(rc)?;
    let gp = gamma_real(m.p)?;
    let mut total = 0.0;
    for &q in &m.q {
        for t in &terms {
            total += t.coef * gamma_real(m.p + t.exponent)? * (t.scale / q).powf(t.exponent);
        }
    }
    Ok(m.delta / (2.0 * gp) * total)
}

/// `τ` of `ln(1 + τγ)`, following the destination hop's detection.
pub fn capacity_tau(rc: &RelayConfig) -> f64 {
    rc.hop2.detection.capacity_tau()
}

/// `E[ln(1 + τγ)]` in nats/s/Hz: exact for heterodyne, a lower bound for IM/DD.
pub fn ergodic_capacity(rc: &RelayConfig) -> Result<f64> {
    ergodic_capacity_with(rc, &QuadratureSpec::default())
}

pub fn ergodic_capacity_with(rc: &RelayConfig, spec: &QuadratureSpec) -> Result<f64> {
    rc.validate()?;
    let extra = [GammaFactor::num(0.0, 1.0), GammaFactor::num(1.0, -1.0)];
    survival_terms(rc, capacity_tau(rc), &extra, SurvivalForm::Survival)?.iter().map(|t| t.evaluate(spec)).sum()
}
