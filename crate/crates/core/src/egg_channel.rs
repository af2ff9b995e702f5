//! Mixture Exponential-Generalized-Gamma fading for a single hop.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mellin_barnes::{fox_h_univariate_batch, gamma_real, meijer_g, MeijerG, QuadratureSpec};

/// The five-parameter irradiance law `(ω, λ, a, b, c)`.
///
/// `ω = 1` and `ω = 0` are accepted as the pure Exponential and pure
/// Generalized-Gamma special cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EggParams {
    pub omega: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EggParams {
    pub fn new(omega: f64, lambda: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { omega, lambda, a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::InvalidParameter(format!("omega must lie in [0, 1], got {}", self.omega)));
        }
        for (name, v) in [("lambda", self.lambda), ("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn exp_weight(&self) -> f64 {
        self.omega
    }

    pub fn gg_weight(&self) -> f64 {
        1.0 - self.omega
    }

    /// `E[I^k]` for real `k > −ac` (and `k > −1` when the Exponential lobe is present).
    pub fn moment(&self, k: f64) -> Result<f64> {
        let mut total = 0.0;
        if self.exp_weight() > 0.0 {
            if k <= -1.0 {
                return Err(Error::Domain(format!("Exponential lobe has no moment of order {k}")));
            }
            total += self.omega * self.lambda.powf(k) * gamma_real(1.0 + k)?;
        }
        if self.gg_weight() > 0.0 {
            let shape = self.a + k / self.c;
            if shape <= 0.0 {
                return Err(Error::Domain(format!("Generalized-Gamma lobe has no moment of order {k}")));
            }
            total += self.gg_weight() * self.b.powf(k) * gamma_real(shape)? / gamma_real(self.a)?;
        }
        Ok(total)
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0).expect("first moment always exists")
    }

    /// `Var[I] / E[I]²`, which differs from [`scintillation_index`] unless `E[I] = 1`.
    pub fn normalized_variance(&self) -> f64 {
        let m1 = self.mean();
        let m2 = self.moment(2.0).expect("second moment always exists");
        m2 / (m1 * m1) - 1.0
    }
}

/// Detection technique of a hop: heterodyne (`r = 1`) or IM/DD (`r = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Detection {
    Heterodyne,
    ImDd,
}

impl Detection {
    pub fn order(self) -> u8 {
        match self {
            Self::Heterodyne => 1,
            Self::ImDd => 2,
        }
    }

    pub fn r(self) -> f64 {
        f64::from(self.order())
    }

    /// Capacity scaling `τ` of `ln(1 + τγ)`.
    pub fn capacity_tau(self) -> f64 {
        match self {
            Self::Heterodyne => 1.0,
            Self::ImDd => std::f64::consts::E / (2.0 * std::f64::consts::PI),
        }
    }
}

impl TryFrom<u8> for Detection {
    type Error = String;

    fn try_from(r: u8) -> std::result::Result<Self, Self::Error> {
        match r {
            1 => Ok(Self::Heterodyne),
            2 => Ok(Self::ImDd),
            other => Err(format!("detection order must be 1 or 2, got {other}")),
        }
    }
}

impl From<Detection> for u8 {
    fn from(d: Detection) -> u8 {
        d.order()
    }
}

/// One optical hop: fading law, detection type and average electrical SNR `μ_r` (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopConfig {
    pub egg: EggParams,
    pub detection: Detection,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_snr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversion_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_power: Option<f64>,
}

impl HopConfig {
    pub fn new(egg: EggParams, detection: Detection, mu: f64) -> Result<Self> {
        let h = Self { egg, detection, mu, avg_snr: None, conversion_ratio: None, noise_power: None };
        h.validate()?;
        Ok(h)
    }

    /// Builds the hop from the average SNR `γ̄`: `μ₁ = γ̄` for heterodyne,
    /// `μ₂ = γ̄ / E[I²]` for IM/DD.
    pub fn from_average_snr(egg: EggParams, detection: Detection, avg_snr: f64) -> Result<Self> {
        egg.validate()?;
        let mu = match detection {
            Detection::Heterodyne => avg_snr,
            Detection::ImDd => avg_snr / egg.moment(2.0)?,
        };
        let mut h = Self::new(egg, detection, mu)?;
        h.avg_snr = Some(avg_snr);
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        self.egg.validate()?;
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive and finite, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.detection.r()
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self.avg_snr = None;
        self
    }

    /// `E[γ^k] = μ^k E[I^{rk}]`.
    pub fn snr_moment(&self, k: f64) -> Result<f64> {
        Ok(self.mu.powf(k) * self.egg.moment(self.r() * k)?)
    }

    /// Meijer-G arguments `((γ/μ)^{1/r}/λ, ((γ/μ)^{1/r}/b)^c)` of the two lobes.
    fn lobe_arguments(&self, gamma: f64) -> (f64, f64) {
        let i = (gamma / self.mu).powf(1.0 / self.r());
        (i / self.egg.lambda, (i / self.egg.b).powf(self.egg.c))
    }
}

/// `10 log₁₀` conversions for user-facing SNRs.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Irradiance density `ω e^{−I/λ}/λ + (1−ω) c I^{ac−1} e^{−(I/b)^c} / (b^{ac} Γ(a))`.
pub fn irradiance_pdf(p: &EggParams, irradiance: f64) -> Result<f64> {
    p.validate()?;
    if !(irradiance > 0.0 && irradiance.is_finite()) {
        return Err(Error::Domain(format!("irradiance must be positive, got {irradiance}")));
    }
    let mut density = 0.0;
    if p.exp_weight() > 0.0 {
        density += p.omega / p.lambda * (-irradiance / p.lambda).exp();
    }
    if p.gg_weight() > 0.0 {
        let log_gg = p.c.ln() + (p.a * p.c - 1.0) * irradiance.ln()
            - (irradiance / p.b).powf(p.c)
            - p.a * p.c * p.b.ln()
            - statrs::function::gamma::ln_gamma(p.a);
        density += p.gg_weight() * log_gg.exp();
    }
    Ok(density)
}

/// `2ωλ² + (1−ω) b² Γ(a+2/c)/Γ(a) − 1`, the scintillation index for unit-mean irradiance.
pub fn scintillation_index(p: &EggParams) -> f64 {
    p.moment(2.0).expect("second moment always exists") - 1.0
}

fn check_snr(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("SNR must be positive and finite, got {gamma}")))
    }
}

fn meijer(m: usize, n: usize, a: &[f64], b: &[f64]) -> MeijerG {
    MeijerG { m, n, a: a.to_vec(), b: b.to_vec() }
}

/// Instantaneous-SNR density of one hop.
pub fn snr_pdf(h: &HopConfig, gamma: f64) -> Result<f64> {
    snr_pdf_with(h, gamma, &QuadratureSpec::default())
}

pub fn snr_pdf_with(h: &HopConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    h.validate()?;
    check_snr(gamma)?;
    let (x1, x2) = h.lobe_arguments(gamma);
    let mut density = 0.0;
    if h.egg.exp_weight() > 0.0 {
        density += h.egg.omega * meijer_g(&meijer(1, 0, &[], &[1.0]), x1, spec)?;
    }
    if h.egg.gg_weight() > 0.0 {
        density +=
            h.egg.gg_weight() * h.egg.c / gamma_real(h.egg.a)? * meijer_g(&meijer(1, 0, &[], &[h.egg.a]), x2, spec)?;
    }
    Ok(density / (h.r() * gamma))
}

/// Instantaneous-SNR CDF of one hop.
pub fn snr_cdf(h: &HopConfig, gamma: f64) -> Result<f64> {
    snr_cdf_with(h, gamma, &QuadratureSpec::default())
}

pub fn snr_cdf_with(h: &HopConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    h.validate()?;
    check_snr(gamma)?;
    let (x1, x2) = h.lobe_arguments(gamma);
    let mut cdf = 0.0;
    if h.egg.exp_weight() > 0.0 {
        cdf += h.egg.omega * meijer_g(&meijer(1, 1, &[1.0], &[1.0, 0.0]), x1, spec)?;
    }
    if h.egg.gg_weight() > 0.0 {
        cdf += h.egg.gg_weight() / gamma_real(h.egg.a)? * meijer_g(&meijer(1, 1, &[1.0], &[h.egg.a, 0.0]), x2, spec)?;
    }
    Ok(cdf)
}

/// CDF at many SNRs, sharing the contour tables between points.
pub fn snr_cdf_many(h: &HopConfig, gammas: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    h.validate()?;
    for &g in gammas {
        check_snr(g)?;
    }
    let (x1s, x2s): (Vec<f64>, Vec<f64>) = gammas.iter().map(|&g| h.lobe_arguments(g)).unzip();
    let mut out = vec![0.0; gammas.len()];
    if h.egg.exp_weight() > 0.0 {
        let k = meijer(1, 1, &[1.0], &[1.0, 0.0]).to_fox()?.factors()?;
        for (o, v) in out.iter_mut().zip(fox_h_univariate_batch(&k, &x1s, spec)?) {
            *o += h.egg.omega * v;
        }
    }
    if h.egg.gg_weight() > 0.0 {
        let k = meijer(1, 1, &[1.0], &[h.egg.a, 0.0]).to_fox()?.factors()?;
        let w = h.egg.gg_weight() / gamma_real(h.egg.a)?;
        for (o, v) in out.iter_mut().zip(fox_h_univariate_batch(&k, &x2s, spec)?) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// Instantaneous-SNR survival function of one hop.
pub fn snr_ccdf(h: &HopConfig, gamma: f64) -> Result<f64> {
    snr_ccdf_with(h, gamma, &QuadratureSpec::default())
}

pub fn snr_ccdf_with(h: &HopConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    h.validate()?;
    check_snr(gamma)?;
    let (x1, x2) = h.lobe_arguments(gamma);
    let mut survival = 0.0;
    if h.egg.exp_weight() > 0.0 {
        survival += h.egg.omega * (-x1).exp();
    }
    if h.egg.gg_weight() > 0.0 {
        survival +=
            h.egg.gg_weight() / gamma_real(h.egg.a)? * meijer_g(&meijer(2, 0, &[1.0], &[h.egg.a, 0.0]), x2, spec)?;
    }
    Ok(survival)
}

/// Pre-built irradiance sampler: Exponential with probability `ω`, otherwise
/// `b·G^{1/c}` with `G ~ Gamma(a, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct IrradianceSampler {
    params: EggParams,
    gamma: Option<Gamma<f64>>,
}

impl IrradianceSampler {
    pub fn new(params: &EggParams) -> Result<Self> {
        params.validate()?;
        let gamma = if params.gg_weight() > 0.0 {
            Some(Gamma::new(params.a, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { params: *params, gamma })
    }
}

impl Distribution<f64> for IrradianceSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let p = &self.params;
        let use_exp = match self.gamma {
            None => true,
            Some(_) if p.omega <= 0.0 => false,
            Some(_) => rng.random::<f64>() < p.omega,
        };
        if use_exp {
            let e: f64 = Exp1.sample(rng);
            e * p.lambda
        } else {
            let g = self.gamma.expect("GG lobe present").sample(rng);
            p.b * g.powf(1.0 / p.c)
        }
    }
}

/// Instantaneous SNR sampler `γ = μ I^r`.
#[derive(Debug, Clone, Copy)]
pub struct SnrSampler {
    irradiance: IrradianceSampler,
    mu: f64,
    detection: Detection,
}

impl SnrSampler {
    pub fn new(h: &HopConfig) -> Result<Self> {
        h.validate()?;
        Ok(Self { irradiance: IrradianceSampler::new(&h.egg)?, mu: h.mu, detection: h.detection })
    }
}

impl Distribution<f64> for SnrSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.irradiance.sample(rng);
        match self.detection {
            Detection::Heterodyne => self.mu * i,
            Detection::ImDd => self.mu * i * i,
        }
    }
}

/// Maps an irradiance draw to the electrical SNR of the hop.
pub fn snr_from_irradiance(h: &HopConfig, irradiance: f64) -> f64 {
    h.mu * irradiance.powf(h.r())
}

/// One irradiance draw; build an [`IrradianceSampler`] for repeated sampling.
pub fn sample_irradiance<R: Rng + ?Sized>(p: &EggParams, rng: &mut R) -> Result<f64> {
    Ok(IrradianceSampler::new(p)?.sample(rng))
}

/// One SNR draw; build an [`SnrSampler`] for repeated sampling.
pub fn sample_snr<R: Rng + ?Sized>(h: &HopConfig, rng: &mut R) -> Result<f64> {
    Ok(SnrSampler::new(h)?.sample(rng))
}
