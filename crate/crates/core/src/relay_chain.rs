//! Dual-hop fixed-gain amplify-and-forward relaying over EGG hops.
//!
//! The end-to-end SNR is `γ = γ₁γ₂/(γ₂ + C)`. Its statistics are sums over pairs of
//! fading lobes (Exponential / Generalized-Gamma of each hop) of bivariate Mellin-Barnes
//! integrals. An Exponential lobe is treated as a Generalized-Gamma lobe with `a = c = 1`
//! and `b = λ`, which keeps every kernel builder uniform.

use serde::{Deserialize, Serialize};

use crate::egg_channel::{Detection, EggParams, HopConfig};
use crate::error::{Error, Result};
use crate::mellin_barnes::{
    fox_h_bivariate, fox_h_univariate, gamma_real, is_near_pole, BivariateKernel, GammaFactor, QuadratureSpec,
};

/// End-to-end configuration: both hops and the fixed-gain constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayConfig {
    pub hop1: HopConfig,
    pub hop2: HopConfig,
    #[serde(rename = "C", alias = "c")]
    pub c: f64,
}

impl RelayConfig {
    /// Derives `C` from the first hop (semi-blind relay).
    pub fn new(hop1: HopConfig, hop2: HopConfig) -> Result<Self> {
        hop1.validate()?;
        hop2.validate()?;
        let c = fixed_gain_constant(&hop1)?;
        Ok(Self { hop1, hop2, c })
    }

    /// Uses an explicit `C`, for what-if studies.
    pub fn with_gain_constant(hop1: HopConfig, hop2: HopConfig, c: f64) -> Result<Self> {
        let rc = Self { hop1, hop2, c };
        rc.validate()?;
        Ok(rc)
    }

    pub fn validate(&self) -> Result<()> {
        self.hop1.validate()?;
        self.hop2.validate()?;
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!("gain constant C must be positive, got {}", self.c)));
        }
        Ok(())
    }

    /// Same hops, both average SNRs replaced; `C` is re-derived.
    pub fn with_mus(&self, mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(self.hop1.with_mu(mu1), self.hop2.with_mu(mu2))
    }
}

/// `γ₁γ₂/(γ₂ + C)`.
pub fn combine_snr(gamma1: f64, gamma2: f64, c: f64) -> f64 {
    if gamma2.is_infinite() {
        return gamma1;
    }
    gamma1 * gamma2 / (gamma2 + c)
}

/// One fading lobe `w · GG(shape, scale, 1/power)` of a hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lobe {
    pub weight: f64,
    pub shape: f64,
    pub scale: f64,
    pub power: f64,
    pub exponential: bool,
}

impl Lobe {
    pub(crate) fn of(egg: &EggParams) -> Vec<Lobe> {
        let mut out = Vec::with_capacity(2);
        if egg.exp_weight() > 0.0 {
            out.push(Lobe { weight: egg.omega, shape: 1.0, scale: egg.lambda, power: 1.0, exponential: true });
        }
        if egg.gg_weight() > 0.0 {
            out.push(Lobe {
                weight: egg.gg_weight(),
                shape: egg.a,
                scale: egg.b,
                power: 1.0 / egg.c,
                exponential: false,
            });
        }
        out
    }

    /// `scale^r μ`, the natural SNR unit of the lobe.
    fn base(&self, hop: &HopConfig) -> f64 {
        self.scale.powf(hop.r()) * hop.mu
    }

    /// `E[(I/scale)^{r v}]` as a factor `Γ(shape + power·r·v)` with `v = k_s s + k_t t`.
    fn mellin(&self, r: f64, k_s: f64, k_t: f64) -> GammaFactor {
        let k = self.power * r;
        GammaFactor::numerator(self.shape, k * k_s, k * k_t)
    }

    fn norm(&self) -> Result<f64> {
        Ok(self.weight / gamma_real(self.shape)?)
    }
}

/// A weighted bivariate integral `prefactor · H(x, y)` contributing to a relay statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTerm {
    pub kernel: BivariateKernel,
    pub x: f64,
    pub y: f64,
}

/// Extra node budget granted to a relay term whose truncation tail is still too heavy.
pub const NODE_ESCALATION: usize = 4;

impl KernelTerm {
    /// Evaluates the term; a non-convergent truncation is retried once with
    /// `NODE_ESCALATION` times the node budget before the error is returned.
    pub fn evaluate(&self, spec: &QuadratureSpec) -> Result<f64> {
        match fox_h_bivariate(&self.kernel, self.x, self.y, spec) {
            Err(Error::NonConvergent { .. }) => {
                let wider = QuadratureSpec { max_nodes: spec.max_nodes.saturating_mul(NODE_ESCALATION), ..*spec };
                fox_h_bivariate(&self.kernel, self.x, self.y, &wider)
            }
            other => other,
        }
    }
}

/// A univariate integral `prefactor · H(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateTerm {
    pub factors: Vec<GammaFactor>,
    pub prefactor: f64,
    pub x: f64,
}

impl UnivariateTerm {
    pub fn evaluate(&self, spec: &QuadratureSpec) -> Result<f64> {
        if self.prefactor == 0.0 {
            return Ok(0.0);
        }
        Ok(self.prefactor * fox_h_univariate(&self.factors, self.x, spec)?)
    }
}

/// Which side of the first hop's survival function a term family represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SurvivalForm {
    /// `P(γ > ·)`, giving `1/Γ(1+s)`.
    Survival,
    /// Its derivative in `ln γ`, giving `1/Γ(s)`.
    Density,
}

/// Bivariate terms `Σ_{A,B} w_A w_B ∬ Γ_A(s) Γ_B(−t) Γ(−t) Γ(s+t)/Γ(·) ∏extra(s) X_A^s Y_B^t`
/// with `X_A = x_scale · base₁(A)` and `Y_B = C / base₂(B)`.
pub(crate) fn survival_terms(
    rc: &RelayConfig,
    x_scale: f64,
    extra: &[GammaFactor],
    form: SurvivalForm,
) -> Result<Vec<KernelTerm>> {
    let (r1, r2) = (rc.hop1.r(), rc.hop2.r());
    let mut terms = Vec::new();
    for la in Lobe::of(&rc.hop1.egg) {
        for lb in Lobe::of(&rc.hop2.egg) {
            let mut factors = vec![
                la.mellin(r1, 1.0, 0.0),
                lb.mellin(r2, 0.0, -1.0),
                GammaFactor::numerator(0.0, 0.0, -1.0),
                GammaFactor::numerator(0.0, 1.0, 1.0),
                match form {
                    SurvivalForm::Survival => GammaFactor::den(1.0, 1.0),
                    SurvivalForm::Density => GammaFactor::den(0.0, 1.0),
                },
            ];
            factors.extend_from_slice(extra);
            let kernel = BivariateKernel::new(factors).with_prefactor(la.norm()? * lb.norm()?);
            terms.push(KernelTerm { kernel, x: x_scale * la.base(&rc.hop1), y: rc.c / lb.base(&rc.hop2) });
        }
    }
    Ok(terms)
}

/// Terms whose sum is `P(γ > gamma)` through the generic bivariate representation.
pub fn cdf_kernel_terms(rc: &RelayConfig, gamma: f64) -> Result<Vec<KernelTerm>> {
    rc.validate()?;
    check_positive(gamma)?;
    survival_terms(rc, 1.0 / gamma, &[], SurvivalForm::Survival)
}

/// Terms whose sum divided by `gamma` is the end-to-end density.
pub fn pdf_kernel_terms(rc: &RelayConfig, gamma: f64) -> Result<Vec<KernelTerm>> {
    rc.validate()?;
    check_positive(gamma)?;
    survival_terms(rc, 1.0 / gamma, &[], SurvivalForm::Density)
}

/// For a heterodyne first hop, the Exponential lobe of hop 1 collapses to
/// `e^{−γ/(λ₁μ₁)} ∫ Γ(−t) Γ_B(−t) W^t dt` with `W = Cγ/(λ₁μ₁ base₂(B))`.
/// Returns `None` when hop 1 is not heterodyne or has no Exponential lobe.
pub fn fast_path_cdf_terms(rc: &RelayConfig, gamma: f64) -> Result<Option<Vec<UnivariateTerm>>> {
    rc.validate()?;
    check_positive(gamma)?;
    if rc.hop1.detection != Detection::Heterodyne {
        return Ok(None);
    }
    let Some(la) = Lobe::of(&rc.hop1.egg).into_iter().find(|l| l.exponential) else {
        return Ok(None);
    };
    let r2 = rc.hop2.r();
    let u = gamma / la.base(&rc.hop1);
    let mut terms = Vec::new();
    for lb in Lobe::of(&rc.hop2.egg) {
        terms.push(UnivariateTerm {
            factors: vec![GammaFactor::num(0.0, -1.0), lb.mellin(r2, -1.0, 0.0)],
            prefactor: la.weight * lb.norm()? * (-u).exp(),
            x: rc.c * u / lb.base(&rc.hop2),
        });
    }
    Ok(Some(terms))
}

fn check_positive(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("SNR must be positive and finite, got {gamma}")))
    }
}

/// `C = 1/E[1/(1 + γ₁)]`, the fixed gain set from the first hop's average fading power.
pub fn fixed_gain_constant(h1: &HopConfig) -> Result<f64> {
    fixed_gain_constant_with(h1, &QuadratureSpec::default())
}

pub fn fixed_gain_constant_with(h1: &HopConfig, spec: &QuadratureSpec) -> Result<f64> {
    h1.validate()?;
    let mut expectation = 0.0;
    for lobe in Lobe::of(&h1.egg) {
        let term = UnivariateTerm {
            factors: vec![GammaFactor::num(0.0, 1.0), GammaFactor::num(1.0, -1.0), lobe.mellin(h1.r(), -1.0, 0.0)],
            prefactor: lobe.norm()?,
            x: 1.0 / lobe.base(h1),
        };
        expectation += term.evaluate(spec)?;
    }
    if !(expectation > 0.0) {
        return Err(Error::ParameterDegenerate(format!("E[1/(1+γ₁)] evaluated to {expectation}")));
    }
    Ok(1.0 / expectation)
}

/// End-to-end CDF; heterodyne first hops use the Exponential fast path for that lobe.
pub fn e2e_cdf(rc: &RelayConfig, gamma: f64) -> Result<f64> {
    e2e_cdf_with(rc, gamma, &QuadratureSpec::default())
}

pub fn e2e_cdf_with(rc: &RelayConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut survival = 0.0;
    let fast = fast_path_cdf_terms(rc, gamma)?;
    let terms = cdf_kernel_terms(rc, gamma)?;
    for (term, lobe) in terms.iter().zip(lobe_pairs(rc)) {
        if fast.is_some() && lobe.0.exponential {
            continue;
        }
        survival += term.evaluate(spec)?;
    }
    for term in fast.iter().flatten() {
        survival += term.evaluate(spec)?;
    }
    Ok(1.0 - survival)
}

/// End-to-end CDF using only the generic bivariate kernels.
pub fn e2e_cdf_bivariate(rc: &RelayConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let survival = cdf_kernel_terms(rc, gamma)?.iter().map(|t| t.evaluate(spec)).sum::<Result<f64>>()?;
    Ok(1.0 - survival)
}

pub fn e2e_cdf_many(rc: &RelayConfig, gammas: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    gammas.iter().map(|&g| e2e_cdf_with(rc, g, spec)).collect()
}

fn lobe_pairs(rc: &RelayConfig) -> impl Iterator<Item = (Lobe, Lobe)> {
    let l2 = Lobe::of(&rc.hop2.egg);
    Lobe::of(&rc.hop1.egg).into_iter().flat_map(move |a| l2.clone().into_iter().map(move |b| (a, b)))
}

/// End-to-end density.
pub fn e2e_pdf(rc: &RelayConfig, gamma: f64) -> Result<f64> {
    e2e_pdf_with(rc, gamma, &QuadratureSpec::default())
}

pub fn e2e_pdf_with(rc: &RelayConfig, gamma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let total = pdf_kernel_terms(rc, gamma)?.iter().map(|t| t.evaluate(spec)).sum::<Result<f64>>()?;
    Ok(total / gamma)
}

/// One term `coef · (scale · γ)^exponent` of the high-SNR CDF expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub scale: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn at(&self, gamma: f64) -> f64 {
        self.coef * (self.scale * gamma).powf(self.exponent)
    }
}

fn gamma_checked(z: f64, what: &str) -> Result<f64> {
    if is_near_pole(num_complex::Complex64::new(z, 0.0)) {
        return Err(Error::ParameterDegenerate(format!("{what}: gamma argument {z} is a pole")));
    }
    gamma_real(z)
}

/// High-SNR expansion of the end-to-end CDF: one term per first-hop lobe and one per
/// lobe pair with a Generalized-Gamma lobe involved. The Exponential×Exponential cross
/// term is not part of the expansion.
pub fn asymptotic_power_terms(rc: &RelayConfig) -> Result<Vec<PowerTerm>> {
    rc.validate()?;
    let (r1, r2) = (rc.hop1.r(), rc.hop2.r());
    let mut terms = Vec::new();
    for la in Lobe::of(&rc.hop1.egg) {
        let alpha = la.shape / (la.power * r1);
        terms.push(PowerTerm {
            coef: la.weight / gamma_checked(la.shape + 1.0, "first-hop term")?,
            scale: 1.0 / la.base(&rc.hop1),
            exponent: alpha,
        });
    }
    for lb in Lobe::of(&rc.hop2.egg) {
        let alpha = lb.shape / (lb.power * r2);
        for la in Lobe::of(&rc.hop1.egg) {
            if la.exponential && lb.exponential {
                continue;
            }
            let g = gamma_checked(la.shape - la.power * r1 * alpha, "cross term")?;
            terms.push(PowerTerm {
                coef: la.norm()? * lb.weight * g / gamma_checked(lb.shape + 1.0, "second-hop term")?,
                scale: rc.c / (la.base(&rc.hop1) * lb.base(&rc.hop2)),
                exponent: alpha,
            });
        }
    }
    Ok(terms)
}

/// Sum of [`asymptotic_power_terms`] at `gamma`.
pub fn e2e_cdf_asymptotic(rc: &RelayConfig, gamma: f64) -> Result<f64> {
    check_positive(gamma)?;
    Ok(asymptotic_power_terms(rc)?.iter().map(|t| t.at(gamma)).sum())
}

/// `E[γⁿ] = E[γ₁ⁿ] · E[(1 + C/γ₂)^{−n}]`.
pub fn e2e_moment(rc: &RelayConfig, n: u32) -> Result<f64> {
    e2e_moment_with(rc, n, &QuadratureSpec::default())
}

pub fn e2e_moment_with(rc: &RelayConfig, n: u32, spec: &QuadratureSpec) -> Result<f64> {
    rc.validate()?;
    if n == 0 {
        return Err(Error::Domain("moment order must be at least 1".into()));
    }
    let n = f64::from(n);
    let mut attenuation = 0.0;
    for lb in Lobe::of(&rc.hop2.egg) {
        let term = UnivariateTerm {
            factors: vec![GammaFactor::num(0.0, -1.0), GammaFactor::num(n, 1.0), lb.mellin(rc.hop2.r(), -1.0, 0.0)],
            prefactor: lb.norm()? / gamma_real(n)?,
            x: rc.c / lb.base(&rc.hop2),
        };
        attenuation += term.evaluate(spec)?;
    }
    Ok(rc.hop1.snr_moment(n)? * attenuation)
}

/// `E[γⁿ]/E[γ]ⁿ − 1` from any moment source.
pub fn amount_of_fading_from<F>(moment: F, n: u32) -> Result<f64>
where
    F: Fn(u32) -> Result<f64>,
{
    if n == 0 {
        return Err(Error::Domain("amount-of-fading order must be at least 1".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let m1 = moment(1)?;
    Ok(moment(n)? / m1.powi(n as i32) - 1.0)
}

pub fn amount_of_fading(rc: &RelayConfig, n: u32) -> Result<f64> {
    amount_of_fading_from(|k| e2e_moment(rc, k), n)
}

/// `min(1/r₁, a₁c₁/r₁, 2/r₂, 2a₂c₂/r₂)`, restricted to the lobes actually present
/// (a pure Exponential hop contributes only its `1/r` entry, a pure GG hop only `ac/r`).
pub fn diversity_order(rc: &RelayConfig) -> f64 {
    let (r1, r2) = (rc.hop1.r(), rc.hop2.r());
    let first = Lobe::of(&rc.hop1.egg).into_iter().map(|l| l.shape / (l.power * r1));
    let second = Lobe::of(&rc.hop2.egg).into_iter().map(|l| 2.0 * l.shape / (l.power * r2));
    first.chain(second).fold(f64::INFINITY, f64::min)
}
