use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a gamma factor sits in the numerator (+1) or the denominator (-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum ExponentSign {
    Numerator,
    Denominator,
}

impl TryFrom<i8> for ExponentSign {
    type Error = String;

    fn try_from(value: i8) -> std::result::Result<Self, Self::Error> {
        match value {
            1 => Ok(Self::Numerator),
            -1 => Ok(Self::Denominator),
            other => Err(format!("exponent_sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<ExponentSign> for i8 {
    fn from(sign: ExponentSign) -> i8 {
        match sign {
            ExponentSign::Numerator => 1,
            ExponentSign::Denominator => -1,
        }
    }
}

/// `Γ(constant + coeff_s·s + coeff_t·t)` raised to `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub constant: f64,
    pub coeff_s: f64,
    #[serde(default)]
    pub coeff_t: f64,
    pub exponent_sign: ExponentSign,
}

impl GammaFactor {
    pub fn numerator(constant: f64, coeff_s: f64, coeff_t: f64) -> Self {
        Self { constant, coeff_s, coeff_t, exponent_sign: ExponentSign::Numerator }
    }

    pub fn denominator(constant: f64, coeff_s: f64, coeff_t: f64) -> Self {
        Self { constant, coeff_s, coeff_t, exponent_sign: ExponentSign::Denominator }
    }

    /// Univariate numerator factor `Γ(constant + coeff·s)`.
    pub fn num(constant: f64, coeff: f64) -> Self {
        Self::numerator(constant, coeff, 0.0)
    }

    /// Univariate denominator factor `1/Γ(constant + coeff·s)`.
    pub fn den(constant: f64, coeff: f64) -> Self {
        Self::denominator(constant, coeff, 0.0)
    }

    pub fn is_numerator(&self) -> bool {
        self.exponent_sign == ExponentSign::Numerator
    }

    pub fn is_constant(&self) -> bool {
        self.coeff_s == 0.0 && self.coeff_t == 0.0
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.constant.is_finite() && self.coeff_s.is_finite() && self.coeff_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite gamma factor {self:?}")));
        }
        Ok(())
    }

    /// Same factor with the roles of `s` and `t` exchanged.
    pub fn swapped(&self) -> Self {
        Self { coeff_s: self.coeff_t, coeff_t: self.coeff_s, ..*self }
    }
}

/// Which contour variable exponentiates which argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerBases {
    /// `x^s · y^t`
    #[default]
    XsYt,
    /// `x^t · y^s`
    XtYs,
}

/// Product of gamma factors in `(s, t)` integrated against `x^s y^t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateKernel {
    pub factors: Vec<GammaFactor>,
    #[serde(default = "unit_prefactor")]
    pub prefactor: f64,
    #[serde(default)]
    pub power_bases: PowerBases,
}

fn unit_prefactor() -> f64 {
    1.0
}

impl BivariateKernel {
    pub fn new(factors: Vec<GammaFactor>) -> Self {
        Self { factors, prefactor: 1.0, power_bases: PowerBases::XsYt }
    }

    pub fn with_prefactor(mut self, prefactor: f64) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn depends_on_s(&self) -> bool {
        self.factors.iter().any(|f| f.coeff_s != 0.0)
    }

    pub fn depends_on_t(&self) -> bool {
        self.factors.iter().any(|f| f.coeff_t != 0.0)
    }

    /// Tensor product of two univariate kernels: `K_s(s) · K_t(t)`.
    pub fn separable(s_factors: &[GammaFactor], t_factors: &[GammaFactor]) -> Self {
        let factors = s_factors.iter().copied().chain(t_factors.iter().map(|f| f.swapped())).collect();
        Self::new(factors)
    }

    /// Factors rewritten so that `s` always pairs with `x` and `t` with `y`.
    pub(crate) fn normalized_factors(&self) -> Vec<GammaFactor> {
        match self.power_bases {
            PowerBases::XsYt => self.factors.clone(),
            PowerBases::XtYs => self.factors.iter().map(GammaFactor::swapped).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kernel serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("kernel JSON: {e}")))
    }
}

/// Fox H parameters in standard `(m, n, p, q)` notation.
///
/// `a` holds the `p` pairs `(a_j, A_j)`, `b` the `q` pairs `(b_j, B_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoxH {
    pub m: usize,
    pub n: usize,
    pub a: Vec<(f64, f64)>,
    pub b: Vec<(f64, f64)>,
}

impl FoxH {
    pub fn new(m: usize, n: usize, a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> Result<Self> {
        let h = Self { m, n, a, b };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        if self.m > self.b.len() || self.n > self.a.len() {
            return Err(Error::InvalidParameter(format!(
                "Fox H orders m={} n={} exceed q={} p={}",
                self.m,
                self.n,
                self.b.len(),
                self.a.len()
            )));
        }
        let scales_ok = self.a.iter().chain(&self.b).all(|&(v, k)| v.is_finite() && k.is_finite() && k > 0.0);
        if !scales_ok {
            return Err(Error::InvalidParameter("Fox H scale factors must be positive".into()));
        }
        Ok(())
    }

    /// Kernel factors in the `x^s` convention.
    ///
    /// Numerator: `Γ(b_j − B_j s)` for `j ≤ m`, `Γ(1 − a_j + A_j s)` for `j ≤ n`.
    /// Denominator: `Γ(1 − b_j + B_j s)` for `j > m`, `Γ(a_j − A_j s)` for `j > n`.
    pub fn factors(&self) -> Result<Vec<GammaFactor>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.a.len() + self.b.len());
        for (j, &(b, big_b)) in self.b.iter().enumerate() {
            if j < self.m {
                out.push(GammaFactor::num(b, -big_b));
            } else {
                out.push(GammaFactor::den(1.0 - b, big_b));
            }
        }
        for (j, &(a, big_a)) in self.a.iter().enumerate() {
            if j < self.n {
                out.push(GammaFactor::num(1.0 - a, big_a));
            } else {
                out.push(GammaFactor::den(a, -big_a));
            }
        }
        Ok(out)
    }
}

/// Meijer G parameters: a Fox H with every scale factor equal to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeijerG {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl MeijerG {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let g = Self { m, n, a, b };
        g.to_fox()?;
        Ok(g)
    }

    pub fn to_fox(&self) -> Result<FoxH> {
        FoxH::new(
            self.m,
            self.n,
            self.a.iter().map(|&v| (v, 1.0)).collect(),
            self.b.iter().map(|&v| (v, 1.0)).collect(),
        )
    }
}

/// Settings for the truncated trapezoid rule along vertical contours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub step: f64,
    pub half_width: f64,
    pub target_rel_tol: f64,
    pub max_nodes: usize,
    #[serde(default)]
    pub contour_abscissa_s: Option<f64>,
    #[serde(default)]
    pub contour_abscissa_t: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            step: 0.05,
            half_width: 40.0,
            target_rel_tol: 1e-10,
            max_nodes: 4_000_000,
            contour_abscissa_s: None,
            contour_abscissa_t: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.target_rel_tol = tol;
        self
    }

    pub fn with_abscissas(mut self, s: Option<f64>, t: Option<f64>) -> Self {
        self.contour_abscissa_s = s;
        self.contour_abscissa_t = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step) || !positive(self.half_width) || !positive(self.target_rel_tol) {
            return Err(Error::InvalidParameter(format!(
                "quadrature step, half-width and tolerance must be positive: {self:?}"
            )));
        }
        if self.max_nodes < 16 {
            return Err(Error::InvalidParameter("max_nodes must be at least 16".into()));
        }
        Ok(())
    }
}

/// Diagnostics attached to a contour-integral value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub imag_residual: f64,
    /// `∫|integrand|` along the contour; `value/magnitude` measures cancellation.
    pub magnitude: f64,
    pub nodes: usize,
    pub step: f64,
    pub half_width: f64,
    pub abscissa_s: f64,
    pub abscissa_t: Option<f64>,
}

impl Evaluation {
    /// Absolute error below which a result cannot be resolved in double precision,
    /// `1e3 · ε · magnitude`.
    pub fn roundoff_floor(&self) -> f64 {
        roundoff_floor(self.magnitude)
    }
}

pub(crate) fn roundoff_floor(magnitude: f64) -> f64 {
    1e3 * f64::EPSILON * magnitude
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_json_roundtrip() {
        let k = BivariateKernel::new(vec![
            GammaFactor::numerator(0.0, 0.0, -1.0),
            GammaFactor::numerator(0.0, 1.0, 1.0),
            GammaFactor::denominator(1.0, 1.0, 0.0),
        ])
        .with_prefactor(0.5);
        let text = k.to_json();
        assert!(text.contains("\"exponent_sign\": -1"));
        assert_eq!(BivariateKernel::from_json(&text).unwrap(), k);
    }

    #[test]
    fn bad_sign_rejected() {
        let text = r#"{"factors":[{"constant":0,"coeff_s":1,"exponent_sign":2}]}"#;
        assert!(BivariateKernel::from_json(text).is_err());
    }

    #[test]
    fn meijer_conversion() {
        let g = MeijerG::new(1, 1, vec![1.0], vec![1.0, 0.0]).unwrap();
        let f = g.to_fox().unwrap().factors().unwrap();
        assert_eq!(f, vec![GammaFactor::num(1.0, -1.0), GammaFactor::den(1.0, 1.0), GammaFactor::num(0.0, 1.0)]);
        assert!(MeijerG::new(2, 0, vec![], vec![1.0]).is_err());
    }
}
