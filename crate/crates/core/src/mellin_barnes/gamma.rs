use num_complex::Complex64;

use crate::error::{Error, Result};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..=9
const STIRLING: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
];

const STIRLING_RADIUS: f64 = 15.0;
const POLE_TOLERANCE: f64 = 1e-12;

/// Principal branch of `ln Γ(z)`.
///
/// The branch is the analytic continuation of the real log-gamma from the
/// positive axis, cut along the non-positive reals, so the imaginary part is
/// not reduced modulo 2π.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("log-gamma of non-finite argument {z}")));
    }
    if is_near_pole(z) {
        return Err(Error::GammaPole { z });
    }
    Ok(ln_gamma_unchecked(z))
}

/// True when `z` lies within the pole tolerance of 0, -1, -2, ...
pub fn is_near_pole(z: Complex64) -> bool {
    if z.im.abs() > POLE_TOLERANCE || z.re > POLE_TOLERANCE {
        return false;
    }
    (z.re - z.re.round()).abs() <= POLE_TOLERANCE
}

pub(crate) fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    let shift = shift_count(z);
    if shift == 0 {
        return stirling(z);
    }
    let mut log_product = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        log_product += (z + k as f64).ln();
    }
    stirling(z + shift as f64) - log_product
}

fn shift_count(z: Complex64) -> usize {
    let mut n = if z.re < 0.0 { (-z.re).ceil() } else { 0.0 };
    let re = z.re + n;
    if re * re + z.im * z.im < STIRLING_RADIUS * STIRLING_RADIUS {
        let needed = (STIRLING_RADIUS * STIRLING_RADIUS - z.im * z.im).max(0.0).sqrt();
        n += (needed - re).ceil().max(0.0);
    }
    n as usize
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for &c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + series * inv
}

/// Real log-gamma used for coefficients; `ln |Γ(x)|` together with the sign of Γ(x).
pub fn ln_gamma_real_signed(x: f64) -> Result<(f64, f64)> {
    let z = Complex64::new(x, 0.0);
    if is_near_pole(z) {
        return Err(Error::GammaPole { z });
    }
    let value = ln_gamma_unchecked(z);
    let sign = if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok((value.re, sign))
}

/// Γ(x) for real `x`, finite away from the poles.
pub fn gamma_real(x: f64) -> Result<f64> {
    let (ln_abs, sign) = ln_gamma_real_signed(x)?;
    Ok(sign * ln_abs.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_integers_and_half() {
        assert!(log_gamma_complex(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma_complex(c(0.5, 0.0)).unwrap();
        assert!((half.re - 0.572_364_942_924_700_1).abs() < 1e-13);
        let five = log_gamma_complex(c(5.0, 0.0)).unwrap();
        assert!((five.re - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn imaginary_unit() {
        let v = log_gamma_complex(c(0.0, 1.0)).unwrap();
        assert!((v.re + 0.650_923_199_301_853_6).abs() < 1e-13);
        assert!((v.im + 1.872_436_647_262_429_8).abs() < 1e-13);
    }

    #[test]
    fn poles_are_rejected() {
        for k in 0..5 {
            let err = log_gamma_complex(c(-(k as f64), 0.0)).unwrap_err();
            assert!(matches!(err, Error::GammaPole { .. }));
        }
        assert!(log_gamma_complex(c(-3.0 + 1e-9, 0.0)).is_ok());
    }

    #[test]
    fn signed_real_gamma() {
        assert!((gamma_real(-0.5).unwrap() + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma_real(-1.5).unwrap() - 4.0 / 3.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((gamma_real(4.0).unwrap() - 6.0).abs() < 1e-12);
    }
}
