mod common;

use common::{integrate_positive_axis, oracle, oracle_mc, rel_err, trapezoid_log_axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use statrs::function::gamma::{gamma, gamma_lr};
use uwoc_relay::egg_channel::{
    irradiance_pdf, sample_irradiance, sample_snr, scintillation_index, snr_ccdf, snr_cdf, snr_cdf_many,
    snr_from_irradiance, snr_pdf, Detection, EggParams, HopConfig, IrradianceSampler, SnrSampler,
};
use uwoc_relay::fixtures;
use uwoc_relay::mellin_barnes::QuadratureSpec;

fn egg(omega: f64, lambda: f64, a: f64, b: f64, c: f64) -> EggParams {
    EggParams::new(omega, lambda, a, b, c).unwrap()
}

fn fixture(name: &str) -> EggParams {
    fixtures::params(name).unwrap()
}

fn all_fixtures() -> Vec<EggParams> {
    fixtures::builtin_names().into_iter().map(fixture).collect()
}

fn mean_of<D: Distribution<f64>>(d: &D, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = d.sample(&mut rng);
        s1 += v;
        s2 += v * v;
    }
    (s1 / n as f64, s2 / n as f64)
}

#[test]
fn parameter_validation() {
    assert!(EggParams::new(1.2, 1.0, 1.0, 1.0, 1.0).is_err());
    assert!(EggParams::new(0.5, 0.0, 1.0, 1.0, 1.0).is_err());
    assert!(EggParams::new(0.5, 1.0, 1.0, -1.0, 1.0).is_err());
    assert!(EggParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_ok());
    assert!(HopConfig::new(egg(1.0, 1.0, 1.0, 1.0, 1.0), Detection::Heterodyne, 0.0).is_err());
    assert!(serde_json::from_str::<Detection>("3").is_err());
    assert_eq!(serde_json::from_str::<Detection>("2").unwrap(), Detection::ImDd);
}

#[test]
fn irradiance_density_examples() {
    let exp = egg(1.0, 1.0, 1.0, 1.0, 1.0);
    assert!(rel_err(irradiance_pdf(&exp, 1.0).unwrap(), (-1f64).exp()) < 1e-14);
    let gg = egg(0.0, 1.0, 1.0, 1.0, 1.0);
    assert!(rel_err(irradiance_pdf(&gg, 2.0).unwrap(), (-2f64).exp()) < 1e-14);
    let a = fixture("egg_a");
    assert!(rel_err(irradiance_pdf(&a, 0.5).unwrap(), oracle("egg_a_pdf_at_0.5")) < 1e-12);
    assert!(irradiance_pdf(&a, 0.0).is_err());
    assert!(irradiance_pdf(&a, -1.0).is_err());
}

#[test]
fn irradiance_density_normalizes() {
    for p in all_fixtures() {
        let total = integrate_positive_axis(|x| irradiance_pdf(&p, x).unwrap(), -40.0, 4.0, 60);
        assert!((total - 1.0).abs() < 1e-8, "{p:?}: {total}");
    }
}

#[test]
fn scintillation_index_examples() {
    assert!((scintillation_index(&egg(1.0, 1.0, 1.0, 1.0, 1.0)) - 1.0).abs() < 1e-14);
    let a = 4.0;
    assert!((scintillation_index(&egg(0.0, 1.0, a, 1.0 / a, 1.0)) - 0.25).abs() < 1e-14);
    let egg_a = fixture("egg_a");
    assert!((scintillation_index(&egg_a) - oracle("egg_a_si_formula")).abs() < 1e-13);
    // For non-unit-mean sets the formula and the normalized variance differ.
    assert!(rel_err(egg_a.normalized_variance(), oracle("egg_a_si_empirical_mc")) < 0.01);
    assert!(rel_err(egg_a.mean(), oracle("egg_a_mean_irradiance")) < 1e-13);
}

#[test]
fn sampled_normalized_variance() {
    for name in ["egg_a", "egg_b"] {
        let p = fixture(name);
        let (m1, m2) = mean_of(&IrradianceSampler::new(&p).unwrap(), 1_000_000, 7);
        let si = m2 / (m1 * m1) - 1.0;
        assert!(rel_err(si, p.normalized_variance()) < 0.02, "{name}: {si}");
    }
}

#[test]
fn sampling_means() {
    let (m, _) = mean_of(&IrradianceSampler::new(&egg(1.0, 2.0, 1.0, 1.0, 1.0)).unwrap(), 1_000_000, 1);
    assert!((m - 2.0).abs() < 0.01);
    let (m, _) = mean_of(&IrradianceSampler::new(&egg(0.0, 1.0, 2.0, 1.0, 2.0)).unwrap(), 1_000_000, 2);
    assert!((m - gamma(2.5) / gamma(2.0)).abs() < 0.01);
    let p = fixture("egg_a");
    let (_, m2) = mean_of(&IrradianceSampler::new(&p).unwrap(), 1_000_000, 3);
    assert!(rel_err(m2, oracle("egg_a_second_moment")) < 0.01);
}

#[test]
fn snr_sampling() {
    let h = HopConfig::new(egg(1.0, 1.0, 1.0, 1.0, 1.0), Detection::Heterodyne, 50.0).unwrap();
    let (m, _) = mean_of(&SnrSampler::new(&h).unwrap(), 1_000_000, 4);
    assert!(rel_err(m, 50.0) < 0.01);
    let h2 = HopConfig::new(fixture("egg_a"), Detection::ImDd, 100.0).unwrap();
    assert_eq!(snr_from_irradiance(&h2, 2.0), 400.0);
    // Average-SNR construction for IM/DD reproduces the requested mean.
    let hb = HopConfig::from_average_snr(fixture("egg_b"), Detection::ImDd, 300.0).unwrap();
    let (m, _) = mean_of(&SnrSampler::new(&hb).unwrap(), 1_000_000, 5);
    assert!(rel_err(m, 300.0) < 0.01, "{m}");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    assert!(sample_snr(&h2, &mut rng).unwrap() > 0.0);
    assert!(sample_irradiance(&h2.egg, &mut rng).unwrap() > 0.0);
}

#[test]
fn snr_density_examples() {
    let h = HopConfig::new(egg(1.0, 1.0, 1.0, 1.0, 1.0), Detection::Heterodyne, 1.0).unwrap();
    assert!(rel_err(snr_pdf(&h, 1.0).unwrap(), (-1f64).exp()) < 1e-10);
    let ha = HopConfig::new(fixture("egg_a"), Detection::ImDd, 100.0).unwrap();
    let got = snr_pdf(&ha, 10.0).unwrap();
    assert!(rel_err(got, oracle("egg_a_r2_mu100_snr_pdf_at_10")) < 1e-9);
    let (mc, se) = oracle_mc("egg_a_r2_mu100_snr_pdf_at_10_mc");
    // histogram bin [9.5, 10.5] average of the density
    let bin = integrate_positive_axis(|g| snr_pdf(&ha, g).unwrap(), 9.5f64.ln(), 10.5f64.ln(), 1);
    assert!((bin - mc).abs() < 3.0 * se, "{bin} vs {mc} ± {se}");
}

#[test]
fn snr_density_normalizes() {
    for p in all_fixtures() {
        for det in [Detection::Heterodyne, Detection::ImDd] {
            let h = HopConfig::new(p, det, 30.0).unwrap();
            let total = trapezoid_log_axis(|g| snr_pdf(&h, g).unwrap(), -40.0, 12.0, 0.04);
            assert!((total - 1.0).abs() < 1e-6, "{p:?} r={}: {total}", h.r());
        }
    }
}

#[test]
fn snr_cdf_examples() {
    let h = HopConfig::new(egg(1.0, 1.0, 1.0, 1.0, 1.0), Detection::Heterodyne, 1.0).unwrap();
    assert!(rel_err(snr_cdf(&h, 1.0).unwrap(), 1.0 - (-1f64).exp()) < 1e-10);
    assert!(rel_err(snr_ccdf(&h, 1.0).unwrap(), (-1f64).exp()) < 1e-10);
    assert!(snr_cdf(&h, 1e-12).unwrap() < 1e-11);
    assert!(snr_cdf(&h, 1e3).unwrap() > 1.0 - 1e-12);

    let ha = HopConfig::new(fixture("egg_a"), Detection::ImDd, 100.0).unwrap();
    let got = snr_cdf(&ha, 10.0).unwrap();
    assert!((got - oracle("egg_a_r2_mu100_snr_cdf_at_10")).abs() < 1e-10);
    let (mc, se) = oracle_mc("egg_a_r2_mu100_snr_cdf_at_10_mc");
    assert!((got - mc).abs() < 3.0 * se);
    let (mc_s, se_s) = (1.0 - mc, se);
    assert!((snr_ccdf(&ha, 10.0).unwrap() - mc_s).abs() < 3.0 * se_s);
}

#[test]
fn snr_cdf_monotone_and_bounded() {
    for p in all_fixtures() {
        for det in [Detection::Heterodyne, Detection::ImDd] {
            let h = HopConfig::new(p, det, 100.0).unwrap();
            let grid: Vec<f64> = (0..200).map(|k| 10f64.powf(-4.0 + 10.0 * k as f64 / 199.0)).collect();
            let values = snr_cdf_many(&h, &grid, &QuadratureSpec::default()).unwrap();
            for w in values.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{p:?}: {w:?}");
            }
            for (g, v) in grid.iter().zip(&values) {
                assert!((-1e-12..=1.0 + 1e-9).contains(v), "{p:?} r={} at {g}: {v}", h.r());
            }
        }
    }
}

#[test]
fn complement_identity() {
    for p in all_fixtures() {
        let h = HopConfig::new(p, Detection::ImDd, 10.0).unwrap();
        for k in 0..20 {
            let g = 10f64.powf(-3.0 + 6.0 * k as f64 / 19.0);
            let total = snr_cdf(&h, g).unwrap() + snr_ccdf(&h, g).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "{p:?} at {g}: {total}");
        }
    }
}

#[test]
fn batch_cdf_matches_pointwise() {
    let h = HopConfig::new(fixture("egg_b"), Detection::ImDd, 100.0).unwrap();
    let grid = [0.01, 0.5, 3.0, 40.0, 900.0];
    let batch = snr_cdf_many(&h, &grid, &QuadratureSpec::default()).unwrap();
    for (g, b) in grid.iter().zip(batch) {
        assert!((snr_cdf(&h, *g).unwrap() - b).abs() < 1e-10);
    }
}

/// Direct Generalized-Gamma CDF in the SNR domain.
fn gg_cdf(a: f64, b: f64, c: f64, r: f64, mu: f64, g: f64) -> f64 {
    gamma_lr(a, ((g / mu).powf(1.0 / r) / b).powf(c))
}

#[test]
fn special_case_reductions() {
    let mu = 20.0;
    for det in [Detection::Heterodyne, Detection::ImDd] {
        let r = det.r();
        for &(a, b, c) in &[(2.0, 0.55, 1.5), (1.0, 0.8, 2.3), (3.0, 0.4, 1.0)] {
            // ω = 0: pure Generalized Gamma; a = 1: Weibull; c = 1: Gamma
            let h = HopConfig::new(egg(0.0, 1.0, a, b, c), det, mu).unwrap();
            for g in [0.1, 2.0, 30.0] {
                let want = gg_cdf(a, b, c, r, mu, g);
                assert!((snr_cdf(&h, g).unwrap() - want).abs() < 1e-8);
                if a == 1.0 {
                    let weibull = 1.0 - (-((g / mu).powf(1.0 / r) / b).powf(c)).exp();
                    assert!((snr_cdf(&h, g).unwrap() - weibull).abs() < 1e-8);
                }
            }
        }
        // c = 1: Exponential-Gamma mixture
        let (w, lam, a, b) = (0.3, 0.7, 2.5, 0.4);
        let h = HopConfig::new(egg(w, lam, a, b, 1.0), det, mu).unwrap();
        for g in [0.1, 2.0, 30.0] {
            let i = (g / mu).powf(1.0 / r);
            let want = w * (1.0 - (-i / lam).exp()) + (1.0 - w) * gamma_lr(a, i / b);
            assert!((snr_cdf(&h, g).unwrap() - want).abs() < 1e-8);
        }
    }
}
