mod common;

use common::{oracle, oracle_mc, rel_err};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use uwoc_relay::egg_channel::{Detection, HopConfig, SnrSampler};
use uwoc_relay::fixtures;
use uwoc_relay::metrics::*;
use uwoc_relay::relay_chain::{asymptotic_power_terms, combine_snr, diversity_order, RelayConfig};

fn det(r: u8) -> Detection {
    Detection::try_from(r).unwrap()
}

fn relay(h1: &str, h2: &str, r: u8, mu_db: f64) -> RelayConfig {
    let mu = 10f64.powf(mu_db / 10.0);
    let hop = |n: &str| HopConfig::new(fixtures::params(n).unwrap(), det(r), mu).unwrap();
    RelayConfig::new(hop(h1), hop(h2)).unwrap()
}

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Textbook Gray-code BER approximations written with the Gaussian Q-function.
fn textbook_ber(name: &str, g: f64) -> f64 {
    let psk = |m: f64| {
        let n = (m / 4.0).max(1.0) as usize;
        2.0 / m.log2().max(2.0)
            * (1..=n)
                .map(|k| q_function((2.0 * g).sqrt() * ((2 * k - 1) as f64 * std::f64::consts::PI / m).sin()))
                .sum::<f64>()
    };
    let qam = |m: f64| {
        let n = (m.sqrt() / 2.0) as usize;
        4.0 / m.log2()
            * (1.0 - 1.0 / m.sqrt())
            * (1..=n).map(|k| q_function((2 * k - 1) as f64 * (3.0 * g / (m - 1.0)).sqrt())).sum::<f64>()
    };
    match name {
        "bpsk" => q_function((2.0 * g).sqrt()),
        "ook" => q_function((g / 2.0).sqrt()),
        "qpsk" => psk(4.0),
        "8-psk" => psk(8.0),
        "16-psk" => psk(16.0),
        "16-qam" => qam(16.0),
        "64-qam" => qam(64.0),
        other => panic!("no textbook formula for {other}"),
    }
}

#[test]
fn conditional_ber_examples() {
    let half_erfc_1 = 0.078_649_603_525_142_57;
    assert!((conditional_ber(&ModulationScheme::bpsk(), 1.0) - 0.0786496).abs() < 1e-7);
    assert!(rel_err(conditional_ber(&ModulationScheme::bpsk(), 1.0), half_erfc_1) < 1e-14);
    assert!(rel_err(conditional_ber(&ModulationScheme::ook(), 4.0), half_erfc_1) < 1e-14);
    assert_eq!(conditional_ber(&ModulationScheme::bpsk(), 0.0), 0.5);
    let qam = ModulationScheme::qam(16).unwrap();
    assert!((conditional_ber(&qam, 0.0) - qam.ber_at_zero_snr()).abs() < 1e-15);
}

#[test]
fn registry_matches_textbook_formulas() {
    let reg = ModulationRegistry::builtin();
    let names: Vec<&str> = reg.names().collect();
    assert_eq!(names.len(), 7);
    for m in reg.iter() {
        for g in [1.0, 10.0, 100.0] {
            let got = conditional_ber(m, g);
            let want = textbook_ber(&m.name, g);
            assert!(rel_err(got, want) < 1e-10, "{} at {g}: {got} vs {want}", m.name);
            assert!(rel_err(reference_ber(m, g).unwrap(), want) < 1e-10);
        }
        m.verify(REGISTRY_TOLERANCE).unwrap();
    }
    assert!(reg.get("16-QAM").is_ok());
    assert!(reg.get("256-psk").is_err());
}

#[test]
fn registry_rejects_invalid_entries() {
    let mut reg = ModulationRegistry::empty();
    let mut bad = ModulationScheme::bpsk();
    bad.q = vec![1.0, 2.0];
    assert!(reg.insert(bad).is_err());
    let mut bad = ModulationScheme::bpsk();
    bad.delta = 0.0;
    assert!(reg.insert(bad).is_err());
    let mut bad = ModulationScheme::bpsk();
    bad.q = vec![-1.0];
    assert!(reg.insert(bad).is_err());
    assert!(ModulationScheme::psk(6).is_err());
    assert!(ModulationScheme::qam(32).is_err());
}

#[test]
fn registry_loads_json_and_ndjson() {
    let bfsk = r#"{"name": "bfsk-nc", "delta": 1.0, "p": 1.0, "n_terms": 1, "q": [0.5], "valid_detection": "both"}"#;
    let mut reg = ModulationRegistry::empty();
    assert_eq!(reg.extend_from_str(&format!("[{bfsk}]")).unwrap(), 1);
    let m = reg.get("bfsk-nc").unwrap();
    // non-coherent BFSK: ½ e^{−γ/2}
    assert!(rel_err(conditional_ber(m, 3.0), 0.5 * (-1.5f64).exp()) < 1e-14);

    let ook = serde_json::to_string(&ModulationScheme::ook()).unwrap();
    let bpsk = serde_json::to_string(&ModulationScheme::bpsk()).unwrap();
    let mut reg = ModulationRegistry::empty();
    assert_eq!(reg.extend_from_str(&format!("{ook}\n{bpsk}\n\n{bfsk}\n")).unwrap(), 3);
    assert_eq!(reg.get("ook").unwrap(), &ModulationScheme::ook());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schemes.ndjson");
    std::fs::write(&path, format!("{bfsk}\n")).unwrap();
    let mut reg = ModulationRegistry::builtin();
    assert_eq!(reg.extend_from_file(&path).unwrap(), 1);
    assert_eq!(reg.names().count(), 8);
    assert!(reg.extend_from_str("{\"name\": \"x\"}").is_err());
}

#[test]
fn outage_examples() {
    let rc = relay("egg_a", "egg_b", 2, 30.0);
    assert!(outage_probability(&rc, 1e-10).unwrap() < 1e-3);
    let got = outage_probability(&rc, 1.0).unwrap();
    assert!(rel_err(got, oracle("outage_ab_r2_30db_at_1")) < 1e-9);
    let (mc, se) = oracle_mc("e2e_cdf_ab_r2_mu1e3_at_1_mc");
    assert!((got - mc).abs() < 3.0 * se);
    assert_eq!(clamp_probability(-1e-13), 0.0);
    assert_eq!(clamp_probability(1.0 + 1e-12), 1.0);
    assert_eq!(clamp_probability(0.25), 0.25);
}

fn conditional_mc(rc: &RelayConfig, n: usize, seed: u64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let s1 = SnrSampler::new(&rc.hop1).unwrap();
    let s2 = SnrSampler::new(&rc.hop2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let v = f(combine_snr(s1.sample(&mut rng), s2.sample(&mut rng), rc.c));
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    (mean, ((sq / n as f64 - mean * mean) / n as f64).sqrt())
}

#[test]
fn ber_exact_examples() {
    let bpsk = ModulationScheme::bpsk();
    let ook = ModulationScheme::ook();
    let rc = relay("pure_exp", "pure_exp", 1, 20.0);
    let got = average_ber_exact(&rc, &bpsk).unwrap();
    assert!(rel_err(got, oracle("ber_bpsk_exp_r1_20db")) < 1e-8, "{got}");
    let (mc, _) = conditional_mc(&rc, 1_000_000, 41, |g| conditional_ber(&bpsk, g));
    assert!(rel_err(got, mc) < 0.02, "{got} vs {mc}");

    let rc = relay("egg_a", "egg_b", 2, 30.0);
    let got = average_ber_exact(&rc, &ook).unwrap();
    assert!(rel_err(got, oracle("ber_ook_ab_r2_30db")) < 1e-8, "{got}");
    let (mc, _) = conditional_mc(&rc, 1_000_000, 42, |g| conditional_ber(&ook, g));
    assert!(rel_err(got, mc) < 0.02, "{got} vs {mc}");

    // no-SNR limit
    let rc = relay("egg_a", "egg_b", 1, -60.0);
    let got = average_ber_exact(&rc, &bpsk).unwrap();
    assert!(got < 0.5 && got > 0.499, "{got}");
    // detection mismatch
    assert!(average_ber_exact(&relay("egg_a", "egg_b", 1, 20.0), &ook).is_err());
}

#[test]
fn ber_range_and_monotone_on_db_grid() {
    let reg = ModulationRegistry::builtin();
    for (m, r) in [("bpsk", 1), ("ook", 2), ("16-qam", 1)] {
        let m = reg.get(m).unwrap();
        let values: Vec<f64> =
            (0..10).map(|k| average_ber_exact(&relay("egg_a", "egg_b", r, 5.0 + 5.0 * k as f64), m).unwrap()).collect();
        for v in &values {
            assert!(*v > 0.0 && *v <= m.ber_at_zero_snr(), "{}: {v}", m.name);
        }
        assert!(values.windows(2).all(|w| w[1] <= w[0]), "{}: {values:?}", m.name);
    }
}

#[test]
fn bpsk_heterodyne_beats_ook_im_dd() {
    let bpsk = ModulationScheme::bpsk();
    let ook = ModulationScheme::ook();
    for (h1, h2) in [("egg_a", "egg_b"), ("pure_exp", "pure_exp"), ("egg_b", "pure_gg")] {
        for x in [10.0, 20.0, 30.0, 40.0] {
            let b = average_ber_exact(&relay(h1, h2, 1, x), &bpsk).unwrap();
            let o = average_ber_exact(&relay(h1, h2, 2, x), &ook).unwrap();
            assert!(b <= o, "{h1}/{h2} at {x} dB: BPSK {b} > OOK {o}");
        }
    }
}

#[test]
fn qam_outperforms_psk_at_sixteen_points() {
    let reg = ModulationRegistry::builtin();
    for x in [15.0, 25.0, 35.0] {
        let rc = relay("egg_a", "egg_b", 1, x);
        let qam = average_ber_exact(&rc, reg.get("16-qam").unwrap()).unwrap();
        let psk = average_ber_exact(&rc, reg.get("16-psk").unwrap()).unwrap();
        assert!(qam < psk, "{x} dB: {qam} vs {psk}");
    }
}

#[test]
fn ber_asymptote_positive_at_high_snr() {
    let reg = ModulationRegistry::builtin();
    for (h1, h2) in [("egg_a", "egg_b"), ("egg_b", "egg_a"), ("pure_exp", "pure_exp"), ("pure_exp", "egg_a")] {
        for (name, r) in [("bpsk", 1), ("ook", 2)] {
            for x in [40.0, 60.0, 80.0] {
                let v = average_ber_asymptotic(&relay(h1, h2, r, x), reg.get(name).unwrap()).unwrap();
                assert!(v > 0.0, "{h1}/{h2} {name} at {x} dB: {v}");
            }
        }
    }
}

/// Power term with the smallest exponent, as its BER contribution up to constant factors.
fn dominant_term(rc: &RelayConfig) -> f64 {
    let terms = asymptotic_power_terms(rc).unwrap();
    let t = terms.iter().min_by(|a, b| a.exponent.total_cmp(&b.exponent)).unwrap();
    t.coef * t.scale.powf(t.exponent)
}

#[test]
fn ber_asymptote_scales_with_diversity_order() {
    for (h1, h2, r) in
        [("egg_a", "egg_b", 1), ("egg_a", "egg_b", 2), ("egg_b", "egg_a", 2), ("pure_exp", "pure_exp", 1)]
    {
        let lo = relay(h1, h2, r, 60.0);
        let hi = relay(h1, h2, r, 70.0);
        let drop = dominant_term(&lo) / dominant_term(&hi);
        let want = 10f64.powf(diversity_order(&lo));
        assert!(rel_err(drop, want) < 0.05, "{h1}/{h2} r={r}: {drop} vs {want}");
    }
}

#[test]
fn ber_asymptote_tracks_exact() {
    let bpsk = ModulationScheme::bpsk();
    for (h1, h2) in [("egg_a", "egg_b"), ("pure_exp", "pure_exp")] {
        let mut x = 20.0;
        let (exact, asym) = loop {
            let rc = relay(h1, h2, 1, x);
            let exact = average_ber_exact(&rc, &bpsk).unwrap();
            if exact <= 1e-3 {
                break (exact, average_ber_asymptotic(&rc, &bpsk).unwrap());
            }
            x += 5.0;
        };
        assert!((asym / exact - 1.0).abs() < 0.05, "{h1}/{h2} at {x} dB: exact {exact:e}, asymptote {asym:e}");
    }
}

#[test]
fn capacity_examples() {
    let rc = relay("pure_exp", "pure_exp", 1, 20.0);
    let got = ergodic_capacity(&rc).unwrap();
    assert!(rel_err(got, oracle("capacity_exp_r1_20db")) < 1e-8);
    let (mc, _) = conditional_mc(&rc, 1_000_000, 43, |g| g.ln_1p());
    assert!(rel_err(got, mc) < 0.005, "{got} vs {mc}");

    let rc = relay("egg_a", "egg_b", 2, 30.0);
    let got = ergodic_capacity(&rc).unwrap();
    assert!(rel_err(got, oracle("capacity_ab_r2_30db")) < 1e-8);
    let tau = std::f64::consts::E / (2.0 * std::f64::consts::PI);
    assert_eq!(capacity_tau(&rc), tau);
    let (mc, _) = conditional_mc(&rc, 1_000_000, 44, |g| (tau * g).ln_1p());
    assert!(rel_err(got, mc) < 0.005, "{got} vs {mc}");

    let tiny = ergodic_capacity(&relay("egg_a", "egg_b", 1, -60.0)).unwrap();
    assert!((0.0..1e-5).contains(&tiny), "{tiny}");
}

#[test]
fn capacity_concave_in_linear_mu() {
    for r in [1, 2] {
        let values: Vec<f64> = (1..=10)
            .map(|k| ergodic_capacity(&relay("egg_a", "egg_b", r, 10.0 * (100.0 * k as f64).log10())).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
        for w in values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-3, "r={r}: {values:?}");
        }
    }
}

#[test]
fn capacity_monotone_and_concave_on_db_grid() {
    for r in [1, 2] {
        let values: Vec<f64> =
            (0..10).map(|k| ergodic_capacity(&relay("egg_a", "egg_b", r, 5.0 * k as f64)).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
        for w in values.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-3, "r={r}: {values:?}");
        }
    }
}
