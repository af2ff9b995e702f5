mod common;

use common::rel_err;
use uwoc_relay::egg_channel::{Detection, HopConfig};
use uwoc_relay::fixtures;
use uwoc_relay::metrics::{average_ber_exact, conditional_ber, ergodic_capacity, ModulationScheme};
use uwoc_relay::monte_carlo::*;
use uwoc_relay::relay_chain::{e2e_cdf, e2e_moment, RelayConfig};

fn relay(h1: &str, h2: &str, r: u8, mu_db: f64) -> RelayConfig {
    let mu = 10f64.powf(mu_db / 10.0);
    let hop = |n: &str| HopConfig::new(fixtures::params(n).unwrap(), Detection::try_from(r).unwrap(), mu).unwrap();
    RelayConfig::new(hop(h1), hop(h2)).unwrap()
}

#[test]
fn outage_trivial_thresholds() {
    let rc = relay("egg_a", "egg_b", 2, 20.0);
    let lo = simulate_outage(&rc, 0.0, 20_000, 1).unwrap();
    assert_eq!((lo.estimate, lo.std_error), (0.0, 0.0));
    let hi = simulate_outage(&rc, f64::INFINITY, 20_000, 1).unwrap();
    assert_eq!((hi.estimate, hi.std_error), (1.0, 0.0));
    assert_eq!(hi.n_samples, 20_000);
    assert!(simulate_outage(&rc, 1.0, 9_999, 1).is_err());
}

#[test]
fn outage_matches_closed_form_at_ten_million() {
    let rc = relay("egg_a", "egg_b", 2, 30.0);
    let mc = simulate_outage(&rc, 1.0, 10_000_000, 2024).unwrap();
    let exact = e2e_cdf(&rc, 1.0).unwrap();
    assert!(mc.z_score(exact) < 3.0, "{exact} vs {mc:?}");
}

#[test]
fn degenerate_source_hooks() {
    let zero = SnrSource::constant(0.0);
    for m in [ModulationScheme::bpsk(), ModulationScheme::qam(16).unwrap()] {
        let r = simulate_ber_from(&zero, &m, 10_000, 3).unwrap();
        assert_eq!(r.estimate, conditional_ber(&m, 0.0));
        assert_eq!(r.std_error, 0.0);
    }
    assert_eq!(simulate_capacity_from(&zero, 1.0, 10_000, 3).unwrap().estimate, 0.0);
    assert_eq!(simulate_moment_from(&SnrSource::constant(2.0), 3, 10_000, 3).unwrap().estimate, 8.0);
}

#[test]
fn ber_matches_closed_form() {
    let rc = relay("pure_exp", "pure_exp", 1, 20.0);
    let m = ModulationScheme::bpsk();
    let mc = simulate_ber(&rc, &m, 2_000_000, 5).unwrap();
    let exact = average_ber_exact(&rc, &m).unwrap();
    assert!(rel_err(mc.estimate, exact) < 0.02, "{exact} vs {mc:?}");
}

#[test]
fn standard_error_follows_clt_scaling() {
    let rc = relay("egg_a", "egg_b", 1, 20.0);
    let m = ModulationScheme::bpsk();
    let full = simulate_ber(&rc, &m, 400_000, 6).unwrap();
    let half = simulate_ber(&rc, &m, 200_000, 6).unwrap();
    assert!(rel_err(half.std_error / full.std_error, 2f64.sqrt()) < 0.2);
    for seed in [7, 8, 9] {
        let quarter = simulate_capacity(&rc, 100_000, seed).unwrap();
        let four = simulate_capacity(&rc, 400_000, seed + 100).unwrap();
        assert!(rel_err(quarter.std_error / four.std_error, 2.0) < 0.25);
    }
}

#[test]
fn moment_and_capacity_match_closed_form() {
    let rc = relay("pure_exp", "pure_exp", 1, 10.0);
    let mc = simulate_moment(&rc, 1, 2_000_000, 10).unwrap();
    let exact = e2e_moment(&rc, 1).unwrap();
    assert!(rel_err(mc.estimate, exact) < 0.01, "{exact} vs {mc:?}");

    for (h1, h2, r) in [("pure_exp", "pure_exp", 1), ("egg_a", "egg_b", 2)] {
        let rc = relay(h1, h2, r, 20.0);
        let mc = simulate_capacity(&rc, 2_000_000, 11).unwrap();
        let exact = ergodic_capacity(&rc).unwrap();
        assert!(rel_err(mc.estimate, exact) < 0.005, "{exact} vs {mc:?}");
    }
}

#[test]
fn replay_is_independent_of_thread_count() {
    let rc = relay("egg_b", "egg_a", 2, 25.0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_capacity(&rc, 300_001, 77).unwrap())
    };
    let one = run(1);
    for threads in [2, 5] {
        let other = run(threads);
        assert_eq!(one.estimate.to_bits(), other.estimate.to_bits());
        assert_eq!(one.std_error.to_bits(), other.std_error.to_bits());
    }
    let again = simulate_capacity(&rc, 300_001, 77).unwrap();
    assert_eq!(one.estimate, again.estimate);
    assert_ne!(one.estimate, simulate_capacity(&rc, 300_001, 78).unwrap().estimate);
}

#[test]
fn report_roundtrips_through_json() {
    let r = simulate_outage(&relay("egg_a", "egg_b", 1, 10.0), 1.0, 10_000, 12).unwrap();
    let back: SimulationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(r, back);
}
