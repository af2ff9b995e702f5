"""Quick end-to-end check of the Python bindings."""

import math

import uwoc_relay as ur


def main():
    a = ur.EggParams.fixture("egg_a")
    b = ur.EggParams.fixture("egg_b")
    assert sorted(ur.EggParams.fixture_names()) == ["egg_a", "egg_b", "pure_exp", "pure_gg"]
    assert a.mean() > 0 and abs(a.moment(1.0) - a.mean()) < 1e-12 * a.mean()
    print(a, "normalized variance", round(a.normalized_variance(), 4))

    mu = ur.db_to_linear(20.0)
    relay = ur.Relay(ur.Hop(a, 2, mu), ur.Hop(b, 2, mu))
    print(relay, "diversity order", relay.diversity_order())

    gth = ur.db_to_linear(10.0)
    exact = relay.outage(gth)
    mc = relay.simulate_outage(gth, n=500_000, seed=7)
    print("outage", exact, mc)
    assert abs(exact - mc.estimate) < 4 * mc.std_error

    ber = relay.ber("ook")
    mc_ber = relay.simulate_ber("ook", n=500_000, seed=7)
    print("ber ook", ber, mc_ber)
    assert abs(ber - mc_ber.estimate) < 4 * mc_ber.std_error

    cap = relay.capacity()
    mc_cap = relay.simulate_capacity(n=200_000, seed=3)
    print("capacity [nats]", cap, mc_cap)
    assert abs(cap - mc_cap.estimate) < 4 * mc_cap.std_error

    m1 = relay.moment(1)
    assert math.isfinite(m1) and m1 > 0
    assert relay.amount_of_fading(2) > 0
    assert 0.0 <= relay.cdf(gth) <= 1.0 and relay.pdf(gth) >= 0.0

    assert "bpsk" in ur.modulations()
    assert abs(ur.conditional_ber("bpsk", 4.0) - 0.5 * math.erfc(2.0)) < 1e-12
    assert ur.combine_snr(2.0, 3.0, 1.0) == 1.5

    try:
        ur.EggParams(1.5, 0.3, 1.0, 1.0, 1.0)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("omega > 1 accepted")

    gg = ur.EggParams.fixture("pure_gg")
    try:
        ur.Relay(ur.Hop(gg, 1, 100.0), ur.Hop(gg, 1, 100.0)).cdf_asymptotic(1.0)
    except ur.ParameterDegenerateError as e:
        print("degenerate:", e)
    print("smoke test passed")


if __name__ == "__main__":
    main()
