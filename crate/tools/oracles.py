"""Reference values computed independently of the Rust code.

Every value here comes from real-axis quadrature (scipy / mpmath) over the
irradiance densities, or from a numpy Monte-Carlo run. The output is frozen into
crates/core/tests/data/oracles.json and read by the Rust test-suite.

    python3 tools/oracles.py
"""

import json
import math
import pathlib

import mpmath
import numpy as np
from scipy import integrate, special

FIXTURES = {
    "egg_a": dict(omega=0.25, lam=0.45, a=1.80, b=0.65, c=1.20),
    "egg_b": dict(omega=0.45, lam=0.30, a=1.20, b=0.50, c=0.90),
    "pure_exp": dict(omega=1.0, lam=1.0, a=1.0, b=1.0, c=1.0),
    "pure_gg": dict(omega=0.0, lam=1.0, a=2.0, b=0.55, c=1.5),
}

QUAD = dict(limit=800, epsabs=0.0, epsrel=1e-12)


def quad_log(g, lo=-60.0, hi=8.0):
    """Integral of g(x) dx over (0, inf), computed in v = ln x."""
    pts = np.linspace(lo, hi, 35)
    total = 0.0
    for v0, v1 in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda v: g(math.exp(v)) * math.exp(v), v0, v1, **QUAD)
        total += val
    return total


def pdf_i(p, x):
    out = 0.0
    if p["omega"] > 0:
        out += p["omega"] / p["lam"] * math.exp(-x / p["lam"])
    if p["omega"] < 1:
        a, b, c = p["a"], p["b"], p["c"]
        out += (1 - p["omega"]) * c * x ** (a * c - 1) * math.exp(-((x / b) ** c)) / (b ** (a * c) * math.gamma(a))
    return out


def moment_i(p, k):
    out = 0.0
    if p["omega"] > 0:
        out += p["omega"] * p["lam"] ** k * math.gamma(1 + k)
    if p["omega"] < 1:
        out += (1 - p["omega"]) * p["b"] ** k * math.gamma(p["a"] + k / p["c"]) / math.gamma(p["a"])
    return out


def survival_snr(p, r, mu, z):
    x = (z / mu) ** (1.0 / r)
    out = 0.0
    if p["omega"] > 0:
        out += p["omega"] * math.exp(-x / p["lam"])
    if p["omega"] < 1:
        out += (1 - p["omega"]) * special.gammaincc(p["a"], (x / p["b"]) ** p["c"])
    return out


def pdf_snr(p, r, mu, z):
    x = (z / mu) ** (1.0 / r)
    return pdf_i(p, x) * x / (r * z)


def gain_constant(p, r, mu):
    e = quad_log(lambda x: pdf_i(p, x) / (1.0 + mu * x**r))
    return 1.0 / e, e


class Relay:
    def __init__(self, h1, r1, mu1, h2, r2, mu2, c=None):
        self.h1, self.r1, self.mu1 = FIXTURES[h1], r1, mu1
        self.h2, self.r2, self.mu2 = FIXTURES[h2], r2, mu2
        self.c = gain_constant(self.h1, r1, mu1)[0] if c is None else c

    def cdf(self, g):
        inner = lambda x: survival_snr(self.h1, self.r1, self.mu1, g * (1 + self.c / (self.mu2 * x**self.r2))) * pdf_i(self.h2, x)
        return 1.0 - quad_log(inner)

    def pdf(self, g):
        def inner(x):
            z2 = self.mu2 * x**self.r2
            k = 1 + self.c / z2
            return pdf_snr(self.h1, self.r1, self.mu1, g * k) * k * pdf_i(self.h2, x)

        return quad_log(inner)

    def moment(self, n):
        e1 = self.mu1**n * moment_i(self.h1, self.r1 * n)
        e2 = quad_log(lambda x: (1.0 / (1.0 + self.c / (self.mu2 * x**self.r2))) ** n * pdf_i(self.h2, x))
        return e1 * e2

    def expect(self, fn):
        """E[fn(gamma)] as a nested integral over the two irradiances."""

        def outer(x2):
            u = 1.0 / (1.0 + self.c / (self.mu2 * x2**self.r2))
            return quad_log(lambda x1: fn(self.mu1 * x1**self.r1 * u) * pdf_i(self.h1, x1), -40.0, 6.0) * pdf_i(self.h2, x2)

        return quad_log(outer, -40.0, 6.0)

    def sample(self, rng, n):
        i1 = sample_i(self.h1, rng, n)
        i2 = sample_i(self.h2, rng, n)
        g1 = self.mu1 * i1**self.r1
        g2 = self.mu2 * i2**self.r2
        return g1 * g2 / (g2 + self.c)


def sample_i(p, rng, n):
    exp_draw = rng.exponential(p["lam"], n)
    gg_draw = p["b"] * rng.gamma(p["a"], 1.0, n) ** (1.0 / p["c"])
    pick = rng.random(n) < p["omega"]
    return np.where(pick, exp_draw, gg_draw)


def mc_fraction(samples, thr):
    est = float(np.mean(samples <= thr))
    return est, math.sqrt(est * (1 - est) / samples.size)


def mc_mean(values):
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(values.size))


def q_ber(p, q, g):
    return special.gammaincc(p, q * g)


def main():
    rng = np.random.default_rng(20240611)
    out = {}

    # Mellin-Barnes engine
    out["gain_term_exp_r1_mu10"] = quad_log(lambda u: math.exp(-u) / (1 + 10 * u))
    out["gain_term_exp_r1_mu10_closed"] = float(0.1 * math.exp(0.1) * special.exp1(0.1))
    out["meijer_g20_02_a2_x1"] = float(mpmath.meijerg([[], []], [[2, 0], []], 1))
    out["meijer_g20_02_a2_x1_integral"] = quad_log(lambda t: t * math.exp(-t - 1.0 / t))

    # Single hop
    for name, p in FIXTURES.items():
        m1, m2 = moment_i(p, 1), moment_i(p, 2)
        out[f"{name}_mean_irradiance"] = m1
        out[f"{name}_second_moment"] = m2
        out[f"{name}_si_formula"] = 2 * p["omega"] * p["lam"] ** 2 + (1 - p["omega"]) * p["b"] ** 2 * math.gamma(
            p["a"] + 2 / p["c"]
        ) / math.gamma(p["a"]) - 1
        out[f"{name}_si_empirical_exact"] = m2 / m1**2 - 1
        draws = sample_i(p, rng, 10_000_000)
        out[f"{name}_si_empirical_mc"] = float(np.var(draws) / np.mean(draws) ** 2)
    out["egg_a_pdf_at_0.5"] = pdf_i(FIXTURES["egg_a"], 0.5)
    out["egg_a_pdf_normalization"] = quad_log(lambda x: pdf_i(FIXTURES["egg_a"], x))
    out["egg_a_r2_mu100_snr_pdf_at_10"] = pdf_snr(FIXTURES["egg_a"], 2, 100.0, 10.0)
    out["egg_a_r2_mu100_snr_cdf_at_10"] = 1 - survival_snr(FIXTURES["egg_a"], 2, 100.0, 10.0)
    snr = 100.0 * sample_i(FIXTURES["egg_a"], rng, 10_000_000) ** 2
    out["egg_a_r2_mu100_snr_cdf_at_10_mc"] = mc_fraction(snr, 10.0)
    lo, hi = 9.5, 10.5
    frac = float(np.mean((snr > lo) & (snr <= hi)))
    out["egg_a_r2_mu100_snr_pdf_at_10_mc"] = [frac / (hi - lo), math.sqrt(frac * (1 - frac) / snr.size) / (hi - lo)]

    # Gain constant
    out["gain_exp_r1_mu10"] = gain_constant(FIXTURES["pure_exp"], 1, 10.0)[0]
    out["gain_exp_r1_mu1"] = gain_constant(FIXTURES["pure_exp"], 1, 1.0)[0]
    out["gain_exp_r1_mu1_expectation"] = gain_constant(FIXTURES["pure_exp"], 1, 1.0)[1]
    out["gain_egg_a_r2_mu100"] = gain_constant(FIXTURES["egg_a"], 2, 100.0)[0]
    out["gain_egg_b_r2_mu1000"] = gain_constant(FIXTURES["egg_b"], 2, 1000.0)[0]

    # End-to-end CDF / PDF
    exp_pair = Relay("pure_exp", 1, 20.0, "pure_exp", 1, 20.0)
    ab_r2 = Relay("egg_a", 2, 1e3, "egg_b", 2, 1e3)
    ab_r1 = Relay("egg_a", 1, 100.0, "egg_b", 1, 100.0)
    gg_pair = Relay("pure_gg", 2, 1e3, "pure_gg", 2, 1e3)
    out["gain_egg_a_r2_mu1000"] = ab_r2.c
    out["gain_egg_a_r1_mu100"] = ab_r1.c
    out["e2e_cdf_exp_r1_mu20_at_5"] = exp_pair.cdf(5.0)
    out["e2e_cdf_exp_r1_mu20_at_5_mc"] = mc_fraction(exp_pair.sample(rng, 10_000_000), 5.0)
    out["e2e_cdf_ab_r2_mu1e3_at_1"] = ab_r2.cdf(1.0)
    out["e2e_cdf_ab_r2_mu1e3_at_1_mc"] = mc_fraction(ab_r2.sample(rng, 10_000_000), 1.0)
    grid = [0.01, 0.1, 1.0, 10.0, 100.0]
    out["e2e_cdf_grid_points"] = grid
    out["e2e_cdf_ab_r2_mu1e3_grid"] = [ab_r2.cdf(g) for g in grid]
    out["e2e_cdf_ab_r1_mu100_grid"] = [ab_r1.cdf(g) for g in grid]
    out["e2e_cdf_gg_r2_mu1e3_grid"] = [gg_pair.cdf(g) for g in grid]
    out["e2e_pdf_ab_r2_mu1e3_grid"] = [ab_r2.pdf(g) for g in grid]

    # Moments
    exp_mom = Relay("pure_exp", 1, 10.0, "pure_exp", 1, 10.0)
    ab_mom = Relay("egg_a", 1, 10.0, "egg_b", 1, 10.0)
    out["moment1_exp_r1_mu10"] = exp_mom.moment(1)
    out["moment2_exp_r1_mu10"] = exp_mom.moment(2)
    out["moment1_ab_r1_mu10"] = ab_mom.moment(1)
    out["moment2_ab_r1_mu10"] = ab_mom.moment(2)
    s = ab_mom.sample(rng, 10_000_000)
    out["moment1_ab_r1_mu10_mc"] = mc_mean(s)
    out["moment2_ab_r1_mu10_mc"] = mc_mean(s**2)

    # BER and capacity
    exp_20db = Relay("pure_exp", 1, 100.0, "pure_exp", 1, 100.0)
    ab_30db = Relay("egg_a", 2, 1000.0, "egg_b", 2, 1000.0)
    out["ber_bpsk_exp_r1_20db"] = 0.5 * exp_20db.expect(lambda g: special.erfc(math.sqrt(g)))
    out["ber_ook_ab_r2_30db"] = 0.5 * ab_30db.expect(lambda g: special.erfc(math.sqrt(g / 4)))
    out["capacity_exp_r1_20db"] = exp_20db.expect(lambda g: math.log1p(g))
    tau = math.e / (2 * math.pi)
    out["capacity_ab_r2_30db"] = ab_30db.expect(lambda g: math.log1p(tau * g))
    out["outage_ab_r2_30db_at_1"] = ab_30db.cdf(1.0)

    path = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/data/oracles.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
