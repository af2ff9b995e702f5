#![allow(dead_code)]

use std::sync::OnceLock;

use serde_json::Value;

/// Reference values frozen by `tools/oracles.py`.
pub fn oracle(key: &str) -> f64 {
    oracle_value(key).as_f64().unwrap_or_else(|| panic!("oracle {key} is not a number"))
}

/// `(estimate, standard error)` pairs from the frozen Monte-Carlo runs.
pub fn oracle_mc(key: &str) -> (f64, f64) {
    let v = oracle_value(key);
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

pub fn oracle_list(key: &str) -> Vec<f64> {
    oracle_value(key)
        .as_array()
        .unwrap_or_else(|| panic!("oracle {key} is not a list"))
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect()
}

fn oracle_value(key: &str) -> Value {
    static DATA: OnceLock<Value> = OnceLock::new();
    let data = DATA.get_or_init(|| serde_json::from_str(include_str!("../data/oracles.json")).unwrap());
    data.get(key).unwrap_or_else(|| panic!("missing oracle {key}")).clone()
}

/// `∫₀^∞ f(x) dx` by tanh-sinh quadrature on log-spaced panels.
pub fn integrate_positive_axis<F: Fn(f64) -> f64>(f: F, lo_exp: f64, hi_exp: f64, panels: usize) -> f64 {
    let edges: Vec<f64> = (0..=panels).map(|k| (lo_exp + (hi_exp - lo_exp) * k as f64 / panels as f64).exp()).collect();
    edges.windows(2).map(|w| quadrature::integrate(&f, w[0], w[1], 1e-14).integral).sum()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// `∫₀^∞ f(x) dx` by the trapezoid rule in `v = ln x`, for integrands smooth in `v`.
pub fn trapezoid_log_axis<F: Fn(f64) -> f64>(f: F, lo_exp: f64, hi_exp: f64, step: f64) -> f64 {
    let n = ((hi_exp - lo_exp) / step).ceil() as usize;
    let h = (hi_exp - lo_exp) / n as f64;
    (0..=n)
        .map(|k| {
            let v = lo_exp + h * k as f64;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * f(v.exp()) * v.exp()
        })
        .sum::<f64>()
        * h
}
