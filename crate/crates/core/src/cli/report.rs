//! Result rows for `eval` and `sweep`, and their CSV / JSON renderings.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Metric, RunConfig};
use super::CliError;
use crate::error::Error;
use crate::mellin_barnes::QuadratureSpec;
use crate::metrics::{
    average_ber_asymptotic, average_ber_exact_with, clamp_probability, ergodic_capacity_with, outage_probability_with,
    ModulationScheme,
};
use crate::monte_carlo::{self, SimulationReport};
use crate::relay_chain::{amount_of_fading_from, e2e_cdf_asymptotic, e2e_moment_with, RelayConfig};

pub const CSV_HEADER: &str = "metric,mu_dB,mu2_dB,exact,asymptotic,mc_estimate,mc_stderr,rel_gap,monotone,note";

pub const DEGENERATE: &str = "degenerate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub metric: String,
    pub mu_db: f64,
    pub mu2_db: f64,
    pub exact: Option<f64>,
    pub asymptotic: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// `(exact − mc) / mc`.
    pub rel_gap: Option<f64>,
    /// Whether the exact value moved in the expected direction from the previous sweep row.
    pub monotone: Option<bool>,
    /// `degenerate` when the asymptote does not exist; engine errors otherwise.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub command: String,
    pub metric: Metric,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation: Option<String>,
    pub gamma_th_db: f64,
    pub rows: Vec<Row>,
    /// All rows monotone, for sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
}

/// Deliberate defects used to prove that `validate` catches broken kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Flips the sign of the survival-kernel sum in the exact outage.
    WrongSignKernel,
}

struct Point {
    exact: Result<f64, Error>,
    asymptotic: Option<Result<f64, Error>>,
    mc: Option<Result<SimulationReport, Error>>,
}

fn evaluate_metric(
    metric: &str,
    rc: &RelayConfig,
    cfg: &RunConfig,
    scheme: Option<&ModulationScheme>,
    spec: &QuadratureSpec,
    fault: Option<Fault>,
) -> Point {
    let (n, seed) = (cfg.monte_carlo.samples, cfg.monte_carlo.seed);
    let mc = |f: &dyn Fn() -> Result<SimulationReport, Error>| (n > 0).then(f);
    match metric {
        "outage" => {
            let gth = cfg.gamma_th();
            let exact = outage_probability_with(rc, gth, spec).map(|f| match fault {
                Some(Fault::WrongSignKernel) => clamp_probability(2.0 - f),
                None => f,
            });
            Point {
                exact,
                asymptotic: Some(e2e_cdf_asymptotic(rc, gth)),
                mc: mc(&|| monte_carlo::simulate_outage(rc, gth, n, seed)),
            }
        }
        "ber" => {
            let m = scheme.expect("ber rows carry a scheme");
            Point {
                exact: average_ber_exact_with(rc, m, spec),
                asymptotic: Some(average_ber_asymptotic(rc, m)),
                mc: mc(&|| monte_carlo::simulate_ber(rc, m, n, seed)),
            }
        }
        "capacity" => Point {
            exact: ergodic_capacity_with(rc, spec),
            asymptotic: None,
            mc: mc(&|| monte_carlo::simulate_capacity(rc, n, seed)),
        },
        "moment1" | "moment2" => {
            let k = if metric == "moment1" { 1 } else { 2 };
            Point {
                exact: e2e_moment_with(rc, k, spec),
                asymptotic: None,
                mc: mc(&|| monte_carlo::simulate_moment(rc, k, n, seed)),
            }
        }
        "af2" => {
            Point { exact: amount_of_fading_from(|k| e2e_moment_with(rc, k, spec), 2), asymptotic: None, mc: None }
        }
        other => unreachable!("unknown row metric {other}"),
    }
}

fn row_metrics(metric: Metric) -> &'static [&'static str] {
    match metric {
        Metric::Outage => &["outage"],
        Metric::Ber => &["ber"],
        Metric::Capacity => &["capacity"],
        Metric::Moments => &["moment1", "moment2", "af2"],
    }
}

fn build_rows(
    cfg: &RunConfig,
    db1: f64,
    db2: f64,
    scheme: Option<&ModulationScheme>,
    fault: Option<Fault>,
) -> Result<Vec<Row>, CliError> {
    let rc = cfg.relay_at(db1, db2)?;
    let spec = cfg.quadrature.spec();
    let rows = row_metrics(cfg.metric)
        .iter()
        .map(|&name| {
            let p = evaluate_metric(name, &rc, cfg, scheme, &spec, fault);
            let mut notes = Vec::new();
            let exact = p.exact.map_err(|e| notes.push(format!("exact: {e}"))).ok();
            let asymptotic = match p.asymptotic {
                None => None,
                Some(Ok(v)) => Some(v),
                Some(Err(Error::ParameterDegenerate(_))) => {
                    notes.push(DEGENERATE.to_string());
                    None
                }
                Some(Err(e)) => {
                    notes.push(format!("asymptotic: {e}"));
                    None
                }
            };
            let mc = p.mc.and_then(|r| r.map_err(|e| notes.push(format!("mc: {e}"))).ok());
            let rel_gap = match (exact, &mc) {
                (Some(x), Some(m)) if m.estimate != 0.0 => Some((x - m.estimate) / m.estimate),
                _ => None,
            };
            Row {
                metric: name.to_string(),
                mu_db: db1,
                mu2_db: db2,
                exact,
                asymptotic,
                mc_estimate: mc.as_ref().map(|m| m.estimate),
                mc_stderr: mc.as_ref().map(|m| m.std_error),
                rel_gap,
                monotone: None,
                note: notes.join("; "),
            }
        })
        .collect();
    Ok(rows)
}

fn scheme_for(cfg: &RunConfig) -> Result<Option<ModulationScheme>, CliError> {
    match cfg.metric {
        Metric::Ber => cfg.modulation_scheme().map(Some),
        _ => Ok(None),
    }
}

/// One row per metric at the configured point.
pub fn cmd_eval(cfg: &RunConfig, fault: Option<Fault>) -> Result<Table, CliError> {
    cfg.validate()?;
    let scheme = scheme_for(cfg)?;
    let (db1, db2) = cfg.point_db();
    Ok(Table {
        command: "eval".into(),
        metric: cfg.metric,
        modulation: scheme.as_ref().map(|m| m.name.clone()),
        gamma_th_db: cfg.gamma_th_db,
        rows: build_rows(cfg, db1, db2, scheme.as_ref(), fault)?,
        monotone: None,
    })
}

fn is_monotone(decreasing: bool, prev: f64, cur: f64) -> bool {
    let slack = 1e-12 * prev.abs().max(cur.abs()) + 1e-15;
    if decreasing {
        cur <= prev + slack
    } else {
        cur >= prev - slack
    }
}

/// The metric over the sweep grid (hop 1 on the grid, hop 2 offset by `mu2_offset_db`).
pub fn cmd_sweep(cfg: &RunConfig, fault: Option<Fault>) -> Result<Table, CliError> {
    cfg.validate()?;
    let scheme = scheme_for(cfg)?;
    let blocks: Vec<Vec<Row>> = cfg
        .sweep
        .points()
        .into_par_iter()
        .map(|x| build_rows(cfg, x, x + cfg.mu2_offset_db, scheme.as_ref(), fault))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<Row> = blocks.into_iter().flatten().collect();
    let mut all = true;
    for name in row_metrics(cfg.metric) {
        let decreasing = cfg.metric.decreasing();
        let mut prev: Option<f64> = None;
        for row in rows.iter_mut().filter(|r| r.metric == *name) {
            let ok = match (prev, row.exact) {
                (Some(p), Some(c)) => is_monotone(decreasing, p, c),
                (_, None) => false,
                (None, Some(_)) => true,
            };
            if *name != "af2" {
                all &= ok;
                row.monotone = Some(ok);
            }
            prev = row.exact.or(prev);
        }
    }
    Ok(Table {
        command: "sweep".into(),
        metric: cfg.metric,
        modulation: scheme.as_ref().map(|m| m.name.clone()),
        gamma_th_db: cfg.gamma_th_db,
        rows,
        monotone: Some(all),
    })
}

/// `%g`-style formatting with `digits` significant figures.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    let trim = |m: &str| {
        if m.contains('.') {
            m.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            m.to_string()
        }
    };
    if (-4..digits as i32).contains(&e) {
        let decimals = (digits as i32 - 1 - e) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim(mantissa), if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format_sig(x, 6)).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let asymptotic = match r.asymptotic {
                Some(v) => format_sig(v, 6),
                None if r.note.split("; ").any(|n| n == DEGENERATE) => DEGENERATE.into(),
                None => String::new(),
            };
            let monotone = r.monotone.map(|m| m.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.metric,
                format_sig(r.mu_db, 6),
                format_sig(r.mu2_db, 6),
                cell(r.exact),
                asymptotic,
                cell(r.mc_estimate),
                cell(r.mc_stderr),
                cell(r.rel_gap),
                monotone,
                quote(&r.note)
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}
