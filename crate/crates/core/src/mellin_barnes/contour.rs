use num_complex::Complex64;

use crate::error::{Error, Result};

use super::gamma::ln_gamma_unchecked;
use super::kernel::GammaFactor;

/// Largest pole clearance the automatic contour aims for.
pub(crate) const MARGIN_CAP: f64 = 0.25;
const MIN_MARGIN: f64 = 1e-10;
const ON_POLE: f64 = 1e-9;
const BOX: f64 = 1e4;

/// Vertical contours `Re s = s`, `Re t = t` and their clearance from the nearest pole,
/// measured in units of each variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub s: f64,
    pub t: f64,
    pub margin: f64,
}

/// Linear constraint `a·s + b·t + c ≥ margin·scale` from one numerator factor.
#[derive(Debug, Clone, Copy)]
struct Constraint {
    a: f64,
    b: f64,
    c: f64,
    scale: f64,
}

fn constraints(factors: &[GammaFactor]) -> Vec<Constraint> {
    factors
        .iter()
        .filter(|f| f.is_numerator() && !f.is_constant())
        .map(|f| Constraint { a: f.coeff_s, b: f.coeff_t, c: f.constant, scale: f.coeff_s.abs().max(f.coeff_t.abs()) })
        .collect()
}

/// Clearance of a given contour: the smallest scaled distance to a numerator pole.
pub(crate) fn margin_at(factors: &[GammaFactor], s: f64, t: f64) -> f64 {
    constraints(factors).iter().map(|k| (k.a * s + k.b * t + k.c) / k.scale).fold(f64::INFINITY, f64::min)
}

/// Picks the contour that maximizes the pole clearance (capped), taking the centroid of
/// the optimal face so that the choice is the middle of the widest pole-free strip.
pub(crate) fn auto_contour(factors: &[GammaFactor], bivariate: bool) -> Result<Contour> {
    let cons = constraints(factors);
    // Rows as [a, b, -scale | rhs] meaning a·s + b·t − scale·m ≥ −c.
    let mut rows: Vec<([f64; 3], f64)> = cons.iter().map(|k| ([k.a, k.b, -k.scale], -k.c)).collect();
    rows.push(([0.0, 0.0, -1.0], -MARGIN_CAP));
    rows.push(([1.0, 0.0, 0.0], -BOX));
    rows.push(([-1.0, 0.0, 0.0], -BOX));
    if bivariate {
        rows.push(([0.0, 1.0, 0.0], -BOX));
        rows.push(([0.0, -1.0, 0.0], -BOX));
    }
    let feasible = |p: &[f64; 3]| rows.iter().all(|(r, rhs)| r[0] * p[0] + r[1] * p[1] + r[2] * p[2] >= rhs - 1e-9);

    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let n = rows.len();
    if bivariate {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let m = [rows[i].0, rows[j].0, rows[k].0];
                    let rhs = [rows[i].1, rows[j].1, rows[k].1];
                    if let Some(p) = solve3(m, rhs) {
                        if feasible(&p) {
                            vertices.push(p);
                        }
                    }
                }
            }
        }
    } else {
        for i in 0..n {
            for j in (i + 1)..n {
                let (r1, r2) = (rows[i].0, rows[j].0);
                let det = r1[0] * r2[2] - r1[2] * r2[0];
                if det.abs() < 1e-14 {
                    continue;
                }
                let s = (rows[i].1 * r2[2] - r1[2] * rows[j].1) / det;
                let m = (r1[0] * rows[j].1 - rows[i].1 * r2[0]) / det;
                let p = [s, 0.0, m];
                if feasible(&p) {
                    vertices.push(p);
                }
            }
        }
    }

    let best = vertices.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
    if !(best > MIN_MARGIN) {
        return Err(Error::NonSeparable(format!("widest pole-free strip has clearance {best:.3e}")));
    }
    // Among maximal-clearance points prefer the ones hugging the pole families, so a
    // one-sided strip does not push the contour far away; ties keep the strip middle.
    let slack = |p: &[f64; 3]| cons.iter().map(|k| k.a * p[0] + k.b * p[1] + k.c - k.scale * p[2]).sum::<f64>();
    let optimal: Vec<&[f64; 3]> = vertices.iter().filter(|p| p[2] >= best - 1e-9).collect();
    let least = optimal.iter().map(|p| slack(p)).fold(f64::INFINITY, f64::min);
    let face: Vec<&[f64; 3]> = optimal.into_iter().filter(|p| slack(p) <= least + 1e-9 * (1.0 + least.abs())).collect();
    let count = face.len() as f64;
    let s = face.iter().map(|p| p[0]).sum::<f64>() / count;
    let t = if bivariate { face.iter().map(|p| p[1]).sum::<f64>() / count } else { 0.0 };
    let margin = margin_at(factors, s, t).min(MARGIN_CAP);
    if !(margin > MIN_MARGIN) {
        return Err(Error::NonSeparable(format!("centroid contour has clearance {margin:.3e}")));
    }
    Ok(Contour { s, t, margin })
}

/// Applies user overrides if present; contours lying on a pole are nudged to the
/// automatic choice, contours crossing poles are rejected.
pub(crate) fn choose_contour(
    factors: &[GammaFactor],
    bivariate: bool,
    s_override: Option<f64>,
    t_override: Option<f64>,
) -> Result<Contour> {
    if s_override.is_none() && (t_override.is_none() || !bivariate) {
        return auto_contour(factors, bivariate);
    }
    let auto = auto_contour(factors, bivariate);
    let s = match (s_override, &auto) {
        (Some(s), _) => s,
        (None, Ok(c)) => c.s,
        (None, Err(e)) => return Err(e.clone()),
    };
    let t = if bivariate {
        match (t_override, &auto) {
            (Some(t), _) => t,
            (None, Ok(c)) => c.t,
            (None, Err(e)) => return Err(e.clone()),
        }
    } else {
        0.0
    };
    let margin = margin_at(factors, s, t);
    if margin < -ON_POLE {
        return Err(Error::NonSeparable(format!(
            "contour Re s = {s}, Re t = {t} crosses a pole family (clearance {margin:.3e})"
        )));
    }
    if margin <= ON_POLE {
        return auto;
    }
    Ok(Contour { s, t, margin: margin.min(MARGIN_CAP) })
}

/// Probe points `(Im s, Im t)` used to gauge the integrand size along a contour.
const PROBES: [(f64, f64); 6] = [(0.7, 0.0), (0.0, 0.7), (0.7, 0.7), (0.7, -0.7), (2.0, 0.0), (0.0, 2.0)];
const SEARCH_RADIUS: f64 = 30.0;
const LINE_SAMPLES: usize = 48;

/// Log of a rough size measure of the integrand on the contour through `(s, t)`.
fn log_size(factors: &[GammaFactor], s: f64, t: f64, ln_x: f64, ln_y: f64, bivariate: bool) -> f64 {
    let probes: &[(f64, f64)] = if bivariate { &PROBES } else { &PROBES[..1] };
    let logs: Vec<f64> = probes
        .iter()
        .chain(if bivariate { [].iter() } else { [(2.0, 0.0)].iter() })
        .map(|&(ys, yt)| {
            let mut acc = s * ln_x + t * ln_y;
            for f in factors {
                let z = Complex64::new(f.constant + f.coeff_s * s + f.coeff_t * t, f.coeff_s * ys + f.coeff_t * yt);
                let v = ln_gamma_unchecked(z).re;
                acc += if f.is_numerator() { v } else { -v };
            }
            acc
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

/// Slides the contour inside the region of full pole clearance towards the saddle of the
/// integrand, which limits cancellation when the integral is much smaller than its integrand.
pub(crate) fn refine_contour(
    factors: &[GammaFactor],
    start: Contour,
    ln_x: f64,
    ln_y: f64,
    bivariate: bool,
) -> Contour {
    let cons = constraints(factors);
    let need = start.margin;
    let feasible_interval = |p: (f64, f64), d: (f64, f64)| -> (f64, f64) {
        let (mut lo, mut hi) = (-SEARCH_RADIUS, SEARCH_RADIUS);
        for k in &cons {
            // k.a (s + u dx) + k.b (t + u dy) + k.c ≥ need·scale
            let slope = k.a * d.0 + k.b * d.1;
            let room = k.a * p.0 + k.b * p.1 + k.c - need * k.scale;
            if slope.abs() < 1e-15 {
                continue;
            }
            let bound = -room / slope;
            if slope > 0.0 {
                lo = lo.max(bound);
            } else {
                hi = hi.min(bound);
            }
        }
        // keep the walk within a box around the starting contour
        for (coord, dir, origin) in [(p.0, d.0, start.s), (p.1, d.1, start.t)] {
            if dir.abs() > 1e-15 {
                let a = (origin - SEARCH_RADIUS - coord) / dir;
                let b = (origin + SEARCH_RADIUS - coord) / dir;
                lo = lo.max(a.min(b));
                hi = hi.min(a.max(b));
            }
        }
        (lo.min(0.0), hi.max(0.0))
    };
    let phi = |p: (f64, f64)| log_size(factors, p.0, p.1, ln_x, ln_y, bivariate);
    let dirs: &[(f64, f64)] =
        if bivariate { &[(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)] } else { &[(1.0, 0.0)] };
    let mut p = (start.s, if bivariate { start.t } else { 0.0 });
    let mut best = phi(p);
    for _ in 0..3 {
        for &d in dirs {
            let (lo, hi) = feasible_interval(p, d);
            if hi - lo < 1e-9 {
                continue;
            }
            let at = |u: f64| (p.0 + u * d.0, p.1 + u * d.1);
            let mut u_best = 0.0;
            let mut v_best = best;
            for k in 0..=LINE_SAMPLES {
                let u = lo + (hi - lo) * k as f64 / LINE_SAMPLES as f64;
                let v = phi(at(u));
                if v < v_best {
                    v_best = v;
                    u_best = u;
                }
            }
            // golden-section polish inside the bracketing cell
            let cell = (hi - lo) / LINE_SAMPLES as f64;
            let (mut a, mut b) = ((u_best - cell).max(lo), (u_best + cell).min(hi));
            let g = 0.618_033_988_749_895;
            for _ in 0..30 {
                let c = b - g * (b - a);
                let e = a + g * (b - a);
                if phi(at(c)) < phi(at(e)) {
                    b = e;
                } else {
                    a = c;
                }
            }
            let u_mid = 0.5 * (a + b);
            let v_mid = phi(at(u_mid));
            if v_mid < v_best {
                u_best = u_mid;
                v_best = v_mid;
            }
            if v_best < best {
                best = v_best;
                p = at(u_best);
            }
        }
    }
    let margin = margin_at(factors, p.0, p.1).min(MARGIN_CAP);
    if margin + 1e-12 < need {
        return start;
    }
    Contour { s: p.0, t: p.1, margin: need }
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.abs() < 1e-14 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = rhs[row];
        }
        *slot = det(&mc) / d;
    }
    Some(out)
}
