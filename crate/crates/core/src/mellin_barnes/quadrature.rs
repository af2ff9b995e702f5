use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::contour::{choose_contour, refine_contour, Contour};
use super::gamma::{is_near_pole, ln_gamma_unchecked};
use super::kernel::{roundoff_floor, Evaluation, GammaFactor, QuadratureSpec};

/// Nodes whose log-magnitude falls this far below the peak are skipped (≈ 1e-18).
const PRUNE: f64 = 41.4;
/// Fraction of the grid, measured from the edge, treated as the tail band.
const TAIL_BAND: f64 = 0.1;
const HEADROOM: f64 = 12.0;
/// Width in `ln x` of the argument groups sharing one contour in batch evaluation.
const GROUP_SPAN: f64 = 1.0;

/// Log-gamma values of one group of factors on a one-dimensional index range.
#[derive(Debug, Clone)]
struct LogTable {
    re: Vec<f64>,
    im: Vec<f64>,
    offset: i64,
}

impl LogTable {
    fn zeros(lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1) as usize;
        Self { re: vec![0.0; len], im: vec![0.0; len], offset: -lo }
    }

    fn add_factor(&mut self, base: f64, slope: f64, numerator: bool) {
        let sign = if numerator { 1.0 } else { -1.0 };
        let offset = self.offset;
        for (idx, (re, im)) in self.re.iter_mut().zip(self.im.iter_mut()).enumerate() {
            let k = idx as i64 - offset;
            let v = ln_gamma_unchecked(Complex64::new(base, slope * k as f64));
            *re += sign * v.re;
            *im += sign * v.im;
        }
    }

    fn add_power(&mut self, ln_base: f64, real_part: f64, h: f64) {
        let offset = self.offset;
        for (idx, (re, im)) in self.re.iter_mut().zip(self.im.iter_mut()).enumerate() {
            let k = idx as i64 - offset;
            *re += ln_base * real_part;
            *im += ln_base * h * k as f64;
        }
    }

    #[inline]
    fn get(&self, k: i64) -> (f64, f64) {
        let i = (k + self.offset) as usize;
        (self.re[i], self.im[i])
    }

    fn max_re(&self) -> f64 {
        self.re.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Constant factors folded into one complex log, or a hard zero from a denominator pole.
enum ConstantPart {
    Log(Complex64),
    Zero,
}

fn split_constants(factors: &[GammaFactor]) -> Result<(ConstantPart, Vec<GammaFactor>)> {
    let mut log = Complex64::new(0.0, 0.0);
    let mut varying = Vec::with_capacity(factors.len());
    for f in factors {
        f.validate()?;
        if !f.is_constant() {
            varying.push(*f);
            continue;
        }
        let z = Complex64::new(f.constant, 0.0);
        if is_near_pole(z) {
            if f.is_numerator() {
                return Err(Error::ParameterDegenerate(format!(
                    "constant numerator factor Γ({}) sits on a pole",
                    f.constant
                )));
            }
            return Ok((ConstantPart::Zero, varying));
        }
        let v = ln_gamma_unchecked(z);
        if f.is_numerator() {
            log += v;
        } else {
            log -= v;
        }
    }
    Ok((ConstantPart::Log(log), varying))
}

/// Exponential decay rate of the kernel modulus along a direction `(u, v)` of the
/// imaginary parts, from `|Γ(σ + iy)| ~ e^{−π|y|/2}`.
fn decay_along(factors: &[GammaFactor], u: f64, v: f64) -> f64 {
    factors
        .iter()
        .map(|f| {
            let w = (f.coeff_s * u + f.coeff_t * v).abs();
            if f.is_numerator() {
                w
            } else {
                -w
            }
        })
        .sum::<f64>()
        * FRAC_PI_2
}

fn min_decay(factors: &[GammaFactor], bivariate: bool) -> f64 {
    if !bivariate {
        return decay_along(factors, 1.0, 0.0);
    }
    // Piecewise linear on the edges of the unit square; check corners and kinks.
    let mut dirs: Vec<(f64, f64)> = vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)];
    for f in factors {
        if f.coeff_s != 0.0 && f.coeff_t != 0.0 {
            let v = -f.coeff_s / f.coeff_t;
            if v.abs() <= 1.0 {
                dirs.push((1.0, v));
            } else {
                dirs.push((1.0 / v, 1.0));
            }
        }
    }
    dirs.iter().map(|&(u, v)| decay_along(factors, u, v)).fold(f64::INFINITY, f64::min)
}

/// Polynomial growth exponent `Σ ±(σ − 1/2)` of the modulus on the contour.
fn algebraic_growth(factors: &[GammaFactor], contour: &Contour) -> f64 {
    factors
        .iter()
        .map(|f| {
            let sigma = f.constant + f.coeff_s * contour.s + f.coeff_t * contour.t - 0.5;
            if f.is_numerator() {
                sigma
            } else {
                -sigma
            }
        })
        .sum::<f64>()
        .max(0.0)
}

fn initial_half_width(factors: &[GammaFactor], contour: &Contour, bivariate: bool, spec: &QuadratureSpec) -> f64 {
    let kappa = min_decay(factors, bivariate);
    if kappa < 0.05 {
        return spec.half_width;
    }
    let target = (1e3 / spec.target_rel_tol).ln() + HEADROOM;
    let rho = algebraic_growth(factors, contour);
    let mut t = target / kappa;
    for _ in 0..6 {
        t = (target + rho * t.max(1.0).ln()) / kappa;
    }
    t.min(spec.half_width)
}

/// Step size: trapezoid aliasing error is about `e^{−2πd/h}` times the growth of the
/// power bases over the pole clearance `d`.
fn effective_step(spec: &QuadratureSpec, margin: f64, ln_sum: f64) -> f64 {
    let budget = (1e3 / spec.target_rel_tol).ln() + margin * ln_sum;
    spec.step.min(2.0 * PI * margin / budget)
}

#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    re: f64,
    im: f64,
    l1: f64,
    tail: f64,
}

impl Accum {
    fn merge(self, other: Accum) -> Accum {
        Accum { re: self.re + other.re, im: self.im + other.im, l1: self.l1 + other.l1, tail: self.tail + other.tail }
    }
}

#[inline]
fn accumulate(acc: &mut Accum, re: f64, im: f64, peak: f64, in_tail: bool) {
    let mag = (re - peak).exp();
    let (sin, cos) = im.sin_cos();
    acc.re += mag * cos;
    acc.im += mag * sin;
    acc.l1 += mag;
    if in_tail {
        acc.tail += mag;
    }
}

/// Turns the scaled node sums into a value, enforcing the tail and imaginary-part checks.
struct Finish {
    sum: Accum,
    log_scale: Complex64,
    prefactor: f64,
}

enum Verdict {
    Done { value: f64, imag: f64, magnitude: f64 },
    TailTooLarge { tail: f64, bound: f64 },
}

fn finish(f: Finish, tol: f64) -> Result<Verdict> {
    let scale = f.log_scale.exp() * f.prefactor;
    let z = Complex64::new(f.sum.re, f.sum.im) * scale;
    let modulus = scale.norm();
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("contour integral overflowed (scale {modulus:e})")));
    }
    let l1 = f.sum.l1 * modulus;
    let tail = f.sum.tail * modulus;
    let floor = roundoff_floor(l1);
    let tail_bound = (1e-3 * tol * z.re.abs()).max(floor);
    if tail > tail_bound {
        return Ok(Verdict::TailTooLarge { tail, bound: tail_bound });
    }
    let imag_bound = (tol * z.re.abs()).max(floor);
    if z.im.abs() > imag_bound {
        return Err(Error::ImaginaryResidual { real: z.re, imag: z.im, bound: imag_bound });
    }
    Ok(Verdict::Done { value: z.re, imag: z.im, magnitude: l1 })
}

/// A univariate integral prepared on a fixed grid; evaluates many arguments cheaply.
struct UnivariatePlan {
    table: LogTable,
    contour: Contour,
    h: f64,
    n: i64,
}

impl UnivariatePlan {
    fn new(factors: &[GammaFactor], contour: Contour, h: f64, half_width: f64) -> Self {
        let n = (half_width / h).ceil().max(4.0) as i64;
        let mut table = LogTable::zeros(-n, n);
        for f in factors {
            table.add_factor(f.constant + f.coeff_s * contour.s, f.coeff_s * h, f.is_numerator());
        }
        Self { table, contour, h, n }
    }

    fn nodes(&self) -> usize {
        (2 * self.n + 1) as usize
    }

    fn sum(&self, ln_x: f64) -> (Accum, f64) {
        let band = ((1.0 - TAIL_BAND) * self.n as f64).floor() as i64;
        let shift_re = ln_x * self.contour.s;
        let slope = ln_x * self.h;
        let peak = self.table.max_re() + shift_re;
        let mut acc = Accum::default();
        for k in -self.n..=self.n {
            let (re, im) = self.table.get(k);
            let re = re + shift_re;
            if re < peak - PRUNE {
                continue;
            }
            accumulate(&mut acc, re, im + slope * k as f64, peak, k.abs() > band);
        }
        (acc, peak)
    }
}

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Evaluates `(1/2πi) ∫ ∏Γ(·) x^s ds` for every `x` in `xs` on a shared grid.
pub(crate) fn univariate_many(factors: &[GammaFactor], xs: &[f64], spec: &QuadratureSpec) -> Result<Vec<Evaluation>> {
    spec.validate()?;
    if let Some(f) = factors.iter().find(|f| f.coeff_t != 0.0) {
        return Err(Error::InvalidParameter(format!("univariate kernel has a t-dependent factor {f:?}")));
    }
    for &x in xs {
        check_positive(x, "argument")?;
    }
    let (constant, varying) = split_constants(factors)?;
    let contour = choose_contour(&varying, false, spec.contour_abscissa_s, None)?;
    let const_log = match constant {
        ConstantPart::Zero => {
            return Ok(xs
                .iter()
                .map(|_| Evaluation {
                    value: 0.0,
                    imag_residual: 0.0,
                    magnitude: 0.0,
                    nodes: 0,
                    step: 0.0,
                    half_width: 0.0,
                    abscissa_s: contour.s,
                    abscissa_t: None,
                })
                .collect())
        }
        ConstantPart::Log(v) => v,
    };
    if spec.contour_abscissa_s.is_some() {
        return univariate_group(&varying, const_log, contour, xs, spec);
    }
    // Arguments of similar size share a contour refined for their mean log.
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out: Vec<Option<Evaluation>> = vec![None; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let first = xs[order[start]].ln();
        let mut end = start + 1;
        while end < order.len() && xs[order[end]].ln() - first <= GROUP_SPAN {
            end += 1;
        }
        let group: Vec<f64> = order[start..end].iter().map(|&i| xs[i]).collect();
        let mean_ln = group.iter().map(|x| x.ln()).sum::<f64>() / group.len() as f64;
        let refined = refine_contour(&varying, contour, mean_ln, 0.0, false);
        for (&i, e) in order[start..end].iter().zip(univariate_group(&varying, const_log, refined, &group, spec)?) {
            out[i] = Some(e);
        }
        start = end;
    }
    Ok(out.into_iter().map(|e| e.expect("every argument evaluated")).collect())
}

fn univariate_group(
    varying: &[GammaFactor],
    const_log: Complex64,
    contour: Contour,
    xs: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Evaluation>> {
    let worst_ln = xs.iter().map(|x| x.ln().abs()).fold(0.0, f64::max);
    let h = effective_step(spec, contour.margin, worst_ln);
    let mut half_width = initial_half_width(varying, &contour, false, spec);
    loop {
        let plan = UnivariatePlan::new(varying, contour, h, half_width);
        if plan.nodes() > spec.max_nodes {
            return Err(Error::NonConvergent {
                tail: f64::NAN,
                bound: f64::NAN,
                half_width,
                nodes: plan.nodes(),
                max_nodes: spec.max_nodes,
            });
        }
        let mut out = Vec::with_capacity(xs.len());
        let mut failure = None;
        for &x in xs {
            let ln_x = x.ln();
            let (sum, peak) = plan.sum(ln_x);
            let verdict = finish(
                Finish { sum, log_scale: const_log + peak + (h / (2.0 * PI)).ln(), prefactor: 1.0 },
                spec.target_rel_tol,
            )?;
            match verdict {
                Verdict::Done { value, imag, magnitude } => out.push(Evaluation {
                    value,
                    imag_residual: imag,
                    magnitude,
                    nodes: plan.nodes(),
                    step: h,
                    half_width: plan.n as f64 * h,
                    abscissa_s: contour.s,
                    abscissa_t: None,
                }),
                Verdict::TailTooLarge { tail, bound } => {
                    failure = Some((tail, bound));
                    break;
                }
            }
        }
        match failure {
            None => return Ok(out),
            Some((tail, bound)) => {
                let next = (2 * (2 * plan.n) + 1) as usize;
                if next > spec.max_nodes {
                    return Err(Error::NonConvergent {
                        tail,
                        bound,
                        half_width: plan.n as f64 * h,
                        nodes: plan.nodes(),
                        max_nodes: spec.max_nodes,
                    });
                }
                half_width = 2.0 * plan.n as f64 * h;
            }
        }
    }
}

/// Factor `Γ(c + a s + b t)` sorted by how it indexes the grid.
enum Coupling {
    Sum,
    Difference,
    General,
}

fn coupling(f: &GammaFactor) -> Coupling {
    if f.coeff_s == f.coeff_t {
        Coupling::Sum
    } else if f.coeff_s == -f.coeff_t {
        Coupling::Difference
    } else {
        Coupling::General
    }
}

struct BivariateGrid {
    s_table: LogTable,
    t_table: LogTable,
    sum_table: LogTable,
    diff_table: LogTable,
    general: Vec<GammaFactor>,
    contour: Contour,
    h: f64,
    n: i64,
}

impl BivariateGrid {
    fn new(factors: &[GammaFactor], contour: Contour, h: f64, half_width: f64, ln_x: f64, ln_y: f64) -> Self {
        let n = (half_width / h).ceil().max(4.0) as i64;
        let mut s_table = LogTable::zeros(-n, n);
        let mut t_table = LogTable::zeros(-n, n);
        let mut sum_table = LogTable::zeros(-2 * n, 2 * n);
        let mut diff_table = LogTable::zeros(-2 * n, 2 * n);
        let mut general = Vec::new();
        for f in factors {
            let base = f.constant + f.coeff_s * contour.s + f.coeff_t * contour.t;
            if f.coeff_t == 0.0 {
                s_table.add_factor(base, f.coeff_s * h, f.is_numerator());
            } else if f.coeff_s == 0.0 {
                t_table.add_factor(base, f.coeff_t * h, f.is_numerator());
            } else {
                match coupling(f) {
                    Coupling::Sum => sum_table.add_factor(base, f.coeff_s * h, f.is_numerator()),
                    Coupling::Difference => diff_table.add_factor(base, f.coeff_s * h, f.is_numerator()),
                    Coupling::General => general.push(*f),
                }
            }
        }
        s_table.add_power(ln_x, contour.s, h);
        t_table.add_power(ln_y, contour.t, h);
        Self { s_table, t_table, sum_table, diff_table, general, contour, h, n }
    }

    fn nodes(&self) -> usize {
        let side = (2 * self.n + 1) as usize;
        side * side
    }

    #[inline]
    fn node_log(&self, i: i64, j: i64) -> (f64, f64) {
        let (ar, ai) = self.s_table.get(i);
        let (br, bi) = self.t_table.get(j);
        let (cr, ci) = self.sum_table.get(i + j);
        let (dr, di) = self.diff_table.get(i - j);
        let mut re = ar + br + cr + dr;
        let mut im = ai + bi + ci + di;
        for f in &self.general {
            let z = Complex64::new(
                f.constant + f.coeff_s * self.contour.s + f.coeff_t * self.contour.t,
                self.h * (f.coeff_s * i as f64 + f.coeff_t * j as f64),
            );
            let v = ln_gamma_unchecked(z);
            if f.is_numerator() {
                re += v.re;
                im += v.im;
            } else {
                re -= v.re;
                im -= v.im;
            }
        }
        (re, im)
    }

    fn peak(&self) -> f64 {
        let n = self.n;
        let rows: Vec<f64> = (-n..=n)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::NEG_INFINITY;
                for j in -n..=n {
                    best = best.max(self.node_log(i, j).0);
                }
                best
            })
            .collect();
        rows.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    fn sum(&self, peak: f64) -> Accum {
        let n = self.n;
        let band = ((1.0 - TAIL_BAND) * n as f64).floor() as i64;
        let cutoff = peak - PRUNE;
        let t_max = self.t_table.max_re();
        let sum_max = self.sum_table.max_re();
        let diff_max = self.diff_table.max_re();
        let rows: Vec<Accum> = (-n..=n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Accum::default();
                if self.general.is_empty() && self.s_table.get(i).0 + t_max + sum_max + diff_max < cutoff {
                    return acc;
                }
                for j in -n..=n {
                    let (re, im) = self.node_log(i, j);
                    if re < cutoff {
                        continue;
                    }
                    accumulate(&mut acc, re, im, peak, i.abs() > band || j.abs() > band);
                }
                acc
            })
            .collect();
        // Fixed-order reduction keeps the result independent of the worker count.
        rows.into_iter().fold(Accum::default(), Accum::merge)
    }
}

/// Evaluates `(1/2πi)² ∬ ∏Γ(·) x^s y^t ds dt`; factors must already pair `s` with `x`.
pub(crate) fn bivariate(
    factors: &[GammaFactor],
    prefactor: f64,
    x: f64,
    y: f64,
    spec: &QuadratureSpec,
) -> Result<Evaluation> {
    spec.validate()?;
    check_positive(x, "x")?;
    check_positive(y, "y")?;
    if !prefactor.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite prefactor {prefactor}")));
    }
    let (constant, varying) = split_constants(factors)?;
    let contour = choose_contour(&varying, true, spec.contour_abscissa_s, spec.contour_abscissa_t)?;
    let const_log = match constant {
        ConstantPart::Zero => {
            return Ok(Evaluation {
                value: 0.0,
                imag_residual: 0.0,
                magnitude: 0.0,
                nodes: 0,
                step: 0.0,
                half_width: 0.0,
                abscissa_s: contour.s,
                abscissa_t: Some(contour.t),
            })
        }
        ConstantPart::Log(v) => v,
    };
    if prefactor == 0.0 {
        return Ok(Evaluation {
            value: 0.0,
            imag_residual: 0.0,
            magnitude: 0.0,
            nodes: 0,
            step: 0.0,
            half_width: 0.0,
            abscissa_s: contour.s,
            abscissa_t: Some(contour.t),
        });
    }
    let (ln_x, ln_y) = (x.ln(), y.ln());
    let contour = if spec.contour_abscissa_s.is_some() || spec.contour_abscissa_t.is_some() {
        contour
    } else {
        refine_contour(&varying, contour, ln_x, ln_y, true)
    };
    let h = effective_step(spec, contour.margin, ln_x.abs() + ln_y.abs());
    let mut half_width = initial_half_width(&varying, &contour, true, spec);
    loop {
        let grid = BivariateGrid::new(&varying, contour, h, half_width, ln_x, ln_y);
        if grid.nodes() > spec.max_nodes {
            return Err(Error::NonConvergent {
                tail: f64::NAN,
                bound: f64::NAN,
                half_width: grid.n as f64 * h,
                nodes: grid.nodes(),
                max_nodes: spec.max_nodes,
            });
        }
        let peak = grid.peak();
        let sum = grid.sum(peak);
        let verdict = finish(
            Finish { sum, log_scale: const_log + peak + 2.0 * (h / (2.0 * PI)).ln(), prefactor },
            spec.target_rel_tol,
        )?;
        match verdict {
            Verdict::Done { value, imag, magnitude } => {
                return Ok(Evaluation {
                    value,
                    imag_residual: imag,
                    magnitude,
                    nodes: grid.nodes(),
                    step: h,
                    half_width: grid.n as f64 * h,
                    abscissa_s: contour.s,
                    abscissa_t: Some(contour.t),
                })
            }
            Verdict::TailTooLarge { tail, bound } => {
                let side = (4 * grid.n + 1) as usize;
                if side * side > spec.max_nodes {
                    return Err(Error::NonConvergent {
                        tail,
                        bound,
                        half_width: grid.n as f64 * h,
                        nodes: grid.nodes(),
                        max_nodes: spec.max_nodes,
                    });
                }
                half_width = 2.0 * grid.n as f64 * h;
            }
        }
    }
}
