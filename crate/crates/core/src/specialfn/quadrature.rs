//! Adaptive Gauss–Kronrod integration over (0,1), (0,∞) and (0,∞)².
//!
//! Every integral is first mapped onto a finite interval of an auxiliary variable
//! `x ∈ [-X, X]` through the double-exponential map
//! `w(x) = (1 + tanh(π/2 · sinh x)) / 2`, which turns algebraic endpoint
//! singularities such as `w^(a-1)` into doubly-exponentially decaying tails.
//! The half-line is reached through `u = t / (1 - t)` on top of that map, and the
//! quadrant through polar-type coordinates `(u, v) = (s w, s (1 - w))`.
//! Integrands receive both `w` and `1 - w` so that neither endpoint loses precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Map used to bring `(0, ∞)` onto the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HalfLineMap {
    /// `u = t / (1 - t)`.
    #[default]
    Rational,
}

/// Accuracy contract for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panels the adaptive refinement may create.
    pub max_subdivisions: usize,
    pub transform: HalfLineMap,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            max_subdivisions: 2000,
            transform: HalfLineMap::Rational,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_subdivisions < 1 {
            return Err(Error::domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }

    fn inner(&self) -> Self {
        Self {
            rel_tol: (self.rel_tol * 0.1).max(1e-14),
            ..*self
        }
    }
}

/// An integral estimate together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980146040,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Half-width of the auxiliary interval for log-space integrands; `w(±X)` is about `1e-275` from the endpoints.
const DE_HALF_WIDTH: f64 = 6.0;
/// Narrower range for linear integrands, keeping `u` below about `1e61` so naive products do not overflow.
const DE_HALF_WIDTH_LINEAR: f64 = 4.5;
const INITIAL_PANELS: usize = 8;

struct Panel {
    a: f64,
    b: f64,
    vals: Vec<f64>,
    errs: Vec<f64>,
    splittable: bool,
}

/// 21-point Kronrod rule with embedded 10-point Gauss rule, vector valued.
fn gk21<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut Scratch) -> Result<Panel>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let Scratch { fv, kron, gauss, resabs, resasc } = scratch;
    fv.resize(21 * dim, 0.0);
    for (i, &x) in XGK.iter().enumerate() {
        if i == 10 {
            f(center, &mut fv[20 * dim..21 * dim])?;
        } else {
            f(center - half * x, &mut fv[(2 * i) * dim..(2 * i + 1) * dim])?;
            f(center + half * x, &mut fv[(2 * i + 1) * dim..(2 * i + 2) * dim])?;
        }
    }
    kron.clear();
    kron.resize(dim, 0.0);
    gauss.clear();
    gauss.resize(dim, 0.0);
    resabs.clear();
    resabs.resize(dim, 0.0);
    for d in 0..dim {
        let mut k = WGK[10] * fv[20 * dim + d];
        let mut g = 0.0;
        let mut ab = WGK[10] * fv[20 * dim + d].abs();
        for i in 0..10 {
            let f1 = fv[(2 * i) * dim + d];
            let f2 = fv[(2 * i + 1) * dim + d];
            k += WGK[i] * (f1 + f2);
            ab += WGK[i] * (f1.abs() + f2.abs());
            if i % 2 == 1 {
                g += WG[i / 2] * (f1 + f2);
            }
        }
        kron[d] = k;
        gauss[d] = g;
        resabs[d] = ab;
    }
    resasc.clear();
    resasc.resize(dim, 0.0);
    let mut vals = Vec::with_capacity(dim);
    let mut errs = Vec::with_capacity(dim);
    for d in 0..dim {
        let mean = 0.5 * kron[d];
        let mut asc = WGK[10] * (fv[20 * dim + d] - mean).abs();
        for i in 0..10 {
            asc += WGK[i] * ((fv[(2 * i) * dim + d] - mean).abs() + (fv[(2 * i + 1) * dim + d] - mean).abs());
        }
        let result = kron[d] * half;
        let resabs_d = resabs[d] * half.abs();
        let resasc_d = asc * half.abs();
        let mut err = ((kron[d] - gauss[d]) * half).abs();
        if resasc_d != 0.0 && err != 0.0 {
            err = resasc_d * (200.0 * err / resasc_d).powf(1.5).min(1.0);
        }
        if resabs_d > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs_d);
        }
        vals.push(result);
        errs.push(err);
    }
    let splittable = half.abs() > 1e-12 * center.abs().max(1e-3);
    Ok(Panel { a, b, vals, errs, splittable })
}

#[derive(Default)]
struct Scratch {
    fv: Vec<f64>,
    kron: Vec<f64>,
    gauss: Vec<f64>,
    resabs: Vec<f64>,
    resasc: Vec<f64>,
}

/// Globally adaptive vector-valued integration over a finite interval `[a, b]`.
///
/// Refinement continues until every component satisfies
/// `error ≤ max(abs_tol, rel_tol · |value|)`.
fn adaptive<F>(mut f: F, a: f64, b: f64, dim: usize, spec: &QuadratureSpec) -> Result<Vec<Estimate>>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    spec.validate()?;
    let mut scratch = Scratch::default();
    let n0 = INITIAL_PANELS.min(spec.max_subdivisions).max(1);
    let width = (b - a) / n0 as f64;
    let mut panels = Vec::with_capacity(n0 + 16);
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { a + width * (i + 1) as f64 };
        panels.push(gk21(&mut f, lo, hi, dim, &mut scratch)?);
    }
    let mut totals = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut tols = vec![0.0; dim];
    loop {
        totals.iter_mut().for_each(|t| *t = 0.0);
        errors.iter_mut().for_each(|e| *e = 0.0);
        for p in &panels {
            for d in 0..dim {
                totals[d] += p.vals[d];
                errors[d] += p.errs[d];
            }
        }
        let mut converged = true;
        for d in 0..dim {
            tols[d] = spec.abs_tol.max(spec.rel_tol * totals[d].abs());
            if !totals[d].is_finite() || !errors[d].is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite integral estimate (component {d}: {} ± {})",
                    totals[d], errors[d]
                )));
            }
            if errors[d] > tols[d] {
                converged = false;
            }
        }
        if converged {
            break;
        }
        // pick the panel contributing most to the worst relative shortfall
        let mut best = None;
        let mut best_score = 0.0;
        for (idx, p) in panels.iter().enumerate() {
            if !p.splittable {
                continue;
            }
            let mut score: f64 = 0.0;
            for d in 0..dim {
                if errors[d] > tols[d] {
                    score = score.max(p.errs[d] / tols[d].max(f64::MIN_POSITIVE));
                }
            }
            if score > best_score {
                best_score = score;
                best = Some(idx);
            }
        }
        let Some(idx) = best else {
            return Err(convergence_failure(&totals, &errors, &tols, "integrand cannot be refined further"));
        };
        if panels.len() >= spec.max_subdivisions {
            return Err(convergence_failure(&totals, &errors, &tols, "subdivision budget exhausted"));
        }
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk21(&mut f, p.a, mid, dim, &mut scratch)?);
        panels.push(gk21(&mut f, mid, p.b, dim, &mut scratch)?);
    }
    Ok(totals
        .into_iter()
        .zip(errors)
        .map(|(value, error)| Estimate { value, error })
        .collect())
}

fn convergence_failure(totals: &[f64], errors: &[f64], tols: &[f64], why: &str) -> Error {
    let worst = (0..totals.len())
        .max_by(|&i, &j| {
            (errors[i] / tols[i].max(f64::MIN_POSITIVE))
                .partial_cmp(&(errors[j] / tols[j].max(f64::MIN_POSITIVE)))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    Error::Convergence {
        message: format!("quadrature did not reach tolerance ({why})"),
        estimate: totals[worst],
        error_bound: errors[worst],
    }
}

#[inline]
fn softplus(y: f64) -> f64 {
    if y > 35.0 {
        y
    } else if y < -35.0 {
        y.exp()
    } else {
        y.exp().ln_1p()
    }
}

/// A node of the unit-interval map with both coordinates and their logs.
#[derive(Debug, Clone, Copy)]
pub struct UnitPoint {
    pub w: f64,
    /// `1 - w`, computed without cancellation.
    pub wc: f64,
    pub ln_w: f64,
    pub ln_wc: f64,
    /// `ln(dw/dx)` of the auxiliary map.
    pub ln_jac: f64,
}

#[inline]
fn unit_point(x: f64) -> UnitPoint {
    let z = std::f64::consts::FRAC_PI_2 * x.sinh();
    let ln_w = -softplus(-2.0 * z);
    let ln_wc = -softplus(2.0 * z);
    UnitPoint {
        w: ln_w.exp(),
        wc: ln_wc.exp(),
        ln_w,
        ln_wc,
        ln_jac: std::f64::consts::PI.ln() + x.cosh().ln() + ln_w + ln_wc,
    }
}

/// A node of the half-line map: `u ∈ (0, ∞)` with `ln u` and the log Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct HalfLinePoint {
    pub u: f64,
    pub ln_u: f64,
    pub ln_jac: f64,
}

#[inline]
fn half_line_point(x: f64, map: HalfLineMap) -> HalfLinePoint {
    let p = unit_point(x);
    match map {
        HalfLineMap::Rational => {
            let ln_u = p.ln_w - p.ln_wc;
            HalfLinePoint {
                u: ln_u.exp(),
                ln_u,
                ln_jac: p.ln_jac - 2.0 * p.ln_wc,
            }
        }
    }
}

/// A node of the quadrant map `(u, v) = (s w, s (1 - w))`.
#[derive(Debug, Clone, Copy)]
pub struct QuadrantPoint {
    pub u: f64,
    pub v: f64,
    /// `u + v`.
    pub s: f64,
    pub ln_u: f64,
    pub ln_v: f64,
    pub ln_s: f64,
}

fn check_finite_or_zero(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::Numerical("integrand returned NaN".into()))
    } else if v.is_infinite() && v > 0.0 {
        Err(Error::Numerical("integrand overflowed".into()))
    } else {
        Ok(v)
    }
}

/// `∫₀¹ f(w) dw`; the integrand receives `(w, 1 - w)`.
pub fn integrate_unit<F>(mut f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64, f64) -> f64,
{
    let est = adaptive(
        |x, out: &mut [f64]| {
            let p = unit_point(x);
            let fx = check_finite_or_zero(f(p.w, p.wc))?;
            out[0] = if fx == 0.0 { 0.0 } else { fx * p.ln_jac.exp() };
            Ok(())
        },
        -DE_HALF_WIDTH_LINEAR,
        DE_HALF_WIDTH_LINEAR,
        1,
        spec,
    )?;
    Ok(est[0])
}

/// `∫₀¹ exp(ln_f(p)) dw` where `ln_f` is evaluated in log space at the node `p`.
pub fn integrate_unit_log<F>(mut ln_f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(&UnitPoint) -> f64,
{
    let est = adaptive(
        |x, out: &mut [f64]| {
            let p = unit_point(x);
            out[0] = log_term(ln_f(&p) + p.ln_jac)?;
            Ok(())
        },
        -DE_HALF_WIDTH,
        DE_HALF_WIDTH,
        1,
        spec,
    )?;
    Ok(est[0])
}

#[inline]
fn log_term(l: f64) -> Result<f64> {
    if l.is_nan() {
        return Err(Error::Numerical("log-integrand returned NaN".into()));
    }
    let v = l.exp();
    if v.is_infinite() {
        return Err(Error::Numerical("integrand overflowed".into()));
    }
    Ok(v)
}

/// `∫₀^∞ f(u) du`.
pub fn integrate_halfline<F>(mut f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    let map = spec.transform;
    let est = adaptive(
        |x, out: &mut [f64]| {
            let p = half_line_point(x, map);
            let fx = check_finite_or_zero(f(p.u))?;
            out[0] = if fx == 0.0 { 0.0 } else { fx * p.ln_jac.exp() };
            Ok(())
        },
        -DE_HALF_WIDTH_LINEAR,
        DE_HALF_WIDTH_LINEAR,
        1,
        spec,
    )?;
    Ok(est[0])
}

/// `∫₀^∞ exp(ln_f(u, ln u)) du`.
pub fn integrate_halfline_log<F>(mut ln_f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64, f64) -> f64,
{
    let map = spec.transform;
    let est = adaptive(
        |x, out: &mut [f64]| {
            let p = half_line_point(x, map);
            out[0] = log_term(ln_f(p.u, p.ln_u) + p.ln_jac)?;
            Ok(())
        },
        -DE_HALF_WIDTH,
        DE_HALF_WIDTH,
        1,
        spec,
    )?;
    Ok(est[0])
}

/// `∫₀^∞∫₀^∞ f(u, v) du dv`.
pub fn integrate_quadrant<F>(mut f: F, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64, f64) -> f64,
{
    let mut err = None;
    let est = quadrant_vec(
        |p: &QuadrantPoint, out: &mut [f64]| {
            let v = f(p.u, p.v);
            if v.is_nan() || v < 0.0 && v.is_infinite() {
                err.get_or_insert(Error::Numerical("integrand returned a non-finite value".into()));
            }
            // signed integrands are split into positive and negative parts
            out[0] = if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
            out[1] = if v < 0.0 { (-v).ln() } else { f64::NEG_INFINITY };
        },
        2,
        spec,
        DE_HALF_WIDTH_LINEAR,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Estimate {
        value: est[0].value - est[1].value,
        error: est[0].error + est[1].error,
    })
}

/// Vector-valued quadrant integral of `exp(ln_f)`, sharing every node across components.
///
/// Components whose log-integrand is `-inf` at a node contribute zero there.
pub fn integrate_quadrant_log_vec<F>(ln_f: F, dim: usize, spec: &QuadratureSpec) -> Result<Vec<Estimate>>
where
    F: FnMut(&QuadrantPoint, &mut [f64]),
{
    quadrant_vec(ln_f, dim, spec, DE_HALF_WIDTH)
}

fn quadrant_vec<F>(mut ln_f: F, dim: usize, spec: &QuadratureSpec, half_width: f64) -> Result<Vec<Estimate>>
where
    F: FnMut(&QuadrantPoint, &mut [f64]),
{
    let inner_spec = spec.inner();
    let map = spec.transform;
    let mut buf = vec![0.0; dim];
    adaptive(
        |xw, out: &mut [f64]| {
            let pw = unit_point(xw);
            let inner = adaptive(
                |xs, inner_out: &mut [f64]| {
                    let ps = half_line_point(xs, map);
                    let q = QuadrantPoint {
                        u: ps.u * pw.w,
                        v: ps.u * pw.wc,
                        s: ps.u,
                        ln_u: ps.ln_u + pw.ln_w,
                        ln_v: ps.ln_u + pw.ln_wc,
                        ln_s: ps.ln_u,
                    };
                    ln_f(&q, &mut buf);
                    // polar Jacobian s, the s-map Jacobian and the w-map Jacobian
                    let ln_jac = ps.ln_u + ps.ln_jac + pw.ln_jac;
                    for d in 0..dim {
                        inner_out[d] = if buf[d] == f64::NEG_INFINITY { 0.0 } else { log_term(buf[d] + ln_jac)? };
                    }
                    Ok(())
                },
                -half_width,
                half_width,
                dim,
                &inner_spec,
            )?;
            for d in 0..dim {
                out[d] = inner[d].value;
            }
            Ok(())
        },
        -half_width,
        half_width,
        dim,
        spec,
    )
}
