//! The generalised hypergeometric series ₃F₂ at unit argument.

use crate::error::{Error, Result};
use crate::specialfn::gamma::digamma;
use crate::specialfn::quadrature::{integrate_halfline_log, QuadratureSpec};

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn terminating_length(a: &[f64; 3]) -> Option<usize> {
    a.iter()
        .filter(|&&x| is_nonpositive_integer(x))
        .map(|&x| (-x) as usize)
        .min()
}

fn validate(a: &[f64; 3], b: &[f64; 2]) -> Result<()> {
    if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
        return Err(Error::domain(format!("non-finite ₃F₂ parameters a={a:?} b={b:?}")));
    }
    if let Some(&bad) = b.iter().find(|&&x| is_nonpositive_integer(x)) {
        return Err(Error::domain(format!("₃F₂ lower parameter {bad} is a non-positive integer")));
    }
    Ok(())
}

fn stirling_series(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)))
}

/// `lnΓ(x + a) - lnΓ(x + b)` for `x` far beyond `|a|` and `|b|`, free of cancellation.
fn ln_gamma_ratio_large(x: f64, a: f64, b: f64) -> f64 {
    let za = x + a;
    let zb = x + b;
    (a - b) * x.ln() + (za - 0.5) * (a / x).ln_1p() - (zb - 0.5) * (b / x).ln_1p() - (a - b) + stirling_series(za)
        - stirling_series(zb)
}

/// Convergence margin `b1 + b2 - a1 - a2 - a3` of the unit-argument series.
pub fn hyp3f2_margin(a: [f64; 3], b: [f64; 2]) -> f64 {
    b[0] + b[1] - a[0] - a[1] - a[2]
}

/// First `count` partial sums of ₃F₂(a; b; 1).
pub fn hyp3f2_partial_sums(a: [f64; 3], b: [f64; 2], count: usize) -> Result<Vec<f64>> {
    validate(&a, &b)?;
    let mut out = Vec::with_capacity(count);
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 0..count {
        sum += term;
        out.push(sum);
        let nf = n as f64;
        term *= (a[0] + nf) * (a[1] + nf) * (a[2] + nf) / ((b[0] + nf) * (b[1] + nf) * (nf + 1.0));
    }
    Ok(out)
}

/// ₃F₂(a1, a2, a3; b1, b2; 1).
///
/// Non-terminating series are summed directly up to an index `K` past the
/// parameters, and the remaining tail is added through the Euler–Maclaurin
/// formula applied to the analytic continuation of the term in its index.
pub fn hyp3f2_at_one(a: [f64; 3], b: [f64; 2]) -> Result<f64> {
    validate(&a, &b)?;
    if let Some(len) = terminating_length(&a) {
        return Ok(*hyp3f2_partial_sums(a, b, len + 1)?.last().unwrap_or(&1.0));
    }
    let margin = hyp3f2_margin(a, b);
    if !(margin > 0.0) {
        return Err(Error::domain(format!(
            "₃F₂(a={a:?}; b={b:?}; 1) diverges: convergence margin b1+b2-a1-a2-a3 = {margin} is not positive"
        )));
    }
    let max_param = a.iter().chain(b.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let cutoff = (2.0 * max_param + 50.0).max(1000.0).ceil() as usize;

    let mut term = 1.0;
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for n in 0..cutoff {
        // Kahan summation keeps the long direct sum at full precision
        let y = term - compensation;
        let t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        let nf = n as f64;
        term *= (a[0] + nf) * (a[1] + nf) * (a[2] + nf) / ((b[0] + nf) * (b[1] + nf) * (nf + 1.0));
        if term == 0.0 {
            return Ok(sum);
        }
    }
    // `term` is now t(K); beyond K every Pochhammer argument is positive.
    let k = cutoff as f64;
    let log_shape = |x: f64| {
        ln_gamma_ratio_large(x, a[0], b[0]) + ln_gamma_ratio_large(x, a[1], b[1]) + ln_gamma_ratio_large(x, a[2], 1.0)
    };
    let shape_k = log_shape(k);
    let slope_k = a.iter().map(|&ai| digamma(ai + k)).sum::<f64>()
        - b.iter().map(|&bi| digamma(bi + k)).sum::<f64>()
        - digamma(1.0 + k);
    let spec = QuadratureSpec::default().with_rel_tol(1e-12);
    let integral = integrate_halfline_log(|y, _| log_shape(k + y) - shape_k, &spec)?.value;
    let tail = term * (integral + 0.5 - slope_k / 12.0);
    let value = sum + tail;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("₃F₂(a={a:?}; b={b:?}; 1) overflowed")));
    }
    Ok(value)
}
