//! Gamma-family functions evaluated in log space.

use crate::error::{Error, Result};

/// A real number stored as `sign * exp(ln_abs)`; `sign == 0` encodes an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ONE: SignedLog = SignedLog {
        ln_abs: 0.0,
        sign: 1,
    };
    pub const ZERO: SignedLog = SignedLog {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires a finite positive argument, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// Unchecked `ln Γ(x)` for hot paths where `x > 0` is guaranteed by construction.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[inline]
pub(crate) fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// `ln B(a, b)` for positive arguments.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("log_beta requires positive arguments, got ({a}, {b})")));
    }
    Ok(ln_beta(a, b))
}

#[inline]
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log of the rising factorial `(a)_n = a (a+1) ... (a+n-1)`, with `(a)_0 = 1`.
///
/// The result carries a sign and an exact-zero flag, since `(a)_n` vanishes
/// when `a` is a non-positive integer with `-a < n`.
pub fn log_pochhammer(a: f64, n: i64) -> Result<SignedLog> {
    if n < 0 {
        return Err(Error::domain(format!("log_pochhammer requires n >= 0, got {n}")));
    }
    if !a.is_finite() {
        return Err(Error::domain(format!("log_pochhammer requires finite a, got {a}")));
    }
    if n == 0 {
        return Ok(SignedLog::ONE);
    }
    if a > 0.0 {
        return Ok(SignedLog {
            ln_abs: ln_pochhammer_pos(a, n as u64),
            sign: 1,
        });
    }
    if a == a.floor() && -a < n as f64 {
        return Ok(SignedLog::ZERO);
    }
    let mut ln_abs = 0.0;
    let mut negatives = 0u64;
    for i in 0..n {
        let f = a + i as f64;
        if f < 0.0 {
            negatives += 1;
        }
        ln_abs += f.abs().ln();
    }
    Ok(SignedLog {
        ln_abs,
        sign: if negatives % 2 == 0 { 1 } else { -1 },
    })
}

/// `ln (a)_n` for `a > 0`.
#[inline]
pub(crate) fn ln_pochhammer_pos(a: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 12 {
        let mut prod = 1.0;
        for i in 0..n {
            prod *= a + i as f64;
        }
        prod.ln()
    } else {
        ln_gamma(a + n as f64) - ln_gamma(a)
    }
}
