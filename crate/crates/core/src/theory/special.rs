//! Exponential integral `Ei(x) = -∫_{-x}^∞ e^{-t}/t dt` (principal value for
//! `x > 0`) and its scaled form `e^{-x} Ei(x)`.

use crate::error::{Error, Result};
use crate::num::Real;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 40.0;
const MAX_TERMS: usize = 10_000;

/// `Ei(x)`.
pub fn exp_integral_ei<T: Real>(x: T) -> Result<T> {
    check(x)?;
    if x > T::zero() {
        if x.as_f64() <= SERIES_LIMIT {
            Ok(ei_series(x))
        } else {
            Ok(ei_asymptotic_scaled(x) * x.exp())
        }
    } else {
        Ok(-e1(-x))
    }
}

/// `e^{-x} Ei(x)`, finite wherever the product is representable.
pub fn exp_scaled_ei<T: Real>(x: T) -> Result<T> {
    check(x)?;
    if x > T::zero() {
        if x.as_f64() <= SERIES_LIMIT {
            Ok(ei_series(x) * (-x).exp())
        } else {
            Ok(ei_asymptotic_scaled(x))
        }
    } else {
        let y = -x;
        if y <= T::one() {
            Ok(-e1_series(y) * y.exp())
        } else {
            Ok(-e1_cf_scaled(y))
        }
    }
}

/// `E1(y) = -Ei(-y)` for `y > 0`.
pub fn exp_integral_e1<T: Real>(y: T) -> Result<T> {
    check(y)?;
    if y <= T::zero() {
        return Err(Error::Domain {
            what: "E1 argument",
            expected: "positive",
            value: y.as_f64(),
        });
    }
    Ok(e1(y))
}

fn check<T: Real>(x: T) -> Result<()> {
    if !x.finite() {
        return Err(Error::NonFinite("exponential integral argument"));
    }
    if x == T::zero() {
        return Err(Error::EiDivergence);
    }
    Ok(())
}

fn e1<T: Real>(y: T) -> T {
    if y <= T::one() {
        e1_series(y)
    } else {
        e1_cf_scaled(y) * (-y).exp()
    }
}

// gamma + ln x + sum x^n / (n n!)
fn ei_series<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::zero();
    for n in 1..MAX_TERMS {
        let nf = T::lit(n as f64);
        term *= x / nf;
        let add = term / nf;
        sum += add;
        if add <= T::eps() * sum.abs() {
            break;
        }
    }
    T::lit(EULER_GAMMA) + x.ln() + sum
}

// e^{-x}Ei(x) ~ (1/x) sum k!/x^k, stopped at the smallest term
fn ei_asymptotic_scaled<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..MAX_TERMS {
        let next = term * T::lit(k as f64) / x;
        if next >= term || next <= T::eps() * sum {
            if next < term {
                sum += next;
            }
            break;
        }
        term = next;
        sum += term;
    }
    sum / x
}

// -gamma - ln y - sum (-y)^n / (n n!)
fn e1_series<T: Real>(y: T) -> T {
    let mut term = T::one();
    let mut sum = T::zero();
    for n in 1..MAX_TERMS {
        let nf = T::lit(n as f64);
        term *= -y / nf;
        let add = term / nf;
        sum += add;
        if add.abs() <= T::eps() * sum.abs() {
            break;
        }
    }
    -T::lit(EULER_GAMMA) - y.ln() - sum
}

// e^{y} E1(y) by modified Lentz on the continued fraction, y > 1
fn e1_cf_scaled<T: Real>(y: T) -> T {
    let tiny = T::lit(1e-300_f64.max(f32::MIN_POSITIVE as f64 * 16.0));
    let two = T::lit(2.0);
    let mut b = y + T::one();
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -T::lit((i * i) as f64);
        b += two;
        d = T::one() / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - T::one()).abs() <= T::eps() {
            break;
        }
    }
    h
}
