//! Globally adaptive 15-point Gauss-Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights on the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7])
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_subdivisions: 4000,
        }
    }
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self::new(1e-10, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error_estimate: T,
    pub subdivisions: usize,
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T: Real> Eq for Segment<T> {}

impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<Segment<T>> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        k += pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            g += pair * T::lit(WG[j / 2]);
        }
    }
    let value = k * half_len;
    if !value.finite() {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    let error = ((k - g) * half_len).abs();
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over the finite interval `[a, b]`. Endpoints are never
/// evaluated, so integrable endpoint singularities are allowed.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, opts: QuadratureOptions) -> Result<Quadrature<T>> {
    if !a.finite() || !b.finite() {
        return Err(Error::NonFinite("quadrature bounds"));
    }
    if a == b {
        return Ok(Quadrature {
            value: T::zero(),
            error_estimate: T::zero(),
            subdivisions: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    let abs_tol = T::lit(opts.abs_tol);
    let rel_tol = T::lit(opts.rel_tol);
    let mut subdivisions = 0;
    // roundoff floor: no tolerance tighter than a few ulps of the scale
    let floor = T::lit(50.0) * T::eps();
    loop {
        let target = abs_tol.max(rel_tol * total.abs()).max(floor * total.abs());
        if err <= target {
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureDivergence {
                estimate: total.as_f64(),
                error_estimate: err.as_f64(),
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval exhausted at machine precision
            heap.push(worst);
            break;
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // refresh the running sums to shed accumulated drift
            total = heap.iter().fold(T::zero(), |s, seg| s + seg.value);
            err = heap.iter().fold(T::zero(), |s, seg| s + seg.error);
        }
    }
    let value = heap.iter().fold(T::zero(), |s, seg| s + seg.value);
    let error_estimate = heap.iter().fold(T::zero(), |s, seg| s + seg.error);
    Ok(Quadrature {
        value,
        error_estimate,
        subdivisions,
    })
}
