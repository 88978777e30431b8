//! Gray-mapped square QAM with unit average energy.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::theory::Constellation;

#[derive(Debug, Clone, PartialEq)]
pub struct SquareQam<T> {
    order: usize,
    side: usize,
    half_bits: u32,
    scale: T,
    points: Vec<Complex<T>>,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

impl<T: Real> SquareQam<T> {
    /// `order` must be an even power of two, at least 4.
    pub fn new(order: usize) -> Result<Self> {
        let bits = order.trailing_zeros();
        if order < 4 || !order.is_power_of_two() || !bits.is_multiple_of(2) {
            return Err(Error::InvalidConstellation(format!(
                "square QAM order must be 4, 16, 64, ...; got {order}"
            )));
        }
        let half_bits = bits / 2;
        let side = 1usize << half_bits;
        // levels +-1, +-3, ... have mean energy 2(M-1)/3
        let scale = T::lit((3.0 / (2.0 * (order as f64 - 1.0))).sqrt());
        let level = |g: usize| T::lit(2.0 * gray_inverse(g) as f64 - (side as f64 - 1.0)) * scale;
        let mask = side - 1;
        let points = (0..order)
            .map(|label| Complex::new(level(label >> half_bits), level(label & mask)))
            .collect();
        Ok(Self {
            order,
            side,
            half_bits,
            scale,
            points,
        })
    }

    /// Parses tags such as `"64qam"` or `"qpsk"`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let t = tag.trim().to_ascii_lowercase();
        if t == "qpsk" || t == "4qam" {
            return Self::new(4);
        }
        let order = t
            .strip_suffix("qam")
            .and_then(|n| n.trim_end_matches('-').parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidConstellation(format!("unknown modulation `{tag}`")))?;
        Self::new(order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.half_bits
    }

    /// Symbol whose Gray label is `label`.
    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    /// Equiprobable constellation for the moment calculations.
    pub fn constellation(&self) -> Constellation<T> {
        Constellation::uniform(self.points.clone()).expect("square QAM is a valid alphabet")
    }

    fn axis_label(&self, v: T) -> usize {
        let side = self.side as f64;
        let idx = ((v / self.scale).as_f64() + side - 1.0) / 2.0;
        let idx = if idx.is_nan() {
            0
        } else {
            idx.round().clamp(0.0, side - 1.0) as usize
        };
        gray(idx)
    }

    /// Nearest-point decision on an already equalized sample.
    pub fn slice(&self, y: Complex<T>) -> usize {
        (self.axis_label(y.re) << self.half_bits) | self.axis_label(y.im)
    }

    /// Minimum-distance decision `argmin |y - g s|`; a zero gain decides label 0.
    pub fn detect(&self, y: Complex<T>, gain: Complex<T>) -> usize {
        if gain.norm_sqr() == T::zero() {
            return 0;
        }
        self.slice(y / gain)
    }
}

pub fn bit_errors(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}
