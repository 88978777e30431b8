//! SINR distribution under a single-Gaussian signal model, closed-form and
//! numerical average capacity, and volumetric spectral efficiency.
//!
//! With the signal amplitude modelled as `CN(mu_s, sigma_s2)` and the
//! interference-plus-noise as `CN(0, sigma_i2)`, the SINR has CDF
//!
//! ```text
//! F(eta) = eta / (eta + c) * exp(-k^2 c / (eta + c))
//! ```
//!
//! where `k = |mu_s| / sigma_s` and `c = sigma_s2 / sigma_i2`.

pub mod quadrature;
pub mod special;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::RicianFactor;
use crate::error::{Error, Result};
use crate::num::{modulus, norm_sqr, CVector, Real};

use self::quadrature::{integrate, Quadrature, QuadratureOptions};
use self::special::{exp_integral_ei, exp_scaled_ei, EULER_GAMMA};

/// Symbol alphabet with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    symbols: Vec<Complex<T>>,
    probabilities: Vec<T>,
}

impl<T: Real> Constellation<T> {
    pub fn new(symbols: Vec<Complex<T>>, probabilities: Vec<T>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidConstellation("no symbols".into()));
        }
        if symbols.len() != probabilities.len() {
            return Err(Error::InvalidConstellation(format!(
                "{} symbols but {} probabilities",
                symbols.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|p| !(*p >= T::zero()) || !p.finite()) {
            return Err(Error::InvalidConstellation("negative or non-finite probability".into()));
        }
        let total = probabilities.iter().fold(T::zero(), |s, p| s + *p);
        if (total - T::one()).abs() > T::lit(1e3) * T::eps() * T::lit(symbols.len() as f64) {
            return Err(Error::InvalidConstellation(format!("probabilities sum to {total}")));
        }
        if symbols.iter().any(|s| !s.re.finite() || !s.im.finite()) {
            return Err(Error::InvalidConstellation("non-finite symbol".into()));
        }
        Ok(Self { symbols, probabilities })
    }

    /// Equiprobable alphabet.
    pub fn uniform(symbols: Vec<Complex<T>>) -> Result<Self> {
        let p = T::one() / T::lit(symbols.len().max(1) as f64);
        let probabilities = vec![p; symbols.len()];
        Self::new(symbols, probabilities)
    }

    pub fn symbols(&self) -> &[Complex<T>] {
        &self.symbols
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Average symbol energy `sum p |s|^2`.
    pub fn energy(&self) -> T {
        self.symbols
            .iter()
            .zip(&self.probabilities)
            .fold(T::zero(), |acc, (s, p)| acc + *p * s.norm_sqr())
    }

    pub fn is_unit_energy(&self) -> bool {
        (self.energy() - T::one()).abs() <= T::lit(1e-9_f64.max(T::eps().as_f64() * 100.0))
    }
}

/// How the interferer precoders enter the interference variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceNorm {
    /// `||sum_n e_n||^2`
    #[default]
    NormOfSum,
    /// `sum_n ||e_n||^2`
    SumOfNorms,
}

/// Link-level inputs that scale the moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentModel<T> {
    pub pr_linear: T,
    pub k: RicianFactor<T>,
    pub noise_var: T,
    /// Number of arrays whose independent scattering adds up at the user.
    pub nlos_arrays: T,
    pub interference: InterferenceNorm,
}

/// Single-Gaussian moments of the signal and interference terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrMoments<T> {
    pub mu_s: Complex<T>,
    pub sigma_s2: T,
    pub sigma_i2: T,
    pub k_s: T,
    pub c_sigma: T,
}

impl<T: Real> SinrMoments<T> {
    pub fn from_parts(mu_s: Complex<T>, sigma_s2: T, sigma_i2: T) -> Result<Self> {
        if !(sigma_i2 > T::zero()) || !sigma_i2.finite() {
            return Err(Error::Domain {
                what: "interference variance",
                expected: "positive and finite",
                value: sigma_i2.as_f64(),
            });
        }
        if !(sigma_s2 >= T::zero()) || !sigma_s2.finite() {
            return Err(Error::Domain {
                what: "signal variance",
                expected: "non-negative and finite",
                value: sigma_s2.as_f64(),
            });
        }
        let mag = modulus(mu_s);
        let k_s = if mag == T::zero() {
            T::zero()
        } else if sigma_s2 > T::zero() {
            mag / sigma_s2.sqrt()
        } else {
            return Err(Error::Domain {
                what: "signal variance",
                expected: "positive when the mean amplitude is nonzero",
                value: 0.0,
            });
        };
        Ok(Self {
            mu_s,
            sigma_s2,
            sigma_i2,
            k_s,
            c_sigma: sigma_s2 / sigma_i2,
        })
    }

    /// Moments with unit interference variance and the given shape.
    pub fn from_shape(k_s: T, c_sigma: T) -> Result<Self> {
        if !(k_s >= T::zero()) || !(c_sigma > T::zero()) {
            return Err(Error::Domain {
                what: "moment shape (k_s, c_sigma)",
                expected: "k_s >= 0 and c_sigma > 0",
                value: c_sigma.as_f64(),
            });
        }
        let mu = Complex::new(k_s * c_sigma.sqrt(), T::zero());
        Self::from_parts(mu, c_sigma, T::one())
    }
}

/// Signal and interference moments for one user.
///
/// `interferer_precoders` are the other users' precoding vectors; `desired`
/// is the line-of-sight steering vector seen by this user's combined channel.
pub fn sinr_moments<T: Real>(
    e0: &CVector<T>,
    desired: &CVector<T>,
    interferer_precoders: &[CVector<T>],
    constellation: &Constellation<T>,
    model: &MomentModel<T>,
) -> Result<SinrMoments<T>> {
    if constellation.is_empty() {
        return Err(Error::InvalidConstellation("no symbols".into()));
    }
    if !(model.pr_linear > T::zero()) {
        return Err(Error::Domain {
            what: "received power",
            expected: "positive",
            value: model.pr_linear.as_f64(),
        });
    }
    if desired.len() != e0.len() {
        return Err(Error::LengthMismatch {
            expected: e0.len(),
            found: desired.len(),
        });
    }
    let m = e0.len();
    if let Some(bad) = interferer_precoders.iter().find(|v| v.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    let pr = model.pr_linear;
    let gain = desired.dotc(e0) * (pr * model.k.los_fraction()).sqrt();
    let scatter = model.nlos_arrays * pr * model.k.scatter_fraction();
    let interf_norm = match model.interference {
        InterferenceNorm::NormOfSum => {
            let sum = interferer_precoders.iter().fold(CVector::zeros(m), |acc, v| acc + v);
            norm_sqr(&sum)
        }
        InterferenceNorm::SumOfNorms => interferer_precoders.iter().fold(T::zero(), |acc, v| acc + norm_sqr(v)),
    };
    let e0_norm = norm_sqr(e0);

    let syms = constellation.symbols();
    let probs = constellation.probabilities();
    let mu_s = syms
        .iter()
        .zip(probs)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (s, p)| acc + gain * *s * *p);
    let mut sigma_s2 = T::zero();
    let mut sigma_i2 = T::zero();
    for (s, p) in syms.iter().zip(probs) {
        let energy = s.norm_sqr();
        sigma_s2 += *p * (scatter * energy * e0_norm + (gain * *s - mu_s).norm_sqr());
        sigma_i2 += *p * scatter * energy * interf_norm;
    }
    SinrMoments::from_parts(mu_s, sigma_s2, sigma_i2 + model.noise_var)
}

fn require_eta<T: Real>(eta: T) -> Result<()> {
    if eta > T::zero() && eta.finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "SINR",
            expected: "positive and finite",
            value: eta.as_f64(),
        })
    }
}

fn density_unchecked<T: Real>(k2: T, c: T, eta: T) -> T {
    let r = T::one() / (eta + c);
    let expo = (-k2 * c * r).exp();
    c * expo * ((T::one() + k2) * eta + c) * r * r * r
}

/// SINR probability density.
pub fn sinr_density<T: Real>(m: &SinrMoments<T>, eta: T) -> Result<T> {
    require_eta(eta)?;
    Ok(density_unchecked(m.k_s * m.k_s, m.c_sigma, eta))
}

/// The `k_s = 0` density `c / (eta + c)^2`.
pub fn sinr_density_exponential<T: Real>(c_sigma: T, eta: T) -> Result<T> {
    require_eta(eta)?;
    let d = eta + c_sigma;
    Ok(c_sigma / (d * d))
}

/// SINR CDF in closed form.
pub fn sinr_cdf<T: Real>(m: &SinrMoments<T>, eta: T) -> Result<T> {
    if eta == T::zero() {
        return Ok(T::zero());
    }
    require_eta(eta)?;
    let c = m.c_sigma;
    let r = T::one() / (eta + c);
    Ok(eta * r * (-m.k_s * m.k_s * c * r).exp())
}

// eta = c u / (1 - u) maps [0, 1) onto [0, inf)
fn eta_of_u<T: Real>(c: T, u: T) -> (T, T) {
    let one_minus = T::one() - u;
    (c * u / one_minus, c / (one_minus * one_minus))
}

fn u_of_eta<T: Real>(c: T, eta: T) -> T {
    eta / (eta + c)
}

/// SINR CDF by numerical integration of the density.
pub fn sinr_cdf_quadrature<T: Real>(m: &SinrMoments<T>, eta: T, opts: QuadratureOptions) -> Result<Quadrature<T>> {
    require_eta(eta)?;
    let (k2, c) = (m.k_s * m.k_s, m.c_sigma);
    integrate(
        |u| {
            let (x, jac) = eta_of_u(c, u);
            density_unchecked(k2, c, x) * jac
        },
        T::zero(),
        u_of_eta(c, eta),
        opts,
    )
}

/// Total density mass over `(0, inf)`.
pub fn density_mass<T: Real>(m: &SinrMoments<T>, opts: QuadratureOptions) -> Result<Quadrature<T>> {
    let (k2, c) = (m.k_s * m.k_s, m.c_sigma);
    integrate(
        |u| {
            let (x, jac) = eta_of_u(c, u);
            density_unchecked(k2, c, x) * jac
        },
        T::zero(),
        T::one(),
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityQuadrature<T> {
    pub capacity: T,
    pub error_estimate: T,
    /// Density mass, which should be 1.
    pub mass: T,
}

/// `∫ log2(1 + eta) f(eta) d eta` by adaptive quadrature.
pub fn capacity_quadrature<T: Real>(m: &SinrMoments<T>) -> Result<CapacityQuadrature<T>> {
    let (k2, c) = (m.k_s * m.k_s, m.c_sigma);
    if !(c > T::zero()) {
        return Err(Error::Domain {
            what: "c_sigma",
            expected: "positive",
            value: c.as_f64(),
        });
    }
    let opts = QuadratureOptions::new(1e-10, 1e-11);
    let q = integrate(
        |u| {
            let (x, jac) = eta_of_u(c, u);
            x.ln_1p() * density_unchecked(k2, c, x) * jac
        },
        T::zero(),
        T::one(),
        opts,
    )?;
    let mass = density_mass(m, opts)?;
    let ln2 = T::ln_2();
    Ok(CapacityQuadrature {
        capacity: q.value / ln2,
        error_estimate: q.error_estimate / ln2,
        mass: mass.value,
    })
}

/// Choice of sign inside the first exponential-integral term of the
/// closed-form Rician capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem1Variant {
    /// `-Ei(-k_s^2)`; agrees with direct integration.
    #[default]
    NegativeArgument,
    /// `-Ei(+k_s^2)`.
    PositiveArgument,
}

const UNIT_C_BAND: f64 = 1e-6;

/// Closed-form average capacity for a nonzero-mean signal:
///
/// ```text
/// C = [ln(c k^2) - Ei(-k^2) + gamma
///      + e^{-ck^2/(c-1)}/(c-1) (Ei(ck^2/(c-1)) - Ei(k^2/(c-1)))] / ln 2
/// ```
///
/// `k_s = 0` defers to [`capacity_theorem2`]; `c_sigma` within `1e-6` of 1
/// falls back to quadrature.
pub fn capacity_theorem1<T: Real>(k_s: T, c_sigma: T, variant: Theorem1Variant) -> Result<T> {
    if !(c_sigma > T::zero()) || !c_sigma.finite() {
        return Err(Error::Domain {
            what: "c_sigma",
            expected: "positive and finite",
            value: c_sigma.as_f64(),
        });
    }
    if !(k_s >= T::zero()) || !k_s.finite() {
        return Err(Error::Domain {
            what: "k_s",
            expected: "non-negative and finite",
            value: k_s.as_f64(),
        });
    }
    if k_s == T::zero() {
        return capacity_theorem2(c_sigma);
    }
    let c = c_sigma;
    let cm1 = c - T::one();
    if cm1.abs() < T::lit(UNIT_C_BAND) {
        return Ok(capacity_quadrature(&SinrMoments::from_shape(k_s, c)?)?.capacity);
    }
    let k2 = k_s * k_s;
    let a = c * k2 / cm1;
    let b = k2 / cm1;
    // e^{-a}(Ei(a) - Ei(b)) with a - b = k^2
    let tail = (exp_scaled_ei(a)? - (-k2).exp() * exp_scaled_ei(b)?) / cm1;
    let first = match variant {
        Theorem1Variant::NegativeArgument => exp_integral_ei(-k2)?,
        Theorem1Variant::PositiveArgument => exp_integral_ei(k2)?,
    };
    Ok(((c * k2).ln() - first + T::lit(EULER_GAMMA) + tail) / T::ln_2())
}

/// Closed-form average capacity for a zero-mean equiprobable constellation,
/// `c/(c-1) log2 c`, with the `c = 1` limit `log2 e`.
pub fn capacity_theorem2<T: Real>(c_sigma: T) -> Result<T> {
    if !(c_sigma > T::zero()) || !c_sigma.finite() {
        return Err(Error::Domain {
            what: "c_sigma",
            expected: "positive and finite",
            value: c_sigma.as_f64(),
        });
    }
    let t = c_sigma - T::one();
    if t.abs() < T::lit(1e-4) {
        // c ln c / (c - 1) = 1 + t/2 - t^2/6 + t^3/12 - ...
        let series = T::one() + t / T::lit(2.0) - t * t / T::lit(6.0) + t * t * t / T::lit(12.0);
        return Ok(series / T::ln_2());
    }
    Ok(c_sigma / t * c_sigma.log2())
}

/// Closed-form average capacity for arbitrary moments. A fully annihilated
/// signal (`sigma_s2 = 0`, `mu_s = 0`) has zero capacity.
pub fn capacity<T: Real>(m: &SinrMoments<T>) -> Result<T> {
    if m.c_sigma == T::zero() && m.k_s == T::zero() {
        return Ok(T::zero());
    }
    if m.k_s <= T::lit(1e-6) {
        capacity_theorem2(m.c_sigma)
    } else {
        capacity_theorem1(m.k_s, m.c_sigma, Theorem1Variant::NegativeArgument)
    }
}

/// `c/(c-1) e^{-ck^2/(c-1)} (Ei(ck^2/(c-1)) - Ei(k^2/(c-1)))`.
pub fn confluent_closed_form<T: Real>(k: T, c: T) -> Result<T> {
    let cm1 = c - T::one();
    if !(c > T::zero()) || cm1 == T::zero() || !(k > T::zero()) {
        return Err(Error::Domain {
            what: "(k, c)",
            expected: "k > 0, c > 0, c != 1",
            value: c.as_f64(),
        });
    }
    let k2 = k * k;
    let a = c * k2 / cm1;
    let b = k2 / cm1;
    Ok(c / cm1 * (exp_scaled_ei(a)? - (-k2).exp() * exp_scaled_ei(b)?))
}

/// `∫_0^1 e^{-k^2 u} / (1 - u (c-1)/c) du` by quadrature.
pub fn confluent_integral<T: Real>(k: T, c: T) -> Result<T> {
    let beta = (c - T::one()) / c;
    let k2 = k * k;
    Ok(integrate(
        |u| (-k2 * u).exp() / (T::one() - u * beta),
        T::zero(),
        T::one(),
        QuadratureOptions::new(1e-13, 1e-13),
    )?
    .value)
}

/// Volume served per resource reuse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeSpec<T> {
    SmallCell { micro_cell_diameter_m: T, reuse_factor: T },
    CellFree { region_volume_m3: T, users: usize },
}

impl<T: Real> VolumeSpec<T> {
    /// Volume in m^3 shared by one user's resource.
    pub fn volume_m3(&self) -> T {
        match *self {
            VolumeSpec::SmallCell {
                micro_cell_diameter_m,
                reuse_factor,
            } => {
                let r = micro_cell_diameter_m / T::lit(2.0);
                reuse_factor * T::lit(4.0 / 3.0) * T::pi() * r * r * r
            }
            VolumeSpec::CellFree {
                region_volume_m3,
                users,
            } => region_volume_m3 / T::lit(users as f64),
        }
    }
}

/// Volumetric spectral efficiency in bps/Hz/km^3.
pub fn vse<T: Real>(avg_capacity_bps_hz: T, vol: &VolumeSpec<T>) -> Result<T> {
    let v = vol.volume_m3();
    if !(v > T::zero()) || !v.finite() {
        return Err(Error::Domain {
            what: "volume",
            expected: "positive and finite",
            value: v.as_f64(),
        });
    }
    Ok(avg_capacity_bps_hz / v * T::lit(1e9))
}
