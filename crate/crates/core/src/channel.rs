//! Rician channel draws, the two-array combined channel and the Table-style
//! link budget.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::geometry::SteeringVector;
use crate::num::{CVector, Real};

/// Rician K-factor, stored both in dB and linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianFactor<T> {
    k_db: T,
    k_linear: T,
}

impl<T: Real> RicianFactor<T> {
    pub fn from_db(k_db: T) -> Self {
        let k_linear = T::lit(10f64.powf(k_db.as_f64() / 10.0));
        Self { k_db, k_linear }
    }

    pub fn from_linear(k_linear: T) -> Result<Self> {
        if !(k_linear >= T::zero()) {
            return Err(Error::Domain {
                what: "Rician factor",
                expected: "non-negative",
                value: k_linear.as_f64(),
            });
        }
        let k_db = T::lit(10.0 * k_linear.as_f64().log10());
        Ok(Self { k_db, k_linear })
    }

    /// Pure line-of-sight limit.
    pub fn los_only() -> Self {
        Self {
            k_db: T::lit(f64::INFINITY),
            k_linear: T::lit(f64::INFINITY),
        }
    }

    pub fn k_db(&self) -> T {
        self.k_db
    }

    pub fn k_linear(&self) -> T {
        self.k_linear
    }

    /// `K / (K + 1)`, with the `K -> inf` limit taken exactly.
    pub fn los_fraction(&self) -> T {
        if self.k_linear.finite() {
            self.k_linear / (self.k_linear + T::one())
        } else {
            T::one()
        }
    }

    /// `1 / (K + 1)`.
    pub fn scatter_fraction(&self) -> T {
        if self.k_linear.finite() {
            T::one() / (self.k_linear + T::one())
        } else {
            T::zero()
        }
    }
}

/// One circularly-symmetric complex Gaussian sample with total variance
/// `variance` (half per real/imaginary part).
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let s = (variance.as_f64() * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// `sqrt(K/(K+1)) e_los + sqrt(1/(K+1)) h_nlos` with `h_nlos ~ CN(0, I)`.
pub fn rician_sample<T: Real, R: Rng + ?Sized>(
    los: &SteeringVector<T>,
    k: &RicianFactor<T>,
    rng: &mut R,
) -> CVector<T> {
    rician_from_los(los.entries(), k, rng)
}

pub(crate) fn rician_from_los<T: Real, R: Rng + ?Sized>(
    los: &CVector<T>,
    k: &RicianFactor<T>,
    rng: &mut R,
) -> CVector<T> {
    let a = los.scale(k.los_fraction().sqrt());
    let b = k.scatter_fraction().sqrt();
    if b == T::zero() {
        return a;
    }
    CVector::from_iterator(
        los.len(),
        a.iter().map(|z| *z + complex_gaussian::<T, _>(rng, T::one()) * b),
    )
}

/// Channels from both arrays to one user and their elementwise sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    h_left: CVector<T>,
    h_right: CVector<T>,
    h_combined: CVector<T>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn h_left(&self) -> &CVector<T> {
        &self.h_left
    }

    pub fn h_right(&self) -> &CVector<T> {
        &self.h_right
    }

    pub fn h_combined(&self) -> &CVector<T> {
        &self.h_combined
    }
}

pub fn combined_channel<T: Real>(h_left: CVector<T>, h_right: CVector<T>) -> Result<ChannelRealization<T>> {
    if h_left.len() != h_right.len() {
        return Err(Error::LengthMismatch {
            expected: h_left.len(),
            found: h_right.len(),
        });
    }
    let h_combined = &h_left + &h_right;
    Ok(ChannelRealization {
        h_left,
        h_right,
        h_combined,
    })
}

/// Free-space style path loss `32.4 + 20 log10(d) + 20 log10(f)`, `d` in
/// meters and `f` in GHz.
pub fn path_loss_db<T: Real>(d: T, f_ghz: T) -> Result<T> {
    require_positive("distance", d.as_f64())?;
    require_positive("frequency", f_ghz.as_f64())?;
    let twenty = T::lit(20.0);
    Ok(T::lit(32.4) + twenty * d.log10() + twenty * f_ghz.log10())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub freq_ghz: f64,
    pub bandwidth_ghz: f64,
    pub tx_power_dbm: f64,
    pub other_loss_db: f64,
    pub rx_gain_dbi: f64,
    pub rx_nf_db: f64,
    pub rx_noise_db: f64,
    pub modulation: String,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            freq_ghz: 73.5,
            bandwidth_ghz: 5.0,
            tx_power_dbm: 14.6,
            other_loss_db: 12.7,
            rx_gain_dbi: 27.0,
            rx_nf_db: 7.0,
            rx_noise_db: -76.8,
            modulation: "64qam".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedPower {
    pub pr_dbm: f64,
    pub noise_dbm: f64,
}

impl ReceivedPower {
    /// Received power in mW.
    pub fn pr_linear(&self) -> f64 {
        dbm_to_mw(self.pr_dbm)
    }

    /// Noise floor in mW.
    pub fn noise_linear(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        require_positive("freq_ghz", self.freq_ghz)?;
        require_positive("bandwidth_ghz", self.bandwidth_ghz)?;
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        299_792_458.0 / (self.freq_ghz * 1e9)
    }

    /// Noise floor in dBm: receiver noise power plus noise figure.
    pub fn noise_dbm(&self) -> f64 {
        self.rx_noise_db + self.rx_nf_db
    }

    /// Transmit array gain `10 log10(M)` is applied on top of the budget.
    pub fn received_power_dbm(&self, m_elements: usize, d: f64) -> Result<ReceivedPower> {
        if m_elements == 0 {
            return Err(Error::InvalidConfig("array must have at least one element".into()));
        }
        let pl = path_loss_db(d, self.freq_ghz)?;
        let gain = 10.0 * (m_elements as f64).log10();
        Ok(ReceivedPower {
            pr_dbm: self.tx_power_dbm + gain + self.rx_gain_dbi - pl - self.other_loss_db,
            noise_dbm: self.noise_dbm(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{planar_array, steering_vector, AnglePair, Position};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_examples() {
        assert_abs_diff_eq!(path_loss_db(1.0, 1.0).unwrap(), 32.4, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss_db(100.0, 73.5).unwrap(), 109.726, epsilon = 1e-3);
        assert_abs_diff_eq!(path_loss_db(10.0, 73.5).unwrap(), 89.726, epsilon = 1e-3);
        let decade = path_loss_db(1000.0, 73.5).unwrap() - path_loss_db(100.0, 73.5).unwrap();
        assert_abs_diff_eq!(decade, 20.0, epsilon = 1e-12);
        assert!(path_loss_db(0.0, 1.0).is_err());
        assert!(path_loss_db(1.0, -2.0).is_err());
    }

    #[test]
    fn path_loss_increasing() {
        let mut prev = f64::MIN;
        for i in 1..200 {
            let v = path_loss_db(i as f64 * 0.7, 73.5).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(path_loss_db(5.0, 80.0).unwrap() > path_loss_db(5.0, 70.0).unwrap());
    }

    #[test]
    fn budget_examples() {
        let b = LinkBudget::default();
        let m1 = b.received_power_dbm(1, 100.0).unwrap();
        let m225 = b.received_power_dbm(225, 100.0).unwrap();
        assert_abs_diff_eq!(m225.pr_dbm - m1.pr_dbm, 23.522, epsilon = 1e-3);
        assert_abs_diff_eq!(m225.pr_dbm, -57.304, epsilon = 1e-3);
        assert_abs_diff_eq!(m225.noise_dbm, -69.8, epsilon = 1e-12);
        let louder = LinkBudget {
            tx_power_dbm: b.tx_power_dbm + 3.0,
            ..b.clone()
        };
        let diff = louder.received_power_dbm(64, 50.0).unwrap().pr_dbm - b.received_power_dbm(64, 50.0).unwrap().pr_dbm;
        assert_abs_diff_eq!(diff, 3.0, epsilon = 1e-12);
        assert!(b.received_power_dbm(0, 100.0).is_err());
        assert!(b.received_power_dbm(4, 0.0).is_err());
    }

    fn los(m: usize) -> SteeringVector<f64> {
        let g = planar_array(1, m, 0.5, Position::origin()).unwrap();
        steering_vector(&g, &AnglePair::new(0.4, 1.2), 1.0).unwrap()
    }

    #[test]
    fn los_only_limit_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = los(8);
        let h = rician_sample(&e, &RicianFactor::los_only(), &mut rng);
        assert_eq!(&h, e.entries());
    }

    #[test]
    fn k_zero_is_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = los(4);
        let k = RicianFactor::from_linear(0.0).unwrap();
        let n = 50_000;
        let mut mean = CVector::<f64>::zeros(4);
        for _ in 0..n {
            mean += rician_sample(&e, &k, &mut rng);
        }
        mean /= Complex::new(n as f64, 0.0);
        assert!(mean.norm() < 0.02);
    }

    #[test]
    fn energy_matches_element_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = 16;
        let e = los(m);
        for k_db in [-5.0, 0.0, 10.0] {
            let k = RicianFactor::from_db(k_db);
            let n = 100_000;
            let total: f64 = (0..n)
                .map(|_| crate::num::norm_sqr(&rician_sample(&e, &k, &mut rng)))
                .sum();
            let avg = total / n as f64;
            assert!((avg / m as f64 - 1.0).abs() < 0.02, "k={k_db} avg={avg}");
        }
    }

    #[test]
    fn per_entry_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = los(2);
        let k = RicianFactor::from_db(3.0f64);
        let n = 100_000;
        let target = e.entries()[1] * k.los_fraction().sqrt();
        let samples: Vec<Complex<f64>> = (0..n).map(|_| rician_sample(&e, &k, &mut rng)[1]).collect();
        let mean = samples.iter().sum::<Complex<f64>>() / n as f64;
        let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - target).norm() < 0.01);
        assert!((var / k.scatter_fraction() - 1.0).abs() < 0.03);
    }

    #[test]
    fn combined_channel_examples() {
        let e = los(3).into_entries();
        let z = combined_channel(e.clone(), -e.clone()).unwrap();
        assert!(z.h_combined().iter().all(|v| v.norm() == 0.0));
        let same = combined_channel(e.clone(), CVector::zeros(3)).unwrap();
        assert_eq!(same.h_combined(), &e);
        assert!(matches!(
            combined_channel(e, CVector::zeros(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn combined_los_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = planar_array(2, 2, 0.5, Position::origin()).unwrap();
        let el = steering_vector(&g, &AnglePair::new(0.1, 1.0), 1.0).unwrap();
        let er = steering_vector(&g, &AnglePair::new(2.1, 0.7), 1.0).unwrap();
        let k = RicianFactor::los_only();
        let ch = combined_channel(rician_sample(&el, &k, &mut rng), rician_sample(&er, &k, &mut rng)).unwrap();
        assert_eq!(ch.h_combined(), &(el.entries() + er.entries()));
    }
}
