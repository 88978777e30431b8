//! Monte Carlo link simulation: per-trial deployment, precoders, Rician
//! channels, instantaneous SINR, closed-form capacity of the same geometry and
//! uncoded BER.
//!
//! Trial `i` draws everything from a ChaCha8 stream seeded with the master
//! seed and stream id `i`, so results do not depend on thread scheduling.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_gaussian, dbm_to_mw, rician_from_los, LinkBudget, RicianFactor};
use crate::error::{Error, Result};
use crate::geometry::{steering_derivative, steering_vector, AngleAxis};
use crate::modulation::{bit_errors, SquareQam};
use crate::num::{modulus, CVector, CompensatedSum, Real};
use crate::precoder::{leave_group_out, mpdr_all, project_out, PrecoderMethod, DEFAULT_REL_TOL};
use crate::scenario::{Architecture, Scenario, ScenarioConfig, ScenarioGenerator};
use crate::theory::{capacity, sinr_moments, vse, InterferenceNorm, MomentModel, VolumeSpec};

/// Which users contribute derivative nulls to the derivative-constrained
/// zero-forcing precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeUsers {
    /// Derivatives of every user, own and others'.
    #[default]
    All,
    /// Only the served user's own derivatives.
    DesiredOnly,
}

/// Reuse factor used for the small-cell VSE volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReuseRule {
    /// Number of co-channel cells actually sharing the resource.
    #[default]
    CoChannelCells,
    /// Cells per reuse cluster on the cubic lattice, `(multiple / 2)^3`.
    ClusterSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_trials: usize,
    /// Symbols detected per trial in BER runs.
    pub ber_symbols_per_trial: usize,
    pub derivative_users: DerivativeUsers,
    pub interference_norm: InterferenceNorm,
    pub reuse_rule: ReuseRule,
    pub sinr_cap: f64,
    /// Average SE over every user of a trial instead of the desired user only.
    pub all_users: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            ber_symbols_per_trial: 16,
            derivative_users: DerivativeUsers::All,
            interference_norm: InterferenceNorm::NormOfSum,
            reuse_rule: ReuseRule::CoChannelCells,
            sinr_cap: 1e12,
            all_users: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if !(self.sinr_cap > 0.0) {
            return Err(Error::InvalidConfig("sinr_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub sinr_linear: f64,
    pub se_bps_hz: f64,
    pub se_theory: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub architecture: Architecture,
    pub method: PrecoderMethod,
    pub k_db: f64,
    pub n_trials: usize,
    pub users: usize,
    pub reuse_factor: f64,
    pub avg_se_sim: f64,
    pub se_stderr: f64,
    pub avg_se_theory: f64,
    pub se_theory_stderr: f64,
    pub avg_vse_sim: f64,
    pub avg_vse_theory: f64,
    pub ber: Option<f64>,
}

/// Desired-user SINR for a given noise sample; `None` on a zero denominator.
pub fn sinr_given_noise<T: Real>(
    h0: &CVector<T>,
    precoders: &[CVector<T>],
    symbols: &[Complex<T>],
    pr_linear: T,
    w0: Complex<T>,
) -> Result<Option<T>> {
    if precoders.is_empty() || precoders.len() != symbols.len() {
        return Err(Error::LengthMismatch {
            expected: precoders.len(),
            found: symbols.len(),
        });
    }
    let amp = pr_linear.sqrt();
    let signal = h0.dotc(&precoders[0]) * symbols[0] * amp;
    let interference = precoders[1..]
        .iter()
        .zip(&symbols[1..])
        .fold(Complex::new(T::zero(), T::zero()), |acc, (e, s)| acc + h0.dotc(e) * *s);
    let denom = (interference * amp + w0).norm_sqr();
    if denom == T::zero() {
        return Ok(None);
    }
    Ok(Some(signal.norm_sqr() / denom))
}

/// `P_r |h0^H e0 s0|^2 / |sqrt(P_r) h0^H sum_n e_n s_n + w0|^2` with one fresh
/// noise draw, capped at `cap`.
pub fn instantaneous_sinr<T: Real, R: Rng + ?Sized>(
    h0: &CVector<T>,
    precoders: &[CVector<T>],
    symbols: &[Complex<T>],
    pr_linear: T,
    noise_var: T,
    cap: T,
    rng: &mut R,
) -> Result<T> {
    for _ in 0..64 {
        let w0 = complex_gaussian(rng, noise_var);
        if let Some(eta) = sinr_given_noise(h0, precoders, symbols, pr_linear, w0)? {
            return Ok(eta.min(cap));
        }
        if noise_var == T::zero() {
            return Ok(cap);
        }
    }
    Ok(cap)
}

fn steering_set<T: Real>(
    s: &Scenario<T>,
    angles: &[[crate::geometry::AnglePair<T>; 2]],
    k: usize,
) -> Result<Vec<CVector<T>>> {
    angles
        .iter()
        .map(|a| Ok(steering_vector(&s.arrays[k], &a[k], s.wavelength)?.into_entries()))
        .collect()
}

fn combined_derivative<T: Real>(s: &Scenario<T>, user: usize, axis: AngleAxis) -> Result<CVector<T>> {
    let a = &s.precoding_angles[user];
    Ok(steering_derivative(&s.arrays[0], &a[0], s.wavelength, axis)?
        + steering_derivative(&s.arrays[1], &a[1], s.wavelength, axis)?)
}

/// Precoding vectors of every user of a scenario, computed from the
/// precoding positions. Index 0 is the desired user.
pub fn precoders_for<T: Real>(
    s: &Scenario<T>,
    method: PrecoderMethod,
    derivative_users: DerivativeUsers,
) -> Result<Vec<CVector<T>>> {
    let tol = T::lit(DEFAULT_REL_TOL);
    let n = s.users();
    let left = steering_set(s, &s.precoding_angles, 0)?;
    let singles: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    let strip = |v: Vec<(CVector<T>, _)>| v.into_iter().map(|(w, _)| w).collect::<Vec<_>>();
    if method == PrecoderMethod::ConventionalZf {
        return Ok(strip(leave_group_out(&left, &singles, &[], tol)?));
    }
    let right = steering_set(s, &s.precoding_angles, 1)?;
    if left[0].len() != right[0].len() {
        return Err(Error::LengthMismatch {
            expected: left[0].len(),
            found: right[0].len(),
        });
    }
    let combined: Vec<CVector<T>> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    match method {
        PrecoderMethod::Zfp => Ok(strip(leave_group_out(&combined, &singles, &[], tol)?)),
        PrecoderMethod::Mpdr => Ok(strip(mpdr_all(&combined, tol)?)),
        PrecoderMethod::ZfpGeneral => {
            let split: Vec<CVector<T>> = left
                .iter()
                .zip(&right)
                .flat_map(|(l, r)| [l.clone(), r.clone()])
                .collect();
            let pairs: Vec<Vec<usize>> = (0..n).map(|k| vec![2 * k, 2 * k + 1]).collect();
            Ok(strip(leave_group_out(&split, &pairs, &[], tol)?))
        }
        PrecoderMethod::ZfpD => {
            let derivs: Vec<[CVector<T>; 2]> = (0..n)
                .map(|u| {
                    Ok([
                        combined_derivative(s, u, AngleAxis::Azimuth)?,
                        combined_derivative(s, u, AngleAxis::Zenith)?,
                    ])
                })
                .collect::<Result<_>>()?;
            match derivative_users {
                DerivativeUsers::All => {
                    let shared: Vec<CVector<T>> = derivs.into_iter().flatten().collect();
                    Ok(strip(leave_group_out(&combined, &singles, &shared, tol)?))
                }
                DerivativeUsers::DesiredOnly => (0..n)
                    .map(|k| {
                        let cons: Vec<&CVector<T>> = combined
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != k)
                            .map(|(_, v)| v)
                            .chain(derivs[k].iter())
                            .collect();
                        Ok(project_out(&combined[k], &cons, tol)?.0)
                    })
                    .collect(),
            }
        }
        PrecoderMethod::ConventionalZf => unreachable!("handled above"),
    }
}

struct Link<T: Real> {
    h: CVector<T>,
    los: CVector<T>,
    pr: T,
    noise: T,
}

struct Context<T> {
    generator: ScenarioGenerator<T>,
    link: LinkBudget,
    sim: SimulationConfig,
    qam: SquareQam<T>,
    k: RicianFactor<T>,
    method: PrecoderMethod,
    seed: u64,
}

impl<T: Real> Context<T> {
    fn new(cfg: &ScenarioConfig, link: &LinkBudget, sim: &SimulationConfig, method: PrecoderMethod) -> Result<Self> {
        link.validate()?;
        sim.validate()?;
        Ok(Self {
            generator: ScenarioGenerator::new(cfg)?,
            link: link.clone(),
            sim: sim.clone(),
            qam: SquareQam::from_tag(&link.modulation)?,
            k: RicianFactor::from_db(T::lit(cfg.k_db)),
            method,
            seed: cfg.seed,
        })
    }

    /// Channel, LOS vector, received power and noise variance of one user.
    fn link<R: Rng + ?Sized>(&self, s: &Scenario<T>, user: usize, rng: &mut R) -> Result<Link<T>> {
        let p = &s.true_positions[user];
        let angles = &s.true_angles[user];
        let los_l = steering_vector(&s.arrays[0], &angles[0], s.wavelength)?.into_entries();
        let (h, los, distance) = if self.method.single_array() {
            let h = rician_from_los(&los_l, &self.k, rng);
            (h, los_l, s.arrays[0].reference().distance(p))
        } else {
            let los_r = steering_vector(&s.arrays[1], &angles[1], s.wavelength)?.into_entries();
            let h = rician_from_los(&los_l, &self.k, rng) + rician_from_los(&los_r, &self.k, rng);
            let d = (s.arrays[0].reference().distance(p) + s.arrays[1].reference().distance(p)) / T::lit(2.0);
            (h, los_l + los_r, d)
        };
        let power = self.link.received_power_dbm(s.arrays[0].len(), distance.as_f64())?;
        Ok(Link {
            h,
            los,
            pr: T::lit(power.pr_linear()),
            noise: T::lit(dbm_to_mw(power.noise_dbm)),
        })
    }

    fn theory(&self, link: &Link<T>, e0: &CVector<T>, others: &[CVector<T>]) -> Result<f64> {
        let model = MomentModel {
            pr_linear: link.pr,
            k: self.k,
            noise_var: link.noise,
            nlos_arrays: T::lit(if self.method.single_array() { 1.0 } else { 2.0 }),
            interference: self.sim.interference_norm,
        };
        let moments = sinr_moments(e0, &link.los, others, &self.qam.constellation(), &model)?;
        Ok(capacity(&moments)?.as_f64())
    }

    fn trial(&self, index: usize, with_ber: bool) -> Result<TrialResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let s = self.generator.generate(&mut rng)?;
        let precoders = precoders_for(&s, self.method, self.sim.derivative_users)?;
        let cap = T::lit(self.sim.sinr_cap);

        let first = self.link(&s, 0, &mut rng)?;
        let order = self.qam.order();
        let mut labels: Vec<usize> = (0..precoders.len()).map(|_| rng.random_range(0..order)).collect();
        let mut symbols: Vec<Complex<T>> = labels.iter().map(|&l| self.qam.point(l)).collect();
        let eta = instantaneous_sinr(&first.h, &precoders, &symbols, first.pr, first.noise, cap, &mut rng)?;
        let se = |eta: T| eta.as_f64().ln_1p() / std::f64::consts::LN_2;
        let mut se_sum = se(eta);
        let mut theory_sum = self.theory(&first, &precoders[0], &precoders[1..])?;

        if self.sim.all_users {
            for user in 1..precoders.len() {
                let link = self.link(&s, user, &mut rng)?;
                let mut order_k = precoders.clone();
                order_k.swap(0, user);
                let mut syms_k = symbols.clone();
                syms_k.swap(0, user);
                let eta_k = instantaneous_sinr(&link.h, &order_k, &syms_k, link.pr, link.noise, cap, &mut rng)?;
                se_sum += se(eta_k);
                theory_sum += self.theory(&link, &order_k[0], &order_k[1..])?;
            }
        }
        let served = if self.sim.all_users { precoders.len() } else { 1 };

        let (mut errors, mut bits) = (0u64, 0u64);
        if with_ber {
            let amp = first.pr.sqrt();
            let gains: Vec<Complex<T>> = precoders.iter().map(|e| first.h.dotc(e) * amp).collect();
            for _ in 0..self.sim.ber_symbols_per_trial {
                for (l, s) in labels.iter_mut().zip(symbols.iter_mut()) {
                    *l = rng.random_range(0..order);
                    *s = self.qam.point(*l);
                }
                let y = gains
                    .iter()
                    .zip(&symbols)
                    .fold(complex_gaussian(&mut rng, first.noise), |acc, (g, s)| acc + *g * *s);
                let decided = self.qam.detect(y, gains[0]);
                errors += bit_errors(decided, labels[0]) as u64;
                bits += self.qam.bits_per_symbol() as u64;
            }
        }
        Ok(TrialResult {
            sinr_linear: eta.as_f64(),
            se_bps_hz: se_sum / served as f64,
            se_theory: theory_sum / served as f64,
            bit_errors: errors,
            bits,
        })
    }

    fn volume(&self) -> (VolumeSpec<f64>, f64) {
        let cfg = self.generator.config();
        match cfg.kind {
            Architecture::SmallCell => {
                let reuse = match self.sim.reuse_rule {
                    ReuseRule::CoChannelCells => self.generator.users() as f64,
                    ReuseRule::ClusterSize => (cfg.reuse_distance_multiple / 2.0).powi(3),
                };
                (
                    VolumeSpec::SmallCell {
                        micro_cell_diameter_m: 2.0 * cfg.micro_cell_radius,
                        reuse_factor: reuse,
                    },
                    reuse,
                )
            }
            Architecture::CellFree => (
                VolumeSpec::CellFree {
                    region_volume_m3: cfg.region_volume_m3(),
                    users: cfg.nu,
                },
                1.0,
            ),
        }
    }

    fn run(&self, with_ber: bool) -> Result<MetricsRecord> {
        let n = self.sim.n_trials;
        let trials: Vec<TrialResult> = (0..n)
            .into_par_iter()
            .map(|i| self.trial(i, with_ber))
            .collect::<Result<_>>()?;
        let (mut se, mut se2, mut th, mut th2) = (
            CompensatedSum::default(),
            CompensatedSum::default(),
            CompensatedSum::default(),
            CompensatedSum::default(),
        );
        let (mut errors, mut bits) = (0u64, 0u64);
        for t in &trials {
            se.add(t.se_bps_hz);
            se2.add(t.se_bps_hz * t.se_bps_hz);
            th.add(t.se_theory);
            th2.add(t.se_theory * t.se_theory);
            errors += t.bit_errors;
            bits += t.bits;
        }
        let nf = n as f64;
        let stderr = |sum: f64, sum2: f64| {
            if n < 2 {
                return 0.0;
            }
            let mean = sum / nf;
            let var = ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        };
        let avg_se_sim = se.value() / nf;
        let avg_se_theory = th.value() / nf;
        let (volume, reuse_factor) = self.volume();
        let cfg = self.generator.config();
        Ok(MetricsRecord {
            architecture: cfg.kind,
            method: self.method,
            k_db: cfg.k_db,
            n_trials: n,
            users: self.generator.users(),
            reuse_factor,
            avg_se_sim,
            se_stderr: stderr(se.value(), se2.value()),
            avg_se_theory,
            se_theory_stderr: stderr(th.value(), th2.value()),
            avg_vse_sim: vse(avg_se_sim, &volume)?,
            avg_vse_theory: vse(avg_se_theory, &volume)?,
            ber: with_ber.then(|| if bits == 0 { 0.0 } else { errors as f64 / bits as f64 }),
        })
    }
}

/// Spectral-efficiency Monte Carlo over `sim.n_trials` fresh deployments.
pub fn run_se_trials<T: Real>(
    cfg: &ScenarioConfig,
    link: &LinkBudget,
    method: PrecoderMethod,
    sim: &SimulationConfig,
) -> Result<MetricsRecord> {
    Context::<T>::new(cfg, link, sim, method)?.run(false)
}

/// Same as [`run_se_trials`] plus uncoded symbol detection with a genie
/// effective gain.
pub fn run_ber_trials<T: Real>(
    cfg: &ScenarioConfig,
    link: &LinkBudget,
    method: PrecoderMethod,
    sim: &SimulationConfig,
) -> Result<MetricsRecord> {
    Context::<T>::new(cfg, link, sim, method)?.run(true)
}

/// One trial of a run, for inspection and tests.
pub fn single_trial<T: Real>(
    cfg: &ScenarioConfig,
    link: &LinkBudget,
    method: PrecoderMethod,
    sim: &SimulationConfig,
    index: usize,
    with_ber: bool,
) -> Result<TrialResult> {
    Context::<T>::new(cfg, link, sim, method)?.trial(index, with_ber)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    SpectralEfficiency,
    BitErrorRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub grid_index: usize,
    pub method: PrecoderMethod,
    pub record: Result<MetricsRecord>,
}

/// Runs every (grid point, method) pair in order. Each cell uses the seed in
/// its own configuration; failures are recorded and the sweep continues.
pub fn sweep<T: Real>(
    grid: &[ScenarioConfig],
    methods: &[PrecoderMethod],
    link: &LinkBudget,
    sim: &SimulationConfig,
    metric: Metric,
) -> Vec<SweepCell> {
    let mut out = Vec::with_capacity(grid.len() * methods.len());
    for (grid_index, cfg) in grid.iter().enumerate() {
        for &method in methods {
            let record = match metric {
                Metric::SpectralEfficiency => run_se_trials::<T>(cfg, link, method, sim),
                Metric::BitErrorRate => run_ber_trials::<T>(cfg, link, method, sim),
            };
            out.push(SweepCell {
                grid_index,
                method,
                record,
            });
        }
    }
    out
}

/// `|h0^H e|` for diagnostics.
pub fn effective_gain<T: Real>(h0: &CVector<T>, e: &CVector<T>) -> T {
    modulus(h0.dotc(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{planar_array, Position};
    use crate::num::norm_sqr;

    type C = Complex<f64>;

    fn quick(n: usize) -> SimulationConfig {
        SimulationConfig {
            n_trials: n,
            ..SimulationConfig::default()
        }
    }

    fn small(nu: usize) -> ScenarioConfig {
        ScenarioConfig {
            nu,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn scalar_sinr_example() {
        let h = CVector::from_vec(vec![C::new(1.0, 0.0)]);
        let e = vec![CVector::from_vec(vec![C::new(1.0, 0.0)])];
        let eta = sinr_given_noise(&h, &e, &[C::new(1.0, 0.0)], 1.0, C::new(0.6, 0.8)).unwrap();
        assert!((eta.unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            sinr_given_noise(&h, &e, &[C::new(1.0, 0.0)], 1.0, C::new(0.0, 0.0)).unwrap(),
            None
        );
    }

    #[test]
    fn noiseless_interference_free_is_capped() {
        let h = CVector::from_vec(vec![C::new(1.0, 0.0), C::new(0.0, 1.0)]);
        let e = vec![h.clone(), CVector::zeros(2)];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let eta = instantaneous_sinr(&h, &e, &[C::new(1.0, 0.0); 2], 1.0, 0.0, 1e12, &mut rng).unwrap();
        assert_eq!(eta, 1e12);
    }

    #[test]
    fn los_channels_with_zfp_leave_only_noise() {
        let s: Scenario<f64> = ScenarioGenerator::new(&small(6))
            .unwrap()
            .generate(&mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        let w = precoders_for(&s, PrecoderMethod::Zfp, DerivativeUsers::All).unwrap();
        let h0 = steering_vector(&s.arrays[0], &s.true_angles[0][0], s.wavelength)
            .unwrap()
            .into_entries()
            + steering_vector(&s.arrays[1], &s.true_angles[0][1], s.wavelength)
                .unwrap()
                .into_entries();
        let syms = vec![C::new(0.7, -0.3); w.len()];
        let w0 = C::new(1e-3, 2e-3);
        let pr = 1e-6;
        let eta = sinr_given_noise(&h0, &w, &syms, pr, w0).unwrap().unwrap();
        let exact = pr * (h0.dotc(&w[0]) * syms[0]).norm_sqr() / w0.norm_sqr();
        assert!((eta - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn batch_precoders_match_single_user_solutions() {
        let s: Scenario<f64> = ScenarioGenerator::new(&small(8))
            .unwrap()
            .generate(&mut ChaCha8Rng::seed_from_u64(4))
            .unwrap();
        let comb: Vec<CVector<f64>> = (0..s.users())
            .map(|u| {
                steering_vector(&s.arrays[0], &s.precoding_angles[u][0], s.wavelength)
                    .unwrap()
                    .into_entries()
                    + steering_vector(&s.arrays[1], &s.precoding_angles[u][1], s.wavelength)
                        .unwrap()
                        .into_entries()
            })
            .collect();
        let w = precoders_for(&s, PrecoderMethod::Zfp, DerivativeUsers::All).unwrap();
        for k in 0..s.users() {
            let others: Vec<_> = comb
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, v)| v.clone())
                .collect();
            let solo = crate::precoder::zfp(&crate::precoder::ConstraintSet::new(comb[k].clone(), others)).unwrap();
            assert!((&w[k] - solo.weights).norm() < 1e-8 * w[k].norm());
        }
        let wd = precoders_for(&s, PrecoderMethod::ZfpD, DerivativeUsers::All).unwrap();
        let wd_own = precoders_for(&s, PrecoderMethod::ZfpD, DerivativeUsers::DesiredOnly).unwrap();
        for k in 0..s.users() {
            for j in 0..s.users() {
                if j != k {
                    assert!(wd[k].dotc(&comb[j]).norm() < 1e-9 * 128.0 * comb[j].norm());
                    assert!(wd_own[k].dotc(&comb[j]).norm() < 1e-9 * 128.0 * comb[j].norm());
                }
            }
            assert!(norm_sqr(&wd[k]) <= norm_sqr(&wd_own[k]) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn run_is_reproducible() {
        let link = LinkBudget::default();
        let a = run_se_trials::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(20)).unwrap();
        let b = run_se_trials::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(20)).unwrap();
        assert_eq!(a, b);
        let one = run_se_trials::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(1)).unwrap();
        assert_eq!(one.se_stderr, 0.0);
        let first = single_trial::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(1), 0, false).unwrap();
        assert_eq!(one.avg_se_sim, first.se_bps_hz);
    }

    #[test]
    fn interference_free_matches_log_snr() {
        let link = LinkBudget::default();
        let cfg = ScenarioConfig {
            nu: 1,
            k_db: 40.0,
            ..ScenarioConfig::default()
        };
        let sim = quick(1);
        for i in 0..20 {
            let t = single_trial::<f64>(&cfg, &link, PrecoderMethod::Zfp, &sim, i, false).unwrap();
            // K = 40 dB: the channel is the LOS vector, so |h^H e0|^2 ~ (2M)^2
            let s: Scenario<f64> = {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                ScenarioGenerator::new(&cfg).unwrap().generate(&mut rng).unwrap()
            };
            let p = &s.true_positions[0];
            let d = (s.arrays[0].reference().distance(p) + s.arrays[1].reference().distance(p)) / 2.0;
            let pw = link.received_power_dbm(64, d).unwrap();
            let snr_db = pw.pr_dbm - pw.noise_dbm + 20.0 * 128f64.log10();
            // symbol energy and noise draw spread the sample by a few dB
            assert!(
                (t.se_bps_hz - snr_db / 10.0 * 10f64.log2()).abs() < 8.0,
                "{} vs {}",
                t.se_bps_hz,
                snr_db
            );
        }
    }

    #[test]
    fn ber_examples() {
        let link = LinkBudget {
            rx_noise_db: -250.0,
            ..LinkBudget::default()
        };
        let cfg = ScenarioConfig {
            nu: 1,
            ..ScenarioConfig::default()
        };
        let sim = quick(50);
        let r = run_ber_trials::<f64>(&cfg, &link, PrecoderMethod::Zfp, &sim).unwrap();
        assert_eq!(r.ber, Some(0.0));

        // a zero gain always decides label 0: half the bits wrong on average
        let q = SquareQam::<f64>::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut errs = 0;
        let trials = 20_000;
        for _ in 0..trials {
            let l = rng.random_range(0..64);
            errs += bit_errors(q.detect(q.point(l), C::new(0.0, 0.0)), l);
        }
        let ber = errs as f64 / (6.0 * trials as f64);
        assert!((ber - 0.5).abs() < 0.01);
    }

    #[test]
    fn stderr_shrinks_with_trials() {
        let link = LinkBudget::default();
        let a = run_se_trials::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(1000)).unwrap();
        let b = run_se_trials::<f64>(&small(6), &link, PrecoderMethod::Zfp, &quick(4000)).unwrap();
        let ratio = a.se_stderr / b.se_stderr;
        assert!((ratio - 2.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn sweep_examples() {
        let link = LinkBudget::default();
        assert!(sweep::<f64>(
            &[],
            &[PrecoderMethod::Zfp],
            &link,
            &quick(5),
            Metric::SpectralEfficiency
        )
        .is_empty());
        let grid = vec![small(5), small(5)];
        let cells = sweep::<f64>(
            &grid,
            &[PrecoderMethod::Zfp, PrecoderMethod::Mpdr],
            &link,
            &quick(5),
            Metric::SpectralEfficiency,
        );
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].record, cells[2].record);
        assert_eq!(cells[1].record, cells[3].record);

        // more constraints than elements: the cell fails, the sweep finishes
        let tiny = ScenarioConfig {
            aa_rows: 2,
            aa_cols: 2,
            nu: 10,
            ..ScenarioConfig::default()
        };
        let cells = sweep::<f64>(
            &[tiny, small(4)],
            &[PrecoderMethod::Zfp],
            &link,
            &quick(3),
            Metric::SpectralEfficiency,
        );
        assert!(matches!(cells[0].record, Err(Error::InfeasibleConstraints { .. })));
        assert!(cells[1].record.is_ok());
    }

    #[test]
    fn conventional_uses_one_array() {
        let s: Scenario<f64> = ScenarioGenerator::new(&small(4))
            .unwrap()
            .generate(&mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let w = precoders_for(&s, PrecoderMethod::ConventionalZf, DerivativeUsers::All).unwrap();
        assert_eq!(w[0].len(), 64);
        let g = planar_array(1, 1, 0.5, Position::origin()).unwrap();
        assert_eq!(g.len(), 1);
    }
}
