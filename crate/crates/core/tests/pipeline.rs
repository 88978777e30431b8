use cobeam::scenario::{Architecture, ScenarioConfig, ScenarioGenerator};
use cobeam::simulator::{precoders_for, run_ber_trials, run_se_trials, DerivativeUsers, SimulationConfig};
use cobeam::{steering_vector, LinkBudget, PrecoderMethod};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sim(n: usize) -> SimulationConfig {
    SimulationConfig {
        n_trials: n,
        ..Default::default()
    }
}

fn los_leak(kind: Architecture, method: PrecoderMethod, seed: u64) -> f64 {
    let cfg = ScenarioConfig {
        kind,
        nu: 8,
        ..Default::default()
    };
    let s = ScenarioGenerator::<f64>::new(&cfg)
        .unwrap()
        .generate(&mut ChaCha8Rng::seed_from_u64(seed))
        .unwrap();
    let ws = precoders_for(&s, method, DerivativeUsers::All).unwrap();
    let mut worst = 0.0f64;
    for (k, w) in ws.iter().enumerate() {
        for (j, a) in s.true_angles.iter().enumerate() {
            if j == k {
                continue;
            }
            let h = steering_vector(&s.arrays[0], &a[0], s.wavelength)
                .unwrap()
                .into_entries()
                + steering_vector(&s.arrays[1], &a[1], s.wavelength)
                    .unwrap()
                    .into_entries();
            worst = worst.max(h.dotc(w).norm() / (w.norm() * h.norm()));
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_forcing_nulls_every_other_user(seed in any::<u64>(), cell_free in any::<bool>(), derivs in any::<bool>()) {
        let kind = if cell_free { Architecture::CellFree } else { Architecture::SmallCell };
        let method = if derivs { PrecoderMethod::ZfpD } else { PrecoderMethod::Zfp };
        prop_assert!(los_leak(kind, method, seed) < 1e-9);
    }
}

#[test]
fn ber_does_not_grow_with_k() {
    let link = LinkBudget::default();
    let bers: Vec<f64> = [0.0, 10.0, 20.0]
        .iter()
        .map(|&k| {
            let cfg = ScenarioConfig {
                k_db: k,
                nu: 6,
                ..Default::default()
            };
            run_ber_trials::<f64>(&cfg, &link, PrecoderMethod::Zfp, &sim(600))
                .unwrap()
                .ber
                .unwrap()
        })
        .collect();
    assert!(bers.windows(2).all(|w| w[1] <= w[0]), "{bers:?}");
    assert!(bers[0] > bers[2]);
}

#[test]
fn single_and_double_precision_agree() {
    let link = LinkBudget::default();
    let cfg = ScenarioConfig {
        nu: 5,
        ..Default::default()
    };
    let a = run_se_trials::<f64>(&cfg, &link, PrecoderMethod::Zfp, &sim(200)).unwrap();
    let b = run_se_trials::<f32>(&cfg, &link, PrecoderMethod::Zfp, &sim(200)).unwrap();
    assert_eq!(a.users, b.users);
    assert!(
        (a.avg_se_sim - b.avg_se_sim).abs() < 0.05 * a.avg_se_sim,
        "{} vs {}",
        a.avg_se_sim,
        b.avg_se_sim
    );
    assert!((a.avg_se_theory - b.avg_se_theory).abs() < 0.05 * a.avg_se_theory);
}

#[test]
fn more_users_cost_spectral_efficiency_in_cell_free() {
    let link = LinkBudget::default();
    let se = |nu| {
        let cfg = ScenarioConfig {
            kind: Architecture::CellFree,
            nu,
            ..Default::default()
        };
        run_se_trials::<f64>(&cfg, &link, PrecoderMethod::Zfp, &sim(300))
            .unwrap()
            .avg_se_sim
    };
    assert!(se(4) > se(24));
}
