//! Closed forms against their numerical oracles.

use cobeam::theory::quadrature::QuadratureOptions;
use cobeam::theory::{
    capacity_quadrature, capacity_theorem1, capacity_theorem2, confluent_closed_form, confluent_integral, density_mass,
    SinrMoments, Theorem1Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed error against the tolerance.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tolerance: f64, detail: String) -> Check {
    Check {
        name,
        passed: worst.is_finite() && worst <= tolerance,
        worst,
        tolerance,
        detail,
    }
}

/// `n` points from `lo` to `hi`, evenly spaced in log.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn shape(k: f64, c: f64) -> SinrMoments<f64> {
    SinrMoments::from_shape(k, c).expect("valid shape")
}

/// Zero-mean closed form against quadrature of the density, absolute error.
pub fn theorem2_vs_quadrature() -> Check {
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for c in log_space(0.01, 1e6, 50) {
        let err = match (capacity_theorem2(c), capacity_quadrature(&shape(0.0, c))) {
            (Ok(a), Ok(q)) => (a - q.capacity).abs(),
            _ => f64::INFINITY,
        };
        if !(err <= worst) {
            worst = err;
            at = c;
        }
    }
    check(
        "theorem2_vs_quadrature",
        worst,
        1e-6,
        format!("worst at c_sigma={at:.4e}"),
    )
}

pub fn theorem2_unit_limit() -> Check {
    let err = capacity_theorem2(1.0f64)
        .map(|v| (v - std::f64::consts::LOG2_E).abs())
        .unwrap_or(f64::INFINITY);
    check("theorem2_unit_limit", err, 1e-9, "c_sigma=1 against log2(e)".into())
}

fn theorem1_worst(variant: Theorem1Variant) -> (f64, f64, f64) {
    let mut worst = (0.0f64, 0.0, 0.0);
    for k in log_space(0.1, 10.0, 10) {
        for c in log_space(0.1, 1e4, 10) {
            let rel = match (capacity_theorem1(k, c, variant), capacity_quadrature(&shape(k, c))) {
                (Ok(a), Ok(q)) => ((a - q.capacity) / q.capacity).abs(),
                _ => f64::INFINITY,
            };
            if !(rel <= worst.0) {
                worst = (rel, k, c);
            }
        }
    }
    worst
}

/// Shipped Rician closed form against quadrature, relative error.
pub fn theorem1_vs_quadrature() -> Check {
    let (rel, k, c) = theorem1_worst(Theorem1Variant::NegativeArgument);
    check(
        "theorem1_vs_quadrature",
        rel,
        1e-4,
        format!("-Ei(-k^2) variant; worst at k_s={k:.3}, c_sigma={c:.3e}"),
    )
}

/// The `-Ei(+k^2)` reading must disagree with quadrature; this pins the sign.
pub fn theorem1_positive_sign_rejected() -> Check {
    let (rel, _, _) = theorem1_worst(Theorem1Variant::PositiveArgument);
    Check {
        name: "theorem1_positive_sign_rejected",
        passed: rel > 1e-2,
        worst: rel,
        tolerance: 1e-2,
        detail: "-Ei(+k^2) variant must miss quadrature by > 1e-2".into(),
    }
}

/// Random moment sets whose density should integrate to 1.
pub fn random_shapes(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (
                10f64.powf(rng.random_range(-1.0..1.0)),
                10f64.powf(rng.random_range(-1.0..3.0)),
            )
        })
        .collect()
}

pub fn density_mass_check() -> Check {
    let opts = QuadratureOptions::new(1e-12, 1e-12);
    let mut worst = 0.0f64;
    for (k, c) in random_shapes(20, 7) {
        let err = density_mass(&shape(k, c), opts)
            .map(|q| (q.value - 1.0).abs())
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
    }
    check("density_mass", worst, 1e-6, "20 random (k_s, c_sigma)".into())
}

pub fn confluent_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = rng.random_range(0.05..4.0);
        let c = 1.0 + 10f64.powf(rng.random_range(-2.0..3.0));
        let err = match (confluent_closed_form(k, c), confluent_integral(k, c)) {
            (Ok(a), Ok(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    check(
        "exponential_integral_identity",
        worst,
        1e-8,
        "20 random (k, c > 1)".into(),
    )
}

pub fn run_all() -> Vec<Check> {
    vec![
        theorem2_vs_quadrature(),
        theorem2_unit_limit(),
        theorem1_vs_quadrature(),
        theorem1_positive_sign_rejected(),
        density_mass_check(),
        confluent_identity(),
    ]
}

pub fn format_table(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "{:<6} {:<34} worst={:.3e} tol={:.1e}  {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance,
            c.detail
        ));
    }
    s
}
