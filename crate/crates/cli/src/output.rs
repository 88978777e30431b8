//! CSV rows for sweep results and the theory table.

use std::io::Write;

use cobeam::simulator::MetricsRecord;

use crate::error::CliError;

pub const SWEEP_COLUMNS: &[&str] = &[
    "subcommand",
    "seed",
    "sweep_param",
    "sweep_value",
    "precoder",
    "architecture",
    "k_db",
    "n_trials",
    "users",
    "avg_se_sim",
    "se_stderr",
    "avg_se_theory",
    "avg_vse_sim",
    "avg_vse_theory",
    "ber",
    "error",
    "config",
    "runtime_s",
];

pub const THEORY_COLUMNS: &[&str] = &[
    "subcommand",
    "k_s",
    "c_sigma",
    "formula",
    "closed_form",
    "quadrature",
    "residual",
];

/// One sweep cell, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub subcommand: String,
    pub seed: u64,
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub precoder: String,
    pub architecture: String,
    pub k_db: f64,
    pub n_trials: usize,
    pub result: Result<MetricsRecord, String>,
    pub config: String,
    pub runtime_s: f64,
}

/// Shortest round-trip decimal; exponent form for very small or large values.
fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl SweepRow {
    fn fields(&self, runtime: bool) -> Vec<String> {
        let (metrics, error) = match &self.result {
            Ok(m) => (Some(m), String::new()),
            Err(e) => (None, e.clone()),
        };
        let m = |f: fn(&MetricsRecord) -> f64| metrics.map(f).map(num).unwrap_or_default();
        let mut out = vec![
            self.subcommand.clone(),
            self.seed.to_string(),
            self.sweep_param.clone(),
            opt(self.sweep_value),
            self.precoder.clone(),
            self.architecture.clone(),
            num(self.k_db),
            self.n_trials.to_string(),
            metrics.map(|r| r.users.to_string()).unwrap_or_default(),
            m(|r| r.avg_se_sim),
            m(|r| r.se_stderr),
            m(|r| r.avg_se_theory),
            m(|r| r.avg_vse_sim),
            m(|r| r.avg_vse_theory),
            opt(metrics.and_then(|r| r.ber)),
            error,
            self.config.clone(),
        ];
        if runtime {
            out.push(format!("{:.3}", self.runtime_s));
        }
        out
    }
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow], runtime: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let cols = if runtime {
        SWEEP_COLUMNS
    } else {
        &SWEEP_COLUMNS[..SWEEP_COLUMNS.len() - 1]
    };
    w.write_record(cols)?;
    for r in rows {
        w.write_record(r.fields(runtime))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub k_s: f64,
    pub c_sigma: f64,
    pub formula: &'static str,
    pub closed_form: Result<f64, String>,
    pub quadrature: Result<f64, String>,
}

pub fn write_theory<W: Write>(out: W, rows: &[TheoryRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THEORY_COLUMNS)?;
    for r in rows {
        let cell = |v: &Result<f64, String>| match v {
            Ok(x) => num(*x),
            Err(e) => format!("error: {e}"),
        };
        let residual = match (&r.closed_form, &r.quadrature) {
            (Ok(a), Ok(b)) => num((a - b).abs()),
            _ => String::new(),
        };
        w.write_record([
            "theory-table".to_string(),
            num(r.k_s),
            num(r.c_sigma),
            r.formula.to_string(),
            cell(&r.closed_form),
            cell(&r.quadrature),
            residual,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 2.0, 1.8194e-11, 0.1 + 0.2, 123456.789, 3e20, -4.5e-7] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(2.0), "2");
        assert_eq!(num(1.5e-11), "1.5e-11");
    }
}
