//! Subcommand drivers. Each study expands the experiment config into
//! single-point configs and runs every (point, precoder) pair in order.

use std::time::Instant;

use cobeam::scenario::{Architecture, ScenarioGenerator};
use cobeam::simulator::{run_ber_trials, run_se_trials, Metric};
use cobeam::theory::{capacity, capacity_quadrature, SinrMoments};
use cobeam::PrecoderMethod;

use crate::config::{ExperimentConfig, SweepSpec};
use crate::error::CliError;
use crate::output::{SweepRow, TheoryRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    SmallCellSweep,
    CellFreeSweep,
    CompareArch,
    PrecoderCompare,
    Ber,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::SmallCellSweep => "smallcell-sweep",
            Study::CellFreeSweep => "cellfree-sweep",
            Study::CompareArch => "compare-arch",
            Study::PrecoderCompare => "precoder-compare",
            Study::Ber => "ber",
        }
    }

    fn default_sweep(self) -> SweepSpec {
        let (param, values) = match self {
            Study::SmallCellSweep => ("radius", vec![15.0, 20.0, 25.0, 30.0, 35.0, 40.0]),
            Study::CellFreeSweep => ("nu", vec![5.0, 10.0, 20.0, 40.0, 80.0]),
            Study::CompareArch | Study::Ber => ("k_db", vec![0.0, 5.0, 10.0, 15.0]),
            Study::PrecoderCompare => ("error_var", vec![0.0, 1.0]),
        };
        SweepSpec {
            param: param.into(),
            values,
        }
    }

    fn default_precoders(self) -> Vec<PrecoderMethod> {
        match self {
            Study::SmallCellSweep => vec![PrecoderMethod::Zfp, PrecoderMethod::ZfpD, PrecoderMethod::Mpdr],
            Study::PrecoderCompare => vec![
                PrecoderMethod::Zfp,
                PrecoderMethod::ZfpD,
                PrecoderMethod::Mpdr,
                PrecoderMethod::ConventionalZf,
            ],
            _ => vec![PrecoderMethod::Zfp],
        }
    }

    fn metric(self) -> Metric {
        match self {
            Study::CompareArch | Study::Ber => Metric::BitErrorRate,
            _ => Metric::SpectralEfficiency,
        }
    }

    /// Architectures run at every point; `None` keeps the configured one.
    fn architectures(self) -> Vec<Option<Architecture>> {
        match self {
            Study::SmallCellSweep => vec![Some(Architecture::SmallCell)],
            Study::CellFreeSweep => vec![Some(Architecture::CellFree)],
            Study::CompareArch => vec![Some(Architecture::SmallCell), Some(Architecture::CellFree)],
            Study::PrecoderCompare | Study::Ber => vec![None],
        }
    }
}

fn run_point(
    cfg: &ExperimentConfig,
    method: PrecoderMethod,
    metric: Metric,
) -> Result<cobeam::simulator::MetricsRecord, String> {
    let scenario = cfg.scenario();
    let sim = cfg.simulation();
    let r = match metric {
        Metric::SpectralEfficiency => run_se_trials::<f64>(&scenario, &cfg.link, method, &sim),
        Metric::BitErrorRate => run_ber_trials::<f64>(&scenario, &cfg.link, method, &sim),
    };
    r.map_err(|e| e.to_string())
}

/// Runs a sweep study. Per-cell failures land in the row's error column.
pub fn run_study(study: Study, cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let mut cfg = cfg.clone();
    if cfg.sweep.is_none() && cfg.default_sweep {
        cfg.sweep = Some(study.default_sweep());
    }
    cfg.validate()?;
    let methods = if cfg.precoders.is_empty() {
        study.default_precoders()
    } else {
        cfg.precoders.clone()
    };
    let param = cfg.sweep.as_ref().map(|s| s.param.clone()).unwrap_or_default();
    let mut rows = Vec::new();
    for (value, point) in cfg.point_configs()? {
        for arch in study.architectures() {
            let mut point = point.clone();
            if let Some(kind) = arch {
                point.scenario.kind = kind;
            }
            if study == Study::CompareArch && point.scenario.kind == Architecture::CellFree {
                // cell-free serves as many users as the small-cell lattice holds
                let mut sc = point.scenario();
                sc.kind = Architecture::SmallCell;
                let users = ScenarioGenerator::<f64>::new(&sc).map_err(|e| CliError::Config(e.to_string()))?;
                point.scenario.nu = users.users();
            }
            for &method in &methods {
                let mut single = point.clone();
                single.precoders = vec![method];
                let start = Instant::now();
                let result = run_point(&single, method, study.metric());
                rows.push(SweepRow {
                    subcommand: study.name().into(),
                    seed: single.master_seed,
                    sweep_param: param.clone(),
                    sweep_value: value,
                    precoder: method.as_str().into(),
                    architecture: single.scenario.kind.as_str().into(),
                    k_db: single.scenario.k_db,
                    n_trials: single.n_trials,
                    result,
                    config: single.to_json(),
                    runtime_s: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(rows)
}

/// Closed-form capacity and its quadrature oracle over the configured grid.
pub fn theory_table(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>, CliError> {
    let grid = &cfg.theory;
    if grid.k_values.is_empty() || grid.c_values.is_empty() {
        return Err(CliError::Config(
            "theory.k_values and theory.c_values must not be empty".into(),
        ));
    }
    let mut rows = Vec::new();
    for &k in &grid.k_values {
        for &c in &grid.c_values {
            let m = SinrMoments::from_shape(k, c).map_err(|e| CliError::Config(e.to_string()))?;
            let formula = if k <= 1e-6 { "theorem2" } else { "theorem1" };
            rows.push(TheoryRow {
                k_s: k,
                c_sigma: c,
                formula,
                closed_form: capacity(&m).map_err(|e| e.to_string()),
                quadrature: capacity_quadrature(&m).map(|q| q.capacity).map_err(|e| e.to_string()),
            });
        }
    }
    Ok(rows)
}
