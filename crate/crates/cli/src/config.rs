//! Experiment configuration: a JSON document whose omitted fields take the
//! built-in defaults, plus dotted-path overrides.

use std::path::{Path, PathBuf};

use cobeam::scenario::ScenarioConfig;
use cobeam::simulator::SimulationConfig;
use cobeam::{LinkBudget, PrecoderMethod};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path into the experiment config, or an alias such as `radius`.
    pub param: String,
    pub values: Vec<f64>,
}

/// Grid for `theory-table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoryGrid {
    pub k_values: Vec<f64>,
    pub c_values: Vec<f64>,
}

impl Default for TheoryGrid {
    fn default() -> Self {
        Self {
            k_values: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            c_values: vec![0.5, 1.0, 2.0, 10.0, 100.0, 1e4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub link: LinkBudget,
    /// Simulation options; its `n_trials` is replaced by the top-level value.
    pub simulation: SimulationConfig,
    /// Empty means the subcommand's own default list.
    pub precoders: Vec<PrecoderMethod>,
    /// `None` runs a single point (or the subcommand's default sweep when
    /// `default_sweep` is set).
    pub sweep: Option<SweepSpec>,
    pub default_sweep: bool,
    pub n_trials: usize,
    /// Replaces `scenario.seed` for every run.
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub theory: TheoryGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            link: LinkBudget::default(),
            simulation: SimulationConfig::default(),
            precoders: Vec::new(),
            sweep: None,
            default_sweep: true,
            n_trials: 10_000,
            master_seed: 1,
            output: None,
            theory: TheoryGrid::default(),
        }
    }
}

/// Short names accepted by `--set` and `sweep.param`.
const ALIASES: &[(&str, &str)] = &[
    ("radius", "scenario.micro_cell_radius"),
    ("k_db", "scenario.k_db"),
    ("nu", "scenario.nu"),
    ("na", "scenario.na"),
    ("kind", "scenario.kind"),
    ("error_var", "scenario.position_error_var_m2"),
    ("position_error_var_m2", "scenario.position_error_var_m2"),
    ("trials", "n_trials"),
    ("seed", "master_seed"),
    ("modulation", "link.modulation"),
];

/// Pseudo-parameters that set two fields at once.
const SQUARE_ALIASES: &[(&str, [&str; 2])] = &[
    ("aa_size", ["scenario.aa_rows", "scenario.aa_cols"]),
    ("ne_size", ["scenario.ne_rows", "scenario.ne_cols"]),
];

/// Expands an alias into the dotted paths it writes.
pub fn resolve_param(name: &str) -> Vec<String> {
    if let Some((_, paths)) = SQUARE_ALIASES.iter().find(|(a, _)| *a == name) {
        return paths.iter().map(|p| p.to_string()).collect();
    }
    let path = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map(|(_, p)| *p)
        .unwrap_or(name);
    vec![path.to_string()]
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("empty segment in `{path}`")));
        }
        let map = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{}` is not a section", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            if !map.contains_key(*part) {
                return Err(CliError::Config(format!("unknown key `{path}`")));
            }
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .get_mut(*part)
            .ok_or_else(|| CliError::Config(format!("unknown key `{path}`")))?;
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    Ok(())
}

/// Parses an override value: JSON when it parses, a bare string otherwise.
fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `K=V` overrides to a config tree.
pub fn apply_overrides(tree: &mut Value, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not KEY=VALUE")))?;
        let value = parse_value(raw.trim());
        for path in resolve_param(key.trim()) {
            set_path(tree, &path, value.clone())?;
        }
    }
    Ok(())
}

/// Writes `value` at the sweep parameter's path(s) of a config tree.
pub fn set_param(tree: &mut Value, param: &str, value: f64) -> Result<(), CliError> {
    let paths = resolve_param(param);
    for path in &paths {
        let current =
            lookup(tree, path).ok_or_else(|| CliError::Config(format!("unknown sweep parameter `{param}`")))?;
        let v = if current.is_u64() {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(CliError::Config(format!("`{param}` needs whole numbers, got {value}")));
            }
            Value::from(value as u64)
        } else if current.is_number() {
            serde_json::Number::from_f64(value)
                .map(Value::Number)
                .ok_or_else(|| CliError::Config(format!("`{param}` value {value} is not finite")))?
        } else {
            return Err(CliError::Config(format!("`{param}` is not numeric")));
        };
        set_path(tree, path, v)?;
    }
    Ok(())
}

fn lookup<'a>(tree: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(tree, |node, part| node.get(part))
}

fn to_tree(cfg: &ExperimentConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn from_tree(tree: Value) -> Result<ExperimentConfig, CliError> {
    serde_json::from_value(tree).map_err(|e| CliError::Config(e.to_string()))
}

/// Parses config text; errors carry the line and column of the problem.
pub fn parse_config_text(text: &str, origin: &str) -> Result<ExperimentConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg = ExperimentConfig::deserialize(&mut de)
        .and_then(|c| de.end().map(|_| c))
        .map_err(|e| {
            let msg = e.to_string();
            let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
            CliError::Config(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
        })?;
    Ok(cfg)
}

/// Loads a config file (or the defaults) and applies overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let base = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse_config_text(&text, &p.display().to_string())?
        }
        None => ExperimentConfig::default(),
    };
    if overrides.is_empty() {
        return Ok(base);
    }
    let mut tree = to_tree(&base);
    apply_overrides(&mut tree, overrides)?;
    from_tree(tree)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_trials == 0 {
            return Err(CliError::Config("n_trials must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::Config("sweep.values must not be empty".into()));
            }
        }
        self.point_configs()?;
        Ok(())
    }

    /// Simulation options with the top-level trial count.
    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            n_trials: self.n_trials,
            ..self.simulation.clone()
        }
    }

    /// Scenario with the master seed applied.
    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            seed: self.master_seed,
            ..self.scenario.clone()
        }
    }

    /// One single-point experiment per sweep value, each re-runnable on its
    /// own. Without a sweep the config itself is the only point.
    pub fn point_configs(&self) -> Result<Vec<(Option<f64>, ExperimentConfig)>, CliError> {
        let Some(sweep) = &self.sweep else {
            let mut single = self.clone();
            single.default_sweep = false;
            single
                .scenario()
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
            return Ok(vec![(None, single)]);
        };
        let mut base = self.clone();
        base.sweep = None;
        base.default_sweep = false;
        let tree = to_tree(&base);
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut t = tree.clone();
                set_param(&mut t, &sweep.param, v)?;
                let point = from_tree(t)?;
                point
                    .scenario()
                    .validate()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                point.link.validate().map_err(|e| CliError::Config(e.to_string()))?;
                Ok((Some(v), point))
            })
            .collect()
    }

    /// Compact JSON used as the config echo column.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_object() {
        let cfg = parse_config_text("{}", "t").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn errors_carry_line_and_column() {
        let text = "{\n  \"n_trials\": 5,\n  \"scenario\": { \"nope\": 1 }\n}";
        let err = parse_config_text(text, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("cfg.json:3:"), "{err}");
        assert!(err.contains("nope"), "{err}");
        let err = parse_config_text("{\n\"n_trials\": ,\n}", "x").unwrap_err().to_string();
        assert!(err.contains("x:2:"), "{err}");
    }

    #[test]
    fn overrides_follow_aliases_and_paths() {
        let mut tree = to_tree(&ExperimentConfig::default());
        apply_overrides(
            &mut tree,
            &[
                "radius=30".into(),
                "scenario.k_db=5".into(),
                "aa_size=12".into(),
                "kind=cell_free".into(),
                "simulation.interference_norm=sum_of_norms".into(),
            ],
        )
        .unwrap();
        let cfg = from_tree(tree).unwrap();
        assert_eq!(cfg.scenario.micro_cell_radius, 30.0);
        assert_eq!(cfg.scenario.k_db, 5.0);
        assert_eq!((cfg.scenario.aa_rows, cfg.scenario.aa_cols), (12, 12));
        assert_eq!(cfg.scenario.kind, cobeam::scenario::Architecture::CellFree);
        assert_eq!(cfg.simulation.interference_norm, cobeam::InterferenceNorm::SumOfNorms);
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let mut tree = to_tree(&ExperimentConfig::default());
        assert!(apply_overrides(&mut tree, &["scenario.bogus=1".into()]).is_err());
        assert!(apply_overrides(&mut tree, &["novalue".into()]).is_err());
        assert!(apply_overrides(&mut tree, &["n_trials.x=1".into()]).is_err());
    }

    #[test]
    fn sweep_points_are_standalone() {
        let cfg = ExperimentConfig {
            sweep: Some(SweepSpec {
                param: "nu".into(),
                values: vec![3.0, 7.0],
            }),
            ..ExperimentConfig::default()
        };
        let points = cfg.point_configs().unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[1].1.scenario.nu, 7);
        assert!(points[1].1.sweep.is_none());
        let echo = parse_config_text(&points[1].1.to_json(), "echo").unwrap();
        assert_eq!(echo, points[1].1);

        let bad = ExperimentConfig {
            sweep: Some(SweepSpec {
                param: "nu".into(),
                values: vec![2.5],
            }),
            ..ExperimentConfig::default()
        };
        assert!(bad.point_configs().is_err());
    }
}
