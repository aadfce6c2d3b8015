//! JSON experiment configuration: schema, validation, and construction of
//! the core experiment objects.
//!
//! Configs are strict (unknown fields are rejected) and round-trip through
//! serde unchanged up to key order, so a written config is always a valid
//! reproduction recipe.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use zomd::analysis::AnalysisOptions;
use zomd::estimator::NgaConfig;
use zomd::geometry::{FeasibleSet, Geometry, MirrorMap, Norm, NormPair};
use zomd::oracle::{BiasField, NoiseModel, ObjectiveSpec, QuadraticForm, SmoothnessClass};
use zomd::solver::{Experiment, StepSchedule};

/// Configuration failure with the offending config path.
#[derive(Debug)]
pub struct ConfigError {
    pub context: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.context.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.context, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(context: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError {
        context: context.to_string(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub noise: NoiseConfig,
    pub geometry: GeometryConfig,
    pub estimator: EstimatorConfig,
    pub schedule: ScheduleConfig,
    pub run: RunConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ClassConfig {
    C00,
    C11,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadraticCoefficients {
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    Quadratic {
        q: QuadraticCoefficients,
        c: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        class: Option<ClassConfig>,
    },
    AbsSum {
        anchor: Vec<f64>,
    },
    LogSumExp {
        scale: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        class: Option<ClassConfig>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BiasFieldConfig {
    Constant,
    SineOfSum,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseConfig {
    None,
    Gaussian {
        sd: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        v: Option<f64>,
    },
    Biased {
        b: f64,
        sd: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        bias_field: Option<BiasFieldConfig>,
        #[serde(skip_serializing_if = "Option::is_none")]
        v: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MirrorConfig {
    Euclidean,
    NegativeEntropy,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum NormConfig {
    L1,
    L2,
    Linf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { n: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub mirror: MirrorConfig,
    pub norm: NormConfig,
    pub set: SetConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mu: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub a: f64,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: u64,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub epsilons: Vec<f64>,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub c11_delta_linear_n: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub c11_unsquared_smoothness: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zeta_bound_unsquared_k1: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<OutputFormat>,
}

/// Parse a config file; parse failures carry serde's line/column.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(&path.display().to_string(), format!("cannot read config: {e}")))?;
    serde_json::from_str(&text).map_err(|e| {
        err(
            &format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e,
        )
    })
}

/// The core objects a command works with, built from a validated config.
pub struct BuiltExperiment {
    pub experiment: Experiment<f64>,
    pub options: AnalysisOptions,
    pub epsilons: Vec<f64>,
    pub confidence: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Gradient probes concentrate within a few standard deviations, so the
/// objective's gradient cap is certified on the set inflated by 6μ per
/// coordinate.
const ENLARGEMENT_SIGMAS: f64 = 6.0;

impl ExperimentConfig {
    pub fn build(&self) -> Result<BuiltExperiment, ConfigError> {
        let set = match &self.geometry.set {
            SetConfig::Box { lo, hi } => FeasibleSet::new_box(lo.clone(), hi.clone()),
            SetConfig::Ball { center, radius } => FeasibleSet::new_ball(center.clone(), *radius),
            SetConfig::Simplex { n } => FeasibleSet::new_simplex(*n),
        }
        .map_err(|e| err("geometry.set", e))?;
        let n = set.dim();

        let norm = match self.geometry.norm {
            NormConfig::L1 => Norm::L1,
            NormConfig::L2 => Norm::L2,
            NormConfig::Linf => Norm::LInf,
        };
        let norms = NormPair::new(norm, n).map_err(|e| err("geometry.norm", e))?;
        let mirror = match self.geometry.mirror {
            MirrorConfig::Euclidean => MirrorMap::Euclidean,
            MirrorConfig::NegativeEntropy => MirrorMap::NegativeEntropy,
        };
        let geometry =
            Geometry::new(norms, set.clone(), mirror).map_err(|e| err("geometry", e))?;

        if !(self.estimator.mu > 0.0) || !self.estimator.mu.is_finite() {
            return Err(err("estimator.mu", "smoothing radius must be positive"));
        }
        let enlargement = ENLARGEMENT_SIGMAS * self.estimator.mu;

        let objective = match &self.objective {
            ObjectiveConfig::Quadratic { q, c, class } => {
                let form = match q {
                    QuadraticCoefficients::Diagonal(d) => QuadraticForm::Diagonal(d.clone()),
                    QuadraticCoefficients::Full(m) => QuadraticForm::Full(m.clone()),
                };
                let obj = ObjectiveSpec::quadratic(form, c.clone(), &set, enlargement)
                    .map_err(|e| err("objective", e))?;
                apply_class(obj, *class).map_err(|e| err("objective.class", e))?
            }
            ObjectiveConfig::AbsSum { anchor } => {
                ObjectiveSpec::abs_sum(anchor.clone(), &set).map_err(|e| err("objective", e))?
            }
            ObjectiveConfig::LogSumExp { scale, class } => {
                let obj = ObjectiveSpec::log_sum_exp(*scale, &set)
                    .map_err(|e| err("objective", e))?;
                apply_class(obj, *class).map_err(|e| err("objective.class", e))?
            }
        };

        let noise = match &self.noise {
            NoiseConfig::None => NoiseModel::none(),
            NoiseConfig::Gaussian { sd, v } => {
                let nm = NoiseModel::gaussian(*sd).map_err(|e| err("noise.sd", e))?;
                apply_v(nm, *v).map_err(|e| err("noise.v", e))?
            }
            NoiseConfig::Biased { b, sd, bias_field, v } => {
                let field = match bias_field.unwrap_or(BiasFieldConfig::SineOfSum) {
                    BiasFieldConfig::Constant => BiasField::Constant,
                    BiasFieldConfig::SineOfSum => BiasField::SineOfSum,
                };
                let nm = NoiseModel::biased(field, *b, *sd).map_err(|e| err("noise", e))?;
                apply_v(nm, *v).map_err(|e| err("noise.v", e))?
            }
        };

        let nga = NgaConfig::new(self.estimator.mu, n).map_err(|e| err("estimator.mu", e))?;
        let schedule = StepSchedule::new(self.schedule.a, self.schedule.p)
            .map_err(|e| err("schedule.p", e))?;

        if self.run.trials == 0 {
            return Err(err("run.trials", "at least one trial is required"));
        }
        let experiment = Experiment {
            objective,
            noise,
            geometry,
            nga,
            schedule,
            start: self.run.x1.clone(),
            iterations: self.run.iterations,
        };
        experiment.validate().map_err(|e| err("run", e))?;

        if self.analysis.epsilons.is_empty() {
            return Err(err("analysis.epsilons", "at least one epsilon is required"));
        }
        if self.analysis.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(err("analysis.epsilons", "epsilons must be positive"));
        }
        if !(self.analysis.confidence > 0.0 && self.analysis.confidence < 1.0) {
            return Err(err("analysis.confidence", "confidence must lie in (0, 1)"));
        }
        if self.output.formats.is_empty() {
            return Err(err("output.formats", "at least one output format is required"));
        }

        Ok(BuiltExperiment {
            experiment,
            options: AnalysisOptions {
                c11_delta_linear_n: self.analysis.c11_delta_linear_n,
                c11_unsquared_smoothness: self.analysis.c11_unsquared_smoothness,
                zeta_bound_unsquared_k1: self.analysis.zeta_bound_unsquared_k1,
            },
            epsilons: self.analysis.epsilons.clone(),
            confidence: self.analysis.confidence,
            trials: self.run.trials,
            seed: self.run.seed,
        })
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}

fn apply_class(
    obj: ObjectiveSpec<f64>,
    class: Option<ClassConfig>,
) -> zomd::Result<ObjectiveSpec<f64>> {
    match class {
        None => Ok(obj),
        Some(ClassConfig::C00) => obj.with_class(SmoothnessClass::C00),
        Some(ClassConfig::C11) => obj.with_class(SmoothnessClass::C11),
    }
}

fn apply_v(nm: NoiseModel<f64>, v: Option<f64>) -> zomd::Result<NoiseModel<f64>> {
    match v {
        None => Ok(nm),
        Some(v) => nm.with_declared_v(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal_config_json() -> String {
        serde_json::json!({
            "objective": {"kind": "abs_sum", "anchor": [0.0, 0.0]},
            "noise": {"kind": "gaussian", "sd": 0.1},
            "geometry": {
                "mirror": "euclidean",
                "norm": "l2",
                "set": {"kind": "box", "lo": [-1.0, -1.0], "hi": [1.0, 1.0]}
            },
            "estimator": {"mu": 0.05},
            "schedule": {"a": 0.5, "p": 0.75},
            "run": {"iterations": 200, "trials": 2, "seed": 7},
            "analysis": {"epsilons": [0.3], "confidence": 0.9},
            "output": {"dir": "out", "formats": ["csv", "json"]}
        })
        .to_string()
    }

    #[test]
    fn minimal_config_builds() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal_config_json()).unwrap();
        let built = cfg.build().unwrap();
        assert_eq!(built.experiment.geometry.dim(), 2);
        assert_eq!(built.trials, 2);
        assert!(!built.options.c11_delta_linear_n);
    }

    #[test]
    fn reserialized_config_is_value_identical() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal_config_json()).unwrap();
        let round: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        let original: serde_json::Value =
            serde_json::from_str(&minimal_config_json()).unwrap();
        assert_eq!(round, original);
    }

    #[test]
    fn boundary_step_exponent_is_rejected_with_field_context() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_config_json()).unwrap();
        v["schedule"]["p"] = serde_json::json!(0.5);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        let e = cfg.build().unwrap_err();
        assert_eq!(e.context, "schedule.p");
        assert!(e.message.contains("(0.5, 1]"));
    }

    #[test]
    fn entropy_requires_simplex() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_config_json()).unwrap();
        v["geometry"]["mirror"] = serde_json::json!("negative_entropy");
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        let e = cfg.build().unwrap_err();
        assert_eq!(e.context, "geometry");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_config_json()).unwrap();
        v["schedule"]["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&minimal_config_json()).unwrap();
        v["run"]["x1"] = serde_json::json!([5.0, 0.0]);
        let cfg: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert_eq!(cfg.build().unwrap_err().context, "run");
    }
}
