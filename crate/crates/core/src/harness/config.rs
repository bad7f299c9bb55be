use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::environment::ModelSpec;
use crate::statistics::Tolerance;

/// How checkpoint indices are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum CheckpointPolicy {
    Explicit { steps: Vec<u64> },
    /// `ceil(base * ratio^i)` for `i = 0, 1, ...` up to `n`.
    Geometric { base: u64, ratio: f64 },
    /// `floor(i * n / count)` for `i = 1..=count`.
    Dense { count: u64 },
}

impl Default for CheckpointPolicy {
    fn default() -> Self {
        CheckpointPolicy::Geometric { base: 16, ratio: 1.5 }
    }
}

impl CheckpointPolicy {
    pub fn resolve(&self, n: u64) -> Result<Vec<u64>, HarnessError> {
        let invalid = |msg: String| Err(HarnessError::Config(msg));
        let mut cps = match self {
            CheckpointPolicy::Explicit { steps } => {
                if let Some(&m) = steps.iter().find(|&&m| m == 0 || m > n) {
                    return invalid(format!("explicit checkpoint {m} is outside 1..={n}"));
                }
                steps.clone()
            }
            CheckpointPolicy::Geometric { base, ratio } => {
                if *base == 0 || ratio.is_nan() || *ratio <= 1.0 {
                    return invalid("geometric checkpoints need base >= 1 and ratio > 1".into());
                }
                let mut out = Vec::new();
                let mut i = 0;
                loop {
                    let m = (*base as f64 * ratio.powi(i)).ceil() as u64;
                    if m > n {
                        break;
                    }
                    out.push(m);
                    i += 1;
                }
                out
            }
            CheckpointPolicy::Dense { count } => {
                if *count == 0 || *count > n {
                    return invalid(format!("dense checkpoint count {count} must be in 1..={n}"));
                }
                (1..=*count).map(|i| (u128::from(i) * u128::from(n) / u128::from(*count)) as u64).collect()
            }
        };
        cps.push(n);
        cps.sort_unstable();
        cps.dedup();
        Ok(cps)
    }
}

/// Statistics the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestName {
    StepFractions,
    Msd,
    MarginalClt,
    CrossIndependence,
    TimeIntegral,
    BrownianMax,
    LilEnvelope,
    EllipseCloud,
    AnisotropyRatio,
    ReturnProbability,
    RangeCurve,
    ResidualDecay,
    Skeleton,
}

impl TestName {
    pub fn as_str(self) -> &'static str {
        match self {
            TestName::StepFractions => "step_fractions",
            TestName::Msd => "msd",
            TestName::MarginalClt => "marginal_clt",
            TestName::CrossIndependence => "cross_independence",
            TestName::TimeIntegral => "time_integral",
            TestName::BrownianMax => "brownian_max",
            TestName::LilEnvelope => "lil_envelope",
            TestName::EllipseCloud => "ellipse_cloud",
            TestName::AnisotropyRatio => "anisotropy_ratio",
            TestName::ReturnProbability => "return_probability",
            TestName::RangeCurve => "range_curve",
            TestName::ResidualDecay => "residual_decay",
            TestName::Skeleton => "skeleton",
        }
    }

    /// Whether the test reads the shared checkpoint ensemble.
    pub fn uses_ensemble(self) -> bool {
        !matches!(self, TestName::ReturnProbability | TestName::RangeCurve | TestName::Skeleton)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSettings {
    /// `n` in `P(Z(2n) = 0)`.
    pub half_steps: u64,
    pub replicates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeSettings {
    pub grid: Vec<u64>,
    pub replicates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: PathBuf::from("out"), format: OutputFormat::Json }
    }
}

fn default_t_grid() -> Vec<f64> {
    vec![0.25, 1.0]
}

/// One experiment: a model, a replicate ensemble, and the tests to run on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub steps: u64,
    pub replicates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tests: Vec<TestName>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub checkpoints: CheckpointPolicy,
    #[serde(default)]
    pub tolerance: BTreeMap<TestName, Tolerance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_probability: Option<ReturnSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSettings>,
    #[serde(default)]
    pub output: OutputSettings,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn tolerance_for(&self, test: TestName) -> Tolerance {
        self.tolerance.get(&test).copied().unwrap_or_default()
    }

    pub fn return_settings(&self) -> ReturnSettings {
        self.return_probability.clone().unwrap_or(ReturnSettings {
            half_steps: (self.steps / 2).max(1),
            replicates: self.replicates,
        })
    }

    pub fn range_settings(&self) -> RangeSettings {
        self.range.clone().unwrap_or(RangeSettings {
            grid: vec![(self.steps / 100).max(2), (self.steps / 10).max(2), self.steps.max(2)],
            replicates: self.replicates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
model = "heyde"
steps = 100000
replicates = 200
seed = 42
tests = ["step_fractions", "msd"]
t_grid = [0.5, 1.0]

[profile]
kind = "uniform"
L = 4

[checkpoints]
policy = "dense"
count = 10

[tolerance]
step_fractions = { absolute = 0.005 }
msd = { relative = 0.05 }
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(
            cfg.model,
            ModelSpec::Heyde { profile: crate::ProfileSpec::Uniform { period: 4 } }
        );
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.tests, vec![TestName::StepFractions, TestName::Msd]);
        assert_eq!(cfg.tolerance_for(TestName::Msd), Tolerance::Relative(0.05));
        assert_eq!(cfg.tolerance_for(TestName::AnisotropyRatio), Tolerance::StdErrors(3.0));
        assert_eq!(cfg.checkpoints.resolve(cfg.steps).unwrap().len(), 10);
    }

    #[test]
    fn env_law_descriptor() {
        let cfg = ExperimentConfig::from_toml(
            "model = \"env\"\nsteps = 10\nreplicates = 1\n[law]\nkind = \"iid\"\nq = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.model, ModelSpec::Env { law: crate::LawSpec::Iid { q: 0.5 } });
        assert_eq!(cfg.seed, None);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn malformed_configs() {
        assert!(ExperimentConfig::from_toml("model = \"heyde\"\nsteps = 10\n").is_err());
        assert!(ExperimentConfig::from_toml("model = \"nope\"\nsteps = 1\nreplicates = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("steps = [").is_err());
    }

    #[test]
    fn geometric_grid() {
        let cps = CheckpointPolicy::default().resolve(100).unwrap();
        assert_eq!(cps, vec![16, 24, 36, 54, 81, 100]);
        assert!(CheckpointPolicy::Geometric { base: 16, ratio: 1.0 }.resolve(100).is_err());
    }

    #[test]
    fn dense_grid_hits_quarter_points() {
        let cps = CheckpointPolicy::Dense { count: 200 }.resolve(10_000).unwrap();
        assert_eq!(cps.len(), 200);
        assert!(cps.contains(&2500) && cps.contains(&10_000));
        assert!(CheckpointPolicy::Dense { count: 0 }.resolve(10).is_err());
    }

    #[test]
    fn explicit_grid_bounds() {
        let p = CheckpointPolicy::Explicit { steps: vec![5, 3, 5] };
        assert_eq!(p.resolve(10).unwrap(), vec![3, 5, 10]);
        assert!(CheckpointPolicy::Explicit { steps: vec![11] }.resolve(10).is_err());
    }
}
