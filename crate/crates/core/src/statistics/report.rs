use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// How a check's estimate is compared with its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Rule {
    /// `|estimate - target| <= tol`
    AbsDiff,
    /// `estimate < tol`, a test statistic below its critical value.
    Below,
    /// `estimate <= tol`
    AtMost,
    /// `estimate >= tol`
    AtLeast,
    /// `lo <= estimate <= hi`
    Band { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub target: f64,
    pub tol: f64,
    #[serde(flatten)]
    pub rule: Rule,
    pub passed: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, estimate: f64, se: Option<f64>, target: f64, tol: f64, rule: Rule) -> Self {
        let passed = match rule {
            Rule::AbsDiff => (estimate - target).abs() <= tol,
            Rule::Below => estimate < tol,
            Rule::AtMost => estimate <= tol,
            Rule::AtLeast => estimate >= tol,
            Rule::Band { lo, hi } => (lo..=hi).contains(&estimate),
        };
        Check {
            label: label.into(),
            estimate,
            se,
            target,
            tol,
            rule,
            passed,
        }
    }

    pub fn near(label: impl Into<String>, estimate: f64, se: Option<f64>, target: f64, tol: f64) -> Self {
        Self::new(label, estimate, se, target, tol, Rule::AbsDiff)
    }

    /// A statistic that must stay below `critical`; `target` is its null value.
    pub fn below(label: impl Into<String>, statistic: f64, critical: f64) -> Self {
        Self::new(label, statistic, None, 0.0, critical, Rule::Below)
    }
}

/// Estimate-type tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    /// Fraction of the target.
    Relative(f64),
    /// Multiple of the Monte Carlo standard error.
    StdErrors(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::StdErrors(3.0)
    }
}

impl Tolerance {
    pub fn resolve(self, target: f64, se: f64) -> f64 {
        match self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(r) => r * target.abs(),
            Tolerance::StdErrors(k) => k * se,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: f64,
    pub target: f64,
}

/// A per-checkpoint or per-grid-point curve for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    /// Column label of `x` in CSV output, e.g. `t` or `m`.
    pub axis: String,
    pub points: Vec<CurvePoint>,
}

/// Outcome of one statistic. The headline fields mirror the first failing
/// check, or the first check when all pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub target: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub n: u64,
    pub replicates: u64,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<Curve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestReport {
    pub fn from_checks(name: &str, n: u64, replicates: u64, checks: Vec<Check>) -> Self {
        assert!(!checks.is_empty(), "a report needs at least one check");
        let all_pass = checks.iter().all(|c| c.passed);
        let head = checks.iter().find(|c| !c.passed).unwrap_or(&checks[0]);
        TestReport {
            name: name.to_string(),
            estimate: head.estimate,
            se: head.se,
            target: head.target,
            tol: head.tol,
            verdict: Verdict::from_bool(all_pass),
            n,
            replicates,
            seed: None,
            checks,
            curves: Vec::new(),
            note: None,
        }
    }

    pub fn with_curve(mut self, curve: Curve) -> Self {
        self.curves.push(curve);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn check(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label == label)
    }
}
