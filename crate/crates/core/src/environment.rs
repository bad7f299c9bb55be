//! Column configurations.
//!
//! The fixed column model uses a periodic [`ColumnProfile`] of horizontal
//! step probabilities. The random environment model draws a connectivity bit
//! per column from a stationary [`EnvironmentLaw`]; a [`ColumnField`] is one
//! lazily realized sample of that law.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stream::{keyed_u64, unit_f64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("profile period must be at least 1")]
    EmptyProfile,
    #[error("column probability p[{index}] = {value} is outside (0, 1/2]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("every column has p = 1/2: the walk is one-dimensional")]
    Degenerate,
    #[error("connected-column density q = {0} is outside (0, 1]")]
    DensityOutOfRange(f64),
    #[error("periodic pattern must be non-empty and contain only 0/1 entries")]
    BadPattern,
    #[error("markov transition probabilities ({p01}, {p10}) do not form a stochastic matrix with q > 0")]
    BadMarkov { p01: f64, p10: f64 },
}

/// Descriptor for a fixed column profile, as read from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileSpec {
    /// One connective column (`p = 1/4`) per period, all others `p = 1/2`.
    Uniform {
        #[serde(rename = "L")]
        period: usize,
    },
    Explicit { probs: Vec<f64> },
}

/// Descriptor for a stationary column law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LawSpec {
    Iid { q: f64 },
    Periodic { pattern: Vec<u8> },
    Markov { p01: f64, p10: f64 },
}

/// Model descriptor: which walk, and its column configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Heyde { profile: ProfileSpec },
    Env { law: LawSpec },
}

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Heyde(ColumnProfile),
    Env(EnvironmentLaw),
}

impl Model {
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, EnvError> {
        Ok(match spec {
            ModelSpec::Heyde { profile } => Model::Heyde(make_profile(profile)?),
            ModelSpec::Env { law } => Model::Env(make_env_law(law)?),
        })
    }

    /// Predicted long-run fraction of horizontal steps.
    pub fn horizontal_fraction(&self) -> f64 {
        match self {
            Model::Heyde(p) => 1.0 / p.gamma(),
            Model::Env(l) => 1.0 / (1.0 + l.q()),
        }
    }
}

/// Periodic horizontal step probabilities `p_0 .. p_{L-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnProfile {
    probs: Vec<f64>,
    gamma: f64,
}

impl ColumnProfile {
    pub fn uniform_periodic(period: usize) -> Result<Self, EnvError> {
        if period == 0 {
            return Err(EnvError::EmptyProfile);
        }
        let mut probs = vec![0.5; period];
        probs[0] = 0.25;
        Self::explicit(probs)
    }

    pub fn explicit(probs: Vec<f64>) -> Result<Self, EnvError> {
        if probs.is_empty() {
            return Err(EnvError::EmptyProfile);
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value > 0.0 && value <= 0.5) {
                return Err(EnvError::ProbabilityOutOfRange { index, value });
            }
        }
        if probs.iter().all(|&p| p == 0.5) {
            return Err(EnvError::Degenerate);
        }
        let gamma = period_gamma(&probs);
        Ok(ColumnProfile { probs, gamma })
    }

    pub fn period(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(1/(2L)) * sum 1/p_j`, the mean holding time per horizontal step.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Horizontal probability at column `j`, extended periodically to all of Z.
    #[inline]
    pub fn column_prob(&self, j: i64) -> f64 {
        self.probs[j.rem_euclid(self.probs.len() as i64) as usize]
    }

    /// True when every column is a simple symmetric column (`p = 1/4`).
    pub fn is_simple_symmetric(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.25)
    }
}

fn period_gamma(probs: &[f64]) -> f64 {
    probs.iter().map(|p| 1.0 / p).sum::<f64>() / (2.0 * probs.len() as f64)
}

pub fn make_profile(spec: &ProfileSpec) -> Result<ColumnProfile, EnvError> {
    match spec {
        ProfileSpec::Uniform { period } => ColumnProfile::uniform_periodic(*period),
        ProfileSpec::Explicit { probs } => ColumnProfile::explicit(probs.clone()),
    }
}

/// Recomputes gamma from the probability table.
pub fn gamma_of(profile: &ColumnProfile) -> f64 {
    period_gamma(&profile.probs)
}

pub fn column_prob(profile: &ColumnProfile, j: i64) -> f64 {
    profile.column_prob(j)
}

#[derive(Debug, Clone, PartialEq)]
enum LawKind {
    Iid,
    Periodic(Vec<bool>),
    Markov { p01: f64, p10: f64 },
}

/// Stationary law of the column connectivity sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentLaw {
    kind: LawKind,
    q: f64,
}

impl EnvironmentLaw {
    pub fn iid(q: f64) -> Result<Self, EnvError> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(EnvError::DensityOutOfRange(q));
        }
        Ok(EnvironmentLaw { kind: LawKind::Iid, q })
    }

    pub fn periodic(pattern: &[u8]) -> Result<Self, EnvError> {
        if pattern.is_empty() || pattern.iter().any(|&b| b > 1) {
            return Err(EnvError::BadPattern);
        }
        let ones = pattern.iter().filter(|&&b| b == 1).count();
        if ones == 0 {
            return Err(EnvError::DensityOutOfRange(0.0));
        }
        let q = ones as f64 / pattern.len() as f64;
        let bits = pattern.iter().map(|&b| b == 1).collect();
        Ok(EnvironmentLaw { kind: LawKind::Periodic(bits), q })
    }

    /// Stationary two-state chain with `P(0 -> 1) = p01`, `P(1 -> 0) = p10`.
    pub fn markov(p01: f64, p10: f64) -> Result<Self, EnvError> {
        let stochastic = (0.0..=1.0).contains(&p01) && (0.0..=1.0).contains(&p10);
        if !stochastic || p01 + p10 <= 0.0 {
            return Err(EnvError::BadMarkov { p01, p10 });
        }
        let q = p01 / (p01 + p10);
        if q <= 0.0 {
            return Err(EnvError::DensityOutOfRange(q));
        }
        Ok(EnvironmentLaw { kind: LawKind::Markov { p01, p10 }, q })
    }

    /// Stationary density of connected columns.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.kind, LawKind::Iid)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            LawKind::Iid => "iid",
            LawKind::Periodic(_) => "periodic",
            LawKind::Markov { .. } => "markov",
        }
    }
}

pub fn make_env_law(spec: &LawSpec) -> Result<EnvironmentLaw, EnvError> {
    match spec {
        LawSpec::Iid { q } => EnvironmentLaw::iid(*q),
        LawSpec::Periodic { pattern } => EnvironmentLaw::periodic(pattern),
        LawSpec::Markov { p01, p10 } => EnvironmentLaw::markov(*p01, *p10),
    }
}

/// One realization of an [`EnvironmentLaw`], materialized as columns are
/// visited.
///
/// Columns `x >= 0` live in `right[x]`, columns `x < 0` in `left[-1 - x]`.
/// Both windows are contiguous around the origin.
#[derive(Debug, Clone)]
pub struct ColumnField {
    law: EnvironmentLaw,
    seed: u64,
    phase: usize,
    right: Vec<bool>,
    left: Vec<bool>,
}

// Counter reserved for the periodic phase draw; columns use their own index.
const PHASE_COUNTER: i64 = i64::MIN;

pub fn sample_field(law: &EnvironmentLaw, seed: u64) -> ColumnField {
    let phase = match &law.kind {
        LawKind::Periodic(pattern) => {
            let word = keyed_u64(seed, PHASE_COUNTER);
            ((u128::from(word) * pattern.len() as u128) >> 64) as usize
        }
        _ => 0,
    };
    ColumnField {
        law: law.clone(),
        seed,
        phase,
        right: Vec::new(),
        left: Vec::new(),
    }
}

pub fn c_at(field: &mut ColumnField, x: i64) -> bool {
    field.connected(x)
}

impl ColumnField {
    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Phase offset of a periodic law (0 for other kinds).
    pub fn phase(&self) -> usize {
        self.phase
    }

    /// Number of columns materialized so far.
    pub fn realized_len(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// Connectivity bit `C(x)`.
    #[inline]
    pub fn connected(&mut self, x: i64) -> bool {
        if x >= 0 {
            let i = x as usize;
            if let Some(&b) = self.right.get(i) {
                return b;
            }
        } else {
            let i = (-1 - x) as usize;
            if let Some(&b) = self.left.get(i) {
                return b;
            }
        }
        self.materialize(x)
    }

    #[cold]
    fn materialize(&mut self, x: i64) -> bool {
        let (window_len, next) = if x >= 0 {
            (self.right.len(), self.right.len() as i64)
        } else {
            (self.left.len(), -1 - self.left.len() as i64)
        };
        let memo_slot = if x >= 0 { x as usize } else { (-1 - x) as usize };
        match &self.law.kind {
            LawKind::Markov { .. } => {
                // The chain must be grown step by step from the origin.
                if self.right.is_empty() {
                    let origin = self.markov_bit(0);
                    self.right.push(origin);
                    if x == 0 {
                        return origin;
                    }
                }
                let mut at = if x >= 0 { self.right.len() as i64 } else { next };
                loop {
                    let bit = self.markov_bit(at);
                    if at >= 0 {
                        self.right.push(bit);
                    } else {
                        self.left.push(bit);
                    }
                    if at == x {
                        return bit;
                    }
                    at += if x >= 0 { 1 } else { -1 };
                }
            }
            _ => {
                let bit = self.pure_bit(x);
                if memo_slot == window_len {
                    if x >= 0 {
                        self.right.push(bit);
                    } else {
                        self.left.push(bit);
                    }
                }
                bit
            }
        }
    }

    fn pure_bit(&self, x: i64) -> bool {
        match &self.law.kind {
            LawKind::Iid => self.law.q >= 1.0 || unit_f64(keyed_u64(self.seed, x)) < self.law.q,
            LawKind::Periodic(pattern) => {
                let period = pattern.len() as i64;
                pattern[(x + self.phase as i64).rem_euclid(period) as usize]
            }
            LawKind::Markov { .. } => unreachable!("markov bits depend on their neighbour"),
        }
    }

    // Next bit outward from the origin. The two-state chain is reversible, so
    // the leftward extension uses the same kernel as the rightward one.
    fn markov_bit(&self, x: i64) -> bool {
        let LawKind::Markov { p01, p10 } = self.law.kind else {
            unreachable!()
        };
        let u = unit_f64(keyed_u64(self.seed, x));
        if x == 0 {
            return u < self.law.q;
        }
        let prev = if x > 0 {
            self.right[(x - 1) as usize]
        } else if x == -1 {
            self.right[0]
        } else {
            self.left[(-x - 2) as usize]
        };
        if prev {
            u >= p10
        } else {
            u < p01
        }
    }
}
