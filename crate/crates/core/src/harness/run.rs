use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CheckpointPolicy, ExperimentConfig, TestName};
use super::HarnessError;
use crate::environment::Model;
use crate::statistics::{self, targets_of, Ensemble, SkeletonStats, StatsError, TestReport, TheoryTargets, Verdict};
use crate::stream::{derive_master, StreamSeed, DERIVATION};
use crate::walk::{simulate, TrajectorySummary, MAX_RANGE_STEPS};

/// Shortest walk on which the envelope and ellipse statistics are run.
pub const LIL_MIN_STEPS: u64 = 1_000_000;

/// A test that could not produce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestError {
    pub test: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDerivation {
    pub scheme: String,
    /// Master seeds of sub-experiments that run their own walks, keyed by test.
    pub derived: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub seed_derivation: SeedDerivation,
    pub targets: TheoryTargets,
    pub tests: Vec<TestReport>,
    pub errors: Vec<TestError>,
    pub verdict: Verdict,
    /// Kept out of `report.json` so that reports are byte-identical across runs.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Checkpoints of the shared ensemble: the configured policy plus every
/// positive t-grid time.
pub fn resolve_checkpoints(cfg: &ExperimentConfig) -> Result<Vec<u64>, HarnessError> {
    let mut cps = cfg.checkpoints.resolve(cfg.steps)?;
    for &t in &cfg.t_grid {
        if !(0.0..=1.0).contains(&t) {
            return Err(HarnessError::Config(format!("t_grid value {t} is outside [0, 1]")));
        }
        let m = (cfg.steps as f64 * t).floor() as u64;
        if m > 0 {
            cps.push(m);
        }
    }
    cps.sort_unstable();
    cps.dedup();
    Ok(cps)
}

fn precondition(test: TestName, reason: impl Into<String>) -> HarnessError {
    HarnessError::Precondition { test: test.as_str(), reason: reason.into() }
}

/// Checks the config and every requested test's preconditions without
/// simulating anything. Returns the model, the master seed and the ensemble
/// checkpoints.
pub fn validate(cfg: &ExperimentConfig) -> Result<(Model, u64, Vec<u64>), HarnessError> {
    let seed = cfg.seed.ok_or(HarnessError::MissingSeed)?;
    if cfg.steps == 0 {
        return Err(HarnessError::Config("steps must be at least 1".into()));
    }
    if cfg.replicates == 0 {
        return Err(HarnessError::Config("replicates must be at least 1".into()));
    }
    let model = Model::from_spec(&cfg.model)?;
    let targets = targets_of(&model);
    let cps = resolve_checkpoints(cfg)?;
    let r = cfg.replicates as usize;
    let need_replicates = |test: TestName, need: usize| {
        if r < need {
            Err(precondition(test, format!("needs at least {need} replicates, config has {r}")))
        } else {
            Ok(())
        }
    };
    for &test in &cfg.tests {
        match test {
            TestName::StepFractions | TestName::AnisotropyRatio | TestName::ResidualDecay => {
                need_replicates(test, 2)?
            }
            TestName::Msd => {
                need_replicates(test, 2)?;
                if cfg.t_grid.is_empty() {
                    return Err(precondition(test, "t_grid is empty"));
                }
            }
            TestName::MarginalClt => {
                need_replicates(test, statistics::MIN_DISTRIBUTION_REPLICATES)?;
                if cfg.t_grid.is_empty() {
                    return Err(precondition(test, "t_grid is empty"));
                }
                if let Some(t) = cfg.t_grid.iter().find(|&&t| (cfg.steps as f64 * t).floor() < 1.0) {
                    return Err(precondition(test, format!("t = {t} maps to step 0")));
                }
            }
            TestName::CrossIndependence | TestName::BrownianMax => {
                need_replicates(test, statistics::MIN_DISTRIBUTION_REPLICATES)?
            }
            TestName::TimeIntegral => {
                need_replicates(test, 2)?;
                if cps.len() < statistics::MIN_DENSE_POINTS {
                    return Err(precondition(
                        test,
                        format!("{} checkpoints, need at least {}", cps.len(), statistics::MIN_DENSE_POINTS),
                    ));
                }
            }
            TestName::LilEnvelope | TestName::EllipseCloud => {
                if cfg.steps < LIL_MIN_STEPS {
                    return Err(precondition(test, format!("steps must be at least {LIL_MIN_STEPS}")));
                }
                match cfg.checkpoints {
                    CheckpointPolicy::Geometric { base, .. } if base >= statistics::LIL_MIN_CHECKPOINT => {}
                    _ => {
                        return Err(precondition(
                            test,
                            format!("needs geometric checkpoints from base >= {}", statistics::LIL_MIN_CHECKPOINT),
                        ))
                    }
                }
            }
            TestName::ReturnProbability => {
                let qn = targets
                    .qn_const
                    .ok_or_else(|| precondition(test, "no return asymptotics for this model"))?;
                let s = cfg.return_settings();
                if s.half_steps == 0 {
                    return Err(precondition(test, "half_steps must be at least 1"));
                }
                let expected = s.replicates as f64 * qn / s.half_steps as f64;
                if expected < statistics::MIN_EXPECTED_HITS {
                    return Err(precondition(
                        test,
                        format!("expected {expected:.1} returns, need {}", statistics::MIN_EXPECTED_HITS),
                    ));
                }
            }
            TestName::RangeCurve => {
                if targets.rn_const.is_none() {
                    return Err(precondition(test, "no range asymptotics for this model"));
                }
                let s = cfg.range_settings();
                if s.replicates < 2 {
                    return Err(precondition(test, "needs at least 2 replicates"));
                }
                match (s.grid.iter().min(), s.grid.iter().max()) {
                    (Some(&lo), Some(&hi)) if lo >= 2 && hi <= MAX_RANGE_STEPS => {}
                    _ => return Err(precondition(test, format!("grid must be non-empty within 2..={MAX_RANGE_STEPS}"))),
                }
            }
            TestName::Skeleton => need_replicates(test, 2)?,
        }
    }
    Ok((model, seed, cps))
}

/// Simulates replicates `0..replicates` on the current rayon pool, in order.
pub fn simulate_ensemble(
    model: &Model,
    n: u64,
    checkpoints: &[u64],
    master: u64,
    replicates: u64,
) -> Result<Vec<TrajectorySummary>, HarnessError> {
    (0..replicates)
        .into_par_iter()
        .map(|r| simulate(model, n, checkpoints, StreamSeed::new(master, r), false))
        .collect::<Result<Vec<_>, _>>()
        .map_err(HarnessError::from)
}

fn skeleton_suite(model: &Model, n: u64, replicates: u64, master: u64) -> Result<TestReport, StatsError> {
    let parts = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let run = simulate(model, n, &[], StreamSeed::new(master, r), true)?;
            SkeletonStats::from_run(&run)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let stats = parts.into_iter().fold(SkeletonStats::default(), SkeletonStats::merge);
    statistics::skeleton_report(&stats, n)
}

fn ensemble_test(cfg: &ExperimentConfig, test: TestName, ens: &Ensemble) -> Result<TestReport, StatsError> {
    let tol = cfg.tolerance_for(test);
    match test {
        TestName::StepFractions => statistics::step_fractions(ens, tol),
        TestName::Msd => statistics::msd(ens, &cfg.t_grid, tol),
        TestName::MarginalClt => statistics::marginal_clt_test(ens, &cfg.t_grid),
        TestName::CrossIndependence => statistics::cross_independence_test(ens),
        TestName::TimeIntegral => statistics::time_integral_test(ens, tol),
        TestName::BrownianMax => statistics::brownian_max_test(ens),
        TestName::LilEnvelope => statistics::lil_envelope(ens),
        TestName::EllipseCloud => statistics::ellipse_cloud(ens),
        TestName::AnisotropyRatio => statistics::anisotropy_ratio(ens, tol),
        TestName::ResidualDecay => statistics::residual_decay(ens),
        TestName::ReturnProbability | TestName::RangeCurve | TestName::Skeleton => {
            unreachable!("{} does not use the ensemble", test.as_str())
        }
    }
}

fn run_all(cfg: &ExperimentConfig, model: &Model, seed: u64, cps: &[u64]) -> Result<SummaryReport, HarnessError> {
    let targets = targets_of(model);
    let ensemble = if cfg.tests.iter().any(|t| t.uses_ensemble()) {
        Some(Ensemble::new(
            targets.clone(),
            simulate_ensemble(model, cfg.steps, cps, seed, cfg.replicates)?,
        ))
    } else {
        None
    };
    let mut derived = BTreeMap::new();
    let mut tests = Vec::new();
    let mut errors = Vec::new();
    for &test in &cfg.tests {
        let (result, test_seed) = match test {
            TestName::ReturnProbability => {
                let s = cfg.return_settings();
                let sub = derive_master(seed, test.as_str());
                let tol = cfg.tolerance_for(test);
                (statistics::return_probability(model, s.half_steps, s.replicates, sub, tol), sub)
            }
            TestName::RangeCurve => {
                let s = cfg.range_settings();
                let sub = derive_master(seed, test.as_str());
                (statistics::range_curve(model, &s.grid, s.replicates, sub, cfg.tolerance_for(test)), sub)
            }
            TestName::Skeleton => {
                let sub = derive_master(seed, test.as_str());
                (skeleton_suite(model, cfg.steps, cfg.replicates, sub), sub)
            }
            _ => (ensemble_test(cfg, test, ensemble.as_ref().expect("ensemble simulated")), seed),
        };
        if test_seed != seed {
            derived.insert(test.as_str().to_string(), test_seed);
        }
        match result {
            Ok(mut report) => {
                report.seed = Some(test_seed);
                tests.push(report);
            }
            Err(e) => errors.push(TestError { test: test.as_str().into(), message: e.to_string() }),
        }
    }
    let verdict = Verdict::from_bool(errors.is_empty() && tests.iter().all(|t| t.verdict.passed()));
    Ok(SummaryReport {
        config: cfg.clone(),
        seed,
        seed_derivation: SeedDerivation { scheme: DERIVATION.to_string(), derived },
        targets,
        tests,
        errors,
        verdict,
        wall_time_s: 0.0,
    })
}

/// Validates `cfg`, then runs every requested test on a pool of `workers`
/// threads (0 selects one per core). The report does not depend on `workers`.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<SummaryReport, HarnessError> {
    let start = Instant::now();
    let (model, seed, cps) = validate(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let mut report = pool.install(|| run_all(cfg, &model, seed, &cps))?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
