//! Estimators that drive their own walks: return probability and range.
//!
//! Replicates run on the current rayon pool and are reduced with integer
//! sums in replicate order, so results do not depend on the worker count.

use rayon::prelude::*;

use super::dist::{mean, std_error};
use super::{targets_of, Check, Curve, CurvePoint, Rule, StatsError, TestReport, Tolerance};
use crate::environment::Model;
use crate::stream::StreamSeed;
use crate::walk::{endpoint, visited_counts, MAX_RANGE_STEPS};

/// Return-probability estimates with fewer expected hits are refused.
pub const MIN_EXPECTED_HITS: f64 = 200.0;

/// Estimates `n * P(Z(2n) = (0, 0))` from `replicates` walks of `2n` steps.
pub fn return_probability(
    model: &Model,
    half_steps: u64,
    replicates: u64,
    master_seed: u64,
    tol: Tolerance,
) -> Result<TestReport, StatsError> {
    let target = targets_of(model)
        .qn_const
        .ok_or_else(|| StatsError::NotEligible("return asymptotics need an iid environment or the simple symmetric walk".into()))?;
    if half_steps == 0 {
        return Err(StatsError::StepsTooSmall { got: 0, need: 1 });
    }
    let expected = replicates as f64 * target / half_steps as f64;
    if expected < MIN_EXPECTED_HITS {
        return Err(StatsError::TooFewExpectedHits { expected, need: MIN_EXPECTED_HITS });
    }
    let hits: u64 = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let end = endpoint(model, 2 * half_steps, StreamSeed::new(master_seed, r));
            u64::from(end.x == 0 && end.y == 0)
        })
        .sum();
    let p = hits as f64 / replicates as f64;
    let nf = half_steps as f64;
    let (est, se) = (nf * p, nf * (p * (1.0 - p) / replicates as f64).sqrt());
    let check = Check::near("n * Q(n)", est, Some(se), target, tol.resolve(target, se));
    Ok(TestReport::from_checks("return_probability", 2 * half_steps, replicates, vec![check])
        .with_note(format!("{hits} returns; 95% binomial interval [{:.5}, {:.5}]", est - 1.96 * se, est + 1.96 * se)))
}

/// Mean number of distinct visited sites at each grid length, reported as
/// `R(n) ln n / n`.
pub fn range_curve(
    model: &Model,
    grid: &[u64],
    replicates: u64,
    master_seed: u64,
    tol: Tolerance,
) -> Result<TestReport, StatsError> {
    let target = targets_of(model)
        .rn_const
        .ok_or_else(|| StatsError::NotEligible("range asymptotics need an iid environment or the simple symmetric walk".into()))?;
    if replicates < 2 {
        return Err(StatsError::TooFewReplicates { need: 2, got: replicates as usize });
    }
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    match grid.last() {
        None => return Err(StatsError::GridTooCoarse { got: 0, need: 1 }),
        Some(&max) if max > MAX_RANGE_STEPS => {
            return Err(crate::walk::WalkError::RangeTooLarge { max: MAX_RANGE_STEPS }.into())
        }
        _ => {}
    }
    if grid[0] < 2 {
        // ln n / n needs n >= 2 to be positive.
        return Err(StatsError::StepsTooSmall { got: grid[0], need: 2 });
    }
    let counts: Vec<Vec<u64>> = (0..replicates)
        .into_par_iter()
        .map(|r| visited_counts(model, &grid, StreamSeed::new(master_seed, r)))
        .collect::<Result<_, _>>()?;
    let mut points = Vec::with_capacity(grid.len());
    let mut last_se = 0.0;
    for (i, &n) in grid.iter().enumerate() {
        let scale = (n as f64).ln() / n as f64;
        let vals: Vec<f64> = counts.iter().map(|c| c[i] as f64 * scale).collect();
        points.push(CurvePoint { x: n as f64, estimate: mean(&vals), target });
        last_se = std_error(&vals);
    }
    let last = points.last().unwrap().estimate;
    let increasing_violations = points.windows(2).filter(|w| w[1].estimate <= w[0].estimate).count();
    let approach_violations = points
        .windows(2)
        .filter(|w| (w[1].estimate - target).abs() >= (w[0].estimate - target).abs())
        .count();
    let checks = vec![
        Check::near("R(n) ln n / n at largest n", last, Some(last_se), target, tol.resolve(target, last_se)),
        Check::new("non-increasing steps", increasing_violations as f64, None, 0.0, 0.0, Rule::AtMost),
        Check::new("steps away from target", approach_violations as f64, None, 0.0, 0.0, Rule::AtMost),
    ];
    Ok(TestReport::from_checks("range_curve", *grid.last().unwrap(), replicates, checks)
        .with_curve(Curve { name: "range".into(), axis: "m".into(), points }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{ColumnProfile, EnvironmentLaw};

    #[test]
    fn refuses_noisy_estimates() {
        let model = Model::Env(EnvironmentLaw::iid(1.0).unwrap());
        let err = return_probability(&model, 500, 1000, 1, Tolerance::Relative(0.15)).unwrap_err();
        assert!(matches!(err, StatsError::TooFewExpectedHits { .. }));
    }

    #[test]
    fn ineligible_models() {
        let periodic = Model::Env(EnvironmentLaw::periodic(&[1, 0]).unwrap());
        let heyde = Model::Heyde(ColumnProfile::uniform_periodic(4).unwrap());
        for m in [&periodic, &heyde] {
            assert!(matches!(
                return_probability(m, 10, 1_000_000, 1, Tolerance::default()),
                Err(StatsError::NotEligible(_))
            ));
            assert!(matches!(range_curve(m, &[100], 10, 1, Tolerance::default()), Err(StatsError::NotEligible(_))));
        }
    }

    #[test]
    fn range_grid_guard() {
        let model = Model::Env(EnvironmentLaw::iid(1.0).unwrap());
        assert!(matches!(
            range_curve(&model, &[MAX_RANGE_STEPS + 1], 2, 1, Tolerance::default()),
            Err(StatsError::Walk(_))
        ));
    }

    #[test]
    fn short_return_estimate_is_close() {
        // n = 2: P(Z(4) = 0) = 36/256 for the simple symmetric walk.
        let model = Model::Env(EnvironmentLaw::iid(1.0).unwrap());
        let r = return_probability(&model, 2, 100_000, 5, Tolerance::StdErrors(4.0)).unwrap();
        assert!((r.estimate - 2.0 * 36.0 / 256.0).abs() < 0.01);
    }
}
