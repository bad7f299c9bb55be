use super::dist::{correlation, Z_CRITICAL_01};
use super::{Check, Rule, StatsError, TestReport};
use crate::walk::{TrajectorySummary, WalkState};

/// Sufficient statistics of the skeleton suite for a set of replicates.
///
/// Merging is concatenation of per-replicate sign pairs plus integer sums,
/// so any merge tree over replicates in index order gives the same result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkeletonStats {
    pub replicates: u64,
    pub prefixes_checked: u64,
    pub reconstruction_failures: u64,
    pub parity_failures: u64,
    pub s1_up: u64,
    pub s1_steps: u64,
    pub s2_up: u64,
    pub s2_steps: u64,
    /// Signs of `(S_1(K), S_2(M))` per replicate.
    pub endpoint_signs: Vec<(i8, i8)>,
}

impl SkeletonStats {
    /// Replays the recorded path against its skeletons.
    pub fn from_run(run: &TrajectorySummary) -> Result<Self, StatsError> {
        let (Some(path), Some(sk)) = (&run.path, &run.skeleton) else {
            return Err(StatsError::MissingSkeleton);
        };
        let mut stats = SkeletonStats { replicates: 1, ..Default::default() };
        if sk.sigma.len() + sk.tau.len() != path.len() {
            stats.reconstruction_failures += 1;
        }
        let mut state = WalkState::origin();
        for (i, &mv) in path.iter().enumerate() {
            state.advance(mv);
            let time = i as u64 + 1;
            let step_time = if mv.is_horizontal() {
                sk.sigma.get(state.h_count as usize - 1)
            } else {
                sk.tau.get(state.v_count as usize - 1)
            };
            let rebuilt = sk.position(state.h_count as usize, state.v_count as usize);
            if rebuilt != Some((state.x, state.y)) || step_time != Some(&time) {
                stats.reconstruction_failures += 1;
            }
            if (state.x + state.y).rem_euclid(2) as u64 != time % 2 {
                stats.parity_failures += 1;
            }
        }
        stats.prefixes_checked = path.len() as u64;
        for (walk, up, steps) in [
            (&sk.s1, &mut stats.s1_up, &mut stats.s1_steps),
            (&sk.s2, &mut stats.s2_up, &mut stats.s2_steps),
        ] {
            for w in walk.windows(2) {
                match w[1] - w[0] {
                    1 => *up += 1,
                    -1 => {}
                    _ => stats.reconstruction_failures += 1,
                }
                *steps += 1;
            }
        }
        let sign = |v: &[i64]| v.last().copied().unwrap_or(0).signum() as i8;
        stats.endpoint_signs.push((sign(&sk.s1), sign(&sk.s2)));
        Ok(stats)
    }

    pub fn merge(mut self, other: SkeletonStats) -> SkeletonStats {
        self.replicates += other.replicates;
        self.prefixes_checked += other.prefixes_checked;
        self.reconstruction_failures += other.reconstruction_failures;
        self.parity_failures += other.parity_failures;
        self.s1_up += other.s1_up;
        self.s1_steps += other.s1_steps;
        self.s2_up += other.s2_up;
        self.s2_steps += other.s2_steps;
        self.endpoint_signs.extend(other.endpoint_signs);
        self
    }
}

fn fairness_z(up: u64, steps: u64) -> f64 {
    if steps == 0 {
        return 0.0;
    }
    let n = steps as f64;
    (up as f64 - n / 2.0) / (n / 4.0).sqrt()
}

/// Reconstruction, parity, increment fairness and independence of the two
/// skeleton walks.
pub fn skeleton_report(stats: &SkeletonStats, n: u64) -> Result<TestReport, StatsError> {
    let r = stats.replicates as usize;
    if r < 2 {
        return Err(StatsError::TooFewReplicates { need: 2, got: r });
    }
    let a: Vec<f64> = stats.endpoint_signs.iter().map(|s| f64::from(s.0)).collect();
    let b: Vec<f64> = stats.endpoint_signs.iter().map(|s| f64::from(s.1)).collect();
    let rho = correlation(&a, &b);
    let bound = 3.0 / (r as f64).sqrt();
    let checks = vec![
        Check::new("reconstruction failures", stats.reconstruction_failures as f64, None, 0.0, 0.0, Rule::AtMost),
        Check::new("parity failures", stats.parity_failures as f64, None, 0.0, 0.0, Rule::AtMost),
        Check::below("|z| S1 increments", fairness_z(stats.s1_up, stats.s1_steps).abs(), Z_CRITICAL_01),
        Check::below("|z| S2 increments", fairness_z(stats.s2_up, stats.s2_steps).abs(), Z_CRITICAL_01),
        Check::below("|corr(sign S1, sign S2)|", rho.abs(), bound),
    ];
    Ok(TestReport::from_checks("skeleton", n, r as u64, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{EnvironmentLaw, Model};
    use crate::walk::simulate;
    use crate::StreamSeed;

    #[test]
    fn requires_recorded_path() {
        let model = Model::Env(EnvironmentLaw::iid(0.5).unwrap());
        let run = simulate(&model, 100, &[], StreamSeed::new(1, 0), false).unwrap();
        assert_eq!(SkeletonStats::from_run(&run), Err(StatsError::MissingSkeleton));
    }

    #[test]
    fn tampered_skeleton_is_caught() {
        let model = Model::Env(EnvironmentLaw::iid(0.5).unwrap());
        let mut run = simulate(&model, 200, &[], StreamSeed::new(1, 0), true).unwrap();
        assert_eq!(SkeletonStats::from_run(&run).unwrap().reconstruction_failures, 0);
        let sk = run.skeleton.as_mut().unwrap();
        let last = sk.s1.len() - 1;
        sk.s1[last] += 2;
        assert!(SkeletonStats::from_run(&run).unwrap().reconstruction_failures > 0);
    }

    #[test]
    fn merge_is_associative() {
        let model = Model::Env(EnvironmentLaw::iid(0.5).unwrap());
        let parts: Vec<SkeletonStats> = (0..3)
            .map(|r| SkeletonStats::from_run(&simulate(&model, 300, &[], StreamSeed::new(4, r), true).unwrap()).unwrap())
            .collect();
        let left = parts[0].clone().merge(parts[1].clone()).merge(parts[2].clone());
        let right = parts[0].clone().merge(parts[1].clone().merge(parts[2].clone()));
        assert_eq!(left, right);
        assert_eq!(left.prefixes_checked, 900);
    }
}
