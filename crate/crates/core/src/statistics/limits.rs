use super::dist::{
    brownian_max_cdf, chi_square_2x2, chi_square_critical, correlation, ks_critical, ks_statistic,
    mean, normal_cdf, quantile, std_error, variance, normal_quantile,
};
use super::{Check, Curve, CurvePoint, Ensemble, Rule, StatsError, TestReport, Tolerance};

/// Minimum ensemble size for distributional (KS) tests.
pub const MIN_DISTRIBUTION_REPLICATES: usize = 500;
/// Minimum number of checkpoints for Riemann-sum functionals.
pub const MIN_DENSE_POINTS: usize = 100;
/// First checkpoint at which `ln ln m` is used; `ln ln 16 > 0`.
pub const LIL_MIN_CHECKPOINT: u64 = 16;
/// Accepted band for the ensemble-max envelope, in units of the LIL constant.
pub const LIL_BAND: (f64, f64) = (0.6, 1.3);
pub const ELLIPSE_MAX_FORM: f64 = 1.3;
pub const ELLIPSE_EXCEED_LEVEL: f64 = 0.5;
pub const ELLIPSE_MIN_FRACTION: f64 = 0.5;
/// Upper bound on the mean absolute time-change residual at the last checkpoint.
pub const RESIDUAL_FINAL_MAX: f64 = 0.01;

fn grid_index(n: u64, t: f64) -> Result<u64, StatsError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(StatsError::BadGridTime(t));
    }
    Ok((n as f64 * t).floor() as u64)
}

/// Checkpoint indices shared by every replicate.
fn common_grid(ens: &Ensemble) -> Result<Vec<u64>, StatsError> {
    let grid: Vec<u64> = ens.runs.first().ok_or(StatsError::Empty)?.checkpoints.iter().map(|c| c.m).collect();
    for run in &ens.runs {
        if run.checkpoints.len() != grid.len() || run.checkpoints.iter().zip(&grid).any(|(c, &m)| c.m != m) {
            let missing = grid.iter().find(|&&m| run.at(m).is_none()).copied().unwrap_or(0);
            return Err(StatsError::MissingCheckpoint(missing));
        }
    }
    Ok(grid)
}

/// Grid time, step index and positions at that step.
type GridSnapshot = (f64, u64, Vec<(f64, f64)>);

fn ln_ln(m: u64) -> f64 {
    (m as f64).ln().ln()
}

pub fn step_fractions(ens: &Ensemble, tol: Tolerance) -> Result<TestReport, StatsError> {
    let n = ens.require(2)?;
    let fr: Vec<f64> = ens.runs.iter().map(|r| r.end.h_count as f64 / n as f64).collect();
    let (est, se) = (mean(&fr), std_error(&fr));
    let target = ens.targets.hfrac;
    let check = Check::near("h_count/n", est, Some(se), target, tol.resolve(target, se));
    Ok(TestReport::from_checks("step_fractions", n, ens.replicates() as u64, vec![check]))
}

/// Mean square displacement per step at each grid time.
pub fn msd(ens: &Ensemble, t_grid: &[f64], tol: Tolerance) -> Result<TestReport, StatsError> {
    let n = ens.require(2)?;
    let targets = &ens.targets;
    let mut checks = Vec::new();
    let mut curve_x = Vec::new();
    let mut curve_y = Vec::new();
    for &t in t_grid {
        let m = grid_index(n, t)?;
        let pos = ens.positions_at(m)?;
        for (axis, var, curve) in [("X", targets.var_x, &mut curve_x), ("Y", targets.var_y, &mut curve_y)] {
            let (est, se, target) = if m == 0 {
                (0.0, 0.0, 0.0)
            } else {
                let vals: Vec<f64> = pos
                    .iter()
                    .map(|&(x, y)| if axis == "X" { x * x } else { y * y } / m as f64)
                    .collect();
                (mean(&vals), std_error(&vals), var)
            };
            let tol = if m == 0 { 0.0 } else { tol.resolve(target, se) };
            checks.push(Check::near(format!("E {axis}^2/m at t={t}"), est, Some(se), target, tol));
            curve.push(CurvePoint { x: t, estimate: est, target });
        }
    }
    if checks.is_empty() {
        return Err(StatsError::GridTooCoarse { got: 0, need: 1 });
    }
    Ok(TestReport::from_checks("msd", n, ens.replicates() as u64, checks)
        .with_curve(Curve { name: "msd_x".into(), axis: "t".into(), points: curve_x })
        .with_curve(Curve { name: "msd_y".into(), axis: "t".into(), points: curve_y }))
}

/// KS tests of the normalized marginals at each grid time and of the
/// increments between consecutive grid times.
pub fn marginal_clt_test(ens: &Ensemble, t_grid: &[f64]) -> Result<TestReport, StatsError> {
    let n = ens.require(MIN_DISTRIBUTION_REPLICATES)?;
    let r = ens.replicates();
    let critical = ks_critical(r);
    let (var_x, var_y) = (ens.targets.var_x, ens.targets.var_y);
    let mut times: Vec<f64> = t_grid.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut checks = Vec::new();
    let mut prev: Option<GridSnapshot> = None;
    for &t in &times {
        if t <= 0.0 {
            return Err(StatsError::BadGridTime(t));
        }
        let m = grid_index(n, t)?;
        if m == 0 {
            return Err(StatsError::BadGridTime(t));
        }
        let pos = ens.positions_at(m)?;
        let (sx, sy) = ((var_x * m as f64).sqrt(), (var_y * m as f64).sqrt());
        let xs: Vec<f64> = pos.iter().map(|p| p.0 / sx).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.1 / sy).collect();
        checks.push(Check::below(format!("KS x at t={t}"), ks_statistic(&xs, normal_cdf), critical));
        checks.push(Check::below(format!("KS y at t={t}"), ks_statistic(&ys, normal_cdf), critical));
        if let Some((t0, m0, pos0)) = &prev {
            let dm = (m - m0) as f64;
            let (sx, sy) = ((var_x * dm).sqrt(), (var_y * dm).sqrt());
            let dx: Vec<f64> = pos.iter().zip(pos0).map(|(a, b)| (a.0 - b.0) / sx).collect();
            let dy: Vec<f64> = pos.iter().zip(pos0).map(|(a, b)| (a.1 - b.1) / sy).collect();
            let label = format!("t={t0}..{t}");
            checks.push(Check::below(format!("KS x increment {label}"), ks_statistic(&dx, normal_cdf), critical));
            checks.push(Check::below(format!("KS y increment {label}"), ks_statistic(&dy, normal_cdf), critical));
        }
        prev = Some((t, m, pos));
    }
    if checks.is_empty() {
        return Err(StatsError::GridTooCoarse { got: 0, need: 1 });
    }
    Ok(TestReport::from_checks("marginal_clt", n, r as u64, checks))
}

/// Endpoint correlation and a sign-pair contingency test.
pub fn cross_independence_test(ens: &Ensemble) -> Result<TestReport, StatsError> {
    let n = ens.require(MIN_DISTRIBUTION_REPLICATES)?;
    let r = ens.replicates();
    let scale = (n as f64).sqrt();
    let xs: Vec<f64> = ens.runs.iter().map(|s| s.end.x as f64 / scale).collect();
    let ys: Vec<f64> = ens.runs.iter().map(|s| s.end.y as f64 / scale).collect();
    let rho = correlation(&xs, &ys);
    let mut table = [[0u64; 2]; 2];
    for s in &ens.runs {
        table[(s.end.x > 0) as usize][(s.end.y > 0) as usize] += 1;
    }
    let checks = vec![
        Check::new("|corr(x_n, y_n)|", rho.abs(), Some(1.0 / (r as f64).sqrt()), 0.0, 3.0 / (r as f64).sqrt(), Rule::Below),
        Check::below("sign chi-square", chi_square_2x2(table), chi_square_critical(1, 0.01)),
    ];
    Ok(TestReport::from_checks("cross_independence", n, r as u64, checks))
}

/// `n^{-3/2} * sum_i x_{m_i} (m_i - m_{i-1})`, the right-endpoint Riemann sum
/// of the rescaled path, and its `y` counterpart.
pub fn riemann_integral(run: &crate::walk::TrajectorySummary) -> (f64, f64) {
    let n = run.n() as f64;
    let mut prev = 0u64;
    let (mut ix, mut iy) = (0.0, 0.0);
    for c in &run.checkpoints {
        let dm = (c.m - prev) as f64;
        ix += c.x as f64 * dm;
        iy += c.y as f64 * dm;
        prev = c.m;
    }
    let norm = n * n.sqrt();
    (ix / norm, iy / norm)
}

pub fn time_integral_test(ens: &Ensemble, tol: Tolerance) -> Result<TestReport, StatsError> {
    let n = ens.require(2)?;
    let grid = common_grid(ens)?;
    if grid.len() < MIN_DENSE_POINTS {
        return Err(StatsError::GridTooCoarse { got: grid.len(), need: MIN_DENSE_POINTS });
    }
    let r = ens.replicates();
    let (ix, iy): (Vec<f64>, Vec<f64>) = ens.runs.iter().map(riemann_integral).unzip();
    let mut checks = Vec::new();
    for (axis, vals, target) in [("x", &ix, ens.targets.integral_var_x), ("y", &iy, ens.targets.integral_var_y)] {
        let var = variance(vals);
        let se = var * (2.0 / (r as f64 - 1.0)).sqrt();
        checks.push(Check::near(format!("var of integral {axis}"), var, Some(se), target, tol.resolve(target, se)));
        let sd = target.sqrt();
        let ks = ks_statistic(vals, |v| normal_cdf(v / sd));
        checks.push(Check::below(format!("KS integral {axis}"), ks, ks_critical(r)));
    }
    Ok(TestReport::from_checks("time_integral", n, r as u64, checks))
}

/// KS test of the normalized running maximum of `x` against `2 Phi(u) - 1`.
///
/// Uses the exact running maximum over every step, which the simulator
/// tracks, rather than the maximum over checkpoints.
pub fn brownian_max_test(ens: &Ensemble) -> Result<TestReport, StatsError> {
    let n = ens.require(MIN_DISTRIBUTION_REPLICATES)?;
    let r = ens.replicates();
    let scale = (ens.targets.var_x * n as f64).sqrt();
    let maxima: Vec<f64> = ens.runs.iter().map(|s| s.max_x as f64 / scale).collect();
    let ks = ks_statistic(&maxima, brownian_max_cdf);
    let report = TestReport::from_checks("brownian_max", n, r as u64, vec![Check::below("KS max x", ks, ks_critical(r))]);
    if maxima.iter().all(|&m| m == 0.0) {
        let mut report = report.with_note("degenerate input: the walk never moved right");
        report.verdict = super::Verdict::Fail;
        return Ok(report);
    }
    let median = quantile(&maxima, 0.5);
    Ok(report.with_note(format!(
        "median normalized max {median:.4}, limit {:.4}",
        normal_quantile(0.75)
    )))
}

fn lil_checkpoints(ens: &Ensemble) -> Result<u64, StatsError> {
    let n = ens.require(1)?;
    if n < LIL_MIN_CHECKPOINT {
        return Err(StatsError::StepsTooSmall { got: n, need: LIL_MIN_CHECKPOINT });
    }
    Ok(n)
}

/// Per-replicate envelope `max_m |x_m| / sqrt(2 m ln ln m)` over checkpoints
/// `m >= 16`, compared through its ensemble maximum.
pub fn lil_envelope(ens: &Ensemble) -> Result<TestReport, StatsError> {
    let n = lil_checkpoints(ens)?;
    let grid = common_grid(ens)?;
    let lil_grid: Vec<(usize, u64)> = grid.iter().copied().enumerate().filter(|&(_, m)| m >= LIL_MIN_CHECKPOINT).collect();
    let mut env_x = Vec::with_capacity(ens.replicates());
    let mut env_y = Vec::with_capacity(ens.replicates());
    let mut curve_x = vec![0.0f64; lil_grid.len()];
    let mut curve_y = vec![0.0f64; lil_grid.len()];
    for run in &ens.runs {
        let (mut ex, mut ey) = (0.0f64, 0.0f64);
        for (k, &(i, m)) in lil_grid.iter().enumerate() {
            let c = run.checkpoints[i];
            let d = (2.0 * m as f64 * ln_ln(m)).sqrt();
            let (u, v) = ((c.x as f64 / d).abs(), (c.y as f64 / d).abs());
            ex = ex.max(u);
            ey = ey.max(v);
            curve_x[k] = curve_x[k].max(u);
            curve_y[k] = curve_y[k].max(v);
        }
        env_x.push(ex);
        env_y.push(ey);
    }
    let (lo, hi) = LIL_BAND;
    let t = &ens.targets;
    let mut checks = Vec::new();
    let mut note = String::new();
    for (axis, env, target) in [("x", &env_x, t.lil_x), ("y", &env_y, t.lil_y)] {
        let max = env.iter().copied().fold(0.0, f64::max);
        checks.push(Check::new(
            format!("ensemble max envelope {axis}"),
            max,
            None,
            target,
            0.0,
            Rule::Band { lo: lo * target, hi: hi * target },
        ));
        note.push_str(&format!(
            "{axis}: median {:.4}, q90 {:.4}, max {:.4}, target {:.4}; ",
            quantile(env, 0.5),
            quantile(env, 0.9),
            max,
            target
        ));
    }
    let to_curve = |name: &str, vals: &[f64], target: f64| Curve {
        name: name.into(),
        axis: "m".into(),
        points: lil_grid.iter().zip(vals).map(|(&(_, m), &e)| CurvePoint { x: m as f64, estimate: e, target }).collect(),
    };
    Ok(TestReport::from_checks("lil_envelope", n, ens.replicates() as u64, checks)
        .with_curve(to_curve("envelope_x", &curve_x, t.lil_x))
        .with_curve(to_curve("envelope_y", &curve_y, t.lil_y))
        .with_note(note.trim_end_matches("; ").to_string()))
}

/// The LIL-rescaled endpoint cloud against the limit ellipse.
pub fn ellipse_cloud(ens: &Ensemble) -> Result<TestReport, StatsError> {
    let n = lil_checkpoints(ens)?;
    let t = &ens.targets;
    let per_run: Vec<f64> = ens
        .runs
        .iter()
        .map(|run| {
            run.checkpoints
                .iter()
                .filter(|c| c.m >= LIL_MIN_CHECKPOINT)
                .map(|c| {
                    let d = (2.0 * c.m as f64 * ln_ln(c.m)).sqrt();
                    t.ellipse_form(c.x as f64 / d, c.y as f64 / d)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let max = per_run.iter().copied().fold(0.0, f64::max);
    let frac = per_run.iter().filter(|&&f| f > ELLIPSE_EXCEED_LEVEL).count() as f64 / per_run.len() as f64;
    let checks = vec![
        Check::new("max quadratic form", max, None, 1.0, ELLIPSE_MAX_FORM, Rule::AtMost),
        Check::new(
            format!("fraction with form > {ELLIPSE_EXCEED_LEVEL}"),
            frac,
            None,
            1.0,
            ELLIPSE_MIN_FRACTION,
            Rule::AtLeast,
        ),
    ];
    Ok(TestReport::from_checks("ellipse_cloud", n, ens.replicates() as u64, checks)
        .with_note(format!("median per-replicate max form {:.4}", quantile(&per_run, 0.5))))
}

/// Mean of `v_count / h_count` against the dimensional anisotropy.
pub fn anisotropy_ratio(ens: &Ensemble, tol: Tolerance) -> Result<TestReport, StatsError> {
    let n = ens.require(2)?;
    let mut ratios = Vec::with_capacity(ens.replicates());
    for run in &ens.runs {
        if run.end.h_count == 0 {
            return Err(StatsError::Degenerate("replicate without horizontal steps".into()));
        }
        ratios.push(run.end.v_count as f64 / run.end.h_count as f64);
    }
    let (est, se) = (mean(&ratios), std_error(&ratios));
    let target = ens.targets.anisotropy;
    let check = Check::near("v_count/h_count", est, Some(se), target, tol.resolve(target, se));
    Ok(TestReport::from_checks("anisotropy_ratio", n, ens.replicates() as u64, vec![check]))
}

/// Decay of the mean absolute time-change residual across checkpoints.
pub fn residual_decay(ens: &Ensemble) -> Result<TestReport, StatsError> {
    let n = ens.require(2)?;
    let grid = common_grid(ens)?;
    let mut means = Vec::with_capacity(grid.len());
    let mut ses = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let abs: Vec<f64> = ens.runs.iter().map(|r| r.residuals[i].abs()).collect();
        means.push(mean(&abs));
        ses.push(std_error(&abs));
    }
    let violations = (1..grid.len())
        .filter(|&i| means[i] - means[i - 1] > 3.0 * (ses[i].powi(2) + ses[i - 1].powi(2)).sqrt())
        .count();
    let last = *means.last().unwrap();
    let mut checks = vec![
        Check::new("non-increasing violations", violations as f64, None, 0.0, 0.0, Rule::AtMost),
        Check::new("mean |eps| at n", last, ses.last().copied(), 0.0, RESIDUAL_FINAL_MAX, Rule::Below),
    ];
    if grid.len() > 1 {
        checks.push(Check::new("mean |eps| first minus last", means[0] - last, None, 0.0, 0.0, Rule::AtLeast));
    }
    let curve = Curve {
        name: "residual".into(),
        axis: "m".into(),
        points: grid.iter().zip(&means).map(|(&m, &e)| CurvePoint { x: m as f64, estimate: e, target: 0.0 }).collect(),
    };
    Ok(TestReport::from_checks("residual_decay", n, ens.replicates() as u64, checks).with_curve(curve))
}
