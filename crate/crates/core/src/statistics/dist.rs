//! Distribution functions and goodness-of-fit statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Asymptotic Kolmogorov critical constant at significance 0.01.
pub const KS_CRITICAL_01: f64 = 1.63;

/// Two-sided standard normal quantile at significance 0.01.
pub const Z_CRITICAL_01: f64 = 2.575_829_303_548_901;

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// `P(sup_{t<=1} W(t) <= u) = 2 Phi(u) - 1` for `u >= 0`.
pub fn brownian_max_cdf(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        2.0 * normal_cdf(u) - 1.0
    }
}

/// Upper critical value of chi-square with `dof` degrees of freedom.
pub fn chi_square_critical(dof: u32, alpha: f64) -> f64 {
    ChiSquared::new(f64::from(dof))
        .expect("positive dof")
        .inverse_cdf(1.0 - alpha)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical law of
/// `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    // Ties are stepped over together so lattice data gets the correct ECDF.
    while i < xs.len() {
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max((f - i as f64 / n).abs()).max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

/// `1.63 / sqrt(R)`.
pub fn ks_critical(replicates: usize) -> f64 {
    KS_CRITICAL_01 / (replicates as f64).sqrt()
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    // The cdf is below 1e-12 here and the alternating series converges slowly.
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a KS distance over `replicates` samples.
pub fn ks_p_value(distance: f64, replicates: usize) -> f64 {
    kolmogorov_sf(distance * (replicates as f64).sqrt())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = p * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Pearson statistic of a 2x2 contingency table.
pub fn chi_square_2x2(table: [[u64; 2]; 2]) -> f64 {
    let total: u64 = table.iter().flatten().sum();
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] as f64 * cols[j] as f64 / total as f64;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    stat
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-9);
        assert!((normal_quantile(0.995) - Z_CRITICAL_01).abs() < 1e-9);
        assert!((normal_quantile(0.75) - 0.674_489_750_196_081_7).abs() < 1e-9);
    }

    #[test]
    fn brownian_max_median() {
        let u = normal_quantile(0.75);
        assert!((brownian_max_cdf(u) - 0.5).abs() < 1e-12);
        assert_eq!(brownian_max_cdf(-1.0), 0.0);
    }

    #[test]
    fn chi_square_critical_values() {
        assert!((chi_square_critical(1, 0.01) - 6.634_896_601).abs() < 1e-6);
        assert!((chi_square_critical(3, 0.01) - 11.344_866_73).abs() < 1e-6);
    }

    #[test]
    fn ks_of_uniform_grid() {
        // Midpoints of n cells: the ECDF is off by exactly 1/(2n).
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_handles_ties() {
        // Point mass at 0 vs a continuous cdf with F(0) = 1/2.
        let xs = vec![0.0; 10];
        assert!((ks_statistic(&xs, normal_cdf) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_distribution_critical_point() {
        // P(K > 1.6276) = 0.01
        assert!((kolmogorov_sf(1.627_6) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_sf(1.358_1) - 0.05).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn moments_and_quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((correlation(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert_eq!(chi_square_2x2([[10, 10], [10, 10]]), 0.0);
    }
}
