//! Small estimator helpers shared by the Monte Carlo experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% confidence. Returns `(0, 1)` for zero trials.
pub fn wilson95(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Binomial standard error of a proportion `p` estimated from `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Pearson goodness-of-fit statistic and upper-tail p-value.
///
/// `observed[k]` are counts, `expected_probs[k]` the model probabilities of
/// the same bins (they are renormalised to the observed total). Degrees of
/// freedom are `bins - 1 - fitted_params`.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], fitted_params: usize) -> (f64, f64) {
    assert_eq!(observed.len(), expected_probs.len());
    let total: u64 = observed.iter().sum();
    let psum: f64 = expected_probs.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| {
            let e = total as f64 * p / psum;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dof = observed.len() - 1 - fitted_params;
    (stat, chi_square_sf(stat, dof))
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}
