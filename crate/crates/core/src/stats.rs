//! Empirical characteristic functions, theory-vs-simulation comparison
//! reports, and tail/variance diagnostics.

use crate::pairwise_sum_complex;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// `(1/N) sum_j e^{i theta x_j}` on the grid, with pairwise summation.
/// Each of the real and imaginary parts has standard error at most
/// `1/sqrt(N)`.
pub fn ecf(samples: &[f64], thetas: &[f64]) -> Result<Vec<Complex64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = samples.len() as f64;
    Ok(thetas
        .iter()
        .map(|&th| {
            if th == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let terms: Vec<Complex64> = samples
                .iter()
                .map(|&x| Complex64::from_polar(1.0, th * x))
                .collect();
            pairwise_sum_complex(&terms) / n
        })
        .collect())
}

/// Comparison of an empirical CF against a theoretical evaluator on a grid.
#[derive(Debug, Clone)]
pub struct CFReport {
    pub thetas: Vec<f64>,
    pub empirical: Vec<Complex64>,
    pub theoretical: Vec<Complex64>,
    /// Per-theta modulus bound `sqrt(2/N)` on the ECF standard error.
    pub se: f64,
    /// Per-theta `|empirical - theoretical| / se`.
    pub z_scores: Vec<f64>,
    pub sup_deviation: f64,
    pub n: usize,
    /// Additive bias allowance granted to the theory (zero for exact
    /// identities, positive for asymptotic limits with no rate).
    pub allowance: f64,
    pub pass: bool,
}

/// Build a report: PASS iff `|empirical - theoretical| <= 3 se + allowance`
/// at every grid point.
pub fn compare(
    samples: &[f64],
    theory: impl Fn(f64) -> Complex64,
    thetas: &[f64],
    allowance: f64,
) -> Result<CFReport, StatsError> {
    let empirical = ecf(samples, thetas)?;
    let theoretical: Vec<Complex64> = thetas.iter().map(|&t| theory(t)).collect();
    let n = samples.len();
    let se = (2.0 / n as f64).sqrt();
    let mut z_scores = Vec::with_capacity(thetas.len());
    let mut sup_dev = 0.0f64;
    let mut pass = true;
    for (e, t) in empirical.iter().zip(&theoretical) {
        let dev = (e - t).norm();
        sup_dev = sup_dev.max(dev);
        z_scores.push(dev / se);
        if dev > 3.0 * se + allowance {
            pass = false;
        }
    }
    Ok(CFReport {
        thetas: thetas.to_vec(),
        empirical,
        theoretical,
        se,
        z_scores,
        sup_deviation: sup_dev,
        n,
        allowance,
        pass,
    })
}

/// Hill estimator of the tail index on `|samples|` using the top `k` order
/// statistics. Bounded samples push the estimate upward (no power tail);
/// that is reported, not an error.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Result<f64, StatsError> {
    let n = samples.len();
    if k == 0 || 2 * k >= n {
        return Err(StatsError::InsufficientData(format!(
            "need 0 < k < n/2, got k={k}, n={n}"
        )));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let x_k = abs[k];
    if x_k <= 0.0 {
        return Err(StatsError::InsufficientData(
            "non-positive order statistic".into(),
        ));
    }
    let sum_log: f64 = abs[..k].iter().map(|x| (x / x_k).ln()).sum();
    if sum_log <= 0.0 {
        return Err(StatsError::InsufficientData("degenerate tail".into()));
    }
    Ok(k as f64 / sum_log)
}

/// Default order-statistic count `floor(sqrt(N))`.
pub fn default_hill_k(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceCheck {
    pub sample_variance: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub stat_band: f64,
    pub pass: bool,
}

/// Compare the sample variance against a prediction: PASS iff the relative
/// deviation is within `tolerance` plus the `3 sqrt(2/N)` estimator band.
pub fn variance_check(samples: &[f64], predicted: f64, tolerance: f64) -> VarianceCheck {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let stat_band = 3.0 * (2.0 / n).sqrt();
    let ratio = if predicted > 0.0 {
        var / predicted
    } else {
        f64::INFINITY
    };
    let pass = ratio.is_finite() && (ratio - 1.0).abs() <= tolerance + stat_band;
    VarianceCheck {
        sample_variance: var,
        predicted,
        ratio,
        tolerance,
        stat_band,
        pass,
    }
}
