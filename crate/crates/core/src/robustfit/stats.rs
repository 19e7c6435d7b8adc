//! One-sided Kuiper statistic on soft memberships and its tail probability.

use serde::{Deserialize, Serialize};

/// Distribution used to turn `D⁻` into a p-value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueKind {
    /// Two-sided Kolmogorov survival function `Q(λ)`.
    #[default]
    Kolmogorov,
    /// One-sided Smirnov tail.
    Smirnov,
}

/// Which memberships enter the empirical CDF.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfSupport {
    /// Every datum, including those with zero membership.
    All,
    /// Only data with positive membership.
    #[default]
    Inliers,
}

/// `D⁻ = sup_x (F_U(x) − F_t(x))` for the empirical CDF `F_t` of `values`
/// against the uniform CDF on `[0, 1]`.
///
/// Just below the `i`-th order statistic the empirical CDF equals
/// `(i − 1)/m`, so the supremum is `max_i (s_i − (i − 1)/m)`, floored at the
/// right endpoint value 0.
pub fn kuiper_d_minus(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "empty sample");
    let mut sorted: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &s)| s - i as f64 / m)
        .fold(0.0, f64::max)
}

/// Effective `λ` for sample size `m` (Stephens' small-sample correction).
fn effective_lambda(d: f64, m: usize) -> f64 {
    let root = (m as f64).sqrt();
    (root + 0.12 + 0.11 / root) * d
}

/// Natural log of the Kolmogorov survival function
/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
///
/// Evaluated in log space so deep tails keep their ordering.
pub fn log_kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda < 1.18 {
        // Q = 1 − (√(2π)/λ) Σ exp(−(2k−1)²π²/(8λ²)), which converges fast
        // where the alternating series does not.
        let mut cdf = 0.0;
        let base = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        for k in 1..50 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * base).exp();
            cdf += term;
            if term < 1e-16 * cdf {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(f64::MIN_POSITIVE, 1.0).ln();
    }
    let l2 = lambda * lambda;
    // Q = 2 e^{−2λ²} (1 − e^{−6λ²} + e^{−16λ²} − …)
    let mut tail = 1.0;
    for k in 2..100 {
        let kf = k as f64;
        let term = (-2.0 * (kf * kf - 1.0) * l2).exp();
        if term < 1e-12 {
            break;
        }
        tail += if k % 2 == 0 { -term } else { term };
    }
    (std::f64::consts::LN_2 - 2.0 * l2 + tail.ln()).min(0.0)
}

/// Log tail probability of `D⁻ = d` for a sample of size `m`.
pub fn log_p_value(d_minus: f64, m: usize, kind: PValueKind) -> f64 {
    assert!(m >= 1, "sample size must be >= 1");
    let d = d_minus.clamp(0.0, 1.0);
    match kind {
        PValueKind::Kolmogorov => log_kolmogorov_q(effective_lambda(d, m)),
        PValueKind::Smirnov => {
            // exp(−(6md + 1)² / (18m)), the corrected one-sided asymptote.
            let mf = m as f64;
            (-(6.0 * mf * d + 1.0).powi(2) / (18.0 * mf)).min(0.0)
        }
    }
}

pub fn p_value(d_minus: f64, m: usize, kind: PValueKind) -> f64 {
    log_p_value(d_minus, m, kind).exp().clamp(0.0, 1.0)
}

/// `ln C(m, b)`.
pub fn log_binomial(m: usize, b: usize) -> f64 {
    assert!(b <= m, "C({m}, {b}) undefined");
    let b = b.min(m - b);
    (0..b).map(|k| ((m - k) as f64 / (k + 1) as f64).ln()).sum()
}

/// `ln α` for `α = 1/C(m, b)`, floored at `ln 1e-300`.
pub fn log_alpha(m: usize, b: usize) -> f64 {
    (-log_binomial(m, b)).max(1e-300f64.ln())
}
