//! Browser bindings: each export returns a JSON object with an `svg` field
//! and a few summary numbers, or `{"error": "..."}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use underfit::nmu::reconstruction_residual;
use underfit::plot::{self, Series};
use underfit::robustfit::{kuiper_d_minus, log_alpha, log_p_value, misclassification_error, PValueKind};
use underfit::synth::{self, PlanarKind, PlanarParams};
use underfit::{extract_factors, fit_models, FitConfig, NmuConfig};
use wasm_bindgen::prelude::*;

fn respond(result: underfit::Result<Value>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e.to_string() })).to_string()
}

/// Generates a star, stairs or circles dataset and fits it.
#[wasm_bindgen]
pub fn fit_demo(kind: &str, structures: usize, outlier_ratio: f64, sigma: f64, seed: u32) -> String {
    respond((|| {
        let kind: PlanarKind = kind.parse()?;
        let params = PlanarParams {
            structures,
            noise: 0.0075,
            outlier_ratio,
            total: 500,
            seed: seed.into(),
        };
        let set = synth::planar(kind, &params)?;
        let cfg = FitConfig {
            sigma,
            seed: seed.into(),
            ..FitConfig::default()
        };
        let result = fit_models(&set.points, set.family, &cfg)?;
        let labels = result.assignment.clone().unwrap_or_default();
        let me = set.truth().map(|t| misclassification_error(&labels, t)).transpose()?;
        let models: Vec<_> = result.selected.iter().map(|b| b.theta_hat.clone()).collect();
        let title = format!("{} models at sigma {sigma}", models.len());
        Ok(json!({
            "svg": plot::fit_overlay(&title, &set.points, &labels, &models),
            "models": models.len(),
            "candidates": result.all_candidates.len(),
            "misclassification": me,
        }))
    })())
}

/// Rank-`rank` extraction on the parts toy with optional uniform noise.
#[wasm_bindgen]
pub fn nmu_demo(rank: usize, noise: f64, seed: u32) -> String {
    respond((|| {
        let (mut a, _) = synth::parts_toy();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                a.set(i, j, a.get(i, j) + noise * rng.random::<f64>());
            }
        }
        let factors = extract_factors(&a, rank, &NmuConfig::default())?;
        let residual = reconstruction_residual(&a, &factors);
        let curves: Vec<Vec<(f64, f64)>> = factors
            .iter()
            .map(|f| f.history.iter().enumerate().map(|(k, &h)| ((k + 1) as f64, h)).collect())
            .collect();
        let series: Vec<Series> = curves
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(t, c)| Series {
                label: format!("factor {}", t + 1),
                points: c,
            })
            .collect();
        let (u, _) = underfit::io::factor_columns(&factors);
        Ok(json!({
            "svg": plot::line_plot("Convergence", "iteration", "||R||F / ||A||F", &series),
            "factors_svg": plot::heat_map("Left factors (pixels x factor)", &u),
            "relative_error": residual.frobenius_norm() / a.frobenius_norm(),
            "min_residual": residual.min(),
        }))
    })())
}

/// Memberships of `m` data of which a fraction `inliers` sit close to the
/// model, tested against the uniform null.
#[wasm_bindgen]
pub fn kuiper_demo(m: usize, inliers: f64, seed: u32) -> String {
    respond((|| {
        if m == 0 || !(0.0..=1.0).contains(&inliers) {
            return Err(underfit::Error::InvalidParams("need m >= 1 and inliers in [0, 1]".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.into());
        let k = (m as f64 * inliers).round() as usize;
        let mut values: Vec<f64> = (0..m)
            .map(|i| {
                let x: f64 = rng.random();
                // Inlier memberships exp(−d²/σ²) with d uniform in [0, σ].
                if i < k { (-x * x).exp() } else { x }
            })
            .collect();
        let d = kuiper_d_minus(&values);
        let lp = log_p_value(d, m, PValueKind::Kolmogorov);
        let la = log_alpha(m.max(2), 2);
        values.sort_by(f64::total_cmp);
        let cdf: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &x)| (x, (i + 1) as f64 / m as f64)).collect();
        let uniform = [(0.0, 0.0), (1.0, 1.0)];
        let series = [
            Series {
                label: "uniform".into(),
                points: &uniform,
            },
            Series {
                label: "sample".into(),
                points: &cdf,
            },
        ];
        Ok(json!({
            "svg": plot::line_plot("Empirical CDF of memberships", "membership", "CDF", &series),
            "d_minus": d,
            "log10_p": lp / std::f64::consts::LN_10,
            "log10_alpha": la / std::f64::consts::LN_10,
            "significant": lp < la,
        }))
    })())
}
