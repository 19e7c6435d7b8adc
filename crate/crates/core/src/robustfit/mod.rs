//! Robust multi-model fitting by iterated underapproximation of the
//! preference matrix.
//!
//! Each round factors the preference matrix with a rank-one underapproximation
//! started from the best-supported hypothesis, refits a model to the data
//! factor, tests it against the uniform null, and removes the hypotheses the
//! factor explains. Surviving candidates are reconciled by choosing the most
//! significant set of mutually uncorrelated factors.

pub mod metric;
pub mod mis;
pub mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{dot, DenseMatrix, DenseVector};
use crate::model::{fit_weighted, soft_membership, weighted_objective, ModelFamily, ModelParams};
use crate::nmu::{solve_rank_one, NmuConfig};
use crate::preference::{build_preference, consensus_init, loaded_columns, sample_pool, PreferenceMatrix};

pub use metric::{exclusive_labels, misclassification_error};
pub use mis::ConflictGraph;
pub use stats::{kuiper_d_minus, log_alpha, log_binomial, log_p_value, p_value, CdfSupport, PValueKind};

/// Factor entries at or below this count as zero weight in the refit.
const SUPPORT_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Inlier scale of the soft membership.
    pub sigma: f64,
    /// Factors correlated above this conflict with each other.
    pub corr_threshold: f64,
    pub max_biclusters: usize,
    /// Significance level; `1/C(m, b)` when absent.
    pub alpha_override: Option<f64>,
    pub exclusive_assignment: bool,
    pub prefilter: bool,
    pub seed: u64,
    /// Number of sampled hypotheses; a per-family default when absent.
    pub pool_size: Option<usize>,
    pub nmu: NmuConfig,
    pub p_value: PValueKind,
    pub cdf_support: CdfSupport,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            sigma: 0.035,
            corr_threshold: 0.6,
            max_biclusters: 50,
            alpha_override: None,
            exclusive_assignment: true,
            prefilter: true,
            seed: 0,
            pool_size: None,
            nmu: NmuConfig {
                tau: 1e-4,
                max_iters: 2000,
                record_history: false,
                ..NmuConfig::default()
            },
            p_value: PValueKind::default(),
            cdf_support: CdfSupport::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.corr_threshold > 0.0 && self.corr_threshold < 1.0) {
            return Err(Error::InvalidParams(format!(
                "corr_threshold must lie in (0, 1), got {}",
                self.corr_threshold
            )));
        }
        if self.max_biclusters == 0 || self.max_biclusters > mis::MAX_VERTICES {
            return Err(Error::InvalidParams(format!(
                "max_biclusters must lie in 1..={}, got {}",
                mis::MAX_VERTICES,
                self.max_biclusters
            )));
        }
        if let Some(a) = self.alpha_override {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {a}")));
            }
        }
        if self.pool_size == Some(0) {
            return Err(Error::InvalidParams("pool_size must be >= 1".into()));
        }
        self.nmu.validate()
    }

    fn test(&self, m: usize, family: ModelFamily) -> TestConfig {
        let log_alpha = match self.alpha_override {
            Some(a) => a.ln(),
            None => log_alpha(m, family.min_sample()),
        };
        TestConfig {
            log_alpha,
            p_value: self.p_value,
            cdf_support: self.cdf_support,
        }
    }
}

/// What the significance test needs besides the memberships.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestConfig {
    pub log_alpha: f64,
    pub p_value: PValueKind,
    pub cdf_support: CdfSupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub d_minus: f64,
    pub p_value: f64,
    pub log_p_value: f64,
    /// Size of the sample behind the empirical CDF.
    pub sample_size: usize,
    /// The null of uniform memberships is rejected, so the model is kept.
    pub significant: bool,
}

/// Tests a vector of memberships against the uniform null.
pub fn test_memberships(memberships: &[f64], cfg: &TestConfig) -> TestOutcome {
    let values: Vec<f64> = match cfg.cdf_support {
        CdfSupport::All => memberships.to_vec(),
        CdfSupport::Inliers => memberships.iter().copied().filter(|&s| s > 0.0).collect(),
    };
    if values.is_empty() {
        return TestOutcome {
            d_minus: 0.0,
            p_value: 1.0,
            log_p_value: 0.0,
            sample_size: 0,
            significant: false,
        };
    }
    let d_minus = kuiper_d_minus(&values);
    let log_p = log_p_value(d_minus, values.len(), cfg.p_value);
    TestOutcome {
        d_minus,
        p_value: log_p.exp(),
        log_p_value: log_p,
        sample_size: values.len(),
        significant: log_p < cfg.log_alpha,
    }
}

pub fn memberships<D: AsRef<[f64]>>(model: &ModelParams, data: &[D], sigma: f64) -> Vec<f64> {
    model.residuals(data).into_iter().map(|d| soft_membership(d, sigma)).collect()
}

/// Memberships of every datum to `model` and the resulting test outcome.
pub fn test_statistic_for<D: AsRef<[f64]>>(model: &ModelParams, data: &[D], sigma: f64, cfg: &TestConfig) -> TestOutcome {
    test_memberships(&memberships(model, data, sigma), cfg)
}

/// Deactivates every active column whose hypothesis is not significant.
/// Returns the filtered matrix and the number of columns removed.
pub fn prefilter_columns(pref: &PreferenceMatrix, cfg: &TestConfig) -> (PreferenceMatrix, usize) {
    let failing: Vec<usize> = (0..pref.p.cols())
        .filter(|&j| pref.active[j] && !test_memberships(&pref.p.col(j), cfg).significant)
        .collect();
    let mut next = pref.clone();
    let removed = failing.len();
    next.deactivate(failing);
    (next, removed)
}

/// Weighted least-squares model on the data factor.
pub fn refit_from_factor<D: AsRef<[f64]>>(u_hat: &[f64], data: &[D], family: ModelFamily) -> Result<ModelParams> {
    let weights: Vec<f64> = u_hat.iter().map(|&u| if u > SUPPORT_FLOOR { u } else { 0.0 }).collect();
    fit_weighted(family, data, &weights)
}

/// Cosine similarity of two factors; 0 when either is zero.
pub fn factor_correlation(a: &[f64], b: &[f64]) -> f64 {
    let norms = crate::matlib::norm2(a) * crate::matlib::norm2(b);
    if norms == 0.0 {
        return 0.0;
    }
    (dot(a, b) / norms).clamp(-1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bicluster {
    pub u_hat: DenseVector,
    pub v_hat: DenseVector,
    pub theta_hat: ModelParams,
    pub memberships: DenseVector,
    pub d_minus: f64,
    pub p_value: f64,
    pub log_p_value: f64,
    pub significant: bool,
    /// `Σ ûᵢ e(xᵢ, θ̂)²`.
    pub residual_energy: f64,
}

impl Bicluster {
    pub fn support_size(&self) -> usize {
        self.memberships.iter().filter(|&&s| s > 0.0).count()
    }
}

/// Conflict graph of the candidates' data factors.
pub fn conflict_graph(candidates: &[Bicluster], corr_threshold: f64) -> ConflictGraph {
    let mut graph = ConflictGraph::new(candidates.len());
    for a in 0..candidates.len() {
        for b in a + 1..candidates.len() {
            if factor_correlation(&candidates[a].u_hat, &candidates[b].u_hat) > corr_threshold {
                graph.add_edge(a, b);
            }
        }
    }
    graph
}

/// Indices of the winning maximal independent set of candidates.
pub fn select_mis(candidates: &[Bicluster], corr_threshold: f64) -> Vec<usize> {
    let graph = conflict_graph(candidates, corr_threshold);
    let log_p: Vec<f64> = candidates.iter().map(|c| c.log_p_value).collect();
    let energy: Vec<f64> = candidates.iter().map(|c| c.residual_energy).collect();
    let chosen = mis::select_from_graph(&graph, &log_p, &energy);
    for (k, &a) in chosen.iter().enumerate() {
        for &b in &chosen[k + 1..] {
            assert!(!graph.has_edge(a, b), "selected factors {a} and {b} conflict");
        }
    }
    chosen
}

/// Exclusive labels for the selected models (0 = outlier).
pub fn assign_exclusive<D: AsRef<[f64]>>(selected: &[Bicluster], data: &[D]) -> Vec<usize> {
    let memberships: Vec<Vec<f64>> = selected.iter().map(|b| b.memberships.to_vec()).collect();
    let residuals: Vec<Vec<f64>> = selected.iter().map(|b| b.theta_hat.residuals(data)).collect();
    if selected.is_empty() {
        return vec![0; data.len()];
    }
    exclusive_labels(&memberships, &residuals)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum Outcome {
    /// Index into `all_candidates`.
    Candidate(usize),
    ZeroFactor,
    InsufficientSupport,
    RefitFailed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    /// Column the round was started from.
    pub seed_column: usize,
    pub nmu_iterations: usize,
    pub nmu_converged: bool,
    /// `‖P − ûv̂ᵀ‖F / ‖P‖F` on the matrix entering the round.
    pub relative_residual: f64,
    pub columns_removed: usize,
    pub active_after: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pool_size: usize,
    pub prefilter_removed: usize,
    pub log_alpha: f64,
    pub rounds: Vec<Round>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: ModelFamily,
    pub selected: Vec<Bicluster>,
    /// Positions of `selected` in `all_candidates`.
    pub selected_indices: Vec<usize>,
    pub all_candidates: Vec<Bicluster>,
    pub assignment: Option<Vec<usize>>,
    pub diagnostics: Diagnostics,
}

/// Rows and columns of `p` that carry any mass.
fn support(p: &DenseMatrix) -> (Vec<usize>, Vec<usize>) {
    let rows = (0..p.rows()).filter(|&i| p.row(i).iter().any(|&x| x > 0.0)).collect();
    let cols = (0..p.cols()).filter(|&j| (0..p.rows()).any(|i| p.get(i, j) > 0.0)).collect();
    (rows, cols)
}

fn scatter(values: &[f64], positions: &[usize], len: usize) -> DenseVector {
    let mut out = DenseVector::zeros(len);
    for (&k, &x) in positions.iter().zip(values) {
        out[k] = x;
    }
    out
}

/// Rank-one underapproximation of the preference matrix from the consensus
/// start. Zero rows and columns stay zero under the iteration, so the solve
/// runs on the submatrix that carries mass.
fn factor_round(pref: &PreferenceMatrix, cfg: &NmuConfig) -> Result<(DenseVector, DenseVector, usize, usize, bool)> {
    let (u0, v0, star) = consensus_init(pref)?;
    let (m, n) = pref.p.shape();
    let (rows, cols) = support(&pref.p);
    let sub = DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| pref.p.get(rows[i], cols[j]));
    let su0 = DenseVector::from_vec_unchecked(rows.iter().map(|&i| u0[i]).collect());
    let sv0 = DenseVector::from_vec_unchecked(cols.iter().map(|&j| v0[j]).collect());
    let factor = solve_rank_one(&sub, (su0, sv0), cfg)?;
    Ok((
        scatter(&factor.u, &rows, m),
        scatter(&factor.v, &cols, n),
        star,
        factor.iterations_used,
        factor.converged,
    ))
}

/// The full pipeline: sample, build preferences, extract and test factors,
/// then select a compatible set of models.
pub fn fit_models<D: AsRef<[f64]>>(data: &[D], family: ModelFamily, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let m = data.len();
    if m < family.min_sample() {
        return Err(Error::InsufficientSupport {
            have: m,
            need: family.min_sample(),
        });
    }
    let pool_size = cfg.pool_size.unwrap_or_else(|| family.default_pool_size());
    let pool = sample_pool(data, family, pool_size, cfg.seed)?;
    let mut pref = build_preference(data, &pool, cfg.sigma)?;
    let test = cfg.test(m, family);
    let mut diagnostics = Diagnostics {
        pool_size,
        log_alpha: test.log_alpha,
        ..Diagnostics::default()
    };
    if cfg.prefilter {
        let (filtered, removed) = prefilter_columns(&pref, &test);
        pref = filtered;
        diagnostics.prefilter_removed = removed;
    }

    let mut candidates = Vec::new();
    while candidates.len() < cfg.max_biclusters {
        let norm = pref.p.frobenius_norm();
        let (u, v, star, iterations, converged) = match factor_round(&pref, &cfg.nmu) {
            Err(Error::EmptyPreference) => break,
            other => other?,
        };
        let relative_residual = if norm > 0.0 {
            pref.p.sub_outer(&u, &v).frobenius_norm() / norm
        } else {
            0.0
        };
        // The seed column always goes, so every round shrinks the active set.
        let mut removed = loaded_columns(&v);
        if !removed.contains(&star) {
            removed.push(star);
        }
        let columns_removed = removed.iter().filter(|&&j| pref.active[j]).count();
        pref.deactivate(removed);

        let outcome = if u.is_zero() {
            Outcome::ZeroFactor
        } else {
            match refit_from_factor(&u, data, family) {
                Ok(theta_hat) => {
                    let sm = memberships(&theta_hat, data, cfg.sigma);
                    let outcome = test_memberships(&sm, &test);
                    let residual_energy = weighted_objective(&theta_hat, data, &u);
                    candidates.push(Bicluster {
                        u_hat: u,
                        v_hat: v,
                        theta_hat,
                        memberships: DenseVector::from_vec_unchecked(sm),
                        d_minus: outcome.d_minus,
                        p_value: outcome.p_value,
                        log_p_value: outcome.log_p_value,
                        significant: outcome.significant,
                        residual_energy,
                    });
                    Outcome::Candidate(candidates.len() - 1)
                }
                Err(Error::InsufficientSupport { .. }) => Outcome::InsufficientSupport,
                Err(e @ (Error::DegenerateSample(_) | Error::SingularModel)) => Outcome::RefitFailed(e.to_string()),
                Err(e) => return Err(e),
            }
        };
        diagnostics.rounds.push(Round {
            seed_column: star,
            nmu_iterations: iterations,
            nmu_converged: converged,
            relative_residual,
            columns_removed,
            active_after: pref.n_active(),
            outcome,
        });
    }

    let passing: Vec<usize> = (0..candidates.len()).filter(|&t| candidates[t].significant).collect();
    let pool_of_passing: Vec<Bicluster> = passing.iter().map(|&t| candidates[t].clone()).collect();
    let selected_indices: Vec<usize> = select_mis(&pool_of_passing, cfg.corr_threshold)
        .into_iter()
        .map(|k| passing[k])
        .collect();
    let selected: Vec<Bicluster> = selected_indices.iter().map(|&t| candidates[t].clone()).collect();
    let assignment = cfg.exclusive_assignment.then(|| assign_exclusive(&selected, data));
    Ok(FitResult {
        family,
        selected,
        selected_indices,
        all_candidates: candidates,
        assignment,
        diagnostics,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub models: usize,
    pub candidates: usize,
    /// Mean log10 p-value of the selected models.
    pub mean_log10_p: Option<f64>,
    pub misclassification: Option<f64>,
    /// Set when the fit at this σ failed; the other fields are then empty.
    pub error: Option<String>,
}

/// Refits at every σ in `sigmas`, everything else fixed. A failure at one σ
/// is recorded in its row and the sweep continues.
pub fn sigma_sweep<D: AsRef<[f64]>>(
    data: &[D],
    family: ModelFamily,
    cfg: &FitConfig,
    sigmas: &[f64],
    truth: Option<&[usize]>,
) -> Result<Vec<SweepRow>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidParams("empty sigma list".into()));
    }
    let row = |sigma: f64| -> Result<SweepRow> {
        let run = FitConfig { sigma, ..cfg.clone() };
        let result = fit_models(data, family, &run)?;
        let misclassification = truth
            .map(|t| misclassification_error(&assign_exclusive(&result.selected, data), t))
            .transpose()?;
        let k = result.selected.len();
        Ok(SweepRow {
            sigma,
            models: k,
            candidates: result.all_candidates.len(),
            mean_log10_p: (k > 0)
                .then(|| result.selected.iter().map(|b| b.log_p_value).sum::<f64>() / k as f64 / std::f64::consts::LN_10),
            misclassification,
            error: None,
        })
    };
    Ok(sigmas
        .iter()
        .map(|&sigma| {
            row(sigma).unwrap_or_else(|e| SweepRow {
                sigma,
                models: 0,
                candidates: 0,
                mean_log10_p: None,
                misclassification: None,
                error: Some(e.to_string()),
            })
        })
        .collect())
}
