//! Rank-one nonnegative matrix underapproximation solved by ADMM.
//!
//! Given a nonnegative `A`, find nonnegative `u`, `v` minimizing
//! `‖A − u vᵀ‖F` subject to `A ≥ u vᵀ`. The residual is carried as an explicit
//! nonnegative variable `R = A − u vᵀ` with multiplier `Γ`, and the augmented
//! Lagrangian
//!
//! ```text
//! L(u, v, R, Γ) = ½‖R‖² + Γ • (A − u vᵀ − R) + γ/2 ‖A − u vᵀ − R‖²
//! ```
//!
//! is minimized block by block. Every block has a closed-form minimizer.
//! Because the residual stays nonnegative, factors can be extracted one at a
//! time by deflation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{dot, norm2, rank_one_svd, DenseMatrix, DenseVector};

const DEGENERATE_NORM: f64 = 1e-30;
const CHANGE_EPS: f64 = 1e-12;
const POLISH_U_FLOOR: f64 = 1e-6;
const INIT_CLAMP: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmuConfig {
    /// Penalty parameter γ.
    pub gamma: f64,
    /// Dual step scale ξ.
    pub xi: f64,
    /// Relative-change tolerance τ on both factors.
    pub tau: f64,
    pub max_iters: usize,
    pub record_history: bool,
    /// Shrink the final factors so that `A ≥ u vᵀ` holds exactly.
    pub polish: bool,
}

impl Default for NmuConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            xi: 1.0,
            tau: 1e-5,
            max_iters: 500,
            record_history: true,
            polish: true,
        }
    }
}

impl NmuConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.xi > 0.0 && self.xi <= 2.0) {
            return Err(Error::InvalidParams(format!("xi must be in (0, 2], got {}", self.xi)));
        }
        if !(self.tau >= 0.0) {
            return Err(Error::InvalidParams(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// ADMM iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct NmuState {
    pub u: DenseVector,
    pub v: DenseVector,
    pub r: DenseMatrix,
    pub dual: DenseMatrix,
    pub iter: usize,
}

impl NmuState {
    /// Starting state: `R = P₊(A − u₀ v₀ᵀ)` and `Γ = 0`.
    pub fn start(a: &DenseMatrix, u0: DenseVector, v0: DenseVector) -> Self {
        let r = a.sub_outer(&u0, &v0).project_nonneg();
        let dual = DenseMatrix::zeros(a.rows(), a.cols());
        Self { u: u0, v: v0, r, dual, iter: 0 }
    }
}

/// One extracted rank-one underapproximation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmuFactor {
    pub u: DenseVector,
    pub v: DenseVector,
    pub iterations_used: usize,
    /// `‖R‖F / ‖A‖F` after each iteration, where `A` is the matrix handed to
    /// the solver.
    pub history: Vec<f64>,
    /// `‖A‖F` of the matrix handed to the solver, so the history can be
    /// rescaled against another reference.
    pub input_norm: f64,
    pub converged: bool,
}

impl NmuFactor {
    fn zero(rows: usize, cols: usize, input_norm: f64, converged: bool) -> Self {
        Self {
            u: DenseVector::zeros(rows),
            v: DenseVector::zeros(cols),
            iterations_used: 0,
            history: Vec::new(),
            input_norm,
            converged,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() || self.v.is_zero()
    }

    /// History expressed relative to `reference_norm` instead of the input norm.
    pub fn history_relative_to(&self, reference_norm: f64) -> Vec<f64> {
        let scale = self.input_norm / reference_norm;
        self.history.iter().map(|h| h * scale).collect()
    }

    pub fn outer(&self) -> DenseMatrix {
        crate::matlib::outer(&self.u, &self.v)
    }
}

/// Augmented Lagrangian of the splitting, used for diagnostics and tests.
pub fn augmented_lagrangian(
    a: &DenseMatrix,
    u: &[f64],
    v: &[f64],
    r: &DenseMatrix,
    dual: &DenseMatrix,
    gamma: f64,
) -> f64 {
    let mut value = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let rij = r.get(i, j);
            let gap = a.get(i, j) - u[i] * v[j] - rij;
            value += 0.5 * rij * rij + dual.get(i, j) * gap + 0.5 * gamma * gap * gap;
        }
    }
    value
}

/// `M = A − R + Γ/γ`.
fn shifted_target(a: &DenseMatrix, r: &DenseMatrix, dual: &DenseMatrix, gamma: f64) -> DenseMatrix {
    let inv = 1.0 / gamma;
    let mut m = a.sub(r);
    for (x, g) in m.data_mut().iter_mut().zip(dual.data()) {
        *x += inv * g;
    }
    m
}

/// Minimizer of the augmented Lagrangian over `u ≥ 0` with the other blocks fixed.
pub fn update_u(a: &DenseMatrix, v: &[f64], r: &DenseMatrix, dual: &DenseMatrix, gamma: f64) -> Result<DenseVector> {
    let vv = dot(v, v);
    if vv < DEGENERATE_NORM {
        return Err(Error::DegenerateFactor);
    }
    let m = shifted_target(a, r, dual, gamma);
    let mut u = m.matvec(v);
    u.iter_mut().for_each(|x| *x = (*x / vv).max(0.0));
    Ok(u)
}

/// Minimizer of the augmented Lagrangian over `v ≥ 0` with the other blocks fixed.
pub fn update_v(a: &DenseMatrix, u: &[f64], r: &DenseMatrix, dual: &DenseMatrix, gamma: f64) -> Result<DenseVector> {
    let uu = dot(u, u);
    if uu < DEGENERATE_NORM {
        return Err(Error::DegenerateFactor);
    }
    let m = shifted_target(a, r, dual, gamma);
    let mut v = m.vecmat(u);
    v.iter_mut().for_each(|x| *x = (*x / uu).max(0.0));
    Ok(v)
}

/// Minimizer of the augmented Lagrangian over `R ≥ 0` with the other blocks fixed.
pub fn update_r(a: &DenseMatrix, u: &[f64], v: &[f64], dual: &DenseMatrix, gamma: f64) -> DenseMatrix {
    let scale = 1.0 / (1.0 + gamma);
    let mut r = a.sub_outer(u, v);
    for (x, g) in r.data_mut().iter_mut().zip(dual.data()) {
        *x = (scale * (gamma * *x + g)).max(0.0);
    }
    r
}

/// Dual ascent `Γ + ξγ(A − u vᵀ − R)`.
pub fn update_dual(
    a: &DenseMatrix,
    u: &[f64],
    v: &[f64],
    r: &DenseMatrix,
    dual: &DenseMatrix,
    cfg: &NmuConfig,
) -> DenseMatrix {
    let step = cfg.xi * cfg.gamma;
    let mut next = dual.clone();
    let cols = a.cols();
    for (k, g) in next.data_mut().iter_mut().enumerate() {
        let (i, j) = (k / cols, k % cols);
        *g += step * (a.get(i, j) - u[i] * v[j] - r.get(i, j));
    }
    next
}

/// Rescales so that `max(u) = 1`, moving the mass into `v`. The product
/// `u vᵀ` is unchanged up to rounding.
pub fn rescale(u: &mut DenseVector, v: &mut DenseVector) {
    let top = u.max();
    if top > 0.0 {
        u.scale(1.0 / top);
        v.scale(top);
    }
}

/// One full ADMM sweep: `u`, rescale, `v`, `R`, then the multiplier.
pub fn admm_step(a: &DenseMatrix, state: &NmuState, cfg: &NmuConfig) -> Result<NmuState> {
    let mut u = update_u(a, &state.v, &state.r, &state.dual, cfg.gamma)?;
    let mut v_prev = state.v.clone();
    rescale(&mut u, &mut v_prev);
    let v = update_v(a, &u, &state.r, &state.dual, cfg.gamma)?;
    let r = update_r(a, &u, &v, &state.dual, cfg.gamma);
    let dual = update_dual(a, &u, &v, &r, &state.dual, cfg);
    Ok(NmuState {
        u,
        v,
        r,
        dual,
        iter: state.iter + 1,
    })
}

/// Initial pair from the dominant singular triple:
/// `u₀ = x/‖x‖∞`, `v₀ = ‖x‖∞ s y`.
pub fn init_svd(a: &DenseMatrix) -> Result<(DenseVector, DenseVector)> {
    let svd = match rank_one_svd(a, 1e-10, 1000) {
        Ok(svd) => svd,
        // A stalled power iteration still gives a usable starting point.
        Err(Error::NoConvergence { last, .. }) => *last,
        Err(e) => return Err(e),
    };
    let top = svd.x.inf_norm();
    let clamp = |x: f64| if x < INIT_CLAMP { 0.0 } else { x };
    let u0 = svd.x.iter().map(|&x| clamp(x / top)).collect();
    let v0 = svd.y.iter().map(|&y| clamp(top * svd.s * y)).collect();
    Ok((DenseVector::from_vec_unchecked(u0), DenseVector::from_vec_unchecked(v0)))
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum();
    diff.sqrt() / norm2(old).max(CHANGE_EPS)
}

/// Runs ADMM from `(u0, v0)` until both factors change by less than `τ`
/// (relative) or `max_iters` is reached.
///
/// A collapse to a zero factor is reported as a zero [`NmuFactor`] with
/// `converged = false` rather than an error.
pub fn solve_rank_one(a: &DenseMatrix, init: (DenseVector, DenseVector), cfg: &NmuConfig) -> Result<NmuFactor> {
    cfg.validate()?;
    check_input(a)?;
    let (u0, v0) = init;
    if u0.len() != a.rows() || v0.len() != a.cols() {
        return Err(Error::LengthMismatch {
            left: u0.len() * v0.len(),
            right: a.rows() * a.cols(),
        });
    }
    let input_norm = a.frobenius_norm();
    if input_norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }

    let mut state = NmuState::start(a, u0, v0);
    let mut history = Vec::new();
    let mut converged = false;
    while state.iter < cfg.max_iters {
        let next = match admm_step(a, &state, cfg) {
            Ok(next) => next,
            Err(Error::DegenerateFactor) => {
                let mut zero = NmuFactor::zero(a.rows(), a.cols(), input_norm, false);
                zero.iterations_used = state.iter + 1;
                zero.history = history;
                return Ok(zero);
            }
            Err(e) => return Err(e),
        };
        if cfg.record_history {
            history.push(next.r.frobenius_norm() / input_norm);
        }
        let du = relative_change(&next.u, &state.u);
        let dv = relative_change(&next.v, &state.v);
        state = next;
        if du < cfg.tau && dv < cfg.tau {
            converged = true;
            break;
        }
    }

    let NmuState { mut u, mut v, iter, .. } = state;
    if cfg.polish {
        polish(a, &mut u, &mut v);
    }
    Ok(NmuFactor {
        u,
        v,
        iterations_used: iter,
        history,
        input_norm,
        converged,
    })
}

/// Shrinks `v` (and, for rows with tiny `u`, `u` itself) until
/// `fl(u_i v_j) ≤ A_ij` holds for every entry.
fn polish(a: &DenseMatrix, u: &mut DenseVector, v: &mut DenseVector) {
    for j in 0..a.cols() {
        if v[j] <= 0.0 {
            continue;
        }
        let mut vj = v[j];
        for i in 0..a.rows() {
            if u[i] > POLISH_U_FLOOR {
                vj = vj.min(a.get(i, j) / u[i]);
            }
        }
        while vj > 0.0 && (0..a.rows()).any(|i| u[i] > POLISH_U_FLOOR && u[i] * vj > a.get(i, j)) {
            vj = vj.next_down();
        }
        v[j] = vj.max(0.0);
    }
    for i in 0..a.rows() {
        if u[i] <= 0.0 || u[i] > POLISH_U_FLOOR {
            continue;
        }
        let mut ui = u[i];
        for j in 0..a.cols() {
            if v[j] > 0.0 {
                ui = ui.min(a.get(i, j) / v[j]);
            }
        }
        while ui > 0.0 && (0..a.cols()).any(|j| ui * v[j] > a.get(i, j)) {
            ui = ui.next_down();
        }
        u[i] = ui.max(0.0);
    }
}

fn check_input(a: &DenseMatrix) -> Result<()> {
    match a.first_negative() {
        Some((row, col, value)) => Err(Error::NegativeEntry { row, col, value }),
        None => Ok(()),
    }
}

/// Extracts up to `rank` factors by repeated solve and deflation
/// `A ← P₊(A − û v̂ᵀ)`.
///
/// Once the residual is exhausted (or a solve collapses) the remaining slots
/// are filled with zero factors, so the result always has `rank` entries.
pub fn extract_factors(a: &DenseMatrix, rank: usize, cfg: &NmuConfig) -> Result<Vec<NmuFactor>> {
    if rank == 0 {
        return Err(Error::InvalidParams("rank must be >= 1".into()));
    }
    cfg.validate()?;
    check_input(a)?;
    let original_norm = a.frobenius_norm();
    if original_norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }

    let mut current = a.clone();
    let mut factors = Vec::with_capacity(rank);
    while factors.len() < rank {
        let current_norm = current.frobenius_norm();
        if current_norm < 1e-12 * original_norm {
            break;
        }
        let init = init_svd(&current)?;
        let factor = solve_rank_one(&current, init, cfg)?;
        if factor.is_zero() {
            factors.push(factor);
            break;
        }
        current = current.sub_outer(&factor.u, &factor.v).project_nonneg();
        factors.push(factor);
    }
    while factors.len() < rank {
        factors.push(NmuFactor::zero(a.rows(), a.cols(), 0.0, true));
    }
    Ok(factors)
}

/// `A − Σ u_t v_tᵀ` without clamping.
pub fn reconstruction_residual(a: &DenseMatrix, factors: &[NmuFactor]) -> DenseMatrix {
    factors.iter().fold(a.clone(), |acc, f| acc.sub_outer(&f.u, &f.v))
}
