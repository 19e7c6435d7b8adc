//! Hypothesis sampling and the soft preference matrix.
//!
//! Rows of the preference matrix are data, columns are sampled model
//! hypotheses, and each entry is the soft membership of a datum to a
//! hypothesis.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{DenseMatrix, DenseVector};
use crate::model::{fit_minimal, soft_membership, ModelFamily, ModelParams};

/// Redraw budget per requested hypothesis.
const REDRAWS_PER_HYPOTHESIS: usize = 100;
const LOAD_FLOOR: f64 = 1e-9;
const INIT_CLAMP: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub params: ModelParams,
    pub sample_indices: Vec<usize>,
}

/// Random generator for hypothesis `index`: one ChaCha stream per hypothesis,
/// so a pool can be built in any order with identical results.
pub fn hypothesis_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draws `n` minimal samples uniformly at random and fits a model to each.
/// Degenerate samples are redrawn, up to `100·n` attempts in total.
pub fn sample_pool<D: AsRef<[f64]>>(data: &[D], family: ModelFamily, n: usize, seed: u64) -> Result<Vec<Hypothesis>> {
    let b = family.min_sample();
    if data.len() < b {
        return Err(Error::InvalidParams(format!(
            "{} needs at least {b} data, got {}",
            family,
            data.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParams("pool size must be >= 1".into()));
    }
    let budget = REDRAWS_PER_HYPOTHESIS * n;
    let mut attempts = 0;
    let mut pool = Vec::with_capacity(n);
    for j in 0..n {
        let mut rng = hypothesis_rng(seed, j);
        loop {
            if attempts == budget {
                return Err(Error::PoolExhausted { attempts });
            }
            attempts += 1;
            let mut indices = index::sample(&mut rng, data.len(), b).into_vec();
            indices.sort_unstable();
            let sample: Vec<&[f64]> = indices.iter().map(|&i| data[i].as_ref()).collect();
            match fit_minimal(family, &sample) {
                Ok(params) => {
                    pool.push(Hypothesis {
                        params,
                        sample_indices: indices,
                    });
                    break;
                }
                Err(Error::DegenerateSample(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(pool)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreferenceMatrix {
    pub p: DenseMatrix,
    pub hypotheses: Vec<Hypothesis>,
    pub sigma: f64,
    pub active: Vec<bool>,
}

impl PreferenceMatrix {
    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Zeroes and deactivates the given columns.
    pub fn deactivate(&mut self, columns: impl IntoIterator<Item = usize>) {
        let rows = self.p.rows();
        for j in columns {
            self.active[j] = false;
            for i in 0..rows {
                self.p.set(i, j, 0.0);
            }
        }
    }

    fn column_l1(&self, j: usize) -> f64 {
        (0..self.p.rows()).map(|i| self.p.get(i, j)).sum()
    }
}

/// `P_ij = sm(e(x_i, θ_j), σ)`, all columns active.
pub fn build_preference<D: AsRef<[f64]>>(data: &[D], pool: &[Hypothesis], sigma: f64) -> Result<PreferenceMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
    }
    if data.is_empty() || pool.is_empty() {
        return Err(Error::InvalidShape("empty data or hypothesis pool".into()));
    }
    let (m, n) = (data.len(), pool.len());
    let mut p = DenseMatrix::zeros(m, n);
    for (j, h) in pool.iter().enumerate() {
        for (i, d) in h.params.residuals(data).into_iter().enumerate() {
            p.set(i, j, soft_membership(d, sigma));
        }
    }
    Ok(PreferenceMatrix {
        p,
        hypotheses: pool.to_vec(),
        sigma,
        active: vec![true; n],
    })
}

/// Consensus initialization: start from the column with the largest ℓ1 norm
/// (lowest index on ties), the RANSAC choice.
///
/// Returns `(u₀, v₀, j*)` with `u₀ = P_{:j*}/‖P_{:j*}‖∞` and
/// `v₀ = ‖P_{:j*}‖∞ u₀ᵀP / (u₀ᵀu₀)`.
pub fn consensus_init(pref: &PreferenceMatrix) -> Result<(DenseVector, DenseVector, usize)> {
    let mut best: Option<(usize, f64)> = None;
    for j in (0..pref.p.cols()).filter(|&j| pref.active[j]) {
        let l1 = pref.column_l1(j);
        if l1 > best.map_or(0.0, |b| b.1) {
            best = Some((j, l1));
        }
    }
    let (star, _) = best.ok_or(Error::EmptyPreference)?;
    let column = pref.p.col(star);
    let top = column.inf_norm();
    let mut u0 = column;
    u0.scale(1.0 / top);
    let uu: f64 = crate::matlib::dot(&u0, &u0);
    let mut v0 = pref.p.vecmat(&u0);
    v0.iter_mut().for_each(|x| {
        *x *= top / uu;
        if *x < INIT_CLAMP {
            *x = 0.0;
        }
    });
    Ok((u0, v0, star))
}

/// Columns with a positive load, i.e. `v_j > 10⁻⁹ · max(v)`.
pub fn loaded_columns(v: &[f64]) -> Vec<usize> {
    let top = v.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let floor = LOAD_FLOOR * top;
    (0..v.len()).filter(|&j| v[j] > floor).collect()
}

/// Zeroes and deactivates every column carrying a positive load in `v`.
pub fn deflate_columns(pref: &PreferenceMatrix, v: &[f64]) -> Result<PreferenceMatrix> {
    if v.len() != pref.p.cols() {
        return Err(Error::LengthMismatch {
            left: v.len(),
            right: pref.p.cols(),
        });
    }
    let mut next = pref.clone();
    next.deactivate(loaded_columns(v));
    Ok(next)
}
