//! On-disk formats: dataset JSON, matrix CSV, factor files and fit results.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matlib::DenseMatrix;
use crate::model::ModelFamily;
use crate::nmu::NmuFactor;
use crate::robustfit::{Diagnostics, FitResult};
use crate::synth::Dataset;

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let set: Dataset = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    set.validate()?;
    Ok(set)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    DenseMatrix::read_csv(BufReader::new(File::open(path)?))
}

pub fn write_matrix(path: &Path, matrix: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    matrix.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Factors side by side: column `t` of the first matrix is `u_t`, of the
/// second `v_t`.
pub fn factor_columns(factors: &[NmuFactor]) -> (DenseMatrix, DenseMatrix) {
    let m = factors.first().map_or(0, |f| f.u.len());
    let n = factors.first().map_or(0, |f| f.v.len());
    (
        DenseMatrix::from_fn(m, factors.len(), |i, t| factors[t].u[i]),
        DenseMatrix::from_fn(n, factors.len(), |j, t| factors[t].v[j]),
    )
}

/// Per-factor solver record written next to the factor CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSidecar {
    pub iterations_used: Vec<usize>,
    pub converged: Vec<bool>,
    /// `‖R‖F/‖A‖F` per iteration, against the matrix each factor was solved on.
    pub relative_residual_history: Vec<Vec<f64>>,
    /// The same curves rescaled to the norm of the original input.
    pub relative_to_input_history: Vec<Vec<f64>>,
}

impl FactorSidecar {
    pub fn new(factors: &[NmuFactor], input_norm: f64) -> Self {
        Self {
            iterations_used: factors.iter().map(|f| f.iterations_used).collect(),
            converged: factors.iter().map(|f| f.converged).collect(),
            relative_residual_history: factors.iter().map(|f| f.history.clone()).collect(),
            relative_to_input_history: factors.iter().map(|f| f.history_relative_to(input_norm)).collect(),
        }
    }
}

/// Writes `u.csv`, `v.csv` and `factors.json` into `dir`.
pub fn write_factors(dir: &Path, factors: &[NmuFactor], input_norm: f64) -> Result<()> {
    let (u, v) = factor_columns(factors);
    write_matrix(&dir.join("u.csv"), &u)?;
    write_matrix(&dir.join("v.csv"), &v)?;
    write_json(&dir.join("factors.json"), &FactorSidecar::new(factors, input_norm))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub family: ModelFamily,
    pub theta: Vec<f64>,
    pub p_value: f64,
    pub d_minus: f64,
    pub support_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub models: Vec<ModelRecord>,
    /// File name of the m×T membership CSV, relative to this file.
    pub memberships: String,
    pub assignment: Option<Vec<usize>>,
    pub misclassification: Option<f64>,
    pub diagnostics: Diagnostics,
}

pub fn membership_matrix(result: &FitResult, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, result.selected.len(), |i, t| result.selected[t].memberships[i])
}

impl ResultFile {
    pub fn new(result: &FitResult, misclassification: Option<f64>, memberships: &str) -> Self {
        Self {
            models: result
                .selected
                .iter()
                .map(|b| ModelRecord {
                    family: b.theta_hat.family,
                    theta: b.theta_hat.theta.to_vec(),
                    p_value: b.p_value,
                    d_minus: b.d_minus,
                    support_size: b.support_size(),
                })
                .collect(),
            memberships: memberships.to_string(),
            assignment: result.assignment.clone(),
            misclassification,
            diagnostics: result.diagnostics.clone(),
        }
    }
}

/// Writes `result.json` and `memberships.csv` into `dir`.
pub fn write_result(dir: &Path, result: &FitResult, m: usize, misclassification: Option<f64>) -> Result<ResultFile> {
    const MEMBERSHIPS: &str = "memberships.csv";
    write_matrix(&dir.join(MEMBERSHIPS), &membership_matrix(result, m))?;
    let file = ResultFile::new(result, misclassification, MEMBERSHIPS);
    write_json(&dir.join("result.json"), &file)?;
    Ok(file)
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
