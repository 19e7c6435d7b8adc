//! Dense row-major matrices and vectors, the nonnegative projection, and a
//! rank-one SVD computed by power iteration.
//!
//! Everything here is deliberately small: the matrices handled by the rest of
//! the crate are at most a few thousand rows by a few thousand columns.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite real vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        check_finite(&data)?;
        Ok(Self(data))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub(crate) fn from_vec_unchecked(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|x| x.is_finite()));
        Self(data)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.0)
    }

    /// Largest entry, `-inf` for an empty vector.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        self.0.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn project_nonneg(&self) -> Self {
        Self(self.0.iter().map(|&x| x.max(0.0)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.0
    }
}

/// A finite real matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(value.is_finite());
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> DenseVector {
        DenseVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonneg(&self) -> bool {
        self.data.iter().all(|&x| x >= 0.0)
    }

    /// First negative entry in row-major order.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(|&x| x < 0.0)
            .map(|k| (k / self.cols, k % self.cols, self.data[k]))
    }

    pub fn project_nonneg(&self) -> Self {
        self.map(|x| x.max(0.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> DenseVector {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        DenseVector((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `yᵀ A`, returned as a column-length vector.
    pub fn vecmat(&self, y: &[f64]) -> DenseVector {
        assert_eq!(y.len(), self.rows, "vecmat dimension");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        DenseVector(out)
    }

    /// `A - u vᵀ`.
    pub fn sub_outer(&self, u: &[f64], v: &[f64]) -> Self {
        assert_eq!((u.len(), v.len()), self.shape(), "sub_outer dimension");
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - u[i] * v[j])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|x| x * factor)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Reads a headerless CSV matrix. Ragged rows are rejected with the
    /// offending line number.
    pub fn read_csv(reader: impl BufRead) -> Result<Self> {
        let mut data = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut n = 0;
            for field in line.split(',') {
                let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("not a number: {:?}", field.trim()),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "non-finite value".into(),
                    });
                }
                data.push(value);
                n += 1;
            }
            match cols {
                None => cols = Some(n),
                Some(c) if c != n => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("ragged row: {n} fields, expected {c}"),
                    })
                }
                Some(_) => {}
            }
            rows += 1;
        }
        Self::new(rows, cols.unwrap_or(0), data)
    }

    pub fn write_csv(&self, mut writer: impl Write) -> Result<()> {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| format!("{x:e}")).collect();
            writeln!(writer, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(Error::NonFinite(k)),
        None => Ok(()),
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot dimension");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn outer(u: &[f64], v: &[f64]) -> DenseMatrix {
    assert!(!u.is_empty() && !v.is_empty(), "outer of empty vector");
    DenseMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
}

/// Dominant singular triple `s x yᵀ` of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Svd1 {
    pub x: DenseVector,
    pub s: f64,
    pub y: DenseVector,
}

/// Rank-one SVD by power iteration on the smaller Gram matrix.
///
/// The iteration starts from the row-sum direction of `A`, so runs are
/// reproducible without a seed and, for nonnegative input, every iterate stays
/// in the nonnegative orthant. Convergence is declared when the relative
/// change of the Rayleigh quotient drops below `tol`. The returned triple is
/// sign-canonicalized: the largest-magnitude entry of `x` (lowest index on
/// ties) is positive.
pub fn rank_one_svd(a: &DenseMatrix, tol: f64, max_iters: usize) -> Result<Svd1> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol must be positive, got {tol}")));
    }
    if a.frobenius_norm() == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    // Iterate on whichever Gram matrix is smaller.
    if a.cols() <= a.rows() {
        power_iterate(a, tol, max_iters)
    } else {
        let svd = power_iterate(&a.transpose(), tol, max_iters).map_err(|e| match e {
            Error::NoConvergence { iterations, last } => Error::NoConvergence {
                iterations,
                last: Box::new(swap_sides(*last)),
            },
            other => other,
        })?;
        Ok(canonicalize(swap_sides(svd)))
    }
}

fn swap_sides(svd: Svd1) -> Svd1 {
    Svd1 {
        x: svd.y,
        s: svd.s,
        y: svd.x,
    }
}

/// Power iteration on `AᵀA` acting on the column space.
fn power_iterate(a: &DenseMatrix, tol: f64, max_iters: usize) -> Result<Svd1> {
    let n = a.cols();
    let row_sums: Vec<f64> = (0..a.rows()).map(|i| a.row(i).iter().sum()).collect();
    let mut y = a.vecmat(&row_sums).into_inner();
    if norm2(&y) == 0.0 {
        y = vec![1.0; n];
        if a.matvec(&y).norm2() == 0.0 {
            // All-ones is in the null space too; start from the heaviest column.
            let heaviest = (0..n)
                .map(|j| (j, a.col(j).norm2()))
                .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best })
                .0;
            y = vec![0.0; n];
            y[heaviest] = 1.0;
        }
    }
    normalize(&mut y);

    let mut ay = a.matvec(&y);
    let mut rayleigh = dot(&ay, &ay);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut next = a.vecmat(&ay).into_inner();
        let len = norm2(&next);
        if len == 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= len);
        y = next;
        ay = a.matvec(&y);
        let updated = dot(&ay, &ay);
        let change = (updated - rayleigh).abs() / updated.max(f64::MIN_POSITIVE);
        rayleigh = updated;
        if change < tol {
            converged = true;
            break;
        }
    }

    let s = ay.norm2();
    let mut x = ay.into_inner();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
    let svd = canonicalize(Svd1 {
        x: DenseVector(x),
        s,
        y: DenseVector(y),
    });
    if converged {
        Ok(svd)
    } else {
        Err(Error::NoConvergence {
            iterations,
            last: Box::new(svd),
        })
    }
}

fn normalize(v: &mut [f64]) {
    let len = norm2(v);
    v.iter_mut().for_each(|x| *x /= len);
}

fn canonicalize(mut svd: Svd1) -> Svd1 {
    let mut pivot = 0;
    for (k, &value) in svd.x.iter().enumerate() {
        if value.abs() > svd.x[pivot].abs() {
            pivot = k;
        }
    }
    if svd.x[pivot] < 0.0 {
        svd.x.scale(-1.0);
        svd.y.scale(-1.0);
    }
    svd
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, nonneg: bool) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| {
            if nonneg {
                rng.random::<f64>()
            } else {
                rng.random::<f64>() * 2.0 - 1.0
            }
        })
    }

    /// Cyclic Jacobi eigen-decomposition of a symmetric matrix, used as an
    /// independent reference for the dominant singular pair.
    fn jacobi_eigen(mut s: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = s.len();
        let mut v = vec![vec![0.0; n]; n];
        for (i, row) in v.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| s[i][j] * s[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if s[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let skp = s[k][p];
                        let skq = s[k][q];
                        s[k][p] = c * skp - sn * skq;
                        s[k][q] = sn * skp + c * skq;
                    }
                    for k in 0..n {
                        let spk = s[p][k];
                        let sqk = s[q][k];
                        s[p][k] = c * spk - sn * sqk;
                        s[q][k] = sn * spk + c * sqk;
                    }
                    for row in v.iter_mut() {
                        let vp = row[p];
                        let vq = row[q];
                        row[p] = c * vp - sn * vq;
                        row[q] = sn * vp + c * vq;
                    }
                }
            }
        }
        ((0..n).map(|i| s[i][i]).collect(), v)
    }

    #[test]
    fn projection_examples() {
        let b = DenseMatrix::from_rows(&[vec![-1.0, 2.0], vec![0.5, -3.0]]).unwrap();
        let p = b.project_nonneg();
        assert_eq!(p.data(), &[0.0, 2.0, 0.5, 0.0]);

        let nonneg = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(nonneg.project_nonneg(), nonneg);

        let neg = DenseMatrix::from_rows(&[vec![-1.0, -2.0]]).unwrap();
        assert_eq!(neg.project_nonneg(), DenseMatrix::zeros(1, 2));

        let v = DenseVector::new(vec![-1.0, 4.0]).unwrap();
        assert_eq!(&*v.project_nonneg(), &[0.0, 4.0]);
    }

    #[test]
    fn plumbing_examples() {
        let m = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.frobenius_norm(), 5.0);
        assert_eq!(inf_norm(&[-2.0, 1.0]), 2.0);
        let o = outer(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(o.data(), &[3.0, 4.0, 6.0, 8.0]);
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(&*a.matvec(&[1.0, 1.0]), &[3.0, 7.0]);
        assert_eq!(&*a.vecmat(&[1.0, 1.0]), &[4.0, 6.0]);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(matches!(DenseMatrix::new(0, 2, vec![]), Err(Error::InvalidShape(_))));
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0; 3]), Err(Error::InvalidShape(_))));
        assert!(DenseVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn csv_roundtrip_and_ragged_rows() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.25], vec![-3.5, 1e-20]]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(DenseMatrix::read_csv(&buf[..]).unwrap(), a);

        let err = DenseMatrix::read_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = DenseMatrix::read_csv("1,2\n3,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn svd_of_diagonal() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let svd = rank_one_svd(&a, 1e-12, 1000).unwrap();
        assert!((svd.s - 2.0).abs() < 1e-12);
        assert!((svd.x[0] - 1.0).abs() < 1e-6 && svd.x[1].abs() < 1e-6);
        assert!((svd.y[0] - 1.0).abs() < 1e-6 && svd.y[1].abs() < 1e-6);
    }

    #[test]
    fn svd_of_exact_rank_one() {
        let a = outer(&[1.0, 2.0], &[3.0, 1.0]);
        let svd = rank_one_svd(&a, 1e-10, 1000).unwrap();
        assert!((svd.s - 5f64.sqrt() * 10f64.sqrt()).abs() < 1e-12);
        let (na, nb) = (5f64.sqrt(), 10f64.sqrt());
        for (x, e) in svd.x.iter().zip([1.0 / na, 2.0 / na]) {
            assert!((x - e).abs() < 1e-12);
        }
        for (y, e) in svd.y.iter().zip([3.0 / nb, 1.0 / nb]) {
            assert!((y - e).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 8, 6, true);
        let gram: Vec<Vec<f64>> = (0..6)
            .map(|p| (0..6).map(|q| dot(&a.col(p), &a.col(q))).collect())
            .collect();
        let (values, vectors) = jacobi_eigen(gram);
        let top = (0..6).fold(0, |b, k| if values[k] > values[b] { k } else { b });
        let mut y: Vec<f64> = vectors.iter().map(|row| row[top]).collect();
        let s = values[top].sqrt();
        let mut x = a.matvec(&y).into_inner();
        x.iter_mut().for_each(|v| *v /= s);
        if x.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m }) < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
            y.iter_mut().for_each(|v| *v = -*v);
        }

        let svd = rank_one_svd(&a, 1e-14, 10_000).unwrap();
        assert!((svd.s - s).abs() < 1e-8 * s);
        for (p, q) in svd.x.iter().zip(&x) {
            assert!((p - q).abs() < 1e-8);
        }
        for (p, q) in svd.y.iter().zip(&y) {
            assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn wide_matrix_uses_transposed_iteration() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.5]]).unwrap();
        let svd = rank_one_svd(&a, 1e-12, 1000).unwrap();
        assert_eq!((svd.x.len(), svd.y.len()), (2, 3));
        assert!((svd.x.norm2() - 1.0).abs() < 1e-12);
        assert!((svd.y.norm2() - 1.0).abs() < 1e-12);
        // A y = s x
        let ay = a.matvec(&svd.y);
        for (l, r) in ay.iter().zip(svd.x.iter()) {
            assert!((l - svd.s * r).abs() < 1e-6);
        }
    }

    #[test]
    fn svd_errors() {
        assert!(matches!(rank_one_svd(&DenseMatrix::zeros(3, 2), 1e-10, 10), Err(Error::ZeroMatrix)));
        // Two equal singular values with an adversarial start never settle in
        // one step budget; the last iterate is still attached.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 30, 20, false);
        match rank_one_svd(&a, 1e-300, 2) {
            Err(Error::NoConvergence { iterations, last }) => {
                assert_eq!(iterations, 2);
                assert!((last.x.norm2() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn residual_identity_and_perron_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 6, 5, false);
            let svd = rank_one_svd(&a, 1e-10, 1000).unwrap();
            assert!((svd.x.norm2() - 1.0).abs() < 1e-12 && (svd.y.norm2() - 1.0).abs() < 1e-12);
            let mut sx = svd.x.clone();
            sx.scale(svd.s);
            let r = a.sub_outer(&sx, &svd.y).frobenius_norm().powi(2);
            let expected = a.frobenius_norm().powi(2) - svd.s * svd.s;
            assert!((r - expected).abs() < 1e-8, "{r} vs {expected}");
        }
        for _ in 0..100 {
            let (r, c) = (rng.random_range(1..12), rng.random_range(1..12));
            let a = random_matrix(&mut rng, r, c, true);
            let svd = rank_one_svd(&a, 1e-10, 1000).unwrap();
            assert!(svd.x.iter().chain(svd.y.iter()).all(|&v| v >= -1e-10));
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = DenseMatrix> {
            (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
                proptest::collection::vec(-10.0f64..10.0, r * c)
                    .prop_map(move |d| DenseMatrix::new(r, c, d).unwrap())
            })
        }

        proptest! {
            #[test]
            fn projection_is_idempotent(b in matrix()) {
                let once = b.project_nonneg();
                prop_assert_eq!(once.project_nonneg(), once);
            }

            #[test]
            fn projection_is_nearest_nonneg_point(
                b in matrix(),
                seeds in proptest::collection::vec(0.0f64..10.0, 36),
            ) {
                let p = b.project_nonneg();
                let c = DenseMatrix::from_fn(b.rows(), b.cols(), |i, j| seeds[i * 6 + j]);
                prop_assert!(b.sub(&p).frobenius_norm() <= b.sub(&c).frobenius_norm() + 1e-12);
            }
        }
    }
}
