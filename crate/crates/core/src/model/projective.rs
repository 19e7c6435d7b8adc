//! Homographies and fundamental matrices: normalized DLT, Hartley's
//! normalized eight-point algorithm, symmetric transfer and Sampson distances.

use nalgebra::{DMatrix, Matrix3};

use super::planar::cross;
use super::ModelParams;
use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

const DEGENERACY: f64 = 1e-12;

pub(super) fn to_mat3(theta: &[f64]) -> Mat3 {
    [
        [theta[0], theta[1], theta[2]],
        [theta[3], theta[4], theta[5]],
        [theta[6], theta[7], theta[8]],
    ]
}

/// Row-major entries scaled to unit Frobenius norm, sign fixed so that the
/// largest-magnitude entry (lowest index on ties) is positive.
pub(super) fn normalized_entries(m: &Mat3) -> Result<Vec<f64>> {
    let mut e: Vec<f64> = m.iter().flatten().copied().collect();
    let norm = crate::matlib::norm2(&e);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParams("projective matrix must be nonzero and finite".into()));
    }
    let pivot = (0..9).fold(0, |b, k| if e[k].abs() > e[b].abs() { k } else { b });
    let scale = e[pivot].signum() / norm;
    e.iter_mut().for_each(|x| *x *= scale);
    Ok(e)
}

pub(crate) fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse of a 3×3 matrix, `None` when it is numerically singular.
pub fn invert3(m: &Mat3) -> Option<Mat3> {
    let det = det3(m);
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(det.abs() > 1e-14 * scale.powi(3)) {
        return None;
    }
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [c(1, 1, 2, 2), -c(0, 1, 2, 2), c(0, 1, 1, 2)],
        [-c(1, 0, 2, 2), c(0, 0, 2, 2), -c(0, 0, 1, 2)],
        [c(1, 0, 2, 1), -c(0, 0, 2, 1), c(0, 0, 1, 1)],
    ];
    Some(adj.map(|row| row.map(|x| x / det)))
}

fn mul_vec(m: &Mat3, p: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2])
}

fn mul_t_vec(m: &Mat3, p: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|j| m[0][j] * p[0] + m[1][j] * p[1] + m[2][j] * p[2])
}

fn dehomogenize(p: [f64; 3]) -> Option<[f64; 2]> {
    (p[2].abs() > f64::EPSILON * (p[0].abs() + p[1].abs())).then(|| [p[0] / p[2], p[1] / p[2]])
}

/// `√((‖x′ − Hx‖² + ‖x − H⁻¹x′‖²) / 2)`.
pub(super) fn transfer_residual(h: &Mat3, inv: &Mat3, d: &[f64]) -> f64 {
    let forward = dehomogenize(mul_vec(h, [d[0], d[1], 1.0]));
    let backward = dehomogenize(mul_vec(inv, [d[2], d[3], 1.0]));
    match (forward, backward) {
        (Some(f), Some(b)) => {
            let e1 = (d[2] - f[0]).powi(2) + (d[3] - f[1]).powi(2);
            let e2 = (d[0] - b[0]).powi(2) + (d[1] - b[1]).powi(2);
            ((e1 + e2) / 2.0).sqrt()
        }
        _ => f64::INFINITY,
    }
}

/// `x′ᵀ F x` for a correspondence `(x, y, x′, y′)`.
#[cfg(test)]
pub(crate) fn epipolar(f: &Mat3, d: &[f64]) -> f64 {
    let fx = mul_vec(f, [d[0], d[1], 1.0]);
    d[2] * fx[0] + d[3] * fx[1] + fx[2]
}

/// First-order geometric (Sampson) distance to the epipolar constraint.
pub(super) fn sampson_residual(f: &Mat3, d: &[f64]) -> f64 {
    let fx = mul_vec(f, [d[0], d[1], 1.0]);
    let ftx = mul_t_vec(f, [d[2], d[3], 1.0]);
    let num = d[2] * fx[0] + d[3] * fx[1] + fx[2];
    let den = fx[0] * fx[0] + fx[1] * fx[1] + ftx[0] * ftx[0] + ftx[1] * ftx[1];
    if den > 0.0 {
        (num * num / den).sqrt()
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Similarity moving the weighted centroid to the origin with mean weighted
/// distance √2.
fn hartley(points: impl Iterator<Item = [f64; 2]> + Clone, w: &[f64]) -> Mat3 {
    let total: f64 = w.iter().sum();
    let (mut mx, mut my) = (0.0, 0.0);
    for (p, wi) in points.clone().zip(w) {
        mx += wi * p[0];
        my += wi * p[1];
    }
    mx /= total;
    my /= total;
    let mean: f64 = points
        .zip(w)
        .map(|(p, wi)| wi * (p[0] - mx).hypot(p[1] - my))
        .sum::<f64>()
        / total;
    let s = if mean > 0.0 { std::f64::consts::SQRT_2 / mean } else { 1.0 };
    [[s, 0.0, -s * mx], [0.0, s, -s * my], [0.0, 0.0, 1.0]]
}

fn apply(t: &Mat3, x: f64, y: f64) -> [f64; 2] {
    [t[0][0] * x + t[0][2], t[1][1] * y + t[1][2]]
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Inverse of a Hartley similarity.
fn similarity_inverse(t: &Mat3) -> Mat3 {
    let s = t[0][0];
    [[1.0 / s, 0.0, -t[0][2] / s], [0.0, 1.0 / s, -t[1][2] / s], [0.0, 0.0, 1.0]]
}

/// Right null vector of the stacked rows and the singular values in
/// ascending order.
fn null_vector(rows: &[[f64; 9]]) -> ([f64; 9], Vec<f64>) {
    let n = rows.len().max(9);
    let mut a = DMatrix::<f64>::zeros(n, 9);
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            a[(i, j)] = x;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
    let smallest = order[0];
    let mut h = [0.0; 9];
    for (j, x) in h.iter_mut().enumerate() {
        *x = v_t[(smallest, j)];
    }
    (h, order.iter().map(|&k| svd.singular_values[k]).collect())
}

fn correspondences<'a>(points: &'a [&'a [f64]]) -> (impl Iterator<Item = [f64; 2]> + Clone + 'a, impl Iterator<Item = [f64; 2]> + Clone + 'a) {
    (points.iter().map(|d| [d[0], d[1]]), points.iter().map(|d| [d[2], d[3]]))
}

fn homography_dlt(points: &[&[f64]], w: &[f64]) -> (Mat3, Vec<f64>) {
    let (src, dst) = correspondences(points);
    let t1 = hartley(src, w);
    let t2 = hartley(dst, w);
    let mut rows = Vec::with_capacity(2 * points.len());
    for (d, &wi) in points.iter().zip(w) {
        let s = wi.sqrt();
        let [x, y] = apply(&t1, d[0], d[1]);
        let [xp, yp] = apply(&t2, d[2], d[3]);
        rows.push([0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp].map(|v| s * v));
        rows.push([x, y, 1.0, 0.0, 0.0, 0.0, -xp * x, -xp * y, -xp].map(|v| s * v));
    }
    let (h, singular) = null_vector(&rows);
    let hn = to_mat3(&h);
    (matmul(&similarity_inverse(&t2), &matmul(&hn, &t1)), singular)
}

fn any_three_collinear(points: &[[f64; 2]]) -> bool {
    let refs: Vec<&[f64]> = points.iter().map(|p| &p[..]).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let scale = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    let n = refs.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if 0.5 * cross(refs[a], refs[b], refs[c]).abs() <= DEGENERACY * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

pub(super) fn homography_minimal(points: &[&[f64]]) -> Result<ModelParams> {
    let src: Vec<[f64; 2]> = points.iter().map(|d| [d[0], d[1]]).collect();
    let dst: Vec<[f64; 2]> = points.iter().map(|d| [d[2], d[3]]).collect();
    if any_three_collinear(&src) || any_three_collinear(&dst) {
        return Err(Error::DegenerateSample("three collinear points in a homography sample"));
    }
    let (h, singular) = homography_dlt(points, &[1.0; 4]);
    if singular[1] <= DEGENERACY * singular[singular.len() - 1] {
        return Err(Error::DegenerateSample("rank-deficient homography system"));
    }
    if invert3(&h).is_none() {
        return Err(Error::DegenerateSample("singular homography"));
    }
    ModelParams::homography(h)
}

pub(super) fn homography_weighted(points: &[&[f64]], w: &[f64]) -> Result<ModelParams> {
    let (h, _) = homography_dlt(points, w);
    ModelParams::homography(h)
}

fn fundamental_eight_point(points: &[&[f64]], w: &[f64]) -> (Mat3, Vec<f64>) {
    let (src, dst) = correspondences(points);
    let t1 = hartley(src, w);
    let t2 = hartley(dst, w);
    let rows: Vec<[f64; 9]> = points
        .iter()
        .zip(w)
        .map(|(d, &wi)| {
            let s = wi.sqrt();
            let [x, y] = apply(&t1, d[0], d[1]);
            let [xp, yp] = apply(&t2, d[2], d[3]);
            [xp * x, xp * y, xp, yp * x, yp * y, yp, x, y, 1.0].map(|v| s * v)
        })
        .collect();
    let (f, singular) = null_vector(&rows);
    let fn_ = rank_two(&to_mat3(&f));
    (matmul(&transpose(&t2), &matmul(&fn_, &t1)), singular)
}

/// Closest rank-2 matrix in Frobenius norm.
fn rank_two(f: &Mat3) -> Mat3 {
    let m = Matrix3::from_fn(|i, j| f[i][j]);
    let mut svd = m.svd(true, true);
    let smallest = svd.singular_values.imin();
    svd.singular_values[smallest] = 0.0;
    let r = svd.recompose().expect("both factors computed");
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = r[(i, j)];
        }
    }
    out
}

pub(super) fn fundamental_minimal(points: &[&[f64]]) -> Result<ModelParams> {
    let (f, singular) = fundamental_eight_point(points, &[1.0; 8]);
    // `singular[0]` is the (padded) null direction; a second vanishing value
    // means the eight equations do not pin down a unique solution.
    if !(singular[1] > DEGENERACY * singular[singular.len() - 1]) {
        return Err(Error::DegenerateSample("rank-deficient eight-point system"));
    }
    let params = ModelParams::fundamental(f)?;
    let normalized = to_mat3(&params.theta);
    // Truncate again after denormalization so det(F) vanishes to round-off.
    ModelParams::fundamental(rank_two(&normalized))
}

pub(super) fn fundamental_weighted(points: &[&[f64]], w: &[f64]) -> Result<ModelParams> {
    let (f, _) = fundamental_eight_point(points, w);
    let params = ModelParams::fundamental(f)?;
    ModelParams::fundamental(rank_two(&to_mat3(&params.theta)))
}
