//! Seeded synthetic datasets with ground-truth labels (0 = outlier).

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{invert3, Mat3, ModelFamily, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub family: ModelFamily,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn truth(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.family.datum_dim();
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidShape(format!(
                    "point {i} has {} coordinates, {} needs {dim}",
                    p.len(),
                    self.family
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.points.len() {
                return Err(Error::LengthMismatch {
                    left: labels.len(),
                    right: self.points.len(),
                });
            }
        }
        Ok(())
    }
}

/// Which planar generator to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanarKind {
    Star,
    Stairs,
    Circles,
}

impl std::str::FromStr for PlanarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Self::Star),
            "stairs" => Ok(Self::Stairs),
            "circles" => Ok(Self::Circles),
            _ => Err(Error::InvalidParams(format!("unknown planar dataset `{s}`"))),
        }
    }
}

/// Size and corruption of a planar dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarParams {
    pub structures: usize,
    /// Standard deviation of the Gaussian noise on each coordinate.
    pub noise: f64,
    pub outlier_ratio: f64,
    pub total: usize,
    pub seed: u64,
}

impl PlanarParams {
    fn validate(&self) -> Result<()> {
        if self.structures == 0 {
            return Err(Error::InvalidParams("need at least one structure".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidParams(format!("noise must be >= 0, got {}", self.noise)));
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return Err(Error::InvalidParams(format!(
                "outlier ratio must lie in [0, 1), got {}",
                self.outlier_ratio
            )));
        }
        if self.inliers() < self.structures {
            return Err(Error::InvalidParams(format!(
                "{} points leave fewer than one inlier per structure",
                self.total
            )));
        }
        Ok(())
    }

    fn outliers(&self) -> usize {
        (self.total as f64 * self.outlier_ratio).round() as usize
    }

    fn inliers(&self) -> usize {
        self.total - self.outliers()
    }

    /// Inlier count of structure `t`; the remainder goes to the first ones.
    fn share(&self, t: usize) -> usize {
        let n = self.inliers();
        n / self.structures + usize::from(t < n % self.structures)
    }
}

pub fn planar(kind: PlanarKind, params: &PlanarParams) -> Result<Dataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let k = params.structures;
    let mut points = Vec::with_capacity(params.total);
    let mut labels = Vec::with_capacity(params.total);
    let family = match kind {
        PlanarKind::Star | PlanarKind::Stairs => ModelFamily::Line2D,
        PlanarKind::Circles => ModelFamily::Circle2D,
    };
    let turn: f64 = rng.random::<f64>() * std::f64::consts::PI / k as f64;
    for t in 0..k {
        for _ in 0..params.share(t) {
            let s: f64 = rng.random();
            let [x, y] = match kind {
                PlanarKind::Star => {
                    let angle = turn + std::f64::consts::PI * t as f64 / k as f64;
                    let r = 0.5 * (2.0 * s - 1.0);
                    [0.5 + r * angle.cos(), 0.5 + r * angle.sin()]
                }
                PlanarKind::Stairs => {
                    let width = 0.8 / k as f64;
                    [0.1 + width * (t as f64 + s), 0.1 + 0.8 * (t as f64 + 0.5) / k as f64]
                }
                PlanarKind::Circles => {
                    let (cx, cy, radius) = ring_circle(t, k, turn);
                    let angle = std::f64::consts::TAU * s;
                    [cx + radius * angle.cos(), cy + radius * angle.sin()]
                }
            };
            points.push(vec![x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
            labels.push(t + 1);
        }
    }
    for _ in 0..params.outliers() {
        points.push(vec![rng.random(), rng.random()]);
        labels.push(0);
    }
    Ok(Dataset {
        family,
        points,
        labels: Some(labels),
    })
}

/// Circle `t` of `k` with centres on a ring; neighbours overlap.
fn ring_circle(t: usize, k: usize, turn: f64) -> (f64, f64, f64) {
    if k == 1 {
        return (0.5, 0.5, 0.3);
    }
    let angle = 2.0 * turn + std::f64::consts::TAU * t as f64 / k as f64;
    (0.5 + 0.25 * angle.cos(), 0.5 + 0.25 * angle.sin(), 0.15)
}

pub fn star(k: usize, noise: f64, outlier_ratio: f64, total: usize, seed: u64) -> Result<Dataset> {
    let params = PlanarParams {
        structures: k,
        noise,
        outlier_ratio,
        total,
        seed,
    };
    planar(PlanarKind::Star, &params)
}

pub fn circles(k: usize, noise: f64, outlier_ratio: f64, total: usize, seed: u64) -> Result<Dataset> {
    let params = PlanarParams {
        structures: k,
        noise,
        outlier_ratio,
        total,
        seed,
    };
    planar(PlanarKind::Circles, &params)
}

/// Ground-truth model of structure `t` in a planar dataset.
pub fn planar_truth(kind: PlanarKind, params: &PlanarParams) -> Result<Vec<ModelParams>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let k = params.structures;
    let turn: f64 = rng.random::<f64>() * std::f64::consts::PI / k as f64;
    (0..k)
        .map(|t| match kind {
            PlanarKind::Star => {
                let angle = turn + std::f64::consts::PI * t as f64 / k as f64;
                let (nx, ny) = (-angle.sin(), angle.cos());
                ModelParams::line(nx, ny, -(0.5 * nx + 0.5 * ny))
            }
            PlanarKind::Stairs => ModelParams::line(0.0, 1.0, -(0.1 + 0.8 * (t as f64 + 0.5) / k as f64)),
            PlanarKind::Circles => {
                let (cx, cy, r) = ring_circle(t, k, turn);
                ModelParams::circle(cx, cy, r)
            }
        })
        .collect()
}

/// Image size used by the two-view generators.
pub const IMAGE: [f64; 2] = [640.0, 480.0];

/// Size and corruption of a two-view dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoViewParams {
    pub structures: usize,
    pub per_structure: usize,
    pub outliers: usize,
    /// Pixel noise on every coordinate.
    pub noise: f64,
    pub seed: u64,
}

impl TwoViewParams {
    fn validate(&self) -> Result<()> {
        if self.structures == 0 || self.per_structure == 0 {
            return Err(Error::InvalidParams("need at least one structure with one point".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidParams(format!("noise must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }
}

fn random_homography(rng: &mut ChaCha8Rng) -> Mat3 {
    let mut u = |half: f64| (2.0 * rng.random::<f64>() - 1.0) * half;
    [
        [1.0 + u(0.2), u(0.2), u(80.0)],
        [u(0.2), 1.0 + u(0.2), u(80.0)],
        [u(3e-4), u(3e-4), 1.0],
    ]
}

fn apply(h: &Mat3, x: f64, y: f64) -> [f64; 2] {
    let p = [0, 1, 2].map(|i| h[i][0] * x + h[i][1] * y + h[i][2]);
    [p[0] / p[2], p[1] / p[2]]
}

fn in_image(p: [f64; 2]) -> bool {
    (0.0..IMAGE[0]).contains(&p[0]) && (0.0..IMAGE[1]).contains(&p[1])
}

/// Planes seen in two views: each structure is a ground-truth homography
/// applied to points spread over the first image. Homographies are redrawn
/// until every pair moves the image grid apart by at least 40 px on average,
/// so the structures are distinguishable. Gross outliers pair two unrelated
/// image positions.
pub fn homography_scene(params: &TwoViewParams) -> Result<(Dataset, Vec<Mat3>)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let grid: Vec<[f64; 2]> = (0..8)
        .flat_map(|a| (0..6).map(move |b| [IMAGE[0] * (a as f64 + 0.5) / 8.0, IMAGE[1] * (b as f64 + 0.5) / 6.0]))
        .collect();
    let mut maps: Vec<Mat3> = Vec::new();
    while maps.len() < params.structures {
        let h = random_homography(&mut rng);
        let distinct = maps.iter().all(|g| {
            let gap: f64 = grid
                .iter()
                .map(|p| {
                    let (a, b) = (apply(&h, p[0], p[1]), apply(g, p[0], p[1]));
                    (a[0] - b[0]).hypot(a[1] - b[1])
                })
                .sum::<f64>()
                / grid.len() as f64;
            gap > 40.0
        });
        if distinct && invert3(&h).is_some() {
            maps.push(h);
        }
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (t, h) in maps.iter().enumerate() {
        let mut made = 0;
        while made < params.per_structure {
            let (x, y) = (rng.random::<f64>() * IMAGE[0], rng.random::<f64>() * IMAGE[1]);
            let q = apply(h, x, y);
            if !in_image(q) {
                continue;
            }
            points.push(vec![
                x + noise.sample(&mut rng),
                y + noise.sample(&mut rng),
                q[0] + noise.sample(&mut rng),
                q[1] + noise.sample(&mut rng),
            ]);
            labels.push(t + 1);
            made += 1;
        }
    }
    push_gross_outliers(&mut rng, params.outliers, &mut points, &mut labels);
    Ok((
        Dataset {
            family: ModelFamily::Homography,
            points,
            labels: Some(labels),
        },
        maps,
    ))
}

fn push_gross_outliers(rng: &mut ChaCha8Rng, n: usize, points: &mut Vec<Vec<f64>>, labels: &mut Vec<usize>) {
    for _ in 0..n {
        points.push(vec![
            rng.random::<f64>() * IMAGE[0],
            rng.random::<f64>() * IMAGE[1],
            rng.random::<f64>() * IMAGE[0],
            rng.random::<f64>() * IMAGE[1],
        ]);
        labels.push(0);
    }
}

fn to_mat3(m: &Matrix3<f64>) -> Mat3 {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

fn intrinsics() -> Matrix3<f64> {
    Matrix3::new(500.0, 0.0, IMAGE[0] / 2.0, 0.0, 500.0, IMAGE[1] / 2.0, 0.0, 0.0, 1.0)
}

/// A random rigid motion between two pinhole cameras and `n` noise-free
/// correspondences of points in front of both. Returns the fundamental matrix
/// with `x′ᵀ F x = 0`.
pub fn random_two_view<R: Rng>(rng: &mut R, n: usize) -> (Mat3, Vec<[f64; 4]>) {
    let mut u = |half: f64| (2.0 * rng.random::<f64>() - 1.0) * half;
    let rotation = Rotation3::from_euler_angles(u(0.15), u(0.15), u(0.15)).into_inner();
    let translation = Vector3::new(u(1.0), u(0.3), u(0.3)) + Vector3::new(1.0, 0.0, 0.0);
    let k = intrinsics();
    let k_inv = k.try_inverse().expect("intrinsics are invertible");
    let cross = translation.cross_matrix();
    let f = k_inv.transpose() * cross * rotation * k_inv;
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x = Vector3::new(u(1.5), u(1.2), 4.0 + 4.0 * (u(0.5) + 0.5));
        let second = rotation * x + translation;
        if second.z <= 0.5 {
            continue;
        }
        let a = k * x;
        let b = k * second;
        points.push([a.x / a.z, a.y / a.z, b.x / b.z, b.y / b.z]);
    }
    (to_mat3(&f), points)
}

/// Independently moving rigid bodies seen in two views, one fundamental
/// matrix per body, plus gross outliers.
pub fn fundamental_scene(params: &TwoViewParams) -> Result<(Dataset, Vec<Mat3>)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut maps = Vec::new();
    for t in 0..params.structures {
        let (f, corr) = random_two_view(&mut rng, params.per_structure);
        for c in corr {
            points.push(c.iter().map(|&x| x + noise.sample(&mut rng)).collect());
            labels.push(t + 1);
        }
        maps.push(f);
    }
    push_gross_outliers(&mut rng, params.outliers, &mut points, &mut labels);
    Ok((
        Dataset {
            family: ModelFamily::Fundamental,
            points,
            labels: Some(labels),
        },
        maps,
    ))
}

/// Binary 10×10 images built from 5 disjoint parts of distinct sizes, one
/// image per column. Each image is the union of two parts. Returns the
/// matrix and the pixel indices of every part.
pub fn parts_toy() -> (crate::matlib::DenseMatrix, Vec<Vec<usize>>) {
    const SIZES: [usize; 5] = [24, 20, 16, 12, 8];
    const IMAGES: [[usize; 2]; 6] = [[0, 1], [1, 2], [2, 3], [3, 4], [4, 0], [0, 2]];
    let mut masks = Vec::with_capacity(SIZES.len());
    let mut start = 0;
    for size in SIZES {
        masks.push((start..start + size).collect::<Vec<_>>());
        start += size;
    }
    let owner = |i: usize| masks.iter().position(|m: &Vec<usize>| m.contains(&i));
    let a = crate::matlib::DenseMatrix::from_fn(100, IMAGES.len(), |i, c| match owner(i) {
        Some(p) if IMAGES[c].contains(&p) => 1.0,
        _ => 0.0,
    });
    (a, masks)
}
