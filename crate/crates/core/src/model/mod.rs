//! Parametric model families.
//!
//! A model is the zero level set of a parametric function. Each family knows
//! its minimal sample size, how to interpolate a minimal sample, how to refit
//! by weighted least squares, and the point-to-model distance used for soft
//! membership.

mod planar;
mod projective;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::DenseVector;

pub use projective::{invert3, Mat3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "line2d")]
    Line2D,
    #[serde(rename = "circle2d")]
    Circle2D,
    #[serde(rename = "homography")]
    Homography,
    #[serde(rename = "fundamental")]
    Fundamental,
}

impl ModelFamily {
    /// Minimal number of data that determine a model.
    pub fn min_sample(self) -> usize {
        match self {
            Self::Line2D => 2,
            Self::Circle2D => 3,
            Self::Homography => 4,
            Self::Fundamental => 8,
        }
    }

    pub fn datum_dim(self) -> usize {
        match self {
            Self::Line2D | Self::Circle2D => 2,
            Self::Homography | Self::Fundamental => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Line2D => "line2d",
            Self::Circle2D => "circle2d",
            Self::Homography => "homography",
            Self::Fundamental => "fundamental",
        }
    }

    pub fn is_planar(self) -> bool {
        self.datum_dim() == 2
    }

    pub fn default_pool_size(self) -> usize {
        if self.is_planar() {
            500
        } else {
            10_000
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line2d" | "line" => Ok(Self::Line2D),
            "circle2d" | "circle" => Ok(Self::Circle2D),
            "homography" => Ok(Self::Homography),
            "fundamental" => Ok(Self::Fundamental),
            other => Err(Error::InvalidParams(format!("unknown model family {other:?}"))),
        }
    }
}

/// A model instance.
///
/// Parameter layouts:
/// - line: `(nx, ny, c)` with unit normal, `{p : n·p + c = 0}`
/// - circle: `(cx, cy, ρ)`, `ρ > 0`
/// - homography: 9 row-major entries of `H`, `‖H‖F = 1`, mapping `x ↦ x′`
/// - fundamental: 9 row-major entries of `F`, `‖F‖F = 1`, rank 2, `x′ᵀ F x = 0`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub family: ModelFamily,
    pub theta: DenseVector,
}

impl ModelParams {
    /// Line with normal `(nx, ny)` (normalized here) and offset `c`.
    pub fn line(nx: f64, ny: f64, c: f64) -> Result<Self> {
        let len = nx.hypot(ny);
        if !(len > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParams("line normal must be nonzero".into()));
        }
        Ok(Self {
            family: ModelFamily::Line2D,
            theta: DenseVector::new(vec![nx / len, ny / len, c / len])?,
        })
    }

    pub fn circle(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams(format!("circle radius must be > 0, got {radius}")));
        }
        Ok(Self {
            family: ModelFamily::Circle2D,
            theta: DenseVector::new(vec![cx, cy, radius])?,
        })
    }

    pub fn homography(h: Mat3) -> Result<Self> {
        Ok(Self {
            family: ModelFamily::Homography,
            theta: DenseVector::new(projective::normalized_entries(&h)?)?,
        })
    }

    pub fn fundamental(f: Mat3) -> Result<Self> {
        Ok(Self {
            family: ModelFamily::Fundamental,
            theta: DenseVector::new(projective::normalized_entries(&f)?)?,
        })
    }

    /// The 3×3 matrix of a projective model.
    pub fn matrix(&self) -> Option<Mat3> {
        match self.family {
            ModelFamily::Homography | ModelFamily::Fundamental => Some(projective::to_mat3(&self.theta)),
            _ => None,
        }
    }

    /// Distance from `datum` to the model.
    pub fn residual(&self, datum: &[f64]) -> Result<f64> {
        check_dim(self.family, datum)?;
        Ok(match self.family {
            ModelFamily::Line2D => planar::line_residual(&self.theta, datum),
            ModelFamily::Circle2D => planar::circle_residual(&self.theta, datum),
            ModelFamily::Homography => {
                let h = projective::to_mat3(&self.theta);
                let inv = invert3(&h).ok_or(Error::SingularModel)?;
                projective::transfer_residual(&h, &inv, datum)
            }
            ModelFamily::Fundamental => projective::sampson_residual(&projective::to_mat3(&self.theta), datum),
        })
    }

    /// Residuals for a whole dataset. Data the model cannot evaluate (a
    /// singular homography) get an infinite distance.
    pub fn residuals<D: AsRef<[f64]>>(&self, data: &[D]) -> Vec<f64> {
        match self.family {
            ModelFamily::Homography => {
                let h = projective::to_mat3(&self.theta);
                match invert3(&h) {
                    Some(inv) => data
                        .iter()
                        .map(|d| projective::transfer_residual(&h, &inv, d.as_ref()))
                        .collect(),
                    None => vec![f64::INFINITY; data.len()],
                }
            }
            _ => data
                .iter()
                .map(|d| self.residual(d.as_ref()).unwrap_or(f64::INFINITY))
                .collect(),
        }
    }
}

fn check_dim(family: ModelFamily, datum: &[f64]) -> Result<()> {
    if datum.len() != family.datum_dim() {
        return Err(Error::InvalidShape(format!(
            "{} datum must have {} coordinates, got {}",
            family,
            family.datum_dim(),
            datum.len()
        )));
    }
    Ok(())
}

/// Gaussian soft membership truncated at three standard deviations.
pub fn soft_membership(d: f64, sigma: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    if d <= 3.0 * sigma {
        (-d * d / (2.0 * sigma * sigma)).exp()
    } else {
        0.0
    }
}

/// Interpolates a model through exactly `family.min_sample()` data.
pub fn fit_minimal<D: AsRef<[f64]>>(family: ModelFamily, sample: &[D]) -> Result<ModelParams> {
    if sample.len() != family.min_sample() {
        return Err(Error::InvalidShape(format!(
            "{} needs a sample of {}, got {}",
            family,
            family.min_sample(),
            sample.len()
        )));
    }
    for d in sample {
        check_dim(family, d.as_ref())?;
    }
    let points: Vec<&[f64]> = sample.iter().map(AsRef::as_ref).collect();
    match family {
        ModelFamily::Line2D => planar::line_through(points[0], points[1]),
        ModelFamily::Circle2D => planar::circumcircle(points[0], points[1], points[2]),
        ModelFamily::Homography => projective::homography_minimal(&points),
        ModelFamily::Fundamental => projective::fundamental_minimal(&points),
    }
}

/// Weighted least-squares refit minimizing `Σ wᵢ e(xᵢ, θ)²`.
///
/// Exact for lines, geometric (Gauss–Newton from an algebraic start) for
/// circles, algebraic DLT with `√wᵢ`-scaled rows for the projective families.
pub fn fit_weighted<D: AsRef<[f64]>>(family: ModelFamily, data: &[D], weights: &[f64]) -> Result<ModelParams> {
    if data.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: data.len(),
            right: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidParams(format!("weights must be finite and >= 0, got {w}")));
    }
    let support = weights.iter().filter(|&&w| w > 0.0).count();
    if support < family.min_sample() {
        return Err(Error::InsufficientSupport {
            have: support,
            need: family.min_sample(),
        });
    }
    let mut points = Vec::with_capacity(support);
    let mut w = Vec::with_capacity(support);
    for (d, &wi) in data.iter().zip(weights) {
        if wi > 0.0 {
            check_dim(family, d.as_ref())?;
            points.push(d.as_ref());
            w.push(wi);
        }
    }
    match family {
        ModelFamily::Line2D => planar::line_weighted(&points, &w),
        ModelFamily::Circle2D => planar::circle_weighted(&points, &w),
        ModelFamily::Homography => projective::homography_weighted(&points, &w),
        ModelFamily::Fundamental => projective::fundamental_weighted(&points, &w),
    }
}

/// `Σ wᵢ e(xᵢ, θ)²`.
pub fn weighted_objective<D: AsRef<[f64]>>(params: &ModelParams, data: &[D], weights: &[f64]) -> f64 {
    params
        .residuals(data)
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(r, w)| w * r * r)
        .sum()
}
