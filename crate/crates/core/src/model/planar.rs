use super::ModelParams;
use crate::error::{Error, Result};

const DEGENERACY: f64 = 1e-12;
const GN_MAX_ITERS: usize = 20;
const GN_STEP_TOL: f64 = 1e-10;

pub(super) fn line_residual(theta: &[f64], p: &[f64]) -> f64 {
    (theta[0] * p[0] + theta[1] * p[1] + theta[2]).abs()
}

pub(super) fn circle_residual(theta: &[f64], p: &[f64]) -> f64 {
    ((p[0] - theta[0]).hypot(p[1] - theta[1]) - theta[2]).abs()
}

fn bbox_diagonal(points: &[&[f64]]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).hypot(hi[1] - lo[1])
}

/// Twice the signed area of the triangle `abc`.
pub(super) fn cross(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

pub(super) fn line_through(a: &[f64], b: &[f64]) -> Result<ModelParams> {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    if dx.hypot(dy) <= DEGENERACY * scale {
        return Err(Error::DegenerateSample("coincident points"));
    }
    let len = dx.hypot(dy);
    let (nx, ny) = (-dy / len, dx / len);
    ModelParams::line(nx, ny, -(nx * a[0] + ny * a[1]))
}

pub(super) fn circumcircle(a: &[f64], b: &[f64], c: &[f64]) -> Result<ModelParams> {
    let scale = bbox_diagonal(&[a, b, c]);
    let area = 0.5 * cross(a, b, c).abs();
    if area <= DEGENERACY * scale * scale {
        return Err(Error::DegenerateSample("collinear circle sample"));
    }
    // Work relative to `a` for conditioning.
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ModelParams::circle(a[0] + ux, a[1] + uy, ux.hypot(uy))
}

pub(super) fn line_weighted(points: &[&[f64]], w: &[f64]) -> Result<ModelParams> {
    let total: f64 = w.iter().sum();
    let mx = points.iter().zip(w).map(|(p, w)| w * p[0]).sum::<f64>() / total;
    let my = points.iter().zip(w).map(|(p, w)| w * p[1]).sum::<f64>() / total;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (p, w) in points.iter().zip(w) {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx + syy <= 0.0 {
        return Err(Error::DegenerateSample("all weighted points coincide"));
    }
    // Principal direction of the weighted scatter; the normal is orthogonal.
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (nx, ny) = (-phi.sin(), phi.cos());
    ModelParams::line(nx, ny, -(nx * mx + ny * my))
}

/// Weighted algebraic (Kåsa) fit, in coordinates centred on the weighted mean.
fn kasa(points: &[&[f64]], w: &[f64], origin: [f64; 2]) -> Option<[f64; 3]> {
    // Rows √w [x, y, 1], right-hand side −√w (x² + y²).
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (p, &wi) in points.iter().zip(w) {
        let (x, y) = (p[0] - origin[0], p[1] - origin[1]);
        let row = nalgebra::Vector3::new(x, y, 1.0);
        ata += wi * row * row.transpose();
        atb -= wi * (x * x + y * y) * row;
    }
    let sol = ata.lu().solve(&atb)?;
    let (cx, cy) = (-0.5 * sol[0], -0.5 * sol[1]);
    let r2 = cx * cx + cy * cy - sol[2];
    (r2 > 0.0 && sol.iter().all(|x| x.is_finite())).then(|| [cx + origin[0], cy + origin[1], r2.sqrt()])
}

fn circle_objective(points: &[&[f64]], w: &[f64], t: &[f64; 3]) -> f64 {
    points
        .iter()
        .zip(w)
        .map(|(p, w)| {
            let r = (p[0] - t[0]).hypot(p[1] - t[1]) - t[2];
            w * r * r
        })
        .sum()
}

pub(super) fn circle_weighted(points: &[&[f64]], w: &[f64]) -> Result<ModelParams> {
    let total: f64 = w.iter().sum();
    let origin = [
        points.iter().zip(w).map(|(p, w)| w * p[0]).sum::<f64>() / total,
        points.iter().zip(w).map(|(p, w)| w * p[1]).sum::<f64>() / total,
    ];
    let mut theta = kasa(points, w, origin).ok_or(Error::DegenerateSample("algebraic circle fit is singular"))?;
    let mut objective = circle_objective(points, w, &theta);

    // Gauss–Newton on the geometric residual with step halving.
    for _ in 0..GN_MAX_ITERS {
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        let mut jtr = nalgebra::Vector3::<f64>::zeros();
        for (p, &wi) in points.iter().zip(w) {
            let (dx, dy) = (p[0] - theta[0], p[1] - theta[1]);
            let dist = dx.hypot(dy);
            if dist == 0.0 {
                continue;
            }
            let r = dist - theta[2];
            let jac = nalgebra::Vector3::new(-dx / dist, -dy / dist, -1.0);
            jtj += wi * jac * jac.transpose();
            jtr += wi * r * jac;
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else {
            break;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [
                theta[0] + scale * step[0],
                theta[1] + scale * step[1],
                theta[2] + scale * step[2],
            ];
            if trial[2] > 0.0 {
                let value = circle_objective(points, w, &trial);
                if value <= objective {
                    theta = trial;
                    objective = value;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        let size = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !accepted || scale * step.norm() < GN_STEP_TOL * size {
            break;
        }
    }
    ModelParams::circle(theta[0], theta[1], theta[2])
}

