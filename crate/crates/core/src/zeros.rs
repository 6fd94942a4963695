//! Hermite and Laguerre zeros as equilibria of the electrostatic
//! fixed-point systems
//!
//! ```text
//! Hermite:   z_i = sum_{j != i} 1/(z_i - z_j)
//! Laguerre:  z_i = sum_{j != i} 2 z_i/(z_i - z_j) + nu     (zeros of L_N^(nu-1))
//! ```
//!
//! Both systems are gradients of strictly convex energies on the open
//! chamber, so a damped Newton iteration with a Cholesky solve converges
//! from any interior start.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rootsys::{Chamber, ChamberPoint};

/// Defect tolerance relative to the size of the largest zero.
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Hermite { n: usize },
    Laguerre { n: usize, nu: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroProfile {
    pub family: Family,
    /// strictly decreasing
    pub zeros: Vec<f64>,
    /// max-norm of the fixed-point defect
    pub residual: f64,
}

pub fn hermite_defect(z: &[f64]) -> f64 {
    let n = z.len();
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = 1.0 / (z[i] - z[j]);
            rhs[i] += d;
            rhs[j] -= d;
        }
    }
    z.iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn laguerre_defect(z: &[f64], nu: f64) -> f64 {
    let n = z.len();
    (0..n)
        .map(|i| {
            let s: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 2.0 * z[i] / (z[i] - z[j]))
                .sum();
            (z[i] - s - nu).abs()
        })
        .fold(0.0, f64::max)
}

pub fn hermite_zeros(n: usize, tol: f64) -> Result<ZeroProfile> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let family = Family::Hermite { n };
    if n == 1 {
        return Ok(ZeroProfile {
            family,
            zeros: vec![0.0],
            residual: 0.0,
        });
    }
    let radius = (2.0 * n as f64).sqrt();
    let start: Vec<f64> = (0..n)
        .map(|i| semicircle_quantile(radius, 1.0 - (i as f64 + 0.5) / n as f64))
        .collect();

    let energy = |z: &[f64]| -> f64 {
        let mut e: f64 = z.iter().map(|v| 0.5 * v * v).sum();
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                e -= (z[i] - z[j]).ln();
            }
        }
        e
    };
    let grad_hess = |z: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let n = z.len();
        let mut g = DVector::from_iterator(n, z.iter().copied());
        let mut h = DMatrix::identity(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = 1.0 / (z[i] - z[j]);
                g[i] -= d;
                g[j] += d;
                let w = d * d;
                h[(i, i)] += w;
                h[(j, j)] += w;
                h[(i, j)] -= w;
                h[(j, i)] -= w;
            }
        }
        (g, h)
    };
    let feasible = |z: &[f64]| z.windows(2).all(|w| w[0] > w[1]);

    let tol = tol * radius.max(1.0);
    let mut z = damped_newton(
        start,
        energy,
        grad_hess,
        feasible,
        |z| hermite_defect(z),
        tol,
    )?;
    // enforce the reflection symmetry z_i = -z_{N+1-i}
    for i in 0..n / 2 {
        let s = 0.5 * (z[i] - z[n - 1 - i]);
        z[i] = s;
        z[n - 1 - i] = -s;
    }
    if n % 2 == 1 {
        z[n / 2] = 0.0;
    }
    let residual = hermite_defect(&z);
    if residual > tol {
        return Err(Error::Convergence {
            iterations: MAX_ITER,
            residual,
        });
    }
    Ok(ZeroProfile {
        family,
        zeros: z,
        residual,
    })
}

pub fn laguerre_zeros(n: usize, nu: f64, tol: f64) -> Result<ZeroProfile> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "nu must be positive, got {nu}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let family = Family::Laguerre { n, nu };
    if n == 1 {
        return Ok(ZeroProfile {
            family,
            zeros: vec![nu],
            residual: 0.0,
        });
    }
    // unknowns y = sqrt(z); the energy in y is convex on the B chamber
    let start: Vec<f64> = mp_quantiles(1.0 + nu / n as f64, 0.5, n)
        .into_iter()
        .map(|q| (2.0 * n as f64 * q).sqrt())
        .collect();

    let energy = |y: &[f64]| -> f64 {
        let mut e = 0.0;
        for i in 0..y.len() {
            e += 0.5 * y[i] * y[i] - nu * y[i].ln();
            for j in (i + 1)..y.len() {
                e -= (y[i] * y[i] - y[j] * y[j]).ln();
            }
        }
        e
    };
    let grad_hess = |y: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let n = y.len();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            g[i] = y[i] - nu / y[i];
            h[(i, i)] = 1.0 + nu / (y[i] * y[i]);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (y[i] * y[i], y[j] * y[j]);
                let d = 1.0 / (a - b);
                g[i] -= 2.0 * y[i] * d;
                g[j] += 2.0 * y[j] * d;
                let dd = d * d;
                let diag = 2.0 * (a + b) * dd;
                h[(i, i)] += diag;
                h[(j, j)] += diag;
                let off = -4.0 * y[i] * y[j] * dd;
                h[(i, j)] += off;
                h[(j, i)] += off;
            }
        }
        (g, h)
    };
    let feasible = |y: &[f64]| y.windows(2).all(|w| w[0] > w[1]) && *y.last().unwrap() > 0.0;
    let defect = |y: &[f64]| {
        let z: Vec<f64> = y.iter().map(|v| v * v).collect();
        laguerre_defect(&z, nu)
    };
    let tol = tol * (4.0 * n as f64 + 2.0 * nu).max(1.0);
    let y = damped_newton(start, energy, grad_hess, feasible, defect, tol)?;
    let zeros: Vec<f64> = y.iter().map(|v| v * v).collect();
    let residual = laguerre_defect(&zeros, nu);
    Ok(ZeroProfile {
        family,
        zeros,
        residual,
    })
}

fn damped_newton<E, G, F, D>(
    mut x: Vec<f64>,
    energy: E,
    grad_hess: G,
    feasible: F,
    defect: D,
    tol: f64,
) -> Result<Vec<f64>>
where
    E: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> (DVector<f64>, DMatrix<f64>),
    F: Fn(&[f64]) -> bool,
    D: Fn(&[f64]) -> f64,
{
    let mut res = defect(&x);
    let mut stalled = 0;
    for _ in 0..MAX_ITER {
        if res <= tol * 1e-2 {
            return Ok(x);
        }
        let (g, h) = grad_hess(&x);
        let chol = h.cholesky().ok_or_else(|| Error::Convergence {
            iterations: 0,
            residual: res,
        })?;
        let step = chol.solve(&(-&g));
        let e0 = energy(&x);
        let slope = g.dot(&step);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + alpha * d)
                .collect();
            if feasible(&trial) {
                let e1 = energy(&trial);
                if e1 <= e0 + 1e-4 * alpha * slope
                    || defect(&trial) < 0.5 * res
                    || alpha < 1e-3 && e1.is_finite()
                {
                    accepted = Some(trial);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(trial) = accepted else { break };
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let moved = step.amax() * alpha;
        x = trial;
        let new_res = defect(&x);
        if moved <= 4.0 * f64::EPSILON * scale {
            stalled += 1;
            if stalled >= 3 {
                res = new_res;
                break;
            }
        }
        res = new_res;
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(Error::Convergence {
            iterations: MAX_ITER,
            residual: res,
        })
    }
}

/// Quantile of the semicircle law on [-R, R].
pub fn semicircle_quantile(radius: f64, p: f64) -> f64 {
    let cdf = |x: f64| {
        let u = (x / radius).clamp(-1.0, 1.0);
        0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
    };
    bisect(|x| cdf(x) - p, -radius, radius)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Descending (i - 1/2)/N quantiles of the absolutely continuous part of
/// MP(c, t), c >= 1 (used only as a Newton start).
fn mp_quantiles(c: f64, t: f64, n: usize) -> Vec<f64> {
    let lo = t * (c.sqrt() - 1.0).powi(2);
    let hi = t * (c.sqrt() + 1.0).powi(2);
    let mid = 0.5 * (lo + hi);
    let r = 0.5 * (hi - lo);
    let m = 4000;
    // density in theta after x = mid + r sin(theta), cumulated by trapezoid
    let dens = |th: f64| {
        let x = mid + r * th.sin();
        if x <= 0.0 {
            return 0.0;
        }
        let v = ((hi - x) * (x - lo)).max(0.0).sqrt() / (2.0 * PI * x * t);
        v * r * th.cos()
    };
    let ths: Vec<f64> = (0..=m)
        .map(|k| -0.5 * PI + PI * k as f64 / m as f64)
        .collect();
    let mut cum = vec![0.0; m + 1];
    for k in 1..=m {
        cum[k] = cum[k - 1] + 0.5 * (dens(ths[k - 1]) + dens(ths[k])) * (ths[k] - ths[k - 1]);
    }
    let total = cum[m];
    (0..n)
        .map(|i| {
            let p = (1.0 - (i as f64 + 0.5) / n as f64) * total;
            let k = cum.partition_point(|&v| v < p).clamp(1, m);
            let w = (p - cum[k - 1]) / (cum[k] - cum[k - 1]).max(f64::MIN_POSITIVE);
            let th = ths[k - 1] + w * (ths[k] - ths[k - 1]);
            (mid + r * th.sin()).max(lo.max(1e-12))
        })
        .collect()
}

pub fn profile_solution_a(n: usize, c: f64, t: f64) -> Result<ChamberPoint> {
    if !(t >= 0.0) || !(c >= 0.0) {
        return Err(Error::InvalidParameter("need t >= 0 and c >= 0".into()));
    }
    let z = hermite_zeros(n, DEFAULT_TOL)?;
    let s = (2.0 * t + c * c).sqrt();
    Ok(ChamberPoint::new_unchecked(
        z.zeros.iter().map(|v| s * v).collect(),
        Chamber::A,
    ))
}

pub fn profile_solution_b(n: usize, nu: f64, c: f64, t: f64) -> Result<ChamberPoint> {
    if !(t >= 0.0) || !(c >= 0.0) {
        return Err(Error::InvalidParameter("need t >= 0 and c >= 0".into()));
    }
    let z = laguerre_zeros(n, nu, DEFAULT_TOL)?;
    let s = (2.0 * t + c * c).sqrt();
    Ok(ChamberPoint::new_unchecked(
        z.zeros.iter().map(|v| s * v.sqrt()).collect(),
        Chamber::B,
    ))
}
