//! Drift-implicit Euler step. The drifts of types A and B are negative
//! gradients of energies that are convex on the open chamber, so the step
//!
//! ```text
//! y = argmin |y - g|^2/(2h) + E(y)
//! ```
//!
//! has a unique interior solution for every target `g` and every `h`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::frozen::System;

const MAX_ITER: usize = 60;

fn feasible(system: System, y: &[f64]) -> bool {
    let ordered = y.windows(2).all(|w| w[0] > w[1]);
    match system {
        System::A => ordered,
        System::B { .. } => ordered && *y.last().unwrap() > 0.0,
    }
}

fn objective(system: System, y: &[f64], g: &[f64], h: f64) -> f64 {
    let n = y.len();
    let mut e: f64 = y.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * h);
    for i in 0..n {
        for j in (i + 1)..n {
            e -= (y[i] - y[j]).ln();
            if let System::B { .. } = system {
                e -= (y[i] + y[j]).ln();
            }
        }
    }
    if let System::B { nu } = system {
        if nu > 0.0 {
            e -= nu * y.iter().map(|v| v.ln()).sum::<f64>();
        }
    }
    e
}

fn grad_hess(system: System, y: &[f64], g: &[f64], h: f64) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.len();
    let mut gr = DVector::from_fn(n, |i, _| (y[i] - g[i]) / h);
    let mut hs = DMatrix::from_diagonal_element(n, n, 1.0 / h);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = 1.0 / (y[i] - y[j]);
            gr[i] -= r;
            gr[j] += r;
            let w = r * r;
            hs[(i, i)] += w;
            hs[(j, j)] += w;
            hs[(i, j)] -= w;
            hs[(j, i)] -= w;
            if let System::B { .. } = system {
                let r = 1.0 / (y[i] + y[j]);
                gr[i] -= r;
                gr[j] -= r;
                let w = r * r;
                hs[(i, i)] += w;
                hs[(j, j)] += w;
                hs[(i, j)] += w;
                hs[(j, i)] += w;
            }
        }
    }
    if let System::B { nu } = system {
        if nu > 0.0 {
            for i in 0..n {
                gr[i] -= nu / y[i];
                hs[(i, i)] += nu / (y[i] * y[i]);
            }
        }
    }
    (gr, hs)
}

/// Solves the implicit step from the interior point `start` towards the
/// target `g`.
pub(crate) fn implicit_step(system: System, start: &[f64], g: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = start.len();
    let mut y = start.to_vec();
    let spacing = match system {
        System::A => (y[0] - y[n - 1]) / (n - 1).max(1) as f64,
        System::B { .. } => y[0] / n as f64,
    };
    let tol = 1e-10 * spacing;
    let (mut gr, mut hs) = grad_hess(system, &y, g, h);
    let mut phi = None;
    for _ in 0..MAX_ITER {
        let chol = hs.cholesky().ok_or_else(|| {
            Error::SingularConfiguration("implicit step lost positive definiteness".into())
        })?;
        let step = chol.solve(&(-&gr));
        if step.amax() <= tol {
            let last: Vec<f64> = (0..n).map(|i| y[i] + step[i]).collect();
            return Ok(if feasible(system, &last) { last } else { y });
        }
        let slope = gr.dot(&step);
        let mut alpha = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..n).map(|i| y[i] + alpha * step[i]).collect();
            if feasible(system, &trial) {
                let (g2, h2) = grad_hess(system, &trial, g, h);
                // near the solution the objective is dominated by rounding,
                // so a full step that shrinks the gradient is accepted as is
                if alpha == 1.0 && g2.amax() < gr.amax() {
                    next = Some((trial, None, g2, h2));
                    break;
                }
                let p0 = *phi.get_or_insert_with(|| objective(system, &y, g, h));
                let p = objective(system, &trial, g, h);
                if p <= p0 + 1e-4 * alpha * slope {
                    next = Some((trial, Some(p), g2, h2));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, p, g2, h2)) = next else {
            break;
        };
        y = trial;
        phi = p;
        gr = g2;
        hs = h2;
    }
    let res = gr.amax() * h;
    if res <= 1e-9 * spacing {
        return Ok(y);
    }
    Err(Error::Convergence {
        iterations: MAX_ITER,
        residual: res,
    })
}
