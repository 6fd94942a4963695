//! Exact time-t laws from coincident starts via the tridiagonal
//! beta-Hermite and bidiagonal beta-Laguerre models.

use nalgebra::DMatrix;
use rand_distr::{ChiSquared, Distribution};

use super::RngStream;
use crate::rootsys::sort_descending;

fn chi(df: f64, stream: &mut RngStream) -> f64 {
    ChiSquared::new(df)
        .expect("positive degrees of freedom")
        .sample(&mut stream.rng)
        .sqrt()
}

/// Eigenvalues (descending) with joint density proportional to
/// `prod |l_i - l_j|^beta exp(-sum l_i^2 / 2)`.
pub(crate) fn beta_hermite(n: usize, beta: f64, stream: &mut RngStream) -> Vec<f64> {
    if n == 1 {
        return vec![stream.normal()];
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = stream.normal();
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n - 1 {
        let v = s * chi(beta * (n - 1 - i) as f64, stream);
        m[(i, i + 1)] = v;
        m[(i + 1, i)] = v;
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    sort_descending(&mut ev);
    ev
}

/// Singular values (descending) whose squares have joint density
/// proportional to `prod |l_i - l_j|^beta prod l_i^{a - beta (n-1)/2 - 1} exp(-sum l_i / 2)`.
pub(crate) fn beta_laguerre_singular(
    n: usize,
    beta: f64,
    a: f64,
    stream: &mut RngStream,
) -> Vec<f64> {
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        b[(i, i)] = chi(2.0 * a - beta * i as f64, stream);
    }
    for i in 0..n.saturating_sub(1) {
        b[(i + 1, i)] = chi(beta * (n - 1 - i) as f64, stream);
    }
    let mut sv: Vec<f64> = b.singular_values().iter().copied().collect();
    sort_descending(&mut sv);
    sv
}
