//! The Dunkl type B limit: even part from the squared-side composite at
//! time 2t, odd part by composition (ν0 = 0), by characteristics, or as a
//! formal power series for the moments.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::cumulants::limit_law_b_sq_from_sq;
use super::laws::{transport_b_g, LimitLaw};
use super::transforms::{semicircle_g, track, upper};
use crate::error::{Error, Result};
use crate::moments::Scalar;
use crate::ode::{Dopri, DopriOptions};

/// G(t, z) of the Dunkl limit started in μ0.
pub fn dunkl_limit_stieltjes(mu0: &LimitLaw, nu0: f64, t: f64, z: C64) -> Result<C64> {
    if !(nu0 >= 0.0 && t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need nu0, t >= 0, got {nu0}, {t}"
        )));
    }
    dunkl_limit_stieltjes_raw(&mu0.simplify(), nu0, t, z)
}

fn far_of(mu0: &LimitLaw, nu0: f64, t: f64) -> f64 {
    let (_, r) = LimitLaw::DunklB {
        nu0,
        t,
        mu0: Box::new(mu0.clone()),
    }
    .support();
    20.0 * (1.0 + r * r)
}

/// G^even(t, z) = z G̃(2t, z²).
pub fn dunkl_even_g(mu0: &LimitLaw, nu0: f64, t: f64, z: C64) -> Result<C64> {
    Ok(z * transport_b_g(nu0, 2.0 * t, mu0, z * z, far_of(mu0, nu0, t))?)
}

pub(crate) fn dunkl_limit_stieltjes_raw(mu0: &LimitLaw, nu0: f64, t: f64, z: C64) -> Result<C64> {
    if t == 0.0 {
        return mu0.stieltjes_raw(z);
    }
    if mu0.is_even() {
        return upper(z, |z| dunkl_even_g(mu0, nu0, t, z));
    }
    if nu0 == 0.0 {
        dunkl_composition_g(mu0, t, z)
    } else {
        dunkl_characteristic_g(mu0, nu0, t, z)
    }
}

/// ν0 = 0: G_μ0(G_{μ_even}^{-1}(G_{sc(2 sqrt(2t)) ⊞ μ_even}(z))).
pub fn dunkl_composition_g(mu0: &LimitLaw, t: f64, z: C64) -> Result<C64> {
    let even = LimitLaw::Even(Box::new(mu0.clone())).simplify();
    let u = match &even {
        LimitLaw::Semicircle { radius } => {
            let r0 = *radius;
            let w = semicircle_g((r0 * r0 + 8.0 * t).sqrt(), z);
            if r0 > 0.0 && w.norm() * r0 / 2.0 >= 1.0 {
                return Err(Error::domain(
                    z,
                    "G of the even part is not invertible at this value",
                ));
            }
            r0 * r0 * w / 4.0 + 1.0 / w
        }
        _ => {
            let far = far_of(mu0, 0.0, t);
            let zz = if z.im > 0.0 { z } else { z.conj() };
            let top = C64::new(zz.re, far.max(zz.im));
            let omega = track(zz, far, top - 2.0 * t / top, |w, z| {
                Ok(w + 2.0 * t * even.stieltjes_raw(w)? - z)
            })?;
            if z.im > 0.0 {
                omega
            } else {
                omega.conj()
            }
        }
    };
    mu0.stieltjes_raw(u)
}

/// Integrates dz/dt = ν0/z + 2g, dg/dt = ν0 g/z² backwards from (z, G^even(t, z))
/// to t = 0, where G^odd is read off at the foot of the characteristic.
pub fn dunkl_characteristic_g(mu0: &LimitLaw, nu0: f64, t: f64, z: C64) -> Result<C64> {
    upper(z, |z| {
        let g_star = dunkl_even_g(mu0, nu0, t, z)?;
        let mut y = [z.re, z.im, g_star.re, g_star.im];
        let mut rhs = |_s: f64, y: &[f64], dy: &mut [f64]| {
            let zc = C64::new(y[0], y[1]);
            let gc = C64::new(y[2], y[3]);
            if zc.norm() == 0.0 {
                return Err(Error::SingularConfiguration(
                    "characteristic reached 0".into(),
                ));
            }
            let dz = nu0 / zc + 2.0 * gc;
            let dg = nu0 * gc / (zc * zc);
            dy[0] = -dz.re;
            dy[1] = -dz.im;
            dy[2] = -dg.re;
            dy[3] = -dg.im;
            Ok(())
        };
        let opts = DopriOptions {
            rtol: 1e-13,
            atol: 1e-15,
            ..Default::default()
        };
        let mut solver = Dopri::new(4, opts);
        solver.integrate(&mut rhs, 0.0, &mut y, t, |_| f64::INFINITY, |y| y[1] > 0.0)?;
        let z0 = C64::new(y[0], y[1]);
        let g0 = C64::new(y[2], y[3]);
        let ge0 = 0.5 * (mu0.stieltjes_raw(z0)? - mu0.stieltjes_raw(-z0)?);
        if (g0 - ge0).norm() > 1e-7 * g0.norm().max(1e-12) {
            return Err(Error::domain(
                z,
                "characteristic does not land on the initial even transform",
            ));
        }
        let godd = 0.5 * (mu0.stieltjes_raw(z0)? + mu0.stieltjes_raw(-z0)?);
        Ok(g_star + godd)
    })
}

/// Density of the Dunkl limit started in the quartercircle law with ν0 = 0.
pub fn quartercircle_dunkl_density(t: f64, x: f64) -> f64 {
    let s2 = 4.0 * (2.0 * t + 1.0);
    if x * x >= s2 {
        return 0.0;
    }
    let r = (s2 - x * x).sqrt();
    let angle = if t == 0.0 {
        0.5 * PI * x.signum()
    } else {
        (x / (2.0 * t)).atan()
    };
    let first = (0.5 + (t + 1.0) / PI * angle) * r / ((2.0 * t + 1.0) * PI);
    if t == 0.0 {
        return first;
    }
    let log = ((2.0 * (t + 1.0) + r) / (2.0 * (t + 1.0) - r)).ln();
    first - t * x / (2.0 * (2.0 * t + 1.0)) * log / (PI * PI)
}

fn mul_trunc<S: Scalar>(a: &[S], b: &[S], deg: usize) -> Vec<S> {
    let mut out = vec![S::zero(); deg + 1];
    for (i, x) in a.iter().enumerate().take(deg + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(deg + 1 - i) {
            if !y.is_zero() {
                out[i + j] = out[i + j].clone() + x.clone() * y.clone();
            }
        }
    }
    out
}

/// sqrt of a series with constant term 1.
fn sqrt_series<S: Scalar>(f: &[S], deg: usize) -> Vec<S> {
    let mut s = vec![S::zero(); deg + 1];
    s[0] = S::one();
    let two = S::from_int(2);
    for n in 1..=deg {
        let mut acc = f.get(n).cloned().unwrap_or_else(S::zero);
        for k in 1..n {
            acc = acc - s[k].clone() * s[n - k].clone();
        }
        s[n] = acc / two.clone();
    }
    s
}

/// f(g(y)) with g(0) = 0.
fn compose<S: Scalar>(f: &[S], g: &[S], deg: usize) -> Vec<S> {
    let mut acc = vec![S::zero(); deg + 1];
    for k in (0..=deg.min(f.len().saturating_sub(1))).rev() {
        acc = mul_trunc(&acc, g, deg);
        acc[0] = acc[0].clone() + f[k].clone();
    }
    acc
}

/// Compositional inverse of φ(v) = v + O(v²).
fn revert<S: Scalar>(phi: &[S], deg: usize) -> Vec<S> {
    let mut id = vec![S::zero(); deg + 1];
    if deg >= 1 {
        id[1] = S::one();
    }
    let mut rho = id.clone();
    for _ in 0..deg {
        let p = compose(phi, &rho, deg);
        rho = (0..=deg)
            .map(|i| id[i].clone() - (p[i].clone() - rho[i].clone()))
            .collect();
    }
    rho
}

/// Moments of the Dunkl limit: even moments from the squared-side law at
/// time 2t, odd moments from the conserved quantity G^e (G^e + ν0/z) along
/// characteristics, inverted as formal power series in 1/z.
pub fn dunkl_moments_series<S: Scalar>(mu0: &[S], nu0: &S, t: &S, order: usize) -> Vec<S> {
    let deg = order + 1;
    let half = deg / 2 + 1;
    let get = |l: usize| mu0.get(l).cloned().unwrap_or_else(S::zero);
    let sq0: Vec<S> = (0..=half).map(|l| get(2 * l)).collect();
    let two_t = S::from_int(2) * t.clone();
    let sq_t = limit_law_b_sq_from_sq(&sq0, nu0, &two_t, half);
    let spread = |sq: &[S]| -> Vec<S> {
        (0..=deg)
            .map(|i| {
                if i % 2 == 0 {
                    sq[i / 2].clone()
                } else {
                    S::zero()
                }
            })
            .collect()
    };
    let e_t = spread(&sq_t);
    let e_0 = spread(&sq0);
    let norm = S::one() / (S::one() + nu0.clone());
    let scaled_root = |e: &[S]| -> Vec<S> {
        let sq = mul_trunc(e, e, deg);
        let a: Vec<S> = (0..=deg)
            .map(|i| (sq[i].clone() + nu0.clone() * e[i].clone()) * norm.clone())
            .collect();
        let r = sqrt_series(&a, deg);
        let mut out = vec![S::zero(); deg + 1];
        for i in 0..deg {
            out[i + 1] = r[i].clone();
        }
        out
    };
    let psi = scaled_root(&e_t);
    let phi = scaled_root(&e_0);
    let v = compose(&revert(&phi, deg), &psi, deg);
    let mut odd0 = vec![S::zero(); deg + 1];
    for l in 0..deg {
        if 2 * l + 2 > deg {
            break;
        }
        odd0[2 * l + 2] = get(2 * l + 1);
    }
    let odd_t = compose(&odd0, &v, deg);
    (0..=order)
        .map(|l| {
            if l % 2 == 0 {
                sq_t[l / 2].clone()
            } else {
                odd_t[l + 1].clone()
            }
        })
        .collect()
}
