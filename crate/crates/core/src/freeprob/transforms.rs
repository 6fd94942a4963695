//! Closed-form Stieltjes transforms, moment-series evaluation and the
//! root tracking used by the characteristic solvers.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// G of sc(R) in the cancellation-free form 2/(z + sqrt(z-R) sqrt(z+R)).
pub fn semicircle_g(radius: f64, z: C64) -> C64 {
    if radius == 0.0 {
        return 1.0 / z;
    }
    let s = (z - radius).sqrt() * (z + radius).sqrt();
    2.0 / (z + s)
}

pub fn mp_edges(c: f64, t: f64) -> (f64, f64) {
    let r = c.sqrt();
    (t * (r - 1.0).powi(2), t * (r + 1.0).powi(2))
}

/// G of MP(c, t), including the atom (1 - c) at 0 when c < 1.
pub fn mp_g(c: f64, t: f64, z: C64) -> C64 {
    if t == 0.0 || c == 0.0 {
        return 1.0 / z;
    }
    let (lo, hi) = mp_edges(c, t);
    let s = (z - lo).sqrt() * (z - hi).sqrt();
    let b = z + t - c * t;
    if (b + s).norm() >= (b - s).norm() {
        2.0 / (b + s)
    } else {
        (b - s) / (2.0 * t * z)
    }
}

/// Absolutely continuous MP density (the atom is not included).
pub fn mp_density(c: f64, t: f64, x: f64) -> f64 {
    let (lo, hi) = mp_edges(c, t);
    if x <= lo || x >= hi || x <= 0.0 {
        return 0.0;
    }
    ((hi - x) * (x - lo)).sqrt() / (2.0 * PI * t * x)
}

pub fn semicircle_density(radius: f64, x: f64) -> f64 {
    if x.abs() >= radius {
        return 0.0;
    }
    2.0 / (PI * radius * radius) * (radius * radius - x * x).sqrt()
}

pub fn semicircle_cdf(radius: f64, x: f64) -> f64 {
    if x <= -radius {
        return 0.0;
    }
    if x >= radius {
        return 1.0;
    }
    let r2 = radius * radius;
    0.5 + x * (r2 - x * x).sqrt() / (PI * r2) + (x / radius).asin() / PI
}

pub fn quartercircle_density(x: f64) -> f64 {
    if !(0.0..2.0).contains(&x) {
        return 0.0;
    }
    (4.0 - x * x).sqrt() / PI
}

/// Moments of the density sqrt(4 - x^2)/pi on [0, 2]; odd orders are
/// 2^{2k+2} k! 2^{k+1} / (pi (3 5 ... (2k+3))).
pub fn quartercircle_moments(order: usize) -> Vec<f64> {
    let mut m = vec![0.0; order + 1];
    let mut catalan = 1.0;
    for (l, v) in m.iter_mut().enumerate() {
        if l % 2 == 0 {
            let n = l / 2;
            if n > 0 {
                catalan *= 2.0 * (2.0 * n as f64 - 1.0) / (n as f64 + 1.0);
            }
            *v = catalan;
        } else {
            let k = (l - 1) / 2;
            let mut val = 2f64.powi(3 * k as i32 + 3) / PI;
            for j in 1..=k {
                val *= j as f64;
            }
            for j in 1..=(k + 1) {
                val /= 2.0 * j as f64 + 1.0;
            }
            *v = val;
        }
    }
    m
}

/// G of the quartercircle law; closed form near the support, moment
/// series far away where the closed form cancels.
pub fn quartercircle_g(u: C64) -> C64 {
    if u.norm() > 6.0 {
        if let Ok(g) = series_g(&quartercircle_moments(80), u) {
            return g;
        }
    }
    let s = (4.0 - u * u).sqrt();
    let tp = (2.0 + s) / u;
    let tm = (2.0 - s) / u;
    let int = |a: C64| (1.0 - a).ln() - (-a).ln();
    let j = 2.0 / u * (int(tp) - int(tm)) / (tp - tm);
    2.0 / PI + u / 2.0 + (4.0 - u * u) * j / PI
}

/// sum_l m_l / z^{l+1}; fails when the tail has not decayed.
pub fn series_g(m: &[f64], z: C64) -> Result<C64> {
    let w = 1.0 / z;
    let mut acc = C64::new(0.0, 0.0);
    for v in m.iter().rev() {
        acc = acc * w + v;
    }
    let g = acc * w;
    let l = m.len();
    if l >= 3 {
        let tail = (m[l - 1] * w.powi(l as i32)).norm() + (m[l - 2] * w.powi(l as i32 - 1)).norm();
        if !(tail <= 1e-13 * g.norm()) {
            return Err(Error::domain(z, "moment series has not converged"));
        }
    }
    Ok(g)
}

/// Evaluates in the upper half-plane and reflects, G(conj z) = conj G(z).
pub(crate) fn upper<F: Fn(C64) -> Result<C64>>(z: C64, f: F) -> Result<C64> {
    if z.im == 0.0 {
        return Err(Error::domain(z, "Stieltjes transform needs Im z != 0"));
    }
    if z.im < 0.0 {
        Ok(f(z.conj())?.conj())
    } else {
        f(z)
    }
}

/// `upper` for transforms of measures on [0, inf). The transform is real
/// analytic on the negative axis, so close to it G(x + iy) is taken as
/// Re G(x + i eta) + i y Im G(x + i eta)/eta.
pub(crate) fn upper_sq<F: Fn(C64) -> Result<C64>>(w: C64, f: F) -> Result<C64> {
    let eta = 1e-6 * (1.0 + w.re.abs());
    if w.re < 0.0 && w.im.abs() < eta {
        let g = f(C64::new(w.re, eta))?;
        return Ok(C64::new(g.re, w.im * g.im / eta));
    }
    upper(w, f)
}

fn newton<F: Fn(C64) -> Result<C64>>(f: &F, mut w: C64, tol: f64) -> Option<C64> {
    let mut fw = f(w).ok()?;
    for _ in 0..60 {
        let h = 1e-6 * w.norm().min(w.im.abs()).max(1e-10);
        let d = (f(w + h).ok()? - fw) / h;
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let mut step = fw / d;
        let mut damp = 0;
        loop {
            let cand = w - step;
            if let Ok(fc) = f(cand) {
                if fc.is_finite() && (fc.norm() < fw.norm() || fw.norm() < 1e-300) {
                    w = cand;
                    fw = fc;
                    break;
                }
                if fc.is_finite() && step.norm() <= tol * (1.0 + w.norm()) {
                    return Some(cand);
                }
            }
            damp += 1;
            if damp > 30 {
                return None;
            }
            step *= 0.5;
        }
        if step.norm() <= tol * (1.0 + w.norm()) {
            return Some(w);
        }
    }
    None
}

/// Follows the root of `f(w, z') = 0` as z' descends vertically from
/// Re z + i*far to z; `w_far` is the starting guess at the top.
pub(crate) fn track<F>(z: C64, far: f64, w_far: C64, f: F) -> Result<C64>
where
    F: Fn(C64, C64) -> Result<C64>,
{
    const TOL: f64 = 1e-14;
    let target = z.im;
    let top = far.max(target);
    let at = |y: f64| C64::new(z.re, y);
    let mut y = top;
    let mut w = newton(&|w| f(w, at(y)), w_far, TOL)
        .ok_or_else(|| Error::domain(at(y), "root tracking failed at the starting point"))?;
    let mut prev: Option<(f64, C64)> = None;
    let mut q = 0.3;
    while y > target {
        let d = y - target;
        let mut y_next = target + d * q;
        if y_next - target < 1e-3 * target.max(1e-300) || d * q < 1e-14 {
            y_next = target;
        }
        let guess = match prev {
            Some((yp, wp)) if yp != y => w + (w - wp) * ((y_next - y) / (y - yp)),
            _ => w,
        };
        match newton(&|w| f(w, at(y_next)), guess, TOL) {
            Some(wn) => {
                prev = Some((y, w));
                w = wn;
                y = y_next;
                q = (q * q).max(0.1);
            }
            None => {
                q = q.sqrt();
                if q > 0.999 {
                    return Err(Error::domain(at(y_next), "root tracking lost the branch"));
                }
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_sqrt_edges;

    fn quad_g<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, z: C64) -> C64 {
        let re = integrate_sqrt_edges(|x| (f(x) / (z - x)).re, a, b, 64);
        let im = integrate_sqrt_edges(|x| (f(x) / (z - x)).im, a, b, 64);
        C64::new(re, im)
    }

    #[test]
    fn semicircle_at_2i() {
        let g = semicircle_g(2.0, C64::new(0.0, 2.0));
        assert!((g - C64::new(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for z in [
            C64::new(0.7, 0.3),
            C64::new(-1.5, 0.05),
            C64::new(3.0, -1.0),
            C64::new(2.0, 9.0),
        ] {
            let g = quad_g(|x| semicircle_density(2.5, x), -2.5, 2.5, z);
            assert!((semicircle_g(2.5, z) - g).norm() < 1e-10);
            let g = quad_g(quartercircle_density, 0.0, 2.0, z);
            assert!(
                (quartercircle_g(z) - g).norm() < 1e-9,
                "{z} {} {g}",
                quartercircle_g(z)
            );
            let (lo, hi) = mp_edges(2.0, 0.5);
            let g = quad_g(|x| mp_density(2.0, 0.5, x), lo, hi, z);
            assert!((mp_g(2.0, 0.5, z) - g).norm() < 1e-10);
            let (lo, hi) = mp_edges(0.4, 1.5);
            let g = quad_g(|x| mp_density(0.4, 1.5, x), lo, hi, z) + 0.6 / z;
            assert!((mp_g(0.4, 1.5, z) - g).norm() < 1e-10);
        }
    }

    #[test]
    fn quartercircle_branches_agree() {
        let u = C64::new(5.0, 3.5);
        let m = quartercircle_moments(120);
        let far = series_g(&m, u).unwrap();
        let s = (4.0 - u * u).sqrt();
        let (tp, tm) = ((2.0 + s) / u, (2.0 - s) / u);
        let int = |a: C64| (1.0 - a).ln() - (-a).ln();
        let j = 2.0 / u * (int(tp) - int(tm)) / (tp - tm);
        let near = 2.0 / PI + u / 2.0 + (4.0 - u * u) * j / PI;
        assert!((far - near).norm() < 1e-12);
        assert!((m[1] - 8.0 / (3.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn tracking_semicircle_subordination() {
        // sc(2) ⊞ sc(2) = sc(2 sqrt 2): omega + G_sc2(omega) = z
        let z = C64::new(0.4, 1e-3);
        let w = track(z, 50.0, C64::new(0.4, 50.0), |w, z| {
            Ok(w + semicircle_g(2.0, w) - z)
        })
        .unwrap();
        let g = semicircle_g(2.0, w);
        assert!((g - semicircle_g(2.0 * 2f64.sqrt(), z)).norm() < 1e-12);
    }
}
