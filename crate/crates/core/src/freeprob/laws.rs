//! Symbolic limit laws with moment, Stieltjes, support and density access.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cumulants::{
    even_part, limit_law_a_moments, limit_law_b_sq_from_sq, mp_moments, point_mass_moments,
    semicircle_moments,
};
use super::dunkl;
use super::transforms::{
    mp_density, mp_edges, mp_g, quartercircle_density, quartercircle_g, quartercircle_moments,
    semicircle_density, semicircle_g, series_g, track, upper, upper_sq,
};
use crate::error::{Error, Result};
use crate::moments::MomentSequence;
use crate::quad::integrate_sqrt_edges;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitLaw {
    PointMass(f64),
    /// (position, weight) pairs with weights summing to 1
    Atoms(Vec<(f64, f64)>),
    Semicircle {
        radius: f64,
    },
    MarchenkoPastur {
        c: f64,
        t: f64,
    },
    /// density sqrt(4 - x^2)/pi on [0, 2]
    Quartercircle,
    /// image of MP(c, t) under the square root
    SqrtMarchenkoPastur {
        c: f64,
        t: f64,
    },
    Moments(MomentSequence),
    Even(Box<LimitLaw>),
    /// image under x ↦ x²
    Square(Box<LimitLaw>),
    /// sc(2 sqrt t) ⊞ μ0
    FreeConvA {
        t: f64,
        mu0: Box<LimitLaw>,
    },
    /// sqrt(MP(ν0, t) ⊞ (sc(2 sqrt t) ⊞ μ0_even)²), carried on the squared side
    SqrtComposite {
        nu0: f64,
        t: f64,
        mu0: Box<LimitLaw>,
    },
    /// Dunkl type B limit at time t from μ0
    DunklB {
        nu0: f64,
        t: f64,
        mu0: Box<LimitLaw>,
    },
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and >= 0, got {v}"
        )))
    }
}

pub fn semicircle(radius: f64) -> Result<LimitLaw> {
    nonneg("radius", radius)?;
    Ok(LimitLaw::Semicircle { radius })
}

pub fn marchenko_pastur(c: f64, t: f64) -> Result<LimitLaw> {
    nonneg("c", c)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "MP scale t must be > 0, got {t}"
        )));
    }
    Ok(LimitLaw::MarchenkoPastur { c, t })
}

/// ½δ_{1/2} + ½δ_2.
pub fn two_atom() -> LimitLaw {
    LimitLaw::Atoms(vec![(0.5, 0.5), (2.0, 0.5)])
}

pub fn limit_law_a(mu0: LimitLaw, t: f64) -> Result<LimitLaw> {
    nonneg("t", t)?;
    Ok(LimitLaw::FreeConvA {
        t,
        mu0: Box::new(mu0),
    })
}

pub fn limit_law_b(mu0: LimitLaw, nu0: f64, t: f64) -> Result<LimitLaw> {
    nonneg("t", t)?;
    nonneg("nu0", nu0)?;
    let (lo, _) = mu0.support();
    if lo < 0.0 {
        return Err(Error::InvalidParameter(
            "type B initial law must live on [0, ∞)".into(),
        ));
    }
    Ok(LimitLaw::SqrtComposite {
        nu0,
        t,
        mu0: Box::new(mu0),
    })
}

pub fn dunkl_b(mu0: LimitLaw, nu0: f64, t: f64) -> Result<LimitLaw> {
    nonneg("t", t)?;
    nonneg("nu0", nu0)?;
    Ok(LimitLaw::DunklB {
        nu0,
        t,
        mu0: Box::new(mu0),
    })
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

impl LimitLaw {
    /// Laws whose odd part is only available through the squared side.
    fn is_sqrt_type(&self) -> bool {
        matches!(
            self,
            LimitLaw::SqrtMarchenkoPastur { .. } | LimitLaw::SqrtComposite { .. }
        )
    }

    /// Rewrites sub-laws that have closed forms.
    pub fn simplify(&self) -> LimitLaw {
        use LimitLaw::*;
        match self {
            Even(inner) => match inner.simplify() {
                PointMass(a) if a == 0.0 => PointMass(0.0),
                PointMass(a) => Atoms(vec![(-a, 0.5), (a, 0.5)]),
                s @ Semicircle { .. } => s,
                Quartercircle => Semicircle { radius: 2.0 },
                Even(x) => Even(x),
                other => Even(Box::new(other)),
            },
            Square(inner) => match inner.simplify() {
                Semicircle { radius } => MarchenkoPastur {
                    c: 1.0,
                    t: radius * radius / 4.0,
                },
                PointMass(a) => PointMass(a * a),
                Quartercircle => MarchenkoPastur { c: 1.0, t: 1.0 },
                SqrtMarchenkoPastur { c, t } => MarchenkoPastur { c, t },
                other => Square(Box::new(other)),
            },
            FreeConvA { t, mu0 } => match (t, mu0.simplify()) {
                (t, m) if *t == 0.0 => m,
                (t, Semicircle { radius }) => Semicircle {
                    radius: (radius * radius + 4.0 * t).sqrt(),
                },
                (t, PointMass(a)) if a == 0.0 => Semicircle {
                    radius: 2.0 * t.sqrt(),
                },
                (t, m) => FreeConvA {
                    t: *t,
                    mu0: Box::new(m),
                },
            },
            SqrtComposite { nu0, t, mu0 } => match mu0.simplify() {
                PointMass(a) if a == 0.0 && *t > 0.0 => SqrtMarchenkoPastur {
                    c: 1.0 + nu0,
                    t: *t,
                },
                m => SqrtComposite {
                    nu0: *nu0,
                    t: *t,
                    mu0: Box::new(m),
                },
            },
            DunklB { nu0, t, mu0 } => {
                if *t == 0.0 {
                    mu0.simplify()
                } else {
                    DunklB {
                        nu0: *nu0,
                        t: *t,
                        mu0: Box::new(mu0.simplify()),
                    }
                }
            }
            other => other.clone(),
        }
    }

    /// Moments m_0..m_L. Square-root laws outside the MP family only carry
    /// their squared side and report a domain error here.
    pub fn moments(&self, order: usize) -> Result<Vec<f64>> {
        use LimitLaw::*;
        Ok(match self {
            PointMass(a) => point_mass_moments(a, order),
            Atoms(atoms) => {
                let mut m = vec![0.0; order + 1];
                for &(x, w) in atoms {
                    let mut p = w;
                    for v in m.iter_mut() {
                        *v += p;
                        p *= x;
                    }
                }
                m
            }
            Semicircle { radius } => semicircle_moments(&(radius * radius / 4.0), order),
            MarchenkoPastur { c, t } => mp_moments(c, t, order),
            Quartercircle => quartercircle_moments(order),
            SqrtMarchenkoPastur { c, t } => {
                let sq = mp_moments(c, t, order / 2);
                let (lo, hi) = mp_edges(*c, *t);
                let (a, b) = (lo.sqrt(), hi.sqrt());
                (0..=order)
                    .map(|l| {
                        if l % 2 == 0 {
                            sq[l / 2]
                        } else {
                            integrate_sqrt_edges(
                                |x| x.powi(l as i32) * sqrt_mp_density(*c, *t, x),
                                a,
                                b,
                                64,
                            )
                        }
                    })
                    .collect()
            }
            Moments(ms) => {
                if ms.values.len() <= order {
                    return Err(Error::InvalidInput(format!(
                        "moment data has order {}, {order} requested",
                        ms.order()
                    )));
                }
                ms.values[..=order].to_vec()
            }
            Even(inner) => {
                if inner.is_sqrt_type() {
                    let sq = inner.squared_moments(order / 2)?;
                    (0..=order)
                        .map(|l| if l % 2 == 0 { sq[l / 2] } else { 0.0 })
                        .collect()
                } else {
                    even_part(&inner.moments(order)?)
                }
            }
            Square(inner) => inner.squared_moments(order)?,
            FreeConvA { t, mu0 } => limit_law_a_moments(&mu0.moments(order)?, t, order),
            SqrtComposite { .. } => {
                return Err(Error::InvalidInput(
                    "odd moments of a square-root composite are not carried; use squared_moments"
                        .into(),
                ))
            }
            DunklB { nu0, t, mu0 } => {
                dunkl::dunkl_moments_series(&mu0.moments(order)?, nu0, t, order)
            }
        })
    }

    /// Moments of the image under x ↦ x².
    pub fn squared_moments(&self, order: usize) -> Result<Vec<f64>> {
        use LimitLaw::*;
        match self {
            SqrtMarchenkoPastur { c, t } => Ok(mp_moments(c, t, order)),
            SqrtComposite { nu0, t, mu0 } => Ok(limit_law_b_sq_from_sq(
                &mu0.squared_moments(order)?,
                nu0,
                t,
                order,
            )),
            Even(inner) if inner.is_sqrt_type() => inner.squared_moments(order),
            DunklB { nu0, t, mu0 } => Ok(limit_law_b_sq_from_sq(
                &mu0.squared_moments(order)?,
                nu0,
                &(2.0 * t),
                order,
            )),
            _ => {
                let m = self.moments(2 * order)?;
                Ok((0..=order).map(|l| m[2 * l]).collect())
            }
        }
    }

    /// Interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        use LimitLaw::*;
        match self {
            PointMass(a) => (*a, *a),
            Atoms(atoms) => atoms
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
                    (lo.min(x), hi.max(x))
                }),
            Semicircle { radius } => (-radius, *radius),
            MarchenkoPastur { c, t } => {
                let (lo, hi) = mp_edges(*c, *t);
                (if *c < 1.0 { 0.0 } else { lo }, hi)
            }
            Quartercircle => (0.0, 2.0),
            SqrtMarchenkoPastur { c, t } => {
                let (lo, hi) = mp_edges(*c, *t);
                (if *c < 1.0 { 0.0 } else { lo.sqrt() }, hi.sqrt())
            }
            Moments(ms) => {
                let r = ms
                    .values
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(l, v)| v.abs().powf(1.0 / l as f64))
                    .fold(0.0, f64::max);
                (-1.5 * r, 1.5 * r)
            }
            Even(inner) => {
                let (a, b) = inner.support();
                let m = a.abs().max(b.abs());
                (-m, m)
            }
            Square(inner) => square_interval(inner.support()),
            FreeConvA { t, mu0 } => {
                let (a, b) = mu0.support();
                let r = 2.0 * t.sqrt();
                (a - r, b + r)
            }
            SqrtComposite { nu0, t, mu0 } => {
                let (lo, hi) = composite_squared_support(*nu0, *t, mu0);
                (lo.max(0.0).sqrt(), hi.sqrt())
            }
            DunklB { nu0, t, mu0 } => {
                let (_, hi) = composite_squared_support(*nu0, 2.0 * t, mu0);
                let r = hi.sqrt();
                (-r, r)
            }
        }
    }

    /// Point masses of the law.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        use LimitLaw::*;
        match self {
            PointMass(a) => vec![(*a, 1.0)],
            Atoms(a) => merge_atoms(a.clone()),
            MarchenkoPastur { c, .. } | SqrtMarchenkoPastur { c, .. } if *c < 1.0 => {
                vec![(0.0, 1.0 - c)]
            }
            Even(inner) => merge_atoms(
                inner
                    .atoms()
                    .into_iter()
                    .flat_map(|(x, w)| [(x, 0.5 * w), (-x, 0.5 * w)])
                    .collect(),
            ),
            Square(inner) => {
                merge_atoms(inner.atoms().into_iter().map(|(x, w)| (x * x, w)).collect())
            }
            FreeConvA { t, mu0 } if *t == 0.0 => mu0.atoms(),
            DunklB { t, mu0, .. } if *t == 0.0 => mu0.atoms(),
            _ => Vec::new(),
        }
    }

    /// Closed-form density of the absolutely continuous part, if known.
    pub fn density(&self, x: f64) -> Option<f64> {
        use LimitLaw::*;
        match self {
            PointMass(_) | Atoms(_) => Some(0.0),
            Semicircle { radius } => Some(semicircle_density(*radius, x)),
            MarchenkoPastur { c, t } => Some(mp_density(*c, *t, x)),
            Quartercircle => Some(quartercircle_density(x)),
            SqrtMarchenkoPastur { c, t } => Some(sqrt_mp_density(*c, *t, x)),
            Even(inner) => Some(0.5 * (inner.density(x)? + inner.density(-x)?)),
            Square(inner) => {
                if x <= 0.0 {
                    return Some(0.0);
                }
                let r = x.sqrt();
                Some((inner.density(r)? + inner.density(-r)?) / (2.0 * r))
            }
            _ => None,
        }
    }

    /// G(z) = ∫ dμ(x)/(z - x) for Im z != 0.
    pub fn stieltjes(&self, z: C64) -> Result<C64> {
        self.simplify().stieltjes_raw(z)
    }

    /// As [`LimitLaw::stieltjes`] without closed-form rewriting.
    pub fn stieltjes_raw(&self, z: C64) -> Result<C64> {
        use LimitLaw::*;
        upper(z, |z| match self {
            PointMass(a) => Ok(1.0 / (z - a)),
            Atoms(atoms) => Ok(atoms.iter().map(|&(x, w)| w / (z - x)).sum()),
            Semicircle { radius } => Ok(semicircle_g(*radius, z)),
            MarchenkoPastur { c, t } => Ok(mp_g(*c, *t, z)),
            Quartercircle => Ok(quartercircle_g(z)),
            SqrtMarchenkoPastur { c, t } => {
                let (lo, hi) = mp_edges(*c, *t);
                let f = |x: f64| sqrt_mp_density(*c, *t, x);
                let re = integrate_sqrt_edges(|x| (f(x) / (z - x)).re, lo.sqrt(), hi.sqrt(), 64);
                let im = integrate_sqrt_edges(|x| (f(x) / (z - x)).im, lo.sqrt(), hi.sqrt(), 64);
                let atom = if *c < 1.0 {
                    (1.0 - c) / z
                } else {
                    C64::new(0.0, 0.0)
                };
                Ok(C64::new(re, im) + atom)
            }
            Moments(ms) => series_g(&ms.values, z),
            Even(inner) => {
                if inner.is_sqrt_type() {
                    Ok(z * inner.stieltjes_squared_raw(z * z)?)
                } else {
                    Ok(0.5 * (inner.stieltjes_raw(z)? - inner.stieltjes_raw(-z)?))
                }
            }
            Square(inner) => inner.stieltjes_squared_raw(z),
            FreeConvA { t, mu0 } => free_conv_a_g(*t, mu0, z, self.far()),
            SqrtComposite { .. } => Err(Error::domain(
                z,
                "a square-root composite only carries its squared side and even part",
            )),
            DunklB { nu0, t, mu0 } => dunkl::dunkl_limit_stieltjes_raw(mu0, *nu0, *t, z),
        })
    }

    /// Stieltjes transform of the image under x ↦ x².
    pub fn stieltjes_squared(&self, w: C64) -> Result<C64> {
        self.simplify().stieltjes_squared_raw(w)
    }

    pub fn stieltjes_squared_raw(&self, w: C64) -> Result<C64> {
        use LimitLaw::*;
        upper_sq(w, |w| match self {
            PointMass(a) => Ok(1.0 / (w - a * a)),
            Atoms(atoms) => Ok(atoms.iter().map(|&(x, p)| p / (w - x * x)).sum()),
            Semicircle { radius } => Ok(mp_g(1.0, radius * radius / 4.0, w)),
            Quartercircle => Ok(mp_g(1.0, 1.0, w)),
            SqrtMarchenkoPastur { c, t } => Ok(mp_g(*c, *t, w)),
            SqrtComposite { nu0, t, mu0 } => transport_b_g(*nu0, *t, mu0, w, self.far_squared()),
            Even(inner) if inner.is_sqrt_type() => inner.stieltjes_squared_raw(w),
            DunklB { nu0, t, mu0 } => transport_b_g(*nu0, 2.0 * t, mu0, w, self.far_squared()),
            _ => {
                let u = w.sqrt();
                let ge = 0.5 * (self.stieltjes_raw(u)? - self.stieltjes_raw(-u)?);
                Ok(ge / u)
            }
        })
    }

    fn far(&self) -> f64 {
        let (a, b) = self.support();
        20.0 * (1.0 + a.abs().max(b.abs()))
    }

    fn far_squared(&self) -> f64 {
        let (a, b) = self.support();
        let m = a.abs().max(b.abs());
        20.0 * (1.0 + m * m)
    }

    pub fn is_even(&self) -> bool {
        use LimitLaw::*;
        match self {
            PointMass(a) => *a == 0.0,
            Atoms(a) => {
                let m = merge_atoms(a.clone());
                m.iter()
                    .all(|&(x, w)| m.iter().any(|&(y, v)| y == -x && (v - w).abs() <= 1e-15))
            }
            Semicircle { .. } | Even(_) => true,
            Moments(ms) => ms.values.iter().skip(1).step_by(2).all(|v| *v == 0.0),
            FreeConvA { mu0, .. } | DunklB { mu0, .. } => mu0.is_even(),
            _ => false,
        }
    }
}

fn square_interval((a, b): (f64, f64)) -> (f64, f64) {
    if a <= 0.0 && b >= 0.0 {
        (0.0, (a * a).max(b * b))
    } else {
        ((a * a).min(b * b), (a * a).max(b * b))
    }
}

fn composite_squared_support(nu0: f64, t: f64, mu0: &LimitLaw) -> (f64, f64) {
    let (mlo, mhi) = if nu0 > 0.0 {
        mp_edges(nu0, t)
    } else {
        (0.0, 0.0)
    };
    let mlo = if nu0 < 1.0 { 0.0 } else { mlo };
    let (a, b) = mu0.support();
    let m = a.abs().max(b.abs());
    let r = 2.0 * t.sqrt();
    let (slo, shi) = square_interval((-m - r, m + r));
    (mlo + slo, mhi + shi)
}

pub(crate) fn sqrt_mp_density(c: f64, t: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    2.0 * x * mp_density(c, t, x * x)
}

/// G of sc(2 sqrt t) ⊞ μ0 through ω + t G_μ0(ω) = z, G = G_μ0(ω).
fn free_conv_a_g(t: f64, mu0: &LimitLaw, z: C64, far: f64) -> Result<C64> {
    if t == 0.0 {
        return mu0.stieltjes_raw(z);
    }
    if z.im < 0.0 {
        return Ok(free_conv_a_g(t, mu0, z.conj(), far)?.conj());
    }
    let top = C64::new(z.re, far.max(z.im));
    let omega = track(z, far, top - t / top, |w, z| {
        Ok(w + t * mu0.stieltjes_raw(w)? - z)
    })?;
    if omega.im < z.im * (1.0 - 1e-9) {
        return Err(Error::domain(
            z,
            "subordination point left the admissible half-plane",
        ));
    }
    mu0.stieltjes_raw(omega)
}

/// Squared-side G of MP(ν0, t) ⊞ (sc(2 sqrt t) ⊞ μ0_even)² from the
/// characteristics z = (1 + tG0)² z0 + ν0 t (1 + tG0), G = G0/(1 + tG0).
pub(crate) fn transport_b_g(nu0: f64, t: f64, mu0: &LimitLaw, w: C64, far: f64) -> Result<C64> {
    if t == 0.0 {
        return mu0.stieltjes_squared_raw(w);
    }
    upper_sq(w, |w| transport_b_upper(nu0, t, mu0, w, far))
}

fn transport_b_upper(nu0: f64, t: f64, mu0: &LimitLaw, w: C64, far: f64) -> Result<C64> {
    let z_of = |z0: C64| -> Result<(C64, C64)> {
        let g0 = mu0.stieltjes_squared_raw(z0)?;
        let a = 1.0 + t * g0;
        Ok(((a * a) * z0 + nu0 * t * a, g0 / a))
    };
    let top = C64::new(w.re, far.max(w.im));
    let z0 = track(w, far, top - (2.0 + nu0) * t, |z0, w| Ok(z_of(z0)?.0 - w))?;
    let (_, g) = z_of(z0)?;
    Ok(g)
}

/// Parses a law name: `delta0`, `delta:a`, `semicircle:R`, `quartercircle`,
/// `mp:c:t`, `sqrt-mp:c:t`, `two-atom`, or a path to a CSV of moments
/// m_0, m_1, ... (last column of each row).
pub fn parse_law(spec: &str) -> Result<LimitLaw> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("{spec}: missing parameter")))?
            .parse::<f64>()
            .map_err(|e| Error::InvalidInput(format!("{spec}: {e}")))
    };
    match parts[0] {
        "delta0" | "zero" => Ok(LimitLaw::PointMass(0.0)),
        "delta" => Ok(LimitLaw::PointMass(num(1)?)),
        "semicircle" | "sc" => semicircle(if parts.len() > 1 { num(1)? } else { 2.0 }),
        "quartercircle" => Ok(LimitLaw::Quartercircle),
        "mp" => marchenko_pastur(num(1)?, num(2)?),
        "sqrt-mp" => {
            marchenko_pastur(num(1)?, num(2)?)?;
            Ok(LimitLaw::SqrtMarchenkoPastur {
                c: num(1)?,
                t: num(2)?,
            })
        }
        "two-atom" => Ok(two_atom()),
        _ => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::InvalidInput(format!("unknown law {spec:?} ({e})")))?;
            let mut values = Vec::new();
            for line in text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
            {
                let last = line.split(',').next_back().unwrap_or("").trim();
                match last.parse::<f64>() {
                    Ok(v) => values.push(v),
                    Err(_) if values.is_empty() => continue,
                    Err(e) => return Err(Error::InvalidInput(format!("{spec}: {e}"))),
                }
            }
            if values.first() != Some(&1.0) {
                return Err(Error::InvalidInput(format!("{spec}: m_0 must be 1")));
            }
            Ok(LimitLaw::Moments(MomentSequence::new(
                values,
                crate::moments::MomentScaling::A,
                0.0,
            )))
        }
    }
}
