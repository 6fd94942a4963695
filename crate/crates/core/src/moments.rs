//! Limit moment recurrences for the type A, type B (squared side) and
//! Dunkl B systems.
//!
//! Each c_l(t) is built as an exact polynomial in t over a [`Scalar`] field
//! (rationals when the initial moments are rational, `f64` otherwise) and
//! evaluated only at the end.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::harness::EmpiricalMeasure;

pub const DEFAULT_MAX_ORDER: usize = 64;

/// Coefficient field for the moment algebra.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + std::ops::Div<Output = Self>
    + 'static
{
    fn from_int(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Polynomial in t, coefficient k multiplies t^k.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn constant(c: S) -> Self {
        let mut p = Self { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(S::zero);
            let b = other.coeffs.get(k).cloned().unwrap_or_else(S::zero);
            coeffs.push(a + b);
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut p = Self {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        };
        p.trim();
        p
    }

    /// Antiderivative vanishing at t = 0.
    pub fn integrate(&self) -> Self {
        let mut coeffs = vec![S::zero()];
        for (k, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.clone() / S::from_int(k as i64 + 1));
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn eval(&self, t: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t.clone() + c.clone();
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c.to_f64())
    }

    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentScaling {
    /// atoms x/sqrt(N), moments of order l
    A,
    /// atoms x^2/(2N) (the squared side of the type B measures)
    Bsq,
    /// atoms x/sqrt(N) on the whole line
    Dunkl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub scaling: MomentScaling,
    pub t: f64,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>, scaling: MomentScaling, t: f64) -> Self {
        Self { values, scaling, t }
    }

    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn get(&self, l: usize) -> f64 {
        self.values.get(l).copied().unwrap_or(0.0)
    }
}

/// C_n = binom(2n, n)/(n + 1), exact.
pub fn catalan(n: usize) -> BigUint {
    let mut c = BigUint::one();
    // C_{k+1} = C_k * 2(2k+1)/(k+2)
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
    }
    c
}

fn padded<S: Scalar>(c0: &[S], order: usize) -> Vec<S> {
    (0..=order)
        .map(|l| {
            if l == 0 {
                S::one()
            } else {
                c0.get(l).cloned().unwrap_or_else(S::zero)
            }
        })
        .collect()
}

/// c_l(t) = c_l(0) + (l/2) int_0^t sum_{k=0}^{l-2} c_{l-2-k} c_k
pub fn moment_polys_a<S: Scalar>(c0: &[S], order: usize) -> Vec<Poly<S>> {
    let init = padded(c0, order);
    let mut c: Vec<Poly<S>> = Vec::with_capacity(order + 1);
    for l in 0..=order {
        if l < 2 {
            c.push(Poly::constant(init[l].clone()));
            continue;
        }
        let mut sum = Poly::zero();
        for k in 0..=(l - 2) {
            sum = sum.add(&c[l - 2 - k].mul(&c[k]));
        }
        let half_l = S::from_int(l as i64) / S::from_int(2);
        c.push(Poly::constant(init[l].clone()).add(&sum.integrate().scale(&half_l)));
    }
    c
}

/// c_l(t) = c_l(0) + l nu0 int c_{l-1} + l int sum_{k=0}^{l-1} c_{l-1-k} c_k
pub fn moment_polys_b<S: Scalar>(c0sq: &[S], nu0: &S, order: usize) -> Vec<Poly<S>> {
    let init = padded(c0sq, order);
    let mut c: Vec<Poly<S>> = Vec::with_capacity(order + 1);
    c.push(Poly::constant(S::one()));
    for l in 1..=order {
        let mut sum = c[l - 1].scale(nu0);
        for k in 0..l {
            sum = sum.add(&c[l - 1 - k].mul(&c[k]));
        }
        let lf = S::from_int(l as i64);
        c.push(Poly::constant(init[l].clone()).add(&sum.integrate().scale(&lf)));
    }
    c
}

/// Even chain c_{2l} = c_{2l}(0) + 2l int (nu0 c_{2l-2} + sum_h c_{2h} c_{2l-2h-2}),
/// odd chain c_{2l+1} = c_{2l+1}(0) + int (2l nu0 c_{2l-1} + 4 sum_h (l-h) c_{2h} c_{2l-2h-1}).
pub fn moment_polys_dunkl<S: Scalar>(c0: &[S], nu0: &S, order: usize) -> Vec<Poly<S>> {
    let init = padded(c0, order);
    let mut c: Vec<Poly<S>> = vec![Poly::zero(); order + 1];
    c[0] = Poly::constant(S::one());
    if order >= 1 {
        c[1] = Poly::constant(init[1].clone());
    }
    for m in 2..=order {
        let l = m / 2;
        let lf = S::from_int(l as i64);
        if m % 2 == 0 {
            let mut sum = c[m - 2].scale(nu0);
            for h in 0..l {
                sum = sum.add(&c[2 * h].mul(&c[2 * l - 2 * h - 2]));
            }
            let two_l = S::from_int(2 * l as i64);
            c[m] = Poly::constant(init[m].clone()).add(&sum.integrate().scale(&two_l));
        } else {
            let mut sum = c[2 * l - 1].scale(&(S::from_int(2) * lf.clone() * nu0.clone()));
            for h in 0..l {
                let w = S::from_int(4 * (l - h) as i64);
                sum = sum.add(&c[2 * h].mul(&c[2 * l - 2 * h - 1]).scale(&w));
            }
            c[m] = Poly::constant(init[m].clone()).add(&sum.integrate());
        }
    }
    c
}

fn evaluate(polys: &[Poly<f64>], t: f64) -> Vec<f64> {
    polys.iter().map(|p| p.eval_f64(t)).collect()
}

pub fn limit_moments_a(c0: &MomentSequence, t: f64, order: usize) -> MomentSequence {
    let polys = moment_polys_a(&c0.values, order);
    MomentSequence::new(evaluate(&polys, t), MomentScaling::A, t)
}

pub fn limit_moments_b(c0sq: &MomentSequence, nu0: f64, t: f64, order: usize) -> MomentSequence {
    let polys = moment_polys_b(&c0sq.values, &nu0, order);
    MomentSequence::new(evaluate(&polys, t), MomentScaling::Bsq, t)
}

pub fn limit_moments_dunkl(c0: &MomentSequence, nu0: f64, t: f64, order: usize) -> MomentSequence {
    let polys = moment_polys_dunkl(&c0.values, &nu0, order);
    MomentSequence::new(evaluate(&polys, t), MomentScaling::Dunkl, t)
}

/// S_l = (1/N) sum atom^l for sqrt(N) measures, and the squared-side
/// moments (1/N) sum atom^{2l} for sqrt(2N) measures.
pub fn empirical_moments(mu: &EmpiricalMeasure, order: usize) -> MomentSequence {
    use crate::harness::Scaling;
    let n = mu.atoms.len() as f64;
    let mut values = vec![0.0; order + 1];
    let squared = mu.scaling == Scaling::SqrtTwoN;
    for &a in &mu.atoms {
        let base = if squared { a * a } else { a };
        let mut p = 1.0;
        for v in values.iter_mut() {
            *v += p;
            p *= base;
        }
    }
    values.iter_mut().for_each(|v| *v /= n);
    let scaling = if squared {
        MomentScaling::Bsq
    } else {
        MomentScaling::A
    };
    MomentSequence::new(values, scaling, f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scaling;

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0), BigUint::from(1u32));
        assert_eq!(catalan(3), BigUint::from(5u32));
        assert_eq!(catalan(10), BigUint::from(16796u32));
    }

    #[test]
    fn delta_start_catalan_moments() {
        let polys = moment_polys_a::<BigRational>(&[BigRational::one()], 8);
        for l in 0..=4 {
            let p = &polys[2 * l];
            assert_eq!(p.degree(), Some(l));
            assert_eq!(
                p.coeff(l),
                BigRational::from_integer(BigInt::from(catalan(l)))
            );
        }
        for l in [1, 3, 5, 7] {
            assert!(polys[l].coeffs.is_empty());
        }
    }

    #[test]
    fn low_order_formulas() {
        let c0 = vec![1.0, 0.3, 0.7, -0.2];
        let a = limit_moments_a(
            &MomentSequence::new(c0.clone(), MomentScaling::A, 0.0),
            1.5,
            3,
        );
        assert!((a.get(2) - (0.7 + 1.5)).abs() < 1e-14);
        assert!((a.get(3) - (-0.2 + 3.0 * 0.3 * 1.5)).abs() < 1e-14);
        let b = limit_moments_b(
            &MomentSequence::new(c0.clone(), MomentScaling::Bsq, 0.0),
            0.4,
            2.0,
            1,
        );
        assert!((b.get(1) - (0.3 + 1.4 * 2.0)).abs() < 1e-14);
        let d = limit_moments_dunkl(
            &MomentSequence::new(c0, MomentScaling::Dunkl, 0.0),
            0.4,
            2.0,
            3,
        );
        assert!((d.get(1) - 0.3).abs() < 1e-15);
        assert!((d.get(2) - (0.7 + 2.0 * 1.4 * 2.0)).abs() < 1e-14);
        assert!((d.get(3) - (-0.2 + (0.8 + 4.0) * 0.3 * 2.0)).abs() < 1e-14);
        let one = limit_moments_b(
            &MomentSequence::new(vec![1.0], MomentScaling::Bsq, 0.0),
            1.0,
            1.0,
            1,
        );
        assert!((one.get(1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn empirical() {
        let mu = EmpiricalMeasure::new(vec![1.0, -1.0], Scaling::SqrtN);
        assert_eq!(empirical_moments(&mu, 2).values, vec![1.0, 0.0, 1.0]);
        let mu = EmpiricalMeasure::new(vec![0.5], Scaling::SqrtN);
        assert_eq!(
            empirical_moments(&mu, 3).values,
            vec![1.0, 0.5, 0.25, 0.125]
        );
    }
}
