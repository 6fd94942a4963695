//! Moment and free-cumulant conversion, free additive convolution and the
//! even/square pushforwards, generic over the coefficient field.

use crate::moments::Scalar;

/// Table of [z^d] M(z)^s, filled diagonal by diagonal (s + d = n).
struct PowerTable<S: Scalar> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> PowerTable<S> {
    fn new(order: usize) -> Self {
        let mut rows = vec![vec![S::zero(); order + 1]; order + 1];
        rows[0][0] = S::one();
        Self { rows }
    }

    /// Fills every entry with s + d = n, s >= 1, from m_0..m_{n-1}.
    fn fill_diagonal(&mut self, m: &[S], n: usize) {
        for s in 1..=n {
            let d = n - s;
            let mut acc = S::zero();
            for j in 0..=d {
                let prev = &self.rows[s - 1][d - j];
                if !prev.is_zero() && !m[j].is_zero() {
                    acc = acc + m[j].clone() * prev.clone();
                }
            }
            self.rows[s][d] = acc;
        }
    }

    fn get(&self, s: usize, d: usize) -> &S {
        &self.rows[s][d]
    }
}

fn check_leading<S: Scalar>(m: &[S]) {
    assert!(
        !m.is_empty() && m[0] == S::one(),
        "moment sequences start with m_0 = 1"
    );
}

/// Free cumulants k_1..k_L (index 0 is unused and set to zero) from
/// moments m_0..m_L, via M(z) = 1 + sum_s k_s z^s M(z)^s.
pub fn moments_to_cumulants<S: Scalar>(m: &[S], order: usize) -> Vec<S> {
    check_leading(m);
    let m: Vec<S> = (0..=order)
        .map(|i| m.get(i).cloned().unwrap_or_else(S::zero))
        .collect();
    let mut table = PowerTable::new(order);
    let mut k = vec![S::zero(); order + 1];
    for n in 1..=order {
        table.fill_diagonal(&m, n);
        let mut acc = m[n].clone();
        for s in 1..n {
            acc = acc - k[s].clone() * table.get(s, n - s).clone();
        }
        k[n] = acc;
    }
    k
}

/// Inverse of [`moments_to_cumulants`]; `k[0]` is ignored.
pub fn cumulants_to_moments<S: Scalar>(k: &[S], order: usize) -> Vec<S> {
    let mut m = vec![S::zero(); order + 1];
    m[0] = S::one();
    let mut table = PowerTable::new(order);
    for n in 1..=order {
        table.fill_diagonal(&m, n);
        let mut acc = S::zero();
        for s in 1..=n {
            if let Some(ks) = k.get(s) {
                if !ks.is_zero() {
                    acc = acc + ks.clone() * table.get(s, n - s).clone();
                }
            }
        }
        m[n] = acc;
    }
    m
}

/// Moments of m1 ⊞ m2 up to `order`.
pub fn free_add<S: Scalar>(m1: &[S], m2: &[S], order: usize) -> Vec<S> {
    let k1 = moments_to_cumulants(m1, order);
    let k2 = moments_to_cumulants(m2, order);
    let k: Vec<S> = k1.into_iter().zip(k2).map(|(a, b)| a + b).collect();
    cumulants_to_moments(&k, order)
}

pub fn even_part<S: Scalar>(m: &[S]) -> Vec<S> {
    m.iter()
        .enumerate()
        .map(|(l, v)| if l % 2 == 0 { v.clone() } else { S::zero() })
        .collect()
}

/// m_l of the image under x ↦ x², needs input order 2L.
pub fn square_pushforward<S: Scalar>(m: &[S], order: usize) -> Vec<S> {
    assert!(
        m.len() > 2 * order,
        "square pushforward needs order 2L input"
    );
    (0..=order).map(|l| m[2 * l].clone()).collect()
}

/// Moments of the symmetric law whose square is the given [0, ∞) law:
/// m_{2l} = msq_l and odd moments vanish.
pub fn sqrt_pushforward_even<S: Scalar>(msq: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(2 * msq.len());
    for (l, v) in msq.iter().enumerate() {
        if l > 0 {
            out.push(S::zero());
        }
        out.push(v.clone());
    }
    out
}

/// Semicircle of variance `var` (radius 2 sqrt(var)).
pub fn semicircle_moments<S: Scalar>(var: &S, order: usize) -> Vec<S> {
    let mut k = vec![S::zero(); order + 1];
    if order >= 2 {
        k[2] = var.clone();
    }
    cumulants_to_moments(&k, order)
}

pub fn mp_cumulants<S: Scalar>(c: &S, t: &S, order: usize) -> Vec<S> {
    let mut k = vec![S::zero(); order + 1];
    let mut p = t.clone();
    for kn in k.iter_mut().skip(1) {
        *kn = c.clone() * p.clone();
        p = p * t.clone();
    }
    k
}

pub fn mp_moments<S: Scalar>(c: &S, t: &S, order: usize) -> Vec<S> {
    cumulants_to_moments(&mp_cumulants(c, t, order), order)
}

pub fn point_mass_moments<S: Scalar>(a: &S, order: usize) -> Vec<S> {
    let mut m = Vec::with_capacity(order + 1);
    let mut p = S::one();
    for _ in 0..=order {
        m.push(p.clone());
        p = p * a.clone();
    }
    m
}

/// Moments of sc(2 sqrt t) ⊞ μ0.
pub fn limit_law_a_moments<S: Scalar>(mu0: &[S], t: &S, order: usize) -> Vec<S> {
    free_add(&semicircle_moments(t, order), mu0, order)
}

/// Squared-side moments of MP(ν0, t) ⊞ (sc(2 sqrt t) ⊞ μ0_even)².
/// `mu0` holds moments of the law on [0, ∞) up to order 2L.
pub fn limit_law_b_sq_moments<S: Scalar>(mu0: &[S], nu0: &S, t: &S, order: usize) -> Vec<S> {
    let even = even_part(mu0);
    let a = free_add(&semicircle_moments(t, 2 * order), &even, 2 * order);
    let sq = square_pushforward(&a, order);
    let mp = mp_moments(nu0, t, order);
    free_add(&mp, &sq, order)
}

/// Same as [`limit_law_b_sq_moments`] with the even part given through its
/// squared-side moments, which avoids half-integer data.
pub fn limit_law_b_sq_from_sq<S: Scalar>(mu0_sq: &[S], nu0: &S, t: &S, order: usize) -> Vec<S> {
    let even = sqrt_pushforward_even(mu0_sq);
    limit_law_b_sq_moments(&even, nu0, t, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::ratio;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    fn q(p: i64) -> BigRational {
        ratio(p, 1)
    }

    #[test]
    fn semicircle_cumulants() {
        let m = semicircle_moments(&q(1), 8);
        assert_eq!(m[2], q(1));
        assert_eq!(m[4], q(2));
        assert_eq!(m[8], q(14));
        let k = moments_to_cumulants(&m, 8);
        for (n, kn) in k.iter().enumerate() {
            assert_eq!(*kn, if n == 2 { q(1) } else { BigRational::zero() });
        }
    }

    #[test]
    fn point_mass_cumulants() {
        let a = ratio(3, 2);
        let k = moments_to_cumulants(&point_mass_moments(&a, 6), 6);
        assert_eq!(k[1], a);
        assert!(k[2..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn mp_low_moments() {
        let (c, t) = (ratio(2, 3), ratio(5, 4));
        let m = mp_moments(&c, &t, 3);
        assert_eq!(m[1], c.clone() * t.clone());
        assert_eq!(
            m[2],
            c.clone() * t.clone() * t.clone() + c.clone() * c.clone() * t.clone() * t.clone()
        );
    }

    #[test]
    fn round_trip() {
        let m: Vec<BigRational> = vec![q(1), ratio(1, 3), ratio(2, 5), ratio(-1, 7), q(2)];
        let k = moments_to_cumulants(&m, 4);
        assert_eq!(cumulants_to_moments(&k, 4), m);
        assert_eq!(
            free_add(&m, &point_mass_moments(&BigRational::zero(), 4), 4),
            m
        );
        assert!(k[0].is_zero() && m[0].is_one());
    }
}
