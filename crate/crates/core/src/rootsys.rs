//! Weyl chambers of type A and B, the canonical projections onto them and
//! the three reflection kinds that drive Dunkl jumps.
//!
//! Indices in [`Reflection`] are zero-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chamber {
    /// x_1 >= ... >= x_N
    A,
    /// x_1 >= ... >= x_N >= 0
    B,
    /// all of R^N, used by Dunkl processes
    FullSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChamberPoint {
    coords: Vec<f64>,
    chamber: Chamber,
}

impl ChamberPoint {
    /// Wraps coordinates that already satisfy the chamber constraint.
    pub fn new(coords: Vec<f64>, chamber: Chamber) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty configuration".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        let ordered = coords.windows(2).all(|w| w[0] >= w[1]);
        let ok = match chamber {
            Chamber::A => ordered,
            Chamber::B => ordered && *coords.last().unwrap() >= 0.0,
            Chamber::FullSpace => true,
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "coordinates are not in the closed chamber {chamber:?}"
            )));
        }
        Ok(Self { coords, chamber })
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>, chamber: Chamber) -> Self {
        Self { coords, chamber }
    }

    pub fn zero(n: usize, chamber: Chamber) -> Self {
        Self {
            coords: vec![0.0; n.max(1)],
            chamber,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn chamber(&self) -> Chamber {
        self.chamber
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Dilation by a nonnegative factor (keeps the chamber).
    pub fn scaled(&self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0);
        Self {
            coords: self.coords.iter().map(|v| v * factor).collect(),
            chamber: self.chamber,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reflection {
    SignFlip(usize),
    Swap(usize, usize),
    SignSwap(usize, usize),
}

impl Reflection {
    fn check(&self, n: usize) -> Result<()> {
        let bad = |index| Err(Error::IndexOutOfRange { index, n });
        match *self {
            Reflection::SignFlip(i) => {
                if i >= n {
                    return bad(i);
                }
            }
            Reflection::Swap(i, j) | Reflection::SignSwap(i, j) => {
                if i >= n {
                    return bad(i);
                }
                if j >= n {
                    return bad(j);
                }
                if i == j {
                    return Err(Error::InvalidInput(format!(
                        "pair reflection needs distinct indices, got ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// In-place action on a raw coordinate slice.
    pub fn apply_in_place(&self, x: &mut [f64]) {
        match *self {
            Reflection::SignFlip(i) => x[i] = -x[i],
            Reflection::Swap(i, j) => x.swap(i, j),
            Reflection::SignSwap(i, j) => {
                let (a, b) = (x[i], x[j]);
                x[i] = -b;
                x[j] = -a;
            }
        }
    }
}

/// Canonical projection R^N -> closed chamber.
pub fn project_to_chamber(x: &[f64], chamber: Chamber) -> Result<ChamberPoint> {
    if x.is_empty() {
        return Err(Error::InvalidInput("empty configuration".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let mut coords = x.to_vec();
    match chamber {
        Chamber::A => sort_descending(&mut coords),
        Chamber::B => {
            coords.iter_mut().for_each(|v| *v = v.abs());
            sort_descending(&mut coords);
        }
        Chamber::FullSpace => {}
    }
    Ok(ChamberPoint { coords, chamber })
}

/// Stable descending sort; ties keep their input order.
pub(crate) fn sort_descending(v: &mut [f64]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
}

pub fn apply_reflection(x: &ChamberPoint, r: Reflection) -> Result<ChamberPoint> {
    if x.chamber != Chamber::FullSpace {
        return Err(Error::InvalidInput(
            "reflections act on FullSpace points".into(),
        ));
    }
    r.check(x.n())?;
    let mut coords = x.coords.clone();
    r.apply_in_place(&mut coords);
    Ok(ChamberPoint {
        coords,
        chamber: Chamber::FullSpace,
    })
}

/// Distance to the nearest reflecting hyperplane of the chamber's root system.
///
/// Type A uses the differences only; type B and FullSpace add sums and the
/// coordinates themselves. A one-particle type-A point has gap `+inf`.
pub fn regularity_gap(x: &ChamberPoint) -> f64 {
    match x.chamber {
        Chamber::A => min_difference(&x.coords),
        Chamber::B | Chamber::FullSpace => {
            let pair = magnitude_pair_gap(&x.coords);
            let axis = x
                .coords
                .iter()
                .map(|v| v.abs())
                .fold(f64::INFINITY, f64::min);
            pair.min(axis)
        }
    }
}

/// Smallest |x_i - x_j| over pairs.
pub(crate) fn min_difference(x: &[f64]) -> f64 {
    if x.windows(2).all(|w| w[0] >= w[1]) {
        return x
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
    }
    let mut v = x.to_vec();
    sort_descending(&mut v);
    min_difference(&v)
}

/// Smallest min(|x_i - x_j|, |x_i + x_j|) = ||x_i| - |x_j|| over pairs.
pub(crate) fn magnitude_pair_gap(x: &[f64]) -> f64 {
    let mut m: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    sort_descending(&mut m);
    m.windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min)
}
