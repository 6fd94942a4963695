//! Spectral densities on grids, Stieltjes inversion and tabulated CDFs.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laws::LimitLaw;
use crate::error::{Error, Result};

pub const DEFAULT_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// (position, weight)
    pub atoms: Vec<(f64, f64)>,
    /// mass removed by clipping negative values to zero
    pub clipped_mass: f64,
    /// grid indices where the extrapolation did not settle or G failed
    pub flagged: Vec<usize>,
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = grid[i] - grid[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

impl SpectralDensity {
    pub fn mass(&self) -> f64 {
        let w = trapezoid_weights(&self.grid);
        let cont: f64 = w.iter().zip(&self.values).map(|(a, b)| a * b).sum();
        cont + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Cumulative distribution, with the continuous part renormalised to
    /// the mass not carried by atoms.
    pub fn cdf(&self) -> TabulatedCdf {
        let mut cum = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        for i in 0..self.grid.len() {
            if i > 0 {
                let h = self.grid[i] - self.grid[i - 1];
                acc += 0.5 * h * (self.values[i] + self.values[i - 1]);
            }
            cum.push(acc);
        }
        let atom_mass: f64 = self.atoms.iter().map(|a| a.1).sum();
        let target = (1.0 - atom_mass).max(0.0);
        let raw = acc;
        if raw > 0.0 {
            cum.iter_mut().for_each(|c| *c *= target / raw);
        }
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        TabulatedCdf {
            xs: self.grid.clone(),
            cum,
            atoms,
            mass_defect: raw - target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    pub xs: Vec<f64>,
    pub cum: Vec<f64>,
    pub atoms: Vec<(f64, f64)>,
    /// continuous mass found on the grid minus the mass it should carry
    pub mass_defect: f64,
}

impl TabulatedCdf {
    fn continuous(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 || x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.cum[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (c0, c1) = (self.cum[i - 1], self.cum[i]);
        if x1 == x0 {
            return c1;
        }
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }

    /// F(x) = μ((-∞, x]).
    pub fn eval(&self, x: f64) -> f64 {
        self.continuous(x)
            + self
                .atoms
                .iter()
                .filter(|a| a.0 <= x)
                .map(|a| a.1)
                .sum::<f64>()
    }

    /// F(x-) = μ((-∞, x)).
    pub fn eval_left(&self, x: f64) -> f64 {
        self.continuous(x)
            + self
                .atoms
                .iter()
                .filter(|a| a.0 < x)
                .map(|a| a.1)
                .sum::<f64>()
    }
}

/// -Im G(x + iε)/π over a decreasing ε schedule, extrapolated linearly in
/// ε from the last two values.
pub fn stieltjes_invert<G>(g: G, grid: &[f64], eps: &[f64]) -> Result<SpectralDensity>
where
    G: Fn(C64) -> Result<C64> + Sync,
{
    if eps.len() < 2 || eps.windows(2).any(|w| !(w[1] < w[0])) || eps.iter().any(|e| *e <= 0.0) {
        return Err(Error::InvalidParameter(
            "epsilon schedule must be strictly decreasing, positive, length >= 2".into(),
        ));
    }
    let k = eps.len();
    let point = |x: f64| -> Option<(f64, bool)> {
        let mut f = Vec::with_capacity(k);
        for &e in eps {
            f.push(-g(C64::new(x, e)).ok()?.im / PI);
        }
        let (f1, f2) = (f[k - 2], f[k - 1]);
        let r = eps[k - 1] / eps[k - 2];
        let extrap = (f2 - r * f1) / (1.0 - r);
        let settled = (extrap - f2).abs() <= 0.05 * f2.abs().max(1e-3);
        Some((extrap, settled))
    };
    let results: Vec<Option<(f64, bool)>> = grid.par_iter().map(|&x| point(x)).collect();
    if results.iter().all(|r| r.is_none()) && !grid.is_empty() {
        return Err(Error::domain(
            C64::new(grid[0], eps[k - 1]),
            "Stieltjes evaluation failed on the whole grid",
        ));
    }
    let mut values = Vec::with_capacity(grid.len());
    let mut flagged = Vec::new();
    let mut negative = vec![0.0; grid.len()];
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Some((v, settled)) => {
                if !settled {
                    flagged.push(i);
                }
                if v < 0.0 {
                    negative[i] = -v;
                    values.push(0.0);
                } else {
                    values.push(v);
                }
            }
            None => {
                flagged.push(i);
                values.push(0.0);
            }
        }
    }
    let w = trapezoid_weights(grid);
    let clipped_mass = w.iter().zip(&negative).map(|(a, b)| a * b).sum();
    Ok(SpectralDensity {
        grid: grid.to_vec(),
        values,
        atoms: Vec::new(),
        clipped_mass,
        flagged,
    })
}

/// Grid on [a, b] clustered at the ends, x = c + r sin θ with θ uniform.
pub fn edge_refined_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    (0..points)
        .map(|i| {
            let th = -0.5 * PI + PI * i as f64 / (points - 1) as f64;
            c + r * th.sin()
        })
        .collect()
}

/// Density of a law on an edge-refined grid over its support: closed form
/// where available, Stieltjes inversion otherwise.
pub fn law_density(law: &LimitLaw, points: usize) -> Result<SpectralDensity> {
    let law = law.simplify();
    let atoms = law.atoms();
    let (a, b) = law.support();
    if !(b > a) {
        return Ok(SpectralDensity {
            grid: Vec::new(),
            values: Vec::new(),
            atoms,
            clipped_mass: 0.0,
            flagged: Vec::new(),
        });
    }
    let grid = edge_refined_grid(a, b, points.max(3));
    if law.density(0.5 * (a + b)).is_some() {
        let values = grid
            .iter()
            .map(|&x| law.density(x).unwrap_or(0.0))
            .collect();
        return Ok(SpectralDensity {
            grid,
            values,
            atoms,
            clipped_mass: 0.0,
            flagged: Vec::new(),
        });
    }
    let mut d = stieltjes_invert(|z| law.stieltjes(z), &grid, &DEFAULT_EPS)?;
    d.atoms = atoms;
    Ok(d)
}

/// Tabulated density of a scalar function on an edge-refined grid.
pub fn tabulate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> SpectralDensity {
    let grid = edge_refined_grid(a, b, points.max(3));
    let values = grid.iter().map(|&x| f(x).max(0.0)).collect();
    SpectralDensity {
        grid,
        values,
        atoms: Vec::new(),
        clipped_mass: 0.0,
        flagged: Vec::new(),
    }
}

/// Density of a law on a caller-supplied grid. Square-root laws go through
/// the squared side, f(x) = 2x f_sq(x²).
pub fn density_on_grid(law: &LimitLaw, grid: &[f64]) -> Result<SpectralDensity> {
    let law = law.simplify();
    let atoms = law.atoms();
    if law.density(0.0).is_some() {
        return Ok(SpectralDensity {
            grid: grid.to_vec(),
            values: grid
                .iter()
                .map(|&x| law.density(x).unwrap_or(0.0))
                .collect(),
            atoms,
            clipped_mass: 0.0,
            flagged: Vec::new(),
        });
    }
    if let LimitLaw::SqrtComposite { .. } = law {
        let sq: Vec<f64> = grid.iter().map(|x| x * x).collect();
        let d = stieltjes_invert(|w| law.stieltjes_squared(w), &sq, &DEFAULT_EPS)?;
        let values = grid
            .iter()
            .zip(&d.values)
            .map(|(&x, &f)| if x > 0.0 { 2.0 * x * f } else { 0.0 })
            .collect();
        return Ok(SpectralDensity {
            grid: grid.to_vec(),
            values,
            atoms,
            clipped_mass: d.clipped_mass,
            flagged: d.flagged,
        });
    }
    let mut d = stieltjes_invert(|z| law.stieltjes(z), grid, &DEFAULT_EPS)?;
    d.atoms = atoms;
    Ok(d)
}
