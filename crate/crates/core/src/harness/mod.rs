//! Convergence experiments: empirical measures, distances to limit laws,
//! configured sweeps and report writing.

mod experiment;

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeprob::density::{law_density, tabulate, TabulatedCdf};
use crate::freeprob::dunkl::quartercircle_dunkl_density;
use crate::freeprob::laws::LimitLaw;
use crate::freeprob::transforms::semicircle_cdf;
use crate::freeprob::{stieltjes_invert, DEFAULT_EPS};
use crate::moments::empirical_moments;
use crate::rootsys::{project_to_chamber, Chamber, ChamberPoint};

pub use experiment::{
    run_experiment, write_outputs, CellDiagnostics, CellReport, Check, ExperimentConfig,
    ExperimentReport, Manifest, MomentRow, MonotoneCheck, OuModeConfig, StartConfig, SystemKind,
    Threshold,
};

/// Points of the tabulated CDFs used for composite laws.
pub const CDF_POINTS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    SqrtN,
    SqrtTwoN,
}

impl Scaling {
    pub fn factor(self, n: usize) -> f64 {
        match self {
            Scaling::SqrtN => (n as f64).sqrt(),
            Scaling::SqrtTwoN => (2.0 * n as f64).sqrt(),
        }
    }
}

/// N equal-weight atoms, already divided by the scaling factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<f64>,
    pub scaling: Scaling,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<f64>, scaling: Scaling) -> Self {
        Self { atoms, scaling }
    }

    /// Rescales raw particle positions by sqrt(N) or sqrt(2N).
    pub fn from_positions(x: &[f64], scaling: Scaling) -> Self {
        let f = scaling.factor(x.len());
        Self::new(x.iter().map(|v| v / f).collect(), scaling)
    }

    pub fn n(&self) -> usize {
        self.atoms.len()
    }
}

/// Distribution function with left limits.
pub trait Cdf {
    fn eval(&self, x: f64) -> f64;

    fn eval_left(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl Cdf for TabulatedCdf {
    fn eval(&self, x: f64) -> f64 {
        TabulatedCdf::eval(self, x)
    }

    fn eval_left(&self, x: f64) -> f64 {
        TabulatedCdf::eval_left(self, x)
    }
}

/// A continuous CDF given by a closure.
pub struct ContinuousCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> Cdf for ContinuousCdf<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

pub fn quartercircle_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (2.0 * PI)
}

/// CDF of β(1/2, 3/2) on [0, 1].
pub fn beta_half_three_halves_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    2.0 / PI * (x.sqrt().asin() + (x * (1.0 - x)).sqrt())
}

/// CDF of a limit law: closed forms where known, a tabulated CDF otherwise.
/// Square-root laws are tabulated on the squared side.
pub enum LawCdf {
    Semicircle(f64),
    Quartercircle,
    Discrete(Vec<(f64, f64)>),
    Tabulated(TabulatedCdf),
    /// F(x) = F_sq(x²) on x >= 0
    Squared(TabulatedCdf),
}

impl Cdf for LawCdf {
    fn eval(&self, x: f64) -> f64 {
        match self {
            LawCdf::Semicircle(r) => semicircle_cdf(*r, x),
            LawCdf::Quartercircle => quartercircle_cdf(x),
            LawCdf::Discrete(a) => a.iter().filter(|p| p.0 <= x).map(|p| p.1).sum(),
            LawCdf::Tabulated(t) => t.eval(x),
            LawCdf::Squared(t) => {
                if x < 0.0 {
                    0.0
                } else {
                    t.eval(x * x)
                }
            }
        }
    }

    fn eval_left(&self, x: f64) -> f64 {
        match self {
            LawCdf::Discrete(a) => a.iter().filter(|p| p.0 < x).map(|p| p.1).sum(),
            LawCdf::Tabulated(t) => t.eval_left(x),
            LawCdf::Squared(t) => {
                if x <= 0.0 {
                    0.0
                } else {
                    t.eval_left(x * x)
                }
            }
            _ => self.eval(x),
        }
    }
}

fn squared_side_cdf(law: &LimitLaw) -> Result<TabulatedCdf> {
    let (_, hi) = law.support();
    let grid = crate::freeprob::density::edge_refined_grid(0.0, hi * hi, CDF_POINTS);
    let mut d = stieltjes_invert(|w| law.stieltjes_squared(w), &grid, &DEFAULT_EPS)?;
    d.atoms = law.atoms().into_iter().map(|(x, w)| (x * x, w)).collect();
    Ok(d.cdf())
}

pub fn law_cdf(law: &LimitLaw) -> Result<LawCdf> {
    use LimitLaw::*;
    let law = law.simplify();
    Ok(match &law {
        PointMass(a) => LawCdf::Discrete(vec![(*a, 1.0)]),
        Atoms(a) => LawCdf::Discrete(a.clone()),
        Semicircle { radius } => LawCdf::Semicircle(*radius),
        Quartercircle => LawCdf::Quartercircle,
        SqrtComposite { .. } => LawCdf::Squared(squared_side_cdf(&law)?),
        DunklB { nu0, t, mu0 } if *nu0 == 0.0 && **mu0 == Quartercircle => {
            let r = 2.0 * (2.0 * t + 1.0).sqrt();
            LawCdf::Tabulated(
                tabulate(|x| quartercircle_dunkl_density(*t, x), -r, r, CDF_POINTS).cdf(),
            )
        }
        _ => LawCdf::Tabulated(law_density(&law, CDF_POINTS)?.cdf()),
    })
}

/// sup |F_emp - F| over the atoms and their left limits.
pub fn ks_atoms(atoms: &[f64], cdf: &dyn Cdf) -> f64 {
    let mut a = atoms.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < a.len() {
        let mut j = i;
        while j + 1 < a.len() && a[j + 1] == a[i] {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = (j + 1) as f64 / n;
        d = d.max((upto - cdf.eval(a[i])).abs());
        d = d.max((below - cdf.eval_left(a[i])).abs());
        i = j + 1;
    }
    d.clamp(0.0, 1.0)
}

pub fn ks_distance(mu: &EmpiricalMeasure, cdf: &dyn Cdf) -> f64 {
    ks_atoms(&mu.atoms, cdf)
}

/// |S_l - m_l(law)| for l = 0..=order; on the squared side for sqrt(2N)
/// measures.
pub fn moment_distance(mu: &EmpiricalMeasure, law: &LimitLaw, order: usize) -> Result<Vec<f64>> {
    let emp = empirical_moments(mu, order);
    let target = match mu.scaling {
        Scaling::SqrtN => law.moments(order)?,
        Scaling::SqrtTwoN => law.squared_moments(order)?,
    };
    Ok(emp
        .values
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StartProfile {
    Zero,
    Quartercircle,
    Semicircle {
        radius: f64,
    },
    QuantileOf {
        law: LimitLaw,
    },
    /// normalised atoms, one per line (or comma separated)
    File {
        path: PathBuf,
    },
}

impl StartProfile {
    /// The law the initial empirical measures converge to.
    pub fn law(&self) -> Result<LimitLaw> {
        Ok(match self {
            StartProfile::Zero => LimitLaw::PointMass(0.0),
            StartProfile::Quartercircle => LimitLaw::Quartercircle,
            StartProfile::Semicircle { radius } => LimitLaw::Semicircle { radius: *radius },
            StartProfile::QuantileOf { law } => law.clone(),
            StartProfile::File { path } => {
                let v = read_atoms(path)?;
                let w = 1.0 / v.len() as f64;
                LimitLaw::Atoms(v.into_iter().map(|x| (x, w)).collect())
            }
        })
    }
}

fn read_atoms(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut v = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
        {
            v.push(tok.parse::<f64>().map_err(|e| {
                Error::InvalidInput(format!("{}: bad number {tok:?}: {e}", path.display()))
            })?);
        }
    }
    if v.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no atoms", path.display())));
    }
    Ok(v)
}

/// Generalised inverse of a CDF on [lo, hi] by bisection.
pub fn quantile(cdf: &dyn Cdf, p: f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    if a == b {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if cdf.eval(m) < p {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * (1.0 + m.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// N atoms at the (i - 1/2)/N quantiles of the start law, multiplied by the
/// scaling factor and projected onto the chamber.
pub fn starting_profile(
    profile: &StartProfile,
    n: usize,
    scaling: Scaling,
    chamber: Chamber,
) -> Result<ChamberPoint> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let f = scaling.factor(n);
    let atoms: Vec<f64> = match profile {
        StartProfile::Zero => vec![0.0; n],
        StartProfile::File { path } => {
            let v = read_atoms(path)?;
            if v.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} holds {} atoms, N = {n}",
                    path.display(),
                    v.len()
                )));
            }
            v
        }
        _ => {
            let law = profile.law()?;
            let cdf = law_cdf(&law)?;
            let (lo, hi) = law.simplify().support();
            (0..n)
                .map(|i| quantile(&cdf, (i as f64 + 0.5) / n as f64, lo, hi))
                .collect()
        }
    };
    let x: Vec<f64> = atoms.iter().map(|a| a * f).collect();
    project_to_chamber(&x, chamber)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        let n = 100;
        let atoms: Vec<f64> = (0..n)
            .map(|i| {
                quantile(
                    &LawCdf::Semicircle(2.0),
                    (i as f64 + 0.5) / n as f64,
                    -2.0,
                    2.0,
                )
            })
            .collect();
        assert!(ks_atoms(&atoms, &LawCdf::Semicircle(2.0)) <= 0.5 / n as f64 + 1e-12);
        assert_eq!(ks_atoms(&[0.0], &LawCdf::Discrete(vec![(0.0, 1.0)])), 0.0);
        assert_eq!(ks_atoms(&[5.0], &LawCdf::Semicircle(2.0)), 1.0);
    }

    #[test]
    fn quartercircle_start() {
        let x =
            starting_profile(&StartProfile::Quartercircle, 2, Scaling::SqrtN, Chamber::B).unwrap();
        let r = 2f64.sqrt();
        assert!((quartercircle_cdf(x.coords()[0] / r) - 0.75).abs() < 1e-12);
        assert!((quartercircle_cdf(x.coords()[1] / r) - 0.25).abs() < 1e-12);
        let z = starting_profile(&StartProfile::Zero, 5, Scaling::SqrtTwoN, Chamber::B).unwrap();
        assert!(z.coords().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn beta_cdf_endpoints() {
        assert_eq!(beta_half_three_halves_cdf(0.0), 0.0);
        assert!((beta_half_three_halves_cdf(1.0 - 1e-12) - 1.0).abs() < 1e-5);
        // mean 1/4
        let m = crate::quad::integrate(|x| 1.0 - beta_half_three_halves_cdf(x), 0.0, 1.0, 400);
        assert!((m - 0.25).abs() < 1e-6);
    }
}
