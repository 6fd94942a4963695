//! Frozen (infinite multiplicity) dynamics of types A and B.
//!
//! ```text
//! A:     x_i' = sum_{j != i} 1/(x_i - x_j)
//! B(nu): x_i' = sum_{j != i} 2 x_i/(x_i^2 - x_j^2) + nu/x_i
//! ```
//!
//! Both drifts are homogeneous of degree -1, which gives the self-similar
//! profiles sqrt(2t + c^2) * z and the exact Ornstein–Uhlenbeck space-time
//! transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri, DopriOptions};
use crate::rootsys::{magnitude_pair_gap, min_difference, Chamber, ChamberPoint};
use crate::zeros::{hermite_zeros, laguerre_zeros, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum System {
    A,
    B { nu: f64 },
}

impl System {
    pub fn chamber(&self) -> Chamber {
        match self {
            System::A => Chamber::A,
            System::B { .. } => Chamber::B,
        }
    }
}

/// Type-A drift on raw coordinates, one sweep over unordered pairs.
pub fn drift_a_raw(x: &[f64], out: &mut [f64]) -> Result<()> {
    out.iter_mut().for_each(|v| *v = 0.0);
    let n = x.len();
    for i in 0..n {
        let xi = x[i];
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let d = xi - x[j];
            if d == 0.0 {
                return Err(Error::SingularConfiguration(format!(
                    "coincident particles {i} and {j}"
                )));
            }
            let r = 1.0 / d;
            acc += r;
            out[j] -= r;
        }
        out[i] += acc;
    }
    Ok(())
}

/// Type-B drift on raw coordinates of either sign (used on R^N by the
/// Dunkl processes).
pub fn drift_b_raw(x: &[f64], nu: f64, out: &mut [f64]) -> Result<()> {
    let n = x.len();
    for i in 0..n {
        out[i] = if nu != 0.0 {
            if x[i] == 0.0 {
                return Err(Error::SingularConfiguration(format!(
                    "particle {i} on the boundary"
                )));
            }
            nu / x[i]
        } else {
            0.0
        };
    }
    for i in 0..n {
        let xi = x[i];
        let xi2 = xi * xi;
        let mut acc = 0.0;
        for j in (i + 1)..n {
            let xj = x[j];
            let d = xi2 - xj * xj;
            if d == 0.0 {
                return Err(Error::SingularConfiguration(format!("|x_{i}| = |x_{j}|")));
            }
            let r = 2.0 / d;
            acc += r;
            out[j] -= r * xj;
        }
        out[i] += acc * xi;
    }
    Ok(())
}

pub fn drift_a(x: &ChamberPoint) -> Result<Vec<f64>> {
    let mut out = vec![0.0; x.n()];
    drift_a_raw(x.coords(), &mut out)?;
    Ok(out)
}

pub fn drift_b(x: &ChamberPoint, nu: f64) -> Result<Vec<f64>> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nu must be >= 0, got {nu}"
        )));
    }
    let mut out = vec![0.0; x.n()];
    drift_b_raw(x.coords(), nu, &mut out)?;
    Ok(out)
}

/// Distance to the hyperplanes that actually carry a singular drift term.
pub(crate) fn effective_gap(system: System, x: &[f64]) -> f64 {
    match system {
        System::A => min_difference(x),
        System::B { nu } => {
            let pair = magnitude_pair_gap(x);
            if nu > 0.0 {
                pair.min(x.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
            } else {
                pair
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FrozenOptions {
    pub rtol: f64,
    pub atol: f64,
    /// step cap dt <= safety * gap^2
    pub safety: f64,
    /// bootstrap time for boundary or coincident starts
    pub delta: f64,
    pub h_min: f64,
}

impl Default for FrozenOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-12,
            safety: 0.1,
            delta: 1e-8,
            h_min: 1e-16,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub accepted: usize,
    pub rejected: usize,
    pub min_gap: f64,
    /// bootstrap time used (0 when the start was interior)
    pub bootstrap_delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrozenTrajectory {
    pub chamber: Chamber,
    pub times: Vec<f64>,
    pub states: Vec<ChamberPoint>,
    pub diagnostics: SolverDiagnostics,
}

/// Start for boundary/coincident data: returns the state at time `delta`
/// (clusters split by the local zero pattern scaled by sqrt(2 delta)), or
/// `None` when x0 is already interior.
pub(crate) fn bootstrap(system: System, x0: &[f64], delta: f64) -> Result<Option<Vec<f64>>> {
    let n = x0.len();
    let scale = x0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tie = 4.0 * f64::EPSILON * scale;
    let mut x: Vec<f64> = x0.to_vec();
    let mut changed = false;
    let s = (2.0 * delta).sqrt();
    let mut i = 0;
    match system {
        System::A => {
            while i < n {
                let mut j = i + 1;
                while j < n && (x0[j - 1] - x0[j]).abs() <= tie {
                    j += 1;
                }
                let m = j - i;
                if m > 1 {
                    changed = true;
                    let centre = x0[i..j].iter().sum::<f64>() / m as f64;
                    let z = hermite_zeros(m, DEFAULT_TOL)?.zeros;
                    for (k, zk) in z.iter().enumerate() {
                        x[i + k] = centre + s * zk;
                    }
                }
                i = j;
            }
        }
        System::B { nu } => {
            // coordinates on the boundary x = 0 form the last cluster
            let zero_from = x0.iter().position(|v| v.abs() <= tie).unwrap_or(n);
            while i < zero_from {
                let mut j = i + 1;
                while j < zero_from && (x0[j - 1] - x0[j]).abs() <= tie {
                    j += 1;
                }
                let m = j - i;
                if m > 1 {
                    changed = true;
                    let centre = x0[i..j].iter().sum::<f64>() / m as f64;
                    let z = hermite_zeros(m, DEFAULT_TOL)?.zeros;
                    for (k, zk) in z.iter().enumerate() {
                        x[i + k] = centre + s * zk;
                    }
                }
                i = j;
            }
            let m = n - zero_from;
            if m > 0 && (nu > 0.0 || m > 1) {
                changed = true;
                // with nu = 0 the axis is not singular; the nu = 1/2 pattern
                // (mirror-symmetric type A) is used to separate the cluster
                let nu_eff = if nu > 0.0 { nu } else { 0.5 };
                let z = laguerre_zeros(m, nu_eff, DEFAULT_TOL)?.zeros;
                for (k, zk) in z.iter().enumerate() {
                    x[zero_from + k] = s * zk.sqrt();
                }
            }
        }
    }
    Ok(if changed { Some(x) } else { None })
}

pub fn solve_frozen(
    system: System,
    x0: &ChamberPoint,
    t_grid: &[f64],
    opts: &FrozenOptions,
) -> Result<FrozenTrajectory> {
    if let System::B { nu } = system {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nu must be >= 0, got {nu}"
            )));
        }
    }
    if x0.chamber() != system.chamber() {
        return Err(Error::InvalidInput(format!(
            "start lies in chamber {:?}, system needs {:?}",
            x0.chamber(),
            system.chamber()
        )));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "t_grid must be nondecreasing and nonnegative".into(),
        ));
    }
    let chamber = system.chamber();
    let n = x0.n();
    let x0c = x0.coords().to_vec();
    let centre = x0c.iter().sum::<f64>() / n as f64;
    let scale = x0c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let all_equal = x0c
        .iter()
        .all(|v| (v - centre).abs() <= 4.0 * f64::EPSILON * scale);
    let start = bootstrap(system, &x0c, opts.delta)?;
    let mut diag = SolverDiagnostics {
        min_gap: effective_gap(system, &x0c),
        ..Default::default()
    };

    // exact profile for fully coincident starts of type A and zero starts
    // of type B
    let exact_profile: Option<Box<dyn Fn(f64) -> Vec<f64>>> = match system {
        System::A if all_equal && n > 1 => {
            let z = hermite_zeros(n, DEFAULT_TOL)?.zeros;
            let c = centre;
            Some(Box::new(move |t: f64| {
                let s = (2.0 * t).sqrt();
                z.iter().map(|v| c + s * v).collect()
            }))
        }
        System::B { nu } if nu > 0.0 && x0c.iter().all(|v| *v == 0.0) => {
            let z = laguerre_zeros(n, nu, DEFAULT_TOL)?.zeros;
            Some(Box::new(move |t: f64| {
                let s = (2.0 * t).sqrt();
                z.iter().map(|v| s * v.sqrt()).collect()
            }))
        }
        _ => None,
    };

    let (mut t, mut y) = match &start {
        Some(xs) => {
            diag.bootstrap_delta = opts.delta;
            match &exact_profile {
                Some(p) => (opts.delta, p(opts.delta)),
                None => (opts.delta, xs.clone()),
            }
        }
        None => (0.0, x0c.clone()),
    };

    let mut solver = Dopri::new(
        n,
        DopriOptions {
            rtol: opts.rtol,
            atol: opts.atol,
            h_min: opts.h_min,
            ..Default::default()
        },
    );
    let mut rhs = |_t: f64, x: &[f64], dx: &mut [f64]| match system {
        System::A => drift_a_raw(x, dx),
        System::B { nu } => drift_b_raw(x, nu, dx),
    };
    let safety = opts.safety;
    let cap = |x: &[f64]| {
        let g = effective_gap(system, x);
        if g.is_finite() {
            safety * g * g
        } else {
            f64::INFINITY
        }
    };
    let admissible = |x: &[f64]| {
        let ordered = x.windows(2).all(|w| w[0] > w[1]);
        match system {
            System::A => ordered,
            System::B { nu } => {
                ordered && (*x.last().unwrap() > 0.0 || nu == 0.0 && *x.last().unwrap() >= 0.0)
            }
        }
    };

    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    for &tg in t_grid {
        if tg == 0.0 {
            times.push(0.0);
            states.push(x0.clone());
            continue;
        }
        if tg <= t {
            // inside the bootstrap window
            let coords = match (&exact_profile, &start) {
                (Some(p), _) => p(tg),
                (None, Some(_)) => bootstrap(system, &x0c, tg)?.unwrap_or_else(|| x0c.clone()),
                (None, None) => y.clone(),
            };
            times.push(tg);
            states.push(ChamberPoint::new_unchecked(coords, chamber));
            continue;
        }
        if n == 1 && system == System::A {
            t = tg;
        } else {
            solver.integrate(&mut rhs, t, &mut y, tg, cap, admissible)?;
            t = tg;
            diag.min_gap = diag.min_gap.min(effective_gap(system, &y));
        }
        times.push(tg);
        states.push(ChamberPoint::new_unchecked(y.clone(), chamber));
    }
    diag.accepted = solver.stats.accepted;
    diag.rejected = solver.stats.rejected;
    Ok(FrozenTrajectory {
        chamber,
        times,
        states,
        diagnostics: diag,
    })
}

/// Time change of the degree -1 homogeneous flow under the linear drift
/// -lambda x: phi_lambda(t, x0) = phi((1 - e^{-2 lambda t})/(2 lambda), e^{-lambda t} x0).
pub fn ou_time(lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t
    } else {
        -(-2.0 * lambda * t).exp_m1() / (2.0 * lambda)
    }
}

pub fn ou_transform_frozen(
    system: System,
    x0: &ChamberPoint,
    lambda: f64,
    t: f64,
    opts: &FrozenOptions,
) -> Result<ChamberPoint> {
    if !(t >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(
            "need t >= 0 and finite lambda".into(),
        ));
    }
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let s = ou_time(lambda, t);
    let start = if lambda == 0.0 {
        x0.clone()
    } else {
        x0.scaled((-lambda * t).exp())
    };
    let tr = solve_frozen(system, &start, &[s], opts)?;
    Ok(tr.states.into_iter().next().unwrap())
}
