//! Monte Carlo integrators for the renormalized Bessel SDEs of types A and
//! B, the Bessel–OU process and the type-B Dunkl jump-diffusion.
//!
//! ```text
//! A:     dX_i = dB_i/sqrt(k)    + sum_{j != i} 1/(X_i - X_j) dt
//! B:     dX_i = dB_i/sqrt(beta) + (sum_{j != i} 2 X_i/(X_i^2 - X_j^2) + nu/X_i) dt
//! OU:    dY_i = dB_i/sqrt(k)    + (sum_{j != i} 1/(Y_i - Y_j) - lambda Y_i) dt
//! ```
//!
//! The Dunkl process adds reflection jumps with rates
//! `nu/(2 x_i^2)` (sign flip), `1/(x_i - x_j)^2` (swap) and
//! `1/(x_i + x_j)^2` (sign swap). At `beta = inf` only the drift and the
//! jumps remain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frozen::{
    bootstrap, drift_a_raw, drift_b_raw, effective_gap, solve_frozen, FrozenOptions,
    FrozenTrajectory, System,
};
use crate::ode::{Dopri, DopriOptions};
use crate::rootsys::{sort_descending, Chamber, ChamberPoint, Reflection};

mod ensembles;
mod implicit;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityA {
    k: f64,
}

impl MultiplicityA {
    /// `k` in [1/2, inf]; `f64::INFINITY` selects the frozen dynamics.
    pub fn new(k: f64) -> Result<Self> {
        if !(k >= 0.5) {
            return Err(Error::InvalidParameter(format!("need k >= 1/2, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn frozen() -> Self {
        Self { k: f64::INFINITY }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_frozen(&self) -> bool {
        self.k.is_infinite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityB {
    nu: f64,
    beta: f64,
}

impl MultiplicityB {
    /// Finite `beta` needs `beta >= 1/2`, `nu > 0` and `nu beta >= 1/2`.
    /// `beta = inf` accepts any `nu >= 0`.
    pub fn new(nu: f64, beta: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite nu >= 0, got {nu}"
            )));
        }
        if !(beta >= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "need beta >= 1/2, got {beta}"
            )));
        }
        if beta.is_finite() && !(nu > 0.0 && nu * beta >= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "need nu > 0 and nu*beta >= 1/2, got nu = {nu}, beta = {beta}"
            )));
        }
        Ok(Self { nu, beta })
    }

    pub fn frozen(nu: f64) -> Result<Self> {
        Self::new(nu, f64::INFINITY)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_frozen(&self) -> bool {
        self.beta.is_infinite()
    }
}

/// ChaCha8 stream keyed by (seed, replica).
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    replica: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(replica);
        Self { seed, replica, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// Position in the key stream, in 32-bit words.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdeOptions {
    /// Largest step.
    pub dt: f64,
    /// Steps are capped by `safety * gap^2 * min(1, k or beta)`.
    pub safety: f64,
    /// Bootstrap time for coincident or boundary starts.
    pub delta: f64,
    pub max_steps: usize,
    /// Recording times; empty means only the final time.
    pub record: Vec<f64>,
    /// Tolerances of the frozen drift integration (beta = inf Dunkl and
    /// delegated frozen runs).
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SdeOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            safety: 0.1,
            delta: 1e-8,
            max_steps: 200_000_000,
            record: Vec::new(),
            rtol: 1e-11,
            atol: 1e-12,
        }
    }
}

impl SdeOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Default::default()
        }
    }

    fn frozen_options(&self) -> FrozenOptions {
        FrozenOptions {
            rtol: self.rtol,
            atol: self.atol,
            delta: self.delta,
            ..Default::default()
        }
    }

    fn grid(&self, t_end: f64) -> Result<Vec<f64>> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite T >= 0, got {t_end}"
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0, got {}",
                self.dt
            )));
        }
        if !(self.safety > 0.0) {
            return Err(Error::InvalidParameter("need safety > 0".into()));
        }
        let grid = if self.record.is_empty() {
            vec![t_end]
        } else {
            self.record.clone()
        };
        if grid.iter().any(|t| !(*t >= 0.0) || *t > t_end) || grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "record times must be nondecreasing and lie in [0, T]".into(),
            ));
        }
        Ok(grid)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SchemeDiagnostics {
    pub steps: usize,
    pub min_gap: f64,
    /// Largest distance outside the chamber before re-projection.
    pub max_violation: f64,
    pub jumps: usize,
    pub substeps: usize,
    /// Steps after which a pair had to be re-separated at the gap floor.
    pub repairs: usize,
    pub implicit_steps: usize,
    pub bootstrap_delta: f64,
}

impl SchemeDiagnostics {
    fn merged(&self, o: &Self) -> Self {
        Self {
            steps: self.steps + o.steps,
            min_gap: self.min_gap.min(o.min_gap),
            max_violation: self.max_violation.max(o.max_violation),
            jumps: self.jumps + o.jumps,
            substeps: self.substeps + o.substeps,
            repairs: self.repairs + o.repairs,
            implicit_steps: self.implicit_steps + o.implicit_steps,
            bootstrap_delta: if self.bootstrap_delta > 0.0 {
                self.bootstrap_delta
            } else {
                o.bootstrap_delta
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<ChamberPoint>,
    pub jumps: Vec<(f64, Reflection)>,
    pub seed: u64,
    pub replica: u64,
    pub diagnostics: SchemeDiagnostics,
}

impl PathSample {
    fn from_frozen(tr: FrozenTrajectory, stream: &RngStream) -> Self {
        Self {
            times: tr.times,
            states: tr.states,
            jumps: Vec::new(),
            seed: stream.seed,
            replica: stream.replica,
            diagnostics: SchemeDiagnostics {
                steps: tr.diagnostics.accepted,
                min_gap: tr.diagnostics.min_gap,
                bootstrap_delta: tr.diagnostics.bootstrap_delta,
                ..Default::default()
            },
        }
    }

    pub fn last(&self) -> &ChamberPoint {
        self.states.last().expect("paths record at least one state")
    }
}

fn check_start(x0: &ChamberPoint, chamber: Chamber) -> Result<()> {
    if x0.chamber() != chamber {
        return Err(Error::InvalidInput(format!(
            "start lies in chamber {:?}, expected {chamber:?}",
            x0.chamber()
        )));
    }
    Ok(())
}

fn drift(system: System, x: &[f64], out: &mut [f64]) -> Result<()> {
    match system {
        System::A => drift_a_raw(x, out),
        System::B { nu } => drift_b_raw(x, nu, out),
    }
}

fn order_violation(x: &[f64]) -> f64 {
    x.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn project(system: System, x: &mut [f64]) -> f64 {
    match system {
        System::A => {
            let v = order_violation(x);
            if v > 0.0 {
                sort_descending(x);
            }
            v
        }
        System::B { .. } => {
            let neg = x.iter().map(|v| -v).fold(0.0, f64::max);
            x.iter_mut().for_each(|v| *v = v.abs());
            let v = order_violation(x);
            if v > 0.0 {
                sort_descending(x);
            }
            neg.max(v)
        }
    }
}

/// Relative separation restored after a step lands (numerically) on a
/// reflecting hyperplane.
const GAP_FLOOR: f64 = 1e-7;

/// Re-separates neighbours closer than `GAP_FLOOR` times the mean spacing;
/// returns the number of repairs.
fn enforce_floor(system: System, x: &mut [f64]) -> usize {
    let n = x.len();
    let spread = match system {
        System::A if n > 1 => (x[0] - x[n - 1]) / (n - 1) as f64,
        System::A => return 0,
        System::B { .. } => x[0] / n as f64,
    };
    let floor = GAP_FLOOR * spread;
    let mut repairs = 0;
    if let System::B { nu } = system {
        if nu > 0.0 && x[n - 1] < floor {
            x[n - 1] = floor;
            repairs += 1;
        }
        for i in (1..n).rev() {
            if x[i - 1] - x[i] < floor {
                x[i - 1] = x[i] + floor;
                repairs += 1;
            }
        }
        return repairs;
    }
    for i in 1..n {
        if x[i - 1] - x[i] < floor {
            x[i] = x[i - 1] - floor;
            repairs += 1;
        }
    }
    repairs
}

fn underflow(t: f64, step: f64, gap: f64, steps: usize) -> Error {
    Error::StepUnderflow {
        t,
        step,
        min_gap: gap,
        accepted: steps,
        rejected: 0,
    }
}

/// Step for the current state and the distance to the next record time.
fn step_size(opts: &SdeOptions, gap: f64, mult: f64, lambda: f64, remaining: f64) -> (f64, bool) {
    let mut h = opts.dt.min(remaining);
    if gap.is_finite() {
        h = h.min(opts.safety * gap * gap * mult.min(1.0));
    }
    if lambda != 0.0 {
        h = h.min(0.1 / lambda.abs());
    }
    let last = h >= remaining * (1.0 - 1e-12);
    (if last { remaining } else { h }, last)
}

/// Compensated running time, so that steps far below ulp(t) still add up.
#[derive(Clone, Copy)]
struct Clock {
    t: f64,
    c: f64,
}

impl Clock {
    fn new(t: f64) -> Self {
        Self { t, c: 0.0 }
    }

    fn remaining(&self, tr: f64) -> f64 {
        (tr - self.t) + self.c
    }

    fn advance(&mut self, h: f64, last: bool, tr: f64) {
        if last {
            *self = Self::new(tr);
            return;
        }
        let y = h - self.c;
        let s = self.t + y;
        self.c = (s - self.t) - y;
        self.t = s;
    }
}

struct EmSpec {
    system: System,
    sigma: f64,
    mult: f64,
    lambda: f64,
}

/// Coincident starts are sampled exactly at this fraction of the first
/// positive record time.
const EXACT_START_FRACTION: f64 = 1e-2;

/// The implicit step takes over once the gap-capped explicit step is this
/// many times smaller than the step allowed by the mean spacing.
const IMPLICIT_RATIO: f64 = 16.0;

fn mean_spacing(system: System, x: &[f64]) -> f64 {
    let n = x.len();
    match system {
        System::A if n > 1 => (x[0] - x[n - 1]) / (n - 1) as f64,
        System::A => f64::INFINITY,
        System::B { .. } => x[0] / n as f64,
    }
}

/// Exact sample at a small positive time for a start with all particles
/// at one point (type A) or at the origin (type B).
fn exact_start(
    spec: &EmSpec,
    x0: &[f64],
    grid: &[f64],
    stream: &mut RngStream,
) -> Option<(f64, Vec<f64>)> {
    let n = x0.len();
    let first = grid.iter().copied().find(|t| *t > 0.0)?;
    let ts = EXACT_START_FRACTION * first;
    // the linear drift is a time change plus a rescaling
    let clock = ou_clock(spec.lambda, ts);
    let shrink = (-spec.lambda * ts).exp();
    let scale = x0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    match spec.system {
        System::A => {
            let c = x0[0];
            if n < 2
                || x0
                    .iter()
                    .any(|v| (v - c).abs() > 4.0 * f64::EPSILON * scale)
            {
                return None;
            }
            let k = spec.mult;
            let ev = ensembles::beta_hermite(n, 2.0 * k, stream);
            let s = (clock / k).sqrt();
            Some((ts, ev.iter().map(|v| shrink * (c + s * v)).collect()))
        }
        System::B { nu } => {
            if x0.iter().any(|v| *v != 0.0) {
                return None;
            }
            let beta = spec.mult;
            let a = nu * beta + 0.5 + beta * (n - 1) as f64;
            let sv = ensembles::beta_laguerre_singular(n, 2.0 * beta, a, stream);
            let s = (clock / beta).sqrt();
            Some((ts, sv.iter().map(|v| shrink * s * v).collect()))
        }
    }
}

struct EmWork {
    d: Vec<f64>,
    g: Vec<f64>,
}

impl EmWork {
    fn new(n: usize) -> Self {
        Self {
            d: vec![0.0; n],
            g: vec![0.0; n],
        }
    }
}

/// One step of at most `rem`, explicit or drift-implicit; returns the step
/// and whether it lands on the record time.
#[allow(clippy::too_many_arguments)]
fn em_step(
    spec: &EmSpec,
    x: &mut Vec<f64>,
    t: f64,
    rem: f64,
    opts: &SdeOptions,
    stream: &mut RngStream,
    work: &mut EmWork,
    diag: &mut SchemeDiagnostics,
) -> Result<(f64, bool)> {
    let system = spec.system;
    let n = x.len();
    let gap = effective_gap(system, x);
    diag.min_gap = diag.min_gap.min(gap);
    let (h_exp, last_exp) = step_size(opts, gap, spec.mult, spec.lambda, rem);
    let (h_bulk, last_bulk) = step_size(opts, mean_spacing(system, x), spec.mult, spec.lambda, rem);
    let implicit = n > 1 && h_exp * IMPLICIT_RATIO < h_bulk;
    let (h, last) = if implicit {
        (h_bulk, last_bulk)
    } else {
        (h_exp, last_exp)
    };
    diag.steps += 1;
    if diag.steps > opts.max_steps || !(h > 0.0) {
        return Err(underflow(t, h, gap, diag.steps));
    }
    let (d, g) = (&mut work.d, &mut work.g);
    drift(system, x, d)?;
    let sq = spec.sigma * h.sqrt();
    for i in 0..n {
        g[i] = x[i] - spec.lambda * x[i] * h + sq * stream.normal();
    }
    if implicit {
        diag.implicit_steps += 1;
        let guess = clipped_guess(system, x, g, d, h);
        *x = implicit::implicit_step(system, &guess, g, h)?;
    } else {
        for i in 0..n {
            x[i] = g[i] + d[i] * h;
        }
        let v = project(system, x);
        diag.repairs += enforce_floor(system, x);
        diag.max_violation = diag.max_violation.max(v);
    }
    Ok((h, last))
}

/// Euler–Maruyama with re-projection onto the chamber; steps where the
/// smallest gap would force a tiny explicit step are taken drift-implicitly.
fn euler_maruyama(
    spec: &EmSpec,
    x0: &ChamberPoint,
    grid: &[f64],
    opts: &SdeOptions,
    stream: &mut RngStream,
) -> Result<PathSample> {
    let system = spec.system;
    let chamber = system.chamber();
    let n = x0.n();
    let mut diag = SchemeDiagnostics::default();
    let (t0, mut x) = match exact_start(spec, x0.coords(), grid, stream) {
        Some(s) => {
            diag.bootstrap_delta = s.0;
            s
        }
        None => match bootstrap(system, x0.coords(), opts.delta)? {
            Some(xs) => {
                diag.bootstrap_delta = opts.delta;
                (opts.delta, xs)
            }
            None => (0.0, x0.coords().to_vec()),
        },
    };
    diag.min_gap = effective_gap(system, &x);
    let mut clock = Clock::new(t0);
    let mut work = EmWork::new(n);
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    for &tr in grid {
        while clock.remaining(tr) > 0.0 {
            let (h, last) = em_step(
                spec,
                &mut x,
                clock.t,
                clock.remaining(tr),
                opts,
                stream,
                &mut work,
                &mut diag,
            )?;
            clock.advance(h, last, tr);
        }
        times.push(tr);
        states.push(if tr == 0.0 {
            x0.clone()
        } else {
            ChamberPoint::new_unchecked(x.clone(), chamber)
        });
    }
    Ok(PathSample {
        times,
        states,
        jumps: Vec::new(),
        seed: stream.seed,
        replica: stream.replica,
        diagnostics: diag,
    })
}

/// Explicit step with each displacement clipped to a quarter of the
/// neighbouring gaps, which keeps the guess interior.
fn clipped_guess(system: System, x: &[f64], g: &[f64], d: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let up = if i > 0 {
                x[i - 1] - x[i]
            } else {
                f64::INFINITY
            };
            let down = if i + 1 < n {
                x[i] - x[i + 1]
            } else if let System::B { .. } = system {
                x[i]
            } else {
                f64::INFINITY
            };
            let m = 0.25 * up.min(down);
            x[i] + (g[i] - x[i] + d[i] * h).clamp(-m, m)
        })
        .collect()
}

pub fn simulate_bessel_a(
    x0: &ChamberPoint,
    k: MultiplicityA,
    t_end: f64,
    opts: &SdeOptions,
    stream: &mut RngStream,
) -> Result<PathSample> {
    check_start(x0, Chamber::A)?;
    let grid = opts.grid(t_end)?;
    if k.is_frozen() {
        let tr = solve_frozen(System::A, x0, &grid, &opts.frozen_options())?;
        return Ok(PathSample::from_frozen(tr, stream));
    }
    let spec = EmSpec {
        system: System::A,
        sigma: 1.0 / k.k.sqrt(),
        mult: k.k,
        lambda: 0.0,
    };
    euler_maruyama(&spec, x0, &grid, opts, stream)
}

pub fn simulate_bessel_b(
    x0: &ChamberPoint,
    m: MultiplicityB,
    t_end: f64,
    opts: &SdeOptions,
    stream: &mut RngStream,
) -> Result<PathSample> {
    check_start(x0, Chamber::B)?;
    let grid = opts.grid(t_end)?;
    let system = System::B { nu: m.nu };
    if m.is_frozen() {
        let tr = solve_frozen(system, x0, &grid, &opts.frozen_options())?;
        return Ok(PathSample::from_frozen(tr, stream));
    }
    let spec = EmSpec {
        system,
        sigma: 1.0 / m.beta.sqrt(),
        mult: m.beta,
        lambda: 0.0,
    };
    euler_maruyama(&spec, x0, &grid, opts, stream)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuMode {
    /// Euler–Maruyama with the linear drift included.
    Direct,
    /// `Y_t = e^{-lambda t} X_{(e^{2 lambda t} - 1)/(2 lambda)}` on a
    /// simulated lambda = 0 path.
    Transform,
}

/// Time at which the lambda = 0 process is sampled by the OU transform.
fn ou_clock(lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t
    } else {
        (2.0 * lambda * t).exp_m1() / (2.0 * lambda)
    }
}

/// Outer length of one segment of the transformed run.
const OU_SEGMENT: f64 = 0.25;

/// Runs the lambda = 0 process on the inner clock in segments. The inner
/// step cap of a segment starting at outer time a is dt * e^{2 lambda a},
/// so the outer resolution stays near dt.
fn ou_transform_sde(
    x0: &ChamberPoint,
    k: MultiplicityA,
    lambda: f64,
    grid: &[f64],
    opts: &SdeOptions,
    stream: &mut RngStream,
) -> Result<PathSample> {
    let mut y = x0.clone();
    let mut a = 0.0;
    let mut states = Vec::with_capacity(grid.len());
    let mut diag: Option<SchemeDiagnostics> = None;
    for &t in grid {
        while a < t {
            let b = (a + OU_SEGMENT).min(t);
            let du = ou_clock(lambda, b) - ou_clock(lambda, a);
            if du > 0.0 {
                let inner = SdeOptions {
                    dt: opts.dt * (2.0 * lambda * a).exp(),
                    record: Vec::new(),
                    ..opts.clone()
                };
                let seg = simulate_bessel_a(&y, k, du, &inner, stream)?;
                y = seg.states.into_iter().last().unwrap();
                diag = Some(match diag {
                    None => seg.diagnostics,
                    Some(d) => d.merged(&seg.diagnostics),
                });
            }
            a = b;
        }
        states.push(y.clone());
    }
    Ok(PathSample {
        times: grid.to_vec(),
        states,
        jumps: Vec::new(),
        seed: stream.seed,
        replica: stream.replica,
        diagnostics: diag.unwrap_or_default(),
    })
}

pub fn simulate_bessel_ou(
    x0: &ChamberPoint,
    k: MultiplicityA,
    lambda: f64,
    t_end: f64,
    mode: OuMode,
    opts: &SdeOptions,
    stream: &mut RngStream,
) -> Result<PathSample> {
    check_start(x0, Chamber::A)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    let grid = opts.grid(t_end)?;
    if k.is_frozen() || mode == OuMode::Transform {
        let inner_times: Vec<f64> = grid.iter().map(|t| ou_clock(lambda, *t)).collect();
        let mut path = if k.is_frozen() {
            let tr = solve_frozen(System::A, x0, &inner_times, &opts.frozen_options())?;
            PathSample::from_frozen(tr, stream)
        } else {
            ou_transform_sde(x0, k, lambda, &grid, opts, stream)?
        };
        path.times = grid.clone();
        for (state, t) in path.states.iter_mut().zip(&grid) {
            if lambda != 0.0 {
                *state = state.scaled((-lambda * t).exp());
            }
        }
        return Ok(path);
    }
    let spec = EmSpec {
        system: System::A,
        sigma: 1.0 / k.k.sqrt(),
        mult: k.k,
        lambda,
    };
    euler_maruyama(&spec, x0, &grid, opts, stream)
}

fn pair_rates(xi: f64, xj: f64) -> (f64, f64) {
    let d = xi - xj;
    let s = xi + xj;
    (1.0 / (d * d), 1.0 / (s * s))
}

/// Jump rates of the Dunkl generator at a FullSpace point, zero rates
/// omitted. Pair reflections carry the sum of both ordered terms.
pub fn dunkl_jump_rates(x: &ChamberPoint, nu: f64) -> Result<Vec<(Reflection, f64)>> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nu must be >= 0, got {nu}"
        )));
    }
    let c = x.coords();
    let n = c.len();
    let mut out = Vec::new();
    for (i, &xi) in c.iter().enumerate() {
        if xi == 0.0 && nu > 0.0 {
            return Err(Error::SingularConfiguration(format!("x_{i} = 0")));
        }
        if nu > 0.0 {
            out.push((Reflection::SignFlip(i), nu / (2.0 * xi * xi)));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if c[i].abs() == c[j].abs() {
                return Err(Error::SingularConfiguration(format!("|x_{i}| = |x_{j}|")));
            }
            let (sw, ss) = pair_rates(c[i], c[j]);
            out.push((Reflection::Swap(i, j), sw));
            out.push((Reflection::SignSwap(i, j), ss));
        }
    }
    Ok(out)
}

/// Rate tables for the thinned jump sampler with O(N) updates per jump.
struct JumpTable {
    n: usize,
    nu: f64,
    skip_swaps: bool,
    flip: Vec<f64>,
    pair: Vec<f64>,
    row: Vec<f64>,
}

impl JumpTable {
    fn new(n: usize, nu: f64, skip_swaps: bool) -> Self {
        Self {
            n,
            nu,
            skip_swaps,
            flip: vec![0.0; n],
            pair: vec![0.0; n * n],
            row: vec![0.0; n],
        }
    }

    fn pair_total(&self, xi: f64, xj: f64) -> f64 {
        let (sw, ss) = pair_rates(xi, xj);
        if self.skip_swaps {
            ss
        } else {
            sw + ss
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        let bad =
            self.flip.iter().any(|r| !r.is_finite()) || self.row.iter().any(|r| !r.is_finite());
        if bad || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularConfiguration(
                "jump rate blew up on a reflecting hyperplane".into(),
            ));
        }
        Ok(())
    }

    fn rebuild(&mut self, x: &[f64]) -> Result<()> {
        let n = self.n;
        self.row.iter_mut().for_each(|r| *r = 0.0);
        for i in 0..n {
            self.flip[i] = if self.nu > 0.0 {
                self.nu / (2.0 * x[i] * x[i])
            } else {
                0.0
            };
            for j in (i + 1)..n {
                let r = self.pair_total(x[i], x[j]);
                self.pair[i * n + j] = r;
                self.pair[j * n + i] = r;
                self.row[i] += r;
                self.row[j] += r;
            }
        }
        self.check(x)
    }

    fn refresh(&mut self, x: &[f64], a: usize) {
        let n = self.n;
        if self.nu > 0.0 {
            self.flip[a] = self.nu / (2.0 * x[a] * x[a]);
        }
        for b in 0..n {
            if b == a {
                continue;
            }
            let r = self.pair_total(x[a], x[b]);
            let delta = r - self.pair[a * n + b];
            self.pair[a * n + b] = r;
            self.pair[b * n + a] = r;
            self.row[a] += delta;
            self.row[b] += delta;
        }
        self.row[a] = self.row[a].max(0.0);
    }

    fn flips(&self) -> f64 {
        self.flip.iter().sum()
    }

    fn pairs(&self) -> f64 {
        0.5 * self.row.iter().sum::<f64>()
    }

    fn pick(weights: &[f64], mut u: f64, skip: Option<usize>) -> usize {
        let mut last = 0;
        for (i, w) in weights.iter().enumerate() {
            if Some(i) == skip || *w <= 0.0 {
                continue;
            }
            last = i;
            if u < *w {
                return i;
            }
            u -= w;
        }
        last
    }

    fn sample(&self, x: &[f64], flips: f64, pairs: f64, stream: &mut RngStream) -> Reflection {
        let u = stream.uniform() * (flips + pairs);
        if u < flips {
            return Reflection::SignFlip(Self::pick(&self.flip, u, None));
        }
        let n = self.n;
        let i = Self::pick(&self.row, stream.uniform() * 2.0 * pairs, None);
        let row = &self.pair[i * n..(i + 1) * n];
        let j = Self::pick(row, stream.uniform() * self.row[i], Some(i));
        let (a, b) = (i.min(j), i.max(j));
        if self.skip_swaps {
            return Reflection::SignSwap(a, b);
        }
        let (sw, ss) = pair_rates(x[a], x[b]);
        if stream.uniform() * (sw + ss) < sw {
            Reflection::Swap(a, b)
        } else {
            Reflection::SignSwap(a, b)
        }
    }

    /// Thinned jumps over [t, t + h] with rates frozen at the current
    /// state between jumps; at most one jump per sub-step and total jump
    /// probability per sub-step at most 0.1.
    fn run(
        &mut self,
        x: &mut [f64],
        t: f64,
        h: f64,
        stream: &mut RngStream,
        log: &mut Vec<(f64, Reflection)>,
        diag: &mut SchemeDiagnostics,
    ) -> Result<()> {
        let max_sub = -(0.9f64).ln();
        self.rebuild(x)?;
        let mut flips = self.flips();
        let mut pairs = self.pairs();
        let mut s = 0.0;
        while s < h {
            let total = flips + pairs;
            if !(total > 0.0) {
                break;
            }
            let dts = (h - s).min(max_sub / total);
            diag.substeps += 1;
            if stream.uniform() < -(-total * dts).exp_m1() {
                let r = self.sample(x, flips, pairs, stream);
                r.apply_in_place(x);
                match r {
                    Reflection::SignFlip(i) => self.refresh(x, i),
                    Reflection::Swap(i, j) | Reflection::SignSwap(i, j) => {
                        self.refresh(x, i);
                        self.refresh(x, j);
                    }
                }
                flips = self.flips();
                pairs = self.pairs();
                log.push((t + s + dts, r));
                diag.jumps += 1;
            }
            s += dts;
        }
        Ok(())
    }
}

/// Start for a Dunkl run: magnitudes that touch a reflecting hyperplane are
/// replaced by their frozen type-B bootstrap at `delta`, signs are kept.
fn dunkl_start(x0: &[f64], nu: f64, delta: f64) -> Result<Option<Vec<f64>>> {
    let n = x0.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x0[b].abs().partial_cmp(&x0[a].abs()).unwrap());
    let mags: Vec<f64> = order.iter().map(|&i| x0[i].abs()).collect();
    // nu = 0 leaves the axis regular but ties at zero are still singular
    let boot = bootstrap(System::B { nu }, &mags, delta)?;
    Ok(boot.map(|m| {
        let mut x = vec![0.0; n];
        for (rank, &i) in order.iter().enumerate() {
            let s = if x0[i] < 0.0 { -1.0 } else { 1.0 };
            x[i] = s * m[rank];
        }
        x
    }))
}

pub fn simulate_dunkl_b(
    x0: &ChamberPoint,
    m: MultiplicityB,
    t_end: f64,
    opts: &SdeOptions,
    stream: &mut RngStream,
    skip_swaps: bool,
) -> Result<PathSample> {
    check_start(x0, Chamber::FullSpace)?;
    let grid = opts.grid(t_end)?;
    let nu = m.nu;
    let system = System::B { nu };
    let n = x0.n();
    let mut diag = SchemeDiagnostics {
        min_gap: effective_gap(system, x0.coords()),
        ..Default::default()
    };
    let (t0, mut x) = match dunkl_start(x0.coords(), nu, opts.delta)? {
        Some(xs) => {
            diag.bootstrap_delta = opts.delta;
            (opts.delta, xs)
        }
        None => (0.0, x0.coords().to_vec()),
    };
    let mut clock = Clock::new(t0);
    let spec = EmSpec {
        system,
        sigma: if m.is_frozen() {
            0.0
        } else {
            1.0 / m.beta.sqrt()
        },
        mult: if m.is_frozen() { 1.0 } else { m.beta },
        lambda: 0.0,
    };
    let mut table = JumpTable::new(n, nu, skip_swaps);
    let mut solver = Dopri::new(
        n,
        DopriOptions {
            rtol: opts.rtol,
            atol: opts.atol,
            ..Default::default()
        },
    );
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| drift_b_raw(y, nu, dy);
    let mut work = EmWork::new(n);
    let mut rank: Vec<usize> = (0..n).collect();
    let mut jumps = Vec::new();
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    for &tr in &grid {
        while clock.remaining(tr) > 0.0 {
            let (h, last) = if m.is_frozen() {
                let gap = effective_gap(system, &x);
                diag.min_gap = diag.min_gap.min(gap);
                let (h, last) = step_size(opts, gap, 1.0, 0.0, clock.remaining(tr));
                diag.steps += 1;
                if diag.steps > opts.max_steps || !(h > 0.0) {
                    return Err(underflow(clock.t, h, gap, diag.steps));
                }
                // the drift is equivariant, so the flow commutes with the
                // jumps and only the magnitudes matter for admissibility
                solver.integrate(
                    &mut rhs,
                    clock.t,
                    &mut x,
                    clock.t + h,
                    |y| {
                        let g = effective_gap(system, y);
                        opts.safety * g * g
                    },
                    |y| effective_gap(system, y) > 1e-3 * gap,
                )?;
                (h, last)
            } else {
                // the magnitudes follow the type B process; signs and
                // labels change only through jumps
                rank.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
                let mut y: Vec<f64> = rank.iter().map(|&i| x[i].abs()).collect();
                let r = em_step(
                    &spec,
                    &mut y,
                    clock.t,
                    clock.remaining(tr),
                    opts,
                    stream,
                    &mut work,
                    &mut diag,
                )?;
                for (r, &i) in rank.iter().enumerate() {
                    x[i] = if x[i] < 0.0 { -y[r] } else { y[r] };
                }
                r
            };
            table.run(&mut x, clock.t, h, stream, &mut jumps, &mut diag)?;
            clock.advance(h, last, tr);
        }
        times.push(tr);
        states.push(if tr == 0.0 {
            x0.clone()
        } else {
            ChamberPoint::new_unchecked(x.clone(), Chamber::FullSpace)
        });
    }
    Ok(PathSample {
        times,
        states,
        jumps,
        seed: stream.seed,
        replica: stream.replica,
        diagnostics: diag,
    })
}

/// Runs `f` once per replica on its own stream, in parallel; results are
/// ordered by replica index.
pub fn run_replicas<T, F>(seed: u64, replicas: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut s = RngStream::new(seed, r as u64);
            f(&mut s)
        })
        .collect()
}
