use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ks_atoms, law_cdf, starting_profile, EmpiricalMeasure, LawCdf, Scaling, StartProfile};
use crate::error::{Error, Result};
use crate::freeprob::laws::{dunkl_b, limit_law_a, limit_law_b, LimitLaw};
use crate::moments::{
    empirical_moments, limit_moments_a, limit_moments_b, limit_moments_dunkl, MomentScaling,
    MomentSequence,
};
use crate::rootsys::{Chamber, ChamberPoint};
use crate::stochastic::{
    run_replicas, simulate_bessel_a, simulate_bessel_b, simulate_bessel_ou, simulate_dunkl_b,
    MultiplicityA, MultiplicityB, OuMode, RngStream, SchemeDiagnostics, SdeOptions,
};
use crate::zeros::{
    hermite_zeros, laguerre_zeros, profile_solution_a, profile_solution_b, DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// zeros of H_N; the frozen type A state at t = 1/2 from the origin
    HermiteZeros,
    /// square roots of the zeros of L_N^(nu-1); the frozen type B state at
    /// t = 1/2 from the origin
    LaguerreZeros,
    BesselA,
    BesselB,
    OuA,
    DunklB,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuModeConfig {
    #[default]
    Transform,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartConfig {
    /// c times the stationary profile: Hermite zeros for type A, square
    /// roots of Laguerre zeros for type B and Dunkl
    Profile {
        profile: f64,
    },
    Law(StartProfile),
}

impl Default for StartConfig {
    fn default() -> Self {
        StartConfig::Law(StartProfile::Zero)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    /// ks, ks-mean, moment or profile
    pub metric: String,
    pub order: Option<usize>,
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub multiplicity: Option<f64>,
    /// pass if value <= max(max, rel |limit|, sigmas stderr)
    #[serde(default)]
    pub max: f64,
    #[serde(default)]
    pub rel: f64,
    #[serde(default)]
    pub sigmas: f64,
    #[serde(default = "yes")]
    pub hard: bool,
}

fn yes() -> bool {
    true
}

fn default_t() -> Vec<f64> {
    vec![1.0]
}

fn default_replicas() -> usize {
    1
}

fn default_order() -> usize {
    6
}

fn default_lambda() -> f64 {
    1.0
}

/// Experiment description, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub system: SystemKind,
    /// k (type A, OU) or beta (type B, Dunkl); inf is the frozen system.
    /// Empty means frozen only.
    #[serde(default)]
    pub multiplicities: Vec<f64>,
    /// nu(N) = nu0 N
    #[serde(default)]
    pub nu0: f64,
    /// fixed nu for all N, overriding nu0; the limit then uses nu0 = 0
    pub nu: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub ou_mode: OuModeConfig,
    pub n: Vec<usize>,
    #[serde(default = "default_t")]
    pub t: Vec<f64>,
    pub dt: Option<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub moments: usize,
    #[serde(default)]
    pub start: StartConfig,
    #[serde(default = "yes")]
    pub ks: bool,
    #[serde(default)]
    pub threshold: Vec<Threshold>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::from_toml(&text)?, text))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n must list positive sizes".into());
        }
        if self.t.is_empty() || self.t.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("t must list finite nonnegative times".into());
        }
        if self.multiplicities.iter().any(|m| m.is_nan() || *m <= 0.0) {
            return bad("multiplicities must be positive (inf for frozen)".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if !(self.nu0.is_finite() && self.nu0 >= 0.0) {
            return bad("nu0 must be finite and >= 0".into());
        }
        for th in &self.threshold {
            if !["ks", "ks-mean", "moment", "profile"].contains(&th.metric.as_str()) {
                return bad(format!("unknown threshold metric {:?}", th.metric));
            }
            if th.metric == "moment" && th.order.is_none() {
                return bad("moment thresholds need an order".into());
            }
        }
        Ok(())
    }

    fn mults(&self) -> Vec<Option<f64>> {
        match self.system {
            SystemKind::HermiteZeros | SystemKind::LaguerreZeros => vec![None],
            _ if self.multiplicities.is_empty() => vec![None],
            _ => self
                .multiplicities
                .iter()
                .map(|&m| if m.is_infinite() { None } else { Some(m) })
                .collect(),
        }
    }

    fn times(&self) -> Vec<f64> {
        match self.system {
            SystemKind::HermiteZeros | SystemKind::LaguerreZeros => vec![0.5],
            _ => {
                let mut t = self.t.clone();
                t.sort_by(f64::total_cmp);
                t.dedup();
                t
            }
        }
    }

    fn nu_for(&self, n: usize) -> f64 {
        self.nu.unwrap_or(self.nu0 * n as f64)
    }

    fn nu0_limit(&self) -> f64 {
        if self.nu.is_some() {
            0.0
        } else {
            self.nu0
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub order: usize,
    pub empirical: f64,
    pub stderr: f64,
    pub limit: f64,
    pub diff: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    pub mean_steps: f64,
    pub mean_implicit_steps: f64,
    pub mean_jumps: f64,
    pub min_gap: f64,
    pub max_violation: f64,
    pub repairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    /// None for the frozen system
    pub multiplicity: Option<f64>,
    pub t: f64,
    pub replicas: usize,
    /// KS of all replicas pooled
    pub ks_pooled: Option<f64>,
    pub ks_mean: Option<f64>,
    pub ks_stderr: Option<f64>,
    /// moments of the empirical measure (squared side for type B)
    pub moments: Vec<MomentRow>,
    /// max |x(t) - exact profile| / max |exact profile|
    pub profile_error: Option<f64>,
    pub diagnostics: CellDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub metric: String,
    pub order: Option<usize>,
    pub n: usize,
    pub multiplicity: Option<f64>,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub hard: bool,
}

/// KS over increasing N at fixed (multiplicity, t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub multiplicity: Option<f64>,
    pub t: f64,
    /// (N, KS, stderr)
    pub values: Vec<(usize, f64, f64)>,
    pub monotone: bool,
    pub hard: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub seed: u64,
    pub config_sha256: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_text: String,
    pub cells: Vec<CellReport>,
    pub checks: Vec<Check>,
    pub monotone: Vec<MonotoneCheck>,
    /// all hard checks passed
    pub passed: bool,
    pub manifest: Manifest,
    pub elapsed_seconds: f64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn scaling(kind: SystemKind) -> Scaling {
    match kind {
        SystemKind::BesselB | SystemKind::LaguerreZeros => Scaling::SqrtTwoN,
        _ => Scaling::SqrtN,
    }
}

fn chamber(kind: SystemKind) -> Chamber {
    match kind {
        SystemKind::BesselA | SystemKind::OuA | SystemKind::HermiteZeros => Chamber::A,
        SystemKind::BesselB | SystemKind::LaguerreZeros => Chamber::B,
        SystemKind::DunklB => Chamber::FullSpace,
    }
}

fn is_type_a(kind: SystemKind) -> bool {
    chamber(kind) == Chamber::A
}

/// Start configuration and the law its empirical measures converge to.
fn start(cfg: &ExperimentConfig, n: usize) -> Result<(ChamberPoint, LimitLaw)> {
    let kind = cfg.system;
    match &cfg.start {
        StartConfig::Law(p) => {
            let x = starting_profile(p, n, scaling(kind), chamber(kind))?;
            Ok((x, p.law()?))
        }
        StartConfig::Profile { profile: c } => {
            if is_type_a(kind) {
                let law = if *c == 0.0 {
                    LimitLaw::PointMass(0.0)
                } else {
                    LimitLaw::Semicircle {
                        radius: c.abs() * 2f64.sqrt(),
                    }
                };
                Ok((profile_solution_a(n, c.abs(), 0.0)?, law))
            } else {
                let x = profile_solution_b(n, cfg.nu_for(n), c.abs(), 0.0)?;
                // x/sqrt(2N) squared tends to MP(1 + nu0, c²/2); sqrt(N) doubles it
                let t = if kind == SystemKind::DunklB {
                    c * c
                } else {
                    c * c / 2.0
                };
                let law = if *c == 0.0 {
                    LimitLaw::PointMass(0.0)
                } else {
                    LimitLaw::SqrtMarchenkoPastur {
                        c: 1.0 + cfg.nu0_limit(),
                        t,
                    }
                };
                let x = if kind == SystemKind::DunklB {
                    ChamberPoint::new(x.coords().to_vec(), Chamber::FullSpace)?
                } else {
                    x
                };
                Ok((x, law))
            }
        }
    }
}

/// Time at which the lambda = 0 process matches the OU state in law after
/// multiplying by e^{lambda t}.
fn inner_time(cfg: &ExperimentConfig, t: f64) -> f64 {
    if cfg.system == SystemKind::OuA && cfg.lambda != 0.0 {
        (2.0 * cfg.lambda * t).exp_m1() / (2.0 * cfg.lambda)
    } else {
        t
    }
}

fn limit_law(cfg: &ExperimentConfig, mu0: &LimitLaw, t: f64) -> Result<LimitLaw> {
    let nu0 = cfg.nu0_limit();
    match cfg.system {
        SystemKind::HermiteZeros => limit_law_a(LimitLaw::PointMass(0.0), 0.5),
        SystemKind::LaguerreZeros => limit_law_b(LimitLaw::PointMass(0.0), nu0, 0.5),
        SystemKind::BesselA => limit_law_a(mu0.clone(), t),
        SystemKind::OuA => limit_law_a(mu0.clone(), inner_time(cfg, t)),
        SystemKind::BesselB => limit_law_b(mu0.clone(), nu0, t),
        SystemKind::DunklB => dunkl_b(mu0.clone(), nu0, t),
    }
}

fn limit_moments(cfg: &ExperimentConfig, mu0: &LimitLaw, t: f64) -> Result<Vec<f64>> {
    let order = cfg.moments;
    let nu0 = cfg.nu0_limit();
    Ok(match cfg.system {
        SystemKind::HermiteZeros => {
            limit_moments_a(
                &MomentSequence::new(vec![1.0], MomentScaling::A, 0.0),
                0.5,
                order,
            )
            .values
        }
        SystemKind::LaguerreZeros => {
            let c0 = MomentSequence::new(vec![1.0], MomentScaling::Bsq, 0.0);
            limit_moments_b(&c0, nu0, 0.5, order).values
        }
        SystemKind::BesselA => {
            let c0 = MomentSequence::new(mu0.moments(order)?, MomentScaling::A, 0.0);
            limit_moments_a(&c0, t, order).values
        }
        SystemKind::OuA => {
            let c0 = MomentSequence::new(mu0.moments(order)?, MomentScaling::A, 0.0);
            let s = inner_time(cfg, t);
            let d = (-cfg.lambda * t).exp();
            limit_moments_a(&c0, s, order)
                .values
                .iter()
                .enumerate()
                .map(|(l, v)| v * d.powi(l as i32))
                .collect()
        }
        SystemKind::BesselB => {
            let c0 = MomentSequence::new(mu0.squared_moments(order)?, MomentScaling::Bsq, 0.0);
            limit_moments_b(&c0, nu0, t, order).values
        }
        SystemKind::DunklB => {
            let c0 = MomentSequence::new(mu0.moments(order)?, MomentScaling::Dunkl, 0.0);
            limit_moments_dunkl(&c0, nu0, t, order).values
        }
    })
}

struct Sample {
    /// positions at each recorded time
    states: Vec<Vec<f64>>,
    diag: SchemeDiagnostics,
}

fn simulate(
    cfg: &ExperimentConfig,
    n: usize,
    mult: Option<f64>,
    x0: &ChamberPoint,
    times: &[f64],
    stream: &mut RngStream,
) -> Result<Sample> {
    let mut opts = SdeOptions {
        record: times.to_vec(),
        ..SdeOptions::default()
    };
    if let Some(dt) = cfg.dt {
        opts.dt = dt;
    }
    let t_end = *times.last().unwrap();
    let nu = cfg.nu_for(n);
    let ma = || {
        mult.map(MultiplicityA::new)
            .unwrap_or(Ok(MultiplicityA::frozen()))
    };
    let mb = || match mult {
        Some(b) => MultiplicityB::new(nu, b),
        None => MultiplicityB::frozen(nu),
    };
    let path = match cfg.system {
        SystemKind::HermiteZeros => {
            let z = hermite_zeros(n, DEFAULT_TOL)?;
            return Ok(Sample {
                states: vec![z.zeros],
                diag: SchemeDiagnostics::default(),
            });
        }
        SystemKind::LaguerreZeros => {
            let z = laguerre_zeros(n, nu, DEFAULT_TOL)?;
            return Ok(Sample {
                states: vec![z.zeros.iter().map(|v| v.sqrt()).collect()],
                diag: SchemeDiagnostics::default(),
            });
        }
        SystemKind::BesselA => simulate_bessel_a(x0, ma()?, t_end, &opts, stream)?,
        SystemKind::OuA => {
            let mode = match cfg.ou_mode {
                OuModeConfig::Transform => OuMode::Transform,
                OuModeConfig::Direct => OuMode::Direct,
            };
            simulate_bessel_ou(x0, ma()?, cfg.lambda, t_end, mode, &opts, stream)?
        }
        SystemKind::BesselB => simulate_bessel_b(x0, mb()?, t_end, &opts, stream)?,
        SystemKind::DunklB => simulate_dunkl_b(x0, mb()?, t_end, &opts, stream, true)?,
    };
    let states = times
        .iter()
        .map(|&t| {
            let i = path
                .times
                .iter()
                .position(|&s| s == t)
                .unwrap_or(path.times.len() - 1);
            path.states[i].coords().to_vec()
        })
        .collect();
    Ok(Sample {
        states,
        diag: path.diagnostics,
    })
}

fn profile_target(cfg: &ExperimentConfig, n: usize, t: f64) -> Result<Option<Vec<f64>>> {
    let StartConfig::Profile { profile: c } = cfg.start else {
        return Ok(None);
    };
    Ok(match cfg.system {
        SystemKind::BesselA => Some(profile_solution_a(n, c.abs(), t)?.coords().to_vec()),
        SystemKind::OuA => {
            let s = inner_time(cfg, t);
            let d = (-cfg.lambda * t).exp();
            Some(
                profile_solution_a(n, c.abs(), s)?
                    .coords()
                    .iter()
                    .map(|v| v * d)
                    .collect(),
            )
        }
        SystemKind::BesselB => Some(
            profile_solution_b(n, cfg.nu_for(n), c.abs(), t)?
                .coords()
                .to_vec(),
        ),
        _ => None,
    })
}

fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let r = v.len() as f64;
    let m = v.iter().sum::<f64>() / r;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (r - 1.0);
    (m, (var / r).sqrt())
}

fn run_cells(cfg: &ExperimentConfig, n: usize, mult: Option<f64>) -> Result<Vec<CellReport>> {
    let times = cfg.times();
    let (x0, mu0) = start(cfg, n)?;
    let deterministic = mult.is_none() && cfg.system != SystemKind::DunklB;
    let replicas = if deterministic { 1 } else { cfg.replicas };
    let t_last = *times.last().unwrap();
    let samples = run_replicas(cfg.seed, replicas, |s| {
        let replica = s.replica() as usize;
        simulate(cfg, n, mult, &x0, &times, s).map_err(|e| Error::Experiment {
            n,
            t: t_last,
            replica,
            source: Box::new(e),
        })
    })?;
    let sc = scaling(cfg.system);
    let mut diag = CellDiagnostics {
        min_gap: f64::INFINITY,
        ..Default::default()
    };
    for s in &samples {
        diag.mean_steps += s.diag.steps as f64 / replicas as f64;
        diag.mean_implicit_steps += s.diag.implicit_steps as f64 / replicas as f64;
        diag.mean_jumps += s.diag.jumps as f64 / replicas as f64;
        diag.min_gap = diag.min_gap.min(s.diag.min_gap);
        diag.max_violation = diag.max_violation.max(s.diag.max_violation);
        diag.repairs += s.diag.repairs;
    }
    let wrap = |t: f64, e: Error| Error::Experiment {
        n,
        t,
        replica: 0,
        source: Box::new(e),
    };
    let mut cells = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        // the OU state is compared after undoing the e^{-lambda t} contraction,
        // which leaves KS unchanged
        let stretch = if cfg.system == SystemKind::OuA {
            (cfg.lambda * t).exp()
        } else {
            1.0
        };
        let measures: Vec<EmpiricalMeasure> = samples
            .iter()
            .map(|s| EmpiricalMeasure::from_positions(&s.states[k], sc))
            .collect();
        let limit = limit_moments(cfg, &mu0, t).map_err(|e| wrap(t, e))?;
        let per: Vec<Vec<f64>> = measures
            .iter()
            .map(|m| empirical_moments(m, cfg.moments).values)
            .collect();
        let moments = (0..=cfg.moments)
            .map(|l| {
                let v: Vec<f64> = per.iter().map(|p| p[l]).collect();
                let (m, se) = mean_stderr(&v);
                MomentRow {
                    order: l,
                    empirical: m,
                    stderr: se,
                    limit: limit[l],
                    diff: (m - limit[l]).abs(),
                }
            })
            .collect();
        let (ks_pooled, ks_mean, ks_stderr) =
            if cfg.ks && (t > 0.0 || !matches!(mu0, LimitLaw::PointMass(_))) {
                let law = limit_law(cfg, &mu0, t).map_err(|e| wrap(t, e))?;
                let cdf: LawCdf = law_cdf(&law).map_err(|e| wrap(t, e))?;
                let per: Vec<f64> = measures
                    .iter()
                    .map(|m| {
                        let a: Vec<f64> = m.atoms.iter().map(|v| v * stretch).collect();
                        ks_atoms(&a, &cdf)
                    })
                    .collect();
                let pooled: Vec<f64> = measures
                    .iter()
                    .flat_map(|m| m.atoms.iter().map(|v| v * stretch))
                    .collect();
                let (m, se) = mean_stderr(&per);
                (Some(ks_atoms(&pooled, &cdf)), Some(m), Some(se))
            } else {
                (None, None, None)
            };
        let profile_error = if deterministic {
            profile_target(cfg, n, t)?.map(|target| {
                let scale = target
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
                    .max(f64::MIN_POSITIVE);
                target
                    .iter()
                    .zip(&samples[0].states[k])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / scale
            })
        } else {
            None
        };
        cells.push(CellReport {
            n,
            multiplicity: mult,
            t,
            replicas,
            ks_pooled,
            ks_mean,
            ks_stderr,
            moments,
            profile_error,
            diagnostics: diag.clone(),
        });
    }
    Ok(cells)
}

fn matches(th: &Threshold, c: &CellReport) -> bool {
    th.n.is_none_or(|n| n == c.n)
        && th.t.is_none_or(|t| t == c.t)
        && th.multiplicity.is_none_or(|m| match c.multiplicity {
            Some(k) => k == m,
            None => m.is_infinite(),
        })
}

fn evaluate_checks(cfg: &ExperimentConfig, cells: &[CellReport]) -> Vec<Check> {
    let mut out = Vec::new();
    for th in &cfg.threshold {
        for c in cells.iter().filter(|c| matches(th, c)) {
            let (value, limit, se) = match th.metric.as_str() {
                "ks" => (c.ks_pooled, 0.0, 0.0),
                "ks-mean" => (c.ks_mean, 0.0, c.ks_stderr.unwrap_or(0.0)),
                "profile" => (c.profile_error, 0.0, 0.0),
                _ => {
                    let row = th.order.and_then(|l| c.moments.get(l));
                    (
                        row.map(|r| r.diff),
                        row.map_or(0.0, |r| r.limit),
                        row.map_or(0.0, |r| r.stderr),
                    )
                }
            };
            let bound = th.max.max(th.rel * limit.abs()).max(th.sigmas * se);
            let value = value.unwrap_or(f64::NAN);
            out.push(Check {
                metric: th.metric.clone(),
                order: th.order,
                n: c.n,
                multiplicity: c.multiplicity,
                t: c.t,
                value,
                bound,
                pass: value <= bound,
                hard: th.hard,
            });
        }
    }
    out
}

fn monotone_checks(cfg: &ExperimentConfig, cells: &[CellReport]) -> Vec<MonotoneCheck> {
    let mut out = Vec::new();
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return out;
    }
    for mult in cfg.mults() {
        for t in cfg.times() {
            let mut values = Vec::new();
            for &n in &ns {
                if let Some(c) = cells
                    .iter()
                    .find(|c| c.n == n && c.multiplicity == mult && c.t == t)
                {
                    if let (Some(ks), Some(mean), Some(se)) = (c.ks_pooled, c.ks_mean, c.ks_stderr)
                    {
                        values.push(if c.replicas > 1 {
                            (n, mean, se)
                        } else {
                            (n, ks, 0.0)
                        });
                    }
                }
            }
            if values.len() < 2 {
                continue;
            }
            let monotone = values
                .windows(2)
                .all(|w| w[1].1 <= w[0].1 + 2.0 * (w[0].2 + w[1].2) + 1e-12);
            let hard = mult.is_none() && cfg.system != SystemKind::DunklB;
            out.push(MonotoneCheck {
                multiplicity: mult,
                t,
                values,
                monotone,
                hard,
            });
        }
    }
    out
}

/// Runs every (N, multiplicity) cell and evaluates the thresholds.
pub fn run_experiment(cfg: &ExperimentConfig, config_text: &str) -> Result<ExperimentReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut cells = Vec::new();
    for &n in &cfg.n {
        for mult in cfg.mults() {
            cells.extend(run_cells(cfg, n, mult)?);
        }
    }
    let checks = evaluate_checks(cfg, &cells);
    let monotone = monotone_checks(cfg, &cells);
    let passed =
        checks.iter().all(|c| c.pass || !c.hard) && monotone.iter().all(|m| m.monotone || !m.hard);
    let manifest = Manifest {
        name: cfg.name.clone(),
        seed: cfg.seed,
        config_sha256: hex(&Sha256::digest(config_text.as_bytes())),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        config_text: config_text.to_string(),
        cells,
        checks,
        monotone,
        passed,
        manifest,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct Row<'a> {
    n: usize,
    multiplicity: String,
    t: f64,
    metric: &'a str,
    value: f64,
    stderr: Option<f64>,
}

fn mult_label(m: Option<f64>) -> String {
    m.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

/// Writes report.json, distances.csv and manifest.json into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&report.manifest)?,
    )?;
    let mut w = csv::Writer::from_path(dir.join("distances.csv"))?;
    for c in &report.cells {
        let base = |metric, value, stderr| Row {
            n: c.n,
            multiplicity: mult_label(c.multiplicity),
            t: c.t,
            metric,
            value,
            stderr,
        };
        if let Some(v) = c.ks_pooled {
            w.serialize(base("ks", v, None))?;
        }
        if let Some(v) = c.ks_mean {
            w.serialize(base("ks-mean", v, c.ks_stderr))?;
        }
        if let Some(v) = c.profile_error {
            w.serialize(base("profile", v, None))?;
        }
        for r in &c.moments {
            let name = format!("moment-{}", r.order);
            w.serialize(Row {
                metric: &name,
                ..base("", r.diff, Some(r.stderr))
            })?;
        }
    }
    w.flush()?;
    Ok(())
}
