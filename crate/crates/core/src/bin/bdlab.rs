use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use bdlab::freeprob::{density_on_grid, dunkl_b, limit_law_a, limit_law_b, parse_law, LimitLaw};
use bdlab::frozen::{solve_frozen, FrozenOptions, System};
use bdlab::harness::{
    run_experiment, starting_profile, write_outputs, ExperimentConfig, Scaling, StartProfile,
};
use bdlab::moments::{
    limit_moments_a, limit_moments_b, limit_moments_dunkl, MomentScaling, MomentSequence,
};
use bdlab::rootsys::{project_to_chamber, Chamber, ChamberPoint};
use bdlab::stochastic::{
    run_replicas, simulate_bessel_a, simulate_bessel_b, simulate_bessel_ou, simulate_dunkl_b,
    MultiplicityA, MultiplicityB, OuMode, SdeOptions,
};
use bdlab::zeros::{
    hermite_zeros, laguerre_zeros, profile_solution_a, profile_solution_b, DEFAULT_TOL,
};

const MAX_ORDER: usize = 64;

#[derive(Parser)]
#[command(
    name = "bdlab",
    version,
    about = "Bessel and Dunkl particle systems and their limit laws"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Hermite,
    Laguerre,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrozenSystem {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimSystem {
    BesselA,
    BesselB,
    BesselOu,
    DunklB,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimitKind {
    A,
    B,
    Dunkl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Transform,
    Direct,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hermite or Laguerre zeros from the electrostatic fixed point
    Zeros {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Laguerre parameter: zeros of L_N^(nu-1)
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frozen type A or B trajectory
    Frozen {
        #[arg(long, value_enum)]
        system: FrozenSystem,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        /// zero, profile:c or file:PATH (raw positions)
        #[arg(long, default_value = "zero")]
        start: String,
        /// T0:T1:STEPS
        #[arg(long, default_value = "0:1:10")]
        t_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo replicas of a Bessel, OU or Dunkl system
    Simulate {
        #[arg(long, value_enum)]
        system: SimSystem,
        #[arg(long)]
        n: usize,
        /// type A multiplicity (inf for frozen)
        #[arg(long)]
        k: Option<f64>,
        /// type B nu (absolute)
        #[arg(long)]
        nu: Option<f64>,
        /// type B and Dunkl beta (inf for frozen)
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "transform")]
        ou_mode: Mode,
        /// zero, quartercircle, semicircle:R, profile:c or file:PATH (normalised atoms)
        #[arg(long, default_value = "zero")]
        start: String,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        record: Vec<f64>,
        /// simulate Swap jumps too (they do not change empirical measures)
        #[arg(long)]
        keep_swaps: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Limit moments from the moment recurrences
    LimitMoments {
        #[arg(long, value_enum)]
        system: LimitKind,
        /// law name (delta0, semicircle:R, quartercircle, mp:c:t, sqrt-mp:c:t, two-atom) or moments CSV
        #[arg(long, default_value = "delta0")]
        mu: String,
        #[arg(long, default_value_t = 0.0)]
        nu0: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 12)]
        order: usize,
        /// allow orders above 64
        #[arg(long)]
        high_order: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density (and optionally Stieltjes transform) of a limit law
    LimitLaw {
        #[arg(long, value_enum)]
        kind: LimitKind,
        #[arg(long, default_value = "delta0")]
        mu: String,
        #[arg(long, default_value_t = 0.0)]
        nu0: f64,
        #[arg(long)]
        t: f64,
        /// A:B:K
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of points re,im at which G is evaluated
        #[arg(long)]
        stieltjes: Option<PathBuf>,
        #[arg(long)]
        stieltjes_out: Option<PathBuf>,
    },
    /// Run an experiment config; exit code 0 iff all hard thresholds pass
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let w: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(w))
}

fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        bail!("expected A:B:K, got {s:?}");
    }
    Ok((p[0].parse()?, p[1].parse()?, p[2].parse()?))
}

fn read_positions(path: &Path) -> Result<Vec<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("bad number {s:?}"))
        })
        .collect()
}

fn zeros(family: Family, n: usize, nu: f64, tol: f64, out: &Option<PathBuf>) -> Result<()> {
    let z = match family {
        Family::Hermite => hermite_zeros(n, tol)?,
        Family::Laguerre => laguerre_zeros(n, nu, tol)?,
    };
    eprintln!("residual {:e}", z.residual);
    let mut w = writer(out)?;
    w.write_record(["index", "zero"])?;
    for (i, v) in z.zeros.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

fn frozen(
    system: FrozenSystem,
    n: usize,
    nu: f64,
    start: &str,
    t_grid: &str,
    out: &Option<PathBuf>,
) -> Result<()> {
    let (sys, chamber) = match system {
        FrozenSystem::A => (System::A, Chamber::A),
        FrozenSystem::B => (System::B { nu }, Chamber::B),
    };
    let x0 = if start == "zero" {
        ChamberPoint::zero(n, chamber)
    } else if let Some(c) = start.strip_prefix("profile:") {
        let c: f64 = c.parse()?;
        match system {
            FrozenSystem::A => profile_solution_a(n, c, 0.0)?,
            FrozenSystem::B => profile_solution_b(n, nu, c, 0.0)?,
        }
    } else if let Some(p) = start.strip_prefix("file:") {
        let x = read_positions(Path::new(p))?;
        if x.len() != n {
            bail!("{p} holds {} positions, N = {n}", x.len());
        }
        project_to_chamber(&x, chamber)?
    } else {
        bail!("unknown start {start:?}");
    };
    let (a, b, k) = parse_range(t_grid)?;
    let grid: Vec<f64> = (0..=k)
        .map(|i| a + (b - a) * i as f64 / k.max(1) as f64)
        .collect();
    let traj = solve_frozen(sys, &x0, &grid, &FrozenOptions::default())?;
    let mut w = writer(out)?;
    w.write_record(["t", "particle", "x"])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        for (i, v) in s.coords().iter().enumerate() {
            w.write_record([t.to_string(), (i + 1).to_string(), format!("{v:e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn start_point(
    start: &str,
    n: usize,
    scaling: Scaling,
    chamber: Chamber,
    nu: f64,
) -> Result<ChamberPoint> {
    if let Some(c) = start.strip_prefix("profile:") {
        let c: f64 = c.parse()?;
        let x = match chamber {
            Chamber::A => profile_solution_a(n, c, 0.0)?,
            _ => profile_solution_b(n, nu, c, 0.0)?,
        };
        return Ok(ChamberPoint::new(x.coords().to_vec(), chamber)?);
    }
    let profile = match start {
        "zero" => StartProfile::Zero,
        "quartercircle" => StartProfile::Quartercircle,
        s if s.starts_with("semicircle:") => StartProfile::Semicircle {
            radius: s["semicircle:".len()..].parse()?,
        },
        s if s.starts_with("file:") => StartProfile::File {
            path: PathBuf::from(&s["file:".len()..]),
        },
        s => StartProfile::QuantileOf { law: parse_law(s)? },
    };
    Ok(starting_profile(&profile, n, scaling, chamber)?)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    system: &'a str,
    n: usize,
    k: Option<f64>,
    nu: Option<f64>,
    beta: Option<f64>,
    lambda: f64,
    start: &'a str,
    t: f64,
    dt: f64,
    replicas: usize,
    seed: u64,
    record: Vec<f64>,
    version: &'static str,
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    system: SimSystem,
    n: usize,
    k: Option<f64>,
    nu: Option<f64>,
    beta: Option<f64>,
    lambda: f64,
    ou_mode: Mode,
    start: &str,
    t: f64,
    dt: f64,
    replicas: usize,
    seed: u64,
    record: Vec<f64>,
    keep_swaps: bool,
    out: &Path,
) -> Result<()> {
    let record = if record.is_empty() { vec![t] } else { record };
    let opts = SdeOptions {
        dt,
        record: record.clone(),
        ..SdeOptions::default()
    };
    let ma = || -> Result<MultiplicityA> {
        let k = k.context("--k is required")?;
        Ok(if k.is_infinite() {
            MultiplicityA::frozen()
        } else {
            MultiplicityA::new(k)?
        })
    };
    let mb = || -> Result<MultiplicityB> {
        let nu = nu.context("--nu is required")?;
        let beta = beta.context("--beta is required")?;
        Ok(if beta.is_infinite() {
            MultiplicityB::frozen(nu)?
        } else {
            MultiplicityB::new(nu, beta)?
        })
    };
    let (name, chamber, scaling) = match system {
        SimSystem::BesselA => ("bessel-a", Chamber::A, Scaling::SqrtN),
        SimSystem::BesselOu => ("bessel-ou", Chamber::A, Scaling::SqrtN),
        SimSystem::BesselB => ("bessel-b", Chamber::B, Scaling::SqrtTwoN),
        SimSystem::DunklB => ("dunkl-b", Chamber::FullSpace, Scaling::SqrtN),
    };
    let x0 = start_point(start, n, scaling, chamber, nu.unwrap_or(1.0))?;
    let paths = match system {
        SimSystem::BesselA => {
            let m = ma()?;
            run_replicas(seed, replicas, |s| simulate_bessel_a(&x0, m, t, &opts, s))?
        }
        SimSystem::BesselOu => {
            let m = ma()?;
            let mode = match ou_mode {
                Mode::Transform => OuMode::Transform,
                Mode::Direct => OuMode::Direct,
            };
            run_replicas(seed, replicas, |s| {
                simulate_bessel_ou(&x0, m, lambda, t, mode, &opts, s)
            })?
        }
        SimSystem::BesselB => {
            let m = mb()?;
            run_replicas(seed, replicas, |s| simulate_bessel_b(&x0, m, t, &opts, s))?
        }
        SimSystem::DunklB => {
            let m = mb()?;
            run_replicas(seed, replicas, |s| {
                simulate_dunkl_b(&x0, m, t, &opts, s, !keep_swaps)
            })?
        }
    };
    std::fs::create_dir_all(out)?;
    for (i, &tr) in paths[0].times.iter().enumerate() {
        let mut w = csv::Writer::from_path(out.join(format!("states_t{tr}.csv")))?;
        let mut header = vec!["replica".to_string()];
        header.extend((1..=n).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for (r, p) in paths.iter().enumerate() {
            let mut row = vec![r.to_string()];
            row.extend(p.states[i].coords().iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let manifest = RunManifest {
        system: name,
        n,
        k,
        nu,
        beta,
        lambda,
        start,
        t,
        dt,
        replicas,
        seed,
        record,
        version: env!("CARGO_PKG_VERSION"),
    };
    std::fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    let diag: Vec<_> = paths.iter().map(|p| p.diagnostics.clone()).collect();
    std::fs::write(
        out.join("diagnostics.json"),
        serde_json::to_string_pretty(&diag)?,
    )?;
    Ok(())
}

fn limit(kind: LimitKind, mu: &LimitLaw, nu0: f64, t: f64) -> Result<LimitLaw> {
    Ok(match kind {
        LimitKind::A => limit_law_a(mu.clone(), t)?,
        LimitKind::B => limit_law_b(mu.clone(), nu0, t)?,
        LimitKind::Dunkl => dunkl_b(mu.clone(), nu0, t)?,
    })
}

fn limit_moments(
    kind: LimitKind,
    mu: &str,
    nu0: f64,
    t: f64,
    order: usize,
    high_order: bool,
    out: &Option<PathBuf>,
) -> Result<()> {
    if order > MAX_ORDER && !high_order {
        bail!("order {order} exceeds {MAX_ORDER}; pass --high-order to allow it");
    }
    let law = parse_law(mu)?;
    let m = match kind {
        LimitKind::A => limit_moments_a(
            &MomentSequence::new(law.moments(order)?, MomentScaling::A, 0.0),
            t,
            order,
        ),
        LimitKind::B => limit_moments_b(
            &MomentSequence::new(law.squared_moments(order)?, MomentScaling::Bsq, 0.0),
            nu0,
            t,
            order,
        ),
        LimitKind::Dunkl => limit_moments_dunkl(
            &MomentSequence::new(law.moments(order)?, MomentScaling::Dunkl, 0.0),
            nu0,
            t,
            order,
        ),
    };
    let mut w = writer(out)?;
    w.write_record(["order", "moment"])?;
    for (l, v) in m.values.iter().enumerate() {
        w.write_record([l.to_string(), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn limit_law_cmd(
    kind: LimitKind,
    mu: &str,
    nu0: f64,
    t: f64,
    grid: &Option<String>,
    out: &Option<PathBuf>,
    stieltjes: &Option<PathBuf>,
    stieltjes_out: &Option<PathBuf>,
) -> Result<()> {
    let law = limit(kind, &parse_law(mu)?, nu0, t)?;
    if let Some(g) = grid {
        let (a, b, k) = parse_range(g)?;
        let xs: Vec<f64> = (0..k)
            .map(|i| a + (b - a) * i as f64 / (k.max(2) - 1) as f64)
            .collect();
        let d = density_on_grid(&law, &xs)?;
        let mut w = writer(out)?;
        w.write_record(["x", "density", "flagged"])?;
        for (i, (x, v)) in d.grid.iter().zip(&d.values).enumerate() {
            let f = d.flagged.contains(&i);
            w.write_record([x.to_string(), format!("{v:e}"), f.to_string()])?;
        }
        w.flush()?;
        for (x, p) in d.atoms {
            eprintln!("atom at {x} with mass {p}");
        }
    }
    if let Some(path) = stieltjes {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)?;
        let mut w = writer(stieltjes_out)?;
        w.write_record(["re", "im", "g_re", "g_im"])?;
        for rec in r.records() {
            let rec = rec?;
            let (Ok(re), Ok(im)) = (rec[0].trim().parse::<f64>(), rec[1].trim().parse::<f64>())
            else {
                continue;
            };
            let z = C64::new(re, im);
            let g = match kind {
                LimitKind::B => z * law.stieltjes_squared(z * z)?,
                _ => law.stieltjes(z)?,
            };
            w.write_record([
                re.to_string(),
                im.to_string(),
                format!("{:e}", g.re),
                format!("{:e}", g.im),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn validate(
    config: &Path,
    threads: Option<usize>,
    replicas: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<bool> {
    let (mut cfg, text) = ExperimentConfig::load(config)?;
    if let Some(r) = replicas {
        cfg.replicas = r;
    }
    let run = || run_experiment(&cfg, &text);
    let report = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()?
            .install(run)?,
        None => run()?,
    };
    let dir = out.clone().unwrap_or_else(|| cfg.output_dir());
    write_outputs(&report, &dir)?;
    for c in &report.checks {
        println!(
            "{} {}{} N={} t={} value={:.3e} bound={:.3e}{}",
            if c.pass { "PASS" } else { "FAIL" },
            c.metric,
            c.order.map(|l| format!("[{l}]")).unwrap_or_default(),
            c.n,
            c.t,
            c.value,
            c.bound,
            if c.hard { "" } else { " (soft)" }
        );
    }
    for m in &report.monotone {
        if !m.monotone {
            println!(
                "{} KS not monotone in N at t={}",
                if m.hard { "FAIL" } else { "WARN" },
                m.t
            );
        }
    }
    println!("wrote {}", dir.display());
    Ok(report.passed)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Zeros {
            family,
            n,
            nu,
            tol,
            out,
        } => zeros(family, n, nu, tol, &out)?,
        Cmd::Frozen {
            system,
            n,
            nu,
            start,
            t_grid,
            out,
        } => frozen(system, n, nu, &start, &t_grid, &out)?,
        Cmd::Simulate {
            system,
            n,
            k,
            nu,
            beta,
            lambda,
            ou_mode,
            start,
            t,
            dt,
            replicas,
            seed,
            record,
            keep_swaps,
            out,
        } => simulate(
            system, n, k, nu, beta, lambda, ou_mode, &start, t, dt, replicas, seed, record,
            keep_swaps, &out,
        )?,
        Cmd::LimitMoments {
            system,
            mu,
            nu0,
            t,
            order,
            high_order,
            out,
        } => limit_moments(system, &mu, nu0, t, order, high_order, &out)?,
        Cmd::LimitLaw {
            kind,
            mu,
            nu0,
            t,
            grid,
            out,
            stieltjes,
            stieltjes_out,
        } => limit_law_cmd(kind, &mu, nu0, t, &grid, &out, &stieltjes, &stieltjes_out)?,
        Cmd::Validate {
            config,
            threads,
            replicas,
            out,
        } => {
            let ok = validate(&config, threads, replicas, &out)?;
            return Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}
