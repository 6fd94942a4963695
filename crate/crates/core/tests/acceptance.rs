//! End-to-end acceptance checks. Runs without the libtest harness so the
//! PASS/FAIL lines always reach stdout.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bdlab::freeprob::*;
use bdlab::frozen::{ou_transform_frozen, solve_frozen, FrozenOptions, System};
use bdlab::moments::*;
use bdlab::rootsys::{Chamber, ChamberPoint};
use bdlab::stochastic::*;
use bdlab::zeros::{hermite_zeros, laguerre_zeros, semicircle_quantile, DEFAULT_TOL};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::BigRational;

// ---- tolerances ----
const ZERO_RESIDUAL: f64 = 1e-10;
const COMPANION_TOL: f64 = 1e-8;
const KS_HERMITE_200: f64 = 0.02;
const KS_HERMITE_500: f64 = 0.01;
const KS_LAGUERRE_200: f64 = 0.02;
const FROZEN_IDENTITY: f64 = 1e-8;
const DUAL_ROUTE: f64 = 1e-10;
const SDE_REL: f64 = 0.05;
const SDE_SIGMAS: f64 = 3.0;
const EVEN_SPREAD: f64 = 1e-6;
const ODD_FINITE_N: f64 = 1.0;
const DENSITY_MASS: f64 = 1e-6;
const EVEN_PART: f64 = 1e-10;
const INVERSION: f64 = 1e-4;
const KS_DUNKL: f64 = 0.06;
const PDE_RESIDUAL: f64 = 1e-6;
const KS_OU: f64 = 0.02;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn ks(atoms: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut a = atoms.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = a.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    d
}

fn semicircle_density(r: f64, x: f64) -> f64 {
    if x.abs() >= r {
        0.0
    } else {
        2.0 / (PI * r * r) * (r * r - x * x).sqrt()
    }
}

fn semicircle_cdf(r: f64, x: f64) -> f64 {
    let u = (x / r).clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

fn beta_half_three_halves_cdf(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    (2.0 / PI) * (x.sqrt().asin() + (x * (1.0 - x)).sqrt())
}

fn quartercircle_quantile(p: f64) -> f64 {
    let cdf = |x: f64| (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (2.0 * PI);
    let (mut a, mut b) = (0.0, 2.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if cdf(m) < p {
            a = m
        } else {
            b = m
        }
    }
    0.5 * (a + b)
}

/// (1/N) sum (x/scale)^l for l = 0..=order
fn raw_moments(x: &[f64], scale: f64, order: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..=order)
        .map(|l| x.iter().map(|v| (v / scale).powi(l as i32)).sum::<f64>() / n)
        .collect()
}

/// ∫ y^p dMP(c, t) for c >= 1 by the cosine substitution.
fn mp_power_moment(c: f64, t: f64, p: f64) -> f64 {
    let a = t * (1.0 - c.sqrt()).powi(2);
    let b = t * (1.0 + c.sqrt()).powi(2);
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    let k = 4000;
    let mut s = 0.0;
    for i in 0..k {
        let th = PI * (i as f64 + 0.5) / k as f64;
        let y = m - r * th.cos();
        let w = r * th.sin();
        s += y.powf(p) * w * w / (2.0 * PI * t * y);
    }
    s * PI / k as f64
}

fn catalan(n: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..n {
        c = c * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64;
    }
    c
}

fn semicircle_start(n: usize, radius: f64) -> ChamberPoint {
    let s = (n as f64).sqrt();
    let x = (0..n)
        .map(|i| s * semicircle_quantile(radius, 1.0 - (i as f64 + 0.5) / n as f64))
        .collect();
    ChamberPoint::new(x, Chamber::A).unwrap()
}

fn quartercircle_start(n: usize, chamber: Chamber) -> ChamberPoint {
    let s = (n as f64).sqrt();
    let x = (0..n)
        .map(|i| s * quartercircle_quantile(1.0 - (i as f64 + 0.5) / n as f64))
        .collect();
    ChamberPoint::new(x, chamber).unwrap()
}

// ---- 1 ----
fn hermite_oracle() -> Outcome {
    let mut worst_res = 0.0f64;
    for n in (1..=12).chain([50, 200]) {
        let z = hermite_zeros(n, DEFAULT_TOL).unwrap().zeros;
        let res = (0..n)
            .map(|i| {
                let s: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| 1.0 / (z[i] - z[j]))
                    .sum();
                (s - z[i]).abs()
            })
            .fold(0.0, f64::max);
        worst_res = worst_res.max(res);
    }
    let mut worst_root = 0.0f64;
    for n in 1..=12 {
        // monic H_n / 2^n: p_{k+1} = x p_k - (k/2) p_{k-1}
        let mut prev = vec![1.0];
        let mut cur = vec![0.0, 1.0];
        for k in 1..n {
            let mut next = vec![0.0; k + 2];
            for (i, c) in cur.iter().enumerate() {
                next[i + 1] += c;
            }
            for (i, c) in prev.iter().enumerate() {
                next[i] -= 0.5 * k as f64 * c;
            }
            prev = cur;
            cur = next;
        }
        let poly = if n == 1 { vec![0.0, 1.0] } else { cur };
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -poly[i];
        }
        let mut roots: Vec<f64> = comp.complex_eigenvalues().iter().map(|c| c.re).collect();
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let z = hermite_zeros(n, DEFAULT_TOL).unwrap().zeros;
        for (a, b) in roots.iter().zip(&z) {
            worst_root = worst_root.max((a - b).abs());
        }
    }
    outcome(
        worst_res <= ZERO_RESIDUAL && worst_root <= COMPANION_TOL,
        format!("max residual {worst_res:.2e}, max companion deviation {worst_root:.2e}"),
    )
}

// ---- 2 ----
fn semicircle_limit() -> Outcome {
    let d = |n: usize| {
        let z = hermite_zeros(n, DEFAULT_TOL).unwrap().zeros;
        let a: Vec<f64> = z.iter().map(|v| v / (n as f64).sqrt()).collect();
        ks(&a, |x| semicircle_cdf(2f64.sqrt(), x))
    };
    let (d200, d500) = (d(200), d(500));
    outcome(
        d200 <= KS_HERMITE_200 && d500 <= KS_HERMITE_500,
        format!("KS N=200 {d200:.4}, N=500 {d500:.4}"),
    )
}

// ---- 3 ----
fn laguerre_limit() -> Outcome {
    let n = 200;
    let z = laguerre_zeros(n, 1.0, DEFAULT_TOL).unwrap().zeros;
    let a: Vec<f64> = z.iter().map(|v| v / (4.0 * n as f64)).collect();
    let d = ks(&a, beta_half_three_halves_cdf);
    outcome(d <= KS_LAGUERRE_200, format!("KS N=200 {d:.4}"))
}

// ---- 4 ----
fn frozen_identities() -> Outcome {
    let n = 50;
    let nf = n as f64;
    let times: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    let opts = FrozenOptions::default();
    let x0 = semicircle_start(n, 2.0);
    let tr = solve_frozen(System::A, &x0, &times, &opts).unwrap();
    let m0 = raw_moments(x0.coords(), nf.sqrt(), 2);
    let mut worst_a = 0.0f64;
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let m = raw_moments(s.coords(), nf.sqrt(), 2);
        worst_a = worst_a
            .max((m[1] - m0[1]).abs())
            .max((m[2] - m0[2] - t * (nf - 1.0) / nf).abs());
    }
    let nu = nf;
    let xb = quartercircle_start(n, Chamber::B);
    let tr = solve_frozen(System::B { nu }, &xb, &times, &opts).unwrap();
    let sq = |x: &ChamberPoint| x.coords().iter().map(|v| v * v / (2.0 * nf)).sum::<f64>() / nf;
    let s0 = sq(&xb);
    let mut worst_b = 0.0f64;
    for (t, s) in tr.times.iter().zip(&tr.states) {
        worst_b = worst_b.max((sq(s) - s0 - t * (nf - 1.0 + nu) / nf).abs());
    }
    outcome(
        worst_a <= FROZEN_IDENTITY && worst_b <= FROZEN_IDENTITY,
        format!("type A max deviation {worst_a:.2e}, type B {worst_b:.2e}"),
    )
}

// ---- 5 ----
fn dual_route() -> Outcome {
    let order = 12;
    let laws = [
        LimitLaw::PointMass(0.0),
        semicircle(2.0).unwrap(),
        LimitLaw::Quartercircle,
        LimitLaw::SqrtMarchenkoPastur { c: 1.0, t: 1.0 },
        two_atom(),
    ];
    let mut worst = 0.0f64;
    let mut cmp = |a: &[f64], b: &[f64]| {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs() / y.abs().max(1.0));
        }
    };
    for law in &laws {
        let m0 = law.moments(2 * order).unwrap();
        let m0l = &m0[..=order];
        let m0sq: Vec<f64> = (0..=order).map(|l| m0[2 * l]).collect();
        for t in [0.5, 1.0, 2.0] {
            let rec = limit_moments_a(
                &MomentSequence::new(m0l.to_vec(), MomentScaling::A, 0.0),
                t,
                order,
            );
            let fp = free_add(&semicircle_moments(&t, order), m0l, order);
            cmp(&rec.values, &fp);
            for nu0 in [0.0, 1.0] {
                let rec = limit_moments_b(
                    &MomentSequence::new(m0sq.clone(), MomentScaling::Bsq, 0.0),
                    nu0,
                    t,
                    order,
                );
                let inner = free_add(
                    &semicircle_moments(&t, 2 * order),
                    &even_part(&m0),
                    2 * order,
                );
                let fp = free_add(
                    &mp_moments(&nu0, &t, order),
                    &square_pushforward(&inner, order),
                    order,
                );
                cmp(&rec.values, &fp);
                let rec = limit_moments_dunkl(
                    &MomentSequence::new(m0l.to_vec(), MomentScaling::Dunkl, 0.0),
                    nu0,
                    t,
                    order,
                );
                let fp = dunkl_moments_series(m0l, &nu0, &t, order);
                cmp(&rec.values, &fp);
            }
        }
    }
    outcome(
        worst <= DUAL_ROUTE,
        format!("max relative deviation {worst:.2e} over 5 laws, 3 times, 2 nu0"),
    )
}

fn sde_table(values: &[Vec<f64>], order: usize) -> Vec<(f64, f64)> {
    (0..=order)
        .map(|l| mean_se(&values.iter().map(|v| v[l]).collect::<Vec<_>>()))
        .collect()
}

fn band_check(
    label: &str,
    stats: &[Vec<(f64, f64)>],
    limit: &[f64],
    orders: &[usize],
    pairwise: bool,
    notes: &mut Vec<String>,
) -> bool {
    let mut ok = true;
    for (ci, s) in stats.iter().enumerate() {
        for &l in orders {
            let (m, se) = s[l];
            let band = (SDE_REL * limit[l].abs()).max(SDE_SIGMAS * se);
            if (m - limit[l]).abs() > band {
                ok = false;
                notes.push(format!(
                    "{label}[{ci}] l={l}: {m:.5} vs {:.5} (band {band:.2e})",
                    limit[l]
                ));
            }
        }
    }
    for a in 0..stats.len() * pairwise as usize {
        for b in (a + 1)..stats.len() {
            for &l in orders {
                let ((ma, sa), (mb, sb)) = (stats[a][l], stats[b][l]);
                let band = (SDE_REL * limit[l].abs()).max(SDE_SIGMAS * (sa * sa + sb * sb).sqrt());
                if (ma - mb).abs() > band {
                    ok = false;
                    notes.push(format!("{label} cells {a},{b} l={l}: {ma:.5} vs {mb:.5}"));
                }
            }
        }
    }
    ok
}

// ---- 6 ----
/// Leading finite-N coefficients of E S_{N,l}(1) = c_l + (1/k - 1) a_l / N
/// for the process started at 0 (beta = 2k Hermite ensembles): a_2 = 1
/// follows from Ito's formula, a_4 = 5 and a_6 = 22 from the 1/N expansion
/// of Gaussian beta-ensemble moments.
const FINITE_N_A: [f64; 7] = [0.0, 0.0, 1.0, 0.0, 5.0, 0.0, 22.0];

fn sde_a() -> Outcome {
    let n = 100;
    let nf = n as f64;
    let reps = 200;
    let ks_ = [0.5, 1.0, 4.0];
    let limit: Vec<f64> = (0..=6)
        .map(|l| if l % 2 == 0 { catalan(l / 2) } else { 0.0 })
        .collect();
    let x0 = ChamberPoint::zero(n, Chamber::A);
    let opts = SdeOptions {
        dt: 1e-3,
        ..Default::default()
    };
    let mut stats = Vec::new();
    for k in ks_ {
        let m = MultiplicityA::new(k).unwrap();
        let res = run_replicas(61, reps, |s| {
            let p = simulate_bessel_a(&x0, m, 1.0, &opts, s)?;
            Ok(raw_moments(p.last().coords(), nf.sqrt(), 6))
        })
        .unwrap();
        stats.push(sde_table(&res, 6));
    }
    let mut notes = Vec::new();
    let mut ok = band_check("k", &stats, &limit, &[1, 2, 3, 4, 5, 6], false, &mut notes);
    // k-independence after removing the leading finite-N k-dependence
    let mut raw_gap = 0.0f64;
    let mut corrected_gap = 0.0f64;
    for a in 0..3 {
        for b in (a + 1)..3 {
            for l in 1..=6 {
                let ((ma, sa), (mb, sb)) = (stats[a][l], stats[b][l]);
                let shift = (1.0 / ks_[a] - 1.0 / ks_[b]) * FINITE_N_A[l] / nf;
                let band = (SDE_REL * limit[l].abs()).max(SDE_SIGMAS * (sa * sa + sb * sb).sqrt());
                raw_gap = raw_gap.max((ma - mb).abs() / band);
                let g = (ma - mb - shift).abs() / band;
                corrected_gap = corrected_gap.max(g);
                if g > 1.0 {
                    ok = false;
                    notes.push(format!(
                        "cells {a},{b} l={l}: {ma:.4} vs {mb:.4} (shift {shift:.4})"
                    ));
                }
            }
        }
    }
    // finite-N expectation of each cell
    let mut finite_gap = 0.0f64;
    for (i, k) in ks_.iter().enumerate() {
        for l in [2, 4, 6] {
            let want = limit[l] + (1.0 / k - 1.0) * FINITE_N_A[l] / nf;
            let (m, se) = stats[i][l];
            finite_gap = finite_gap.max((m - want).abs() / (SDE_SIGMAS * se + 60.0 / (nf * nf)));
        }
    }
    ok &= finite_gap <= 1.0;
    let m6: Vec<String> = stats.iter().map(|s| format!("{:.4}", s[6].0)).collect();
    outcome(
        ok,
        format!(
            "S_6 means {} vs {:.1} (k = 0.5, 1, 4); pairwise gap {raw_gap:.2} bands raw, {corrected_gap:.2} after the 1/N shift; finite-N expectation within {finite_gap:.2} bands {}",
            m6.join("/"),
            limit[6],
            notes.join("; ")
        ),
    )
}

// ---- 7 ----
fn sde_b() -> Outcome {
    let n = 100;
    let reps = 200;
    let nf = n as f64;
    // at t = 1 the limit is the square root of MP(2, 1)
    let limit: Vec<f64> = (0..=6)
        .map(|l| mp_power_moment(2.0, 1.0, l as f64 / 2.0))
        .collect();
    let x0 = ChamberPoint::zero(n, Chamber::B);
    let opts = SdeOptions::default();
    let mut stats = Vec::new();
    for beta in [0.5, 2.0] {
        let m = MultiplicityB::new(nf, beta).unwrap();
        let res = run_replicas(71, reps, |s| {
            let p = simulate_bessel_b(&x0, m, 1.0, &opts, s)?;
            Ok(raw_moments(p.last().coords(), (2.0 * nf).sqrt(), 6))
        })
        .unwrap();
        stats.push(sde_table(&res, 6));
    }
    let mut notes = Vec::new();
    let ok = band_check(
        "beta",
        &stats,
        &limit,
        &[1, 2, 3, 4, 5, 6],
        true,
        &mut notes,
    );
    let m2: Vec<String> = stats.iter().map(|s| format!("{:.4}", s[2].0)).collect();
    outcome(
        ok,
        format!(
            "squared-side mean {} vs {:.4} (beta = 0.5, 2) {}",
            m2.join("/"),
            limit[2],
            notes.join("; ")
        ),
    )
}

fn dunkl_moments(n: usize, nu0: f64, t: f64, reps: usize, seed: u64) -> Vec<Vec<f64>> {
    let x0 = quartercircle_start(n, Chamber::FullSpace);
    let m = MultiplicityB::frozen(nu0 * n as f64).unwrap();
    let opts = SdeOptions::default();
    run_replicas(seed, reps, |s| {
        let p = simulate_dunkl_b(&x0, m, t, &opts, s, true)?;
        Ok(raw_moments(p.last().coords(), (n as f64).sqrt(), 6))
    })
    .unwrap()
}

// ---- 8 ----
fn frozen_dunkl() -> Outcome {
    let n = 150;
    let t = 0.5;
    let reps = 40;
    let c0 = LimitLaw::Quartercircle.moments(6).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for nu0 in [0.0, 1.0] {
        let seeds: Vec<Vec<f64>> = (0..5)
            .map(|s| dunkl_moments(n, nu0, t, 1, 800 + s).remove(0))
            .collect();
        let mut spread = 0.0f64;
        for l in [2, 4, 6] {
            let v: Vec<f64> = seeds.iter().map(|m| m[l]).collect();
            let hi = v.iter().cloned().fold(f64::MIN, f64::max);
            let lo = v.iter().cloned().fold(f64::MAX, f64::min);
            spread = spread.max(hi - lo);
        }
        let res = dunkl_moments(n, nu0, t, reps, 81);
        let stats = sde_table(&res, 6);
        let lim = limit_moments_dunkl(
            &MomentSequence::new(c0.clone(), MomentScaling::Dunkl, 0.0),
            nu0,
            t,
            6,
        );
        let mut worst = 0.0f64;
        for l in [1, 3, 5] {
            let (m, se) = stats[l];
            let band = SDE_SIGMAS * se + ODD_FINITE_N / n as f64;
            worst = worst.max((m - lim.get(l)).abs() / band);
            if (m - lim.get(l)).abs() > band {
                ok = false;
            }
        }
        if spread > EVEN_SPREAD {
            ok = false;
        }
        notes.push(format!(
            "nu0={nu0}: even spread {spread:.1e}, odd deviation {worst:.2} bands"
        ));
    }
    outcome(ok, notes.join("; "))
}

// ---- 9 ----
fn quartercircle_closed_form() -> Outcome {
    let mut worst_mass = 0.0f64;
    for t in [0.1, 1.0, 10.0, 100.0] {
        let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
        let k = 20000;
        let mut s = 0.0;
        for i in 0..k {
            let th = PI * (i as f64 + 0.5) / k as f64;
            s += quartercircle_dunkl_density(t, -r * th.cos()) * r * th.sin();
        }
        worst_mass = worst_mass.max((s * PI / k as f64 - 1.0).abs());
    }
    let mut worst_even = 0.0f64;
    for t in [0.1, 1.0, 10.0] {
        let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
        for i in 0..200 {
            let x = -r + 2.0 * r * (i as f64 + 0.5) / 200.0;
            let e = 0.5 * (quartercircle_dunkl_density(t, x) + quartercircle_dunkl_density(t, -x));
            worst_even = worst_even.max((e - semicircle_density(r, x)).abs());
        }
    }
    let mut worst_inv = 0.0f64;
    for t in [0.5, 1.0] {
        let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
        for i in 0..100 {
            let x = 0.9 * (-r + 2.0 * r * (i as f64 + 0.5) / 100.0);
            let g =
                dunkl_limit_stieltjes(&LimitLaw::Quartercircle, 0.0, t, C64::new(x, 1e-9)).unwrap();
            worst_inv = worst_inv.max((-g.im / PI - quartercircle_dunkl_density(t, x)).abs());
        }
    }
    let n = 150;
    let t = 0.5;
    let x0 = quartercircle_start(n, Chamber::FullSpace);
    let m = MultiplicityB::frozen(0.0).unwrap();
    let opts = SdeOptions::default();
    let pooled: Vec<f64> = run_replicas(91, 300, |s| {
        let p = simulate_dunkl_b(&x0, m, t, &opts, s, true)?;
        Ok(p.last()
            .coords()
            .iter()
            .map(|v| v / (n as f64).sqrt())
            .collect::<Vec<f64>>())
    })
    .unwrap()
    .concat();
    let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
    let k = 20000;
    let mut xs = Vec::with_capacity(k + 1);
    let mut cum = Vec::with_capacity(k + 1);
    let mut acc = 0.0;
    for i in 0..=k {
        let th = PI * (1.0 - i as f64 / k as f64);
        let x = r * th.cos();
        if i > 0 {
            let tm = PI * (1.0 - (i as f64 - 0.5) / k as f64);
            acc += quartercircle_dunkl_density(t, r * tm.cos()) * r * tm.sin() * PI / k as f64;
        }
        xs.push(x);
        cum.push(acc);
    }
    let cdf = |x: f64| {
        let j = xs.partition_point(|v| *v <= x);
        if j == 0 {
            0.0
        } else if j > k {
            1.0
        } else {
            let w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
            cum[j - 1] + w * (cum[j] - cum[j - 1])
        }
    };
    let d = ks(&pooled, cdf);
    outcome(
        worst_mass <= DENSITY_MASS && worst_even <= EVEN_PART && worst_inv <= INVERSION && d <= KS_DUNKL,
        format!(
            "mass error {worst_mass:.1e}, even part {worst_even:.1e}, inversion {worst_inv:.1e}, pooled KS {d:.4}"
        ),
    )
}

// ---- 10 ----
fn pde_suite() -> Outcome {
    let h = 1e-4;
    let far: Vec<C64> = [4.0, 6.0]
        .iter()
        .flat_map(|&r| (1..6).map(move |j| C64::from_polar(r, PI * j as f64 / 6.0)))
        .collect();
    let near: Vec<C64> = (1..6)
        .map(|j| C64::from_polar(0.05, PI * j as f64 / 6.0))
        .collect();
    let pts = |zs: &[C64]| -> Vec<(f64, C64)> {
        [0.5, 1.0]
            .iter()
            .flat_map(|&t| zs.iter().map(move |&z| (t, z)))
            .collect()
    };
    let starts = [
        LimitLaw::PointMass(0.0),
        LimitLaw::Quartercircle,
        two_atom(),
    ];
    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut worst = |name: &str, r: ResidualStats| {
        if let Some(row) = rows.iter_mut().find(|x| x.0 == name) {
            row.1 = row.1.max(r.max);
        } else {
            rows.push((name.to_string(), r.max));
        }
    };
    let order = 40;
    for mu0 in &starts {
        let g = |t: f64, z: C64| limit_law_a(mu0.clone(), t)?.stieltjes(z);
        worst(
            "burgers",
            pde_residual(PdeKind::BurgersA, g, &pts(&far), h).unwrap(),
        );
        let r = |t: f64, z: C64| {
            let m = limit_law_a(mu0.clone(), t)?.moments(order)?;
            Ok(r_transform_series(&moments_to_cumulants(&m, order), z))
        };
        worst(
            "r-transform-a",
            pde_residual(PdeKind::RTransformA, r, &pts(&near), h).unwrap(),
        );
        for nu0 in [0.0, 1.0] {
            let g = |t: f64, z: C64| limit_law_b(mu0.clone(), nu0, t)?.stieltjes_squared(z);
            worst(
                "transport-b",
                pde_residual(PdeKind::TransportB { nu0 }, g, &pts(&far), h).unwrap(),
            );
            let r = |t: f64, z: C64| {
                let m = limit_law_b(mu0.clone(), nu0, t)?.squared_moments(order)?;
                Ok(r_transform_series(&moments_to_cumulants(&m, order), z))
            };
            worst(
                "r-transform-b",
                pde_residual(PdeKind::RTransformB { nu0 }, r, &pts(&near), h).unwrap(),
            );
            let g = |t: f64, z: C64| dunkl_limit_stieltjes(mu0, nu0, t, z);
            worst(
                "dunkl-even",
                pde_residual(PdeKind::DunklEven { nu0 }, g, &pts(&far), h).unwrap(),
            );
            worst(
                "dunkl-odd",
                pde_residual(PdeKind::DunklOdd { nu0 }, g, &pts(&far), h).unwrap(),
            );
        }
    }
    let ok = rows.iter().all(|r| r.1 <= PDE_RESIDUAL);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {:.1e}", r.0, r.1))
        .collect();
    outcome(ok, detail.join(", "))
}

// ---- 11 ----
fn mp_algebra() -> Outcome {
    let order = 12;
    let q = ratio;
    let mut ok = true;
    for (a, b, t) in [
        (q(1, 1), q(2, 1), q(1, 2)),
        (q(1, 3), q(5, 2), q(1, 1)),
        (q(0, 1), q(1, 1), q(3, 1)),
    ] {
        let lhs = free_add(
            &mp_moments(&a, &t, order),
            &mp_moments(&b, &t, order),
            order,
        );
        let rhs = mp_moments(&(a.clone() + b.clone()), &t, order);
        ok &= lhs == rhs;
    }
    let mut cases = 0;
    for nu0 in [q(0, 1), q(1, 1)] {
        for s in [q(1, 2), q(1, 1)] {
            for t in [q(1, 2), q(1, 1)] {
                let one = BigRational::from_integer(1.into());
                let inner_even =
                    sqrt_pushforward_even(&mp_moments(&(nu0.clone() + one.clone()), &t, order));
                let conv = free_add(
                    &semicircle_moments(&s, 2 * order),
                    &inner_even[..=2 * order],
                    2 * order,
                );
                let lhs = free_add(
                    &mp_moments(&nu0, &s, order),
                    &square_pushforward(&conv, order),
                    order,
                );
                let rhs = mp_moments(&(nu0.clone() + one), &(s.clone() + t.clone()), order);
                let (kl, kr) = (
                    moments_to_cumulants(&lhs, order),
                    moments_to_cumulants(&rhs, order),
                );
                ok &= kl == kr;
                cases += 1;
            }
        }
    }
    outcome(
        ok,
        format!("additivity on 3 cases, composite identity on {cases} cases, order {order}, exact"),
    )
}

// ---- 12 ----
fn ou_interchange() -> Outcome {
    let lambda = 1.0;
    let n = 200;
    let x0 = semicircle_start(n, 2.0);
    let opts = SdeOptions::default();
    let mut stream = RngStream::new(0, 0);
    let p = simulate_bessel_ou(
        &x0,
        MultiplicityA::frozen(),
        lambda,
        8.0,
        OuMode::Transform,
        &opts,
        &mut stream,
    )
    .unwrap();
    let direct =
        ou_transform_frozen(System::A, &x0, lambda, 8.0, &FrozenOptions::default()).unwrap();
    let agree = p
        .last()
        .coords()
        .iter()
        .zip(direct.coords())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let atoms: Vec<f64> = p
        .last()
        .coords()
        .iter()
        .map(|v| v / (n as f64).sqrt())
        .collect();
    let d = ks(&atoms, |x| semicircle_cdf((2.0 / lambda).sqrt(), x));

    let n = 50;
    let t = 2.0;
    let reps = 100;
    let x0 = semicircle_start(n, 2.0);
    let k = MultiplicityA::new(1.0).unwrap();
    let opts = SdeOptions {
        dt: 2e-3,
        ..Default::default()
    };
    let run = |mode: OuMode, seed: u64| {
        let res = run_replicas(seed, reps, |s| {
            let p = simulate_bessel_ou(&x0, k, lambda, t, mode, &opts, s)?;
            Ok(raw_moments(p.last().coords(), (n as f64).sqrt(), 4))
        })
        .unwrap();
        sde_table(&res, 4)
    };
    let (a, b) = (run(OuMode::Direct, 121), run(OuMode::Transform, 122));
    let mut worst = 0.0f64;
    for l in 1..=4 {
        let band = SDE_SIGMAS * (a[l].1.powi(2) + b[l].1.powi(2)).sqrt();
        worst = worst.max((a[l].0 - b[l].0).abs() / band);
    }
    outcome(
        d <= KS_OU && worst <= 1.0 && agree <= 1e-8,
        format!(
            "frozen KS {d:.4}, transform vs closed frozen {agree:.1e}, direct vs transform worst {worst:.2} bands (S_2 {:.4}/{:.4})",
            a[2].0, b[2].0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, u64); 12] = [
        ("hermite electrostatic oracle", hermite_oracle, 5),
        ("semicircle limit of Hermite zeros", semicircle_limit, 10),
        ("beta limit of Laguerre zeros", laguerre_limit, 10),
        ("frozen moment identities", frozen_identities, 30),
        ("dual-route limit moments", dual_route, 5),
        ("type A SDE moments and k-independence", sde_a, 300),
        ("type B SDE moments", sde_b, 300),
        ("frozen Dunkl even/odd moments", frozen_dunkl, 180),
        (
            "quartercircle Dunkl closed form",
            quartercircle_closed_form,
            300,
        ),
        ("PDE residuals", pde_suite, 30),
        ("MP algebra", mp_algebra, 1),
        ("OU limit interchange", ou_interchange, 120),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let el = start.elapsed();
        let in_time = el <= Duration::from_secs(*budget);
        let pass = r.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            r.detail,
            el.as_secs_f64(),
            budget
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
