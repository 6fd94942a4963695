use bdlab::freeprob::*;
use bdlab::frozen::{drift_a, drift_b, solve_frozen, FrozenOptions, System};
use bdlab::harness::{EmpiricalMeasure, Scaling};
use bdlab::moments::*;
use bdlab::rootsys::*;
use bdlab::stochastic::dunkl_jump_rates;
use bdlab::zeros::*;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6).prop_map(|(p, q)| ratio(p, q))
}

/// Moment sequences of small atomic laws with rational atoms and weights.
fn atomic_moments(order: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-6i64..=6, 1i64..=3, 1i64..=4), 1..4).prop_map(move |atoms| {
        let total: i64 = atoms.iter().map(|a| a.2).sum();
        let mut m = vec![ratio(0, 1); order + 1];
        for (p, q, w) in atoms {
            let x = ratio(p, q);
            let mut pow = ratio(1, 1);
            for v in m.iter_mut() {
                *v += pow.clone() * ratio(w, total);
                pow *= x.clone();
            }
        }
        m
    })
}

fn coords(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn reflection(n: usize) -> impl Strategy<Value = Reflection> {
    (0..3u8, 0..n, 0..n).prop_filter_map("distinct pair", move |(k, i, j)| match k {
        0 => Some(Reflection::SignFlip(i)),
        1 if i != j => Some(Reflection::Swap(i, j)),
        2 if i != j => Some(Reflection::SignSwap(i, j)),
        _ => None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn projection_idempotent(x in coords(1..12)) {
        for ch in [Chamber::A, Chamber::B, Chamber::FullSpace] {
            let p = project_to_chamber(&x, ch).unwrap();
            let q = project_to_chamber(p.coords(), ch).unwrap();
            prop_assert_eq!(p, q);
        }
    }

    #[test]
    fn b_projection_is_group_invariant(
        (x, rs) in (2usize..10).prop_flat_map(|n| (coords(n..n + 1), prop::collection::vec(reflection(n), 0..8)))
    ) {
        let mut y = x.clone();
        for r in &rs {
            r.apply_in_place(&mut y);
        }
        prop_assert_eq!(project_to_chamber(&x, Chamber::B).unwrap(), project_to_chamber(&y, Chamber::B).unwrap());
    }

    #[test]
    fn fullspace_and_a_measures_agree(x in coords(1..12)) {
        let a = project_to_chamber(&x, Chamber::A).unwrap();
        let mut m1 = EmpiricalMeasure::from_positions(&x, Scaling::SqrtN).atoms;
        let m2 = EmpiricalMeasure::from_positions(a.coords(), Scaling::SqrtN).atoms;
        m1.sort_by(|p, q| q.partial_cmp(p).unwrap());
        prop_assert_eq!(m1, m2);
    }

    #[test]
    fn jump_rates_symmetric_under_negation(x in coords(1..8), nu in 0.0f64..3.0) {
        let p = ChamberPoint::new(x.clone(), Chamber::FullSpace).unwrap();
        let q = ChamberPoint::new(x.iter().map(|v| -v).collect(), Chamber::FullSpace).unwrap();
        match (dunkl_jump_rates(&p, nu), dunkl_jump_rates(&q, nu)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn free_add_commutative_associative(
        a in atomic_moments(8), b in atomic_moments(8), c in atomic_moments(8), order in 1usize..=8
    ) {
        prop_assert_eq!(free_add(&a, &b, order), free_add(&b, &a, order));
        let l = free_add(&free_add(&a, &b, order), &c, order);
        let r = free_add(&a, &free_add(&b, &c, order), order);
        prop_assert_eq!(l, r);
    }

    #[test]
    fn cumulant_round_trip(mut k in prop::collection::vec(rational(), 1..12)) {
        k.insert(0, ratio(0, 1));
        let order = k.len() - 1;
        let m = cumulants_to_moments(&k, order);
        let back = moments_to_cumulants(&m, order);
        prop_assert_eq!(&back[1..], &k[1..]);
    }

    #[test]
    fn mp_additivity(a in 0i64..8, b in 0i64..8, t in 1i64..6) {
        let (a, b, t) = (ratio(a, 2), ratio(b, 3), ratio(t, 2));
        let order = 10;
        let lhs = free_add(&mp_moments(&a, &t, order), &mp_moments(&b, &t, order), order);
        prop_assert_eq!(lhs, mp_moments(&(a + b), &t, order));
    }

    #[test]
    fn limit_a_degree_bound(m in atomic_moments(10)) {
        for (l, p) in moment_polys_a(&m, 10).iter().enumerate() {
            prop_assert!(p.degree().unwrap_or(0) <= l / 2);
        }
    }

    #[test]
    fn dunkl_even_chain_is_b_chain_at_double_time(m in atomic_moments(10), nu0 in 0i64..4, t in 0i64..6) {
        let (nu0, t) = (ratio(nu0, 2), ratio(t, 3));
        let sq: Vec<BigRational> = (0..=5).map(|l| m[2 * l].clone()).collect();
        let d = moment_polys_dunkl(&m, &nu0, 10);
        let b = moment_polys_b(&sq, &nu0, 5);
        let two_t = t.clone() * ratio(2, 1);
        for l in 0..=5 {
            prop_assert_eq!(d[2 * l].eval(&t), b[l].eval(&two_t));
        }
    }

    #[test]
    fn herglotz_sign(re in -6.0f64..6.0, im in 0.01f64..5.0, which in 0usize..7) {
        let law = match which {
            0 => semicircle(2.0).unwrap(),
            1 => LimitLaw::Quartercircle,
            2 => marchenko_pastur(1.5, 0.7).unwrap(),
            3 => limit_law_a(two_atom(), 0.5).unwrap(),
            4 => limit_law_b(LimitLaw::Quartercircle, 1.0, 0.5).unwrap(),
            5 => dunkl_b(LimitLaw::Quartercircle, 0.0, 0.5).unwrap(),
            _ => dunkl_b(two_atom(), 1.0, 0.3).unwrap(),
        };
        let z = C64::new(re, im);
        let g = if which == 4 { law.stieltjes_squared(z) } else { law.stieltjes(z) }.unwrap();
        prop_assert!(g.im < 0.0, "{law:?} at {re}+{im}i: {g}");
    }
}

#[test]
fn zero_sums_match_vieta() {
    for n in [1, 5, 20, 80] {
        let h = hermite_zeros(n, DEFAULT_TOL).unwrap();
        assert!(h.residual <= DEFAULT_TOL * (2.0 * n as f64).sqrt().max(1.0));
        assert!(h.zeros.iter().sum::<f64>().abs() < 1e-9 * (n as f64));
        for nu in [0.5, 1.0, 3.0] {
            let z = laguerre_zeros(n, nu, DEFAULT_TOL).unwrap().zeros;
            let want = (n as f64) * (n as f64 + nu - 1.0);
            assert!(
                (z.iter().sum::<f64>() - want).abs() < 1e-9 * want,
                "n={n} nu={nu}"
            );
        }
    }
}

#[test]
fn profiles_solve_the_ode() {
    let (c, t, h) = (0.7, 0.4, 1e-5);
    let n = 9;
    let p = |t: f64| profile_solution_a(n, c, t).unwrap();
    let d = drift_a(&p(t)).unwrap();
    for i in 0..n {
        let fd = (p(t + h).coords()[i] - p(t - h).coords()[i]) / (2.0 * h);
        assert!((fd - d[i]).abs() < 1e-6);
    }
    let nu = 2.5;
    let p = |t: f64| profile_solution_b(n, nu, c, t).unwrap();
    let d = drift_b(&p(t), nu).unwrap();
    for i in 0..n {
        let fd = (p(t + h).coords()[i] - p(t - h).coords()[i]) / (2.0 * h);
        assert!((fd - d[i]).abs() < 1e-6);
    }
}

#[test]
fn frozen_trajectories_keep_profiles_and_order() {
    let n = 12;
    let c = 1.3;
    let times: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let opts = FrozenOptions::default();
    let x0 = profile_solution_a(n, c, 0.0).unwrap();
    let tr = solve_frozen(System::A, &x0, &times, &opts).unwrap();
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let want = profile_solution_a(n, c, *t).unwrap();
        for (a, b) in s.coords().iter().zip(want.coords()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        assert!(s.coords().windows(2).all(|w| w[0] > w[1]));
    }
    let nu = 1.5;
    let x0 = profile_solution_b(n, nu, c, 0.0).unwrap();
    let tr = solve_frozen(System::B { nu }, &x0, &times, &opts).unwrap();
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let want = profile_solution_b(n, nu, c, *t).unwrap();
        for (a, b) in s.coords().iter().zip(want.coords()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        assert!(s.coords().windows(2).all(|w| w[0] > w[1]) && s.coords()[n - 1] > 0.0);
    }
}

#[test]
fn mp_density_matches_beta_law() {
    // z/(4N) scaling of MP(1, 1/2) on the squared side: y = 2x
    let mp = marchenko_pastur(1.0, 0.5).unwrap();
    for i in 1..100 {
        let x = i as f64 / 100.0;
        let f = 2.0 * mp.density(2.0 * x).unwrap();
        let beta = (2.0 / std::f64::consts::PI) * x.powf(-0.5) * (1.0 - x).sqrt();
        assert!((f - beta).abs() < 1e-10, "x={x}: {f} vs {beta}");
    }
}

#[test]
fn limit_laws_match_recurrences() {
    let order = 12;
    for mu0 in [
        LimitLaw::Quartercircle,
        two_atom(),
        LimitLaw::PointMass(0.0),
    ] {
        let m0 = mu0.moments(2 * order).unwrap();
        for t in [0.5, 2.0] {
            let law = limit_law_a(mu0.clone(), t).unwrap().moments(order).unwrap();
            let rec = limit_moments_a(
                &MomentSequence::new(m0[..=order].to_vec(), MomentScaling::A, 0.0),
                t,
                order,
            );
            for l in 0..=order {
                assert!((law[l] - rec.values[l]).abs() <= 1e-10 * rec.values[l].abs().max(1.0));
            }
            for nu0 in [0.0, 1.0] {
                let law = limit_law_b(mu0.clone(), nu0, t)
                    .unwrap()
                    .squared_moments(order)
                    .unwrap();
                let sq: Vec<f64> = (0..=order).map(|l| m0[2 * l]).collect();
                let rec = limit_moments_b(
                    &MomentSequence::new(sq, MomentScaling::Bsq, 0.0),
                    nu0,
                    t,
                    order,
                );
                for l in 0..=order {
                    assert!((law[l] - rec.values[l]).abs() <= 1e-10 * rec.values[l].abs().max(1.0));
                }
            }
        }
    }
}
