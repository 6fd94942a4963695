use bdlab::freeprob::*;
use bdlab::moments::*;
use num_complex::Complex64 as C64;

fn quarter() -> LimitLaw {
    LimitLaw::Quartercircle
}

#[test]
fn dunkl_series_matches_recurrence() {
    for law in [quarter(), two_atom(), LimitLaw::PointMass(0.7)] {
        let m0 = law.moments(12).unwrap();
        for nu0 in [0.0, 1.0] {
            for t in [0.5, 1.0, 2.0] {
                let a = dunkl_moments_series(&m0, &nu0, &t, 12);
                let b = limit_moments_dunkl(
                    &MomentSequence::new(m0.clone(), MomentScaling::Dunkl, 0.0),
                    nu0,
                    t,
                    12,
                );
                for l in 0..=12 {
                    let tol = 1e-10 * b.values[l].abs().max(1.0);
                    assert!(
                        (a[l] - b.values[l]).abs() < tol,
                        "{law:?} nu0={nu0} t={t} l={l}: {} vs {}",
                        a[l],
                        b.values[l]
                    );
                }
            }
        }
    }
}

#[test]
fn quartercircle_composition_matches_closed_density() {
    for t in [0.1, 0.5, 1.0] {
        let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
        for i in 1..40 {
            let x = -r + 2.0 * r * i as f64 / 40.0;
            let g = dunkl_composition_g(&quarter(), t, C64::new(x, 1e-9)).unwrap();
            let f = -g.im / std::f64::consts::PI;
            let c = quartercircle_dunkl_density(t, x);
            assert!((f - c).abs() < 1e-6, "t={t} x={x}: {f} vs {c}");
        }
    }
}

#[test]
fn characteristic_matches_composition() {
    for z in [C64::new(0.5, 0.4), C64::new(-1.2, 0.2), C64::new(3.0, 1.0)] {
        let a = dunkl_composition_g(&quarter(), 0.5, z).unwrap();
        let b = dunkl_characteristic_g(&quarter(), 0.0, 0.5, z).unwrap();
        assert!((a - b).norm() < 1e-9, "{z}: {a} vs {b}");
    }
}

#[test]
fn dunkl_nu1_characteristic_matches_series() {
    let law = dunkl_b(quarter(), 1.0, 0.5).unwrap();
    let m = law.moments(60).unwrap();
    for z in [C64::new(9.0, 3.0), C64::new(-7.0, 6.0)] {
        let a = law.stieltjes(z).unwrap();
        let b = transforms::series_g(&m, z).unwrap();
        assert!((a - b).norm() < 1e-10, "{z}: {a} vs {b}");
    }
}
