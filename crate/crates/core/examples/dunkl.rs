//! Frozen Dunkl type B process from a quartercircle profile against the
//! closed-form limit density.
use bdlab::freeprob::quartercircle_dunkl_density;
use bdlab::rootsys::{Chamber, ChamberPoint};
use bdlab::stochastic::{simulate_dunkl_b, MultiplicityB, RngStream, SdeOptions};

fn main() -> bdlab::Result<()> {
    let n = 100;
    let t = 0.5;
    let s = (n as f64).sqrt();
    let x0: Vec<f64> = (0..n)
        .map(|i| {
            let p = 1.0 - (i as f64 + 0.5) / n as f64;
            // quartercircle quantile by bisection
            let cdf = |x: f64| {
                (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (2.0 * std::f64::consts::PI)
            };
            let (mut a, mut b) = (0.0, 2.0);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if cdf(m) < p {
                    a = m
                } else {
                    b = m
                }
            }
            s * 0.5 * (a + b)
        })
        .collect();
    let x0 = ChamberPoint::new(x0, Chamber::FullSpace)?;
    let mut stream = RngStream::new(1, 0);
    let p = simulate_dunkl_b(
        &x0,
        MultiplicityB::frozen(0.0)?,
        t,
        &SdeOptions::default(),
        &mut stream,
        true,
    )?;
    let neg = p.last().coords().iter().filter(|v| **v < 0.0).count();
    println!(
        "{} jumps, {neg} of {n} particles negative at t = {t}",
        p.diagnostics.jumps
    );
    let r = 2.0 * (2.0 * t + 1.0f64).sqrt();
    let bins = 8;
    for b in 0..bins {
        let (lo, hi) = (
            -r + 2.0 * r * b as f64 / bins as f64,
            -r + 2.0 * r * (b + 1) as f64 / bins as f64,
        );
        let emp = p
            .last()
            .coords()
            .iter()
            .filter(|v| (lo..hi).contains(&(*v / s)))
            .count() as f64
            / n as f64;
        let mid = 0.5 * (lo + hi);
        println!(
            "[{lo:+.2}, {hi:+.2})  empirical {emp:.3}  limit ~{:.3}",
            quartercircle_dunkl_density(t, mid) * (hi - lo)
        );
    }
    Ok(())
}
