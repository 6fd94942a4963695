//! Dyson Brownian motion (type A Bessel process) from the origin, compared
//! with the Catalan moments of the semicircle limit.
use bdlab::rootsys::{Chamber, ChamberPoint};
use bdlab::stochastic::{run_replicas, simulate_bessel_a, MultiplicityA, SdeOptions};

fn main() -> bdlab::Result<()> {
    let n = 50;
    let k = MultiplicityA::new(1.0)?;
    let x0 = ChamberPoint::zero(n, Chamber::A);
    let opts = SdeOptions::default();
    let s4 = run_replicas(1, 20, |s| {
        let p = simulate_bessel_a(&x0, k, 1.0, &opts, s)?;
        Ok(p.last()
            .coords()
            .iter()
            .map(|v| (v / (n as f64).sqrt()).powi(4))
            .sum::<f64>()
            / n as f64)
    })?;
    let mean = s4.iter().sum::<f64>() / s4.len() as f64;
    println!(
        "mean S_4(1) over {} replicas: {mean:.4} (limit 2)",
        s4.len()
    );
    Ok(())
}
