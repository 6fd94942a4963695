//! Frozen type A trajectory from a semicircle profile; the first two
//! moments evolve linearly.
use bdlab::frozen::{solve_frozen, FrozenOptions, System};
use bdlab::rootsys::{Chamber, ChamberPoint};
use bdlab::zeros::semicircle_quantile;

fn main() -> bdlab::Result<()> {
    let n = 40;
    let s = (n as f64).sqrt();
    let x0: Vec<f64> = (0..n)
        .map(|i| s * semicircle_quantile(2.0, 1.0 - (i as f64 + 0.5) / n as f64))
        .collect();
    let x0 = ChamberPoint::new(x0, Chamber::A)?;
    let times = [0.0, 0.5, 1.0, 2.0];
    let tr = solve_frozen(System::A, &x0, &times, &FrozenOptions::default())?;
    for (t, x) in tr.times.iter().zip(&tr.states) {
        let s2 = x.coords().iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
        println!(
            "t = {t:.1}  S_2 = {s2:.10}  x_max/sqrt(N) = {:.6}",
            x.coords()[0] / s
        );
    }
    Ok(())
}
