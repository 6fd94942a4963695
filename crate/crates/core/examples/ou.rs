//! Frozen Ornstein-Uhlenbeck type A system relaxing to sc(sqrt(2/lambda))
//! from a wide semicircle start.
use bdlab::frozen::{ou_transform_frozen, FrozenOptions, System};
use bdlab::rootsys::{Chamber, ChamberPoint};
use bdlab::zeros::semicircle_quantile;

fn main() -> bdlab::Result<()> {
    let n = 100;
    let lambda = 1.0;
    let s = (n as f64).sqrt();
    let x0: Vec<f64> = (0..n)
        .map(|i| s * semicircle_quantile(4.0, 1.0 - (i as f64 + 0.5) / n as f64))
        .collect();
    let x0 = ChamberPoint::new(x0, Chamber::A)?;
    for t in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let x = ou_transform_frozen(System::A, &x0, lambda, t, &FrozenOptions::default())?;
        let s2 = x.coords().iter().map(|v| v * v).sum::<f64>() / (n * n) as f64;
        println!(
            "t = {t:3.1}  S_2 = {s2:.6}  (stationary {:.6})",
            (1.0 - 1.0 / n as f64) / (2.0 * lambda)
        );
    }
    Ok(())
}
