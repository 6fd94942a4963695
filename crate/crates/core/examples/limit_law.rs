//! Density of the type B limit law sqrt(MP(1, t) ⊞ (sc(2 sqrt t) ⊞ μ_even)²)
//! by Stieltjes inversion.
use bdlab::freeprob::{density_on_grid, limit_law_b, LimitLaw};

fn main() -> bdlab::Result<()> {
    let law = limit_law_b(LimitLaw::Quartercircle, 1.0, 0.5)?;
    let (lo, hi) = law.support();
    let grid: Vec<f64> = (1..20).map(|i| lo + (hi - lo) * i as f64 / 20.0).collect();
    let d = density_on_grid(&law, &grid)?;
    println!("support [{lo:.4}, {hi:.4}]");
    for (x, f) in d.grid.iter().zip(&d.values) {
        println!("{x:.4}  {f:.6}");
    }
    Ok(())
}
