//! Hermite and Laguerre zeros from the electrostatic fixed point.
use bdlab::zeros::{hermite_zeros, laguerre_zeros, DEFAULT_TOL};

fn main() -> bdlab::Result<()> {
    let h = hermite_zeros(8, DEFAULT_TOL)?;
    println!("H_8 zeros (residual {:.1e}):", h.residual);
    for z in &h.zeros {
        println!("  {z:+.12}");
    }
    let l = laguerre_zeros(6, 2.0, DEFAULT_TOL)?;
    println!("L_6^(1) zeros (residual {:.1e}):", l.residual);
    for z in &l.zeros {
        println!("  {z:.12}");
    }
    Ok(())
}
