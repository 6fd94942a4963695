//! Finite-difference residuals of the transport equations satisfied by
//! the limit Stieltjes and R-transforms.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PdeKind {
    /// G_t = -G G_z
    BurgersA,
    /// G_t = -ν0 G_z - 2 z G_z G - G²
    TransportB { nu0: f64 },
    /// G_t = ν0 (G/z² - G_z/z) - 2 G G_z for the even part
    DunklEven { nu0: f64 },
    /// G^odd_t = -(ν0/z + 2 G^even) G^odd_z
    DunklOdd { nu0: f64 },
    /// R_t = z
    RTransformA,
    /// R_t = ν0 + 1 + 2 z R + z² R_z
    RTransformB { nu0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

/// `eval(t, z)` is G(t, z) (full transform for the Dunkl kinds, R(t, z)
/// for the R-transform kinds); derivatives are central differences with
/// step `h` in both t and z.
pub fn pde_residual<F>(
    kind: PdeKind,
    eval: F,
    points: &[(f64, C64)],
    h: f64,
) -> Result<ResidualStats>
where
    F: Fn(f64, C64) -> Result<C64>,
{
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for &(t, z) in points {
        let r = match kind {
            PdeKind::DunklEven { .. } | PdeKind::DunklOdd { .. } => {
                let even =
                    |t: f64, z: C64| -> Result<C64> { Ok(0.5 * (eval(t, z)? - eval(t, -z)?)) };
                let odd =
                    |t: f64, z: C64| -> Result<C64> { Ok(0.5 * (eval(t, z)? + eval(t, -z)?)) };
                let nu0 = match kind {
                    PdeKind::DunklEven { nu0 } | PdeKind::DunklOdd { nu0 } => nu0,
                    _ => unreachable!(),
                };
                let ge = even(t, z)?;
                let ge_z = (even(t, z + h)? - even(t, z - h)?) / (2.0 * h);
                if matches!(kind, PdeKind::DunklEven { .. }) {
                    let ge_t = (even(t + h, z)? - even(t - h, z)?) / (2.0 * h);
                    ge_t - nu0 * (ge / (z * z) - ge_z / z) + 2.0 * ge * ge_z
                } else {
                    let go_t = (odd(t + h, z)? - odd(t - h, z)?) / (2.0 * h);
                    let go_z = (odd(t, z + h)? - odd(t, z - h)?) / (2.0 * h);
                    go_t + (nu0 / z + 2.0 * ge) * go_z
                }
            }
            _ => {
                let g = eval(t, z)?;
                let g_t = (eval(t + h, z)? - eval(t - h, z)?) / (2.0 * h);
                let g_z = (eval(t, z + h)? - eval(t, z - h)?) / (2.0 * h);
                match kind {
                    PdeKind::BurgersA => g_t + g * g_z,
                    PdeKind::TransportB { nu0 } => g_t + nu0 * g_z + 2.0 * z * g_z * g + g * g,
                    PdeKind::RTransformA => g_t - z,
                    PdeKind::RTransformB { nu0 } => g_t - (nu0 + 1.0 + 2.0 * z * g + z * z * g_z),
                    _ => unreachable!(),
                }
            }
        }
        .norm();
        max = max.max(r);
        sum += r;
    }
    Ok(ResidualStats {
        max,
        mean: if points.is_empty() {
            0.0
        } else {
            sum / points.len() as f64
        },
        samples: points.len(),
    })
}

/// R(z) = sum_{n < len} k_{n+1} z^n from free cumulants k (k[0] unused).
pub fn r_transform_series(k: &[f64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for kn in k.iter().skip(1).rev() {
        acc = acc * z + kn;
    }
    acc
}
