//! Free additive convolution, Stieltjes transforms and the composite limit
//! laws of the type A, type B and Dunkl systems.

pub mod cumulants;
pub mod density;
pub mod dunkl;
pub mod laws;
pub mod pde;
pub mod transforms;

pub use cumulants::{
    cumulants_to_moments, even_part, free_add, moments_to_cumulants, mp_cumulants, mp_moments,
    semicircle_moments, sqrt_pushforward_even, square_pushforward,
};
pub use density::{
    density_on_grid, law_density, stieltjes_invert, SpectralDensity, TabulatedCdf, DEFAULT_EPS,
};
pub use dunkl::{
    dunkl_characteristic_g, dunkl_composition_g, dunkl_limit_stieltjes, dunkl_moments_series,
    quartercircle_dunkl_density,
};
pub use laws::{
    dunkl_b, limit_law_a, limit_law_b, marchenko_pastur, parse_law, semicircle, two_atom, LimitLaw,
};
pub use pde::{pde_residual, r_transform_series, PdeKind, ResidualStats};
