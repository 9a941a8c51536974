//! Grids, parity-aware fields and spectral operators on the periodic slab
//! surrogate `[0, L)^2 x (0, 1)`.
//!
//! Horizontally the fields are Fourier series with `nx x ny` modes. In the
//! vertical direction an even field is a cosine series `sum a_k cos(k pi z)` and
//! an odd field a sine series `sum b_k sin(k pi z)`, sampled on the
//! `nz` equispaced collocation points `z_j = j / (nz - 1)` (DCT-I / DST-I).
//! Even extension of `s, V_h` and odd extension of `V_3` across `z = 0, 1`
//! realise the slip condition by symmetry.

mod field;
mod grid;
mod ops;
mod transform;

pub use field::{integrate_samples, Parity, ParityField, SpectralField};
pub use grid::{make_grid, Grid};
pub use ops::{
    curl_h, dealias, div_h, embed_constant_in_z, helmholtz_project_h, invert_helmholtz_h,
    laplacian_h, perp_grad, spectral_derivative, vertical_average, Axis,
};
pub use transform::{transform_forward, transform_inverse, transform_inverse_complex};
