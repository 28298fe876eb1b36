//! Finite-difference calculus on `R^{4n}` grids and the radial reduction.

pub mod forms;
pub mod grid;
pub mod mollify;
pub mod radial;
pub mod stencil;

pub use forms::{baston, d0, d1, d_alpha, gamma, nabla, FormField, TwoFormField};
pub use grid::{GridField, GridSpec, SubBox, INTERIOR_MARGIN};
pub use mollify::mollify;
pub use radial::{
    ball_volume, density_constant, density_from_eigenvalues, integrate, pairwise_sum, radial_boundary_flux_mass,
    radial_density, radial_eigenvalues, radial_mixed_density, radial_total_mass, shell_volumes, sphere_area,
    RadialProfile,
};
pub use stencil::{baston_at, second_partials, second_partials_at, BastonTable, NablaTable};
