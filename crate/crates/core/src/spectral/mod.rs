//! Grid geometry, Fourier calculus, Littlewood-Paley projectors and
//! radial extraction on a periodic 2d grid.

pub mod calculus;
mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod littlewood_paley;
pub mod radial;

pub use calculus::{
    apply_multiplier, gradient, gradient_density, gradient_norm_sq, laplacian, linear_flow,
    weighted_radial_sup, LinearPropagator,
};
pub use field::Field2D;
pub use grid::{make_grid, GridSpec};
pub use io::{read_field, read_field_from, write_field, write_field_to, FIELD_MAGIC};
pub use littlewood_paley::{
    check_frequency, cutoff, lp_project, smooth_step, smooth_step_jet, Band,
};
pub use radial::{radial_average, radial_lift, RadialExtraction, RadialProfile};
