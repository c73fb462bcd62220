use num_complex::Complex64;

use super::config::{Generator, InitialConfig, MassTarget};
use crate::error::{Error, Result};
use crate::functionals::mass;
use crate::ground_state::{petviashvili, reference_mass};
use crate::spectral::{read_field, Field2D, GridSpec};

pub const GROUND_STATE_TOL: f64 = 1e-10;
pub const GROUND_STATE_MAX_ITER: usize = 500;

/// Initial field together with the ground-state mass it is measured against.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub field: Field2D,
    pub mass_q: f64,
    pub warnings: Vec<String>,
}

fn gaussian(grid: GridSpec, a: f64, sigma: f64, c: f64) -> Field2D {
    Field2D::from_fn(grid, |x, y| {
        let r2 = x * x + y * y;
        Complex64::from_polar(a * (-r2 / (2.0 * sigma * sigma)).exp(), c * r2)
    })
}

/// Builds the initial data on `grid`. Ground-state generators solve for `Q`
/// on the same grid and measure masses against it; otherwise `M(Q)` comes
/// from a reference solve.
pub fn generate(cfg: &InitialConfig, grid: GridSpec) -> Result<InitialData> {
    let mut warnings = Vec::new();
    let (mut field, mass_q) = if cfg.generator.uses_ground_state() {
        let gs = petviashvili(grid, GROUND_STATE_TOL, GROUND_STATE_MAX_ITER)?;
        warnings.extend(gs.warnings.iter().cloned());
        let s = match cfg.generator {
            Generator::ScaledGroundState { s } => s,
            _ => 1.0,
        };
        (gs.q.scale(s), gs.mass_q)
    } else {
        let field = match &cfg.generator {
            Generator::Gaussian { a, sigma } => gaussian(grid, *a, *sigma, 0.0),
            Generator::ChirpedGaussian { a, sigma, c } => gaussian(grid, *a, *sigma, *c),
            Generator::File { path } => {
                let f = read_field(path)?;
                if f.grid() != &grid {
                    return Err(Error::GridMismatch);
                }
                f
            }
            _ => unreachable!(),
        };
        (field, reference_mass())
    };
    if let Some(bump) = cfg.perturbation {
        field = field.add(&gaussian(grid, bump.a, bump.sigma, 0.0))?;
    }
    if let Some(target) = cfg.normalize_mass {
        let target = match target {
            MassTarget::GroundState => mass_q,
            MassTarget::FractionOfGroundState(f) => f * mass_q,
            MassTarget::Value(v) => v,
        };
        field = normalize_mass(&field, target)?;
    }
    Ok(InitialData {
        field,
        mass_q,
        warnings,
    })
}

/// Rescales the amplitude so that the grid mass equals `target`.
pub fn normalize_mass(u: &Field2D, target: f64) -> Result<Field2D> {
    let m = mass(u);
    if m == 0.0 {
        return Err(Error::Degenerate(
            "cannot normalize the mass of the zero field",
        ));
    }
    Ok(u.scale((target / m).sqrt()))
}
