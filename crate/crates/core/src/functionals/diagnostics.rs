use serde::{Deserialize, Serialize};

use super::{
    concentration_scale, exterior_kinetic_from, make_weights, virial_a_from, virial_rate_from,
    WeightPair,
};
use crate::error::Result;
use crate::spectral::{gradient, weighted_radial_sup, Field2D};

/// Column order of the diagnostics CSV.
pub const CSV_HEADER: [&str; 15] = [
    "t",
    "mass",
    "energy",
    "kinetic",
    "l4_4",
    "l6_6",
    "linf",
    "weighted_sup",
    "gn_ratio",
    "virial_A",
    "virial_rate",
    "lambda",
    "ext_kin_R1",
    "ext_kin_R2",
    "l4tx_accum",
];

/// Snapshot of monitored quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    /// `(1/2) ||grad u||_2^2`
    pub kinetic: f64,
    pub l4_4: f64,
    pub l6_6: f64,
    pub linf: f64,
    pub weighted_sup: f64,
    pub gn_ratio: f64,
    pub virial_a: f64,
    pub virial_rate: f64,
    pub lambda: f64,
    pub ext_kin_r1: f64,
    pub ext_kin_r2: f64,
    pub l4tx_accum: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.mass,
            self.energy,
            self.kinetic,
            self.l4_4,
            self.l6_6,
            self.linf,
            self.weighted_sup,
            self.gn_ratio,
            self.virial_a,
            self.virial_rate,
            self.lambda,
            self.ext_kin_r1,
            self.ext_kin_r2,
            self.l4tx_accum,
        ]
    }

    pub fn csv_header() -> String {
        CSV_HEADER.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(line: &str) -> Option<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse().ok())
            .collect::<Option<_>>()?;
        if v.len() != 15 {
            return None;
        }
        Some(Self {
            t: v[0],
            mass: v[1],
            energy: v[2],
            kinetic: v[3],
            l4_4: v[4],
            l6_6: v[5],
            linf: v[6],
            weighted_sup: v[7],
            gn_ratio: v[8],
            virial_a: v[9],
            virial_rate: v[10],
            lambda: v[11],
            ext_kin_r1: v[12],
            ext_kin_r2: v[13],
            l4tx_accum: v[14],
        })
    }
}

/// What a [`Monitor`] measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// `R1` (also the virial radius) and `R2`.
    pub radii: [f64; 2],
    /// Ground-state mass used by the Gagliardo-Nirenberg ratio.
    pub mass_q: f64,
    /// Exterior mass fraction for the concentration scale.
    pub eps: f64,
}

/// Computes [`DiagnosticsRecord`]s on a fixed grid, reusing one gradient per
/// snapshot.
#[derive(Debug, Clone)]
pub struct Monitor {
    config: MonitorConfig,
    weights: WeightPair,
}

impl Monitor {
    pub fn new(grid: &crate::spectral::GridSpec, config: MonitorConfig) -> Result<Self> {
        let weights = make_weights(grid, config.radii[0])?;
        Ok(Self { config, weights })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    pub fn record(&self, t: f64, u: &Field2D, l4tx_accum: f64) -> DiagnosticsRecord {
        let (dx, dy) = gradient(u);
        let grad2: Vec<f64> = dx
            .values()
            .iter()
            .zip(dy.values())
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect();
        let grid = u.grid();
        let kinetic = 0.5 * grid.cell_area() * crate::numerics::pairwise_sum(&grad2);
        let mass = super::mass(u);
        let l4_4 = u.lp_pow(4);
        let l6_6 = u.lp_pow(6);
        let lambda = concentration_scale(u, self.config.eps)
            .map(|c| c.lambda)
            .unwrap_or(1.0);
        DiagnosticsRecord {
            t,
            mass,
            energy: kinetic - 0.25 * l4_4 + l6_6 / 6.0,
            kinetic,
            l4_4,
            l6_6,
            linf: u.linf(),
            weighted_sup: weighted_radial_sup(u),
            gn_ratio: if mass > 0.0 && kinetic > 0.0 {
                l4_4 * self.config.mass_q / (4.0 * mass * kinetic)
            } else {
                0.0
            },
            virial_a: virial_a_from(u, &dx, &dy, &self.weights),
            virial_rate: virial_rate_from(u, &dx, &dy, &self.weights),
            lambda,
            ext_kin_r1: exterior_kinetic_from(u, &grad2, self.config.radii[0]),
            ext_kin_r2: exterior_kinetic_from(u, &grad2, self.config.radii[1]),
            l4tx_accum,
        }
    }
}
