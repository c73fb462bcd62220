use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inout::MismatchKind;
use crate::propagator::AbsorberConfig;
use crate::spectral::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Threshold,
    Subthreshold,
    Supermass,
    VirialScan,
    Evacuation,
    Localization,
    FreqDecay,
    Inout,
    Mismatch,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Threshold => "threshold",
            Scenario::Subthreshold => "subthreshold",
            Scenario::Supermass => "supermass",
            Scenario::VirialScan => "virial-scan",
            Scenario::Evacuation => "evacuation",
            Scenario::Localization => "localization",
            Scenario::FreqDecay => "freq-decay",
            Scenario::Inout => "inout",
            Scenario::Mismatch => "mismatch",
        }
    }

    /// Whether the scenario integrates the equation.
    pub fn evolves(self) -> bool {
        !matches!(self, Scenario::Inout | Scenario::Mismatch)
    }
}

/// Named initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum Generator {
    /// `Q` computed on the run grid.
    GroundState,
    /// `s Q`.
    ScaledGroundState { s: f64 },
    /// `a exp(-|x|^2 / (2 sigma^2))`.
    Gaussian { a: f64, sigma: f64 },
    /// `a exp(-|x|^2 / (2 sigma^2)) exp(i c |x|^2)`.
    ChirpedGaussian { a: f64, sigma: f64, c: f64 },
    /// A field file on the run grid.
    File { path: PathBuf },
}

impl Generator {
    pub fn uses_ground_state(&self) -> bool {
        matches!(
            self,
            Generator::GroundState | Generator::ScaledGroundState { .. }
        )
    }
}

/// Additive Gaussian `a exp(-|x|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub a: f64,
    pub sigma: f64,
}

/// Target for exact amplitude rescaling of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassTarget {
    /// `M(Q)`.
    GroundState,
    /// `f M(Q)`.
    FractionOfGroundState(f64),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    #[serde(flatten)]
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Bump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize_mass: Option<MassTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AbsorberSetting {
    Switch(bool),
    Custom(AbsorberConfig),
}

impl AbsorberSetting {
    pub fn config(&self) -> Option<AbsorberConfig> {
        match self {
            AbsorberSetting::Switch(true) => Some(AbsorberConfig::default()),
            AbsorberSetting::Switch(false) => None,
            AbsorberSetting::Custom(c) => Some(*c),
        }
    }
}

impl Default for AbsorberSetting {
    fn default() -> Self {
        AbsorberSetting::Switch(false)
    }
}

fn default_radii() -> [f64; 2] {
    [5.0, 10.0]
}
fn default_eps() -> f64 {
    0.01
}
fn default_window_start() -> f64 {
    2.5
}
fn default_morawetz_radii() -> Vec<f64> {
    vec![5.0, 10.0, 20.0]
}
fn default_c_grid() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_localization_threshold() -> f64 {
    0.05
}
fn default_n_list() -> Vec<f64> {
    vec![8.0, 16.0, 32.0]
}
fn default_one() -> f64 {
    1.0
}
fn default_kind() -> String {
    "1".into()
}
fn default_mismatch_n() -> f64 {
    4.0
}
fn default_r_list() -> Vec<f64> {
    vec![4.0, 8.0, 16.0]
}
fn default_trials() -> usize {
    8
}
fn default_m() -> usize {
    400
}
fn default_rmax() -> f64 {
    40.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_stabilize() -> f64 {
    0.1
}

/// One batch experiment, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Stem of the output files; defaults to the scenario name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub half_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Steps between records; defaults to half a time unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<usize>,
    #[serde(default = "default_radii")]
    pub radii: [f64; 2],
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub absorber: AbsorberSetting,
    /// First edge of the dyadic scattering windows.
    #[serde(default = "default_window_start")]
    pub window_start: f64,
    #[serde(default = "default_morawetz_radii")]
    pub morawetz_radii: Vec<f64>,
    /// Allowed relative growth of the Morawetz ratio when `T` doubles.
    #[serde(default = "default_stabilize")]
    pub stabilize_tolerance: f64,
    #[serde(default = "default_c_grid")]
    pub c_grid: Vec<f64>,
    #[serde(default = "default_localization_threshold")]
    pub localization_threshold: f64,
    #[serde(rename = "N_list", default = "default_n_list")]
    pub n_list: Vec<f64>,
    #[serde(default = "default_one")]
    pub exterior_radius: f64,
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(rename = "N", default = "default_mismatch_n")]
    pub mismatch_n: f64,
    #[serde(rename = "R_list", default = "default_r_list")]
    pub r_list: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Radial mesh cells for the in/out tests.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_rmax")]
    pub rmax: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_field: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses and validates; errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| config_error(".", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let path = match missing_field(&inner) {
                Some(field) if path == "." => field.to_string(),
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            config_error(&path, inner)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.half_width).map_err(|e| config_error("n", e.to_string()))
    }

    pub fn stem(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.scenario.name().to_string())
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(f64::NAN)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(f64::NAN)
    }

    pub fn cadence(&self) -> usize {
        self.cadence
            .unwrap_or_else(|| ((0.5 / self.dt()).round() as usize).max(1))
    }

    pub fn mismatch_kind(&self) -> MismatchKind {
        MismatchKind::parse(&self.kind).unwrap_or(MismatchKind::GradientLow)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output_csv
            .clone()
            .unwrap_or_else(|| self.output_dir.join(format!("{}.csv", self.stem())))
    }

    pub fn field_path(&self) -> PathBuf {
        self.final_field
            .clone()
            .unwrap_or_else(|| self.output_dir.join(format!("{}.field", self.stem())))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.summary.clone().unwrap_or_else(|| {
            self.output_dir
                .join(format!("{}.summary.json", self.stem()))
        })
    }

    /// Path of an auxiliary table next to the main CSV.
    pub fn table_path(&self, suffix: &str) -> PathBuf {
        self.output_dir
            .join(format!("{}.{suffix}.csv", self.stem()))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.scenario.evolves() {
            if self.initial.is_none() {
                return Err(config_error("initial", "missing field `initial`"));
            }
            let dt = self
                .dt
                .ok_or_else(|| config_error("dt", "missing field `dt`"))?;
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config_error("dt", format!("must be positive, got {dt}")));
            }
            let t = self
                .t_final
                .ok_or_else(|| config_error("T", "missing field `T`"))?;
            if !(t > 0.0 && t.is_finite()) {
                return Err(config_error("T", format!("must be positive, got {t}")));
            }
            if t < dt {
                return Err(config_error("T", "must be at least one step"));
            }
            if self.cadence == Some(0) {
                return Err(config_error("cadence", "must be at least 1"));
            }
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(config_error("eps", "must lie in (0, 1/2)"));
        }
        if self.scenario.evolves()
            && self
                .radii
                .iter()
                .any(|r| !(*r > 0.0 && 2.0 * r <= self.half_width))
        {
            return Err(config_error("radii", "radii must lie in (0, half_width/2]"));
        }
        if let Some(init) = &self.initial {
            match init.generator {
                Generator::ScaledGroundState { s } if !s.is_finite() => {
                    return Err(config_error("initial.s", "must be finite"));
                }
                Generator::Gaussian { sigma, .. } | Generator::ChirpedGaussian { sigma, .. }
                    if !(sigma > 0.0) =>
                {
                    return Err(config_error("initial.sigma", "must be positive"));
                }
                _ => {}
            }
            match init.normalize_mass {
                Some(MassTarget::FractionOfGroundState(f)) | Some(MassTarget::Value(f))
                    if !(f > 0.0) =>
                {
                    return Err(config_error(
                        "initial.normalize_mass",
                        "target mass must be positive",
                    ));
                }
                _ => {}
            }
        }
        if self.window_start <= 0.0 {
            return Err(config_error("window_start", "must be positive"));
        }
        match self.scenario {
            Scenario::VirialScan if self.morawetz_radii.is_empty() => {
                return Err(config_error("morawetz_radii", "need at least one radius"));
            }
            Scenario::Evacuation | Scenario::Localization | Scenario::Threshold
                if self.c_grid.is_empty() =>
            {
                return Err(config_error("c_grid", "need at least one constant"));
            }
            Scenario::FreqDecay if self.n_list.is_empty() => {
                return Err(config_error("N_list", "need at least one frequency"));
            }
            Scenario::Mismatch => {
                if MismatchKind::parse(&self.kind).is_none() {
                    return Err(config_error(
                        "kind",
                        format!("unknown kind `{}`", self.kind),
                    ));
                }
                if self.r_list.iter().any(|r| !(*r >= 1.0)) {
                    return Err(config_error("R_list", "radii must be at least 1"));
                }
                if self.trials == 0 {
                    return Err(config_error("trials", "must be at least 1"));
                }
            }
            Scenario::Inout => {
                if self.m < 16 {
                    return Err(config_error("m", "need at least 16 cells"));
                }
                if !(self.rmax > 0.0) {
                    return Err(config_error("rmax", "must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "scenario": "subthreshold",
            "n": 64,
            "half_width": 20.0,
            "initial": {"generator": "ground-state", "normalize_mass": {"fraction-of-ground-state": 0.9}},
            "dt": 0.01,
            "T": 1.0
        })
    }

    #[test]
    fn parses_and_defaults() {
        let cfg = ScenarioConfig::from_value(base()).unwrap();
        assert_eq!(cfg.cadence(), 50);
        assert_eq!(cfg.radii, [5.0, 10.0]);
        assert_eq!(cfg.csv_path(), PathBuf::from("./subthreshold.csv"));
        assert_eq!(
            cfg.initial.unwrap().normalize_mass,
            Some(MassTarget::FractionOfGroundState(0.9))
        );
    }

    #[test]
    fn missing_dt_names_the_field() {
        let mut v = base();
        v.as_object_mut().unwrap().remove("dt");
        let err = ScenarioConfig::from_value(v).unwrap_err();
        assert!(
            matches!(&err, Error::Config { path, .. } if path == "dt"),
            "{err}"
        );
    }

    #[test]
    fn type_errors_carry_the_path() {
        let mut v = base();
        v["initial"]["normalize_mass"] = serde_json::json!({"fraction-of-ground-state": "lots"});
        let err = ScenarioConfig::from_value(v).unwrap_err().to_string();
        assert!(err.contains("initial"), "{err}");
        let mut v = base();
        v["bogus"] = serde_json::json!(1);
        assert!(ScenarioConfig::from_value(v).is_err());
    }

    #[test]
    fn mismatch_needs_no_time_parameters() {
        let v =
            serde_json::json!({"scenario": "mismatch", "n": 64, "half_width": 40.0, "kind": "1"});
        assert!(ScenarioConfig::from_value(v).is_ok());
        let v =
            serde_json::json!({"scenario": "mismatch", "n": 64, "half_width": 40.0, "kind": "7"});
        assert!(ScenarioConfig::from_value(v).is_err());
    }
}
