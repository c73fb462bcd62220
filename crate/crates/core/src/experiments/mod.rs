//! Batch scenarios: configuration, initial data, reports, artifacts and
//! plots.

mod config;
mod initial;
mod plot;
mod reports;
mod scenarios;

pub use config::{
    AbsorberSetting, Bump, Generator, InitialConfig, MassTarget, Scenario, ScenarioConfig,
};
pub use initial::{generate, normalize_mass, InitialData};
pub use plot::{plot_csv, read_csv, PlotOptions};
pub use reports::{
    evacuation_report, halving_times, localization_report, virial_identity_check, Check,
    EvacuationReport, EvacuationWindow, LocalizationReport, LocalizationRow, MorawetzRow,
    MorawetzScan, ScaleSample, VirialSample,
};
pub use scenarios::{
    chirp_incoming_fraction, config_hash, inout_identity_defects, run_scenario, write_records,
    write_table, Summary, VERSION,
};
