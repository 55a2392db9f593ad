//! Configuration files, command dispatch and result tables for the `ioncav`
//! binary.

mod commands;
mod config;
mod table;

pub use commands::{exit_code, linearization_point, run, write_diagnostic, Command, LinearizationPoint};
pub use config::{
    edge_coupled_trio, long_chain, BathConfig, EquilibriumConfig, FluctuationsConfig, ModeAnchor, NegativityConfig,
    ReferenceConfig, Resolved, RunConfig, Seed, SoftModeConfig, SpectrumConfig, SweepConfig, SystemConfig,
};
pub use table::{embedded_config, read_numeric, write_atomic, Metadata, ResultTable, Value, DELIMITER};
