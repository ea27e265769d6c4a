//! Experiment grid runner, result tables, plots and CLI-facing helpers.

pub mod config;
pub mod csv;
pub mod diagnose;
pub mod experiment;
pub mod plot;
pub mod run;
pub mod selftest;

pub use config::Settings;
pub use csv::{emit_csv, format_real, load_csv, rows_from_csv, rows_to_csv, CSV_HEADER};
pub use diagnose::{diagnose, diagnostics_to_csv, DiagnosticRow, DIAGNOSTIC_HEADER};
pub use experiment::{
    parse_grid, parse_seeds, DegradationMode, ExperimentSpec, Method, Profile, UNIFORM_M_GRID,
};
pub use plot::{emit_power_plot, power_plot_svg, PlotAxis};
pub use run::{
    build_task, default_degradation_gamma, pool_seeds, run_experiment, run_experiment_streaming,
    run_trial, sort_rows, train_pair, GammaChoice, PooledRow, ResultRow, TrainedPair,
    DEFAULT_GAMMA_GRID, DEFAULT_GAMMA_POWER,
};
pub use selftest::{run_selftest, SelfCheck};
