//! Scenario drivers: phase-time maps, amplitude sweeps, detuning scans,
//! cross-Kerr ablation, projected-model comparison and synthetic Stark data.

mod output;
mod scenarios;
mod sweep;

pub use output::{format_number, write_json, write_map_csv, write_table};
pub use scenarios::{
    run_amplitude_sweep, run_chi_ablation, run_detuning_scan, run_phase_time_map,
    run_projected_comparison, skew_statistic, synth_stark_spectroscopy, ChiDeviation, Contour,
    DetuningResult, ProjectedRow, SkewStatistic, StarkModel, StarkPoint,
};
pub use sweep::{
    run_point, run_sweep, run_sweep_with_progress, Axis, InitialState, KcqInit, MapResult, ModelKind,
    ObservableKind, RunMetadata, SweepSpec, TransmonInit,
};
