//! Experiment harness: configuration files, deterministic execution of run
//! matrices, and CSV traces.

mod config;
mod output;
mod run;

pub use config::{load_config, parse_config, Beta0, DataSource, LoadedConfig, ProblemSpec, RunSpec};
pub use output::{emit_csv, fmt_f64, read_trace, write_manifest, write_trace, MANIFEST_HEADER, TRACE_HEADER};
pub use run::{build_problem, build_solver, execute_run, execute_runs, exit_code, starting_point, RunResult};
