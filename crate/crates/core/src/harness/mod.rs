//! Simulation harness: test curves, signal-plus-noise sampling, coverage and
//! volume studies, statistical sanity checks, and report I/O.

mod clt;
mod curves;
mod io;
mod report;
mod sampling;
mod study;

pub use clt::{bootstrap_conditional_covariance, clt_check, BootstrapValidityConfig, CltConfig, CltReport};
pub use curves::{curve_eval, CurveSpec, NoiseSpec};
pub use io::{read_curve_json, write_curve_json, CurveFile};
pub use report::{report_csv, write_report, write_report_json};
pub use sampling::{grid_point, sample_noisy_curve};
pub use study::{coverage_study, CsFamily, PointCoverage, ReportRow, StudyConfig, StudyReport};
