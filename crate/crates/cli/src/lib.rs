//! Library side of the `spde-lab` experiment CLI: config parsing,
//! experiment runners, and artifact output. The binary in `main.rs` is a
//! thin wrapper; the acceptance suite drives these modules directly.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

use config::{ExperimentConfig, ExperimentKind};
use experiments::ExperimentError;

/// Run one parsed experiment, writing artifacts under `out_dir`.
/// Returns the written paths.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    raw_config: &str,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>, RunError> {
    let t0 = Instant::now();
    let mut csvs: Vec<(String, String)> = Vec::new();
    match cfg.kind {
        ExperimentKind::Sweep => {
            let rows = experiments::sweep_rows(cfg)?;
            csvs.push((String::new(), experiments::moment_rows_csv(&rows)));
        }
        ExperimentKind::Simulate => {
            let rows = experiments::sweep_rows(cfg)?;
            csvs.push((String::new(), experiments::moment_rows_csv(&rows)));
            if cfg.dump_trajectory {
                csvs.push(("trajectory".into(), experiments::trajectory_dump_csv(cfg)?));
            }
        }
        ExperimentKind::Bounds => {
            let (_, rows) = experiments::bounds_rows(cfg)?;
            csvs.push((String::new(), experiments::bounds_rows_csv(&rows)));
        }
        ExperimentKind::ValidateOu => {
            let rows = experiments::ou_rows(cfg)?;
            csvs.push((String::new(), experiments::ou_rows_csv(&rows)));
        }
        ExperimentKind::ValidateGaussianBounds => {
            let mut rows = experiments::interval_grid_rows();
            rows.extend(experiments::ball_grid_rows(cfg.master_seed, 100_000));
            rows.extend(experiments::smoothed_grid_rows(cfg.master_seed, 100_000));
            csvs.push((String::new(), experiments::gauss_rows_csv(&rows)));
        }
        ExperimentKind::ValidateAbstractBound => {
            let report = experiments::abstract_bound_report(cfg.master_seed, 100_000)?;
            csvs.push((String::new(), experiments::abstract_report_csv(&report)));
        }
        ExperimentKind::Sode1dSweep => {
            let rows = experiments::sode1d_rows(cfg)?;
            csvs.push((String::new(), experiments::moment_rows_csv(&rows)));
        }
    }
    let artifacts = output::ArtifactSet {
        out_dir: out_dir.to_path_buf(),
        stem: &cfg.output_prefix,
        config: cfg,
        raw_config,
        wall_time_seconds: t0.elapsed().as_secs_f64(),
    };
    let refs: Vec<(&str, &str)> = csvs
        .iter()
        .map(|(suffix, content)| (suffix.as_str(), content.as_str()))
        .collect();
    artifacts.write(&refs).map_err(RunError::Io)
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Experiment(#[from] ExperimentError),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}
