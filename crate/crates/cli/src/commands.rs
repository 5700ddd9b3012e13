//! The batch commands behind the CLI verbs: simulate, recover, verify,
//! generate. The demo transcripts live in [`crate::demo`].

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use prony_smt::forward::{self};
use prony_smt::gen::{self, GenOptions};
use prony_smt::model::{ModelKind, Scenario, SourceModel};
use prony_smt::pipeline::{
    parameter_errors, recover_hyperplanes, recover_points, recover_radial, ParameterErrors,
    PipelineConfig, RecoveryReport,
};
use prony_smt::RadialKernel;

use crate::io::{self, DataFile, ReportFile};
use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions {
    /// Number of probe evaluations per sensor (defaults to 2m).
    pub probe_count: Option<usize>,
    /// Samples per radial trace.
    pub radial_grid: usize,
    /// Standard deviation of additive Gaussian noise (0 = exact data).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            probe_count: None,
            radial_grid: 512,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Synthesizes the per-sensor data a scenario's model produces, with
/// optional seeded Gaussian perturbation.
pub fn simulate(scenario_path: &Path, out: &Path, opts: &SimulateOptions) -> Result<(), CliError> {
    let scenario: Scenario = io::read_json(scenario_path)?;
    let m = scenario.model.len();
    let mut data = match &scenario.model {
        SourceModel::Points(model) => {
            let count = opts.probe_count.unwrap_or(2 * m);
            let moments = scenario
                .sensors
                .points()
                .iter()
                .map(|y| forward::point_moments(model, y, count))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Schema(e.to_string()))?;
            DataFile::Points {
                dim: scenario.dim,
                sources: m,
                moments,
            }
        }
        SourceModel::Hyperplanes(model) => {
            let count = opts.probe_count.unwrap_or(2 * m);
            if !count.is_multiple_of(2) || count == 0 {
                return Err(CliError::Usage(
                    "--probe-count must be a positive even number for hyperplane scenarios".into(),
                ));
            }
            let moments = scenario
                .sensors
                .points()
                .iter()
                .map(|y| forward::hyperplane_moments(model, y, count / 2))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Schema(e.to_string()))?;
            DataFile::Hyperplanes {
                dim: scenario.dim,
                sources: m,
                moments,
            }
        }
        SourceModel::Radial(model) => {
            let traces = scenario
                .sensors
                .points()
                .iter()
                .map(|y| {
                    let radii = forward::default_radial_grid(model, y, opts.radial_grid);
                    forward::radial_trace(model, y, &radii)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Schema(e.to_string()))?;
            DataFile::Radial {
                dim: scenario.dim,
                sources: m,
                kernel: model.kernel().clone(),
                traces,
            }
        }
    };
    if opts.noise_sigma > 0.0 {
        add_noise(&mut data, opts.noise_sigma, opts.seed);
    }
    io::write_json(out, &data)
}

fn add_noise(data: &mut DataFile, sigma: f64, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    let mut perturb = |values: &mut Vec<f64>| {
        for v in values.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    };
    match data {
        DataFile::Points { moments, .. } | DataFile::Hyperplanes { moments, .. } => {
            for mv in moments {
                perturb(&mut mv.values);
            }
        }
        DataFile::Radial { traces, .. } => {
            for trace in traces {
                perturb(&mut trace.values);
            }
        }
    }
}

/// Runs the recovery pipeline matching `kind` and writes the report. Typed
/// recovery failures still produce a report file carrying the error name.
pub fn recover(
    moments_path: &Path,
    dim: usize,
    sources: usize,
    kind: ModelKind,
    out: &Path,
) -> Result<RecoveryReport, CliError> {
    let data: DataFile = io::read_json(moments_path)?;
    if data.kind() != kind {
        return Err(CliError::Schema(format!(
            "data file holds {:?} data but --kind asked for {:?}",
            data.kind(),
            kind
        )));
    }
    let cfg = PipelineConfig::new();
    let result = match &data {
        DataFile::Points { moments, .. } => recover_points(moments, dim, sources, &cfg),
        DataFile::Hyperplanes { moments, .. } => recover_hyperplanes(moments, dim, sources, &cfg),
        DataFile::Radial { kernel, traces, .. } => {
            recover_radial(traces, kernel, dim, sources, &cfg)
        }
    };
    match result {
        Ok(report) => {
            io::write_json(
                out,
                &ReportFile::Success {
                    report: Box::new(report.clone()),
                },
            )?;
            Ok(report)
        }
        Err(err) => {
            let name = io::recovery_error_name(&err);
            io::write_json(
                out,
                &ReportFile::Error {
                    error: name,
                    detail: err.to_string(),
                },
            )?;
            Err(CliError::Recovery {
                name,
                detail: err.to_string(),
            })
        }
    }
}

/// Reads a scenario and a recovery report and writes the error table
/// (per-parameter absolute errors after optimal source matching).
pub fn verify(
    scenario_path: &Path,
    report_path: &Path,
    out: Option<&PathBuf>,
) -> Result<ParameterErrors, CliError> {
    let scenario: Scenario = io::read_json(scenario_path)?;
    let report: serde_json::Value = io::read_json(report_path)?;
    if report["status"] != "success" {
        return Err(CliError::Schema(format!(
            "report status is {}, not success",
            report["status"]
        )));
    }
    let recovered: SourceModel = serde_json::from_value(report["model"].clone())
        .map_err(|e| CliError::Schema(format!("report model: {e}")))?;
    let table = parameter_errors(&scenario.model, &recovered)
        .map_err(|e| CliError::Schema(e.to_string()))?;
    match out {
        Some(path) => io::write_json(path, &table)?,
        None => println!("{}", serde_json::to_string_pretty(&table).unwrap()),
    }
    Ok(table)
}

/// Generates a seeded random scenario and writes it.
pub fn generate(
    kind: ModelKind,
    dim: usize,
    sources: usize,
    seed: u64,
    kernel_width: Option<f64>,
    out: &Path,
) -> Result<Scenario, CliError> {
    let opts = GenOptions {
        kind,
        dim,
        sources,
        seed,
        kernel: kernel_width.map(RadialKernel::gaussian),
    };
    let scenario =
        gen::generate(&opts).map_err(|e| CliError::Schema(format!("generation failed: {e}")))?;
    io::write_json(out, &scenario)?;
    Ok(scenario)
}
