//! `simulate` and `bench`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use tavis_bench::{report_json, time_single_step, write_samples_csv, SweepResult, SweepSpec};
use tavis_core::reference::{dense_propagate, hp_propagate_states, DenseHamiltonian, DENSE_LIMIT};
use tavis_core::{
    enumerate_basis, record_trajectory, CavityIndex, Error, JzDiagonal, OrderedBasis, PropagatorPlan, Snapshot,
    StateVector, TrajectoryRecord, TrajectoryRow,
};

use crate::config::{RunConfig, RunMethod};
use crate::CliError;

/// A finished simulation.
#[derive(Debug)]
pub struct SimulateOutput {
    pub record: TrajectoryRecord,
    pub warnings: Vec<String>,
}

/// Run the configured simulation and return its sampled trajectory.
pub fn simulate(config: &RunConfig) -> Result<SimulateOutput, CliError> {
    let record = match config.method {
        RunMethod::Exp | RunMethod::Linear => {
            let method = config.method.split_operator().expect("split-operator method");
            let plan = PropagatorPlan::new(&config.params, config.dt, method)?;
            record_trajectory(&plan, plan.ground_state(), 0.0, config.n_steps, config.stride)?.0
        }
        RunMethod::Dense => dense_trajectory(config)?,
        RunMethod::Hp => hp_trajectory(config)?,
    };
    let mut warnings = Vec::new();
    let top = record.max_top_fock();
    if top > config.truncation_threshold {
        warnings.push(format!(
            "truncation warning: top Fock population reached {top:.3e} (threshold {:.0e}); increase n_cavity",
            config.truncation_threshold
        ));
    }
    Ok(SimulateOutput { record, warnings })
}

/// Comment block written ahead of the CSV header.
pub fn comment_block(config: &RunConfig, warnings: &[String]) -> Vec<String> {
    let mut lines = vec!["configuration:".to_string()];
    lines.extend(config.to_lines());
    lines.extend(config.notes());
    lines.extend(warnings.iter().cloned());
    lines
}

pub fn write_trajectory(path: &Path, config: &RunConfig, output: &SimulateOutput) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    output
        .record
        .write_csv(&mut w, &comment_block(config, &output.warnings))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

fn h0_basis(config: &RunConfig) -> Result<OrderedBasis, Error> {
    OrderedBasis::for_h0(&config.params, &enumerate_basis(&config.params)?)
}

fn dense_trajectory(config: &RunConfig) -> Result<TrajectoryRecord, Error> {
    let dim = config.params.dim()?;
    if dim > DENSE_LIMIT {
        return Err(Error::OracleGuard { dim, limit: DENSE_LIMIT });
    }
    let dense = DenseHamiltonian::build(&config.params)?;
    let basis = h0_basis(config)?;
    let index = CavityIndex::new(&basis);
    let jz = JzDiagonal::new(&basis)?;
    let ground = StateVector::ground(&basis);
    let mut rows = vec![TrajectoryRow::from_snapshot(0.0, &Snapshot::take(&ground, &index, &jz)?, 0.0)];
    let initial = ground.to_canonical(&basis)?;

    let mut failure = None;
    let mut prev_norm = 1.0;
    let mut observer = |k: usize, t: f64, psi: &[Complex64]| {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm / prev_norm - 1.0).abs();
        prev_norm = norm;
        if k % config.stride != 0 || failure.is_some() {
            return;
        }
        let sampled = StateVector::from_canonical(&basis, psi).and_then(|s| Snapshot::take(&s, &index, &jz));
        match sampled {
            Ok(snap) => rows.push(TrajectoryRow::from_snapshot(t, &snap, drift)),
            Err(e) => failure = Some(e),
        }
    };
    dense_propagate(&dense, &initial, 0.0, config.n_steps, config.dt, Some(&mut observer))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(TrajectoryRecord { rows })
}

fn hp_trajectory(config: &RunConfig) -> Result<TrajectoryRecord, Error> {
    let grid: Vec<f64> = (0..=config.n_steps)
        .step_by(config.stride)
        .map(|k| k as f64 * config.dt)
        .collect();
    let states = hp_propagate_states(&config.params, &grid, 0.25 * config.dt)?;
    let spin = config.params.spin();
    Ok(TrajectoryRecord {
        rows: grid
            .iter()
            .zip(&states)
            .map(|(&t, s)| {
                let (lambda_minus, lambda_plus) = s.cavity_covariance().eigenvalues();
                TrajectoryRow {
                    t,
                    lambda_minus,
                    lambda_plus,
                    mean_photon: s.mode_occupation(0),
                    jz_expect: s.mode_occupation(1) - spin,
                    pre_renorm_norm_drift: 0.0,
                    // No Fock truncation in the Gaussian comparator.
                    top_fock_pop: 0.0,
                }
            })
            .collect(),
    })
}

/// Files written by [`bench`].
#[derive(Debug)]
pub struct BenchOutput {
    pub result: SweepResult,
    pub report: serde_json::Value,
    pub samples_path: PathBuf,
    pub report_path: PathBuf,
}

pub fn bench(spec: &SweepSpec, out_dir: &Path) -> Result<BenchOutput, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let result = time_single_step(spec)?;
    let report = report_json(spec, &result);

    let samples_path = out_dir.join("bench_samples.csv");
    let mut csv = Vec::new();
    write_samples_csv(&mut csv, &result.samples).expect("writing to memory");
    fs::write(&samples_path, csv).map_err(|e| CliError::io(&samples_path, e))?;

    let report_path = out_dir.join("bench_report.json");
    let text = serde_json::to_string_pretty(&report).expect("JSON values serialize");
    fs::write(&report_path, text + "\n").map_err(|e| CliError::io(&report_path, e))?;
    Ok(BenchOutput { result, report, samples_path, report_path })
}
