//! `validate`: correctness checks at the configured parameters against the
//! dense oracle.

use std::fmt;

use num_complex::Complex64;
use tavis_core::reference::{converged_reference, DenseHamiltonian, DENSE_LIMIT};
use tavis_core::{
    propagate, record_trajectory, Error, Method, PropagatorPlan, StateVector, TrajectoryRecord,
};

use crate::config::RunConfig;

pub const MAX_INFIDELITY: f64 = 1e-6;
pub const ORDER_RANGE: (f64, f64) = (3.5, 4.5);
pub const MAX_STEP_DRIFT: f64 = 1e-12;
pub const MAX_ACCUMULATED_DRIFT: f64 = 1e-10;
pub const MAX_METHOD_GAP: f64 = 1e-5;
pub const UNCERTAINTY_SLACK: f64 = 1e-8;
/// Oracle states are accepted once halving `dt` changes them by less.
pub const ORACLE_TOL: f64 = 1e-9;
const ORACLE_HALVINGS: usize = 8;
/// Oracle and order-check steps are tied to the spectral radius bound.
const ORACLE_ANGLE: f64 = 0.08;
const ORDER_ANGLE: f64 = 0.02;
const ORDER_HORIZON: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Gershgorin bound on `||H(t)||` over all `t`.
pub fn spectral_bound(dense: &DenseHamiltonian) -> f64 {
    let d = dense.dim();
    let swing = dense.drive.omega_s.abs() + dense.drive.lambda.abs();
    (0..d)
        .map(|i| {
            let row: f64 = (0..d).map(|j| (dense.h0[(i, j)] + dense.v[(i, j)]).abs()).sum();
            row + swing * dense.jz[(i, i)].abs()
        })
        .fold(0.0, f64::max)
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn infidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    1.0 - overlap.norm_sqr()
}

fn reference(dense: &DenseHamiltonian, initial: &[Complex64], horizon: f64, bound: f64) -> Result<Vec<Complex64>, Error> {
    let steps = (horizon * bound / ORACLE_ANGLE).ceil().max(1.0);
    Ok(converged_reference(dense, initial, 0.0, horizon, horizon / steps, ORACLE_TOL, ORACLE_HALVINGS)?.state)
}

fn final_state(plan: &PropagatorPlan, n_steps: usize) -> Result<Vec<Complex64>, Error> {
    let run = propagate(plan, plan.ground_state(), 0.0, n_steps, None)?;
    run.state.to_canonical(plan.h0_basis())
}

/// Run every check. Numerical failures of the propagators themselves are
/// returned as errors; threshold violations come back as failed checks.
pub fn validate(config: &RunConfig) -> Result<Vec<Check>, Error> {
    let params = &config.params;
    let dim = params.dim()?;
    if dim > DENSE_LIMIT {
        return Err(Error::OracleGuard { dim, limit: DENSE_LIMIT });
    }
    if config.n_steps == 0 {
        return Err(Error::Config("validate needs n_steps >= 1".into()));
    }
    let dense = DenseHamiltonian::build(params)?;
    let bound = spectral_bound(&dense);
    let horizon = config.horizon();
    let mut checks = Vec::new();

    let plans = [
        PropagatorPlan::new(params, config.dt, Method::Exp)?,
        PropagatorPlan::new(params, config.dt, Method::Linear)?,
    ];
    let initial = plans[0].ground_state().to_canonical(plans[0].h0_basis())?;

    // Accuracy at the configured step.
    let oracle = reference(&dense, &initial, horizon, bound)?;
    for plan in &plans {
        let psi = final_state(plan, config.n_steps)?;
        let err = infidelity(&psi, &oracle);
        checks.push(check(
            if plan.method() == Method::Exp { "accuracy exp" } else { "accuracy linear" },
            err <= MAX_INFIDELITY,
            format!(
                "infidelity {err:.3e} (limit {MAX_INFIDELITY:.0e}), |psi - psi_oracle| = {:.3e} at T = {horizon} ns",
                distance(&psi, &oracle)
            ),
        ));
    }

    // Order, measured where the step is small against the spectrum.
    let h = config.dt.min(ORDER_ANGLE / bound);
    let coarse_steps = (horizon.min(ORDER_HORIZON) / (4.0 * h)).ceil().max(1.0) as usize;
    let order_horizon = coarse_steps as f64 * 4.0 * h;
    let order_oracle = reference(&dense, &initial, order_horizon, bound)?;
    for method in [Method::Exp, Method::Linear] {
        let mut errors = Vec::new();
        for (scale, steps) in [(4.0, coarse_steps), (2.0, 2 * coarse_steps), (1.0, 4 * coarse_steps)] {
            let plan = PropagatorPlan::new(params, scale * h, method)?;
            errors.push(distance(&final_state(&plan, steps)?, &order_oracle));
        }
        let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
        let ok = ratios.iter().all(|r| (ORDER_RANGE.0..=ORDER_RANGE.1).contains(r));
        checks.push(check(
            if method == Method::Exp { "order exp" } else { "order linear" },
            ok,
            format!(
                "errors {:.3e}, {:.3e}, {:.3e} at dt = {:.3e}, {:.3e}, {:.3e} ns; ratios {:.3}, {:.3} (range {}..{})",
                errors[0],
                errors[1],
                errors[2],
                4.0 * h,
                2.0 * h,
                h,
                ratios[0],
                ratios[1],
                ORDER_RANGE.0,
                ORDER_RANGE.1
            ),
        ));
    }

    // Trajectories at the configured step.
    let mut records: Vec<TrajectoryRecord> = Vec::new();
    for plan in &plans {
        let (record, run) = record_trajectory(plan, plan.ground_state(), 0.0, config.n_steps, config.stride)?;
        if plan.method() == Method::Linear {
            let (step, total) = (run.max_step_drift(), run.accumulated_drift());
            checks.push(check(
                "unitarity linear",
                step <= MAX_STEP_DRIFT && total <= MAX_ACCUMULATED_DRIFT,
                format!(
                    "max per-step drift {step:.3e} (limit {MAX_STEP_DRIFT:.0e}), accumulated {total:.3e} \
                     (limit {MAX_ACCUMULATED_DRIFT:.0e}) over {} steps",
                    config.n_steps
                ),
            ));
        }
        records.push(record);
    }
    let gap = records[0]
        .rows
        .iter()
        .zip(&records[1].rows)
        .map(|(a, b)| (a.lambda_minus - b.lambda_minus).abs().max((a.lambda_plus - b.lambda_plus).abs()))
        .fold(0.0, f64::max);
    checks.push(check(
        "method agreement",
        gap <= MAX_METHOD_GAP,
        format!("max |lambda_exp - lambda_linear| = {gap:.3e} (limit {MAX_METHOD_GAP:.0e})"),
    ));
    let product = records
        .iter()
        .flat_map(|r| &r.rows)
        .map(|r| r.lambda_minus * r.lambda_plus)
        .fold(f64::INFINITY, f64::min);
    checks.push(check(
        "uncertainty bound",
        product >= 1.0 / 16.0 - UNCERTAINTY_SLACK,
        format!("min lambda_minus * lambda_plus = {product:.12} (bound 1/16)"),
    ));
    let top = records.iter().map(TrajectoryRecord::max_top_fock).fold(0.0, f64::max);
    checks.push(check(
        "truncation",
        top < config.truncation_threshold,
        format!("max top Fock population {top:.3e} (limit {:.0e})", config.truncation_threshold),
    ));

    if params.lambda == 0.0 {
        checks.push(energy_check(config, &dense)?);
    }
    Ok(checks)
}

/// Largest `|<H> - <H>_0|` along a LINEAR run.
pub fn energy_drift(dense: &DenseHamiltonian, plan: &PropagatorPlan, n_steps: usize) -> Result<(f64, f64), Error> {
    let basis = plan.h0_basis().clone();
    let e0 = dense.energy(&plan.ground_state().to_canonical(&basis)?, 0.0);
    let mut worst: f64 = 0.0;
    let mut failure = None;
    let mut observer = |_k: usize, t: f64, s: &StateVector| match s.to_canonical(&basis) {
        Ok(psi) => worst = worst.max((dense.energy(&psi, t) - e0).abs()),
        Err(e) => failure = Some(e),
    };
    propagate(plan, plan.ground_state(), 0.0, n_steps, Some(&mut observer))?;
    match failure {
        Some(e) => Err(e),
        None => Ok((worst, e0)),
    }
}

fn energy_check(config: &RunConfig, dense: &DenseHamiltonian) -> Result<Check, Error> {
    let coarse = PropagatorPlan::new(&config.params, config.dt, Method::Linear)?;
    let fine = PropagatorPlan::new(&config.params, 0.5 * config.dt, Method::Linear)?;
    let (d1, e0) = energy_drift(dense, &coarse, config.n_steps)?;
    let (d2, _) = energy_drift(dense, &fine, 2 * config.n_steps)?;
    let ratio = d1 / d2;
    let floor = 1e-10 * e0.abs().max(1.0);
    let ok = d1 <= floor || (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&ratio);
    Ok(check(
        "energy drift",
        ok,
        format!(
            "max |<H> - E0| = {d1:.3e} at dt, {d2:.3e} at dt/2 (ratio {ratio:.3}), c = {:.3e}, E0 = {e0:.6}",
            d1 / (config.dt * config.dt)
        ),
    ))
}
