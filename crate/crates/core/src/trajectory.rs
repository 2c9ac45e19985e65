//! Sampled observables along a run and their CSV form.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::observables::{CavityIndex, Snapshot};
use crate::propagator::{propagate, Propagation, PropagatorPlan};
use crate::state::StateVector;

/// CSV header, in column order.
pub const COLUMNS: [&str; 7] = [
    "t",
    "lambda_minus",
    "lambda_plus",
    "mean_photon",
    "jz_expect",
    "pre_renorm_norm_drift",
    "top_fock_pop",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mean_photon: f64,
    pub jz_expect: f64,
    pub pre_renorm_norm_drift: f64,
    pub top_fock_pop: f64,
}

impl TrajectoryRow {
    pub fn from_snapshot(t: f64, snap: &Snapshot, drift: f64) -> Self {
        Self {
            t,
            lambda_minus: snap.lambda_minus,
            lambda_plus: snap.lambda_plus,
            mean_photon: snap.mean_photon,
            jz_expect: snap.jz_expect,
            pre_renorm_norm_drift: drift,
            top_fock_pop: snap.top_fock_pop,
        }
    }

    fn values(&self) -> [f64; 7] {
        [
            self.t,
            self.lambda_minus,
            self.lambda_plus,
            self.mean_photon,
            self.jz_expect,
            self.pre_renorm_norm_drift,
            self.top_fock_pop,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    /// Largest top-Fock population seen.
    pub fn max_top_fock(&self) -> f64 {
        self.rows.iter().map(|r| r.top_fock_pop).fold(0.0, f64::max)
    }

    /// Write the header, then one row per sample with 17 significant digits.
    /// `comments` are emitted first, each prefixed by `# `.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", COLUMNS.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row.values().iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Parse what [`TrajectoryRecord::write_csv`] produced; `#` lines are
    /// skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Usage(format!("read failed: {e}")))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                if line != COLUMNS.join(",") {
                    return Err(Error::Usage(format!("line {}: unexpected header `{line}`", lineno + 1)));
                }
                header_seen = true;
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Usage(format!("line {}: {e}", lineno + 1)))?;
            if v.len() != COLUMNS.len() {
                return Err(Error::Usage(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    COLUMNS.len(),
                    v.len()
                )));
            }
            rows.push(TrajectoryRow {
                t: v[0],
                lambda_minus: v[1],
                lambda_plus: v[2],
                mean_photon: v[3],
                jz_expect: v[4],
                pre_renorm_norm_drift: v[5],
                top_fock_pop: v[6],
            });
        }
        Ok(Self { rows })
    }
}

/// Propagate from `initial` and sample observables at step 0 and every
/// `stride` steps after it.
pub fn record_trajectory(
    plan: &PropagatorPlan,
    initial: StateVector,
    t0: f64,
    n_steps: usize,
    stride: usize,
) -> Result<(TrajectoryRecord, Propagation)> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let index = CavityIndex::new(plan.h0_basis());
    let jz = plan.jz();
    let first = Snapshot::take(&initial, &index, jz)?;
    let mut record = TrajectoryRecord {
        rows: vec![TrajectoryRow::from_snapshot(t0, &first, 0.0)],
    };
    let mut failure = None;
    let mut sampled = Vec::new();
    let mut observer = |step: usize, t: f64, state: &StateVector| {
        if step % stride == 0 && failure.is_none() {
            match Snapshot::take(state, &index, jz) {
                Ok(s) => sampled.push((step, t, s)),
                Err(e) => failure = Some(e),
            }
        }
    };
    let run = propagate(plan, initial, t0, n_steps, Some(&mut observer))?;
    if let Some(e) = failure {
        return Err(e);
    }
    for (step, t, snap) in sampled {
        let drift = run.diagnostics[step - 1].norm_drift();
        record.rows.push(TrajectoryRow::from_snapshot(t, &snap, drift));
    }
    Ok((record, run))
}
