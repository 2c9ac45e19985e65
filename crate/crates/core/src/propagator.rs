//! Symmetric split-operator propagation.
//!
//! One step of size `dt` starting at `t` applies
//!
//! ```text
//! e^{-i dt/2 Delta Jz} e^{-i dt/2 H0} e^{-i dt V} e^{-i dt/2 H0} e^{-i dt/2 Delta Jz},
//! Delta = Delta(t + dt/2),
//! ```
//!
//! with `H0` applied in its own ordering, `V` between the two reindexings,
//! and the tridiagonal exponentials realized either exactly per block
//! ([`Method::Exp`]) or by the Cayley transform with Thomas solves
//! ([`Method::Linear`]). The state is renormalized after every step and the
//! norm before renormalization is reported.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{enumerate_basis, ModelParams, OrderedBasis, OrderingTag, Permutation};
use crate::error::{Error, Result};
use crate::hamiltonian::{apply_jz_phase, build_h0, build_v, DriveSchedule, JzDiagonal, TridiagonalOperator};
use crate::state::StateVector;
use crate::tridiag::{tridiag_eigendecompose, ThomasFactor};

/// How the tridiagonal exponentials are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exact exponential of every conserved-key block, precomputed densely.
    Exp,
    /// Cayley transform `(I + i beta H)^{-1} (I - i beta H)`, one Thomas
    /// solve per factor.
    Linear,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exp => "exp",
            Method::Linear => "linear",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(Method::Exp),
            "linear" => Ok(Method::Linear),
            other => Err(Error::Config(format!("unknown propagation method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BlockUnitary {
    Phase { index: usize, phase: Complex64 },
    Dense { start: usize, size: usize, matrix: Vec<Complex64> },
}

/// `exp(-i theta H)` for every conserved-key block of one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockExponentials {
    tag: OrderingTag,
    theta: f64,
    dim: usize,
    blocks: Vec<BlockUnitary>,
    max_block: usize,
}

impl BlockExponentials {
    pub fn tag(&self) -> OrderingTag {
        self.tag
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Dense matrix of block `b` (row-major), scalars as `1 x 1`.
    pub fn block_matrix(&self, b: usize) -> Vec<Complex64> {
        match &self.blocks[b] {
            BlockUnitary::Phase { phase, .. } => vec![*phase],
            BlockUnitary::Dense { matrix, .. } => matrix.clone(),
        }
    }

    /// Number of stored complex entries.
    pub fn stored_entries(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                BlockUnitary::Phase { .. } => 1,
                BlockUnitary::Dense { size, .. } => size * size,
            })
            .sum()
    }

    fn apply_in_place(&self, amps: &mut [Complex64], tmp: &mut Vec<Complex64>) {
        tmp.resize(self.max_block, Complex64::new(0.0, 0.0));
        for block in &self.blocks {
            match block {
                BlockUnitary::Phase { index, phase } => amps[*index] *= phase,
                BlockUnitary::Dense { start, size, matrix } => {
                    let x = &mut amps[*start..*start + *size];
                    let y = &mut tmp[..*size];
                    for (row, yi) in matrix.chunks_exact(*size).zip(y.iter_mut()) {
                        *yi = row.iter().zip(x.iter()).map(|(m, v)| m * v).sum();
                    }
                    x.copy_from_slice(y);
                }
            }
        }
    }
}

/// Diagonalize each block of `op` and form `U diag(e^{-i theta lambda}) U^T`.
pub fn precompute_block_exponentials(op: &TridiagonalOperator, theta: f64) -> Result<BlockExponentials> {
    if !theta.is_finite() {
        return Err(Error::Usage(format!("step angle must be finite, got {theta}")));
    }
    let mut blocks = Vec::with_capacity(op.blocks().len());
    let mut max_block = 0;
    for (b, range) in op.blocks().iter().enumerate() {
        let size = range.len();
        max_block = max_block.max(size);
        if size == 1 {
            blocks.push(BlockUnitary::Phase {
                index: range.start,
                phase: Complex64::from_polar(1.0, -theta * op.diag()[range.start]),
            });
            continue;
        }
        let eig = tridiag_eigendecompose(&op.diag()[range.clone()], &op.off()[range.start..range.end - 1], b)?;
        // U diag(cos) U^T - i U diag(sin) U^T as two real products.
        let u = DMatrix::from_row_slice(size, size, &eig.vectors);
        let mut u_cos = u.clone();
        let mut u_sin = u.clone();
        for (k, &l) in eig.values.iter().enumerate() {
            let (sin, cos) = (theta * l).sin_cos();
            u_cos.column_mut(k).scale_mut(cos);
            u_sin.column_mut(k).scale_mut(sin);
        }
        let re = &u_cos * u.transpose();
        let im = &u_sin * u.transpose();
        let mut matrix = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                matrix.push(Complex64::new(re[(i, j)], -im[(i, j)]));
            }
        }
        blocks.push(BlockUnitary::Dense { start: range.start, size, matrix });
    }
    Ok(BlockExponentials {
        tag: op.tag(),
        theta,
        dim: op.len(),
        blocks,
        max_block,
    })
}

/// Multiply `state` by the precomputed block exponentials.
pub fn apply_block_exponentials(blocks: &BlockExponentials, state: &mut StateVector) -> Result<()> {
    state.expect_tag(blocks.tag)?;
    state.expect_len(blocks.dim)?;
    let mut tmp = Vec::new();
    blocks.apply_in_place(state.amplitudes_mut(), &mut tmp);
    Ok(())
}

/// Both Cayley factors `I -+ i beta H` for one operator, with the left one
/// already factored for Thomas solves.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyFactor {
    tag: OrderingTag,
    beta: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    lhs: ThomasFactor,
}

impl CayleyFactor {
    pub fn new(op: &TridiagonalOperator, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Usage(format!("Cayley coefficient must be finite, got {beta}")));
        }
        let ib = Complex64::new(0.0, beta);
        let band: Vec<Complex64> = op.off().iter().map(|&o| ib * o).collect();
        let diag: Vec<Complex64> = op.diag().iter().map(|&h| Complex64::new(1.0, 0.0) + ib * h).collect();
        let lhs = ThomasFactor::new(&band, &diag, &band)?;
        Ok(Self {
            tag: op.tag(),
            beta,
            diag: op.diag().to_vec(),
            off: op.off().to_vec(),
            lhs,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tag(&self) -> OrderingTag {
        self.tag
    }

    /// Replace `x` by `(I + i beta H)^{-1} (I - i beta H) x`.
    fn apply_in_place(&self, x: &mut [Complex64]) {
        let n = x.len();
        if n == 0 || self.beta == 0.0 {
            return;
        }
        let mib = Complex64::new(0.0, -self.beta);
        // (I - i beta H) x, in place, carrying the overwritten neighbour.
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let cur = x[i];
            let mut hx = cur * self.diag[i];
            if i > 0 {
                hx += prev * self.off[i - 1];
            }
            if i + 1 < n {
                hx += x[i + 1] * self.off[i];
            }
            x[i] = cur + mib * hx;
            prev = cur;
        }
        self.lhs.solve_in_place(x);
    }
}

/// `(I + i beta H)^{-1} (I - i beta H) psi`, a unitary approximation of
/// `exp(-2 i beta H) psi`.
pub fn cayley_apply(op: &TridiagonalOperator, beta: f64, state: &mut StateVector) -> Result<()> {
    state.expect_tag(op.tag())?;
    state.expect_len(op.len())?;
    let factor = CayleyFactor::new(op, beta)?;
    factor.apply_in_place(state.amplitudes_mut());
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Kernels {
    Exp { h0_half: BlockExponentials, v_full: BlockExponentials },
    Linear { h0_half: CayleyFactor, v_full: CayleyFactor },
}

/// Everything a run needs, fixed once for a given `(params, dt, method)`.
#[derive(Debug, Clone)]
pub struct PropagatorPlan {
    method: Method,
    dt: f64,
    params: ModelParams,
    h0_basis: OrderedBasis,
    v_basis: OrderedBasis,
    h0: TridiagonalOperator,
    v: TridiagonalOperator,
    to_v: Permutation,
    jz: JzDiagonal,
    drive: DriveSchedule,
    kernels: Kernels,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Norm of the state just before renormalization.
    pub pre_renorm_norm: f64,
    /// Orderings in which the half `H0`, full `V` and second half `H0`
    /// factors were applied.
    pub orderings: [OrderingTag; 3],
}

impl StepDiagnostics {
    pub fn norm_drift(&self) -> f64 {
        self.pre_renorm_norm - 1.0
    }
}

/// Reusable buffers for [`PropagatorPlan::strang_step`].
#[derive(Debug, Default)]
pub struct StepWorkspace {
    scratch: Vec<Complex64>,
    reindexed: Vec<Complex64>,
    block_tmp: Vec<Complex64>,
}

impl StepWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

impl PropagatorPlan {
    pub fn new(params: &ModelParams, dt: f64, method: Method) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::Config(format!("dt must be finite and nonnegative, got {dt}")));
        }
        let states = enumerate_basis(params)?;
        let h0_basis = OrderedBasis::for_h0(params, &states)?;
        let v_basis = OrderedBasis::for_v(params, &states)?;
        let h0 = build_h0(params, &h0_basis)?;
        let v = build_v(params, &v_basis)?;
        let to_v = Permutation::between(&h0_basis, &v_basis)?;
        let jz = JzDiagonal::new(&h0_basis)?;
        let kernels = match method {
            Method::Exp => Kernels::Exp {
                h0_half: precompute_block_exponentials(&h0, dt / 2.0)?,
                v_full: precompute_block_exponentials(&v, dt)?,
            },
            // Cayley with beta approximates exp(-2 i beta H).
            Method::Linear => Kernels::Linear {
                h0_half: CayleyFactor::new(&h0, dt / 4.0)?,
                v_full: CayleyFactor::new(&v, dt / 2.0)?,
            },
        };
        Ok(Self {
            method,
            dt,
            params: *params,
            h0_basis,
            v_basis,
            h0,
            v,
            to_v,
            jz,
            drive: DriveSchedule::new(params),
            kernels,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.h0_basis.len()
    }

    pub fn h0_basis(&self) -> &OrderedBasis {
        &self.h0_basis
    }

    pub fn v_basis(&self) -> &OrderedBasis {
        &self.v_basis
    }

    pub fn h0(&self) -> &TridiagonalOperator {
        &self.h0
    }

    pub fn v(&self) -> &TridiagonalOperator {
        &self.v
    }

    pub fn permutation(&self) -> &Permutation {
        &self.to_v
    }

    pub fn jz(&self) -> &JzDiagonal {
        &self.jz
    }

    pub fn drive(&self) -> &DriveSchedule {
        &self.drive
    }

    /// `|0> (x) |J, -J>` in the H0 ordering.
    pub fn ground_state(&self) -> StateVector {
        StateVector::ground(&self.h0_basis)
    }

    /// Advance `state` (H0 ordering) from `t` to `t + dt`.
    ///
    /// The step runs on a scratch copy that is swapped in only on success.
    pub fn strang_step(&self, state: &mut StateVector, t: f64, ws: &mut StepWorkspace) -> Result<StepDiagnostics> {
        state.expect_tag(OrderingTag::H0)?;
        state.expect_len(self.dim())?;

        ws.scratch.clear();
        ws.scratch.extend_from_slice(state.amplitudes());
        ws.reindexed.resize(self.dim(), Complex64::new(0.0, 0.0));

        let half_angle = 0.5 * self.dt * self.drive.delta_at(t + 0.5 * self.dt);
        let mut orderings = [OrderingTag::H0; 3];

        apply_jz_phase(&mut ws.scratch, &self.jz, half_angle);
        orderings[0] = self.apply_h0_half(&mut ws.scratch, &mut ws.block_tmp);

        self.to_v.apply(&ws.scratch, &mut ws.reindexed);
        orderings[1] = self.apply_v_full(&mut ws.reindexed, &mut ws.block_tmp);
        self.to_v.apply_inverse(&ws.reindexed, &mut ws.scratch);

        orderings[2] = self.apply_h0_half(&mut ws.scratch, &mut ws.block_tmp);
        apply_jz_phase(&mut ws.scratch, &self.jz, half_angle);

        let pre = crate::state::norm(&ws.scratch);
        if !pre.is_finite() || pre == 0.0 {
            return Err(Error::Singular { row: 0, pivot: pre });
        }
        let inv = 1.0 / pre;
        ws.scratch.iter_mut().for_each(|a| *a *= inv);

        std::mem::swap(state.amplitudes_vec_mut(), &mut ws.scratch);
        Ok(StepDiagnostics {
            pre_renorm_norm: pre,
            orderings,
        })
    }

    fn apply_h0_half(&self, amps: &mut [Complex64], tmp: &mut Vec<Complex64>) -> OrderingTag {
        match &self.kernels {
            Kernels::Exp { h0_half, .. } => {
                h0_half.apply_in_place(amps, tmp);
                h0_half.tag
            }
            Kernels::Linear { h0_half, .. } => {
                h0_half.apply_in_place(amps);
                h0_half.tag
            }
        }
    }

    fn apply_v_full(&self, amps: &mut [Complex64], tmp: &mut Vec<Complex64>) -> OrderingTag {
        match &self.kernels {
            Kernels::Exp { v_full, .. } => {
                v_full.apply_in_place(amps, tmp);
                v_full.tag
            }
            Kernels::Linear { v_full, .. } => {
                v_full.apply_in_place(amps);
                v_full.tag
            }
        }
    }

    /// Number of complex entries held by the precomputed kernels.
    pub fn kernel_entries(&self) -> usize {
        match &self.kernels {
            Kernels::Exp { h0_half, v_full } => h0_half.stored_entries() + v_full.stored_entries(),
            Kernels::Linear { .. } => 3 * self.dim(),
        }
    }
}

/// Outcome of [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub state: StateVector,
    pub t_final: f64,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Propagation {
    /// Largest single-step `|norm - 1|` before renormalization.
    pub fn max_step_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.norm_drift().abs()).fold(0.0, f64::max)
    }

    /// `|prod_k norm_k - 1|`: the drift that would have built up without
    /// renormalization.
    pub fn accumulated_drift(&self) -> f64 {
        let log: f64 = self.diagnostics.iter().map(|d| d.pre_renorm_norm.ln()).sum();
        log.exp_m1().abs()
    }
}

/// Observer invoked after every step with `(step index, time, state)`.
pub type Observer<'a> = &'a mut dyn FnMut(usize, f64, &StateVector);

/// Run `n_steps` steps from `initial` at `t0`.
pub fn propagate(
    plan: &PropagatorPlan,
    initial: StateVector,
    t0: f64,
    n_steps: usize,
    mut observer: Option<Observer<'_>>,
) -> Result<Propagation> {
    let mut state = initial;
    let mut ws = StepWorkspace::new();
    let mut diagnostics = Vec::with_capacity(n_steps);
    let mut t = t0;
    for step in 0..n_steps {
        let diag = plan.strang_step(&mut state, t, &mut ws).map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })?;
        diagnostics.push(diag);
        // Recompute rather than accumulate so long runs do not drift in t.
        t = t0 + (step + 1) as f64 * plan.dt;
        if let Some(obs) = observer.as_mut() {
            obs(step + 1, t, &state);
        }
    }
    Ok(Propagation {
        state,
        t_final: t,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisState;

    fn params(n_cavity: usize, two_j: u32) -> ModelParams {
        ModelParams::from_ghz(2.4, 3.6, 0.01, 1.0, 6.0, n_cavity, two_j)
    }

    #[test]
    fn method_parse() {
        assert_eq!("exp".parse::<Method>().unwrap(), Method::Exp);
        assert_eq!("linear".parse::<Method>().unwrap(), Method::Linear);
        assert!("dense".parse::<Method>().is_err());
    }

    #[test]
    fn zero_theta_blocks_are_identity() {
        let plan = PropagatorPlan::new(&params(4, 3), 0.1, Method::Linear).unwrap();
        let blocks = precompute_block_exponentials(plan.h0(), 0.0).unwrap();
        for b in 0..blocks.block_count() {
            let m = blocks.block_matrix(b);
            let s = (m.len() as f64).sqrt() as usize;
            for i in 0..s {
                for j in 0..s {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((m[i * s + j] - Complex64::new(id, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn two_by_two_block_closed_form() {
        let g = 0.8;
        let t = 0.37;
        let op = TridiagonalOperator::new(OrderingTag::V, vec![0.0, 0.0], vec![g], vec![0..2]).unwrap();
        let m = precompute_block_exponentials(&op, t).unwrap().block_matrix(0);
        let (c, s) = ((g * t).cos(), (g * t).sin());
        let expected = [
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ];
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn block_unitaries_are_unitary() {
        let plan = PropagatorPlan::new(&params(9, 8), 0.05, Method::Exp).unwrap();
        for op in [plan.h0(), plan.v()] {
            let blocks = precompute_block_exponentials(op, 0.9).unwrap();
            for b in 0..blocks.block_count() {
                let m = blocks.block_matrix(b);
                let s = (m.len() as f64).sqrt().round() as usize;
                for i in 0..s {
                    for j in 0..s {
                        let dot: Complex64 = (0..s).map(|k| m[k * s + i].conj() * m[k * s + j]).sum();
                        let id = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - id).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn apply_blocks_checks_ordering() {
        let plan = PropagatorPlan::new(&params(3, 2), 0.1, Method::Exp).unwrap();
        let blocks = precompute_block_exponentials(plan.v(), 0.1).unwrap();
        let mut psi = plan.ground_state();
        assert!(matches!(apply_block_exponentials(&blocks, &mut psi), Err(Error::Usage(_))));
    }

    #[test]
    fn cayley_zero_beta_is_identity() {
        let plan = PropagatorPlan::new(&params(3, 2), 0.1, Method::Linear).unwrap();
        let mut psi = plan.ground_state();
        let before = psi.clone();
        cayley_apply(plan.h0(), 0.0, &mut psi).unwrap();
        assert_eq!(psi, before);
    }

    #[test]
    fn cayley_scalar() {
        let h = 3.0;
        let beta = 0.2;
        let op = TridiagonalOperator::new(OrderingTag::H0, vec![h], vec![], vec![0..1]).unwrap();
        let mut psi = StateVector::from_amplitudes(OrderingTag::H0, vec![Complex64::new(0.6, 0.8)]);
        cayley_apply(&op, beta, &mut psi).unwrap();
        let factor = Complex64::new(1.0, -beta * h) / Complex64::new(1.0, beta * h);
        assert!((psi.amplitudes()[0] - Complex64::new(0.6, 0.8) * factor).norm() < 1e-15);
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_step_is_exact_phase() {
        let mut p = params(4, 3);
        p.g = 0.0;
        p.lambda = 0.0;
        let dt = 0.013;
        let plan = PropagatorPlan::new(&p, dt, Method::Exp).unwrap();
        let target = BasisState::new(2, 1);
        let mut psi = StateVector::basis_state(plan.h0_basis(), target).unwrap();
        plan.strang_step(&mut psi, 0.4, &mut StepWorkspace::new()).unwrap();
        let slot = plan.h0_basis().slot(target).unwrap();
        let expected = Complex64::from_polar(1.0, -dt * (p.omega_c * 2.0 + p.omega_s * 0.5));
        assert!((psi.amplitudes()[slot] - expected).norm() < 1e-14);
    }

    #[test]
    fn zero_dt_is_identity() {
        for method in [Method::Exp, Method::Linear] {
            let plan = PropagatorPlan::new(&params(4, 3), 0.0, method).unwrap();
            let amps: Vec<Complex64> = (0..plan.dim()).map(|i| Complex64::new(1.0, i as f64 * 0.1)).collect();
            let mut psi = StateVector::from_amplitudes(OrderingTag::H0, amps);
            psi.normalize();
            let before = psi.clone();
            plan.strang_step(&mut psi, 0.0, &mut StepWorkspace::new()).unwrap();
            for (a, b) in psi.amplitudes().iter().zip(before.amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn step_brackets_v_between_permutations() {
        for method in [Method::Exp, Method::Linear] {
            let plan = PropagatorPlan::new(&params(4, 3), 1e-3, method).unwrap();
            let mut psi = plan.ground_state();
            let d = plan.strang_step(&mut psi, 0.0, &mut StepWorkspace::new()).unwrap();
            assert_eq!(d.orderings, [OrderingTag::H0, OrderingTag::V, OrderingTag::H0]);
        }
    }

    #[test]
    fn failed_step_leaves_state_untouched() {
        let plan = PropagatorPlan::new(&params(3, 2), 1e-3, Method::Linear).unwrap();
        let other = PropagatorPlan::new(&params(4, 2), 1e-3, Method::Linear).unwrap();
        let mut psi = other.ground_state();
        let before = psi.clone();
        assert!(plan.strang_step(&mut psi, 0.0, &mut StepWorkspace::new()).is_err());
        assert_eq!(psi, before);
    }

    #[test]
    fn propagate_zero_steps() {
        let plan = PropagatorPlan::new(&params(3, 2), 1e-3, Method::Linear).unwrap();
        let run = propagate(&plan, plan.ground_state(), 0.0, 0, None).unwrap();
        assert!(run.diagnostics.is_empty());
        assert_eq!(run.state, plan.ground_state());
        assert_eq!(run.t_final, 0.0);
    }

    #[test]
    fn propagate_reports_step_index() {
        let plan = PropagatorPlan::new(&params(3, 2), 1e-3, Method::Linear).unwrap();
        let wrong = StateVector::ground(plan.v_basis());
        match propagate(&plan, wrong, 0.0, 5, None) {
            Err(Error::Step { step: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn observer_sees_every_step() {
        let plan = PropagatorPlan::new(&params(3, 2), 1e-3, Method::Exp).unwrap();
        let mut seen = Vec::new();
        let mut obs = |k: usize, t: f64, s: &StateVector| seen.push((k, t, s.norm()));
        propagate(&plan, plan.ground_state(), 1.0, 4, Some(&mut obs)).unwrap();
        assert_eq!(seen.len(), 4);
        for (i, (k, t, n)) in seen.iter().enumerate() {
            assert_eq!(*k, i + 1);
            assert!((t - (1.0 + (i + 1) as f64 * 1e-3)).abs() < 1e-15);
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn oversized_linear_step_is_still_unitary() {
        // The Cayley pivot 1 + i beta h never vanishes for real h.
        let plan = PropagatorPlan::new(&params(6, 5), 10.0, Method::Linear).unwrap();
        let mut psi = plan.ground_state();
        let d = plan.strang_step(&mut psi, 0.0, &mut StepWorkspace::new()).unwrap();
        assert!(d.norm_drift().abs() < 1e-12);
    }
}
