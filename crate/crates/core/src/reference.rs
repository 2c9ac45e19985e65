//! Brute-force oracles.
//!
//! [`DenseHamiltonian`] assembles the full Hamiltonian from ladder-operator
//! definitions in the canonical `(n, m)` indexing, and [`dense_propagate`]
//! steps it with exact exponentials of the midpoint-frozen `H`. The
//! Holstein-Primakoff comparator in [`hp_covariance_propagate`] evolves the
//! Gaussian moments of the large-`J` bosonized model.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::basis::ModelParams;
use crate::error::{Error, Result};
use crate::hamiltonian::DriveSchedule;
use crate::observables::{covariance_eigenvalues, CovarianceMatrix2x2};

/// Largest dimension the dense oracle accepts.
pub const DENSE_LIMIT: usize = 4096;

/// Annihilation operator on `levels` Fock states.
pub fn annihilation(levels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(levels, levels, |r, c| if c == r + 1 { (c as f64).sqrt() } else { 0.0 })
}

/// `J-` on the `2J + 1` Dicke states, indexed by `m` ascending.
pub fn spin_lowering(two_j: u32) -> DMatrix<f64> {
    let mult = two_j as usize + 1;
    let j = f64::from(two_j) / 2.0;
    DMatrix::from_fn(mult, mult, |r, c| {
        if c == r + 1 {
            let m = -j + c as f64;
            ((j + m) * (j - m + 1.0)).sqrt()
        } else {
            0.0
        }
    })
}

/// `Jz` on the Dicke states.
pub fn spin_z(two_j: u32) -> DMatrix<f64> {
    let mult = two_j as usize + 1;
    let j = f64::from(two_j) / 2.0;
    DMatrix::from_fn(mult, mult, |r, c| if r == c { -j + r as f64 } else { 0.0 })
}

/// The three Hamiltonian parts as dense real matrices in canonical indexing.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub h0: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub jz: DMatrix<f64>,
    pub drive: DriveSchedule,
}

impl DenseHamiltonian {
    pub fn build(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let dim = params.dim()?;
        if dim > DENSE_LIMIT {
            return Err(Error::OracleGuard { dim, limit: DENSE_LIMIT });
        }
        let a = annihilation(params.n_cavity);
        let ad = a.transpose();
        let jm = spin_lowering(params.two_j);
        let jp = jm.transpose();
        let id_c = DMatrix::<f64>::identity(params.n_cavity, params.n_cavity);
        let id_s = DMatrix::<f64>::identity(jm.nrows(), jm.nrows());

        let number = (&ad * &a).kronecker(&id_s);
        let h0 = number * params.omega_c + (a.kronecker(&jp) + ad.kronecker(&jm)) * params.g;
        let v = (a.kronecker(&jm) + ad.kronecker(&jp)) * params.g;
        let jz = id_c.kronecker(&spin_z(params.two_j));
        Ok(Self {
            h0,
            v,
            jz,
            drive: DriveSchedule::new(params),
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    /// `H(t) = H0 + V + Delta(t) Jz`.
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        &self.h0 + &self.v + &self.jz * self.drive.delta_at(t)
    }

    /// `<psi|H(t)|psi>` for canonical amplitudes.
    pub fn energy(&self, psi: &[Complex64], t: f64) -> f64 {
        let h = self.at(t);
        let (re, im) = split(psi);
        let hre = &h * &re;
        let him = &h * &im;
        re.dot(&hre) + im.dot(&him)
    }
}

fn split(psi: &[Complex64]) -> (nalgebra::DVector<f64>, nalgebra::DVector<f64>) {
    (
        nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|c| c.re)),
        nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|c| c.im)),
    )
}

/// `exp(-i dt H) psi` for real symmetric `H` via its eigendecomposition.
///
/// Each call reconstructs the propagator from `O(D^2)` eigenvector entries,
/// leaving a roundoff of roughly `D eps` per application; long runs should
/// use [`expm_apply`].
pub fn exp_apply_eigen(h: DMatrix<f64>, dt: f64, psi: &mut [Complex64]) {
    let dim = psi.len();
    let eig = SymmetricEigen::new(h);
    let q = &eig.eigenvectors;
    let mut coeffs = q.tr_mul(&to_columns(psi));
    for k in 0..dim {
        let z = Complex64::new(coeffs[(k, 0)], coeffs[(k, 1)]) * Complex64::from_polar(1.0, -dt * eig.eigenvalues[k]);
        coeffs[(k, 0)] = z.re;
        coeffs[(k, 1)] = z.im;
    }
    from_columns(&(q * coeffs), psi);
}

/// Largest `||dt H||_inf` handled by one Taylor expansion.
const TAYLOR_PIECE_NORM: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 40;

/// `exp(-i dt H) psi` for real symmetric `H`, summing the Taylor series
/// until terms fall below machine precision. `dt` is split into pieces with
/// `||dt H|| <= 1/2`; the pieces commute, so the result is the exact
/// exponential up to rounding.
pub fn expm_apply(h: &DMatrix<f64>, dt: f64, psi: &mut [Complex64]) {
    let dim = psi.len();
    assert_eq!(h.nrows(), dim);
    let row_norm = h.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let pieces = ((row_norm * dt.abs()) / TAYLOR_PIECE_NORM).ceil().max(1.0) as usize;
    let tau = dt / pieces as f64;

    let mut x = to_columns(psi);
    let mut term = DMatrix::<f64>::zeros(dim, 2);
    let mut h_term = DMatrix::<f64>::zeros(dim, 2);
    for _ in 0..pieces {
        term.copy_from(&x);
        for k in 1..=TAYLOR_MAX_TERMS {
            h_term.gemm(1.0, h, &term, 0.0);
            // term <- (-i tau / k) H term, on (re, im) columns.
            let c = tau / k as f64;
            for i in 0..dim {
                term[(i, 0)] = c * h_term[(i, 1)];
                term[(i, 1)] = -c * h_term[(i, 0)];
            }
            x += &term;
            if term.norm() <= f64::EPSILON * 1e-2 * x.norm() {
                break;
            }
        }
    }
    from_columns(&x, psi);
}

fn to_columns(psi: &[Complex64]) -> DMatrix<f64> {
    DMatrix::from_fn(psi.len(), 2, |i, j| if j == 0 { psi[i].re } else { psi[i].im })
}

fn from_columns(cols: &DMatrix<f64>, psi: &mut [Complex64]) {
    for (i, c) in psi.iter_mut().enumerate() {
        *c = Complex64::new(cols[(i, 0)], cols[(i, 1)]);
    }
}

/// Callback on `(substep index, time, canonical amplitudes)`.
pub type DenseObserver<'a> = &'a mut dyn FnMut(usize, f64, &[Complex64]);

/// Step canonical amplitudes `psi` from `t0` through `n_steps` substeps of
/// `dt`, each applying the exact exponential of the midpoint-frozen
/// `H(t + dt/2)`.
///
/// `observer` sees `(substep index, time, amplitudes)` after each substep.
pub fn dense_propagate(
    dense: &DenseHamiltonian,
    initial: &[Complex64],
    t0: f64,
    n_steps: usize,
    dt: f64,
    mut observer: Option<DenseObserver<'_>>,
) -> Result<Vec<Complex64>> {
    if initial.len() != dense.dim() {
        return Err(Error::Usage(format!(
            "initial state has {} amplitudes, oracle dimension is {}",
            initial.len(),
            dense.dim()
        )));
    }
    let mut psi = initial.to_vec();
    let mut h = DMatrix::<f64>::zeros(dense.dim(), dense.dim());
    let base = &dense.h0 + &dense.v;
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        let delta = dense.drive.delta_at(t + 0.5 * dt);
        h.copy_from(&base);
        for i in 0..dense.dim() {
            h[(i, i)] += delta * dense.jz[(i, i)];
        }
        expm_apply(&h, dt, &mut psi);
        if let Some(obs) = observer.as_mut() {
            obs(k + 1, t0 + (k + 1) as f64 * dt, &psi);
        }
    }
    Ok(psi)
}

/// A dense-oracle final state accepted as converged in `dt_oracle`.
#[derive(Debug, Clone)]
pub struct ConvergedReference {
    /// Richardson combination `(4 psi(dt/2) - psi(dt)) / 3` of the last two
    /// runs, renormalized.
    pub state: Vec<Complex64>,
    /// Step of the finest run.
    pub dt_oracle: f64,
    /// Change that met the tolerance.
    pub change: f64,
}

/// Halve `dt_oracle` from `dt_start` until two successive final states (or
/// two successive extrapolated states) differ by less than `tol` in norm.
pub fn converged_reference(
    dense: &DenseHamiltonian,
    initial: &[Complex64],
    t0: f64,
    horizon: f64,
    dt_start: f64,
    tol: f64,
    max_halvings: usize,
) -> Result<ConvergedReference> {
    let steps_for = |dt: f64| -> Result<usize> {
        let n = (horizon / dt).round();
        if !(n >= 1.0) || ((n * dt - horizon).abs() > 1e-9 * horizon.abs()) {
            return Err(Error::Usage(format!("horizon {horizon} is not a multiple of dt_oracle {dt}")));
        }
        Ok(n as usize)
    };
    let mut dt = dt_start;
    let mut coarse = dense_propagate(dense, initial, t0, steps_for(dt)?, dt, None)?;
    let mut last_extrapolated: Option<Vec<Complex64>> = None;
    let mut change = f64::INFINITY;
    for _ in 0..max_halvings {
        dt *= 0.5;
        let fine = dense_propagate(dense, initial, t0, steps_for(dt)?, dt, None)?;
        let mut extrapolated: Vec<Complex64> = fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect();
        let n = crate::state::norm(&extrapolated);
        extrapolated.iter_mut().for_each(|a| *a /= n);

        let raw_change = distance(&fine, &coarse);
        let extrapolated_change = last_extrapolated
            .as_ref()
            .map_or(f64::INFINITY, |prev| distance(prev, &extrapolated));
        change = raw_change.min(extrapolated_change);
        if change < tol {
            return Ok(ConvergedReference { state: extrapolated, dt_oracle: dt, change });
        }
        last_extrapolated = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::NotConverged {
        what: "dense oracle".into(),
        change,
    })
}

fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Gaussian moments of the two-mode bosonized model, ordered
/// `(X_a, Y_a, X_b, Y_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl GaussianState {
    /// Both modes in vacuum.
    pub fn vacuum() -> Self {
        Self {
            mean: Vector4::zeros(),
            covariance: Matrix4::identity() * 0.25,
        }
    }

    pub fn cavity_covariance(&self) -> CovarianceMatrix2x2 {
        CovarianceMatrix2x2 {
            cxx: self.covariance[(0, 0)],
            cyy: self.covariance[(1, 1)],
            cxy: 0.5 * (self.covariance[(0, 1)] + self.covariance[(1, 0)]),
        }
    }

    /// `<a^dag a>` (`k = 0`) or `<b^dag b>` (`k = 1`).
    pub fn mode_occupation(&self, k: usize) -> f64 {
        let (x, y) = (2 * k, 2 * k + 1);
        self.covariance[(x, x)] + self.covariance[(y, y)] + self.mean[x].powi(2) + self.mean[y].powi(2) - 0.5
    }
}

/// Covariance norm beyond which the comparator reports divergence.
pub const HP_DIVERGENCE_CAP: f64 = 1e6;

/// Linear drift of the quadratures under
/// `omega_c a^dag a + Delta(t) b^dag b + G (a + a^dag)(b + b^dag)`,
/// `G = g sqrt(2J)`, which follows from `Jz -> b^dag b - J`,
/// `J- -> sqrt(2J) b`.
pub fn hp_drift(params: &ModelParams, delta: f64) -> Matrix4<f64> {
    let coupling = 2.0 * params.g * (2.0 * params.spin()).sqrt();
    let wc = params.omega_c;
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0,       wc,  0.0,       0.0,
        -wc,       0.0, -coupling, 0.0,
        0.0,       0.0, 0.0,       delta,
        -coupling, 0.0, -delta,    0.0,
    );
    m
}

fn hp_rates(params: &ModelParams, drive: &DriveSchedule, t: f64, s: &GaussianState) -> GaussianState {
    let m = hp_drift(params, drive.delta_at(t));
    GaussianState {
        mean: m * s.mean,
        covariance: m * s.covariance + s.covariance * m.transpose(),
    }
}

fn axpy(a: &GaussianState, h: f64, k: &GaussianState) -> GaussianState {
    GaussianState {
        mean: a.mean + k.mean * h,
        covariance: a.covariance + k.covariance * h,
    }
}

/// One classical RK4 step of the moment equations.
pub fn hp_rk4_step(params: &ModelParams, drive: &DriveSchedule, t: f64, h: f64, s: &GaussianState) -> GaussianState {
    let k1 = hp_rates(params, drive, t, s);
    let k2 = hp_rates(params, drive, t + 0.5 * h, &axpy(s, 0.5 * h, &k1));
    let k3 = hp_rates(params, drive, t + 0.5 * h, &axpy(s, 0.5 * h, &k2));
    let k4 = hp_rates(params, drive, t + h, &axpy(s, h, &k3));
    GaussianState {
        mean: s.mean + (k1.mean + (k2.mean + k3.mean) * 2.0 + k4.mean) * (h / 6.0),
        covariance: s.covariance
            + (k1.covariance + (k2.covariance + k3.covariance) * 2.0 + k4.covariance) * (h / 6.0),
    }
}

/// Gaussian moments of the bosonized model at each time of `t_grid`
/// (ascending, starting from the double vacuum at `t_grid[0]`), integrating
/// with steps no longer than `max_step`.
pub fn hp_propagate_states(params: &ModelParams, t_grid: &[f64], max_step: f64) -> Result<Vec<GaussianState>> {
    if params.two_j == 0 {
        return Err(Error::Config("the bosonized comparator needs J > 0".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::Usage(format!("max_step must be positive, got {max_step}")));
    }
    let drive = DriveSchedule::new(params);
    let mut state = GaussianState::vacuum();
    let mut out = Vec::with_capacity(t_grid.len());
    let Some(&first) = t_grid.first() else {
        return Ok(out);
    };
    let mut t = first;
    for &target in t_grid {
        let span = target - t;
        if span < 0.0 {
            return Err(Error::Usage("time grid must be ascending".into()));
        }
        let substeps = (span / max_step).ceil() as usize;
        if substeps > 0 {
            let h = span / substeps as f64;
            for k in 0..substeps {
                state = hp_rk4_step(params, &drive, t + k as f64 * h, h, &state);
            }
            let norm = state.covariance.norm();
            if !(norm <= HP_DIVERGENCE_CAP) {
                return Err(Error::Divergence { time: target, norm });
            }
        }
        t = target;
        out.push(state);
    }
    Ok(out)
}

/// Cavity covariance eigenvalues `(lambda_minus, lambda_plus)` along
/// [`hp_propagate_states`].
pub fn hp_covariance_propagate(params: &ModelParams, t_grid: &[f64], max_step: f64) -> Result<Vec<(f64, f64)>> {
    Ok(hp_propagate_states(params, t_grid, max_step)?
        .iter()
        .map(|s| covariance_eigenvalues(&s.cavity_covariance()))
        .collect())
}
