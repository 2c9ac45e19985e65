//! Cavity quadrature covariance and diagnostics.
//!
//! Quadratures are `X = (a + a^dag)/2`, `Y = (a - a^dag)/(2i)`, so the
//! vacuum has variance 1/4 in each.

use num_complex::Complex64;

use crate::basis::{OrderedBasis, OrderingTag};
use crate::error::Result;
use crate::hamiltonian::JzDiagonal;
use crate::state::StateVector;

/// Truncation warning threshold on the population of the top Fock level.
pub const TRUNCATION_WARNING: f64 = 1e-6;

/// First and second cavity moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMoments {
    pub mean_a: Complex64,
    pub mean_a2: Complex64,
    pub mean_n: f64,
}

/// Symmetrized covariance of `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix2x2 {
    pub cxx: f64,
    pub cyy: f64,
    pub cxy: f64,
}

impl CovarianceMatrix2x2 {
    /// `(lambda_minus, lambda_plus)`, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        covariance_eigenvalues(self)
    }
}

/// Precomputed index maps for O(D) cavity moments over the H0 ordering.
#[derive(Debug, Clone)]
pub struct CavityIndex {
    /// Slot of `(n - 1, m)` for each slot, `usize::MAX` at `n = 0`.
    lower: Vec<usize>,
    photons: Vec<f64>,
    top_level: u32,
}

const NONE: usize = usize::MAX;

impl CavityIndex {
    pub fn new(basis: &OrderedBasis) -> Self {
        let lower = basis
            .states()
            .iter()
            .map(|s| {
                if s.n == 0 {
                    NONE
                } else {
                    basis
                        .slot(crate::basis::BasisState::new(s.n - 1, s.two_m))
                        .expect("lower Fock neighbour exists in a complete basis")
                }
            })
            .collect();
        let photons = basis.states().iter().map(|s| f64::from(s.n)).collect();
        Self {
            lower,
            photons,
            top_level: basis.n_cavity() as u32 - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// `<a>`, `<a^2>` and `<a^dag a>` from exact sums over amplitude pairs.
pub fn cavity_moments(state: &StateVector, index: &CavityIndex) -> Result<CavityMoments> {
    state.expect_tag(OrderingTag::H0)?;
    state.expect_len(index.len())?;
    let amps = state.amplitudes();
    let mut mean_a = Complex64::new(0.0, 0.0);
    let mut mean_a2 = Complex64::new(0.0, 0.0);
    let mut mean_n = 0.0;
    for (i, c) in amps.iter().enumerate() {
        let n = index.photons[i];
        mean_n += n * c.norm_sqr();
        let j = index.lower[i];
        if j == NONE {
            continue;
        }
        mean_a += amps[j].conj() * c * n.sqrt();
        let k = index.lower[j];
        if k != NONE {
            mean_a2 += amps[k].conj() * c * (n * (n - 1.0)).sqrt();
        }
    }
    Ok(CavityMoments { mean_a, mean_a2, mean_n })
}

pub fn covariance_from_moments(m: &CavityMoments) -> CovarianceMatrix2x2 {
    let (re_a, im_a) = (m.mean_a.re, m.mean_a.im);
    CovarianceMatrix2x2 {
        cxx: 0.25 * (2.0 * m.mean_n + 1.0 + 2.0 * m.mean_a2.re) - re_a * re_a,
        cyy: 0.25 * (2.0 * m.mean_n + 1.0 - 2.0 * m.mean_a2.re) - im_a * im_a,
        cxy: 0.5 * m.mean_a2.im - re_a * im_a,
    }
}

pub fn covariance_eigenvalues(c: &CovarianceMatrix2x2) -> (f64, f64) {
    let mean = 0.5 * (c.cxx + c.cyy);
    let half_diff = 0.5 * (c.cxx - c.cyy);
    let radius = half_diff.hypot(c.cxy);
    (mean - radius, mean + radius)
}

/// `<Jz>` for a state in the H0 ordering.
pub fn spin_jz_expectation(state: &StateVector, jz: &JzDiagonal) -> Result<f64> {
    state.expect_tag(OrderingTag::H0)?;
    state.expect_len(jz.m_values().len())?;
    Ok(state
        .amplitudes()
        .iter()
        .zip(jz.m_values())
        .map(|(c, m)| m * c.norm_sqr())
        .sum())
}

/// Population of the highest retained Fock level.
pub fn top_fock_population(state: &StateVector, index: &CavityIndex) -> Result<f64> {
    state.expect_tag(OrderingTag::H0)?;
    state.expect_len(index.len())?;
    if index.top_level == 0 {
        // A single level is always fully occupied; report it as such.
        return Ok(state.amplitudes().iter().map(|c| c.norm_sqr()).sum());
    }
    let top = f64::from(index.top_level);
    Ok(state
        .amplitudes()
        .iter()
        .zip(&index.photons)
        .filter(|(_, &n)| n == top)
        .map(|(c, _)| c.norm_sqr())
        .sum())
}

pub fn norm(state: &StateVector) -> f64 {
    state.norm()
}

/// The observable set recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mean_photon: f64,
    pub jz_expect: f64,
    pub top_fock_pop: f64,
}

impl Snapshot {
    pub fn take(state: &StateVector, index: &CavityIndex, jz: &JzDiagonal) -> Result<Self> {
        let moments = cavity_moments(state, index)?;
        let (lambda_minus, lambda_plus) = covariance_from_moments(&moments).eigenvalues();
        Ok(Self {
            lambda_minus,
            lambda_plus,
            mean_photon: moments.mean_n,
            jz_expect: spin_jz_expectation(state, jz)?,
            top_fock_pop: top_fock_population(state, index)?,
        })
    }
}
