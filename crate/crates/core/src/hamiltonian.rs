//! Tridiagonal Hamiltonian parts and the diagonal drive.
//!
//! `H(t) = H0 + V + Delta(t) Jz` with
//! `H0 = omega_c a^dag a + g (a J+ + a^dag J-)` (conserves `n + m`) and
//! `V = g (a J- + a^dag J+)` (conserves `n - m`).

use std::ops::Range;

use num_complex::Complex64;

use crate::basis::{ModelParams, OrderedBasis, OrderingTag};
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Real symmetric tridiagonal matrix tied to one basis ordering.
///
/// `off[i]` couples positions `i` and `i + 1`; it is exactly zero where the
/// two positions sit in different conserved-key blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    tag: OrderingTag,
    diag: Vec<f64>,
    off: Vec<f64>,
    blocks: Vec<Range<usize>>,
}

impl TridiagonalOperator {
    pub fn new(tag: OrderingTag, diag: Vec<f64>, off: Vec<f64>, blocks: Vec<Range<usize>>) -> Result<Self> {
        if off.len() + 1 != diag.len().max(1) {
            return Err(Error::Usage(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off.len(),
                diag.len()
            )));
        }
        Ok(Self { tag, diag, off, blocks })
    }

    pub fn tag(&self) -> OrderingTag {
        self.tag
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.diag.len();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off[i];
            }
            y[i] = acc;
        }
    }

    /// Scatter into a dense row-major `D x D` matrix in canonical indexing.
    pub fn to_dense_canonical(&self, basis: &OrderedBasis) -> Result<Vec<f64>> {
        if basis.tag() != self.tag || basis.len() != self.len() {
            return Err(Error::Usage("basis does not index this operator".into()));
        }
        let d = self.len();
        let two_j = basis.two_j();
        let idx: Vec<usize> = basis.states().iter().map(|s| s.canonical_index(two_j)).collect();
        let mut dense = vec![0.0; d * d];
        for i in 0..d {
            dense[idx[i] * d + idx[i]] = self.diag[i];
        }
        for (i, &o) in self.off.iter().enumerate() {
            dense[idx[i] * d + idx[i + 1]] = o;
            dense[idx[i + 1] * d + idx[i]] = o;
        }
        Ok(dense)
    }
}

/// `(J - m)(J + m + 1)` from doubled integers, i.e. `J(J+1) - m(m+1)`.
fn raise_factor(two_j: u32, two_m: i32) -> f64 {
    let two_j = i64::from(two_j);
    let two_m = i64::from(two_m);
    ((two_j - two_m) * (two_j + two_m + 2)) as f64 / 4.0
}

/// `(J + m)(J - m + 1)`, i.e. `J(J+1) - m(m-1)`.
fn lower_factor(two_j: u32, two_m: i32) -> f64 {
    let two_j = i64::from(two_j);
    let two_m = i64::from(two_m);
    ((two_j + two_m) * (two_j - two_m + 2)) as f64 / 4.0
}

fn expect_ordering(basis: &OrderedBasis, tag: OrderingTag) -> Result<()> {
    if basis.tag() != tag {
        return Err(Error::Usage(format!(
            "operator needs the {tag:?} ordering, got {:?}",
            basis.tag()
        )));
    }
    Ok(())
}

/// Tridiagonal `H0` over the `n + m + J` ordering.
///
/// Inside a block, neighbours are `(n, m)` and `(n - 1, m + 1)`, coupled by
/// `g sqrt(n [J(J+1) - m(m+1)])`.
pub fn build_h0(params: &ModelParams, basis: &OrderedBasis) -> Result<TridiagonalOperator> {
    expect_ordering(basis, OrderingTag::H0)?;
    let states = basis.states();
    let diag = states.iter().map(|s| params.omega_c * f64::from(s.n)).collect();
    let mut off = vec![0.0; states.len().saturating_sub(1)];
    for block in basis.blocks() {
        for i in block.start..block.end - 1 {
            let (lo, hi) = (states[i], states[i + 1]);
            if hi.n + 1 != lo.n || hi.two_m != lo.two_m + 2 {
                return Err(Error::Consistency(format!("{lo:?} and {hi:?} are not H0 neighbours")));
            }
            off[i] = params.g * (f64::from(lo.n) * raise_factor(basis.two_j(), lo.two_m)).sqrt();
        }
    }
    TridiagonalOperator::new(OrderingTag::H0, diag, off, basis.blocks().to_vec())
}

/// Tridiagonal `V` over the `n - m` ordering (zero diagonal).
///
/// Inside a block, neighbours are `(n, m)` and `(n + 1, m + 1)`, coupled by
/// `g sqrt((n+1) [J(J+1) - (m+1) m])`.
pub fn build_v(params: &ModelParams, basis: &OrderedBasis) -> Result<TridiagonalOperator> {
    expect_ordering(basis, OrderingTag::V)?;
    let states = basis.states();
    let diag = vec![0.0; states.len()];
    let mut off = vec![0.0; states.len().saturating_sub(1)];
    for block in basis.blocks() {
        for i in block.start..block.end - 1 {
            let (lo, hi) = (states[i], states[i + 1]);
            if hi.n != lo.n + 1 || hi.two_m != lo.two_m + 2 {
                return Err(Error::Consistency(format!("{lo:?} and {hi:?} are not V neighbours")));
            }
            off[i] = params.g * (f64::from(hi.n) * lower_factor(basis.two_j(), hi.two_m)).sqrt();
        }
    }
    TridiagonalOperator::new(OrderingTag::V, diag, off, basis.blocks().to_vec())
}

/// Spin-frequency modulation `Delta(t) = omega_s + Lambda sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSchedule {
    pub omega_s: f64,
    pub lambda: f64,
    pub omega_drive: f64,
}

impl DriveSchedule {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            omega_s: params.omega_s,
            lambda: params.lambda,
            omega_drive: params.omega_drive,
        }
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        self.omega_s + self.lambda * (self.omega_drive * t).sin()
    }
}

/// `m` of each state in the H0 ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct JzDiagonal {
    m_values: Vec<f64>,
    /// `m + J` of each state, indexing a per-step phase table.
    levels: Vec<u32>,
    two_j: u32,
}

impl JzDiagonal {
    pub fn new(basis: &OrderedBasis) -> Result<Self> {
        expect_ordering(basis, OrderingTag::H0)?;
        let two_j = basis.two_j();
        Ok(Self {
            m_values: basis.states().iter().map(|s| s.m()).collect(),
            levels: basis.states().iter().map(|s| ((s.two_m + two_j as i32) / 2) as u32).collect(),
            two_j,
        })
    }

    pub fn m_values(&self) -> &[f64] {
        &self.m_values
    }
}

/// Multiply amplitude `i` by `exp(-i angle m_i)`.
pub fn diagonal_phase(state: &mut StateVector, jz: &JzDiagonal, angle: f64) -> Result<()> {
    state.expect_tag(OrderingTag::H0)?;
    state.expect_len(jz.m_values.len())?;
    apply_jz_phase(state.amplitudes_mut(), jz, angle);
    Ok(())
}

pub(crate) fn apply_jz_phase(amps: &mut [Complex64], jz: &JzDiagonal, angle: f64) {
    if angle == 0.0 {
        return;
    }
    let j = 0.5 * f64::from(jz.two_j);
    let table: Vec<Complex64> = (0..=jz.two_j)
        .map(|k| Complex64::from_polar(1.0, -angle * (f64::from(k) - j)))
        .collect();
    for (a, &level) in amps.iter_mut().zip(&jz.levels) {
        *a *= table[level as usize];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, BasisState};

    fn setup(params: &ModelParams) -> (OrderedBasis, OrderedBasis) {
        let s = enumerate_basis(params).unwrap();
        (
            OrderedBasis::for_h0(params, &s).unwrap(),
            OrderedBasis::for_v(params, &s).unwrap(),
        )
    }

    fn unit_params(n_cavity: usize, two_j: u32, g: f64) -> ModelParams {
        ModelParams {
            omega_c: 1.0,
            omega_s: 1.5,
            g,
            lambda: 0.3,
            omega_drive: 2.5,
            n_cavity,
            two_j,
        }
    }

    #[test]
    fn h0_diagonal_is_photon_energy() {
        let p = unit_params(5, 2, 0.1);
        let (h0b, _) = setup(&p);
        let h0 = build_h0(&p, &h0b).unwrap();
        for (s, &d) in h0b.states().iter().zip(h0.diag()) {
            assert_eq!(d, f64::from(s.n));
        }
        let slot = h0b.slot(BasisState::new(3, 0)).unwrap();
        assert_eq!(h0.diag()[slot], 3.0);
    }

    #[test]
    fn h0_qubit_coupling_is_g() {
        let g = 0.37;
        let p = unit_params(2, 1, g);
        let (h0b, _) = setup(&p);
        let h0 = build_h0(&p, &h0b).unwrap();
        // order: (0,-1/2) | (1,-1/2) (0,+1/2) | (1,+1/2)
        assert_eq!(h0.off(), &[0.0, g, 0.0]);
    }

    #[test]
    fn h0_lowest_spin_coupling() {
        let g = 0.2;
        for two_j in 1..8u32 {
            let p = unit_params(3, two_j, g);
            let (h0b, _) = setup(&p);
            let h0 = build_h0(&p, &h0b).unwrap();
            let slot = h0b.slot(BasisState::new(1, -(two_j as i32))).unwrap();
            let expected = g * f64::from(two_j).sqrt();
            assert!((h0.off()[slot] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_is_diagonal() {
        let p = unit_params(4, 3, 0.0);
        let (h0b, vb) = setup(&p);
        assert!(build_h0(&p, &h0b).unwrap().off().iter().all(|&o| o == 0.0));
        assert!(build_v(&p, &vb).unwrap().off().iter().all(|&o| o == 0.0));
    }

    #[test]
    fn v_qubit_coupling_is_g() {
        let g = 0.37;
        let p = unit_params(2, 1, g);
        let (_, vb) = setup(&p);
        let v = build_v(&p, &vb).unwrap();
        assert!(v.diag().iter().all(|&d| d == 0.0));
        // order: (0,+1/2) | (0,-1/2) (1,+1/2) | (1,-1/2)
        assert_eq!(v.off(), &[0.0, g, 0.0]);
    }

    #[test]
    fn v_highest_spin_coupling() {
        let g = 0.2;
        for two_j in 1..8u32 {
            let p = unit_params(3, two_j, g);
            let (_, vb) = setup(&p);
            let v = build_v(&p, &vb).unwrap();
            let upper = vb.slot(BasisState::new(1, two_j as i32)).unwrap();
            assert_eq!(vb.states()[upper - 1], BasisState::new(0, two_j as i32 - 2));
            let expected = g * f64::from(two_j).sqrt();
            assert!((v.off()[upper - 1] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn wrong_ordering_rejected() {
        let p = unit_params(2, 1, 0.1);
        let (h0b, vb) = setup(&p);
        assert!(matches!(build_h0(&p, &vb), Err(Error::Usage(_))));
        assert!(matches!(build_v(&p, &h0b), Err(Error::Usage(_))));
        assert!(matches!(JzDiagonal::new(&vb), Err(Error::Usage(_))));
    }

    #[test]
    fn block_boundaries_are_exact_zeros() {
        let p = unit_params(6, 5, 0.3);
        let (h0b, vb) = setup(&p);
        for op in [build_h0(&p, &h0b).unwrap(), build_v(&p, &vb).unwrap()] {
            for b in &op.blocks()[..op.blocks().len() - 1] {
                assert_eq!(op.off()[b.end - 1].to_bits(), 0.0f64.to_bits());
            }
        }
    }

    #[test]
    fn drive_values() {
        let p = unit_params(2, 1, 0.1);
        let d = DriveSchedule::new(&p);
        assert_eq!(d.delta_at(0.0), p.omega_s);
        let peak = std::f64::consts::FRAC_PI_2 / p.omega_drive;
        assert!((d.delta_at(peak) - (p.omega_s + p.lambda)).abs() < 1e-15);
        let flat = DriveSchedule { lambda: 0.0, ..d };
        for t in [0.0, 0.3, 17.0] {
            assert_eq!(flat.delta_at(t), p.omega_s);
        }
    }

    #[test]
    fn diagonal_phase_behaviour() {
        let p = unit_params(3, 4, 0.1);
        let (h0b, _) = setup(&p);
        let jz = JzDiagonal::new(&h0b).unwrap();

        let mut psi = StateVector::ground(&h0b);
        let before = psi.clone();
        diagonal_phase(&mut psi, &jz, 0.0).unwrap();
        assert_eq!(psi, before);

        let theta = 0.731;
        diagonal_phase(&mut psi, &jz, theta).unwrap();
        let slot = h0b.slot(BasisState::new(0, -4)).unwrap();
        let expected = Complex64::from_polar(1.0, theta * 2.0);
        assert!((psi.amplitudes()[slot] - expected).norm() < 1e-15);

        let mut mixed = StateVector::from_amplitudes(
            OrderingTag::H0,
            (0..h0b.len()).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect(),
        );
        let n0 = mixed.norm();
        diagonal_phase(&mut mixed, &jz, 1.3).unwrap();
        assert!((mixed.norm() - n0).abs() <= 1e-14 * n0);

        let short = &mut StateVector::from_amplitudes(OrderingTag::H0, vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(diagonal_phase(short, &jz, 1.0), Err(Error::Usage(_))));
    }
}
