use num_complex::Complex64;

use crate::basis::{BasisState, OrderedBasis, OrderingTag};
use crate::error::{Error, Result};

/// Complex amplitudes over one ordering of the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    tag: OrderingTag,
}

impl StateVector {
    pub fn from_amplitudes(tag: OrderingTag, amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes, tag }
    }

    /// The product state `|n> (x) |J, m>` indexed by `basis`.
    pub fn basis_state(basis: &OrderedBasis, state: BasisState) -> Result<Self> {
        let slot = basis
            .slot(state)
            .ok_or_else(|| Error::Usage(format!("{state:?} is not in the basis")))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[slot] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, tag: basis.tag() })
    }

    /// Cavity vacuum with the spin fully down, `|0> (x) |J, -J>`.
    pub fn ground(basis: &OrderedBasis) -> Self {
        let two_j = basis.two_j() as i32;
        Self::basis_state(basis, BasisState::new(0, -two_j)).expect("ground state is always in the basis")
    }

    /// Reorder canonical-indexed amplitudes into `basis`.
    pub fn from_canonical(basis: &OrderedBasis, canonical: &[Complex64]) -> Result<Self> {
        if canonical.len() != basis.len() {
            return Err(Error::Usage(format!(
                "expected {} amplitudes, got {}",
                basis.len(),
                canonical.len()
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (c, &slot) in basis.canonical_slots().iter().enumerate() {
            amplitudes[slot] = canonical[c];
        }
        Ok(Self { amplitudes, tag: basis.tag() })
    }

    /// Amplitudes in canonical (n ascending, m ascending) order.
    pub fn to_canonical(&self, basis: &OrderedBasis) -> Result<Vec<Complex64>> {
        self.expect_tag(basis.tag())?;
        self.expect_len(basis.len())?;
        Ok(basis.canonical_slots().iter().map(|&slot| self.amplitudes[slot]).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn tag(&self) -> OrderingTag {
        self.tag
    }

    pub(crate) fn amplitudes_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Scale to unit norm and return the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    /// `<self|other>`; both states must share an ordering.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        other.expect_tag(self.tag)?;
        other.expect_len(self.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn expect_tag(&self, tag: OrderingTag) -> Result<()> {
        if self.tag != tag {
            return Err(Error::Usage(format!(
                "state is indexed in the {:?} ordering, expected {:?}",
                self.tag, tag
            )));
        }
        Ok(())
    }

    pub(crate) fn expect_len(&self, len: usize) -> Result<()> {
        if self.amplitudes.len() != len {
            return Err(Error::Usage(format!(
                "state has {} amplitudes, expected {len}",
                self.amplitudes.len()
            )));
        }
        Ok(())
    }
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
