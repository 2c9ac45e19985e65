//! Product basis `|n> (x) |J, m>` and the two orderings in which the
//! Hamiltonian parts become tridiagonal.
//!
//! Spin projections are carried as `two_m = 2m` so half-integer spins stay
//! exact; sort keys are integers.

use std::ops::Range;

use crate::error::{Error, Result};

/// Model parameters in internal units (angular frequencies in rad/ns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_s: f64,
    pub g: f64,
    /// Modulation amplitude of the spin frequency.
    pub lambda: f64,
    /// Modulation angular frequency.
    pub omega_drive: f64,
    /// Number of Fock levels kept for the cavity.
    pub n_cavity: usize,
    /// Twice the collective spin.
    pub two_j: u32,
}

impl ModelParams {
    /// Build parameters from ordinary frequencies in GHz, converting each to
    /// rad/ns.
    pub fn from_ghz(
        omega_c_ghz: f64,
        omega_s_ghz: f64,
        g_ghz: f64,
        lambda_ghz: f64,
        omega_drive_ghz: f64,
        n_cavity: usize,
        two_j: u32,
    ) -> Self {
        Self {
            omega_c: ghz_to_rad_per_ns(omega_c_ghz),
            omega_s: ghz_to_rad_per_ns(omega_s_ghz),
            g: ghz_to_rad_per_ns(g_ghz),
            lambda: ghz_to_rad_per_ns(lambda_ghz),
            omega_drive: ghz_to_rad_per_ns(omega_drive_ghz),
            n_cavity,
            two_j,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cavity == 0 {
            return Err(Error::Config("n_cavity must be at least 1".into()));
        }
        if u32::try_from(self.n_cavity).is_err() {
            return Err(Error::Config(format!("n_cavity = {} is too large", self.n_cavity)));
        }
        if i32::try_from(self.two_j).is_err() {
            return Err(Error::Config(format!("two_j = {} is too large", self.two_j)));
        }
        if !(self.g >= 0.0) {
            return Err(Error::Config(format!("coupling g must be nonnegative, got {}", self.g)));
        }
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("omega_s", self.omega_s),
            ("g", self.g),
            ("lambda", self.lambda),
            ("omega_drive", self.omega_drive),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        self.dim().map(|_| ())
    }

    /// Total Hilbert-space dimension `N_c (2J + 1)`.
    pub fn dim(&self) -> Result<usize> {
        self.n_cavity
            .checked_mul(self.spin_multiplicity())
            .filter(|&d| d <= isize::MAX as usize)
            .ok_or_else(|| {
                Error::Config(format!(
                    "dimension {} x {} overflows the index range",
                    self.n_cavity,
                    self.spin_multiplicity()
                ))
            })
    }

    pub fn spin_multiplicity(&self) -> usize {
        self.two_j as usize + 1
    }

    /// The collective spin `J` as a float.
    pub fn spin(&self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    /// Whether the drive frequency matches `omega_c + omega_s` to a relative
    /// tolerance.
    pub fn is_resonant(&self, rel_tol: f64) -> bool {
        let sum = self.omega_c + self.omega_s;
        (sum - self.omega_drive).abs() <= rel_tol * sum.abs().max(self.omega_drive.abs())
    }
}

pub fn ghz_to_rad_per_ns(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz
}

/// One product state `|n> (x) |J, m>` with `two_m = 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub n: u32,
    pub two_m: i32,
}

impl BasisState {
    pub fn new(n: u32, two_m: i32) -> Self {
        Self { n, two_m }
    }

    pub fn m(&self) -> f64 {
        f64::from(self.two_m) / 2.0
    }

    /// Index in the canonical enumeration (n ascending, then m ascending).
    pub fn canonical_index(&self, two_j: u32) -> usize {
        let mult = two_j as usize + 1;
        let spin_slot = ((self.two_m + two_j as i32) / 2) as usize;
        self.n as usize * mult + spin_slot
    }
}

/// Which Hamiltonian part an ordering tridiagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderingTag {
    /// Sorted by `n + m + J`, ties by `m` ascending.
    H0,
    /// Sorted by `n - m`, ties by `m` ascending.
    V,
}

impl OrderingTag {
    /// Integer sort key, twice the conserved quantity (shifted to be
    /// nonnegative for H0).
    pub fn key(self, state: BasisState, two_j: u32) -> i64 {
        let n2 = 2 * i64::from(state.n);
        let m2 = i64::from(state.two_m);
        match self {
            OrderingTag::H0 => n2 + m2 + i64::from(two_j),
            OrderingTag::V => n2 - m2,
        }
    }
}

/// All `D` product states in canonical order: `n` ascending, then `m`
/// ascending.
pub fn enumerate_basis(params: &ModelParams) -> Result<Vec<BasisState>> {
    params.validate()?;
    let dim = params.dim()?;
    let two_j = params.two_j as i32;
    let mut states = Vec::with_capacity(dim);
    for n in 0..params.n_cavity as u32 {
        states.extend((-two_j..=two_j).step_by(2).map(|two_m| BasisState::new(n, two_m)));
    }
    Ok(states)
}

/// A sorted copy of the product basis together with its conserved-key
/// blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedBasis {
    tag: OrderingTag,
    n_cavity: usize,
    two_j: u32,
    states: Vec<BasisState>,
    blocks: Vec<Range<usize>>,
    /// `slot_of[canonical_index]` is the position of that state here.
    slot_of: Vec<usize>,
}

impl OrderedBasis {
    /// Order a complete enumeration for `H0`.
    pub fn for_h0(params: &ModelParams, states: &[BasisState]) -> Result<Self> {
        Self::build(OrderingTag::H0, params, states)
    }

    /// Order a complete enumeration for `V`.
    pub fn for_v(params: &ModelParams, states: &[BasisState]) -> Result<Self> {
        Self::build(OrderingTag::V, params, states)
    }

    pub fn build(tag: OrderingTag, params: &ModelParams, states: &[BasisState]) -> Result<Self> {
        let dim = params.dim()?;
        if states.len() != dim {
            return Err(Error::Consistency(format!(
                "expected {dim} basis states, got {}",
                states.len()
            )));
        }
        let two_j = params.two_j;
        let mut sorted = states.to_vec();
        sorted.sort_by_key(|&s| (tag.key(s, two_j), s.two_m));

        let mut slot_of = vec![usize::MAX; dim];
        for (slot, s) in sorted.iter().enumerate() {
            if s.n as usize >= params.n_cavity
                || s.two_m.unsigned_abs() > two_j
                || (s.two_m + two_j as i32) % 2 != 0
            {
                return Err(Error::Consistency(format!("state {s:?} is outside the basis")));
            }
            let c = s.canonical_index(two_j);
            if slot_of[c] != usize::MAX {
                return Err(Error::Consistency(format!("state {s:?} appears twice")));
            }
            slot_of[c] = slot;
        }

        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=dim {
            if i == dim || tag.key(sorted[i], two_j) != tag.key(sorted[start], two_j) {
                blocks.push(start..i);
                start = i;
            }
        }

        Ok(Self {
            tag,
            n_cavity: params.n_cavity,
            two_j,
            states: sorted,
            blocks,
            slot_of,
        })
    }

    pub fn tag(&self) -> OrderingTag {
        self.tag
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_cavity(&self) -> usize {
        self.n_cavity
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// Position of `state` in this ordering, if it belongs to the basis.
    pub fn slot(&self, state: BasisState) -> Option<usize> {
        if state.n as usize >= self.n_cavity
            || state.two_m.unsigned_abs() > self.two_j
            || (state.two_m + self.two_j as i32) % 2 != 0
        {
            return None;
        }
        Some(self.slot_of[state.canonical_index(self.two_j)])
    }

    /// Map from canonical index to position in this ordering.
    pub fn canonical_slots(&self) -> &[usize] {
        &self.slot_of
    }

    /// Sizes of the conserved-key blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|r| r.len()).collect()
    }
}

/// Reindexing between two orderings of the same basis.
///
/// `forward[i]` is the position, in the target ordering, of the state at
/// position `i` of the source ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn between(from: &OrderedBasis, to: &OrderedBasis) -> Result<Self> {
        if from.len() != to.len() || from.two_j != to.two_j || from.n_cavity != to.n_cavity {
            return Err(Error::Consistency(format!(
                "orderings describe different bases ({} vs {} states)",
                from.len(),
                to.len()
            )));
        }
        let dim = from.len();
        let mut forward = Vec::with_capacity(dim);
        let mut inverse = vec![usize::MAX; dim];
        for (i, &s) in from.states.iter().enumerate() {
            let j = to
                .slot(s)
                .filter(|&j| to.states[j] == s)
                .ok_or_else(|| Error::Consistency(format!("state {s:?} missing from target")))?;
            if inverse[j] != usize::MAX {
                return Err(Error::Consistency(format!("state {s:?} mapped twice")));
            }
            forward.push(j);
            inverse[j] = i;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            forward: (0..dim).collect(),
            inverse: (0..dim).collect(),
        }
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `dst[forward[i]] = src[i]`.
    pub fn apply<T: Copy>(&self, src: &[T], dst: &mut [T]) {
        assert_eq!(src.len(), self.forward.len());
        assert_eq!(dst.len(), self.forward.len());
        // Gather form keeps the writes sequential.
        for (d, &i) in dst.iter_mut().zip(&self.inverse) {
            *d = src[i];
        }
    }

    /// `dst[i] = src[forward[i]]`, undoing [`Permutation::apply`].
    pub fn apply_inverse<T: Copy>(&self, src: &[T], dst: &mut [T]) {
        assert_eq!(src.len(), self.forward.len());
        assert_eq!(dst.len(), self.forward.len());
        for (d, &j) in dst.iter_mut().zip(&self.forward) {
            *d = src[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n_cavity: usize, two_j: u32) -> ModelParams {
        ModelParams::from_ghz(2.4, 3.6, 0.01, 1.0, 6.0, n_cavity, two_j)
    }

    fn st(n: u32, two_m: i32) -> BasisState {
        BasisState::new(n, two_m)
    }

    #[test]
    fn enumerate_single_state() {
        let states = enumerate_basis(&params(1, 0)).unwrap();
        assert_eq!(states, vec![st(0, 0)]);
    }

    #[test]
    fn enumerate_qubit_two_levels() {
        let states = enumerate_basis(&params(2, 1)).unwrap();
        assert_eq!(states, vec![st(0, -1), st(0, 1), st(1, -1), st(1, 1)]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_basis(&params(30, 19)).unwrap().len(), 600);
    }

    #[test]
    fn enumerate_rejects_bad_params() {
        assert!(matches!(enumerate_basis(&params(0, 3)), Err(Error::Config(_))));
        let mut p = params(2, 1);
        p.g = -1.0;
        assert!(matches!(enumerate_basis(&p), Err(Error::Config(_))));
        let huge = ModelParams { n_cavity: usize::MAX / 2, ..params(1, 7) };
        assert!(matches!(huge.dim(), Err(Error::Config(_))));
    }

    #[test]
    fn h0_order_small() {
        let p = params(2, 1);
        let b = OrderedBasis::for_h0(&p, &enumerate_basis(&p).unwrap()).unwrap();
        assert_eq!(b.states(), &[st(0, -1), st(1, -1), st(0, 1), st(1, 1)]);
        assert_eq!(b.block_sizes(), vec![1, 2, 1]);
    }

    #[test]
    fn v_order_small() {
        let p = params(2, 1);
        let b = OrderedBasis::for_v(&p, &enumerate_basis(&p).unwrap()).unwrap();
        assert_eq!(b.states(), &[st(0, 1), st(0, -1), st(1, 1), st(1, -1)]);
        assert_eq!(b.block_sizes(), vec![1, 2, 1]);
    }

    #[test]
    fn trivial_orderings() {
        let p = params(1, 0);
        let s = enumerate_basis(&p).unwrap();
        assert_eq!(OrderedBasis::for_h0(&p, &s).unwrap().block_sizes(), vec![1]);
        assert_eq!(OrderedBasis::for_v(&p, &s).unwrap().block_sizes(), vec![1]);
    }

    #[test]
    fn square_block_sizes() {
        let p = params(3, 2);
        let s = enumerate_basis(&p).unwrap();
        assert_eq!(OrderedBasis::for_h0(&p, &s).unwrap().block_sizes(), vec![1, 2, 3, 2, 1]);
        assert_eq!(OrderedBasis::for_v(&p, &s).unwrap().block_sizes(), vec![1, 2, 3, 2, 1]);
    }

    #[test]
    fn permutation_small() {
        let p = params(2, 1);
        let s = enumerate_basis(&p).unwrap();
        let h0 = OrderedBasis::for_h0(&p, &s).unwrap();
        let v = OrderedBasis::for_v(&p, &s).unwrap();
        let perm = Permutation::between(&h0, &v).unwrap();
        assert_eq!(perm.forward()[1], 3);
        assert_eq!(Permutation::between(&h0, &h0).unwrap(), Permutation::identity(4));
        for i in 0..4 {
            assert_eq!(perm.inverse()[perm.forward()[i]], i);
        }
    }

    #[test]
    fn permutation_mismatch_is_error() {
        let a = params(2, 1);
        let b = params(3, 1);
        let ha = OrderedBasis::for_h0(&a, &enumerate_basis(&a).unwrap()).unwrap();
        let hb = OrderedBasis::for_h0(&b, &enumerate_basis(&b).unwrap()).unwrap();
        assert!(matches!(Permutation::between(&ha, &hb), Err(Error::Consistency(_))));
    }

    #[test]
    fn incomplete_states_rejected() {
        let p = params(2, 1);
        let mut s = enumerate_basis(&p).unwrap();
        s[3] = s[0];
        assert!(matches!(OrderedBasis::for_h0(&p, &s), Err(Error::Consistency(_))));
    }

    #[test]
    fn resonance_check() {
        assert!(params(2, 1).is_resonant(1e-12));
        assert!(!ModelParams::from_ghz(2.4, 3.6, 0.01, 1.0, 5.0, 2, 1).is_resonant(1e-6));
    }
}
