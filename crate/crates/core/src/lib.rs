//! Structure-exploiting propagation of the driven Tavis-Cummings model
//! beyond the rotating-wave approximation.
//!
//! The Hamiltonian `H(t) = H0 + V + Delta(t) Jz` splits into two parts that
//! are tridiagonal in two different orderings of the product basis and a
//! diagonal drive. A symmetric split-operator step reindexes between the
//! orderings and treats each tridiagonal factor either by exact blockwise
//! exponentials or by a Cayley transform with Thomas solves (cost linear in
//! the dimension).

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod observables;
pub mod propagator;
pub mod reference;
pub mod state;
pub mod trajectory;
pub mod tridiag;

pub use basis::{enumerate_basis, BasisState, ModelParams, OrderedBasis, OrderingTag, Permutation};
pub use error::{Error, Result};
pub use hamiltonian::{build_h0, build_v, diagonal_phase, DriveSchedule, JzDiagonal, TridiagonalOperator};
pub use observables::{CavityIndex, CavityMoments, CovarianceMatrix2x2, Snapshot};
pub use propagator::{
    apply_block_exponentials, cayley_apply, precompute_block_exponentials, propagate, BlockExponentials,
    CayleyFactor, Method, Propagation, PropagatorPlan, StepDiagnostics, StepWorkspace,
};
pub use reference::{dense_propagate, hp_covariance_propagate, hp_propagate_states, DenseHamiltonian, GaussianState, DENSE_LIMIT};
pub use state::StateVector;
pub use trajectory::{record_trajectory, TrajectoryRecord, TrajectoryRow};
pub use tridiag::{thomas_solve, tridiag_eigendecompose, ThomasFactor, TridiagEigen};
