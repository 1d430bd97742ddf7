//! Truncated Fock-space model of the pointer field, used as an oracle for the
//! coherent-state reduction.

mod op;
mod space;
mod state;

pub use op::{expm_small, SparseOp};
pub use space::{FockSpec, MAX_DIM};
pub use state::{
    apply_advance, apply_collapse, apply_interaction, coherent_state, eigen_residual, evolve_exact,
    expectation_drift, Drift, FockState, JointState, OracleKernels,
};
