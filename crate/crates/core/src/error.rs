use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("surfaces or fields belong to different lattices")]
    LatticeMismatch,
    #[error("cell ({i}, {t}) is outside the lattice")]
    OutOfLattice { i: usize, t: usize },
    #[error("advancing site {site} would break the spacelike condition")]
    Causality { site: usize },
    #[error("site {site} is already at the final time boundary")]
    Boundary { site: usize },
    #[error("cell ({i}, {t}) is not the next advance of the current surface")]
    Sequencing { i: usize, t: usize },
    #[error("collapse time is undefined: the state has no variance in N")]
    NoVariance,
    #[error("non-finite amplitude at cell ({i}, {t}); reduce the step size")]
    Overflow { i: usize, t: usize },
    #[error("plateau image rejected: kernel correlation length {length} exceeds {limit}")]
    PlateauInvalid { length: f64, limit: f64 },
    #[error("cell ({i}, {t}) precedes the initial surface")]
    Domain { i: usize, t: usize },
    #[error("branch index {0} out of range")]
    NoBranch(usize),
    #[error("Fock space of dimension {dim} exceeds the limit {limit}")]
    FockTooLarge { dim: u128, limit: usize },
    #[error("mean occupation {mean} exceeds a third of the cutoff {cutoff}")]
    Occupancy { mean: f64, cutoff: usize },
    #[error("cell ({i}, {t}) carries no pointer mode")]
    NoMode { i: usize, t: usize },
    #[error("pointer modes do not form a space-time block with at least two time rows")]
    NoTimeDerivative,
}
