use num_bigint::BigInt;
use thiserror::Error;

use crate::mukai::MukaiVector;
use crate::reduction::StuckSegment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("surface half-degree must be positive, got {0}")]
    InvalidSurface(BigInt),
    #[error("{0} is not spherical")]
    NotSpherical(MukaiVector),
    #[error("rank zero classes are not supported")]
    ZeroRank,
    #[error("negative rank input {0} is not supported")]
    NegativeRank(MukaiVector),
    #[error("{0} must have positive rank and degree")]
    NonPositive(MukaiVector),
    #[error("classes {0} and {1} are proportional")]
    ProportionalClasses(Box<MukaiVector>, Box<MukaiVector>),
    #[error("no actual wall: {0}")]
    NotActualWall(String),
    #[error("{0} does not lie in the wall lattice")]
    NotInLattice(MukaiVector),
    #[error("{0} is not an effective spherical class of the wall lattice")]
    OffChain(MukaiVector),
    #[error("hom/ext table needs a base class endpoint")]
    UnsupportedPair,
    #[error("extension with p={p}, q={q} at g={g} is not rigid")]
    RigidityViolated { p: BigInt, q: BigInt, g: BigInt },
    #[error("no nonnegative decomposition: {0}")]
    NoNonnegativeSolution(String),
    #[error("neither side of the two-step resolution is injective")]
    NeitherSideInjective,
    #[error("needs full local reduction: {0}")]
    NeedsFullLocalReduction(Box<StuckSegment>),
    #[error("height {0} exceeds the shortcut range")]
    HeightTooLarge(u32),
    #[error("the h0 bound is not available for H^2 = 2")]
    DegreeTwoUnsupported,
    #[error("search range too large: {0}")]
    SearchTooLarge(String),
    #[error("more than {0} walls crossed")]
    WallLimitExceeded(usize),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
