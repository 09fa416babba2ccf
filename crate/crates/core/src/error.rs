use thiserror::Error;

use crate::metric::PointId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Distance matrix is not square or disagrees with the label count.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operation needs a non-empty space")]
    EmptySpace,

    #[error("operation needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("map table has {map} entries but the space has {space} points")]
    MapLength { map: usize, space: usize },

    #[error("map sends {from} to {to}, which is outside a space of {len} points")]
    ImageOutOfRange { from: usize, to: usize, len: usize },

    /// A rule produced a point that is not in the set it is supposed to map into.
    #[error("not a self-map: the image of point {0} leaves the set")]
    NotSelfMap(PointId),

    #[error("orbit left the map's domain at step {step} (point {point})")]
    LeftDomain { step: u64, point: PointId },

    #[error("enumeration needs a budget of {required} maps, configured budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("certificate violated at pair ({0}, {1}): {2}")]
    CertificateViolation(usize, usize, String),
}
