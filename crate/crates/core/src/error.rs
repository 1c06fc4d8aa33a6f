use thiserror::Error;

use crate::lattice::{Site, Space};

/// Errors raised across the toomlab library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("torus side length must be at least 3, got {0}")]
    TorusTooSmall(i64),
    #[error("site {site} is not canonical for {space}")]
    NonCanonicalSite { site: Site, space: Space },
    #[error("sets live in different spaces ({0} vs {1})")]
    SpaceMismatch(Space, Space),
    #[error("operation requires a torus space, got {0}")]
    NotTorus(Space),
    #[error("operation requires the plane, got {0}")]
    NotPlane(Space),
    #[error("set is not contained in its host set")]
    NotSubset,
    #[error("set is not connected")]
    Disconnected,
    #[error("set is empty")]
    Empty,
    #[error("component wraps around the torus and has no planar lift")]
    NonSimple,
    #[error("requested {requested} sites but the space only holds {capacity}")]
    CapacityExceeded { requested: usize, capacity: usize },
    #[error("deflation {0} is below the supported minimum of 1/3")]
    DeflationTooSmall(crate::geometry::Thirds),
    #[error("triangles do not intersect")]
    DisjointTriangles,
    #[error("cut parts are not pairwise disjoint")]
    CutNotDisjoint,
    #[error("triple is not a cut of the host set")]
    NotACut,
    #[error("cut is not closed")]
    CutNotClosed,
    #[error("cut is not connected")]
    CutNotConnected,
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(crate::geometry::Thirds),
    #[error("failure event at step {step} is beyond the run length {steps}")]
    FailureOutOfRange { step: usize, steps: usize },
    #[error("evolution did not settle within {0} steps")]
    StepCapExceeded(usize),
    #[error(
        "thickness search needs k up to {needed_k} on {sites} sites, beyond the guard \
         (max {max_sites} sites, k <= {max_k}); thickness is at least {lower_bound}"
    )]
    GuardExceeded { sites: usize, needed_k: usize, max_sites: usize, max_k: usize, lower_bound: usize },
    #[error("tile center {0} has no element of the preimage in its tile")]
    EmptyTilePreimage(Site),
    #[error("Q-pullback failed: {reason} (after {steps} chain steps)")]
    Pullback { reason: String, steps: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
