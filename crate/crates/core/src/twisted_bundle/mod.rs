//! Twisted equivariant super vector bundles with superconnection.
//!
//! Two tiers share the cocycle and group layers. The exact tier models a
//! zero-dimensional base as a finite `G`-set with a graded fiber over each
//! point, a twisted action `ρ` and an odd endomorphism `A₀`. The graded
//! tier stores, per conjugacy class `[g]`, a packet over a form model of the
//! fixed locus `X^g` with a superconnection matrix and the twisted action of
//! the centralizer.

mod exact;
mod graded;
mod induce;
mod transport;
mod trivial;

use thiserror::Error;

use crate::form_algebra::FormError;
use crate::linalg::ExpError;

pub use exact::TwistedBundle;
pub use graded::{curvature_of, GradedBundle, Packet};
pub use transport::{GrassmannMatrix, SuperTime};
pub use trivial::{trivial_connection, GradedTrivialTheory, TrivialTheory};

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("base and cocycle live over different groups")]
    GroupMismatch,
    #[error("cocycle is not normalized")]
    NotNormalized,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("ρ_{x}({g}) maps a fiber of rank {from:?} to one of rank {to:?}")]
    DimensionMismatch { g: usize, x: usize, from: (usize, usize), to: (usize, usize) },
    #[error("ρ_{x}({g}) is not even (odd part {deviation:.3e})")]
    NotEven { g: usize, x: usize, deviation: f64 },
    #[error("A₀ at point {x} is not odd (even part {deviation:.3e})")]
    ConnectionNotOdd { x: usize, deviation: f64 },
    #[error("ρ_{x}(e) differs from the identity by {deviation:.3e}")]
    IdentityNotTrivial { x: usize, deviation: f64 },
    #[error("twisted composition fails for ({g}, {h}) at {x}: deviation {deviation:.3e}")]
    TwistedComposition { g: usize, h: usize, x: usize, deviation: f64 },
    #[error("connection is not equivariant under {g} at {x}: deviation {deviation:.3e}")]
    NotEquivariant { g: usize, x: usize, deviation: f64 },
    #[error("transport needs nonnegative time, got {0}")]
    NegativeTime(f64),
    #[error("bundles live over different bases")]
    BaseMismatch,
    #[error("bundles carry different cocycles")]
    CocycleMismatch,
    #[error("trivial theory needs an ungraded bundle with an ordinary connection")]
    NotUngraded,
    #[error("packet for class [{class_rep}]: {reason}")]
    Packet { class_rep: usize, reason: String },
    #[error("no packet for class [{class_rep}]")]
    MissingPacket { class_rep: usize },
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Exp(#[from] ExpError),
}

#[cfg(test)]
mod tests;
