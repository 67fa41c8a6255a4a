//! Effective theories, isomorphism and stable isomorphism, exact-tier
//! normal forms and the rank of the complexified twisted K-group.

mod brute;
mod eft;
mod irreps;
mod khat;
mod rank;

use thiserror::Error;

pub use brute::{brute_force_stable_search, enumerate_ungraded};
pub use eft::{
    check_graded_isomorphism, eft_sum, find_intertwiner, graded_sum, is_isomorphic, is_stably_isomorphic, Decision,
    EffectiveTheory, GradedCheck, GradedTheory, Intertwiner, StableCertificate, Witness,
};
pub use irreps::{inner, twisted_irrep_count, twisted_regular, Fingerprint, IrrepTable, TwistedIrrep};
pub use khat::{decompose, decompose_at, khat_class, DiffKClass, IrrepLabel, OrbitClass, OrbitDecomposition};
pub use rank::{khat_rank, khat_rank_exact, orbit_irrep_sum};

use crate::character::CharacterError;
use crate::chern_simons::ChernSimonsError;
use crate::twisted_bundle::BundleError;

#[derive(Debug, Error)]
pub enum DiffKError {
    #[error("cocycle is not normalized")]
    NotNormalized,
    #[error("cocycle and G-set have different groups")]
    GroupMismatch,
    #[error("irreducible decomposition stayed degenerate after {attempts} attempts")]
    Degenerate { attempts: usize },
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("expected an integer: {0}")]
    NonIntegral(String),
    #[error("fixed-point rank {fixed_point} disagrees with orbit sum {orbit_sum}")]
    RankMismatch { fixed_point: usize, orbit_sum: usize },
    #[error("theories do not match: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    ChernSimons(#[from] ChernSimonsError),
}
