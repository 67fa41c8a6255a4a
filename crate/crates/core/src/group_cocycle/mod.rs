//! Finite groups given by multiplication tables, root-of-unity valued
//! 2-cocycles, and the exact scalar arithmetic their characters need.

mod cocycle;
mod cyclotomic;
mod group;
mod phase;

pub use cocycle::{CocycleError, Normalized, TwoCocycle};
pub use cyclotomic::{cyclotomic_polynomial, Cyclotomic, CyclotomicField};
pub use group::{abelian_coords, abelian_index, FiniteGroup, GroupError, Subgroup};
pub use phase::{Phase, PhaseError};
