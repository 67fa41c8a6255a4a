//! Twisted equivariant differential K-theory for finite group actions.
//!
//! Layers, bottom up: finite groups with `U(1)`-valued 2-cocycles
//! ([`group_cocycle`]), finite `G`-sets ([`gset`]), finite-dimensional
//! models of differential forms ([`form_algebra`]), twisted bundles with
//! superconnection ([`twisted_bundle`]), their characters ([`character`])
//! and Chern–Simons forms ([`chern_simons`]), and the differential K-group
//! ([`diff_k`]).

pub mod character;
pub mod chern_simons;
pub mod diff_k;
pub mod form_algebra;
pub mod group_cocycle;
pub mod gset;
pub mod linalg;
pub mod quadrature;
pub mod sample;
pub mod scalar;
pub mod twisted_bundle;

use serde::{Deserialize, Serialize};

pub use quadrature::Quadrature;

/// Numerical policy shared by the float-valued operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Absolute tolerance for float comparisons.
    pub tolerance: f64,
    pub quadrature: Quadrature,
    /// Seed for randomized steps whose outcome is verified afterwards
    /// (intertwiner search).
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            quadrature: Quadrature::default(),
            seed: 0,
        }
    }
}
