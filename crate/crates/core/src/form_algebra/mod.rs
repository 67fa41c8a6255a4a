//! Finite-dimensional models of differential forms on fixed-point sets, and
//! matrices with form entries acting on free supermodules.
//!
//! Module elements are written with coefficients on the right,
//! `s = Σ e_i ω_i`, so matrices compose without signs. A superconnection is
//! `𝔸 = εd + M` with `ε = diag((−1)^{π_i})`, and its curvature is the
//! form-linear operator `F = δM + M²` where `(δM)_ij = (−1)^{π_i} d M_ij`.

mod algebra;
mod matrix;
mod models;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ExpError;

pub use algebra::{Form, FormAlgebra};
pub use matrix::OmegaMatrix;
pub use models::{
    exterior_model, exterior_model_named, exterior_signed_permutation, jet_model, jet_signed_permutation,
    point_permutation, zero_dim_model, JetModel,
};

/// `Z/2` grading of module basis vectors and of forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: u32) -> Self {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Parity of a product.
    pub fn add(self, other: Self) -> Self {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// `(−1)^π` as `±1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("structure constants admit no two-sided unit")]
    NoUnit,
    #[error("grading violated: {0}")]
    NotGraded(String),
    #[error("graded commutativity fails for ({a}, {b})")]
    NotCommutative { a: String, b: String },
    #[error("associativity fails for ({a}, {b}, {c})")]
    NotAssociative { a: String, b: String, c: String },
    #[error("d² ≠ 0 on {0}")]
    DSquared(String),
    #[error("Leibniz rule fails for ({a}, {b})")]
    Leibniz { a: String, b: String },
    #[error("action of group element {g} {reason}")]
    BadAction { g: usize, reason: String },
    #[error("no action installed for group element {0}")]
    MissingAction(usize),
    #[error("generator {index} has even degree {degree}; exterior generators must be odd")]
    EvenGenerator { index: usize, degree: u32 },
    #[error("matrix is not {expected:?} (largest wrong-parity entry {deviation:.3e})")]
    WrongParity { expected: Parity, deviation: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("operands live over different algebras")]
    AlgebraMismatch,
    #[error(transparent)]
    Exp(#[from] ExpError),
}
