//! Super time parameters and matrices with coefficients in the Grassmann
//! algebra on two odd generators `θ, η`.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::form_algebra::Parity;
use crate::linalg::{self, CMat};
use crate::scalar::C64;

/// A point `(t₀ + t₃θη, uθ + vη)` of the super half-line with coefficients
/// in `Λ[θ, η]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperTime {
    pub t0: f64,
    pub t3: f64,
    pub u: f64,
    pub v: f64,
}

impl SuperTime {
    pub const ZERO: SuperTime = SuperTime {
        t0: 0.0,
        t3: 0.0,
        u: 0.0,
        v: 0.0,
    };

    pub fn new(t0: f64, t3: f64, u: f64, v: f64) -> Self {
        Self { t0, t3, u, v }
    }

    /// `(t, 0)`.
    pub fn even(t: f64) -> Self {
        Self::new(t, 0.0, 0.0, 0.0)
    }

    /// `(t, θ)`.
    pub fn theta(t: f64) -> Self {
        Self::new(t, 0.0, 1.0, 0.0)
    }

    /// `(t, η)`.
    pub fn eta(t: f64) -> Self {
        Self::new(t, 0.0, 0.0, 1.0)
    }

    /// `(t, θ)·(s, η) = (t + s + θη, θ + η)`, extended bilinearly: the
    /// product of the odd parts contributes `(u₁v₂ − v₁u₂)θη`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            t0: self.t0 + other.t0,
            t3: self.t3 + other.t3 + self.u * other.v - self.v * other.u,
            u: self.u + other.u,
            v: self.v + other.v,
        }
    }
}

/// `X = X₁ + θX_θ + ηX_η + θηX_θη` with complex matrix components acting on
/// a graded space. Odd generators anticommute with odd matrices, so moving
/// them to the left applies the parity flip `P(X) = εXε`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannMatrix {
    grading: Vec<Parity>,
    comps: [CMat; 4],
}

impl GrassmannMatrix {
    pub fn new(grading: Vec<Parity>, comps: [CMat; 4]) -> Self {
        Self { grading, comps }
    }

    pub fn identity(grading: Vec<Parity>) -> Self {
        let n = grading.len();
        let id = CMat::identity(n, n);
        let z = CMat::zeros(n, n);
        Self {
            grading,
            comps: [id, z.clone(), z.clone(), z],
        }
    }

    pub fn one(&self) -> &CMat {
        &self.comps[0]
    }

    pub fn theta(&self) -> &CMat {
        &self.comps[1]
    }

    pub fn eta(&self) -> &CMat {
        &self.comps[2]
    }

    pub fn theta_eta(&self) -> &CMat {
        &self.comps[3]
    }

    pub fn components(&self) -> &[CMat; 4] {
        &self.comps
    }

    pub fn grading(&self) -> &[Parity] {
        &self.grading
    }

    fn flip(&self, m: &CMat) -> CMat {
        let mut out = m.clone();
        for i in 0..out.nrows() {
            for j in 0..out.ncols() {
                if self.grading[i] != self.grading[j] {
                    out[(i, j)] = -out[(i, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            grading: self.grading.clone(),
            comps: self.comps.clone().map(|m| m.map(|z| z * c)),
        }
    }

    /// Multiplication by an even, odd-generator-free matrix on the right.
    pub fn right_mul(&self, m: &CMat) -> Self {
        Self {
            grading: self.grading.clone(),
            comps: self.comps.clone().map(|c| c * m),
        }
    }

    /// Multiplication by an even matrix on the left; even matrices commute
    /// with the odd generators.
    pub fn left_mul(&self, m: &CMat) -> Self {
        Self {
            grading: self.grading.clone(),
            comps: self.comps.clone().map(|c| m * c),
        }
    }

    /// Largest componentwise distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| linalg::max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// Componentwise distances `[1, θ, η, θη]`.
    pub fn component_distances(&self, other: &Self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            *o = linalg::max_abs_diff(&self.comps[k], &other.comps[k]);
        }
        out
    }
}

impl Mul for &GrassmannMatrix {
    type Output = GrassmannMatrix;

    fn mul(self, rhs: &GrassmannMatrix) -> GrassmannMatrix {
        let [a1, a, b, c] = &self.comps;
        let [a1p, ap, bp, cp] = &rhs.comps;
        let pa1 = self.flip(a1);
        let one = a1 * a1p;
        let theta = &pa1 * ap + a * a1p;
        let eta = &pa1 * bp + b * a1p;
        let theta_eta = a1 * cp + self.flip(a) * bp - self.flip(b) * ap + c * a1p;
        GrassmannMatrix {
            grading: self.grading.clone(),
            comps: [one, theta, eta, theta_eta],
        }
    }
}
