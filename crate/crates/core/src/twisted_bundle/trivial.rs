use std::collections::BTreeMap;

use super::{BundleError, GradedBundle, Packet, TwistedBundle};
use crate::form_algebra::{Form, OmegaMatrix, Parity};
use crate::linalg::CMat;
use crate::scalar::C64;

/// The theory `ε_V = V ⊕ πV` whose degree-zero superconnection part is
/// `λ` times the odd identity `V → πV → V`.
#[derive(Clone, Debug)]
pub struct TrivialTheory {
    v: TwistedBundle,
    lambda: f64,
    bundle: TwistedBundle,
}

fn odd_identity(p: usize, lambda: f64) -> CMat {
    let mut m = CMat::zeros(2 * p, 2 * p);
    for i in 0..p {
        m[(i, p + i)] = C64::new(lambda, 0.0);
        m[(p + i, i)] = C64::new(lambda, 0.0);
    }
    m
}

impl TrivialTheory {
    pub fn new(v: TwistedBundle, tol: f64) -> Result<Self, BundleError> {
        Self::scaled(v, 1.0, tol)
    }

    /// `ε_V` with `A₀` scaled by `λ`.
    pub fn scaled(v: TwistedBundle, lambda: f64, tol: f64) -> Result<Self, BundleError> {
        if !v.is_ungraded() {
            return Err(BundleError::NotUngraded);
        }
        let n = v.base().n_points();
        let group = v.base().group().clone();
        let fibers: Vec<(usize, usize)> = v.fibers().iter().map(|&(p, _)| (p, p)).collect();
        let mut rho = Vec::with_capacity(group.order() * n);
        for g in group.elements() {
            for x in 0..n {
                let r = v.rho(g, x);
                rho.push(crate::linalg::block_diag(&[r, r]));
            }
        }
        let a0 = fibers.iter().map(|&(p, _)| odd_identity(p, lambda)).collect();
        let bundle = TwistedBundle::new(v.base().clone(), v.cocycle().clone(), fibers, rho, a0, tol)?;
        Ok(Self { v, lambda, bundle })
    }

    pub fn v(&self) -> &TwistedBundle {
        &self.v
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bundle(&self) -> &TwistedBundle {
        &self.bundle
    }
}

/// Graded-tier `ε_V`: for `V` with ordinary connection `d + a` on each
/// packet, the superconnection on `V ⊕ πV` is `[[a, λ], [λ, −a]]`.
///
/// The odd copy carries `−a` because `ε` flips the sign of `d` there, so
/// `F` has identical even and odd blocks and the character vanishes.
#[derive(Clone, Debug)]
pub struct GradedTrivialTheory {
    v: GradedBundle,
    lambda: f64,
    bundle: GradedBundle,
}

/// `[[a, λ], [λ, −a]]` for an even-only connection matrix `a`.
pub fn trivial_connection(a: &OmegaMatrix, lambda: f64) -> OmegaMatrix {
    let alg = a.algebra();
    let p = a.nrows();
    let grading = [vec![Parity::Even; p], vec![Parity::Odd; p]].concat();
    let lam = Form::constant(alg, C64::new(lambda, 0.0));
    OmegaMatrix::from_fn(alg, grading.clone(), grading, |i, j| match (i < p, j < p) {
        (true, true) => a.entry(i, j).clone(),
        (false, false) => -a.entry(i - p, j - p),
        _ if i % p == j % p => lam.clone(),
        _ => Form::zero(alg),
    })
}

fn trivial_packet(v: &Packet, lambda: f64, cocycle: &crate::group_cocycle::TwoCocycle) -> Result<Packet, BundleError> {
    let m = trivial_connection(v.m(), lambda);
    let grading = m.rows().to_vec();
    let generators: BTreeMap<usize, OmegaMatrix> = v
        .generators()
        .iter()
        .map(|&h| {
            let r = v.rho(h).expect("generator lies in the centralizer");
            let sum = r.direct_sum(r)?;
            let regraded = OmegaMatrix::from_fn(v.algebra(), grading.clone(), grading.clone(), |i, j| {
                sum.entry(i, j).clone()
            });
            Ok((h, regraded))
        })
        .collect::<Result<_, BundleError>>()?;
    Packet::new(cocycle, v.class_rep(), v.algebra().clone(), grading, m, generators, v.tolerance())
}

impl GradedTrivialTheory {
    pub fn new(v: GradedBundle) -> Result<Self, BundleError> {
        Self::scaled(v, 1.0)
    }

    /// Requires every packet of `V` to be purely even with a connection
    /// matrix of pure form degree one.
    pub fn scaled(v: GradedBundle, lambda: f64) -> Result<Self, BundleError> {
        for p in v.packets() {
            if p.grading().iter().any(|q| q.is_odd()) {
                return Err(BundleError::NotUngraded);
            }
            let tol = p.tolerance();
            let stray = p
                .m()
                .entries()
                .iter()
                .map(|e| (e - &e.degree_part(1)).max_abs())
                .fold(0.0, f64::max);
            if stray > tol {
                return Err(BundleError::NotUngraded);
            }
        }
        let packets = v
            .packets()
            .map(|p| trivial_packet(p, lambda, v.cocycle()))
            .collect::<Result<Vec<_>, _>>()?;
        let bundle = GradedBundle::new(v.cocycle().clone(), packets)?;
        Ok(Self { v, lambda, bundle })
    }

    pub fn v(&self) -> &GradedBundle {
        &self.v
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bundle(&self) -> &GradedBundle {
        &self.bundle
    }
}
