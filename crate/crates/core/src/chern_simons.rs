//! Chern–Simons transgression forms along linear paths of superconnections.
//!
//! For a path `M(λ) = (1 − λ)M₀ + λM₁` in a fixed packet with curvature
//! `F(λ)`, the component at `g` is
//!
//! ```text
//! CS_g = −∫₀¹ sTr(Ṁ · exp(−F(λ)) · R_g) dλ,
//! ```
//!
//! normalized so that `dCS_g = Z_g(M₁) − Z_g(M₀)`. A second bundle enters
//! through an isomorphism `φ: E₀ → E₁` that pulls its superconnection back
//! to `M₁' = φ⁻¹(δφ + M₁φ)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::character::{fixed_point_model, CharacterError, Component, InertiaSection};
use crate::form_algebra::{Form, FormError, OmegaMatrix, Parity};
use crate::linalg::{self, CMat};
use crate::quadrature::{integrate, Quadrature};
use crate::scalar::C64;
use crate::twisted_bundle::{
    curvature_of, BundleError, GradedBundle, GradedTrivialTheory, Packet, TrivialTheory, TwistedBundle,
};
use crate::Settings;

#[derive(Debug, Error)]
pub enum ChernSimonsError {
    #[error("φ at [{class_rep}] is not an isomorphism: {reason}")]
    NotIsomorphism { class_rep: usize, reason: String },
    #[error("φ at [{class_rep}] does not intertwine the action of {h}: deviation {deviation:.3e}")]
    NotEquivariant { class_rep: usize, h: usize, deviation: f64 },
    #[error("φ at point {x} is not an isomorphism: {reason}")]
    PointNotIsomorphism { x: usize, reason: String },
    #[error("φ does not intertwine ρ({g}) at point {x}: deviation {deviation:.3e}")]
    PointNotEquivariant { g: usize, x: usize, deviation: f64 },
    #[error("quadrature at [{class_rep}] did not converge by order {order} (last change {change:.3e})")]
    NonConvergence { class_rep: usize, order: usize, change: f64 },
    #[error("bundles do not match: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Character(#[from] CharacterError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// `M(λ) = (1 − λ)M₀ + λM₁` in the frame of one packet.
#[derive(Clone, Debug)]
pub struct ConnectionPath {
    packet: Packet,
    m0: OmegaMatrix,
    m1: OmegaMatrix,
}

impl ConnectionPath {
    /// Path from the packet's own superconnection to `m1`; `m1` must be
    /// equivariant for the packet's action (checked).
    pub fn new(packet: Packet, m1: OmegaMatrix) -> Result<Self, ChernSimonsError> {
        packet.with_m(m1.clone())?;
        Ok(Self {
            m0: packet.m().clone(),
            packet,
            m1,
        })
    }

    pub fn packet(&self) -> &Packet {
        &self.packet
    }

    pub fn start(&self) -> &OmegaMatrix {
        &self.m0
    }

    pub fn end(&self) -> &OmegaMatrix {
        &self.m1
    }

    pub fn at(&self, lambda: f64) -> OmegaMatrix {
        &self.m0.scale(&C64::new(1.0 - lambda, 0.0)) + &self.m1.scale(&C64::new(lambda, 0.0))
    }

    pub fn velocity(&self) -> OmegaMatrix {
        &self.m1 - &self.m0
    }

    /// `−sTr(Ṁ·exp(−F(λ))·R_g)` at the packet's class representative.
    pub fn integrand(&self, lambda: f64) -> Result<Form, ChernSimonsError> {
        let g = self.packet.class_rep();
        let r = self.packet.rho(g).expect("class representative centralizes itself");
        let f = curvature_of(&self.at(lambda));
        let heat = f.scale(&C64::new(-1.0, 0.0)).exp_even()?;
        let v = self.velocity();
        Ok((&(&v * &heat) * r).supertrace()?.scale(&C64::new(-1.0, 0.0)))
    }

    /// The transgression form and the quadrature order used.
    pub fn transgression(&self, rule: &Quadrature) -> Result<(Form, usize), ChernSimonsError> {
        let alg = self.packet.algebra().clone();
        let outcome = integrate(
            rule,
            |x| self.integrand(x),
            || Form::zero(&alg),
            |acc, w, v| *acc = &*acc + &v.scale(&C64::new(w, 0.0)),
            |a, b| a.distance(b),
        )?;
        outcome.map_err(|e| ChernSimonsError::NonConvergence {
            class_rep: self.packet.class_rep(),
            order: e.order,
            change: e.change,
        })
    }
}

/// Validates `φ: E₀ → E₁` on one class and returns `φ⁻¹`.
fn check_isomorphism(p0: &Packet, p1: &Packet, phi: &OmegaMatrix, tol: f64) -> Result<OmegaMatrix, ChernSimonsError> {
    let g = p0.class_rep();
    let bad = |reason: String| ChernSimonsError::NotIsomorphism { class_rep: g, reason };
    if phi.rows() != p1.grading() || phi.cols() != p0.grading() {
        return Err(bad("shape or grading does not match the packets".into()));
    }
    if !phi.is_even(tol) {
        return Err(bad(format!("odd part {:.3e}", phi.parity_deviation(Parity::Even))));
    }
    let inv = phi.inverse().map_err(|e| bad(e.to_string()))?;
    for h in p0.centralizer() {
        let r0 = p0.rho(h).expect("centralizer element");
        let r1 = p1.rho(h).expect("centralizer element");
        let lhs = r1 * &p0.act(h, phi)?;
        let rhs = phi * r0;
        let dev = lhs.distance(&rhs);
        if dev > tol {
            return Err(ChernSimonsError::NotEquivariant { class_rep: g, h, deviation: dev });
        }
    }
    Ok(inv)
}

/// `φ⁻¹(δφ + M₁φ)`.
pub fn pull_back_connection(phi: &OmegaMatrix, phi_inv: &OmegaMatrix, m1: &OmegaMatrix) -> OmegaMatrix {
    phi_inv * &(&phi.delta() + &(m1 * phi))
}

/// The odd section `CS(E₀, E₁, φ)` with `φ` given per class representative.
/// Both bundles need packets over the same model for every class.
pub fn cs_form(
    e0: &GradedBundle,
    e1: &GradedBundle,
    phi: &BTreeMap<usize, OmegaMatrix>,
    settings: &Settings,
) -> Result<InertiaSection, ChernSimonsError> {
    if e0.cocycle() != e1.cocycle() {
        return Err(ChernSimonsError::Incompatible("different cocycles".into()));
    }
    let mut components = BTreeMap::new();
    for g in e0.group().class_representatives() {
        let p0 = e0.require_packet(g)?;
        let p1 = e1.require_packet(g)?;
        if !std::sync::Arc::ptr_eq(p0.algebra(), p1.algebra()) {
            return Err(ChernSimonsError::Incompatible(format!("models differ at [{g}]")));
        }
        let f = phi
            .get(&g)
            .ok_or_else(|| ChernSimonsError::Incompatible(format!("no isomorphism given at [{g}]")))?;
        let f_inv = check_isomorphism(p0, p1, f, settings.tolerance)?;
        let m1 = pull_back_connection(f, &f_inv, p1.m());
        let path = ConnectionPath::new(p0.clone(), m1)?;
        let (form, _) = path.transgression(&settings.quadrature)?;
        components.insert(g, Component { form, points: None });
    }
    Ok(InertiaSection::new(
        e0.cocycle().clone(),
        Parity::Odd,
        components,
        settings.tolerance,
    )?)
}

/// Identity isomorphisms for a bundle and a copy with other connections.
pub fn identity_isomorphism(e: &GradedBundle) -> BTreeMap<usize, OmegaMatrix> {
    e.packets()
        .map(|p| (p.class_rep(), OmegaMatrix::identity(p.algebra(), p.grading().to_vec())))
        .collect()
}

/// Exact tier: validates `φ_x: E₀,x → E₁,x` (even, invertible and
/// intertwining `ρ`) and returns the zero odd section, since a
/// zero-dimensional base carries no odd forms.
pub fn cs_form_exact(
    e0: &TwistedBundle,
    e1: &TwistedBundle,
    phi: &[CMat],
    settings: &Settings,
) -> Result<InertiaSection, ChernSimonsError> {
    if e0.base() != e1.base() {
        return Err(BundleError::BaseMismatch.into());
    }
    if e0.cocycle() != e1.cocycle() {
        return Err(BundleError::CocycleMismatch.into());
    }
    let base = e0.base();
    let tol = settings.tolerance;
    if phi.len() != base.n_points() {
        return Err(ChernSimonsError::Incompatible(format!(
            "{} isomorphism blocks for {} points",
            phi.len(),
            base.n_points()
        )));
    }
    for (x, f) in phi.iter().enumerate() {
        let bad = |reason: String| ChernSimonsError::PointNotIsomorphism { x, reason };
        let (p0, q0) = e0.fibers()[x];
        if e1.fibers()[x] != (p0, q0) || f.shape() != (p0 + q0, p0 + q0) {
            return Err(bad("fiber ranks differ".into()));
        }
        let odd = (0..p0 + q0)
            .flat_map(|i| (0..p0 + q0).map(move |j| (i, j)))
            .filter(|&(i, j)| (i < p0) != (j < p0))
            .map(|(i, j)| f[(i, j)].norm())
            .fold(0.0, f64::max);
        if odd > tol {
            return Err(bad(format!("odd part {odd:.3e}")));
        }
        if p0 + q0 > 0 && linalg::min_singular_value(f) <= tol {
            return Err(bad("singular".into()));
        }
    }
    for g in base.group().elements() {
        for x in 0..base.n_points() {
            let gx = base.act(g, x);
            let dev = linalg::max_abs_diff(&(&phi[gx] * e0.rho(g, x)), &(e1.rho(g, x) * &phi[x]));
            if dev > tol {
                return Err(ChernSimonsError::PointNotEquivariant { g, x, deviation: dev });
            }
        }
    }
    zero_exact_section(e0, tol)
}

/// The zero odd section over the fixed-point models of `e`.
pub fn zero_exact_section(e: &TwistedBundle, tol: f64) -> Result<InertiaSection, ChernSimonsError> {
    let mut components = BTreeMap::new();
    for g in e.base().group().class_representatives() {
        let (alg, points) = fixed_point_model(e.base(), g, tol)?;
        components.insert(
            g,
            Component {
                form: Form::zero(&alg),
                points: Some(points),
            },
        );
    }
    Ok(InertiaSection::new(e.cocycle().clone(), Parity::Odd, components, tol)?)
}

/// Canonical representative modulo exact forms, componentwise.
pub fn cs_class(section: &InertiaSection) -> InertiaSection {
    let comps: BTreeMap<usize, Component> = section
        .components()
        .iter()
        .map(|(&g, c)| {
            (
                g,
                Component {
                    form: c.form.modulo_exact(),
                    points: c.points.clone(),
                },
            )
        })
        .collect();
    InertiaSection::new(section.cocycle().clone(), section.parity(), comps, f64::INFINITY)
        .expect("projection keeps keys and models")
}

/// Whether two odd sections differ by an exact section.
pub fn same_class(a: &InertiaSection, b: &InertiaSection, tol: f64) -> Result<bool, ChernSimonsError> {
    let diff = a.sub(b)?;
    Ok(diff.components().values().all(|c| c.form.is_exact(tol)))
}

/// CS along the renormalization flow `𝔸(λ) = λ𝔸₀ + 𝔸₁` of `ε_V` from
/// `λ = 1` to `λ_max`. The path is affine in λ, so it is the linear path
/// between its endpoints.
pub fn rg_flow_cs(v: &GradedTrivialTheory, lambda_max: f64, settings: &Settings) -> Result<InertiaSection, ChernSimonsError> {
    let start = GradedTrivialTheory::scaled(v.v().clone(), 1.0)?;
    let end = GradedTrivialTheory::scaled(v.v().clone(), lambda_max)?;
    let phi = identity_isomorphism(start.bundle());
    cs_form(start.bundle(), end.bundle(), &phi, settings)
}

/// Exact-tier renormalization flow: always zero.
pub fn rg_flow_cs_exact(v: &TrivialTheory, lambda_max: f64, settings: &Settings) -> Result<InertiaSection, ChernSimonsError> {
    let end = TrivialTheory::scaled(v.v().clone(), lambda_max, settings.tolerance)?;
    let phi: Vec<CMat> = (0..end.bundle().base().n_points())
        .map(|x| {
            let d = end.bundle().fiber_dim(x);
            CMat::identity(d, d)
        })
        .collect();
    let start = TrivialTheory::scaled(v.v().clone(), 1.0, settings.tolerance)?;
    cs_form_exact(start.bundle(), end.bundle(), &phi, settings)
}
