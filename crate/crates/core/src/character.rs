//! Characters as sections of the line bundle `L^β` over the inertia
//! groupoid, and partition functions of effective theories.
//!
//! A section stores one form per conjugacy-class representative `g`, on
//! the model of `X^g`. On the exact tier the model is `C^{X^g}` with the
//! centralizer permuting points, so the component lists its points.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::form_algebra::{point_permutation, zero_dim_model, Form, FormAlgebra, FormError, Parity};
use crate::group_cocycle::TwoCocycle;
use crate::scalar::C64;
use crate::twisted_bundle::{BundleError, GradedBundle, TwistedBundle};

#[derive(Debug, Error)]
pub enum CharacterError {
    #[error("no packet for class [{class_rep}]")]
    MissingPacket { class_rep: usize },
    #[error("component at [{class_rep}] is not closed: |dZ| = {deviation:.3e}")]
    NotClosed { class_rep: usize, deviation: f64 },
    #[error("component at [{class_rep}] does not have parity {expected:?}: deviation {deviation:.3e}")]
    WrongParity {
        class_rep: usize,
        expected: Parity,
        deviation: f64,
    },
    #[error("covariance fails for h = {h} at [{class_rep}]: deviation {deviation:.3e}")]
    Covariance { class_rep: usize, h: usize, deviation: f64 },
    #[error("sections do not match: {0}")]
    Incompatible(String),
    #[error("{0} is not a class representative")]
    NotRepresentative(usize),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// One component of an inertia section.
#[derive(Clone, Debug)]
pub struct Component {
    pub form: Form,
    /// Exact tier: the fixed points `X^g`, in basis order.
    pub points: Option<Vec<usize>>,
}

impl Component {
    pub fn algebra(&self) -> &Arc<FormAlgebra> {
        self.form.algebra()
    }

    /// Same fixed points and a structurally equal model.
    pub fn compatible(&self, other: &Self) -> bool {
        let (a, b) = (self.algebra(), other.algebra());
        self.points == other.points
            && (Arc::ptr_eq(a, b) || (a.dim() == b.dim() && a.names() == b.names() && a.degrees() == b.degrees()))
    }
}

/// `{Z_g}` indexed by class representatives, with the ambient cocycle and a
/// parity tag.
#[derive(Clone, Debug)]
pub struct InertiaSection {
    cocycle: TwoCocycle,
    parity: Parity,
    components: BTreeMap<usize, Component>,
}

/// Largest deviation found by a covariance check, with its witness.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub identities_checked: usize,
    pub max_deviation: f64,
    /// `(g, h)` attaining the maximum.
    pub worst: Option<(usize, usize)>,
    pub tolerance: f64,
}

impl CovarianceReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }

    fn record(&mut self, g: usize, h: usize, dev: f64) {
        self.identities_checked += 1;
        if dev > self.max_deviation || self.worst.is_none() {
            self.max_deviation = self.max_deviation.max(dev);
            self.worst = Some((g, h));
        }
    }
}

impl InertiaSection {
    /// Checks keys against class representatives and the parity of each
    /// component.
    pub fn new(
        cocycle: TwoCocycle,
        parity: Parity,
        components: BTreeMap<usize, Component>,
        tol: f64,
    ) -> Result<Self, CharacterError> {
        let group = cocycle.group();
        for (&g, c) in &components {
            if !group.contains(g) || group.class_representative(g) != g {
                return Err(CharacterError::NotRepresentative(g));
            }
            let dev = c.form.part(parity.flip()).max_abs();
            if dev > tol {
                return Err(CharacterError::WrongParity {
                    class_rep: g,
                    expected: parity,
                    deviation: dev,
                });
            }
            if let Some(p) = &c.points {
                if p.len() != c.algebra().dim() {
                    return Err(CharacterError::Incompatible(format!(
                        "component [{g}] lists {} points for a model of dimension {}",
                        p.len(),
                        c.algebra().dim()
                    )));
                }
            }
        }
        Ok(Self {
            cocycle,
            parity,
            components,
        })
    }

    pub fn cocycle(&self) -> &TwoCocycle {
        &self.cocycle
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn components(&self) -> &BTreeMap<usize, Component> {
        &self.components
    }

    pub fn component(&self, g: usize) -> Option<&Component> {
        self.components.get(&g)
    }

    pub fn form(&self, g: usize) -> Option<&Form> {
        self.components.get(&g).map(|c| &c.form)
    }

    /// Same models, all components zero.
    pub fn zero_like(&self, parity: Parity) -> Self {
        Self {
            cocycle: self.cocycle.clone(),
            parity,
            components: self
                .components
                .iter()
                .map(|(&g, c)| {
                    (
                        g,
                        Component {
                            form: Form::zero(c.algebra()),
                            points: c.points.clone(),
                        },
                    )
                })
                .collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self, CharacterError> {
        if self.cocycle != other.cocycle {
            return Err(CharacterError::Incompatible("different cocycles".into()));
        }
        if self.parity != other.parity {
            return Err(CharacterError::Incompatible(format!(
                "parities {:?} and {:?}",
                self.parity, other.parity
            )));
        }
        if self.components.keys().ne(other.components.keys()) {
            return Err(CharacterError::Incompatible("different class sets".into()));
        }
        let mut components = BTreeMap::new();
        for ((&g, a), b) in self.components.iter().zip(other.components.values()) {
            if !a.compatible(b) {
                return Err(CharacterError::Incompatible(format!("models differ at [{g}]")));
            }
            let coeffs = a.form.coeffs().iter().zip(b.form.coeffs()).map(|(x, y)| f(*x, *y)).collect();
            components.insert(
                g,
                Component {
                    form: Form::new(a.algebra(), coeffs)?,
                    points: a.points.clone(),
                },
            );
        }
        Ok(Self {
            cocycle: self.cocycle.clone(),
            parity: self.parity,
            components,
        })
    }

    /// Componentwise sum; models are matched structurally.
    pub fn add(&self, other: &Self) -> Result<Self, CharacterError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CharacterError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for comp in out.components.values_mut() {
            comp.form = comp.form.scale(&c);
        }
        out
    }

    /// Componentwise `d`, with the parity tag flipped.
    pub fn d(&self) -> Self {
        let mut out = self.clone();
        out.parity = self.parity.flip();
        for comp in out.components.values_mut() {
            comp.form = comp.form.d();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().map(|c| c.form.max_abs()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> Result<f64, CharacterError> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Largest `|dZ_g|`, with the class attaining it.
    pub fn closedness_defect(&self) -> (f64, Option<usize>) {
        self.components
            .iter()
            .map(|(&g, c)| (c.form.d().max_abs(), Some(g)))
            .fold((0.0, None), |acc, x| if x.0 > acc.0 { x } else { acc })
    }

    /// Covariance within each centralizer, using the actions installed on
    /// the component models: `a_{h⁻¹}(Z_g) = L^β(h, g)·Z_g`. The identity
    /// and `g` act trivially when no action is installed; other elements
    /// without an installed action are skipped.
    pub fn check_internal_covariance(&self, tol: f64) -> Result<CovarianceReport, CharacterError> {
        let group = self.cocycle.group().clone();
        let mut report = CovarianceReport {
            identities_checked: 0,
            max_deviation: 0.0,
            worst: None,
            tolerance: tol,
        };
        for (&g, c) in &self.components {
            for h in group.centralizer(g) {
                let hinv = group.inv(h);
                let moved = if c.algebra().has_action(hinv) {
                    c.form.act(hinv)?
                } else if h == group.identity() || h == g {
                    c.form.clone()
                } else {
                    continue;
                };
                let scaled = c.form.scale(&self.cocycle.lbeta(h, g).to_c64());
                report.record(g, h, moved.distance(&scaled));
            }
        }
        Ok(report)
    }

    /// Exact tier: `Z_g` at an arbitrary element `g`, transported from the
    /// class representative `r = k⁻¹gk` by `Z_{krk⁻¹}(kx) = L^β(k, r)·Z_r(x)`.
    /// Returns `(x, Z_g(x))` for `x ∈ X^g`, sorted by point.
    pub fn pointwise(&self, g: usize, base: &crate::gset::FiniteGSet) -> Result<Vec<(usize, C64)>, CharacterError> {
        let group = self.cocycle.group();
        let r = group.class_representative(g);
        let comp = self.components.get(&r).ok_or(CharacterError::MissingPacket { class_rep: r })?;
        let points = comp
            .points
            .as_ref()
            .ok_or_else(|| CharacterError::Incompatible("component has no point labels".into()))?;
        let k = group.conjugator(r, g).expect("g is conjugate to its representative");
        let phase = self.cocycle.lbeta(k, r).to_c64();
        let mut out: Vec<(usize, C64)> = points
            .iter()
            .zip(comp.form.coeffs())
            .map(|(&x, &z)| (base.act(k, x), phase * z))
            .collect();
        out.sort_by_key(|p| p.0);
        Ok(out)
    }
}

/// `sTr(exp(−A₀²)ρ_x(g))` for every `g` and every `x ∈ X^g`.
pub fn pointwise_character(e: &TwistedBundle) -> Result<Vec<BTreeMap<usize, C64>>, CharacterError> {
    let base = e.base();
    base.group()
        .elements()
        .map(|g| {
            base.fixed_points(g)
                .into_iter()
                .map(|x| Ok((x, e.supertrace_at(g, x, 1.0)?)))
                .collect()
        })
        .collect()
}

/// The model `C^{X^g}` with the centralizer of `g` permuting fixed points.
pub fn fixed_point_model(base: &crate::gset::FiniteGSet, g: usize, tol: f64) -> Result<(Arc<FormAlgebra>, Vec<usize>), FormError> {
    let group = base.group();
    let points = base.fixed_points(g);
    let index: BTreeMap<usize, usize> = points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut alg = zero_dim_model::<C64>(points.len(), tol);
    for h in group.centralizer(g) {
        let perm: Vec<usize> = points.iter().map(|&x| index[&base.act(h, x)]).collect();
        alg = alg.with_action(h, point_permutation(&perm))?;
    }
    Ok((Arc::new(alg), points))
}

/// Things that carry a character.
pub trait CharacterSource {
    /// `Z_g = sTr(exp(−𝔸²)∘ρ(g))` at each class representative.
    fn character(&self, tol: f64) -> Result<InertiaSection, CharacterError>;

    /// Verifies the covariance identity of `section` against this source.
    fn check_covariance(&self, section: &InertiaSection, tol: f64) -> Result<CovarianceReport, CharacterError>;
}

impl CharacterSource for TwistedBundle {
    fn character(&self, tol: f64) -> Result<InertiaSection, CharacterError> {
        let base = self.base();
        let mut components = BTreeMap::new();
        for g in base.group().class_representatives() {
            let (alg, points) = fixed_point_model(base, g, tol)?;
            let coeffs = points
                .iter()
                .map(|&x| self.supertrace_at(g, x, 1.0))
                .collect::<Result<Vec<_>, _>>()?;
            let form = Form::new(&alg, coeffs)?;
            components.insert(
                g,
                Component {
                    form,
                    points: Some(points),
                },
            );
        }
        let section = InertiaSection::new(self.cocycle().clone(), Parity::Even, components, tol)?;
        let internal = section.check_internal_covariance(tol)?;
        if !internal.passed() {
            let (g, h) = internal.worst.expect("a failing report has a witness");
            return Err(CharacterError::Covariance {
                class_rep: g,
                h,
                deviation: internal.max_deviation,
            });
        }
        Ok(section)
    }

    /// Checks every pair `(g, h)` over all of `G` against values computed
    /// directly from the bundle, `Z_{hgh⁻¹}(hx) = L^β(h, g)·Z_g(x)`, and that
    /// the section agrees with the bundle at each representative.
    fn check_covariance(&self, section: &InertiaSection, tol: f64) -> Result<CovarianceReport, CharacterError> {
        let base = self.base();
        let group = base.group();
        let table = pointwise_character(self)?;
        let mut report = CovarianceReport {
            identities_checked: 0,
            max_deviation: 0.0,
            worst: None,
            tolerance: tol,
        };
        for g in group.elements() {
            for h in group.elements() {
                let c = group.conj(h, g);
                let phase = self.cocycle().lbeta(h, g).to_c64();
                for (x, hx) in base.conj_map(g, h) {
                    let dev = (table[c][&hx] - phase * table[g][&x]).norm();
                    report.record(g, h, dev);
                }
            }
        }
        for (&g, comp) in section.components() {
            let points = comp
                .points
                .as_ref()
                .ok_or_else(|| CharacterError::Incompatible("exact-tier section needs point labels".into()))?;
            for (&x, z) in points.iter().zip(comp.form.coeffs()) {
                report.record(g, group.identity(), (table[g][&x] - z).norm());
            }
        }
        Ok(report)
    }
}

impl CharacterSource for GradedBundle {
    /// Requires a packet for every class; each component is checked closed
    /// and covariant under the centralizer generators.
    fn character(&self, tol: f64) -> Result<InertiaSection, CharacterError> {
        let group = self.group();
        let mut components = BTreeMap::new();
        for g in group.class_representatives() {
            let p = self
                .packet(g)
                .ok_or(CharacterError::MissingPacket { class_rep: g })?;
            let z = p.heat_supertrace(g, 1.0)?;
            let dev = z.d().max_abs();
            if dev > tol {
                return Err(CharacterError::NotClosed {
                    class_rep: g,
                    deviation: dev,
                });
            }
            for &h in p.generators() {
                let moved = p.act_form(group.inv(h), &z)?;
                let want = z.scale(&self.cocycle().lbeta(h, g).to_c64());
                let dev = moved.distance(&want);
                if dev > tol {
                    return Err(CharacterError::Covariance { class_rep: g, h, deviation: dev });
                }
            }
            components.insert(g, Component { form: z, points: None });
        }
        InertiaSection::new(self.cocycle().clone(), Parity::Even, components, tol)
    }

    /// Checks `a_{h⁻¹}(Z_g) = L^β(h, g)·Z_g` for all `h` in each centralizer
    /// and agreement of the section with the packets.
    fn check_covariance(&self, section: &InertiaSection, tol: f64) -> Result<CovarianceReport, CharacterError> {
        let mut report = centralizer_covariance(section, self, tol)?;
        for (&g, comp) in section.components() {
            let p = self.require_packet(g)?;
            let fresh = p.heat_supertrace(g, 1.0)?;
            report.record(g, self.group().identity(), fresh.distance(&comp.form));
        }
        Ok(report)
    }
}

/// `a_{h⁻¹}(S_g) = L^β(h, g)·S_g` for every component `S_g` of a section
/// over the packet models of `bundle` and every `h` centralizing `g`.
/// Applies to characters and to Chern–Simons forms alike.
pub fn centralizer_covariance(
    section: &InertiaSection,
    bundle: &GradedBundle,
    tol: f64,
) -> Result<CovarianceReport, CharacterError> {
    let group = bundle.group();
    let mut report = CovarianceReport {
        identities_checked: 0,
        max_deviation: 0.0,
        worst: None,
        tolerance: tol,
    };
    for (&g, comp) in section.components() {
        let p = bundle.require_packet(g)?;
        if !Arc::ptr_eq(p.algebra(), comp.algebra()) {
            return Err(CharacterError::Incompatible(format!("models differ at [{g}]")));
        }
        for h in p.centralizer() {
            let moved = p.act_form(group.inv(h), &comp.form)?;
            let want = comp.form.scale(&bundle.cocycle().lbeta(h, g).to_c64());
            report.record(g, h, moved.distance(&want));
        }
    }
    Ok(report)
}

/// `Z(E, η) = Z(E) + dη` for an odd section `η` over the same models.
pub fn partition_function(z: &InertiaSection, eta: &InertiaSection) -> Result<InertiaSection, CharacterError> {
    if z.parity() != Parity::Even {
        return Err(CharacterError::Incompatible("character must be even".into()));
    }
    if eta.parity() != Parity::Odd {
        return Err(CharacterError::Incompatible("η must be odd".into()));
    }
    z.add(&eta.d())
}
