use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::khat::{decompose, decompose_at};
use super::DiffKError;
use crate::character::{CharacterSource, InertiaSection};
use crate::chern_simons::{cs_class, cs_form, cs_form_exact, same_class, zero_exact_section};
use crate::form_algebra::{OmegaMatrix, Parity};
use crate::linalg::{self, CMat};
use crate::scalar::C64;
use crate::twisted_bundle::{GradedBundle, TrivialTheory, TwistedBundle};
use crate::Settings;

/// An exact-tier theory `(E, η)`. `η` is kept as its class representative.
#[derive(Clone, Debug)]
pub struct EffectiveTheory {
    bundle: TwistedBundle,
    eta: InertiaSection,
}

fn check_eta(eta: &InertiaSection, cocycle: &crate::group_cocycle::TwoCocycle, tol: f64) -> Result<(), DiffKError> {
    if eta.parity() != Parity::Odd {
        return Err(DiffKError::Incompatible("η must be odd".into()));
    }
    if eta.cocycle() != cocycle {
        return Err(DiffKError::Incompatible("η has a different cocycle".into()));
    }
    let report = eta.check_internal_covariance(tol)?;
    if !report.passed() {
        return Err(DiffKError::Incompatible(format!(
            "η is not covariant: deviation {:.3e} at {:?}",
            report.max_deviation, report.worst
        )));
    }
    Ok(())
}

impl EffectiveTheory {
    pub fn new(bundle: TwistedBundle, eta: InertiaSection, tol: f64) -> Result<Self, DiffKError> {
        check_eta(&eta, bundle.cocycle(), tol)?;
        let zero = zero_exact_section(&bundle, tol)?;
        for (g, c) in zero.components() {
            match eta.component(*g) {
                Some(e) if e.compatible(c) => {}
                _ => {
                    return Err(DiffKError::Incompatible(format!(
                        "η component at [{g}] is not over the fixed-point model"
                    )))
                }
            }
        }
        Ok(Self {
            bundle,
            eta: cs_class(&eta),
        })
    }

    /// `(E, 0)`.
    pub fn from_bundle(bundle: TwistedBundle, tol: f64) -> Result<Self, DiffKError> {
        let eta = zero_exact_section(&bundle, tol)?;
        Ok(Self { bundle, eta })
    }

    pub fn bundle(&self) -> &TwistedBundle {
        &self.bundle
    }

    pub fn eta(&self) -> &InertiaSection {
        &self.eta
    }

    /// `(πE, −η)`.
    pub fn parity_shift(&self) -> Self {
        Self {
            bundle: self.bundle.parity_shift(),
            eta: self.eta.scale(C64::new(-1.0, 0.0)),
        }
    }
}

/// `(E₀ ⊕ E₁, η₀ + η₁)`.
pub fn eft_sum(t0: &EffectiveTheory, t1: &EffectiveTheory) -> Result<EffectiveTheory, DiffKError> {
    let bundle = t0.bundle.direct_sum(&t1.bundle)?;
    let eta = cs_class(&t0.eta.add(&t1.eta)?);
    Ok(EffectiveTheory { bundle, eta })
}

/// Outcome of a decision: on success a certificate, otherwise a reason.
#[derive(Clone, Debug, Serialize)]
pub struct Decision<C> {
    pub holds: bool,
    pub reason: Option<String>,
    /// Where a character comparison failed, when that is the reason.
    pub witness: Option<Witness>,
    pub certificate: Option<C>,
}

/// A group element and a point of the orbit on which two theories differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub element: usize,
    pub point: usize,
}

impl<C> Decision<C> {
    fn no(reason: impl Into<String>) -> Self {
        Self {
            holds: false,
            reason: Some(reason.into()),
            witness: None,
            certificate: None,
        }
    }

    fn yes(certificate: C) -> Self {
        Self {
            holds: true,
            reason: None,
            witness: None,
            certificate: Some(certificate),
        }
    }
}

/// Per-point intertwiners `φ_x: E₀,x → E₁,x`.
pub type Intertwiner = Vec<CMat>;

/// Certificate for stable isomorphism: `E₀ ⊕ ε_{V₀} ≅ E₁ ⊕ ε_{V₁}` via `phi`.
#[derive(Clone, Debug)]
pub struct StableCertificate {
    pub v0: TwistedBundle,
    pub v1: TwistedBundle,
    pub phi: Intertwiner,
}

fn compatible(t0: &TwistedBundle, t1: &TwistedBundle) -> Option<&'static str> {
    if t0.base() != t1.base() {
        Some("different base G-sets")
    } else if t0.cocycle() != t1.cocycle() {
        Some("different cocycles")
    } else {
        None
    }
}

/// Basis of `{X : A_h X = X B_h for all h}` with `X` of shape `rows × cols`.
fn intertwiner_space(a: &[CMat], b: &[CMat], rows: usize, cols: usize) -> Vec<CMat> {
    if rows == 0 || cols == 0 {
        return vec![CMat::zeros(rows, cols)];
    }
    let n = rows * cols;
    let mut system = CMat::zeros(n * a.len(), n);
    for (k, (ah, bh)) in a.iter().zip(b).enumerate() {
        // vec(AX) − vec(XB) = (I ⊗ A − Bᵀ ⊗ I) vec(X), column-major
        let block = CMat::identity(cols, cols).kronecker(ah) - bh.transpose().kronecker(&CMat::identity(rows, rows));
        system.view_mut((k * n, 0), (n, n)).copy_from(&block);
    }
    let kernel = linalg::nullspace(&system, 1e-9);
    (0..kernel.ncols())
        .map(|j| CMat::from_column_slice(rows, cols, kernel.column(j).as_slice()))
        .collect()
}

/// An invertible element of the intertwiner space, if one exists. A random
/// combination is invertible with probability one when any element is.
fn invertible_element(basis: &[CMat], dim: usize, rng: &mut ChaCha8Rng) -> Option<CMat> {
    if dim == 0 {
        return Some(CMat::zeros(0, 0));
    }
    for _ in 0..6 {
        let mut x = CMat::zeros(dim, dim);
        for b in basis {
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            x += b * c;
        }
        let scale = linalg::singular_values(&x).first().copied().unwrap_or(0.0);
        if scale > 0.0 && linalg::min_singular_value(&x) > 1e-6 * scale {
            return Some(x);
        }
    }
    None
}

/// Searches for an even equivariant isomorphism `E₀ → E₁` by solving the
/// intertwining equations at each orbit representative and transporting
/// the solution along the orbit. Independent of characters.
pub fn find_intertwiner(e0: &TwistedBundle, e1: &TwistedBundle, settings: &Settings) -> Option<Intertwiner> {
    let tol = settings.tolerance;
    if compatible(e0, e1).is_some() || e0.fibers() != e1.fibers() {
        return None;
    }
    let base = e0.base();
    let group = base.group();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut phi: Vec<Option<CMat>> = vec![None; base.n_points()];
    for orbit in base.orbits() {
        let x0 = orbit[0];
        let stab = base.stabilizer(x0);
        let (p, q) = e0.fibers()[x0];
        let mut blocks = Vec::new();
        for (lo, len) in [(0, p), (p, q)] {
            let sub = |m: &CMat| m.view((lo, lo), (len, len)).into_owned();
            let a: Vec<CMat> = stab.iter().map(|&h| sub(e1.rho(h, x0))).collect();
            let b: Vec<CMat> = stab.iter().map(|&h| sub(e0.rho(h, x0))).collect();
            let basis = intertwiner_space(&a, &b, len, len);
            blocks.push(invertible_element(&basis, len, &mut rng)?);
        }
        let f0 = linalg::block_diag(&[&blocks[0], &blocks[1]]);
        for &y in &orbit {
            let s = base.transporter(x0, y).expect("y lies in the orbit of x0");
            let r0_inv = e0.rho(s, x0).clone().try_inverse()?;
            phi[y] = Some(e1.rho(s, x0) * &f0 * r0_inv);
        }
    }
    let phi: Vec<CMat> = phi.into_iter().collect::<Option<_>>()?;
    for g in group.elements() {
        for x in 0..base.n_points() {
            let gx = base.act(g, x);
            let dev = linalg::max_abs_diff(&(&phi[gx] * e0.rho(g, x)), &(e1.rho(g, x) * &phi[x]));
            if dev > tol.max(1e-8) {
                return None;
            }
        }
    }
    Some(phi)
}

/// Exact tier: `E₀ ≅ E₁` equivariantly and `η₀ = η₁` as classes.
pub fn is_isomorphic(t0: &EffectiveTheory, t1: &EffectiveTheory, settings: &Settings) -> Result<Decision<Intertwiner>, DiffKError> {
    let (e0, e1) = (&t0.bundle, &t1.bundle);
    if let Some(r) = compatible(e0, e1) {
        return Ok(Decision::no(r));
    }
    for x in 0..e0.base().n_points() {
        if e0.fibers()[x] != e1.fibers()[x] {
            return Ok(Decision::no(format!(
                "fiber ranks differ at point {x}: {:?} vs {:?}",
                e0.fibers()[x],
                e1.fibers()[x]
            )));
        }
    }
    let d0 = decompose(e0)?;
    let d1 = decompose(e1)?;
    for (a, b) in d0.iter().zip(&d1) {
        if a.even != b.even {
            return Ok(Decision::no(format!(
                "even twisted characters differ on the orbit of point {}",
                a.point
            )));
        }
        if a.odd != b.odd {
            return Ok(Decision::no(format!(
                "odd twisted characters differ on the orbit of point {}",
                a.point
            )));
        }
    }
    let Some(phi) = find_intertwiner(e0, e1, settings) else {
        return Err(DiffKError::Decomposition(
            "characters agree but no intertwiner was found".into(),
        ));
    };
    let cs = cs_form_exact(e0, e1, &phi, settings)?;
    if !same_class(&t0.eta, &t1.eta.add(&cs)?, settings.tolerance)? {
        return Ok(Decision::no("η₀ − η₁ − CS is not exact"));
    }
    Ok(Decision::yes(phi))
}

/// Copies of the stabilizer irreducibles with the given multiplicities,
/// induced over the orbit of `x`.
fn induced_multiple(e: &TwistedBundle, x: usize, mult: &[i64], tol: f64) -> Result<TwistedBundle, DiffKError> {
    let d = decompose_at(e, x)?;
    let order = d.stabilizer.group.order();
    let mut dim = 0;
    let mut sigma = vec![CMat::zeros(0, 0); order];
    for (irrep, &m) in d.table.irreps().iter().zip(mult) {
        for _ in 0..m.max(0) {
            dim += irrep.dim;
            sigma = sigma
                .iter()
                .zip(&irrep.rho)
                .map(|(s, r)| linalg::block_diag(&[s, r]))
                .collect();
        }
    }
    Ok(TwistedBundle::induced(
        e.base().clone(),
        e.cocycle().clone(),
        x,
        (dim, 0),
        &sigma,
        &CMat::zeros(dim, dim),
        tol,
    )?)
}

/// The equivalence relation generated by `T₀ ~ T₁` when `η₀ = η₁` and
/// `E₀ ≅ E₁ ⊕ ε_V`. Holds iff the η classes agree and the per-orbit virtual
/// characters agree; the certificate gives `V₀`, `V₁` and an isomorphism
/// `E₀ ⊕ ε_{V₀} ≅ E₁ ⊕ ε_{V₁}`.
pub fn is_stably_isomorphic(
    t0: &EffectiveTheory,
    t1: &EffectiveTheory,
    settings: &Settings,
) -> Result<Decision<StableCertificate>, DiffKError> {
    let (e0, e1) = (&t0.bundle, &t1.bundle);
    if let Some(r) = compatible(e0, e1) {
        return Ok(Decision::no(r));
    }
    if !same_class(&t0.eta, &t1.eta, settings.tolerance)? {
        return Ok(Decision::no("η classes differ"));
    }
    let d0 = decompose(e0)?;
    let d1 = decompose(e1)?;
    let tol = settings.tolerance;
    let mut v0 = TwistedBundle::zero(e0.base().clone(), e0.cocycle().clone());
    let mut v1 = v0.clone();
    for (a, b) in d0.iter().zip(&d1) {
        let (va, vb) = (a.virtual_multiplicities(), b.virtual_multiplicities());
        if va != vb {
            // the least stabilizer element where the virtual characters differ
            let irreps = a.table.irreps();
            let witness = a.stabilizer.group.elements().find(|&l| {
                let diff: C64 = irreps
                    .iter()
                    .zip(va.iter().zip(&vb))
                    .map(|(i, (x, y))| i.character[l] * (x - y) as f64)
                    .sum();
                diff.norm() > 1e-6
            });
            let g = a.stabilizer.ambient(witness.expect("distinct multiplicities give distinct characters"));
            let mut d = Decision::no(format!(
                "virtual character mismatch at class [{g}] on the orbit of point {}",
                a.point
            ));
            d.witness = Some(Witness { element: g, point: a.point });
            return Ok(d);
        }
        let k: Vec<i64> = a.even.iter().zip(&b.even).map(|(x, y)| x - y).collect();
        let need0: Vec<i64> = k.iter().map(|&k| (-k).max(0)).collect();
        let need1: Vec<i64> = k.iter().map(|&k| k.max(0)).collect();
        v0 = v0.direct_sum(&induced_multiple(e0, a.point, &need0, tol)?)?;
        v1 = v1.direct_sum(&induced_multiple(e0, a.point, &need1, tol)?)?;
    }
    let s0 = e0.direct_sum(TrivialTheory::new(v0.clone(), tol)?.bundle())?;
    let s1 = e1.direct_sum(TrivialTheory::new(v1.clone(), tol)?.bundle())?;
    let Some(phi) = find_intertwiner(&s0, &s1, settings) else {
        return Err(DiffKError::Decomposition(
            "virtual characters agree but the stabilized bundles are not isomorphic".into(),
        ));
    };
    Ok(Decision::yes(StableCertificate { v0, v1, phi }))
}

/// A graded-tier theory `(E, η)` over differential-form models.
#[derive(Clone, Debug)]
pub struct GradedTheory {
    bundle: GradedBundle,
    eta: InertiaSection,
}

impl GradedTheory {
    pub fn new(bundle: GradedBundle, eta: InertiaSection, tol: f64) -> Result<Self, DiffKError> {
        check_eta(&eta, bundle.cocycle(), tol)?;
        let report = crate::character::centralizer_covariance(&eta, &bundle, tol)?;
        if !report.passed() {
            return Err(DiffKError::Incompatible(format!(
                "η is not covariant under the centralizer actions: deviation {:.3e}",
                report.max_deviation
            )));
        }
        Ok(Self {
            bundle,
            eta: cs_class(&eta),
        })
    }

    pub fn bundle(&self) -> &GradedBundle {
        &self.bundle
    }

    pub fn eta(&self) -> &InertiaSection {
        &self.eta
    }

    /// `Z + dη`.
    pub fn partition_function(&self, tol: f64) -> Result<InertiaSection, DiffKError> {
        let z = self.bundle.character(tol)?;
        Ok(crate::character::partition_function(&z, &self.eta)?)
    }
}

pub fn graded_sum(t0: &GradedTheory, t1: &GradedTheory) -> Result<GradedTheory, DiffKError> {
    Ok(GradedTheory {
        bundle: t0.bundle.direct_sum(&t1.bundle)?,
        eta: cs_class(&t0.eta.add(&t1.eta)?),
    })
}

/// Result of checking a candidate isomorphism on the graded tier.
#[derive(Clone, Debug, Serialize)]
pub struct GradedCheck {
    /// `φ` is an even equivariant isomorphism of packets.
    pub phi_valid: bool,
    /// `η₀ − η₁ − CS(E₀, E₁, φ)` is exact.
    pub eta_matches: bool,
    pub reason: Option<String>,
}

impl GradedCheck {
    pub fn holds(&self) -> bool {
        self.phi_valid && self.eta_matches
    }
}

/// Verifies a candidate `φ` for `T₀ ≅ T₁`: it must be an equivariant
/// isomorphism and `η₀ = η₁ + CS(E₀, E₁, φ)` modulo exact forms. This
/// checks a certificate; it does not decide isomorphism.
pub fn check_graded_isomorphism(
    t0: &GradedTheory,
    t1: &GradedTheory,
    phi: &BTreeMap<usize, OmegaMatrix>,
    settings: &Settings,
) -> Result<GradedCheck, DiffKError> {
    use crate::chern_simons::ChernSimonsError as E;
    let cs = match cs_form(&t0.bundle, &t1.bundle, phi, settings) {
        Ok(cs) => cs,
        Err(e @ (E::NotIsomorphism { .. } | E::NotEquivariant { .. } | E::Incompatible(_))) => {
            return Ok(GradedCheck {
                phi_valid: false,
                eta_matches: false,
                reason: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let eta_matches = same_class(&t0.eta, &t1.eta.add(&cs)?, settings.tolerance)?;
    Ok(GradedCheck {
        phi_valid: true,
        eta_matches,
        reason: (!eta_matches).then(|| "η₀ − η₁ − CS is not exact".to_string()),
    })
}
