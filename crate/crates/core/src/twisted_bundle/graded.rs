use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use super::BundleError;
use crate::form_algebra::{Form, FormAlgebra, OmegaMatrix, Parity};
use crate::group_cocycle::{FiniteGroup, TwoCocycle};
use crate::scalar::C64;

/// Restriction of a twisted bundle with superconnection to the fixed-point
/// set `X^g` of a class representative `g`.
///
/// The algebra models forms on `X^g`, with the centralizer of `g` acting
/// on the left. The centralizer acts on sections by `ρ(h) = R_h ∘ a_h`,
/// and the superconnection is `𝔸 = εd + M`.
#[derive(Clone, Debug)]
pub struct Packet {
    class_rep: usize,
    algebra: Arc<FormAlgebra>,
    grading: Vec<Parity>,
    m: OmegaMatrix,
    rho: BTreeMap<usize, OmegaMatrix>,
    /// `a_h = a_{w₀} ∘ … ∘ a_{w_k}` for `words[h] = [w₀, …, w_k]`, each `w_i`
    /// a supplied generator.
    words: BTreeMap<usize, Vec<usize>>,
    generators: Vec<usize>,
    tolerance: f64,
}

impl Packet {
    /// Validates a packet from `R_h` on generators of the centralizer of
    /// `class_rep`; the remaining `R_h` are generated through the twisted
    /// composition law and checked for consistency.
    ///
    /// Every generator needs an action on the algebra, except the identity
    /// and `class_rep` itself, which fix `X^g` pointwise and act trivially
    /// when no action is installed.
    pub fn new(
        cocycle: &TwoCocycle,
        class_rep: usize,
        algebra: Arc<FormAlgebra>,
        grading: Vec<Parity>,
        m: OmegaMatrix,
        generators: BTreeMap<usize, OmegaMatrix>,
        tol: f64,
    ) -> Result<Self, BundleError> {
        let group = cocycle.group().clone();
        let g = class_rep;
        let bad = |reason: String| BundleError::Packet { class_rep: g, reason };
        if !group.contains(g) {
            return Err(bad("class representative is not a group element".into()));
        }
        let centralizer = group.centralizer(g);
        for &h in generators.keys() {
            if !centralizer.contains(&h) {
                return Err(bad(format!("element {h} does not centralize {g}")));
            }
            let needs_action = h != group.identity() && h != g;
            if needs_action && !algebra.has_action(h) {
                return Err(bad(format!("no action of {h} on the fixed-point model")));
            }
        }
        if !Arc::ptr_eq(m.algebra(), &algebra) || generators.values().any(|r| !Arc::ptr_eq(r.algebra(), &algebra)) {
            return Err(BundleError::Form(crate::form_algebra::FormError::AlgebraMismatch));
        }
        if m.rows() != grading.as_slice() || m.cols() != grading.as_slice() {
            return Err(bad("superconnection matrix does not match the module grading".into()));
        }
        m.require_parity(Parity::Odd, tol)
            .map_err(|e| bad(format!("superconnection: {e}")))?;
        for (h, r) in &generators {
            if r.rows() != grading.as_slice() || r.cols() != grading.as_slice() {
                return Err(bad(format!("R_{h} does not match the module grading")));
            }
            r.require_parity(Parity::Even, tol)
                .map_err(|e| bad(format!("R_{h}: {e}")))?;
        }

        let mut packet = Self {
            class_rep: g,
            algebra: algebra.clone(),
            grading: grading.clone(),
            m,
            rho: BTreeMap::new(),
            words: BTreeMap::new(),
            generators: generators.keys().copied().collect(),
            tolerance: tol,
        };
        let e = group.identity();
        packet.rho.insert(e, OmegaMatrix::identity(&algebra, grading.clone()));
        packet.words.insert(e, Vec::new());
        let mut queue = VecDeque::from([e]);
        while let Some(a) = queue.pop_front() {
            for (&s, rs) in &generators {
                let as_ = group.mul(a, s);
                // R_{as} = β(a,s)⁻¹ R_a a_a(R_s)
                let ra = packet.rho[&a].clone();
                let candidate = (&ra * &packet.act_word(&packet.words[&a], rs)?)
                    .scale(&cocycle.value(a, s).inv().to_c64());
                match packet.rho.get(&as_) {
                    Some(existing) => {
                        let dev = existing.distance(&candidate);
                        if dev > tol {
                            return Err(bad(format!(
                                "centralizer data inconsistent at {as_} = {a}·{s} (deviation {dev:.3e})"
                            )));
                        }
                    }
                    None => {
                        let mut w = packet.words[&a].clone();
                        w.push(s);
                        packet.words.insert(as_, w);
                        packet.rho.insert(as_, candidate);
                        queue.push_back(as_);
                    }
                }
            }
        }
        if packet.rho.len() != centralizer.len() {
            return Err(bad(format!(
                "supplied elements generate {} of the {} centralizer elements",
                packet.rho.len(),
                centralizer.len()
            )));
        }
        packet.validate(cocycle, &group)?;
        Ok(packet)
    }

    fn act_word(&self, word: &[usize], x: &OmegaMatrix) -> Result<OmegaMatrix, BundleError> {
        let mut out = x.clone();
        for &s in word.iter().rev() {
            if self.algebra.has_action(s) {
                out = out.act(s)?;
            }
        }
        Ok(out)
    }

    fn act_word_form(&self, word: &[usize], x: &Form) -> Result<Form, BundleError> {
        let mut out = x.clone();
        for &s in word.iter().rev() {
            if self.algebra.has_action(s) {
                out = out.act(s)?;
            }
        }
        Ok(out)
    }

    fn validate(&self, cocycle: &TwoCocycle, group: &FiniteGroup) -> Result<(), BundleError> {
        let g = self.class_rep;
        let tol = self.tolerance;
        let bad = |reason: String| BundleError::Packet { class_rep: g, reason };
        let elems: Vec<usize> = self.rho.keys().copied().collect();
        let basis: Vec<Form> = (0..self.algebra.dim()).map(|i| Form::basis(&self.algebra, i)).collect();
        for f in &basis {
            let dev = self.act_form(g, f)?.distance(f);
            if dev > tol {
                return Err(bad(format!("{g} does not act trivially on its own fixed-point model")));
            }
        }
        for &a in &elems {
            for &b in &elems {
                let ab = group.mul(a, b);
                for f in &basis {
                    let lhs = self.act_form(a, &self.act_form(b, f)?)?;
                    let rhs = self.act_form(ab, f)?;
                    if lhs.distance(&rhs) > tol {
                        return Err(bad(format!("actions of {a} and {b} do not compose to that of {ab}")));
                    }
                }
                let lhs = &self.rho[&a] * &self.act(a, &self.rho[&b])?;
                let rhs = self.rho[&ab].scale(&cocycle.value(a, b).to_c64());
                let dev = lhs.distance(&rhs);
                if dev > tol {
                    return Err(BundleError::TwistedComposition { g: a, h: b, x: g, deviation: dev });
                }
            }
        }
        for &h in &elems {
            let dev = self.equivariance_defect(h)?;
            if dev > tol {
                return Err(BundleError::NotEquivariant { g: h, x: g, deviation: dev });
            }
        }
        Ok(())
    }

    /// `‖R_h a_h(M) − δR_h − M R_h‖`.
    pub fn equivariance_defect(&self, h: usize) -> Result<f64, BundleError> {
        let r = self.rho(h).ok_or(BundleError::Packet {
            class_rep: self.class_rep,
            reason: format!("{h} is not in the centralizer"),
        })?;
        let lhs = r * &self.act(h, &self.m)?;
        let rhs = &r.delta() + &(&self.m * r);
        Ok(lhs.distance(&rhs))
    }

    pub fn class_rep(&self) -> usize {
        self.class_rep
    }

    pub fn algebra(&self) -> &Arc<FormAlgebra> {
        &self.algebra
    }

    pub fn grading(&self) -> &[Parity] {
        &self.grading
    }

    pub fn rank(&self) -> (usize, usize) {
        let odd = self.grading.iter().filter(|p| p.is_odd()).count();
        (self.grading.len() - odd, odd)
    }

    pub fn m(&self) -> &OmegaMatrix {
        &self.m
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Elements whose `R_h` were supplied at construction.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Centralizer elements, sorted.
    pub fn centralizer(&self) -> Vec<usize> {
        self.rho.keys().copied().collect()
    }

    pub fn rho(&self, h: usize) -> Option<&OmegaMatrix> {
        self.rho.get(&h)
    }

    /// `a_h` applied entrywise.
    pub fn act(&self, h: usize, x: &OmegaMatrix) -> Result<OmegaMatrix, BundleError> {
        let word = self.words.get(&h).ok_or(BundleError::Packet {
            class_rep: self.class_rep,
            reason: format!("{h} is not in the centralizer"),
        })?;
        self.act_word(word, x)
    }

    pub fn act_form(&self, h: usize, x: &Form) -> Result<Form, BundleError> {
        let word = self.words.get(&h).ok_or(BundleError::Packet {
            class_rep: self.class_rep,
            reason: format!("{h} is not in the centralizer"),
        })?;
        self.act_word_form(word, x)
    }

    /// `F = δM + M²`.
    pub fn curvature(&self) -> OmegaMatrix {
        curvature_of(&self.m)
    }

    /// Same packet with a different superconnection, re-validated.
    pub fn with_m(&self, m: OmegaMatrix) -> Result<Self, BundleError> {
        if m.rows() != self.grading.as_slice() || m.cols() != self.grading.as_slice() {
            return Err(BundleError::Packet {
                class_rep: self.class_rep,
                reason: "superconnection matrix does not match the module grading".into(),
            });
        }
        m.require_parity(Parity::Odd, self.tolerance)?;
        let out = Self { m, ..self.clone() };
        for h in out.centralizer() {
            let dev = out.equivariance_defect(h)?;
            if dev > self.tolerance {
                return Err(BundleError::NotEquivariant {
                    g: h,
                    x: self.class_rep,
                    deviation: dev,
                });
            }
        }
        Ok(out)
    }

    /// Block sum of two packets over the same model.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, BundleError> {
        if self.class_rep != other.class_rep || !Arc::ptr_eq(&self.algebra, &other.algebra) {
            return Err(BundleError::BaseMismatch);
        }
        let mut rho = BTreeMap::new();
        for (h, r) in &self.rho {
            let r2 = other.rho.get(h).ok_or(BundleError::BaseMismatch)?;
            rho.insert(*h, r.direct_sum(r2)?);
        }
        Ok(Self {
            class_rep: self.class_rep,
            algebra: self.algebra.clone(),
            grading: [self.grading.clone(), other.grading.clone()].concat(),
            m: self.m.direct_sum(&other.m)?,
            rho,
            words: self.words.clone(),
            generators: self.generators.clone(),
            tolerance: self.tolerance.max(other.tolerance),
        })
    }

    /// `sTr(exp(−tF) R_h)` for `h` in the centralizer.
    pub fn heat_supertrace(&self, h: usize, t: f64) -> Result<Form, BundleError> {
        let r = self.rho(h).ok_or(BundleError::Packet {
            class_rep: self.class_rep,
            reason: format!("{h} is not in the centralizer"),
        })?;
        let heat = self.curvature().scale(&C64::new(-t, 0.0)).exp_even()?;
        Ok((&heat * r).supertrace()?)
    }
}

/// `δM + M²`.
pub fn curvature_of(m: &OmegaMatrix) -> OmegaMatrix {
    &m.delta() + &(m * m)
}

/// Fixed-point packets for a collection of conjugacy classes, sharing one
/// cocycle. Classes without a packet are allowed; operations that need
/// them report the gap.
#[derive(Clone, Debug)]
pub struct GradedBundle {
    cocycle: TwoCocycle,
    packets: BTreeMap<usize, Packet>,
}

impl GradedBundle {
    /// Packets must be indexed by the least element of their class.
    pub fn new(cocycle: TwoCocycle, packets: Vec<Packet>) -> Result<Self, BundleError> {
        if !cocycle.is_normalized() {
            return Err(BundleError::NotNormalized);
        }
        let group = cocycle.group().clone();
        let mut map = BTreeMap::new();
        for p in packets {
            let g = p.class_rep();
            if group.class_representative(g) != g {
                return Err(BundleError::Packet {
                    class_rep: g,
                    reason: format!(
                        "packets are keyed by the least class element; use {}",
                        group.class_representative(g)
                    ),
                });
            }
            if map.insert(g, p).is_some() {
                return Err(BundleError::Packet {
                    class_rep: g,
                    reason: "duplicate packet".into(),
                });
            }
        }
        Ok(Self { cocycle, packets: map })
    }

    pub fn cocycle(&self) -> &TwoCocycle {
        &self.cocycle
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.cocycle.group()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.packets.values()
    }

    pub fn packet(&self, class_rep: usize) -> Option<&Packet> {
        self.packets.get(&class_rep)
    }

    pub fn require_packet(&self, class_rep: usize) -> Result<&Packet, BundleError> {
        self.packet(class_rep).ok_or(BundleError::MissingPacket { class_rep })
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, BundleError> {
        if self.cocycle != other.cocycle {
            return Err(BundleError::CocycleMismatch);
        }
        if self.packets.keys().ne(other.packets.keys()) {
            return Err(BundleError::BaseMismatch);
        }
        let packets = self
            .packets
            .values()
            .zip(other.packets.values())
            .map(|(a, b)| a.direct_sum(b))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.cocycle.clone(), packets)
    }

    /// Same bundle with new superconnections, keyed by class representative.
    pub fn with_connections(&self, ms: &BTreeMap<usize, OmegaMatrix>) -> Result<Self, BundleError> {
        let packets = self
            .packets
            .iter()
            .map(|(g, p)| match ms.get(g) {
                Some(m) => p.with_m(m.clone()),
                None => Ok(p.clone()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.cocycle.clone(), packets)
    }
}
