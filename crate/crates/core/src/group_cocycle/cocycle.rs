use std::sync::Arc;

use thiserror::Error;

use super::group::{FiniteGroup, GroupError, Subgroup};
use super::phase::Phase;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CocycleError {
    #[error("cocycle table has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("cocycle identity fails at (g, h, k) = ({g}, {h}, {k})")]
    Identity { g: usize, h: usize, k: usize },
    #[error("coboundary function must satisfy b(e) = 1, got {0}")]
    CoboundaryAtIdentity(Phase),
    #[error("coboundary function has {found} values, expected {expected}")]
    CoboundaryShape { expected: usize, found: usize },
    #[error("cocycle is not normalized")]
    NotNormalized,
    #[error("transgressed character of {g} is not a homomorphism at ({h1}, {h2})")]
    NotHomomorphism { g: usize, h1: usize, h2: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A `U(1)`-valued 2-cocycle on a finite group with root-of-unity values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoCocycle {
    group: Arc<FiniteGroup>,
    values: Vec<Phase>,
}

/// Result of [`TwoCocycle::normalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub cocycle: TwoCocycle,
    /// The constant `c = β(e,e)`; the original cocycle is `c · β′`.
    pub coboundary: Phase,
}

impl TwoCocycle {
    /// Checks the cocycle identity on every triple. `values[g * |G| + h] = β(g,h)`.
    pub fn new(group: Arc<FiniteGroup>, values: Vec<Phase>) -> Result<Self, CocycleError> {
        let n = group.order();
        if values.len() != n * n {
            return Err(CocycleError::Shape {
                expected: n * n,
                found: values.len(),
            });
        }
        let c = Self { group, values };
        if let Some((g, h, k)) = c.identity_violation() {
            return Err(CocycleError::Identity { g, h, k });
        }
        Ok(c)
    }

    pub fn from_fn(group: Arc<FiniteGroup>, f: impl Fn(usize, usize) -> Phase) -> Result<Self, CocycleError> {
        let n = group.order();
        let values = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self::new(group, values)
    }

    pub fn trivial(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        Self {
            group,
            values: vec![Phase::ONE; n * n],
        }
    }

    /// The sign cocycle `β((a₁,b₁),(a₂,b₂)) = (−1)^{b₁a₂}` on `Z/2 × Z/2`,
    /// whose twisted representations are the Pauli matrices.
    pub fn pauli() -> Self {
        let group = Arc::new(FiniteGroup::abelian(&[2, 2]));
        Self::from_fn(group, |g, h| {
            let b1 = g % 2;
            let a2 = h / 2;
            if b1 * a2 == 1 {
                Phase::MINUS_ONE
            } else {
                Phase::ONE
            }
        })
        .expect("bimultiplicative sign is a cocycle")
    }

    fn identity_violation(&self) -> Option<(usize, usize, usize)> {
        let gr = &self.group;
        for g in gr.elements() {
            for h in gr.elements() {
                let lhs_gh = self.value(g, h);
                let gh = gr.mul(g, h);
                for k in gr.elements() {
                    let lhs = lhs_gh * self.value(gh, k);
                    let rhs = self.value(h, k) * self.value(g, gr.mul(h, k));
                    if lhs != rhs {
                        return Some((g, h, k));
                    }
                }
            }
        }
        None
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn values(&self) -> &[Phase] {
        &self.values
    }

    /// `β(g, h)`.
    pub fn value(&self, g: usize, h: usize) -> Phase {
        self.values[g * self.group.order() + h]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(Phase::is_one)
    }

    pub fn is_normalized(&self) -> bool {
        let e = self.group.identity();
        self.group
            .elements()
            .all(|g| self.value(g, e).is_one() && self.value(e, g).is_one())
    }

    /// Least common multiple of all value denominators: every phase of `β`
    /// and of derived characters is an `N`-th root of unity for this `N`.
    pub fn phase_order(&self) -> usize {
        self.values
            .iter()
            .fold(1i64, |acc, p| num_integer::lcm(acc, p.denom())) as usize
    }

    /// Divides by the constant `β(e,e)`. The cocycle identity forces
    /// `β(g,e) = β(e,h) = β(e,e)`, so the result is normalized.
    pub fn normalize(&self) -> Normalized {
        let e = self.group.identity();
        let c = self.value(e, e);
        let cocycle = Self {
            group: self.group.clone(),
            values: self.values.iter().map(|&v| v / c).collect(),
        };
        debug_assert!(cocycle.is_normalized());
        Normalized {
            cocycle,
            coboundary: c,
        }
    }

    /// `β · db` with `db(g,h) = b(g) b(h) b(gh)⁻¹`.
    pub fn coboundary_twist(&self, b: &[Phase]) -> Result<Self, CocycleError> {
        let gr = &self.group;
        if b.len() != gr.order() {
            return Err(CocycleError::CoboundaryShape {
                expected: gr.order(),
                found: b.len(),
            });
        }
        let be = b[gr.identity()];
        if !be.is_one() {
            return Err(CocycleError::CoboundaryAtIdentity(be));
        }
        let n = gr.order();
        let values = (0..n * n)
            .map(|i| {
                let (g, h) = (i / n, i % n);
                self.values[i] * b[g] * b[h] / b[gr.mul(g, h)]
            })
            .collect();
        Ok(Self {
            group: self.group.clone(),
            values,
        })
    }

    /// `χ^β_g(h) = β(h,g) / β(g,h)`, for any pair.
    pub fn chi(&self, g: usize, h: usize) -> Phase {
        self.value(h, g) / self.value(g, h)
    }

    /// `χ^β_g` on the centralizer of `g`, as `(h, χ^β_g(h))` pairs, after
    /// checking that it is a homomorphism.
    pub fn transgression_character(&self, g: usize) -> Result<Vec<(usize, Phase)>, CocycleError> {
        if !self.is_normalized() {
            return Err(CocycleError::NotNormalized);
        }
        let cent = self.group.centralizer(g);
        for &h1 in &cent {
            for &h2 in &cent {
                let h12 = self.group.mul(h1, h2);
                if self.chi(g, h12) != self.chi(g, h1) * self.chi(g, h2) {
                    return Err(CocycleError::NotHomomorphism { g, h1, h2 });
                }
            }
        }
        Ok(cent.into_iter().map(|h| (h, self.chi(g, h))).collect())
    }

    /// Whether `χ^β_g` is trivial on the centralizer of `g`.
    pub fn is_regular(&self, g: usize) -> bool {
        self.group
            .centralizer(g)
            .into_iter()
            .all(|h| self.chi(g, h).is_one())
    }

    /// Conjugacy classes consisting of regular elements.
    pub fn regular_classes(&self) -> Vec<Vec<usize>> {
        self.group
            .conjugacy_classes()
            .into_iter()
            .filter(|c| self.is_regular(c[0]))
            .collect()
    }

    /// The cocycle of the line bundle over the inertia groupoid:
    /// `β(hgh⁻¹, h) / β(h, g)`.
    pub fn lbeta(&self, h: usize, g: usize) -> Phase {
        let c = self.group.conj(h, g);
        self.value(c, h) / self.value(h, g)
    }

    /// Restriction to a subgroup, re-indexed along `sub.embedding`.
    pub fn restrict(&self, sub: &Subgroup) -> Self {
        let m = sub.group.order();
        let values = (0..m * m)
            .map(|i| self.value(sub.ambient(i / m), sub.ambient(i % m)))
            .collect();
        Self {
            group: Arc::new(sub.group.clone()),
            values,
        }
    }

    /// Restriction to the subgroup on the given ambient ids.
    pub fn restrict_to(&self, elements: &[usize]) -> Result<(Subgroup, Self), CocycleError> {
        let sub = self.group.subgroup(elements)?;
        let c = self.restrict(&sub);
        Ok((sub, c))
    }
}
