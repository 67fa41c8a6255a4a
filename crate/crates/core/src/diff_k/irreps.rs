//! Twisted irreducible representations by numerical decomposition of the
//! twisted regular representation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DiffKError;
use crate::group_cocycle::TwoCocycle;
use crate::linalg::CMat;
use crate::scalar::C64;

/// Twisted-character values on the β-regular class representatives,
/// rounded to a `1e-6` grid so that equal irreps compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Fingerprint(pub Vec<(i64, i64)>);

impl Fingerprint {
    fn from_values(values: &[C64]) -> Self {
        let q = |x: f64| (x * 1e6).round() as i64;
        Fingerprint(values.iter().map(|z| (q(z.re), q(z.im))).collect())
    }
}

/// A unitary twisted irreducible representation.
#[derive(Clone, Debug)]
pub struct TwistedIrrep {
    pub dim: usize,
    /// `rho[g]`, with `rho[g]rho[h] = β(g,h)rho[gh]`.
    pub rho: Vec<CMat>,
    /// `tr rho[g]` for every `g`.
    pub character: Vec<C64>,
    pub fingerprint: Fingerprint,
}

/// All twisted irreducibles of `(G, β)`, sorted by dimension and then by
/// fingerprint.
#[derive(Clone, Debug)]
pub struct IrrepTable {
    cocycle: TwoCocycle,
    regular_classes: Vec<usize>,
    irreps: Vec<TwistedIrrep>,
}

/// `L(g)e_h = β(g,h)e_{gh}`.
pub fn twisted_regular(cocycle: &TwoCocycle) -> Vec<CMat> {
    let group = cocycle.group();
    let n = group.order();
    group
        .elements()
        .map(|g| {
            let mut m = CMat::zeros(n, n);
            for h in group.elements() {
                m[(group.mul(g, h), h)] = cocycle.value(g, h).to_c64();
            }
            m
        })
        .collect()
}

/// `R(k)e_h = β(h,k)e_{hk}`, which commutes with the left action.
fn right_regular(cocycle: &TwoCocycle) -> Vec<CMat> {
    let group = cocycle.group();
    let n = group.order();
    group
        .elements()
        .map(|k| {
            let mut m = CMat::zeros(n, n);
            for h in group.elements() {
                m[(group.mul(h, k), h)] = cocycle.value(h, k).to_c64();
            }
            m
        })
        .collect()
}

/// Splits eigenvalues (sorted ascending) into clusters, reporting the
/// smallest gap between clusters relative to the spread.
fn clusters(values: &[f64], tol: f64) -> (Vec<(usize, usize)>, f64) {
    let mut out = Vec::new();
    let mut start = 0;
    let mut min_gap = f64::INFINITY;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            out.push((start, i));
            if i < values.len() {
                min_gap = min_gap.min(values[i] - values[i - 1]);
            }
            start = i;
        }
    }
    (out, min_gap)
}

impl IrrepTable {
    /// Decomposes the twisted regular representation with a seeded random
    /// Hermitian element of its commutant. Generic elements have one
    /// eigenspace per irreducible summand; a degenerate draw is retried
    /// with new seeds before giving up.
    pub fn new(cocycle: &TwoCocycle) -> Result<Self, DiffKError> {
        if !cocycle.is_normalized() {
            return Err(DiffKError::NotNormalized);
        }
        let group = cocycle.group();
        let n = group.order();
        let regular_classes: Vec<usize> = cocycle.regular_classes().iter().map(|c| c[0]).collect();
        let left = twisted_regular(cocycle);
        let right = right_regular(cocycle);
        const ATTEMPTS: u64 = 8;
        for attempt in 0..ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7715_4b00 + attempt);
            let mut x = CMat::zeros(n, n);
            for r in &right {
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                x += r.map(|z| z * c);
            }
            let herm = &x + x.adjoint();
            let eig = herm.clone().symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
            let (groups, gap) = clusters(&values, 1e-7 * scale);
            if gap < 1e-4 * scale {
                continue;
            }
            let mut irreps: Vec<TwistedIrrep> = Vec::new();
            let mut ok = true;
            for &(a, b) in &groups {
                let cols: Vec<_> = order[a..b].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
                let v = CMat::from_columns(&cols);
                let rho: Vec<CMat> = left.iter().map(|l| v.adjoint() * l * &v).collect();
                // the eigenspace must be invariant
                let leak = left
                    .iter()
                    .zip(&rho)
                    .map(|(l, r)| crate::linalg::max_abs_diff(&(l * &v), &(&v * r)))
                    .fold(0.0, f64::max);
                if leak > 1e-8 {
                    ok = false;
                    break;
                }
                let character: Vec<C64> = rho.iter().map(|r| r.trace()).collect();
                let fp_values: Vec<C64> = regular_classes.iter().map(|&g| character[g]).collect();
                let fingerprint = Fingerprint::from_values(&fp_values);
                if irreps.iter().any(|i| i.fingerprint == fingerprint) {
                    continue;
                }
                irreps.push(TwistedIrrep {
                    dim: b - a,
                    rho,
                    character,
                    fingerprint,
                });
            }
            if !ok {
                continue;
            }
            irreps.sort_by(|a, b| (a.dim, &a.fingerprint).cmp(&(b.dim, &b.fingerprint)));
            let table = Self {
                cocycle: cocycle.clone(),
                regular_classes,
                irreps,
            };
            table.verify()?;
            return Ok(table);
        }
        Err(DiffKError::Degenerate { attempts: ATTEMPTS as usize })
    }

    /// `Σ d_i² = |G|`, Schur orthogonality, irreducibility and one irrep per
    /// β-regular class.
    fn verify(&self) -> Result<(), DiffKError> {
        let n = self.cocycle.group().order();
        let sum: usize = self.irreps.iter().map(|i| i.dim * i.dim).sum();
        if sum != n {
            return Err(DiffKError::Decomposition(format!("Σ dim² = {sum}, |G| = {n}")));
        }
        if self.irreps.len() != self.regular_classes.len() {
            return Err(DiffKError::Decomposition(format!(
                "{} irreducibles but {} β-regular classes",
                self.irreps.len(),
                self.regular_classes.len()
            )));
        }
        for (a, ia) in self.irreps.iter().enumerate() {
            for (b, ib) in self.irreps.iter().enumerate() {
                let ip = inner(&ia.character, &ib.character);
                let want = if a == b { 1.0 } else { 0.0 };
                if (ip - C64::new(want, 0.0)).norm() > 1e-8 {
                    return Err(DiffKError::Decomposition(format!(
                        "character inner product ({a}, {b}) = {ip}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cocycle(&self) -> &TwoCocycle {
        &self.cocycle
    }

    pub fn irreps(&self) -> &[TwistedIrrep] {
        &self.irreps
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn regular_classes(&self) -> &[usize] {
        &self.regular_classes
    }

    /// Multiplicity of each irreducible in a twisted representation with the
    /// same cocycle, given by its character.
    pub fn multiplicities(&self, character: &[C64]) -> Result<Vec<i64>, DiffKError> {
        self.irreps
            .iter()
            .map(|i| {
                let m = inner(&i.character, character);
                let r = m.re.round();
                if (m - C64::new(r, 0.0)).norm() > 1e-6 {
                    Err(DiffKError::NonIntegral(format!("multiplicity {m}")))
                } else {
                    Ok(r as i64)
                }
            })
            .collect()
    }
}

/// `(1/|G|) Σ_g conj(a(g))·b(g)`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    let s: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    s / a.len() as f64
}

/// The number of twisted irreducibles of `(G, β)`, from the decomposition
/// and checked against the count of β-regular classes.
pub fn twisted_irrep_count(cocycle: &TwoCocycle) -> Result<usize, DiffKError> {
    Ok(IrrepTable::new(cocycle)?.len())
}
