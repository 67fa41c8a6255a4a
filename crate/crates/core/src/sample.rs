//! Seeded random instances for property tests, benchmarks and the
//! acceptance run.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::diff_k::{DiffKError, IrrepTable};
use crate::form_algebra::{Form, FormAlgebra, FormError, OmegaMatrix, Parity};
use crate::group_cocycle::{abelian_coords, FiniteGroup, Phase, TwoCocycle};
use crate::gset::FiniteGSet;
use crate::linalg::{self, CMat};
use crate::scalar::C64;
use crate::twisted_bundle::{BundleError, TwistedBundle};

pub fn random_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_cmat<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_c64(rng))
}

/// `b: G → μ_n` with `b(e) = 1`, for [`TwoCocycle::coboundary_twist`].
pub fn random_coboundary<R: Rng>(group: &FiniteGroup, n: i64, rng: &mut R) -> Vec<Phase> {
    group
        .elements()
        .map(|g| {
            if g == group.identity() {
                Phase::ONE
            } else {
                Phase::new(rng.random_range(0..n), n).expect("n > 0")
            }
        })
        .collect()
}

/// The bimultiplicative cocycle `β(g, h) = exp(2πi Σ_{i,j} e_ij g_i h_j / gcd(n_i, n_j))`
/// on `Z/n₁ × … × Z/n_k`, in the coordinates of [`FiniteGroup::abelian`].
pub fn bicharacter_cocycle(orders: &[usize], exponents: &[Vec<i64>]) -> TwoCocycle {
    let group = Arc::new(FiniteGroup::abelian(orders));
    let k = orders.len();
    TwoCocycle::from_fn(group, |g, h| {
        let (a, b) = (abelian_coords(orders, g), abelian_coords(orders, h));
        let mut phase = Phase::ONE;
        for i in 0..k {
            for j in 0..k {
                let n = num_integer::gcd(orders[i], orders[j]) as i64;
                let e = exponents[i][j] * (a[i] * b[j]) as i64;
                phase = phase * Phase::new(e.rem_euclid(n), n).expect("n > 0");
            }
        }
        phase
    })
    .expect("bicharacters are cocycles")
}

/// A random strictly upper-triangular bicharacter, twisted by a random
/// coboundary with values in `μ₄`.
pub fn random_abelian_cocycle<R: Rng>(orders: &[usize], rng: &mut R) -> TwoCocycle {
    let k = orders.len();
    let exponents: Vec<Vec<i64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i < j { rng.random_range(0..num_integer::gcd(orders[i], orders[j]) as i64) } else { 0 })
                .collect()
        })
        .collect();
    let beta = bicharacter_cocycle(orders, &exponents);
    let b = random_coboundary(beta.group(), 4, rng);
    beta.coboundary_twist(&b).expect("normalized coboundary")
}

/// Block sum of irreducibles with the given multiplicities.
pub fn sum_of_irreps(table: &IrrepTable, mult: &[usize]) -> (usize, Vec<CMat>) {
    let order = table.cocycle().group().order();
    let mut dim = 0;
    let mut rho = vec![CMat::zeros(0, 0); order];
    for (irrep, &m) in table.irreps().iter().zip(mult) {
        for _ in 0..m {
            dim += irrep.dim;
            rho = rho.iter().zip(&irrep.rho).map(|(a, b)| linalg::block_diag(&[a, b])).collect();
        }
    }
    (dim, rho)
}

/// Random multiplicities `(even, odd)` over `table` whose dimension times
/// `copies` stays within `budget`.
fn random_multiplicities<R: Rng>(table: &IrrepTable, copies: usize, budget: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>, usize) {
    let mut even = vec![0; table.len()];
    let mut odd = vec![0; table.len()];
    let mut used = 0;
    for _ in 0..2 * table.len() + 2 {
        let i = rng.random_range(0..table.len());
        let cost = table.irreps()[i].dim * copies;
        if used + cost > budget || rng.random_bool(0.3) {
            continue;
        }
        used += cost;
        if rng.random_bool(0.5) {
            even[i] += 1;
        } else {
            odd[i] += 1;
        }
    }
    (even, odd, used)
}

/// Equivariant projection of per-point odd matrices:
/// `Ā_y = (1/|G|) Σ_g ρ_{g⁻¹y}(g) A_{g⁻¹y} ρ_{g⁻¹y}(g)⁻¹`.
pub fn reynolds_a0(e: &TwistedBundle, a: &[CMat]) -> Vec<CMat> {
    let base = e.base();
    let group = base.group();
    let n = group.order() as f64;
    (0..base.n_points())
        .map(|y| {
            let d = e.fiber_dim(y);
            let mut acc = CMat::zeros(d, d);
            for g in group.elements() {
                let x = base.act(group.inv(g), y);
                let r = e.rho(g, x);
                let r_inv = r.clone().try_inverse().expect("ρ is invertible");
                acc += r * &a[x] * r_inv;
            }
            acc / C64::new(n, 0.0)
        })
        .collect()
}

fn random_odd_block<R: Rng>(dims: (usize, usize), rng: &mut R) -> CMat {
    let (p, q) = dims;
    CMat::from_fn(p + q, p + q, |i, j| if (i < p) != (j < p) { random_c64(rng) } else { C64::new(0.0, 0.0) })
}

/// A random equivariant `A₀` for the representation of `e`.
pub fn random_equivariant_a0<R: Rng>(e: &TwistedBundle, rng: &mut R) -> Vec<CMat> {
    let raw: Vec<CMat> = e.fibers().iter().map(|&d| random_odd_block(d, rng)).collect();
    reynolds_a0(e, &raw)
}

/// A random bundle induced orbitwise from sums of stabilizer irreducibles,
/// with total fiber dimension at most `max_total_dim` and a random
/// equivariant `A₀`.
pub fn random_exact_bundle<R: Rng>(
    base: &FiniteGSet,
    cocycle: &TwoCocycle,
    max_total_dim: usize,
    rng: &mut R,
) -> Result<TwistedBundle, DiffKError> {
    let mut e = TwistedBundle::zero(base.clone(), cocycle.clone());
    let mut budget = max_total_dim;
    for orbit in base.orbits() {
        let x0 = orbit[0];
        let stab = base.stabilizer_subgroup(x0);
        let table = IrrepTable::new(&cocycle.restrict(&stab))?;
        let (even, odd, used) = random_multiplicities(&table, orbit.len(), budget, rng);
        budget -= used;
        let (p, re) = sum_of_irreps(&table, &even);
        let (q, ro) = sum_of_irreps(&table, &odd);
        let sigma: Vec<CMat> = re.iter().zip(&ro).map(|(a, b)| linalg::block_diag(&[a, b])).collect();
        let part = TwistedBundle::induced(
            base.clone(),
            cocycle.clone(),
            x0,
            (p, q),
            &sigma,
            &CMat::zeros(p + q, p + q),
            1e-9,
        )?;
        e = e.direct_sum(&part)?;
    }
    let a0 = random_equivariant_a0(&e, rng);
    Ok(e.with_a0(a0, 1e-8)?)
}

/// `P_x = 1 + ½·X` block-diagonal in parity, redrawn until well conditioned.
pub fn random_even_invertible<R: Rng>(dims: (usize, usize), rng: &mut R) -> CMat {
    let (p, q) = dims;
    loop {
        let m = CMat::identity(p + q, p + q)
            + CMat::from_fn(p + q, p + q, |i, j| {
                if (i < p) == (j < p) {
                    random_c64(rng) * 0.5
                } else {
                    C64::new(0.0, 0.0)
                }
            });
        if linalg::min_singular_value(&m) > 0.1 {
            return m;
        }
    }
}

/// An isomorphic copy `E'` of `e` in a random frame, with the isomorphism
/// `φ_x = P_x: E_x → E'_x`.
pub fn random_basis_change<R: Rng>(e: &TwistedBundle, rng: &mut R) -> Result<(TwistedBundle, Vec<CMat>), BundleError> {
    let base = e.base();
    let n = base.n_points();
    let p: Vec<CMat> = e.fibers().iter().map(|&d| random_even_invertible(d, rng)).collect();
    let p_inv: Vec<CMat> = p.iter().map(|m| m.clone().try_inverse().expect("conditioned")).collect();
    let mut rho = Vec::with_capacity(base.group().order() * n);
    for g in base.group().elements() {
        for x in 0..n {
            rho.push(&p[base.act(g, x)] * e.rho(g, x) * &p_inv[x]);
        }
    }
    let a0 = (0..n).map(|x| &p[x] * e.a0(x) * &p_inv[x]).collect();
    let out = TwistedBundle::new(base.clone(), e.cocycle().clone(), e.fibers().to_vec(), rho, a0, 1e-8)?;
    Ok((out, p))
}

/// A random odd matrix of forms with the given grading.
pub fn random_odd_omega<R: Rng>(algebra: &Arc<FormAlgebra>, grading: &[Parity], rng: &mut R) -> OmegaMatrix {
    let dim = algebra.dim();
    let m = OmegaMatrix::from_fn(algebra, grading.to_vec(), grading.to_vec(), |_, _| {
        Form::new(algebra, (0..dim).map(|_| random_c64(rng)).collect()).expect("dimension matches")
    });
    m.part(Parity::Odd)
}

/// `(1/|C|) Σ_h R_h a_h(M) R_h⁻¹` over the constant generators `rho` of a
/// full centralizer. Elements without an installed action act trivially.
pub fn reynolds_connection(m: &OmegaMatrix, rho: &BTreeMap<usize, OmegaMatrix>) -> Result<OmegaMatrix, FormError> {
    let algebra = m.algebra().clone();
    let mut acc = OmegaMatrix::zeros(&algebra, m.rows().to_vec(), m.cols().to_vec());
    for (&h, r) in rho {
        let moved = if algebra.has_action(h) { m.act(h)? } else { m.clone() };
        acc = acc.checked_add(&r.checked_mul(&moved)?.checked_mul(&r.inverse()?)?)?;
    }
    Ok(acc.scale(&C64::new(1.0 / rho.len() as f64, 0.0)))
}
