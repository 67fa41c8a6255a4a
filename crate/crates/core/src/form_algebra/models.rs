//! Stock algebra models: functions on a finite set, exterior algebras, and
//! truncated polynomial de Rham complexes.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{FormAlgebra, FormError};
use crate::linalg;
use crate::scalar::{ExactComplex, Scalar};

fn int<S: Scalar>(n: i64) -> S {
    S::from_i64(n)
}

/// Functions on `n` points: basis `p0, p1, …` of indicator functions, all in
/// degree 0, with pointwise product and `d = 0`. `n = 0` gives the zero
/// algebra.
pub fn zero_dim_model<S: Scalar>(n_points: usize, tolerance: f64) -> FormAlgebra<S> {
    let n = n_points;
    let mut structure = vec![S::zero(); n * n * n];
    for x in 0..n {
        structure[(x * n + x) * n + x] = S::one();
    }
    FormAlgebra::from_parts(
        (0..n).map(|x| format!("p{x}")).collect(),
        vec![0; n],
        structure,
        vec![S::zero(); n * n],
        tolerance,
    )
    .expect("function algebra is valid")
}

/// Action matrix of a point permutation on [`zero_dim_model`]: `p_x ↦ p_{perm[x]}`.
pub fn point_permutation<S: Scalar>(perm: &[usize]) -> Vec<S> {
    let n = perm.len();
    let mut m = vec![S::zero(); n * n];
    for (x, &y) in perm.iter().enumerate() {
        m[y * n + x] = S::one();
    }
    m
}

fn default_generator_names(k: usize) -> Vec<String> {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    (0..k)
        .map(|i| {
            if k <= LETTERS.len() {
                (LETTERS[i] as char).to_string()
            } else {
                format!("g{i}")
            }
        })
        .collect()
}

/// Exterior algebra on odd generators named `a, b, c, …`, with `d = 0`.
pub fn exterior_model<S: Scalar>(degrees: &[u32], tolerance: f64) -> Result<FormAlgebra<S>, FormError> {
    exterior_model_named(&default_generator_names(degrees.len()), degrees, tolerance)
}

/// Subsets of `0..k` ordered by size, then by bitmask value.
fn exterior_basis(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..1u32 << k).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Sign of `e_S · e_T` for odd generators; `None` when `S ∩ T ≠ ∅`.
fn wedge_sign(s: u32, t: u32) -> Option<i64> {
    if s & t != 0 {
        return None;
    }
    // count pairs (i ∈ S, j ∈ T) with i > j
    let mut inversions = 0;
    let mut rest = t;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (s >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

fn mask_name(names: &[String], m: u32) -> String {
    if m == 0 {
        return "1".into();
    }
    (0..names.len())
        .filter(|i| m >> i & 1 == 1)
        .map(|i| names[i].as_str())
        .collect::<Vec<_>>()
        .join("")
}

pub fn exterior_model_named<S: Scalar>(
    names: &[String],
    degrees: &[u32],
    tolerance: f64,
) -> Result<FormAlgebra<S>, FormError> {
    if names.len() != degrees.len() {
        return Err(FormError::Shape("one name per generator required".into()));
    }
    if let Some((index, &degree)) = degrees.iter().enumerate().find(|(_, d)| *d % 2 == 0) {
        return Err(FormError::EvenGenerator { index, degree });
    }
    let k = degrees.len();
    if k > 10 {
        return Err(FormError::Shape(format!("{k} generators give an algebra too large to model densely")));
    }
    let basis = exterior_basis(k);
    let n = basis.len();
    let index: HashMap<u32, usize> = basis.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut structure = vec![S::zero(); n * n * n];
    for (i, &s) in basis.iter().enumerate() {
        for (j, &t) in basis.iter().enumerate() {
            if let Some(sign) = wedge_sign(s, t) {
                structure[(i * n + j) * n + index[&(s | t)]] = int(sign);
            }
        }
    }
    let deg = |m: u32| (0..k).filter(|i| m >> i & 1 == 1).map(|i| degrees[i]).sum();
    FormAlgebra::from_parts(
        basis.iter().map(|&m| mask_name(names, m)).collect(),
        basis.iter().map(|&m| deg(m)).collect(),
        structure,
        vec![S::zero(); n * n],
        tolerance,
    )
}

/// Action on an exterior model sending generator `i` to `signs[i]` times
/// generator `perm[i]`.
pub fn exterior_signed_permutation<S: Scalar>(perm: &[usize], signs: &[i64]) -> Vec<S> {
    let k = perm.len();
    let basis = exterior_basis(k);
    let n = basis.len();
    let index: HashMap<u32, usize> = basis.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut m = vec![S::zero(); n * n];
    for (j, &mask) in basis.iter().enumerate() {
        let (image, sign) = permute_mask(mask, perm, signs);
        m[index[&image] * n + j] = int(sign);
    }
    m
}

/// Image of the wedge of generators in `mask` (in increasing order) under
/// `i ↦ signs[i]·perm[i]`, as (mask, sign).
fn permute_mask(mask: u32, perm: &[usize], signs: &[i64]) -> (u32, i64) {
    let mut acc_mask = 0u32;
    let mut acc_sign = 1i64;
    for i in 0..perm.len() {
        if mask >> i & 1 == 0 {
            continue;
        }
        let bit = 1u32 << perm[i];
        let s = wedge_sign(acc_mask, bit).expect("permutation is injective");
        acc_sign *= s * signs[i];
        acc_mask |= bit;
    }
    (acc_mask, acc_sign)
}

type Monomial = (Vec<u32>, u32);

/// Polynomial forms `x^a dx_S` in `n` variables modulo the differential
/// ideal generated by polynomials of degree `> order`.
///
/// The quotient is a finite-dimensional commutative dg algebra with
/// nonzero `d`, whose cohomology is that of a point.
#[derive(Clone, Debug)]
pub struct JetModel {
    n_vars: usize,
    order: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    /// Monomial ids forming the quotient basis.
    standard: Vec<usize>,
    /// Normal form of each monomial over `standard`.
    normal: Vec<Vec<BigRational>>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exponents(n: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &out {
            let used: u32 = v.iter().sum();
            for e in 0..=max_total - used {
                let mut w = v.clone();
                w.push(e);
                next.push(w);
            }
        }
        out = next;
    }
    out.retain(|v| v.iter().sum::<u32>() <= max_total);
    out.sort_by_key(|v| (v.iter().sum::<u32>(), std::cmp::Reverse(v.clone())));
    out
}

impl JetModel {
    pub fn new(n_vars: usize, order: u32) -> Self {
        assert!(n_vars <= 4, "jet models support at most 4 variables");
        let mut monomials: Vec<Monomial> = Vec::new();
        let masks = exterior_basis(n_vars);
        for &s in &masks {
            for a in exponents(n_vars, order) {
                monomials.push((a, s));
            }
        }
        monomials.sort_by_key(|(a, s)| (s.count_ones(), a.iter().sum::<u32>(), *s));
        let index: HashMap<Monomial, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let nm = monomials.len();

        // relations d(x^a dx_S) with |a| = order + 1, ordered so that later
        // monomials (higher polynomial degree) are eliminated first
        let mut rows: Vec<Vec<ExactComplex>> = Vec::new();
        for a in exponents(n_vars, order + 1).into_iter().filter(|a| a.iter().sum::<u32>() == order + 1) {
            for &s in &masks {
                let mut row = vec![<ExactComplex as Scalar>::zero(); nm];
                let mut any = false;
                for (m, c) in d_monomial(&a, s) {
                    row[index[&m]] = row[index[&m]].clone() + ExactComplex::new(c, BigRational::zero());
                    any = true;
                }
                if any {
                    rows.push(row.into_iter().rev().collect());
                }
            }
        }
        let (reduced, pivots) = linalg::rref(rows, nm, 0.0);
        // columns were reversed: column c corresponds to monomial nm - 1 - c
        let pivot_monos: Vec<usize> = pivots.iter().map(|&c| nm - 1 - c).collect();
        let standard: Vec<usize> = (0..nm).filter(|i| !pivot_monos.contains(i)).collect();
        let pos: HashMap<usize, usize> = standard.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut normal = vec![vec![BigRational::zero(); standard.len()]; nm];
        for &i in &standard {
            normal[i][pos[&i]] = BigRational::one();
        }
        for (row, &p) in reduced.iter().zip(&pivot_monos) {
            // x_p = −Σ_{c non-pivot} row[c] x_c
            for &i in &standard {
                let c = &row[nm - 1 - i].re;
                if !c.is_zero() {
                    normal[p][pos[&i]] = -c.clone();
                }
            }
        }
        Self {
            n_vars,
            order,
            monomials,
            index,
            standard,
            normal,
        }
    }

    pub fn dim(&self) -> usize {
        self.standard.len()
    }

    fn var_name(&self, i: usize) -> String {
        if self.n_vars <= 4 {
            ["x", "y", "z", "w"][i].to_string()
        } else {
            format!("x{i}")
        }
    }

    fn name(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.var_name(i)),
                _ => parts.push(format!("{}^{e}", self.var_name(i))),
            }
        }
        for i in 0..self.n_vars {
            if m.1 >> i & 1 == 1 {
                parts.push(format!("d{}", self.var_name(i)));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Normal form of a combination of monomials; terms beyond the
    /// truncation order vanish.
    fn reduce(&self, terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.dim()];
        for (m, c) in terms {
            if m.0.iter().sum::<u32>() > self.order {
                continue;
            }
            for (k, v) in self.normal[self.index[&m]].iter().enumerate() {
                if !v.is_zero() {
                    out[k] += &c * v;
                }
            }
        }
        out
    }

    pub fn algebra<S: Scalar>(&self, tolerance: f64) -> Result<FormAlgebra<S>, FormError> {
        let n = self.dim();
        let basis: Vec<&Monomial> = self.standard.iter().map(|&i| &self.monomials[i]).collect();
        let mut structure = vec![S::zero(); n * n * n];
        for (i, mi) in basis.iter().enumerate() {
            for (j, mj) in basis.iter().enumerate() {
                let Some(sign) = wedge_sign(mi.1, mj.1) else { continue };
                let a: Vec<u32> = mi.0.iter().zip(&mj.0).map(|(x, y)| x + y).collect();
                let prod = self.reduce([((a, mi.1 | mj.1), rat(sign))]);
                for (k, c) in prod.iter().enumerate() {
                    structure[(i * n + j) * n + k] = S::from_rational(c);
                }
            }
        }
        let mut differential = vec![S::zero(); n * n];
        for (j, mj) in basis.iter().enumerate() {
            let dj = self.reduce(d_monomial(&mj.0, mj.1));
            for (i, c) in dj.iter().enumerate() {
                differential[i * n + j] = S::from_rational(c);
            }
        }
        FormAlgebra::from_parts(
            basis.iter().map(|m| self.name(m)).collect(),
            basis.iter().map(|m| m.1.count_ones()).collect(),
            structure,
            differential,
            tolerance,
        )
    }

    /// Action induced by `x_i ↦ signs[i] · x_{perm[i]}`.
    pub fn signed_permutation<S: Scalar>(&self, perm: &[usize], signs: &[i64]) -> Vec<S> {
        assert_eq!(perm.len(), self.n_vars);
        let n = self.dim();
        let mut m = vec![S::zero(); n * n];
        for (j, &mono) in self.standard.iter().enumerate() {
            let (a, s) = &self.monomials[mono];
            let mut b = vec![0u32; self.n_vars];
            let mut sign = 1i64;
            for (i, &e) in a.iter().enumerate() {
                b[perm[i]] = e;
                if e % 2 == 1 {
                    sign *= signs[i];
                }
            }
            let (t, wsign) = permute_mask(*s, perm, signs);
            let image = self.reduce([((b, t), rat(sign * wsign))]);
            for (i, c) in image.iter().enumerate() {
                m[i * n + j] = S::from_rational(c);
            }
        }
        m
    }
}

/// `d(x^a dx_S) = Σ_i a_i x^{a − e_i} dx_i dx_S`.
fn d_monomial(a: &[u32], s: u32) -> Vec<(Monomial, BigRational)> {
    let mut out = Vec::new();
    for (i, &e) in a.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let Some(sign) = wedge_sign(1 << i, s) else { continue };
        let mut b = a.to_vec();
        b[i] -= 1;
        out.push(((b, s | 1 << i), rat(sign * e as i64)));
    }
    out
}

/// Truncated polynomial de Rham model in `n_vars` variables; see [`JetModel`].
pub fn jet_model<S: Scalar>(n_vars: usize, order: u32, tolerance: f64) -> Result<FormAlgebra<S>, FormError> {
    JetModel::new(n_vars, order).algebra(tolerance)
}

/// Action on [`jet_model`] induced by a signed permutation of the variables.
pub fn jet_signed_permutation<S: Scalar>(n_vars: usize, order: u32, perm: &[usize], signs: &[i64]) -> Vec<S> {
    JetModel::new(n_vars, order).signed_permutation(perm, signs)
}
