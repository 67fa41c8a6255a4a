use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use super::{FormError, Parity};
use crate::linalg::{self, CMat};
use crate::scalar::{Scalar, C64};

/// A finite-dimensional graded-commutative differential algebra, given by
/// structure constants on a homogeneous basis.
///
/// Group elements may carry algebra automorphisms commuting with `d`; they
/// act on the left (`a_h a_k = a_{hk}`).
#[derive(Clone)]
pub struct FormAlgebra<S: Scalar = C64> {
    names: Vec<String>,
    degrees: Vec<u32>,
    unit: Vec<S>,
    /// `products[i * n + j]` lists `(k, c)` with `e_i e_j = Σ c e_k`.
    products: Vec<Vec<(usize, S)>>,
    /// `differential[j]` lists `(i, c)` with `d e_j = Σ c e_i`.
    differential: Vec<Vec<(usize, S)>>,
    actions: BTreeMap<usize, Vec<Vec<(usize, S)>>>,
    tolerance: f64,
}

impl<S: Scalar> fmt::Debug for FormAlgebra<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormAlgebra")
            .field("basis", &self.names)
            .field("degrees", &self.degrees)
            .field("actions", &self.actions.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn sparse_columns<S: Scalar>(dense: &[S], n_out: usize, n_in: usize, tol: f64) -> Vec<Vec<(usize, S)>> {
    (0..n_in)
        .map(|j| {
            (0..n_out)
                .filter(|&i| !dense[i * n_in + j].is_negligible(tol))
                .map(|i| (i, dense[i * n_in + j].clone()))
                .collect()
        })
        .collect()
}

impl<S: Scalar> FormAlgebra<S> {
    /// Builds and validates an algebra.
    ///
    /// `structure[(i * n + j) * n + k]` is the coefficient of `e_k` in
    /// `e_i e_j`; `differential[i * n + j]` is the coefficient of `e_i` in
    /// `d e_j`. The unit is found by solving `u · e_j = e_j`.
    pub fn from_parts(
        names: Vec<String>,
        degrees: Vec<u32>,
        structure: Vec<S>,
        differential: Vec<S>,
        tolerance: f64,
    ) -> Result<Self, FormError> {
        let n = degrees.len();
        if names.len() != n {
            return Err(FormError::Shape(format!("{} names for {} basis elements", names.len(), n)));
        }
        if structure.len() != n * n * n {
            return Err(FormError::Shape(format!(
                "structure constants have {} entries, expected {}",
                structure.len(),
                n * n * n
            )));
        }
        if differential.len() != n * n {
            return Err(FormError::Shape(format!(
                "differential has {} entries, expected {}",
                differential.len(),
                n * n
            )));
        }
        let products = (0..n * n)
            .map(|ij| {
                (0..n)
                    .filter(|&k| !structure[ij * n + k].is_negligible(tolerance))
                    .map(|k| (k, structure[ij * n + k].clone()))
                    .collect()
            })
            .collect();
        let differential = sparse_columns(&differential, n, n, tolerance);
        let mut alg = Self {
            names,
            degrees,
            unit: Vec::new(),
            products,
            differential,
            actions: BTreeMap::new(),
            tolerance,
        };
        alg.unit = alg.find_unit()?;
        alg.validate()?;
        Ok(alg)
    }

    fn find_unit(&self) -> Result<Vec<S>, FormError> {
        let n = self.dim();
        if n == 0 {
            return Ok(Vec::new());
        }
        // unknowns u_i; equations: Σ_i u_i (e_i e_j)_k = δ_jk and same on the right
        let mut columns = vec![Vec::with_capacity(2 * n * n); n];
        let mut rhs = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for k in 0..n {
                for (i, col) in columns.iter_mut().enumerate() {
                    col.push(self.structure_coeff(i, j, k));
                }
                rhs.push(if j == k { S::one() } else { S::zero() });
            }
        }
        for j in 0..n {
            for k in 0..n {
                for (i, col) in columns.iter_mut().enumerate() {
                    col.push(self.structure_coeff(j, i, k));
                }
                rhs.push(if j == k { S::one() } else { S::zero() });
            }
        }
        let u = linalg::solve_columns(&columns, &rhs, self.tolerance).ok_or(FormError::NoUnit)?;
        // the linear solve only returns a candidate; confirm it
        let unit = u.clone();
        for j in 0..n {
            let e = self.basis_vector(j);
            if !approx_eq(&self.mul_coeffs(&unit, &e), &e, self.tolerance)
                || !approx_eq(&self.mul_coeffs(&e, &unit), &e, self.tolerance)
            {
                return Err(FormError::NoUnit);
            }
        }
        Ok(u)
    }

    fn validate(&self) -> Result<(), FormError> {
        let n = self.dim();
        let tol = self.tolerance;
        for i in 0..n {
            for j in 0..n {
                for (k, _) in &self.products[i * n + j] {
                    if self.degrees[*k] != self.degrees[i] + self.degrees[j] {
                        return Err(FormError::NotGraded(format!(
                            "{} · {} has a component on {}",
                            self.names[i], self.names[j], self.names[*k]
                        )));
                    }
                }
            }
            for (k, _) in &self.differential[i] {
                if self.degrees[*k] != self.degrees[i] + 1 {
                    return Err(FormError::NotGraded(format!(
                        "d {} has a component on {}",
                        self.names[i], self.names[*k]
                    )));
                }
            }
        }
        for (k, u) in self.unit.iter().enumerate() {
            if !u.is_negligible(tol) && self.degrees[k] != 0 {
                return Err(FormError::NotGraded("unit has positive-degree components".into()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.basis_vector(i), self.basis_vector(j));
                let ab = self.mul_coeffs(&a, &b);
                let mut ba = self.mul_coeffs(&b, &a);
                if (self.degrees[i] * self.degrees[j]) % 2 == 1 {
                    ba = ba.into_iter().map(|x| -x).collect();
                }
                if !approx_eq(&ab, &ba, tol) {
                    return Err(FormError::NotCommutative {
                        a: self.names[i].clone(),
                        b: self.names[j].clone(),
                    });
                }
                // d(ab) = da·b + (−1)^{|a|} a·db
                let lhs = self.d_coeffs(&ab);
                let t1 = self.mul_coeffs(&self.d_coeffs(&a), &b);
                let mut t2 = self.mul_coeffs(&a, &self.d_coeffs(&b));
                if self.degrees[i] % 2 == 1 {
                    t2 = t2.into_iter().map(|x| -x).collect();
                }
                let rhs: Vec<S> = t1.into_iter().zip(t2).map(|(x, y)| x + y).collect();
                if !approx_eq(&lhs, &rhs, tol) {
                    return Err(FormError::Leibniz {
                        a: self.names[i].clone(),
                        b: self.names[j].clone(),
                    });
                }
                for k in 0..n {
                    let c = self.basis_vector(k);
                    let l = self.mul_coeffs(&ab, &c);
                    let r = self.mul_coeffs(&a, &self.mul_coeffs(&b, &c));
                    if !approx_eq(&l, &r, tol) {
                        return Err(FormError::NotAssociative {
                            a: self.names[i].clone(),
                            b: self.names[j].clone(),
                            c: self.names[k].clone(),
                        });
                    }
                }
            }
            let dd = self.d_coeffs(&self.d_coeffs(&self.basis_vector(i)));
            if !dd.iter().all(|x| x.is_negligible(tol)) {
                return Err(FormError::DSquared(self.names[i].clone()));
            }
        }
        Ok(())
    }

    /// Installs the automorphism `a_g`, given as an `n × n` matrix in the
    /// same layout as the differential, after validating it.
    pub fn with_action(mut self, g: usize, matrix: Vec<S>) -> Result<Self, FormError> {
        let n = self.dim();
        if matrix.len() != n * n {
            return Err(FormError::Shape(format!(
                "action of {g} has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        let cols = sparse_columns(&matrix, n, n, self.tolerance);
        self.check_action(g, &cols)?;
        self.actions.insert(g, cols);
        Ok(self)
    }

    fn check_action(&self, g: usize, cols: &[Vec<(usize, S)>]) -> Result<(), FormError> {
        let n = self.dim();
        let tol = self.tolerance;
        let apply = |v: &[S]| apply_sparse(cols, v, n);
        let bad = |what: &str| FormError::BadAction { g, reason: what.to_string() };
        for (j, col) in cols.iter().enumerate() {
            if col.iter().any(|(i, _)| self.degrees[*i] != self.degrees[j]) {
                return Err(bad(&format!("does not preserve the degree of {}", self.names[j])));
            }
        }
        if !approx_eq(&apply(&self.unit), &self.unit, tol) {
            return Err(bad("does not fix the unit"));
        }
        for i in 0..n {
            let a = self.basis_vector(i);
            let lhs = apply(&self.d_coeffs(&a));
            let rhs = self.d_coeffs(&apply(&a));
            if !approx_eq(&lhs, &rhs, tol) {
                return Err(bad(&format!("does not commute with d on {}", self.names[i])));
            }
            for j in 0..n {
                let b = self.basis_vector(j);
                let lhs = apply(&self.mul_coeffs(&a, &b));
                let rhs = self.mul_coeffs(&apply(&a), &apply(&b));
                if !approx_eq(&lhs, &rhs, tol) {
                    return Err(bad(&format!(
                        "is not multiplicative on ({}, {})",
                        self.names[i], self.names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_zero_algebra(&self) -> bool {
        self.dim() == 0
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn top_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn has_action(&self, g: usize) -> bool {
        self.actions.contains_key(&g)
    }

    pub fn action_elements(&self) -> Vec<usize> {
        self.actions.keys().copied().collect()
    }

    /// Coefficient of `e_k` in `e_i e_j`.
    pub fn structure_coeff(&self, i: usize, j: usize, k: usize) -> S {
        self.products[i * self.dim() + j]
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(S::zero)
    }

    /// Dense structure constants in the [`from_parts`](Self::from_parts) layout.
    pub fn structure_dense(&self) -> Vec<S> {
        let n = self.dim();
        let mut out = vec![S::zero(); n * n * n];
        for (ij, list) in self.products.iter().enumerate() {
            for (k, c) in list {
                out[ij * n + k] = c.clone();
            }
        }
        out
    }

    /// Dense differential in the [`from_parts`](Self::from_parts) layout.
    pub fn differential_dense(&self) -> Vec<S> {
        let n = self.dim();
        let mut out = vec![S::zero(); n * n];
        for (j, col) in self.differential.iter().enumerate() {
            for (i, c) in col {
                out[i * n + j] = c.clone();
            }
        }
        out
    }

    pub fn action_dense(&self, g: usize) -> Option<Vec<S>> {
        let n = self.dim();
        self.actions.get(&g).map(|cols| {
            let mut out = vec![S::zero(); n * n];
            for (j, col) in cols.iter().enumerate() {
                for (i, c) in col {
                    out[i * n + j] = c.clone();
                }
            }
            out
        })
    }

    fn basis_vector(&self, i: usize) -> Vec<S> {
        let mut v = vec![S::zero(); self.dim()];
        v[i] = S::one();
        v
    }

    fn mul_coeffs(&self, a: &[S], b: &[S]) -> Vec<S> {
        let n = self.dim();
        let mut out = vec![S::zero(); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_negligible(0.0) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_negligible(0.0) {
                    continue;
                }
                let xy = x.clone() * y.clone();
                for (k, c) in &self.products[i * n + j] {
                    out[*k] = out[*k].clone() + xy.clone() * c.clone();
                }
            }
        }
        out
    }

    fn d_coeffs(&self, a: &[S]) -> Vec<S> {
        apply_sparse(&self.differential, a, self.dim())
    }

    pub fn unit_coeffs(&self) -> &[S] {
        &self.unit
    }
}

impl FormAlgebra<C64> {
    /// Matrix of left multiplication by `a` on the basis.
    pub fn left_mult_matrix(&self, a: &[C64]) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (i, x) in a.iter().enumerate() {
            if *x == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                for (k, c) in &self.products[i * n + j] {
                    m[(*k, j)] += x * c;
                }
            }
        }
        m
    }

    /// Matrix of `d`.
    pub fn d_matrix(&self) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (j, col) in self.differential.iter().enumerate() {
            for (i, c) in col {
                m[(*i, j)] = *c;
            }
        }
        m
    }
}

fn apply_sparse<S: Scalar>(cols: &[Vec<(usize, S)>], v: &[S], n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n];
    for (j, x) in v.iter().enumerate() {
        if x.is_negligible(0.0) {
            continue;
        }
        for (i, c) in &cols[j] {
            out[*i] = out[*i].clone() + x.clone() * c.clone();
        }
    }
    out
}

fn approx_eq<S: Scalar>(a: &[S], b: &[S], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x.clone() - y.clone()).is_negligible(tol))
}

/// An element of a [`FormAlgebra`].
#[derive(Clone)]
pub struct Form<S: Scalar = C64> {
    algebra: Arc<FormAlgebra<S>>,
    coeffs: Vec<S>,
}

impl<S: Scalar> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "Form(")?;
        for (name, c) in self.algebra.names.iter().zip(&self.coeffs) {
            if c.is_negligible(0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})·{}", c, name)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl<S: Scalar> PartialEq for Form<S> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> Form<S> {
    pub fn new(algebra: &Arc<FormAlgebra<S>>, coeffs: Vec<S>) -> Result<Self, FormError> {
        if coeffs.len() != algebra.dim() {
            return Err(FormError::Shape(format!(
                "form has {} coefficients, algebra has dimension {}",
                coeffs.len(),
                algebra.dim()
            )));
        }
        Ok(Self {
            algebra: algebra.clone(),
            coeffs,
        })
    }

    pub fn zero(algebra: &Arc<FormAlgebra<S>>) -> Self {
        Self {
            algebra: algebra.clone(),
            coeffs: vec![S::zero(); algebra.dim()],
        }
    }

    pub fn one(algebra: &Arc<FormAlgebra<S>>) -> Self {
        Self {
            algebra: algebra.clone(),
            coeffs: algebra.unit.clone(),
        }
    }

    pub fn constant(algebra: &Arc<FormAlgebra<S>>, c: S) -> Self {
        Self::one(algebra).scale(&c)
    }

    pub fn basis(algebra: &Arc<FormAlgebra<S>>, i: usize) -> Self {
        Self {
            algebra: algebra.clone(),
            coeffs: algebra.basis_vector(i),
        }
    }

    /// Basis element by name.
    pub fn named(algebra: &Arc<FormAlgebra<S>>, name: &str) -> Option<Self> {
        algebra.basis_index(name).map(|i| Self::basis(algebra, i))
    }

    pub fn algebra(&self) -> &Arc<FormAlgebra<S>> {
        &self.algebra
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &S {
        &self.coeffs[i]
    }

    fn same_algebra(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra),
            "forms over different algebras"
        );
    }

    pub fn scale(&self, c: &S) -> Self {
        Self {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_algebra(other);
        Self {
            algebra: self.algebra.clone(),
            coeffs: self.algebra.mul_coeffs(&self.coeffs, &other.coeffs),
        }
    }

    pub fn d(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            coeffs: self.algebra.d_coeffs(&self.coeffs),
        }
    }

    fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        Self {
            algebra: self.algebra.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&self.algebra.degrees)
                .map(|(c, &deg)| if keep(deg) { c.clone() } else { S::zero() })
                .collect(),
        }
    }

    pub fn even_part(&self) -> Self {
        self.filter(|d| d % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|d| d % 2 == 1)
    }

    pub fn degree_part(&self, degree: u32) -> Self {
        self.filter(|d| d == degree)
    }

    /// Parity-twisted copy: odd components negated.
    pub fn sign_twist(&self) -> Self {
        self.even_part() - self.odd_part()
    }

    pub fn part(&self, parity: Parity) -> Self {
        match parity {
            Parity::Even => self.even_part(),
            Parity::Odd => self.odd_part(),
        }
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(tol))
    }

    /// Whether all components have the given parity.
    pub fn has_parity(&self, parity: Parity, tol: f64) -> bool {
        self.part(parity.flip()).is_negligible(tol)
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        self.d().is_negligible(tol)
    }

    /// A primitive `β` with `dβ = self`, when one exists.
    pub fn exact_primitive(&self, tol: f64) -> Option<Self> {
        let n = self.algebra.dim();
        if n == 0 {
            return Some(self.clone());
        }
        let columns: Vec<Vec<S>> = (0..n)
            .map(|j| self.algebra.d_coeffs(&self.algebra.basis_vector(j)))
            .collect();
        let x = linalg::solve_columns(&columns, &self.coeffs, tol)?;
        let prim = Self {
            algebra: self.algebra.clone(),
            coeffs: x,
        };
        (&prim.d() - self).is_negligible(tol.max(0.0) * 10.0).then_some(prim)
    }

    pub fn is_exact(&self, tol: f64) -> bool {
        self.exact_primitive(tol).is_some()
    }

    /// `a_g(self)`.
    pub fn act(&self, g: usize) -> Result<Self, FormError> {
        let cols = self.algebra.actions.get(&g).ok_or(FormError::MissingAction(g))?;
        Ok(Self {
            algebra: self.algebra.clone(),
            coeffs: apply_sparse(cols, &self.coeffs, self.algebra.dim()),
        })
    }

    pub fn to_c64(&self) -> Vec<C64> {
        self.coeffs.iter().map(Scalar::to_c64).collect()
    }

    /// Largest coefficient distance, computed in double precision.
    pub fn distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.to_c64() - b.to_c64()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.to_c64().norm()).fold(0.0, f64::max)
    }
}

impl Form<C64> {
    /// Projection onto the orthogonal complement of `im d`: a canonical
    /// representative of the class modulo exact forms.
    pub fn modulo_exact(&self) -> Self {
        let n = self.algebra.dim();
        if n == 0 {
            return self.clone();
        }
        let d = self.algebra.d_matrix();
        let tol = self.algebra.tolerance.max(1e-12);
        let svd = d.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let v = nalgebra::DVector::from_column_slice(&self.coeffs);
        let mut proj = v.clone();
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s > tol * smax.max(1.0) {
                let col = u.column(k);
                let c = col.dotc(&v);
                proj -= col * c;
            }
        }
        Self {
            algebra: self.algebra.clone(),
            coeffs: proj.iter().copied().collect(),
        }
    }
}

impl<S: Scalar> Add for &Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: &Form<S>) -> Form<S> {
        self.same_algebra(rhs);
        Form {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: &Form<S>) -> Form<S> {
        self.same_algebra(rhs);
        Form {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Add for Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: Form<S>) -> Form<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Sub for Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: Form<S>) -> Form<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Neg for &Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        Form {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<S: Scalar> Neg for Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        -&self
    }
}
