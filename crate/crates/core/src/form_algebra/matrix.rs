use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::{Form, FormAlgebra, FormError, Parity};
use crate::linalg::{self, CMat};
use crate::scalar::{Scalar, C64};

/// A matrix with entries in a [`FormAlgebra`], mapping a free supermodule
/// with basis parities `cols` to one with parities `rows`.
#[derive(Clone)]
pub struct OmegaMatrix<S: Scalar = C64> {
    algebra: Arc<FormAlgebra<S>>,
    rows: Vec<Parity>,
    cols: Vec<Parity>,
    /// Row-major.
    entries: Vec<Form<S>>,
}

impl<S: Scalar> fmt::Debug for OmegaMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OmegaMatrix {:?} x {:?}", self.rows, self.cols)?;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                writeln!(f, "  [{i},{j}] {:?}", self.entry(i, j))?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> OmegaMatrix<S> {
    pub fn new(
        algebra: &Arc<FormAlgebra<S>>,
        rows: Vec<Parity>,
        cols: Vec<Parity>,
        entries: Vec<Form<S>>,
    ) -> Result<Self, FormError> {
        if entries.len() != rows.len() * cols.len() {
            return Err(FormError::Shape(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows.len(),
                cols.len()
            )));
        }
        if entries.iter().any(|e| !Arc::ptr_eq(e.algebra(), algebra)) {
            return Err(FormError::AlgebraMismatch);
        }
        Ok(Self {
            algebra: algebra.clone(),
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        algebra: &Arc<FormAlgebra<S>>,
        rows: Vec<Parity>,
        cols: Vec<Parity>,
        mut f: impl FnMut(usize, usize) -> Form<S>,
    ) -> Self {
        let nc = cols.len();
        let entries = (0..rows.len() * nc).map(|k| f(k / nc, k % nc)).collect();
        Self {
            algebra: algebra.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(algebra: &Arc<FormAlgebra<S>>, rows: Vec<Parity>, cols: Vec<Parity>) -> Self {
        Self::from_fn(algebra, rows, cols, |_, _| Form::zero(algebra))
    }

    pub fn identity(algebra: &Arc<FormAlgebra<S>>, parities: Vec<Parity>) -> Self {
        Self::from_fn(algebra, parities.clone(), parities, |i, j| {
            if i == j {
                Form::one(algebra)
            } else {
                Form::zero(algebra)
            }
        })
    }

    /// Constant entries, row-major.
    pub fn from_scalars(
        algebra: &Arc<FormAlgebra<S>>,
        rows: Vec<Parity>,
        cols: Vec<Parity>,
        values: &[S],
    ) -> Result<Self, FormError> {
        if values.len() != rows.len() * cols.len() {
            return Err(FormError::Shape(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                rows.len(),
                cols.len()
            )));
        }
        let nc = cols.len();
        Ok(Self::from_fn(algebra, rows, cols, |i, j| {
            Form::constant(algebra, values[i * nc + j].clone())
        }))
    }

    pub fn algebra(&self) -> &Arc<FormAlgebra<S>> {
        &self.algebra
    }

    pub fn rows(&self) -> &[Parity] {
        &self.rows
    }

    pub fn cols(&self) -> &[Parity] {
        &self.cols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Form<S> {
        &self.entries[i * self.ncols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Form<S>) {
        let nc = self.ncols();
        self.entries[i * nc + j] = value;
    }

    pub fn entries(&self) -> &[Form<S>] {
        &self.entries
    }

    fn map(&self, f: impl Fn(usize, usize, &Form<S>) -> Form<S>) -> Self {
        let nc = self.ncols();
        Self {
            algebra: self.algebra.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(k, e)| f(k / nc, k % nc, e))
                .collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|_, _, e| e.scale(c))
    }

    /// Entrywise `ω · M_ij`.
    pub fn form_times(&self, omega: &Form<S>) -> Self {
        self.map(|_, _, e| omega.mul(e))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FormError> {
        if !Arc::ptr_eq(&self.algebra, &other.algebra) {
            return Err(FormError::AlgebraMismatch);
        }
        if self.cols != other.rows {
            return Err(FormError::Shape(format!(
                "cannot compose {}x{} with {}x{} (or parities differ)",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let (m, k, n) = (self.nrows(), self.ncols(), other.ncols());
        let mut entries = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = Form::zero(&self.algebra);
                for l in 0..k {
                    let a = self.entry(i, l);
                    let b = other.entry(l, j);
                    if a.is_negligible(0.0) || b.is_negligible(0.0) {
                        continue;
                    }
                    acc = &acc + &a.mul(b);
                }
                entries.push(acc);
            }
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            rows: self.rows.clone(),
            cols: other.cols.clone(),
            entries,
        })
    }

    fn checked_zip(&self, other: &Self, f: impl Fn(&Form<S>, &Form<S>) -> Form<S>) -> Result<Self, FormError> {
        if !Arc::ptr_eq(&self.algebra, &other.algebra) {
            return Err(FormError::AlgebraMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FormError::Shape("operands have different shapes".into()));
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FormError> {
        self.checked_zip(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FormError> {
        self.checked_zip(other, |a, b| a - b)
    }

    /// `sTr M = Σ_i (−1)^{π_i} even(M_ii) + odd(M_ii)`.
    ///
    /// With coefficients on the right, the odd form part of a diagonal entry
    /// carries no sign; this is what makes `d ∘ sTr = sTr ∘ δ` and keeps
    /// the trace super-cyclic.
    pub fn supertrace(&self) -> Result<Form<S>, FormError> {
        if !self.is_square() {
            return Err(FormError::Shape(format!(
                "supertrace of a non-square {}x{} matrix",
                self.nrows(),
                self.ncols()
            )));
        }
        let mut acc = Form::zero(&self.algebra);
        for (i, p) in self.rows.iter().enumerate() {
            let e = self.entry(i, i);
            let even = e.even_part();
            let even = if p.is_odd() { -even } else { even };
            acc = acc + even + e.odd_part();
        }
        Ok(acc)
    }

    /// `(δX)_ij = (−1)^{π_i} d X_ij`, so that `[𝔸, X] = δX + [M, X]`.
    pub fn delta(&self) -> Self {
        self.map(|i, _, e| {
            let de = e.d();
            if self.rows[i].is_odd() {
                -de
            } else {
                de
            }
        })
    }

    /// `εXε`: entries scaled by `(−1)^{π_i + π_j}`.
    pub fn parity_flip(&self) -> Self {
        self.map(|i, j, e| {
            if self.rows[i].add(self.cols[j]).is_odd() {
                -e
            } else {
                e.clone()
            }
        })
    }

    /// Entrywise `a_g`.
    pub fn act(&self, g: usize) -> Result<Self, FormError> {
        let entries = self.entries.iter().map(|e| e.act(g)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            algebra: self.algebra.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries,
        })
    }

    /// Projection onto the component of total parity `p`: entry `(i,j)`
    /// keeps form degrees with `deg + π_i + π_j ≡ p`.
    pub fn part(&self, p: Parity) -> Self {
        self.map(|i, j, e| e.part(p.add(self.rows[i]).add(self.cols[j])))
    }

    pub fn parity_deviation(&self, p: Parity) -> f64 {
        self.part(p.flip()).max_abs()
    }

    pub fn is_even(&self, tol: f64) -> bool {
        self.parity_deviation(Parity::Even) <= tol
    }

    pub fn is_odd(&self, tol: f64) -> bool {
        self.parity_deviation(Parity::Odd) <= tol
    }

    pub fn require_parity(&self, p: Parity, tol: f64) -> Result<(), FormError> {
        let deviation = self.parity_deviation(p);
        if deviation > tol {
            return Err(FormError::WrongParity { expected: p, deviation });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Form::max_abs).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, FormError> {
        if !Arc::ptr_eq(&self.algebra, &other.algebra) {
            return Err(FormError::AlgebraMismatch);
        }
        let (m1, n1) = (self.nrows(), self.ncols());
        let rows = [self.rows.clone(), other.rows.clone()].concat();
        let cols = [self.cols.clone(), other.cols.clone()].concat();
        Ok(Self::from_fn(&self.algebra, rows, cols, |i, j| {
            match (i < m1, j < n1) {
                (true, true) => self.entry(i, j).clone(),
                (false, false) => other.entry(i - m1, j - n1).clone(),
                _ => Form::zero(&self.algebra),
            }
        }))
    }

    /// Submatrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(
            &self.algebra,
            rows.iter().map(|&i| self.rows[i]).collect(),
            cols.iter().map(|&j| self.cols[j]).collect(),
            |i, j| self.entry(rows[i], cols[j]).clone(),
        )
    }
}

impl OmegaMatrix<C64> {
    /// Constant matrix with the given complex entries.
    pub fn from_cmat(algebra: &Arc<FormAlgebra<C64>>, rows: Vec<Parity>, cols: Vec<Parity>, m: &CMat) -> Self {
        Self::from_fn(algebra, rows, cols, |i, j| Form::constant(algebra, m[(i, j)]))
    }

    /// The complex matrix by which this acts on `Ω ⊗ C^n` in the basis
    /// `e_i ⊗ b_l`; block `(i, j)` is left multiplication by `M_ij`.
    pub fn to_regular(&self) -> CMat {
        let n = self.algebra.dim();
        let mut big = CMat::zeros(self.nrows() * n, self.ncols() * n);
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                let e = self.entry(i, j);
                if e.is_negligible(0.0) {
                    continue;
                }
                let l = self.algebra.left_mult_matrix(e.coeffs());
                big.view_mut((i * n, j * n), (n, n)).copy_from(&l);
            }
        }
        big
    }

    /// Reads entries back from a regular-representation matrix by applying
    /// it to `e_j ⊗ 1`.
    pub fn from_regular(algebra: &Arc<FormAlgebra<C64>>, rows: Vec<Parity>, cols: Vec<Parity>, big: &CMat) -> Self {
        let n = algebra.dim();
        let unit = algebra.unit_coeffs().to_vec();
        Self::from_fn(algebra, rows, cols, |i, j| {
            let coeffs = (0..n)
                .map(|l| (0..n).map(|m| big[(i * n + l, j * n + m)] * unit[m]).sum())
                .collect();
            Form::new(algebra, coeffs).expect("dimension matches")
        })
    }

    /// `exp(M)` for an even square matrix.
    pub fn exp_even(&self) -> Result<Self, FormError> {
        if !self.is_square() {
            return Err(FormError::Shape("exponential of a non-square matrix".into()));
        }
        self.require_parity(Parity::Even, self.algebra.tolerance().max(1e-12))?;
        let e = linalg::expm(&self.to_regular())?;
        Ok(Self::from_regular(&self.algebra, self.rows.clone(), self.cols.clone(), &e))
    }

    /// Two-sided inverse of an even square matrix.
    pub fn inverse(&self) -> Result<Self, FormError> {
        if !self.is_square() {
            return Err(FormError::Shape("inverse of a non-square matrix".into()));
        }
        let big = self.to_regular();
        if big.nrows() == 0 {
            return Ok(self.clone());
        }
        let inv = big.try_inverse().ok_or(FormError::Singular)?;
        if !inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(FormError::Singular);
        }
        let out = Self::from_regular(&self.algebra, self.rows.clone(), self.cols.clone(), &inv);
        let check = &out * self;
        let id = Self::identity(&self.algebra, self.rows.clone());
        if check.distance(&id) > 1e-8 * (1.0 + self.max_abs() * out.max_abs()) {
            return Err(FormError::Singular);
        }
        Ok(out)
    }
}

impl<S: Scalar> Mul for &OmegaMatrix<S> {
    type Output = OmegaMatrix<S>;
    fn mul(self, rhs: &OmegaMatrix<S>) -> OmegaMatrix<S> {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<S: Scalar> Add for &OmegaMatrix<S> {
    type Output = OmegaMatrix<S>;
    fn add(self, rhs: &OmegaMatrix<S>) -> OmegaMatrix<S> {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<S: Scalar> Sub for &OmegaMatrix<S> {
    type Output = OmegaMatrix<S>;
    fn sub(self, rhs: &OmegaMatrix<S>) -> OmegaMatrix<S> {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<S: Scalar> Neg for &OmegaMatrix<S> {
    type Output = OmegaMatrix<S>;
    fn neg(self) -> OmegaMatrix<S> {
        self.map(|_, _, e| -e)
    }
}
