//! Dense linear algebra kernels shared across the crate.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::{Scalar, C64};

/// Dense complex matrix.
pub type CMat = DMatrix<C64>;

/// Largest 1-norm accepted by [`expm`]; beyond this the result is not
/// representable reliably in double precision.
pub const EXPM_MAX_NORM: f64 = 600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpError {
    #[error("matrix exponential input has 1-norm {norm:.3e} (limit {EXPM_MAX_NORM}); rescale the superconnection")]
    NormTooLarge { norm: f64 },
    #[error("matrix exponential produced non-finite entries")]
    NonFinite,
    #[error("matrix exponential requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, where 18
/// Taylor terms are accurate to well below double-precision round-off.
pub fn expm(a: &CMat) -> Result<CMat, ExpError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(ExpError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = norm1(a);
    if !norm.is_finite() || norm > EXPM_MAX_NORM {
        return Err(ExpError::NormTooLarge { norm });
    }
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale(1.0 / f64::powi(2.0, squarings as i32));
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=18 {
        term = &term * &scaled;
        term.scale_mut(1.0 / k as f64);
        result += &term;
        if max_abs(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ExpError::NonFinite);
    }
    Ok(result)
}

/// Orthonormal basis of the kernel of `a`, as columns. Singular values below
/// `tol * max(1, sigma_max)` count as zero.
pub fn nullspace(a: &CMat, tol: f64) -> CMat {
    let (m, n) = a.shape();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m == 0 {
        return CMat::identity(n, n);
    }
    // Pad to at least n rows so the thin SVD carries a full right basis.
    let padded = if m < n {
        let mut p = CMat::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let cols: Vec<DVector<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cutoff)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        return CMat::zeros(n, 0);
    }
    CMat::from_columns(&cols)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().cloned().unwrap_or(0.0);
    s.iter().filter(|x| **x > tol * smax.max(1.0)).count()
}

/// Smallest singular value of a square matrix (0 for the empty matrix is
/// reported as infinity, since the empty map is invertible).
pub fn min_singular_value(a: &CMat) -> f64 {
    if a.nrows() == 0 && a.ncols() == 0 {
        return f64::INFINITY;
    }
    if a.nrows() != a.ncols() {
        return 0.0;
    }
    singular_values(a).last().cloned().unwrap_or(0.0)
}

/// Block-diagonal matrix from square or rectangular blocks.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Reduced row echelon form over an arbitrary [`Scalar`] with partial
/// pivoting by magnitude. Returns the reduced rows and pivot columns.
pub fn rref<S: Scalar>(mut rows: Vec<Vec<S>>, ncols: usize, tol: f64) -> (Vec<Vec<S>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let best = (r..rows.len())
            .filter(|&i| !rows[i][c].is_negligible(tol))
            .max_by(|&a, &b| {
                rows[a][c]
                    .magnitude()
                    .partial_cmp(&rows[b][c].magnitude())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(p) = best else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_negligible(tol) {
                continue;
            }
            let f = rows[i][c].clone();
            for k in 0..ncols {
                let v = rows[r][k].clone();
                rows[i][k] = rows[i][k].clone() - f.clone() * v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Solves `A x = b` for `A` given as `columns` (each of length `m`).
/// Returns one solution (free variables zero) or `None` if inconsistent.
pub fn solve_columns<S: Scalar>(columns: &[Vec<S>], b: &[S], tol: f64) -> Option<Vec<S>> {
    let n = columns.len();
    let m = b.len();
    let rows: Vec<Vec<S>> = (0..m)
        .map(|i| {
            let mut row: Vec<S> = columns.iter().map(|col| col[i].clone()).collect();
            row.push(b[i].clone());
            row
        })
        .collect();
    let (reduced, pivots) = rref(rows, n + 1, tol);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![S::zero(); n];
    for (row, &p) in reduced.iter().zip(&pivots) {
        x[p] = row[n].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact_int, ExactComplex};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn expm_scalar_and_nilpotent() {
        let a = CMat::from_element(1, 1, c(1.0));
        assert!((expm(&a).unwrap()[(0, 0)] - c(std::f64::consts::E)).norm() < 1e-13);

        let mut n = CMat::zeros(3, 3);
        n[(0, 1)] = c(2.0);
        n[(1, 2)] = c(3.0);
        let e = expm(&n).unwrap();
        // I + N + N^2/2 with N^2 having a single entry 6 at (0,2).
        assert!((e[(0, 2)] - c(3.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - c(2.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - c(1.0)).norm() < 1e-13);
    }

    #[test]
    fn expm_rotation_generator() {
        let t = 2.7_f64;
        let a = CMat::from_row_slice(2, 2, &[c(0.0), c(-t), c(t), c(0.0)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(t.cos())).norm() < 1e-12);
        assert!((e[(1, 0)] - c(t.sin())).norm() < 1e-12);
    }

    #[test]
    fn expm_rejects_huge_norm() {
        let a = CMat::from_element(1, 1, c(1e4));
        assert!(matches!(expm(&a), Err(ExpError::NormTooLarge { .. })));
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = CMat::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let k = nullspace(&a, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&a * &k)) < 1e-12);
    }

    #[test]
    fn exact_solve_detects_inconsistency() {
        let cols: Vec<Vec<ExactComplex>> = vec![vec![exact_int(1, 0), exact_int(2, 0)]];
        let sol = solve_columns(&cols, &[exact_int(3, 0), exact_int(6, 0)], 0.0).unwrap();
        assert_eq!(sol, vec![exact_int(3, 0)]);
        assert!(solve_columns(&cols, &[exact_int(3, 0), exact_int(5, 0)], 0.0).is_none());
    }
}
