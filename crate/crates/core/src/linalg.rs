//! Symmetric eigendecomposition helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100_000;

/// Eigenvalues and orthonormal eigenvectors of the symmetric part of `m`.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let sym = symmetrize(m);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS).ok_or(Error::Eigensolver(n))?;
    Ok((eig.eigenvalues, eig.eigenvectors))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let (vals, _) = sym_eigen(m)?;
    Ok(vals.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let (vals, _) = sym_eigen(m)?;
    Ok(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Applies `f` to the spectrum: `V f(Λ) Vᵀ`.
pub fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen(m)?;
    let mapped = DVector::from_iterator(vals.len(), vals.iter().map(|&v| f(v)));
    let scaled = &vecs * DMatrix::from_diagonal(&mapped);
    Ok(symmetrize(&(scaled * vecs.transpose())))
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues below `n·ε·λ_max` are round-off and count as zero; left in,
/// their square roots would put `√ε`-sized noise on the null space.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen(m)?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    let floor = vals.len() as f64 * f64::EPSILON * top;
    let mapped = vals.map(|v| if v > floor { v.sqrt() } else { 0.0 });
    let scaled = &vecs * DMatrix::from_diagonal(&mapped);
    Ok(symmetrize(&(scaled * vecs.transpose())))
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spectral_map(m, |v| 1.0 / v.sqrt())
}

/// Orthogonal polar factor `Q = U Vᵀ` of a square `p = U S Vᵀ`.
///
/// Built from the eigendecomposition of `pᵀp` rather than an SVD routine:
/// `nalgebra`'s SVD returns inaccurate factors for some nearly rank-deficient
/// 2×2 inputs. Left vectors of null singular values are completed from the
/// standard basis by Gram-Schmidt.
pub fn polar_factor(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = p.nrows();
    let (vals, vecs) = sym_eigen(&(p.transpose() * p))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let top = vals.iter().copied().fold(0.0, f64::max).max(0.0).sqrt();
    let cutoff = 1e-10 * top;

    let mut u: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut v: Vec<DVector<f64>> = Vec::with_capacity(n);
    let orthonormal = |mut w: DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            for b in basis {
                w -= b * b.dot(&w);
            }
        }
        let norm = w.norm();
        (norm, w / norm)
    };
    let mut null = Vec::new();
    for &i in &order {
        let s = vals[i].max(0.0).sqrt();
        let vi = vecs.column(i).into_owned();
        if s > cutoff {
            let (norm, w) = orthonormal(p * &vi, &u);
            if norm > 0.5 * s {
                u.push(w);
                v.push(vi);
                continue;
            }
        }
        null.push(vi);
    }
    for vi in null {
        let (_, w) = (0..n)
            .map(|k| orthonormal(DVector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 }), &u))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or(Error::Eigensolver(n))?;
        u.push(w);
        v.push(vi);
    }
    let mut q = DMatrix::zeros(n, n);
    for (ui, vi) in u.iter().zip(&v) {
        q += ui * vi.transpose();
    }
    Ok(q)
}

/// Block matrix `[a b; c d]`.
pub fn block2(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), a.ncols());
    let mut out = DMatrix::zeros(n + c.nrows(), m + b.ncols());
    out.view_mut((0, 0), (n, m)).copy_from(a);
    out.view_mut((0, m), (n, b.ncols())).copy_from(b);
    out.view_mut((n, 0), (c.nrows(), m)).copy_from(c);
    out.view_mut((n, m), (d.nrows(), d.ncols())).copy_from(d);
    out
}
