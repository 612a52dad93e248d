//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are small (at most 64x64), so everything is dense and built on
//! `nalgebra`. DFT matrices follow the convention `[F]_{k,l} = exp(-j 2 pi k l / N)`
//! with the inverse `F^{-1} = F^H / N`.

use nalgebra::storage::RawStorage;
use nalgebra::{DMatrix, DVector, Dim, Matrix};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value cutoff used by [`pseudo_inverse`].
pub const PINV_RCOND: f64 = 1e-12;

const SVD_MAX_ITERS: usize = 10_000;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `exp(j * phase)`.
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// N-point DFT matrix.
pub fn dft_matrix(n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::Dimension("DFT size must be at least 1".into()));
    }
    // reduce k*l modulo n before scaling so the phase stays small and exact
    Ok(CMatrix::from_fn(n, n, |k, l| {
        cis(-2.0 * PI * ((k * l) % n) as f64 / n as f64)
    }))
}

/// N-point inverse DFT matrix, `F^H / N`.
pub fn idft_matrix(n: usize) -> Result<CMatrix> {
    let f = dft_matrix(n)?;
    Ok(f.adjoint().map(|z| z / n as f64))
}

/// Moore-Penrose pseudo-inverse through an SVD with cutoff `sigma_max * 1e-12`.
pub fn pseudo_inverse(m: &CMatrix) -> Result<CMatrix> {
    ensure_finite(m, "pseudo_inverse input")?;
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::SvdNoConvergence)?;
    let u = svd.u.as_ref().ok_or(Error::SvdNoConvergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdNoConvergence)?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = sigma_max * PINV_RCOND;

    let rank = svd.singular_values.len();
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for s in 0..rank {
        let sigma = svd.singular_values[s];
        if sigma <= cutoff || sigma == 0.0 {
            continue;
        }
        // out += v_s * (1/sigma) * u_s^H
        let inv = 1.0 / sigma;
        for i in 0..m.ncols() {
            let vi = v_t[(s, i)].conj() * inv;
            for j in 0..m.nrows() {
                out[(i, j)] += vi * u[(j, s)].conj();
            }
        }
    }
    Ok(out)
}

/// Inverse of a square matrix via LU; rejects singular input.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "inverse of non-square {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{}x{} matrix", m.nrows(), m.ncols())))?;
    ensure_finite(&inv, "inverse").map_err(|_| Error::Singular("inverse not finite".into()))?;
    Ok(inv)
}

/// Solves `a x = b` for square `a`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} system and {}x{} rhs",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}x{} system", a.nrows(), a.ncols())))?;
    ensure_finite(&x, "solve").map_err(|_| Error::Singular("solution not finite".into()))?;
    Ok(x)
}

/// Four blocks of a partitioned matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub m11: CMatrix,
    pub m12: CMatrix,
    pub m21: CMatrix,
    pub m22: CMatrix,
}

impl Blocks {
    /// Reassembles the original matrix.
    pub fn assemble(&self) -> CMatrix {
        let rows = self.m11.nrows() + self.m21.nrows();
        let cols = self.m11.ncols() + self.m12.ncols();
        let (r1, c1) = self.m11.shape();
        let mut out = CMatrix::zeros(rows, cols);
        out.view_mut((0, 0), self.m11.shape()).copy_from(&self.m11);
        out.view_mut((0, c1), self.m12.shape()).copy_from(&self.m12);
        out.view_mut((r1, 0), self.m21.shape()).copy_from(&self.m21);
        out.view_mut((r1, c1), self.m22.shape()).copy_from(&self.m22);
        out
    }
}

/// Splits `m` into `[[M11, M12], [M21, M22]]` with `M11` of shape `row_split x col_split`.
pub fn block_partition(m: &CMatrix, row_split: usize, col_split: usize) -> Result<Blocks> {
    let (rows, cols) = m.shape();
    if row_split == 0 || row_split >= rows || col_split == 0 || col_split >= cols {
        return Err(Error::Dimension(format!(
            "split ({row_split}, {col_split}) out of range for {rows}x{cols} matrix"
        )));
    }
    Ok(Blocks {
        m11: m.view((0, 0), (row_split, col_split)).into_owned(),
        m12: m.view((0, col_split), (row_split, cols - col_split)).into_owned(),
        m21: m.view((row_split, 0), (rows - row_split, col_split)).into_owned(),
        m22: m
            .view((row_split, col_split), (rows - row_split, cols - col_split))
            .into_owned(),
    })
}

/// Stacks `top` over `bottom`.
pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> Result<CMatrix> {
    if top.ncols() != bottom.ncols() {
        return Err(Error::Dimension(format!(
            "vstack column mismatch {} vs {}",
            top.ncols(),
            bottom.ncols()
        )));
    }
    let mut out = CMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    Ok(out)
}

/// Lifts a real 0/1 selection pattern into a complex matrix.
pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(m: &Matrix<Complex64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff<R: Dim, C: Dim, S1, S2>(a: &Matrix<Complex64, R, C, S1>, b: &Matrix<Complex64, R, C, S2>) -> f64
where
    S1: RawStorage<Complex64, R, C>,
    S2: RawStorage<Complex64, R, C>,
{
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Squared Frobenius norm.
pub fn energy<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(m: &Matrix<Complex64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_finite<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(m: &Matrix<Complex64, R, C, S>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(
    m: &Matrix<Complex64, R, C, S>,
    what: &str,
) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} contains NaN or Inf")))
    }
}
