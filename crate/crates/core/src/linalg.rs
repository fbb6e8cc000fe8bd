//! Dense complex linear-algebra helpers shared by the metric and oracle code.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative threshold below which eigenvalues of a PSD matrix count as zero.
pub const PSD_RANK_TOL: f64 = 1e-12;

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `(m + mᴴ) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn cholesky(m: &CMatrix, what: &str) -> Result<Cholesky<Complex64, Dyn>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let not_pd = || Error::NotPositiveDefinite {
        what: what.to_string(),
    };
    let h = hermitian_part(m);
    let floor = 16.0 * f64::EPSILON * h.diagonal().iter().fold(0.0f64, |a, d| a.max(d.re.abs()));
    let chol = h.cholesky().ok_or_else(not_pd)?;
    // A negative pivot comes back as an imaginary square root.
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re.is_finite() && d.re * d.re > floor && d.im.abs() <= 1e-8 * d.re);
    if ok {
        Ok(chol)
    } else {
        Err(not_pd())
    }
}

/// `log₂ det(m)` of a Hermitian positive-definite matrix via Cholesky.
pub fn logdet2_hpd(m: &CMatrix, what: &str) -> Result<f64> {
    let chol = cholesky(m, what)?;
    Ok(logdet2_from_cholesky(&chol))
}

pub fn logdet2_from_cholesky(chol: &Cholesky<Complex64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.log2()).sum::<f64>()
}

/// Factor `F` with `m ≈ F Fᴴ` for a Hermitian PSD (possibly singular) matrix.
///
/// Columns belong to eigenvalues above `PSD_RANK_TOL · λ_max`; the rest are
/// dropped, so `F` has as many columns as the numerical rank.
pub fn psd_factor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return CMatrix::zeros(n, 0);
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > PSD_RANK_TOL * max)
        .collect();
    let mut f = CMatrix::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        f.set_column(col, &eig.eigenvectors.column(i).scale(s));
    }
    f
}

/// `a ⊗ I_m`.
pub fn kron_identity(a: &CMatrix, m: usize) -> CMatrix {
    let (r, c) = a.shape();
    let mut out = CMatrix::zeros(r * m, c * m);
    for i in 0..r {
        for j in 0..c {
            let v = a[(i, j)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..m {
                out[(i * m + k, j * m + k)] = v;
            }
        }
    }
    out
}

/// `log₂ det(I + scale · Fᴴ G F)` for Hermitian PSD `G`.
///
/// This is the reduced form of `log₂ det(I + scale · 𝒳 F Fᴴ 𝒳ᴴ)` when
/// `G = 𝒳ᴴ𝒳`; both determinants agree by `det(I + AB) = det(I + BA)`.
pub fn logdet2_identity_plus(f: &CMatrix, g: &CMatrix, scale: f64) -> Result<f64> {
    let r = f.ncols();
    if r == 0 {
        return Ok(0.0);
    }
    let mut inner = f.adjoint() * g * f;
    inner.scale_mut(scale);
    for i in 0..r {
        inner[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let inner = hermitian_part(&inner);
    match inner.clone().cholesky() {
        Some(chol) => Ok(logdet2_from_cholesky(&chol)),
        None => Err(Error::Numerical(format!(
            "Cholesky failed on the {r}x{r} information matrix (condition estimate {:.3e})",
            condition_number(&inner)
        ))),
    }
}

/// Ratio of largest to smallest eigenvalue magnitude of a Hermitian matrix.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let abs: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    let max = abs.iter().cloned().fold(0.0, f64::max);
    let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn logdet_matches_closed_form() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        // det = 4 - 1 = 3
        assert_relative_eq!(logdet2_hpd(&m, "m").unwrap(), 3f64.log2(), epsilon = 1e-14);
    }

    #[test]
    fn non_pd_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            logdet2_hpd(&m, "m"),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn psd_factor_reconstructs_singular_matrix() {
        let v = CMatrix::from_column_slice(3, 1, &[c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 2.0)]);
        let m = &v * v.adjoint();
        let f = psd_factor(&m);
        assert_eq!(f.ncols(), 1);
        let back = &f * f.adjoint();
        assert!((back - m).norm() < 1e-12);
        assert_eq!(psd_factor(&CMatrix::zeros(4, 4)).ncols(), 0);
    }

    #[test]
    fn kron_identity_layout() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let k = kron_identity(&a, 2);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        assert_eq!(k[(0, 3)], c(0.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
    }
}
