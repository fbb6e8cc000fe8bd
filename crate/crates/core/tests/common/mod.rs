//! Full-dimension reference implementations used as test oracles.
//!
//! Nothing here calls into the reduced algebra of the library: the echo
//! model is built with the explicit `X ⊗ I` matrix, conditional covariances
//! come from a plain matrix inverse and determinants from LU.
#![allow(dead_code)]

pub use isac_limits::linalg::CMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `X ⊗ I_m`, entry `(t·m + a, n·m + b) = X[t, n]·δ_ab`.
pub fn kron_eye(x: &CMatrix, m: usize) -> CMatrix {
    let (rows, cols) = x.shape();
    let mut out = CMatrix::zeros(rows * m, cols * m);
    for t in 0..rows {
        for n in 0..cols {
            for a in 0..m {
                out[(t * m + a, n * m + a)] = x[(t, n)];
            }
        }
    }
    out
}

/// `log₂ |det m|` via LU.
pub fn logdet2_lu(m: &CMatrix) -> f64 {
    m.clone().lu().determinant().norm().log2()
}

/// `R_{h|s}` embedded at full dimension, from `R_r − R_rs R_s⁻¹ R_sr`
/// with a plain inverse.
pub fn conditional_embedded(r_h: &CMatrix, s: &[usize]) -> CMatrix {
    let d = r_h.nrows();
    let r: Vec<usize> = (0..d).filter(|i| !s.contains(i)).collect();
    let pick = |rows: &[usize], cols: &[usize]| CMatrix::from_fn(rows.len(), cols.len(), |i, j| r_h[(rows[i], cols[j])]);
    let mut out = CMatrix::zeros(d, d);
    if r.is_empty() {
        return out;
    }
    let r_s_inv = pick(s, s).try_inverse().expect("R_s invertible");
    let cond = pick(&r, &r) - pick(&r, s) * r_s_inv * pick(s, &r);
    for (i, &a) in r.iter().enumerate() {
        for (j, &b) in r.iter().enumerate() {
            out[(a, b)] = cond[(i, j)];
        }
    }
    out
}

/// `log₂ det(I + σ⁻² 𝒳 R_H 𝒳ᴴ) − log₂ det(I + σ⁻² 𝒳 R_{h|s} 𝒳ᴴ)` at the full
/// echo dimension `rows·M_s`.
pub fn brute_force_smi(x: &CMatrix, r_h: &CMatrix, s: &[usize], m_s: usize, sigma2: f64) -> f64 {
    let big = kron_eye(x, m_s);
    let dim = big.nrows();
    let eye = CMatrix::identity(dim, dim);
    let term = |cov: &CMatrix| logdet2_lu(&(&eye + (&big * cov * big.adjoint()).scale(1.0 / sigma2)));
    term(r_h) - term(&conditional_embedded(r_h, s))
}

/// Posterior covariance of `h_s` given the echoes, at full dimension.
pub fn posterior_covariance(x: &CMatrix, r_h: &CMatrix, m_s: usize, sigma2: f64) -> CMatrix {
    let big = kron_eye(x, m_s);
    let dim = big.nrows();
    let cov_y = &big * r_h * big.adjoint() + CMatrix::identity(dim, dim).scale(sigma2);
    let gain = r_h * big.adjoint() * cov_y.try_inverse().expect("echo covariance invertible");
    r_h - gain * &big * r_h
}

/// Trace MSE over `s` of the exact LMMSE estimator.
pub fn lmmse_trace_mse(x: &CMatrix, r_h: &CMatrix, s: &[usize], m_s: usize, sigma2: f64) -> f64 {
    let p = posterior_covariance(x, r_h, m_s, sigma2);
    s.iter().map(|&i| p[(i, i)].re).sum::<f64>() / s.len() as f64
}

/// Random Hermitian PD matrix `A Aᴴ + δ I`, real diagonal.
pub fn random_hpd(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let delta: f64 = rng.random_range(0.05..1.0);
    let m = &a * a.adjoint() + CMatrix::identity(dim, dim).scale(delta);
    (&m + m.adjoint()).scale(0.5)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
}

/// Random subset of `0..dim` with `k` elements, in random order.
pub fn random_subset(dim: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}
