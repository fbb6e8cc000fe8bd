//! LMMSE probe of the SMI → MSE bound.
//!
//! For jointly Gaussian `h_s` and echoes the LMMSE estimator is the MMSE
//! estimator, so its empirical error is the smallest any estimator can
//! reach. Comparing it with [`mse_bound`](crate::metrics::mse_bound) checks
//! the direction of the bound and, in symmetric settings, its tightness.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{SensingChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::metrics::{self, McEstimate};
use crate::rng;
use crate::waveform::WaveformMatrix;

/// Condition number of the normal equations above which a warning is attached.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Mean of `|s_k − ŝ_k|²` over the `K` sensing parameters and all trials.
    pub empirical_mse: f64,
    pub bound: f64,
    pub trials: usize,
    pub std_error: f64,
    /// Per-coordinate mean of `ĥ_s` over trials.
    pub estimate_mean: Vec<Complex64>,
    /// Standard error of the real (and imaginary) part of `estimate_mean`.
    pub estimate_std_error: Vec<f64>,
    pub warning: Option<String>,
}

fn cn_sample<R: rand::Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Runs `trials` independent channel/noise draws against a fixed waveform,
/// estimates `h_s` with LMMSE and averages the squared error over `s`.
///
/// Echoes are formed as `Y = X H_s + N` with `H_s[n, m] = h_s[n·M_s + m]`,
/// which is `ȳ = (X ⊗ I_{M_s}) h_s + n̄` read row-major. The estimate is
/// `ĥ = (R_H⁻¹ + σ⁻² X̌ ⊗ I)⁻¹ σ⁻² 𝒳ᴴ ȳ`, solved at dimension `N·M_s`.
pub fn lmmse_empirical_mse(
    wave: &WaveformMatrix,
    model: &SensingChannelModel,
    cfg: &SystemConfig,
    trials: usize,
    seed: u64,
) -> Result<OracleResult> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::invalid("trials", "need at least 2 trials"));
    }
    let (n, m_s) = (cfg.n_tx, cfg.m_s);
    let dim = cfg.channel_dim();
    if wave.n_tx() != n || model.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "waveform has {} antennas and model dimension {}, config expects N = {n} and N·M_s = {dim}",
            wave.n_tx(),
            model.dim()
        )));
    }
    let sigma2 = cfg.sigma2_ns;
    let g = linalg::kron_identity(wave.gram(), m_s);

    let r_h_inv = linalg::cholesky(model.r_h(), "R_H")?.inverse();
    let normal = linalg::hermitian_part(&(r_h_inv + g.scale(1.0 / sigma2)));
    let cond = linalg::condition_number(&normal);
    let warning = (cond > CONDITION_WARNING)
        .then(|| format!("normal equations ill-conditioned (condition number {cond:.3e})"));
    let chol = normal.cholesky().ok_or_else(|| {
        Error::Numerical(format!("Cholesky failed on the LMMSE normal equations (condition {cond:.3e})"))
    })?;
    let gain = chol.inverse().scale(1.0 / sigma2);

    let x = wave.x();
    let rows = wave.rows();
    let l = model.h_factor();
    let s_idx = model.s_indices();
    let noise_scale = (sigma2 / 2.0).sqrt();

    let per_trial: Vec<(f64, Vec<Complex64>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, rng::domain::TRIAL, t as u64);
            let z: Vec<Complex64> = (0..dim).map(|_| cn_sample(&mut rng, std::f64::consts::FRAC_1_SQRT_2)).collect();
            let h = l * nalgebra::DVector::from_vec(z);

            // Matched filter 𝒳ᴴ ȳ = vec_row(Xᴴ (X H_s + N)).
            let mut xty = CMatrix::zeros(n, m_s);
            let mut y_row = vec![Complex64::new(0.0, 0.0); m_s];
            for i in 0..rows {
                for (mm, y) in y_row.iter_mut().enumerate() {
                    let mut acc = cn_sample(&mut rng, noise_scale);
                    for nn in 0..n {
                        acc += x[(i, nn)] * h[nn * m_s + mm];
                    }
                    *y = acc;
                }
                for nn in 0..n {
                    let xc = x[(i, nn)].conj();
                    for (mm, y) in y_row.iter().enumerate() {
                        xty[(nn, mm)] += xc * y;
                    }
                }
            }
            let b = nalgebra::DVector::from_fn(dim, |idx, _| xty[(idx / m_s, idx % m_s)]);
            let h_hat = &gain * b;
            let err = s_idx.iter().map(|&k| (h[k] - h_hat[k]).norm_sqr()).sum::<f64>() / s_idx.len() as f64;
            (err, h_hat.iter().copied().collect())
        })
        .collect();

    let errors: Vec<f64> = per_trial.iter().map(|(e, _)| *e).collect();
    let mse = McEstimate::from_samples(&errors);

    let nt = trials as f64;
    let mut estimate_mean = vec![Complex64::new(0.0, 0.0); dim];
    for (_, est) in &per_trial {
        for (acc, v) in estimate_mean.iter_mut().zip(est) {
            *acc += v;
        }
    }
    for v in estimate_mean.iter_mut() {
        *v /= nt;
    }
    let mut spread = vec![0.0; dim];
    for (_, est) in &per_trial {
        for ((acc, v), mean) in spread.iter_mut().zip(est).zip(&estimate_mean) {
            *acc += (v - mean).norm_sqr();
        }
    }
    let estimate_std_error = spread
        .iter()
        .map(|s| (s / (nt - 1.0) / 2.0 / nt).sqrt())
        .collect();

    let smi = metrics::smi_partial_channel(wave, model, cfg)?;
    let bound = metrics::mse_bound(smi, model.r_s(), model.k())?;

    Ok(OracleResult {
        empirical_mse: mse.mean,
        bound,
        trials,
        std_error: mse.std_error,
        estimate_mean,
        estimate_std_error,
        warning,
    })
}
