//! Communication and sensing mutual information, the SMI → MSE bound and
//! the large-resource approximations. All information quantities are in
//! bits (log₂).
//!
//! SMI is never evaluated at the `2·B·N_CPI·M_s` dimension of the stacked
//! echo. With `𝒳 = X ⊗ I_{M_s}` and a factor `F` of the relevant covariance,
//!
//! ```text
//! log₂ det(I + σ⁻² 𝒳 F Fᴴ 𝒳ᴴ) = log₂ det(I + σ⁻² Fᴴ (X̌ ⊗ I_{M_s}) F)
//! ```
//!
//! so every term costs one `N·M_s`-dimensional Cholesky.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{equicorrelation_real, SensingChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::waveform::{Ensemble, RowSampler, WaveformMatrix};

/// CMI, SMI and MSE bound achieved by one RE allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub u_c: usize,
    pub u_s: usize,
    pub cmi_bits: f64,
    pub smi_bits: f64,
    pub mse_bound: f64,
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// Sample mean and standard error, summed in index order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return McEstimate { mean, std_error: f64::NAN };
        }
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        McEstimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

fn check_comm_channel(cfg: &SystemConfig, h_c: &CMatrix) -> Result<()> {
    if h_c.shape() != (cfg.n_tx, cfg.m_c) {
        return Err(Error::DimensionMismatch(format!(
            "H_c is {:?}, expected ({}, {})",
            h_c.shape(),
            cfg.n_tx,
            cfg.m_c
        )));
    }
    Ok(())
}

/// Communication channel with i.i.d. `CN(0, α_Hc²)` entries.
pub fn draw_comm_channel(cfg: &SystemConfig, seed: u64) -> CMatrix {
    let mut rng = rng::stream(seed, rng::domain::CHANNEL, 0);
    let s = (cfg.alpha2_hc / 2.0).sqrt();
    CMatrix::from_fn(cfg.n_tx, cfg.m_c, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * s, im * s)
    })
}

/// Equal-gain channel: every entry is `√(α_Hc²/N)·e^{jφ}` with uniform
/// phase, so each receive antenna sees total gain `α_Hc²` whatever `N` is.
pub fn equal_gain_channel(cfg: &SystemConfig, seed: u64) -> CMatrix {
    let mut rng = rng::stream(seed, rng::domain::CHANNEL, 1);
    let amp = (cfg.alpha2_hc / cfg.n_tx as f64).sqrt();
    CMatrix::from_fn(cfg.n_tx, cfg.m_c, |_, _| {
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(amp, phi)
    })
}

/// CMI of one RE for Gaussian input with transmit correlation `rho_x`:
/// `2 log₂ det(I + (P_t/σ_nc²) H_cᴴ Σ_x H_c)`.
pub fn cmi_per_re(cfg: &SystemConfig, h_c: &CMatrix, rho_x: f64) -> Result<f64> {
    cfg.validate()?;
    check_comm_channel(cfg, h_c)?;
    let sigma_x = linalg::from_real(&equicorrelation_real(cfg.n_tx, 1.0, rho_x, "rho_x")?);
    let mut m = h_c.adjoint() * sigma_x * h_c;
    m.scale_mut(cfg.p_t / cfg.sigma2_nc);
    for i in 0..cfg.m_c {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    Ok(2.0 * linalg::logdet2_hpd(&m, "I + SNR·H_cᴴH_c")?)
}

/// CMI over `u_c` REs with i.i.d. Gaussian input.
pub fn cmi_gaussian(cfg: &SystemConfig, h_c: &CMatrix, u_c: usize) -> Result<f64> {
    let per_re = cmi_per_re(cfg, h_c, 0.0)?;
    if u_c == 0 {
        return Ok(0.0);
    }
    Ok(u_c as f64 * per_re)
}

/// Nested Monte-Carlo estimate of the per-RE CMI for an arbitrary input
/// ensemble: `2·[ĥ(y_c) − M_c log₂(πeσ_nc²)]`.
///
/// The output density is the average of `n_inner` Gaussian kernels centred
/// at `x_j H_c` for fresh inner draws `x_j`; it is evaluated in the log
/// domain with a max shift. Each outer sample subtracts its own noise term
/// `−log₂ p(y|x)`, whose mean is `M_c log₂(πeσ_nc²)`, which keeps the
/// variance small at low SNR.
pub fn cmi_monte_carlo(
    cfg: &SystemConfig,
    h_c: &CMatrix,
    ensemble: Ensemble,
    n_outer: usize,
    n_inner: usize,
    seed: u64,
) -> Result<McEstimate> {
    cfg.validate()?;
    check_comm_channel(cfg, h_c)?;
    if n_outer < 2 {
        return Err(Error::invalid("n_outer", "need at least 2 outer samples"));
    }
    if n_inner == 0 {
        return Err(Error::invalid("n_inner", "must be at least 1"));
    }
    if cfg.m_c > 8 {
        return Err(Error::invalid("m_c", "density evaluation supports at most 8 receive antennas"));
    }
    let sampler = RowSampler::new(ensemble, cfg.n_tx, cfg.p_t)?;
    let (n, m) = (cfg.n_tx, cfg.m_c);
    let sigma2 = cfg.sigma2_nc;

    let project = |x: &[Complex64], out: &mut [Complex64]| {
        for (col, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|r| x[r] * h_c[(r, col)]).sum();
        }
    };

    let mut means = vec![Complex64::new(0.0, 0.0); n_inner * m];
    let mut inner_rng = rng::stream(seed, rng::domain::MC_INNER, 0);
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for mu in means.chunks_mut(m) {
        sampler.fill_row(&mut inner_rng, &mut row);
        project(&row, mu);
    }

    let log_norm = (n_inner as f64).ln() + m as f64 * (PI * sigma2).ln();
    let noise_scale = (sigma2 / 2.0).sqrt();
    let info_density: Vec<f64> = (0..n_outer)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n_inner], vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); m]),
            |(exps, x, y), i| {
                let mut rng = rng::stream(seed, rng::domain::MC_OUTER, i as u64);
                sampler.fill_row(&mut rng, x);
                project(x, y);
                let mut noise_energy = 0.0;
                for v in y.iter_mut() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    let w = Complex64::new(re * noise_scale, im * noise_scale);
                    noise_energy += w.norm_sqr();
                    *v += w;
                }
                let mut max = f64::NEG_INFINITY;
                for (e, mu) in exps.iter_mut().zip(means.chunks(m)) {
                    let d: f64 = y.iter().zip(mu).map(|(a, b)| (a - b).norm_sqr()).sum();
                    *e = -d / sigma2;
                    max = max.max(*e);
                }
                let sum: f64 = exps.iter().map(|e| (e - max).exp()).sum();
                let ln_p = max + sum.ln() - log_norm;
                let ln_p_cond = -noise_energy / sigma2 - m as f64 * (PI * sigma2).ln();
                (ln_p_cond - ln_p) / std::f64::consts::LN_2
            },
        )
        .collect();

    let est = McEstimate::from_samples(&info_density);
    Ok(McEstimate {
        mean: 2.0 * est.mean,
        std_error: 2.0 * est.std_error,
    })
}

fn sensing_gram(wave_gram: &CMatrix, model: &SensingChannelModel, cfg: &SystemConfig) -> Result<CMatrix> {
    if wave_gram.nrows() != cfg.n_tx || model.dim() != cfg.channel_dim() {
        return Err(Error::DimensionMismatch(format!(
            "waveform has {} antennas and model dimension {}, config expects N = {} and N·M_s = {}",
            wave_gram.nrows(),
            model.dim(),
            cfg.n_tx,
            cfg.channel_dim()
        )));
    }
    Ok(linalg::kron_identity(wave_gram, cfg.m_s))
}

fn smi_from_gram(gram: &CMatrix, model: &SensingChannelModel, cfg: &SystemConfig) -> Result<f64> {
    let g = sensing_gram(gram, model, cfg)?;
    let scale = 1.0 / cfg.sigma2_ns;
    let prior = linalg::logdet2_identity_plus(model.h_factor(), &g, scale)?;
    if model.is_full_channel() {
        return Ok(prior);
    }
    let residual = linalg::logdet2_identity_plus(model.cond_factor(), &g, scale)?;
    Ok(prior - residual)
}

/// SMI when every channel coefficient is a sensing parameter (`s = h_s`):
/// `log₂ det(I + σ_ns⁻² Lᴴ (X̌ ⊗ I) L)` with `R_H = L Lᴴ`.
pub fn smi_full_channel(wave: &WaveformMatrix, model: &SensingChannelModel, cfg: &SystemConfig) -> Result<f64> {
    if !model.is_full_channel() {
        return Err(Error::invalid(
            "k",
            format!("full-channel SMI needs K = N·M_s = {}, got {}", model.dim(), model.k()),
        ));
    }
    smi_from_gram(wave.gram(), model, cfg)
}

/// SMI when `s` is a subset of `h_s`: the prior term minus the term of the
/// conditional covariance `R_{h_s|s}`. Reduces to [`smi_full_channel`] when
/// `K = N·M_s`.
pub fn smi_partial_channel(wave: &WaveformMatrix, model: &SensingChannelModel, cfg: &SystemConfig) -> Result<f64> {
    smi_from_gram(wave.gram(), model, cfg)
}

/// Minimum average MSE supported by `smi_bits` of sensing information:
/// `2^{(log₂ det R_s − SMI)/K}`.
pub fn mse_bound(smi_bits: f64, r_s: &CMatrix, k: usize) -> Result<f64> {
    if k == 0 || r_s.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "R_s is {:?}, expected ({k}, {k})",
            r_s.shape()
        )));
    }
    let prior = linalg::logdet2_hpd(r_s, "R_s")?;
    Ok(mse_bound_from_logdet(smi_bits, prior, k))
}

pub fn mse_bound_from_logdet(smi_bits: f64, prior_logdet2: f64, k: usize) -> f64 {
    ((prior_logdet2 - smi_bits) / k as f64).exp2()
}

/// Large-resource SMI: `K log₂(2 U_s P_t / σ_ns²) + log₂ det R_s`; zero at
/// `U_s = 0`.
pub fn smi_approx(cfg: &SystemConfig, r_s: &CMatrix, u_s: usize) -> Result<f64> {
    let prior = linalg::logdet2_hpd(r_s, "R_s")?;
    if u_s == 0 {
        return Ok(0.0);
    }
    let k = r_s.nrows() as f64;
    Ok(k * (2.0 * u_s as f64 * cfg.p_t / cfg.sigma2_ns).log2() + prior)
}

/// Large-resource MSE `σ_ns² / (2 U_s P_t)`; the prior geometric-mean
/// variance `det(R_s)^{1/K}` at `U_s = 0`.
pub fn mse_approx(cfg: &SystemConfig, r_s: &CMatrix, u_s: usize) -> Result<f64> {
    if u_s == 0 {
        let prior = linalg::logdet2_hpd(r_s, "R_s")?;
        return Ok(mse_bound_from_logdet(0.0, prior, r_s.nrows()));
    }
    Ok(cfg.sigma2_ns / (2.0 * u_s as f64 * cfg.p_t))
}

pub const MIN_ENSEMBLE_TRIALS: usize = 100;

/// Mean SMI over independent waveform draws of `2·B·N_CPI` rows each.
///
/// Trial `t` reads random stream `t`, and the mean is reduced in trial
/// order, so the result is independent of the thread count.
pub fn ensemble_average_smi(
    ensemble: Ensemble,
    model: &SensingChannelModel,
    cfg: &SystemConfig,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    cfg.validate()?;
    if trials < MIN_ENSEMBLE_TRIALS {
        return Err(Error::invalid("trials", format!("need at least {MIN_ENSEMBLE_TRIALS} waveform draws, got {trials}")));
    }
    let sampler = RowSampler::new(ensemble, cfg.n_tx, cfg.p_t)?;
    let rows = cfg.samples_per_cpi();
    let values = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, rng::domain::TRIAL, t as u64);
            let gram = gram_of_draw(&sampler, rows, &mut rng);
            smi_from_gram(&gram, model, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_samples(&values))
}

fn gram_of_draw<R: Rng + ?Sized>(sampler: &RowSampler, rows: usize, rng: &mut R) -> CMatrix {
    let n = sampler.n_tx();
    let mut gram = CMatrix::zeros(n, n);
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..rows {
        sampler.fill_row(rng, &mut row);
        for a in 0..n {
            let ca = row[a].conj();
            for b in 0..n {
                gram[(a, b)] += ca * row[b];
            }
        }
    }
    linalg::hermitian_part(&gram)
}
