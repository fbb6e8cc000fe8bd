//! System parameters and the sensing-channel covariance model.
//!
//! The sensing channel `h_s` (length `N·M_s`) is split into the `K` sensing
//! parameters `s` and the remaining nuisance entries `r`. Everything the SMI
//! and MSE formulas need is derived once here: the prior blocks of `R_H`, the
//! conditional covariance `R_{r|s}` and its embedding `R_{h_s|s}` back into
//! channel coordinates.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Scalar parameters of the band-limited ISAC link.
///
/// One resource element (RE) spans unit bandwidth for one symbol and carries
/// two complex samples, so a CPI holds `B·N_CPI` REs and `2·B·N_CPI` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit antennas `N`.
    pub n_tx: usize,
    /// Communication receive antennas `M_c`.
    pub m_c: usize,
    /// Sensing receive antennas `M_s`.
    pub m_s: usize,
    /// Bandwidth in symbol-rate units.
    pub bandwidth_b: usize,
    /// Symbols per coherent processing interval.
    pub n_cpi: usize,
    /// Power of each transmit sample.
    pub p_t: f64,
    pub sigma2_nc: f64,
    pub sigma2_ns: f64,
    pub alpha2_hs: f64,
    pub alpha2_hc: f64,
}

impl SystemConfig {
    /// N = 4, M_c = 4, M_s = 8, P_t = 1 (so `P_T = N`), β_c = 20 dB,
    /// β_s = 10 dB, 10⁴ REs per CPI.
    pub fn baseline() -> Self {
        SystemConfig {
            n_tx: 4,
            m_c: 4,
            m_s: 8,
            bandwidth_b: 1,
            n_cpi: 10_000,
            p_t: 1.0,
            sigma2_nc: 0.01,
            sigma2_ns: 0.1,
            alpha2_hs: 1.0,
            alpha2_hc: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_tx", self.n_tx),
            ("m_c", self.m_c),
            ("m_s", self.m_s),
            ("bandwidth_b", self.bandwidth_b),
            ("n_cpi", self.n_cpi),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        for (name, v) in [
            ("p_t", self.p_t),
            ("sigma2_nc", self.sigma2_nc),
            ("sigma2_ns", self.sigma2_ns),
            ("alpha2_hs", self.alpha2_hs),
            ("alpha2_hc", self.alpha2_hc),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Sensing channel-gain-to-noise ratio `α_Hs² / σ_ns²`.
    pub fn beta_s(&self) -> f64 {
        self.alpha2_hs / self.sigma2_ns
    }

    /// Communication channel-gain-to-noise ratio `α_Hc² / σ_nc²`.
    pub fn beta_c(&self) -> f64 {
        self.alpha2_hc / self.sigma2_nc
    }

    /// Symbol duration `T = 1/B`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.bandwidth_b as f64
    }

    /// `2·B·N_CPI`.
    pub fn samples_per_cpi(&self) -> usize {
        2 * self.bandwidth_b * self.n_cpi
    }

    /// `B·N_CPI`.
    pub fn resource_elements(&self) -> usize {
        self.bandwidth_b * self.n_cpi
    }

    /// Length of `h_s = vec(H_s)`.
    pub fn channel_dim(&self) -> usize {
        self.n_tx * self.m_s
    }

    /// Copy of this configuration whose CPI spans exactly `u` REs.
    pub fn with_resource_elements(&self, u: usize) -> Self {
        SystemConfig {
            bandwidth_b: 1,
            n_cpi: u,
            ..self.clone()
        }
    }
}

/// Scalar correlation coefficients of the sensing channel and waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub rho_s: f64,
    pub rho_r: f64,
    pub rho_sr: f64,
    pub rho_x: f64,
}

impl CorrelationSpec {
    pub fn baseline() -> Self {
        CorrelationSpec {
            rho_s: 0.3,
            rho_r: 0.3,
            rho_sr: 0.2,
            rho_x: 0.0,
        }
    }

    pub fn uncorrelated() -> Self {
        CorrelationSpec {
            rho_s: 0.0,
            rho_r: 0.0,
            rho_sr: 0.0,
            rho_x: 0.0,
        }
    }
}

/// `variance · [(1 − ρ) I + ρ 𝟙𝟙ᵀ]`, checked positive definite.
pub fn build_equicorrelation(dim: usize, variance: f64, rho: f64) -> Result<CMatrix> {
    equicorrelation_named(dim, variance, rho, "rho")
}

pub(crate) fn equicorrelation_real(
    dim: usize,
    variance: f64,
    rho: f64,
    name: &'static str,
) -> Result<DMatrix<f64>> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::invalid("variance", format!("must be positive, got {variance}")));
    }
    if !rho.is_finite() {
        return Err(Error::invalid(name, "must be finite"));
    }
    if dim > 1 {
        let lower = -1.0 / (dim as f64 - 1.0);
        if !(rho > lower && rho < 1.0) {
            return Err(Error::invalid(
                name,
                format!("{rho} outside ({lower}, 1) for dimension {dim}"),
            ));
        }
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            variance
        } else {
            variance * rho
        }
    });
    if m.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite {
            what: format!("equicorrelation matrix ({name} = {rho}, dim = {dim})"),
        });
    }
    Ok(m)
}

fn equicorrelation_named(dim: usize, variance: f64, rho: f64, name: &'static str) -> Result<CMatrix> {
    equicorrelation_real(dim, variance, rho, name).map(|m| linalg::from_real(&m))
}

/// Conditional covariance `R_r − R_rs R_s⁻¹ R_sr`, symmetrized.
pub fn schur_conditional(r_r: &CMatrix, r_rs: &CMatrix, r_s: &CMatrix) -> Result<CMatrix> {
    let k = r_s.nrows();
    let kr = r_r.nrows();
    if !r_s.is_square() || !r_r.is_square() || r_rs.shape() != (kr, k) {
        return Err(Error::DimensionMismatch(format!(
            "R_r {:?}, R_rs {:?}, R_s {:?}",
            r_r.shape(),
            r_rs.shape(),
            r_s.shape()
        )));
    }
    if kr == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let chol = linalg::cholesky(r_s, "R_s")?;
    let solved = chol.solve(&r_rs.adjoint());
    Ok(linalg::hermitian_part(&(r_r - r_rs * solved)))
}

/// Prior covariance of `h_s` together with the `s`/`r` partition and the
/// conditional covariances derived from it.
#[derive(Debug, Clone)]
pub struct SensingChannelModel {
    r_h: CMatrix,
    s_indices: Vec<usize>,
    psi: Vec<usize>,
    r_s: CMatrix,
    r_r: CMatrix,
    r_sr: CMatrix,
    r_rs: CMatrix,
    r_cond: CMatrix,
    r_h_cond: CMatrix,
    /// Lower Cholesky factor of `R_H`.
    h_factor: CMatrix,
    /// `F` with `R_{h_s|s} = F Fᴴ`, one column per nonzero eigenvalue.
    cond_factor: CMatrix,
}

impl SensingChannelModel {
    /// Partitions an arbitrary Hermitian PD covariance of `h_s`.
    ///
    /// `s_indices[i]` is the position of the `i`-th sensing parameter inside
    /// `h_s`; the remaining positions, in increasing order, form `ψ`.
    pub fn from_covariance(r_h: CMatrix, s_indices: &[usize]) -> Result<Self> {
        let dim = r_h.nrows();
        if !r_h.is_square() || dim == 0 {
            return Err(Error::DimensionMismatch(format!(
                "R_H must be square and non-empty, got {:?}",
                r_h.shape()
            )));
        }
        if s_indices.is_empty() {
            return Err(Error::invalid("k", "at least one sensing parameter is required"));
        }
        let mut taken = vec![false; dim];
        for &i in s_indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            if taken[i] {
                return Err(Error::invalid("s_indices", format!("index {i} repeated")));
            }
            taken[i] = true;
        }
        let r_h = linalg::hermitian_part(&r_h);
        let h_factor = linalg::cholesky(&r_h, "R_H")?.l();

        let psi: Vec<usize> = (0..dim).filter(|&i| !taken[i]).collect();
        let block = |rows: &[usize], cols: &[usize]| {
            CMatrix::from_fn(rows.len(), cols.len(), |a, b| r_h[(rows[a], cols[b])])
        };
        let r_s = block(s_indices, s_indices);
        let r_r = block(&psi, &psi);
        let r_sr = block(s_indices, &psi);
        let r_rs = block(&psi, s_indices);
        let r_cond = schur_conditional(&r_r, &r_rs, &r_s)?;

        let mut r_h_cond = CMatrix::zeros(dim, dim);
        for (i, &pi) in psi.iter().enumerate() {
            for (j, &pj) in psi.iter().enumerate() {
                r_h_cond[(pi, pj)] = r_cond[(i, j)];
            }
        }

        let cond_factor = linalg::psd_factor(&r_h_cond);

        Ok(SensingChannelModel {
            r_h,
            h_factor,
            cond_factor,
            s_indices: s_indices.to_vec(),
            psi,
            r_s,
            r_r,
            r_sr,
            r_rs,
            r_cond,
            r_h_cond,
        })
    }

    pub fn r_h(&self) -> &CMatrix {
        &self.r_h
    }

    /// Number of sensing parameters `K`.
    pub fn k(&self) -> usize {
        self.s_indices.len()
    }

    /// `N·M_s`.
    pub fn dim(&self) -> usize {
        self.r_h.nrows()
    }

    pub fn is_full_channel(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn s_indices(&self) -> &[usize] {
        &self.s_indices
    }

    /// `ψ`: position in `h_s` of each nuisance entry of `r`.
    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    pub fn r_s(&self) -> &CMatrix {
        &self.r_s
    }

    pub fn r_r(&self) -> &CMatrix {
        &self.r_r
    }

    pub fn r_sr(&self) -> &CMatrix {
        &self.r_sr
    }

    pub fn r_rs(&self) -> &CMatrix {
        &self.r_rs
    }

    /// `R_{r|s}`.
    pub fn r_cond(&self) -> &CMatrix {
        &self.r_cond
    }

    /// `R_{h_s|s}`: `R_{r|s}` placed at rows/columns `ψ`, zero elsewhere.
    pub fn r_h_cond(&self) -> &CMatrix {
        &self.r_h_cond
    }

    pub fn h_factor(&self) -> &CMatrix {
        &self.h_factor
    }

    pub fn cond_factor(&self) -> &CMatrix {
        &self.cond_factor
    }

    /// `log₂ det(R_s)`, the prior entropy term of the sensing parameters.
    pub fn prior_logdet2(&self) -> Result<f64> {
        linalg::logdet2_hpd(&self.r_s, "R_s")
    }
}

/// Equicorrelated channel model: diagonal `α_Hs²`, within-`s` correlation
/// `ρ_s`, within-`r` correlation `ρ_r` and a constant `ρ_sr` cross block.
pub fn build_channel_model(
    cfg: &SystemConfig,
    corr: &CorrelationSpec,
    k: usize,
    s_indices: &[usize],
) -> Result<SensingChannelModel> {
    cfg.validate()?;
    let dim = cfg.channel_dim();
    if k == 0 || k > dim {
        return Err(Error::invalid("k", format!("{k} outside [1, {dim}]")));
    }
    if s_indices.len() != k {
        return Err(Error::invalid(
            "s_indices",
            format!("has {} entries, expected k = {k}", s_indices.len()),
        ));
    }
    let a2 = cfg.alpha2_hs;
    let kr = dim - k;
    let r_s = equicorrelation_real(k, a2, corr.rho_s, "rho_s")?;
    let r_r = if kr > 0 {
        equicorrelation_real(kr, a2, corr.rho_r, "rho_r")?
    } else {
        DMatrix::zeros(0, 0)
    };
    if kr > 0 && !(corr.rho_sr.is_finite() && corr.rho_sr.abs() < 1.0) {
        return Err(Error::invalid("rho_sr", format!("{} outside (-1, 1)", corr.rho_sr)));
    }

    // Composite in (s, r) order.
    let composite = DMatrix::from_fn(dim, dim, |a, b| match (a < k, b < k) {
        (true, true) => r_s[(a, b)],
        (false, false) => r_r[(a - k, b - k)],
        _ => a2 * corr.rho_sr,
    });

    let mut taken = vec![false; dim];
    for &i in s_indices {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        taken[i] = true;
    }
    let order: Vec<usize> = s_indices
        .iter()
        .copied()
        .chain((0..dim).filter(|&i| !taken[i]))
        .collect();
    if order.len() != dim {
        return Err(Error::invalid("s_indices", "contains repeated entries"));
    }
    let mut r_h = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            r_h[(order[a], order[b])] = Complex64::new(composite[(a, b)], 0.0);
        }
    }
    if linalg::cholesky(&r_h, "R_H").is_err() {
        return Err(Error::NotPositiveDefinite {
            what: format!(
                "R_H (rho_s = {}, rho_r = {}, rho_sr = {})",
                corr.rho_s, corr.rho_r, corr.rho_sr
            ),
        });
    }
    SensingChannelModel::from_covariance(r_h, s_indices)
}

/// [`build_channel_model`] with `s` taken as the first `k` entries of `h_s`.
pub fn build_prefix_channel_model(
    cfg: &SystemConfig,
    corr: &CorrelationSpec,
    k: usize,
) -> Result<SensingChannelModel> {
    let s: Vec<usize> = (0..k).collect();
    build_channel_model(cfg, corr, k, &s)
}
