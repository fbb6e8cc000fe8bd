//! Experiment commands behind the `isac` binary.
//!
//! Each command writes one CSV table (header row, 12 significant digits per
//! float) to any writer. Given the same [`ExperimentConfig`] the output is
//! byte-identical regardless of the rayon thread count.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::covariance::{build_prefix_channel_model, CorrelationSpec, SystemConfig};
use crate::error::{Error, Result};
use crate::metrics;
use crate::oracle;
use crate::regions::{self, Mode};
use crate::rng;
use crate::waveform::{Ensemble, WaveformMatrix};
use crate::{fmt_float, linalg};

/// Flat on-disk configuration. Channel-to-noise ratios are given in dB.
///
/// ```json
/// { "n_tx": 4, "m_c": 4, "m_s": 8, "bandwidth_b": 1, "n_cpi": 10000,
///   "p_t": 1.0, "alpha2_hs": 1.0, "alpha2_hc": 1.0,
///   "beta_s_db": 10.0, "beta_c_db": 20.0,
///   "rho_s": 0.3, "rho_r": 0.3, "rho_sr": 0.2, "rho_x": 0.0,
///   "k": 16, "u_isac": 10000, "seed": 1, "trials": 10000 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub n_tx: usize,
    pub m_c: usize,
    pub m_s: usize,
    pub bandwidth_b: usize,
    pub n_cpi: usize,
    pub p_t: f64,
    pub alpha2_hs: f64,
    pub alpha2_hc: f64,
    pub beta_s_db: f64,
    pub beta_c_db: f64,
    pub rho_s: f64,
    pub rho_r: f64,
    pub rho_sr: f64,
    pub rho_x: f64,
    /// Defaults to `N·M_s / 2`.
    pub k: Option<usize>,
    /// Defaults to `B·N_CPI`.
    pub u_isac: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub output_path: Option<PathBuf>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile {
            n_tx: 4,
            m_c: 4,
            m_s: 8,
            bandwidth_b: 1,
            n_cpi: 10_000,
            p_t: 1.0,
            alpha2_hs: 1.0,
            alpha2_hc: 1.0,
            beta_s_db: 10.0,
            beta_c_db: 20.0,
            rho_s: 0.3,
            rho_r: 0.3,
            rho_sr: 0.2,
            rho_x: 0.0,
            k: None,
            u_isac: None,
            seed: 1,
            trials: 10_000,
            output_path: None,
        }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub correlation: CorrelationSpec,
    pub k: usize,
    pub u_isac: usize,
    pub seed: u64,
    pub trials: usize,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::try_from(ConfigFile::default()).expect("default configuration is valid")
    }
}

impl TryFrom<ConfigFile> for ExperimentConfig {
    type Error = Error;

    fn try_from(f: ConfigFile) -> Result<Self> {
        for (name, v) in [("beta_s_db", f.beta_s_db), ("beta_c_db", f.beta_c_db)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        let system = SystemConfig {
            n_tx: f.n_tx,
            m_c: f.m_c,
            m_s: f.m_s,
            bandwidth_b: f.bandwidth_b,
            n_cpi: f.n_cpi,
            p_t: f.p_t,
            sigma2_nc: f.alpha2_hc / db_to_linear(f.beta_c_db),
            sigma2_ns: f.alpha2_hs / db_to_linear(f.beta_s_db),
            alpha2_hs: f.alpha2_hs,
            alpha2_hc: f.alpha2_hc,
        };
        system.validate()?;
        let k = f.k.unwrap_or((system.channel_dim() / 2).max(1));
        if k == 0 || k > system.channel_dim() {
            return Err(Error::invalid("k", format!("{k} outside [1, {}]", system.channel_dim())));
        }
        let cfg = ExperimentConfig {
            system: system.clone(),
            correlation: CorrelationSpec {
                rho_s: f.rho_s,
                rho_r: f.rho_r,
                rho_sr: f.rho_sr,
                rho_x: f.rho_x,
            },
            k,
            u_isac: f.u_isac.unwrap_or(system.resource_elements()),
            seed: f.seed,
            trials: f.trials,
            output_path: f.output_path,
        };
        build_prefix_channel_model(&cfg.system, &cfg.correlation, cfg.k)?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))?;
        Self::try_from(file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// Provenance record written next to each CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub arguments: serde_json::Value,
}

/// `<package version>` plus `git describe` of the build tree when available.
pub fn version_string() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), "+", env!("ISAC_GIT_DESCRIBE"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::invalid("output", e.to_string())
}

/// Tabulates the MSE bound over an SMI grid for each `(K, ρ_s)` pair, with
/// `R_s` the equicorrelation matrix of variance `α_Hs²`.
///
/// Columns: `k,rho_s,smi_bits,mse_bound`.
pub fn cmd_smi_mse<W: Write>(
    cfg: &ExperimentConfig,
    k_list: &[usize],
    rho_s_list: &[f64],
    smi_grid: &[f64],
    mut out: W,
) -> Result<()> {
    writeln!(out, "k,rho_s,smi_bits,mse_bound").map_err(io_err)?;
    for &k in k_list {
        for &rho_s in rho_s_list {
            let r_s = linalg::from_real(&crate::covariance::equicorrelation_real(
                k,
                cfg.system.alpha2_hs,
                rho_s,
                "rho_s",
            )?);
            let prior = linalg::logdet2_hpd(&r_s, "R_s")?;
            for &smi in smi_grid {
                let mse = metrics::mse_bound_from_logdet(smi, prior, k);
                writeln!(out, "{k},{},{},{}", fmt_float(rho_s), fmt_float(smi), fmt_float(mse)).map_err(io_err)?;
            }
        }
    }
    Ok(())
}

/// Region sweeps for each `(U_ISAC, ρ_x)` pair.
///
/// Columns: `u_isac,rho_x,u_c,u_s,cmi_bits,smi_bits,mse_bound,mode,region`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_region<W: Write>(
    cfg: &ExperimentConfig,
    mode: Mode,
    u_isac_list: &[usize],
    rho_x_list: &[f64],
    grid_points: usize,
    saturation_fraction: f64,
    mut out: W,
) -> Result<()> {
    let sys = &cfg.system;
    let h_c = metrics::draw_comm_channel(sys, cfg.seed);
    let model = build_prefix_channel_model(sys, &cfg.correlation, cfg.k)?;
    writeln!(out, "u_isac,rho_x,u_c,u_s,cmi_bits,smi_bits,mse_bound,mode,region").map_err(io_err)?;
    for &u_isac in u_isac_list {
        for &rho_x in rho_x_list {
            let corr = CorrelationSpec { rho_x, ..cfg.correlation };
            let grid = regions::default_grid(u_isac, grid_points);
            let curve = regions::sweep_region(sys, &corr, &h_c, &model, u_isac, &grid, mode, cfg.seed)?;
            let labels = if curve.points.len() >= 3 {
                let segs = regions::classify_regions(&curve, saturation_fraction)?;
                regions::point_labels(&segs, curve.points.len())
                    .into_iter()
                    .map(|l| l.to_string())
                    .collect()
            } else {
                vec![String::new(); curve.points.len()]
            };
            for (p, label) in curve.points.iter().zip(labels) {
                writeln!(
                    out,
                    "{u_isac},{},{},{},{},{},{},{mode},{label}",
                    fmt_float(rho_x),
                    p.u_c,
                    p.u_s,
                    fmt_float(p.cmi_bits),
                    fmt_float(p.smi_bits),
                    fmt_float(p.mse_bound),
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(())
}

/// Parameters of [`cmd_waveform_compare`].
#[derive(Debug, Clone, Serialize)]
pub struct WaveformCompare {
    pub n_list: Vec<usize>,
    pub m_c_list: Vec<usize>,
    pub u_s_list: Vec<usize>,
    pub n_outer: usize,
    pub n_inner: usize,
}

/// Gaussian versus constant-modulus waveforms.
///
/// Communication rows give the per-RE CMI (Monte Carlo for both ensembles
/// plus the Gaussian closed form) over an equal-gain channel, for each
/// `(M_c, N)`. Sensing rows give the ensemble-average SMI of the configured
/// model for each `u_s`, using `trials` waveform draws.
///
/// Columns: `metric,ensemble,n_tx,m_c,u_s,value_bits,std_error`.
pub fn cmd_waveform_compare<W: Write>(cfg: &ExperimentConfig, p: &WaveformCompare, mut out: W) -> Result<()> {
    if p.u_s_list.contains(&0) {
        return Err(Error::invalid("u_s_list", "entries must be at least 1"));
    }
    if !p.u_s_list.is_empty() && cfg.trials < metrics::MIN_ENSEMBLE_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("need at least {} waveform draws, got {}", metrics::MIN_ENSEMBLE_TRIALS, cfg.trials),
        ));
    }
    writeln!(out, "metric,ensemble,n_tx,m_c,u_s,value_bits,std_error").map_err(io_err)?;
    let ensembles = [Ensemble::gaussian(), Ensemble::ConstantModulus];
    for &m_c in &p.m_c_list {
        for &n_tx in &p.n_list {
            let sys = SystemConfig {
                n_tx,
                m_c,
                ..cfg.system.clone()
            };
            let h_c = metrics::equal_gain_channel(&sys, cfg.seed);
            let closed = metrics::cmi_per_re(&sys, &h_c, 0.0)?;
            writeln!(out, "cmi_closed_form,gaussian,{n_tx},{m_c},,{},{}", fmt_float(closed), fmt_float(0.0))
                .map_err(io_err)?;
            for ens in ensembles {
                let est = metrics::cmi_monte_carlo(&sys, &h_c, ens, p.n_outer, p.n_inner, cfg.seed)?;
                writeln!(
                    out,
                    "cmi_monte_carlo,{},{n_tx},{m_c},,{},{}",
                    ens.tag(),
                    fmt_float(est.mean),
                    fmt_float(est.std_error)
                )
                .map_err(io_err)?;
            }
        }
    }
    let model = build_prefix_channel_model(&cfg.system, &cfg.correlation, cfg.k)?;
    for (i, &u_s) in p.u_s_list.iter().enumerate() {
        let sys = cfg.system.with_resource_elements(u_s);
        for ens in ensembles {
            let seed = rng::derive_seed(cfg.seed, rng::domain::TRIAL, i as u64);
            let est = metrics::ensemble_average_smi(ens, &model, &sys, cfg.trials, seed)?;
            writeln!(
                out,
                "smi,{},{},,{u_s},{},{}",
                ens.tag(),
                sys.n_tx,
                fmt_float(est.mean),
                fmt_float(est.std_error)
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Full-channel sensing (`K = N·M_s`) versus the parameter correlation
/// `ρ_s`, on one Gaussian waveform of `2·u_s` rows shared by all rows.
///
/// Columns: `rho_s,k,u_s,h_s_bits,smi_bits,mse_bound` where `h_s_bits` is
/// `log₂ det R_s`.
pub fn cmd_sensing_rho<W: Write>(cfg: &ExperimentConfig, rho_s_list: &[f64], u_s: usize, mut out: W) -> Result<()> {
    if u_s == 0 {
        return Err(Error::invalid("u_s", "must be at least 1"));
    }
    let sys = &cfg.system;
    let k = sys.channel_dim();
    let wave = WaveformMatrix::draw(Ensemble::gaussian(), sys.n_tx, sys.p_t, 2 * u_s, cfg.seed)?;
    writeln!(out, "rho_s,k,u_s,h_s_bits,smi_bits,mse_bound").map_err(io_err)?;
    for &rho_s in rho_s_list {
        let corr = CorrelationSpec { rho_s, ..cfg.correlation };
        let model = build_prefix_channel_model(sys, &corr, k)?;
        let prior = model.prior_logdet2()?;
        let smi = metrics::smi_full_channel(&wave, &model, sys)?;
        let mse = metrics::mse_bound_from_logdet(smi, prior, k);
        writeln!(
            out,
            "{},{k},{u_s},{},{},{}",
            fmt_float(rho_s),
            fmt_float(prior),
            fmt_float(smi),
            fmt_float(mse)
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// LMMSE empirical MSE against the bound for each `u_s`; returns any
/// conditioning warnings.
///
/// Columns: `u_s,trials,empirical_mse,bound,std_error`.
pub fn cmd_oracle<W: Write>(cfg: &ExperimentConfig, u_s_list: &[usize], mut out: W) -> Result<Vec<String>> {
    let sys = &cfg.system;
    let model = build_prefix_channel_model(sys, &cfg.correlation, cfg.k)?;
    let mut warnings = Vec::new();
    writeln!(out, "u_s,trials,empirical_mse,bound,std_error").map_err(io_err)?;
    for (i, &u_s) in u_s_list.iter().enumerate() {
        if u_s == 0 {
            return Err(Error::invalid("u_s_list", "entries must be at least 1"));
        }
        let wave_seed = rng::derive_seed(cfg.seed, rng::domain::WAVEFORM, i as u64);
        let wave = WaveformMatrix::draw(Ensemble::gaussian(), sys.n_tx, sys.p_t, 2 * u_s, wave_seed)?;
        let trial_seed = rng::derive_seed(cfg.seed, rng::domain::TRIAL, i as u64);
        let res = oracle::lmmse_empirical_mse(&wave, &model, sys, cfg.trials, trial_seed)?;
        if let Some(w) = res.warning {
            warnings.push(format!("u_s = {u_s}: {w}"));
        }
        writeln!(
            out,
            "{u_s},{},{},{},{}",
            res.trials,
            fmt_float(res.empirical_mse),
            fmt_float(res.bound),
            fmt_float(res.std_error)
        )
        .map_err(io_err)?;
    }
    Ok(warnings)
}

/// Dumps one waveform of `2·B·N_CPI` rows.
pub fn cmd_dump_waveform<W: Write>(cfg: &ExperimentConfig, ensemble: Ensemble, out: W) -> Result<()> {
    let sys = &cfg.system;
    let wave = WaveformMatrix::draw(ensemble, sys.n_tx, sys.p_t, sys.samples_per_cpi(), cfg.seed)?;
    wave.write_csv(out).map_err(io_err)
}
