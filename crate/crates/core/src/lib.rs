//! Communication and sensing performance limits of a band-limited ISAC link.
//!
//! One transmit matrix `X` (`2B·N_CPI × N` complex samples) drives both a
//! communication receiver with `M_c` antennas and a sensing receiver with
//! `M_s` antennas. The crate computes
//!
//! * communication mutual information (closed form and nested Monte Carlo),
//! * sensing mutual information about a subset `s` of the sensing channel,
//! * the MSE lower bound implied by the sensing information,
//! * allocation sweeps over `U_c + U_s = U_ISAC` resource elements.
//!
//! All sensing formulas are reduced to dimension `N·M_s` through the Gram
//! matrix `XᴴX`, so no Kronecker product of the full waveform is formed.
//!
//! ```
//! use isac_limits::covariance::{build_prefix_channel_model, CorrelationSpec, SystemConfig};
//! use isac_limits::metrics::{mse_bound, smi_partial_channel};
//! use isac_limits::waveform::{Ensemble, WaveformMatrix};
//!
//! let cfg = SystemConfig::baseline();
//! let model = build_prefix_channel_model(&cfg, &CorrelationSpec::baseline(), 16).unwrap();
//! let wave = WaveformMatrix::draw(Ensemble::gaussian(), cfg.n_tx, cfg.p_t, 200, 7).unwrap();
//! let smi = smi_partial_channel(&wave, &model, &cfg).unwrap();
//! let mse = mse_bound(smi, model.r_s(), 16).unwrap();
//! assert!(smi > 0.0 && mse < 1.0);
//! ```

pub mod covariance;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod regions;
pub mod rng;
pub mod waveform;

pub use covariance::{build_channel_model, build_prefix_channel_model, CorrelationSpec, SensingChannelModel, SystemConfig};
pub use error::{Error, Result};
pub use experiments::ExperimentConfig;
pub use metrics::{McEstimate, MetricPoint};
pub use regions::{Mode, RegionCurve, RegionLabel};
pub use waveform::{Ensemble, EnsembleTag, WaveformMatrix};

/// CSV float formatting: 12 significant digits, scientific notation.
///
/// ```
/// assert_eq!(isac_limits::fmt_float(0.1), "1.00000000000e-1");
/// ```
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/covariance.md")]
    mod covariance {}
    #[doc = include_str!("../../../book/src/waveforms.md")]
    mod waveforms {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/mse-bound.md")]
    mod mse_bound {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
