//! CMI-SMI and CMI-MSE regions traced by splitting a fixed RE budget
//! between communication and sensing.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{CorrelationSpec, SensingChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::metrics::{self, MetricPoint};
use crate::waveform::{Ensemble, RowSampler, WaveformMatrix};
use crate::{fmt_float, rng};

/// Default number of grid points on a region curve.
pub const DEFAULT_GRID_POINTS: usize = 51;

/// Default exchange-rate threshold for [`classify_regions`].
pub const DEFAULT_SATURATION_FRACTION: f64 = 0.1;

/// Disjoint split of `u_isac` REs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub u_isac: usize,
    pub u_c: usize,
    pub u_s: usize,
}

impl Allocation {
    pub fn new(u_isac: usize, u_c: usize) -> Result<Self> {
        if u_c > u_isac {
            return Err(Error::invalid("u_c", format!("{u_c} exceeds u_isac = {u_isac}")));
        }
        Ok(Allocation {
            u_isac,
            u_c,
            u_s: u_isac - u_c,
        })
    }
}

/// Which formulas a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Log-det SMI on a sampled Gaussian waveform.
    Exact,
    /// Closed-form large-resource expressions.
    Approx,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Approx => "approx",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "approx" => Ok(Mode::Approx),
            other => Err(Error::invalid("mode", format!("expected `exact` or `approx`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub u_isac: usize,
    pub mode: Mode,
    /// Ordered by increasing `u_c`.
    pub points: Vec<MetricPoint>,
}

impl RegionCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "u_c,u_s,cmi_bits,smi_bits,mse_bound,mode")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                p.u_c,
                p.u_s,
                fmt_float(p.cmi_bits),
                fmt_float(p.smi_bits),
                fmt_float(p.mse_bound),
                self.mode
            )?;
        }
        Ok(())
    }
}

/// `points` evenly spaced values of `u_c` in `[0, u_isac]`, endpoints included.
pub fn default_grid(u_isac: usize, points: usize) -> Vec<usize> {
    if points < 2 {
        return vec![0];
    }
    let mut grid: Vec<usize> = (0..points)
        .map(|i| ((i as f64) * u_isac as f64 / (points - 1) as f64).round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// Evaluates CMI, SMI and MSE bound at each `u_c` in `grid`.
///
/// Exact mode samples one Gaussian waveform (transmit correlation
/// `corr.rho_x`) of `2·u_isac` rows from `seed`; the allocation with `u_s`
/// sensing REs uses its first `2·u_s` rows. Nesting the sensing samples keeps
/// each curve monotone. `u_s = 0` yields SMI 0 and the prior MSE.
#[allow(clippy::too_many_arguments)]
pub fn sweep_region(
    cfg: &SystemConfig,
    corr: &CorrelationSpec,
    h_c: &CMatrix,
    model: &SensingChannelModel,
    u_isac: usize,
    grid: &[usize],
    mode: Mode,
    seed: u64,
) -> Result<RegionCurve> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    let allocations = grid
        .iter()
        .map(|&u_c| Allocation::new(u_isac, u_c))
        .collect::<Result<Vec<_>>>()?;

    let cmi_re = metrics::cmi_per_re(cfg, h_c, corr.rho_x)?;
    let prior = model.prior_logdet2()?;
    let k = model.k();

    let master = match mode {
        Mode::Exact => {
            let sampler = RowSampler::new(Ensemble::Gaussian { rho_x: corr.rho_x }, cfg.n_tx, cfg.p_t)?;
            let x = sampler.sample_matrix_with(2 * u_isac, &mut rng::stream(seed, rng::domain::WAVEFORM, 0));
            Some(WaveformMatrix::new(x, Ensemble::Gaussian { rho_x: corr.rho_x }.tag(), seed))
        }
        Mode::Approx => None,
    };

    let points = allocations
        .par_iter()
        .map(|a| {
            let cmi_bits = if a.u_c == 0 { 0.0 } else { a.u_c as f64 * cmi_re };
            let (smi_bits, mse_bound) = match (&master, a.u_s) {
                (_, 0) => (0.0, metrics::mse_bound_from_logdet(0.0, prior, k)),
                (Some(wave), u_s) => {
                    let sub = wave.prefix(2 * u_s);
                    let smi = metrics::smi_partial_channel(&sub, model, cfg)?;
                    (smi, metrics::mse_bound_from_logdet(smi, prior, k))
                }
                (None, u_s) => (
                    metrics::smi_approx(cfg, model.r_s(), u_s)?,
                    metrics::mse_approx(cfg, model.r_s(), u_s)?,
                ),
            };
            Ok(MetricPoint {
                u_c: a.u_c,
                u_s: a.u_s,
                cmi_bits,
                smi_bits,
                mse_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RegionCurve { u_isac, mode, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    TradeOff,
    CommunicationSaturation,
    SensingSaturation,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLabel::TradeOff => "trade_off",
            RegionLabel::CommunicationSaturation => "communication_saturation",
            RegionLabel::SensingSaturation => "sensing_saturation",
        })
    }
}

/// Maximal run of curve steps sharing a label; `start..=end` are point indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: RegionLabel,
    pub start: usize,
    pub end: usize,
}

/// Labels the steps of a region curve by their normalized exchange rate
/// `|Δsmi / Δcmi|`, with both axes scaled to their range over the curve.
///
/// Rates below `saturation_fraction` are communication saturation, rates
/// above its reciprocal are sensing saturation, the rest trade-off.
pub fn classify_regions(curve: &RegionCurve, saturation_fraction: f64) -> Result<Vec<Segment>> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(Error::invalid("curve", format!("need at least 3 points, got {}", pts.len())));
    }
    if !(saturation_fraction > 0.0 && saturation_fraction < 0.5) {
        return Err(Error::invalid(
            "saturation_fraction",
            format!("{saturation_fraction} outside (0, 0.5)"),
        ));
    }
    for (i, w) in pts.windows(2).enumerate() {
        let reason = if w[1].cmi_bits <= w[0].cmi_bits {
            Some("cmi not strictly increasing")
        } else if w[1].smi_bits > w[0].smi_bits {
            Some("smi increasing")
        } else if w[1].mse_bound < w[0].mse_bound {
            Some("mse bound decreasing")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::NonMonotone {
                index: i + 1,
                reason: reason.to_string(),
            });
        }
    }

    let cmi_range = pts[pts.len() - 1].cmi_bits - pts[0].cmi_bits;
    let smi_max = pts.iter().map(|p| p.smi_bits).fold(f64::NEG_INFINITY, f64::max);
    let smi_min = pts.iter().map(|p| p.smi_bits).fold(f64::INFINITY, f64::min);
    let smi_range = smi_max - smi_min;

    let mut segments: Vec<Segment> = Vec::new();
    for (i, w) in pts.windows(2).enumerate() {
        let d_cmi = (w[1].cmi_bits - w[0].cmi_bits) / cmi_range;
        let d_smi = if smi_range > 0.0 {
            (w[0].smi_bits - w[1].smi_bits) / smi_range
        } else {
            0.0
        };
        let rate = d_smi / d_cmi;
        let label = if rate < saturation_fraction {
            RegionLabel::CommunicationSaturation
        } else if rate > 1.0 / saturation_fraction {
            RegionLabel::SensingSaturation
        } else {
            RegionLabel::TradeOff
        };
        match segments.last_mut() {
            Some(seg) if seg.label == label => seg.end = i + 1,
            _ => segments.push(Segment {
                label,
                start: i,
                end: i + 1,
            }),
        }
    }
    Ok(segments)
}

/// Label of each point: the label of the step leaving it, and for the last
/// point the step arriving at it.
pub fn point_labels(segments: &[Segment], n_points: usize) -> Vec<RegionLabel> {
    let mut labels = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let step = i.min(n_points.saturating_sub(2));
        let seg = segments
            .iter()
            .find(|s| step >= s.start && step < s.end)
            .or(segments.last())
            .expect("segments cover the curve");
        labels.push(seg.label);
    }
    labels
}
