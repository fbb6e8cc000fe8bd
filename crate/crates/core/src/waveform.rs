//! Transmit sample matrices for the waveform ensembles under study.
//!
//! `X` has one row per frequency-domain sample (`2·B·N_CPI` rows) and one
//! column per transmit antenna. After the Kronecker reduction, every SMI
//! formula sees the waveform only through its Gram matrix `X̌ = XᴴX`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::covariance::{equicorrelation_real, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleTag {
    Gaussian,
    ConstantModulus,
    GaussianCorrelated,
}

impl fmt::Display for EnsembleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleTag::Gaussian => "gaussian",
            EnsembleTag::ConstantModulus => "constant_modulus",
            EnsembleTag::GaussianCorrelated => "gaussian_correlated",
        })
    }
}

/// Distribution of one transmit row `x(i) ∈ ℂᴺ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ensemble {
    /// `CN(0, P_t Σ_x)` with `Σ_x` the unit-variance equicorrelation matrix
    /// of coefficient `rho_x`.
    Gaussian { rho_x: f64 },
    /// `√P_t e^{jθ}` with independent uniform phases.
    ConstantModulus,
}

impl Ensemble {
    pub fn gaussian() -> Self {
        Ensemble::Gaussian { rho_x: 0.0 }
    }

    pub fn tag(&self) -> EnsembleTag {
        match *self {
            Ensemble::Gaussian { rho_x } if rho_x != 0.0 => EnsembleTag::GaussianCorrelated,
            Ensemble::Gaussian { .. } => EnsembleTag::Gaussian,
            Ensemble::ConstantModulus => EnsembleTag::ConstantModulus,
        }
    }
}

/// Draws independent rows of a given ensemble.
#[derive(Debug, Clone)]
pub struct RowSampler {
    ensemble: Ensemble,
    n_tx: usize,
    amplitude: f64,
    /// Lower Cholesky factor of `Σ_x`; `None` when `Σ_x = I`.
    coloring: Option<DMatrix<f64>>,
}

impl RowSampler {
    pub fn new(ensemble: Ensemble, n_tx: usize, p_t: f64) -> Result<Self> {
        if n_tx == 0 {
            return Err(Error::invalid("n_tx", "must be at least 1"));
        }
        if !(p_t.is_finite() && p_t > 0.0) {
            return Err(Error::invalid("p_t", format!("must be positive, got {p_t}")));
        }
        let coloring = match ensemble {
            Ensemble::Gaussian { rho_x } => {
                if !(rho_x.is_finite() && (0.0..1.0).contains(&rho_x)) {
                    return Err(Error::invalid("rho_x", format!("{rho_x} outside [0, 1)")));
                }
                if rho_x == 0.0 || n_tx == 1 {
                    None
                } else {
                    let sigma = equicorrelation_real(n_tx, 1.0, rho_x, "rho_x")?;
                    let chol = sigma.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
                        what: format!("waveform correlation (rho_x = {rho_x})"),
                    })?;
                    Some(chol.l())
                }
            }
            Ensemble::ConstantModulus => None,
        };
        Ok(RowSampler {
            ensemble,
            n_tx,
            amplitude: p_t.sqrt(),
            coloring,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    /// Fills `out` (length `N`) with one row.
    pub fn fill_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.n_tx);
        match self.ensemble {
            Ensemble::Gaussian { .. } => {
                let s = self.amplitude * std::f64::consts::FRAC_1_SQRT_2;
                for v in out.iter_mut() {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    *v = Complex64::new(re * s, im * s);
                }
                if let Some(l) = &self.coloring {
                    // x = L z, so E[x xᴴ] = L Lᵀ = Σ_x.
                    let z: Vec<Complex64> = out.to_vec();
                    for (i, v) in out.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, zj) in z.iter().enumerate().take(i + 1) {
                            acc += *zj * l[(i, j)];
                        }
                        *v = acc;
                    }
                }
            }
            Ensemble::ConstantModulus => {
                for v in out.iter_mut() {
                    let theta: f64 = rng.random_range(0.0..2.0 * PI);
                    *v = Complex64::from_polar(self.amplitude, theta);
                }
            }
        }
    }

    /// `rows × N` matrix drawn from the stream `(seed, WAVEFORM, 0)`.
    pub fn sample_matrix(&self, rows: usize, seed: u64) -> CMatrix {
        self.sample_matrix_with(rows, &mut rng::stream(seed, rng::domain::WAVEFORM, 0))
    }

    pub fn sample_matrix_with<R: Rng + ?Sized>(&self, rows: usize, rng: &mut R) -> CMatrix {
        let mut x = CMatrix::zeros(rows, self.n_tx);
        let mut row = vec![Complex64::new(0.0, 0.0); self.n_tx];
        for i in 0..rows {
            self.fill_row(rng, &mut row);
            for (j, v) in row.iter().enumerate() {
                x[(i, j)] = *v;
            }
        }
        x
    }
}

/// Transmit samples `X` with their Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix {
    x: CMatrix,
    gram: CMatrix,
    tag: EnsembleTag,
    seed: u64,
}

impl WaveformMatrix {
    pub fn new(x: CMatrix, tag: EnsembleTag, seed: u64) -> Self {
        let gram = linalg::hermitian_part(&(x.adjoint() * &x));
        WaveformMatrix { x, gram, tag, seed }
    }

    /// Draws `rows` samples of `ensemble`.
    pub fn draw(ensemble: Ensemble, n_tx: usize, p_t: f64, rows: usize, seed: u64) -> Result<Self> {
        let sampler = RowSampler::new(ensemble, n_tx, p_t)?;
        Ok(Self::new(sampler.sample_matrix(rows, seed), ensemble.tag(), seed))
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    /// `X̌ = XᴴX`.
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn tag(&self) -> EnsembleTag {
        self.tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.x.ncols()
    }

    /// Waveform made of the first `rows` samples of this one.
    pub fn prefix(&self, rows: usize) -> Self {
        let rows = rows.min(self.rows());
        Self::new(self.x.rows(0, rows).into_owned(), self.tag, self.seed)
    }

    /// Writes `X` as CSV: a header, then one line per sample row with
    /// `re, im` pairs for each antenna.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.n_tx())
            .flat_map(|n| [format!("re_{n}"), format!("im_{n}")])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.rows() {
            let line: Vec<String> = (0..self.n_tx())
                .flat_map(|n| {
                    let v = self.x[(i, n)];
                    [crate::fmt_float(v.re), crate::fmt_float(v.im)]
                })
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Gaussian waveform with spatial correlation `rho_x` over `2·B·N_CPI` rows.
pub fn gen_gaussian(cfg: &SystemConfig, rho_x: f64, seed: u64) -> Result<WaveformMatrix> {
    cfg.validate()?;
    WaveformMatrix::draw(
        Ensemble::Gaussian { rho_x },
        cfg.n_tx,
        cfg.p_t,
        cfg.samples_per_cpi(),
        seed,
    )
}

/// Constant-modulus waveform with uniform phases over `2·B·N_CPI` rows.
pub fn gen_constant_modulus(cfg: &SystemConfig, seed: u64) -> Result<WaveformMatrix> {
    cfg.validate()?;
    WaveformMatrix::draw(
        Ensemble::ConstantModulus,
        cfg.n_tx,
        cfg.p_t,
        cfg.samples_per_cpi(),
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n_tx: usize, n_cpi: usize) -> SystemConfig {
        SystemConfig {
            n_tx,
            n_cpi,
            ..SystemConfig::baseline()
        }
    }

    fn sample_covariance(x: &CMatrix) -> CMatrix {
        x.adjoint() * x / Complex64::new(x.nrows() as f64, 0.0)
    }

    #[test]
    fn single_antenna_ignores_rho_x() {
        let c = cfg(1, 50);
        let a = gen_gaussian(&c, 0.0, 11).unwrap();
        let b = gen_gaussian(&c, 0.7, 11).unwrap();
        assert_eq!(a.x(), b.x());
    }

    #[test]
    fn gaussian_sample_covariance() {
        let c = SystemConfig {
            p_t: 2.0,
            ..cfg(4, 50_000)
        };
        let w = gen_gaussian(&c, 0.0, 3).unwrap();
        let target = CMatrix::identity(4, 4) * Complex64::new(2.0, 0.0);
        let err = (sample_covariance(w.x()) - &target).norm() / target.norm();
        assert!(err < 0.02, "relative error {err}");

        let w = gen_gaussian(&c, 0.5, 4).unwrap();
        let target = crate::covariance::build_equicorrelation(4, 1.0, 0.5).unwrap() * Complex64::new(2.0, 0.0);
        let err = (sample_covariance(w.x()) - &target).norm() / target.norm();
        assert!(err < 0.02, "relative error {err}");
        assert_eq!(w.tag(), EnsembleTag::GaussianCorrelated);
    }

    #[test]
    fn rho_x_out_of_range() {
        let c = cfg(4, 4);
        assert!(gen_gaussian(&c, 1.0, 0).is_err());
        assert!(gen_gaussian(&c, -0.1, 0).is_err());
    }

    #[test]
    fn constant_modulus_entries_and_gram() {
        let c = SystemConfig {
            p_t: 3.0,
            ..cfg(1, 64)
        };
        let w = gen_constant_modulus(&c, 9).unwrap();
        for v in w.x().iter() {
            assert_relative_eq!(v.norm_sqr(), 3.0, max_relative = 1e-15);
        }
        assert_relative_eq!(w.gram()[(0, 0)].re, 128.0 * 3.0, max_relative = 1e-14);
        assert_eq!(w.gram()[(0, 0)].im, 0.0);
    }

    #[test]
    fn constant_modulus_cross_terms_are_random_walks() {
        let c = cfg(4, 16);
        let rows = c.samples_per_cpi() as f64;
        let draws = 10_000;
        let mut acc = 0.0;
        for t in 0..draws {
            let w = gen_constant_modulus(&c, t).unwrap();
            let g = w.gram();
            acc += g[(0, 1)].norm_sqr() / rows;
        }
        let mean = acc / draws as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean normalized |gram(0,1)|² = {mean}");
    }

    #[test]
    fn gram_and_determinism() {
        let c = cfg(3, 20);
        let a = gen_gaussian(&c, 0.2, 42).unwrap();
        let b = gen_gaussian(&c, 0.2, 42).unwrap();
        assert_eq!(a, b);
        let x = a.x();
        for m in 0..3 {
            for n in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..x.nrows() {
                    s += x[(i, m)].conj() * x[(i, n)];
                }
                assert!((s - a.gram()[(m, n)]).norm() < 1e-10);
            }
        }
        assert_ne!(a.x(), gen_gaussian(&c, 0.2, 43).unwrap().x());
    }

    #[test]
    fn mean_power_and_diagonality() {
        let c = cfg(4, 128);
        let rows = c.samples_per_cpi();
        for make in [
            |c: &SystemConfig, s| gen_gaussian(c, 0.0, s).unwrap(),
            |c: &SystemConfig, s| gen_constant_modulus(c, s).unwrap(),
        ] {
            let mut power = 0.0;
            let mut count = 0usize;
            let mut mean_gram = CMatrix::zeros(4, 4);
            let draws = 1000;
            for s in 0..draws {
                let w = make(&c, s);
                power += w.x().iter().map(|v| v.norm_sqr()).sum::<f64>();
                count += w.x().len();
                mean_gram += w.gram();
            }
            assert!((power / count as f64 - 1.0).abs() < 0.01);
            mean_gram /= Complex64::new((draws as usize * rows) as f64, 0.0);
            for m in 0..4 {
                for n in 0..4 {
                    let v = mean_gram[(m, n)];
                    if m == n {
                        assert!((v.re - 1.0).abs() < 0.01);
                    } else {
                        assert!(v.norm() <= 3.0 / (rows as f64).sqrt());
                    }
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let c = cfg(2, 1);
        let w = gen_constant_modulus(&c, 1).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "re_0,im_0,re_1,im_1");
        assert_eq!(lines.len(), 3);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_relative_eq!(first[2], w.x()[(0, 1)].re, max_relative = 1e-11);
        assert_relative_eq!(first[3], w.x()[(0, 1)].im, max_relative = 1e-11);
    }
}
