mod common;

use approx::assert_relative_eq;
use common::*;
use isac_limits::metrics::{smi_full_channel, smi_partial_channel};
use isac_limits::{EnsembleTag, SensingChannelModel, SystemConfig, WaveformMatrix};
use proptest::prelude::*;

fn cfg(n_tx: usize, m_s: usize, sigma2: f64) -> SystemConfig {
    SystemConfig {
        n_tx,
        m_s,
        sigma2_ns: sigma2,
        ..SystemConfig::baseline()
    }
}

#[test]
fn scalar_full_channel_matches_hand_value() {
    // x = [1, 1], R_H = 2, σ² = 0.5: log₂(1 + 2·2/0.5) = log₂ 9.
    let x = CMatrix::from_element(2, 1, c(1.0));
    let wave = WaveformMatrix::new(x.clone(), EnsembleTag::Gaussian, 0);
    let r_h = CMatrix::from_element(1, 1, c(2.0));
    let model = SensingChannelModel::from_covariance(r_h.clone(), &[0]).unwrap();
    let got = smi_full_channel(&wave, &model, &cfg(1, 1, 0.5)).unwrap();
    assert_relative_eq!(got, 9f64.log2(), max_relative = 1e-14);
    assert_relative_eq!(brute_force_smi(&x, &r_h, &[0], 1, 0.5), 9f64.log2(), max_relative = 1e-12);
}

#[test]
fn reduced_smi_matches_full_dimension_on_fixed_instances() {
    for seed in 0..40u64 {
        let n_tx = 1 + (seed % 3) as usize;
        let m_s = 1 + (seed / 3 % 2) as usize;
        let rows = 1 + (seed / 6 % 4) as usize;
        let dim = n_tx * m_s;
        let k = 1 + (seed as usize % dim);
        let x = random_matrix(rows, n_tx, seed);
        let r_h = random_hpd(dim, seed + 1000);
        let s = random_subset(dim, k, seed + 2000);
        let sigma2 = 0.05 + (seed % 7) as f64 * 0.3;
        let wave = WaveformMatrix::new(x.clone(), EnsembleTag::Gaussian, seed);
        let model = SensingChannelModel::from_covariance(r_h.clone(), &s).unwrap();
        let got = smi_partial_channel(&wave, &model, &cfg(n_tx, m_s, sigma2)).unwrap();
        let want = brute_force_smi(&x, &r_h, &s, m_s, sigma2);
        assert!(
            (got - want).abs() <= 1e-8 * want.abs().max(1e-12),
            "seed {seed}: reduced {got} vs full {want}"
        );
    }
}

#[test]
fn rank_deficient_waveform_is_handled() {
    // Identical columns: X̌ has rank one.
    let col = random_matrix(4, 1, 3);
    let x = CMatrix::from_fn(4, 2, |i, _| col[(i, 0)]);
    let r_h = random_hpd(4, 4);
    let s = [2, 0];
    let wave = WaveformMatrix::new(x.clone(), EnsembleTag::Gaussian, 0);
    let model = SensingChannelModel::from_covariance(r_h.clone(), &s).unwrap();
    let got = smi_partial_channel(&wave, &model, &cfg(2, 2, 0.3)).unwrap();
    assert_relative_eq!(got, brute_force_smi(&x, &r_h, &s, 2, 0.3), max_relative = 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduction_agrees_with_full_dimension(
        n_tx in 1usize..=3, m_s in 1usize..=2, rows in 1usize..=4,
        seed in any::<u64>(), k_frac in 0.0f64..1.0, sigma2 in 0.01f64..5.0,
    ) {
        let dim = n_tx * m_s;
        let k = 1 + ((k_frac * dim as f64) as usize).min(dim - 1);
        let x = random_matrix(rows, n_tx, seed);
        let r_h = random_hpd(dim, seed ^ 0x55);
        let s = random_subset(dim, k, seed ^ 0xaa);
        let wave = WaveformMatrix::new(x.clone(), EnsembleTag::Gaussian, seed);
        let model = SensingChannelModel::from_covariance(r_h.clone(), &s).unwrap();
        let got = smi_partial_channel(&wave, &model, &cfg(n_tx, m_s, sigma2)).unwrap();
        let want = brute_force_smi(&x, &r_h, &s, m_s, sigma2);
        prop_assert!((got - want).abs() <= 1e-8 * want.abs().max(1e-12), "{got} vs {want}");
    }

    #[test]
    fn smi_is_nonnegative_and_grows_with_rows(
        n_tx in 1usize..=3, m_s in 1usize..=2, seed in any::<u64>(), sigma2 in 0.01f64..5.0,
    ) {
        let dim = n_tx * m_s;
        let k = 1 + (seed as usize % dim);
        let x = random_matrix(6, n_tx, seed);
        let r_h = random_hpd(dim, seed ^ 1);
        let s = random_subset(dim, k, seed ^ 2);
        let model = SensingChannelModel::from_covariance(r_h, &s).unwrap();
        let c = cfg(n_tx, m_s, sigma2);
        let wave = WaveformMatrix::new(x, EnsembleTag::Gaussian, seed);
        let mut prev = 0.0;
        for rows in 1..=6 {
            let v = smi_partial_channel(&wave.prefix(rows), &model, &c).unwrap();
            prop_assert!(v >= prev - 1e-9, "rows {rows}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn smi_shrinks_as_noise_grows(
        n_tx in 1usize..=3, m_s in 1usize..=2, seed in any::<u64>(), sigma2 in 0.01f64..5.0,
    ) {
        let dim = n_tx * m_s;
        let x = random_matrix(3, n_tx, seed);
        let r_h = random_hpd(dim, seed ^ 7);
        let s = random_subset(dim, 1 + (seed as usize % dim), seed ^ 9);
        let model = SensingChannelModel::from_covariance(r_h, &s).unwrap();
        let wave = WaveformMatrix::new(x, EnsembleTag::Gaussian, seed);
        let lo = smi_partial_channel(&wave, &model, &cfg(n_tx, m_s, sigma2)).unwrap();
        let hi = smi_partial_channel(&wave, &model, &cfg(n_tx, m_s, 2.0 * sigma2)).unwrap();
        prop_assert!(hi <= lo + 1e-9);
    }
}

#[test]
fn baseline_partial_channel_matches_full_dimension() {
    use isac_limits::{build_prefix_channel_model, CorrelationSpec, Ensemble};
    let cfg = SystemConfig::baseline();
    let model = build_prefix_channel_model(&cfg, &CorrelationSpec::baseline(), 16).unwrap();
    let wave = WaveformMatrix::draw(Ensemble::gaussian(), 4, 1.0, 8, 13).unwrap();
    let got = smi_partial_channel(&wave, &model, &cfg).unwrap();
    let want = brute_force_smi(wave.x(), model.r_h(), model.s_indices(), cfg.m_s, cfg.sigma2_ns);
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
}
