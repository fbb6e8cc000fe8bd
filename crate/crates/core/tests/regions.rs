use isac_limits::metrics::{cmi_per_re, draw_comm_channel};
use isac_limits::regions::{classify_regions, default_grid, point_labels, sweep_region, DEFAULT_GRID_POINTS};
use isac_limits::{build_prefix_channel_model, CorrelationSpec, Mode, RegionCurve, RegionLabel, SystemConfig};

fn baseline_curve(u_isac: usize, mode: Mode) -> RegionCurve {
    let cfg = SystemConfig::baseline();
    let corr = CorrelationSpec::baseline();
    let h_c = draw_comm_channel(&cfg, 1);
    let model = build_prefix_channel_model(&cfg, &corr, 16).unwrap();
    let grid = default_grid(u_isac, DEFAULT_GRID_POINTS);
    sweep_region(&cfg, &corr, &h_c, &model, u_isac, &grid, mode, 1).unwrap()
}

#[test]
fn approx_curve_shows_all_three_regions() {
    let curve = baseline_curve(10_000, Mode::Approx);
    assert_eq!(curve.points.len(), 51);
    let segs = classify_regions(&curve, 0.1).unwrap();
    for label in [RegionLabel::TradeOff, RegionLabel::CommunicationSaturation, RegionLabel::SensingSaturation] {
        assert!(segs.iter().any(|s| s.label == label), "{label} missing from {segs:?}");
    }
    let labels = point_labels(&segs, curve.points.len());
    assert_eq!(labels.len(), 51);
    assert_eq!(labels[0], RegionLabel::CommunicationSaturation);
    assert_eq!(labels[50], RegionLabel::SensingSaturation);
}

#[test]
fn exact_curve_is_monotone_and_classifiable() {
    let curve = baseline_curve(10_000, Mode::Exact);
    assert!(classify_regions(&curve, 0.1).is_ok());
    let first = &curve.points[0];
    assert_eq!((first.u_c, first.u_s), (0, 10_000));
    let last = curve.points.last().unwrap();
    assert_eq!((last.u_c, last.u_s, last.smi_bits), (10_000, 0, 0.0));
}

#[test]
fn pure_communication_endpoint_is_linear_in_resources() {
    let cfg = SystemConfig::baseline();
    let h_c = draw_comm_channel(&cfg, 1);
    let per_re = cmi_per_re(&cfg, &h_c, 0.0).unwrap();
    for mode in [Mode::Exact, Mode::Approx] {
        let last = *baseline_curve(10_000, mode).points.last().unwrap();
        assert_eq!(last.cmi_bits, 10_000.0 * per_re);
    }
}

#[test]
fn larger_budget_dominates() {
    for mode in [Mode::Exact, Mode::Approx] {
        let small = baseline_curve(5_000, mode);
        let large = baseline_curve(10_000, mode);
        for (a, b) in small.points.iter().zip(&large.points) {
            assert!(a.cmi_bits <= b.cmi_bits);
            assert!(a.smi_bits <= b.smi_bits + 1e-9);
            assert!(a.mse_bound >= b.mse_bound - 1e-15);
        }
    }
}

#[test]
fn exact_and_approx_agree_at_large_sensing_budgets() {
    let exact = baseline_curve(10_000, Mode::Exact);
    let approx = baseline_curve(10_000, Mode::Approx);
    for (e, a) in exact.points.iter().zip(&approx.points) {
        if e.u_s >= 1000 {
            assert!((e.smi_bits - a.smi_bits).abs() <= 0.01 * e.smi_bits, "{e:?} vs {a:?}");
        }
    }
}

#[test]
fn csv_has_header_and_one_row_per_point() {
    let curve = baseline_curve(1_000, Mode::Approx);
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "u_c,u_s,cmi_bits,smi_bits,mse_bound,mode");
    assert_eq!(lines.count(), curve.points.len());
}
