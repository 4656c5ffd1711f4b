use profitscale_web::{blocking_curve_points, profit_curve_data, sensitivity_points, MAX_FLEET};

#[test]
fn blocking_curve_matches_reference_and_decreases() {
    let pts = blocking_curve_points(8.0, 1.0, 30).unwrap();
    assert_eq!(pts.len(), 31);
    assert_eq!(pts[0].erlang, 1.0);
    assert!((pts[10].erlang - 0.12166).abs() < 1e-5);
    assert_eq!(pts[10].erlang, pts[10].hayward);
    assert!(pts.windows(2).all(|w| w[1].erlang < w[0].erlang));
}

#[test]
fn bursty_arrivals_block_more() {
    let pts = blocking_curve_points(8.0, 2.0, 20).unwrap();
    assert!(pts[1..].iter().all(|p| p.hayward > p.erlang));
}

#[test]
fn profit_curve_peaks_at_optimal_decision() {
    let c = profit_curve_data(300.0, 28.571, 1.0, 0.0017, 17.0, 5.0, 12, 40, 4.0).unwrap();
    assert_eq!(c.profit.len(), 41);
    let argmax = c
        .profit
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(c.optimal.n_next as usize, argmax);
    assert!(c.grassmann.n_next >= c.qed.n_next);
}

#[test]
fn sensitivity_sweep_rows() {
    let pts =
        sensitivity_points("t_U", 0.0, 50.0, 11, 300.0, 28.571, 0.0017, 17.0, 15, 60).unwrap();
    assert_eq!(pts.len(), 11);
    assert!(pts.windows(2).all(|w| w[1].n_plus <= w[0].n_plus));
    let charge =
        sensitivity_points("charge", 0.0, 0.004, 5, 300.0, 28.571, 0.0017, 17.0, 15, 60).unwrap();
    assert_eq!(charge[0].n_next, 0);
}

#[test]
fn bad_input_is_an_error() {
    assert!(blocking_curve_points(-1.0, 1.0, 10).is_err());
    assert!(blocking_curve_points(5.0, 1.0, MAX_FLEET + 1).is_err());
    assert!(sensitivity_points("zzz", 0.0, 1.0, 3, 1.0, 1.0, 0.0017, 17.0, 0, 10).is_err());
    assert!(profit_curve_data(1.0, 0.0, 1.0, 0.0017, 17.0, 5.0, 0, 10, 0.0).is_err());
}
