//! One pass through the public surface: simulate a sparse AR-X process,
//! validate a penalty grid, and run every online evaluation rule on the
//! same series.

use reclasso::arx::build_lag_design;
use reclasso::datagen::{simulate_arx, SimConfig};
use reclasso::tuning::{
    default_grid, online_evaluate, rolling_validate, rolling_window_evaluate,
    SplitConfig, UpdateRule,
};

#[test]
fn simulate_validate_and_evaluate_end_to_end() {
    let mut cfg = SimConfig::new(4, 3, 2, 150);
    cfg.seed = 90210;
    let (series, truth) = simulate_arx(&cfg).unwrap();
    assert_eq!(series.len(), 150);
    assert!(!truth.support.is_empty());

    let design = build_lag_design(&series, 3, 2).unwrap();
    assert_eq!(design.n_cols(), 3 + 4 * 2);

    let split = SplitConfig::thirds(series.len());
    let grid = default_grid(&design, 12).unwrap();
    let validation = rolling_validate(&series, 3, 2, &grid, &split).unwrap();
    assert!(validation.selected > 0.0);
    assert!(validation.msfe[validation.selected_index].is_finite());

    for rule in [
        UpdateRule::Static,
        UpdateRule::Gradient { eta: 0.1 },
        UpdateRule::Newton,
    ] {
        let traj =
            online_evaluate(&series, 3, 2, rule, validation.selected, &split).unwrap();
        assert_eq!(traj.entries().len(), series.len() - split.t2());
        for e in traj.entries() {
            assert!(e.lambda > 0.0, "penalty stayed positive");
            assert!(e.squared_error >= 0.0);
            assert!(e.forecast.is_finite());
        }
    }

    let rolling = rolling_window_evaluate(&series, 3, 2, &grid, &split).unwrap();
    for e in rolling.entries() {
        assert!(
            grid.values().iter().any(|&g| g == e.lambda),
            "rolling-window selections come from the grid"
        );
    }
}

#[test]
fn a_long_absorption_thread_tracks_the_direct_solver() {
    // A wide design absorbed one row at a time at a fixed penalty. This
    // specific penalty makes one correlation graze the boundary mid-path
    // (enter immediately followed by a rounding-phantom leave candidate),
    // which once stranded the feature outside the model while its
    // violation grew; the thread must stay on the direct solver's optimum
    // the whole way.
    use nalgebra::{DMatrix, DVector};
    use reclasso::homotopy::ActiveModel;
    use reclasso::lasso::{coordinate_descent_cov, CdSettings};

    let mut cfg = SimConfig::new(10, 12, 12, 250);
    cfg.seed = 404;
    let (series, _) = simulate_arx(&cfg).unwrap();
    let design = build_lag_design(&series, 12, 12).unwrap();
    let grid = default_grid(&design, 50).unwrap();
    let lambda = grid.values()[34];

    let (z0, y0) = design.rows_before_time(83);
    let mut model = ActiveModel::fit(&z0, &y0, lambda).unwrap();
    let mut rows: Vec<DVector<f64>> = (0..z0.nrows()).map(|i| z0.row(i).transpose()).collect();
    let mut targets: Vec<f64> = y0.iter().copied().collect();

    for t in 83..130 {
        let z = design.row_for_time(t);
        let actual = design.response_at_time(t);
        model.update(actual, &z, lambda).unwrap();
        rows.push(z);
        targets.push(actual);
        model.check_consistency(1e-7).unwrap();
    }

    let zfull = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let yfull = DVector::from_vec(targets);
    let settings = CdSettings {
        tol: 1e-12,
        max_sweeps: 1_000_000,
    };
    let oracle = coordinate_descent_cov(
        &(zfull.transpose() * &zfull),
        &(zfull.transpose() * &yfull),
        lambda,
        None,
        settings,
    )
    .unwrap();
    let diff = (model.phi_dense() - &oracle.phi).abs().max();
    assert!(diff <= 1e-6, "thread drifted from the direct solver by {diff}");
}
