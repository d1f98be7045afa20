use std::time::Instant;

use reclasso::datagen::{simulate_arx, SimConfig};
use reclasso::tuning::{
    online_evaluate, rolling_validate, rolling_window_evaluate, SplitConfig, UpdateRule,
};
use reclasso_cli::experiment::anchored_grid;

#[test]
fn scratch_one_rep_timing() {
    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 1729;
    let (series, _) = simulate_arx(&sim).unwrap();
    let split = SplitConfig::thirds(series.len());

    let t = Instant::now();
    let grid = anchored_grid(&series, 12, 12, split.t1(), 50).unwrap();
    eprintln!("grid: {:?}", t.elapsed());

    let t = Instant::now();
    let v = rolling_validate(&series, 12, 12, &grid, &split).unwrap();
    eprintln!("rolling_validate: {:?} selected {}", t.elapsed(), v.selected);

    let t = Instant::now();
    let traj = rolling_window_evaluate(&series, 12, 12, &grid, &split).unwrap();
    eprintln!(
        "rolling_window_evaluate: {:?} fallbacks {}",
        t.elapsed(),
        traj.entries().iter().filter(|e| e.fallback).count()
    );

    for (label, rule) in [
        ("static", UpdateRule::Static),
        ("gradient", UpdateRule::Gradient { eta: 0.1 }),
        ("newton", UpdateRule::Newton),
    ] {
        let t = Instant::now();
        let traj = online_evaluate(&series, 12, 12, rule, v.selected, &split).unwrap();
        eprintln!(
            "online {label}: {:?} fallbacks {}",
            t.elapsed(),
            traj.entries().iter().filter(|e| e.fallback).count()
        );
    }
}

#[test]
fn scratch_ic_timing() {
    use reclasso::arx::{build_lag_design, fit_ols, ic_lag_select, InfoCriterion};

    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 1729;
    let (series, _) = simulate_arx(&sim).unwrap();
    let split = SplitConfig::thirds(series.len());

    let t = Instant::now();
    let head = series.prefix(split.t2());
    let (p_hat, s_hat) = ic_lag_select(&head, 12, 12, InfoCriterion::Aic).unwrap();
    eprintln!("ic_lag_select: {:?} -> ({p_hat},{s_hat})", t.elapsed());

    let t = Instant::now();
    let design = build_lag_design(&series, p_hat, s_hat).unwrap();
    for tt in split.t2()..design.series_len() {
        let (z, y) = design.rows_before_time(tt);
        let _ = fit_ols(&z, &y).unwrap();
    }
    eprintln!("per-step OLS: {:?}", t.elapsed());
}

#[test]
fn scratch_all_reps_timing() {
    for rep in 0..25u64 {
        let mut sim = SimConfig::new(10, 12, 12, 250);
        sim.seed = 1729 + rep;
        let (series, _) = simulate_arx(&sim).unwrap();
        let split = SplitConfig::thirds(series.len());
        eprintln!("rep {rep}: starting");
        let t = Instant::now();
        let grid = anchored_grid(&series, 12, 12, split.t1(), 50).unwrap();
        eprintln!("rep {rep}: grid done");
        let v = rolling_validate(&series, 12, 12, &grid, &split).unwrap();
        let tv = t.elapsed();
        eprintln!("rep {rep}: validate done {tv:?}");
        let t = Instant::now();
        let traj = rolling_window_evaluate(&series, 12, 12, &grid, &split).unwrap();
        let tw = t.elapsed();
        eprintln!(
            "rep {rep}: validate {tv:?} window {tw:?} fallbacks {}",
            traj.entries().iter().filter(|e| e.fallback).count()
        );
    }
}

#[test]
fn scratch_rep1_profile() {
    use reclasso::arx::build_lag_design;
    use reclasso::homotopy::ActiveModel;

    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 1730;
    let (series, _) = simulate_arx(&sim).unwrap();
    let split = SplitConfig::thirds(series.len());
    let design = build_lag_design(&series, 12, 12).unwrap();
    let grid = anchored_grid(&series, 12, 12, split.t1(), 50).unwrap();

    for (i, &lambda) in grid.values().iter().enumerate() {
        let t = Instant::now();
        let (z0, y0) = design.rows_before_time(split.t1());
        let mut model = ActiveModel::fit(&z0, &y0, lambda).unwrap();
        let mut events = 0usize;
        let mut worst = 0usize;
        for tt in split.t1()..split.t2() {
            let z = design.row_for_time(tt);
            let actual = design.response_at_time(tt);
            let out = model.update(actual, &z, lambda).unwrap();
            let n = out.gamma_events.len() + out.lambda_events.len();
            events += n;
            worst = worst.max(n);
        }
        eprintln!(
            "grid {i:2} lambda {lambda:9.4}: {:8.1?} active {:3} events {events:5} worst {worst:4}",
            t.elapsed(),
            model.active().len()
        );
    }
}
