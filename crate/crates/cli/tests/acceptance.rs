//! The release gate: every binding correctness, ordering, timing, and
//! reproducibility requirement as one test per criterion. Each test
//! prints a single `criterion N: PASS/FAIL` line (visible under
//! `--nocapture`) in addition to its assertion.
//!
//! Oracles are independent re-solves: cyclic coordinate descent for
//! coefficients, central finite differences for gradients, and a
//! from-scratch refit loop for the validation curve. The incremental
//! path algorithms must agree with them at the stated tolerances.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use reclasso::arx::build_lag_design;
use reclasso::datagen::{simulate_arx, SimConfig};
use reclasso::homotopy::ActiveModel;
use reclasso::lasso::{coordinate_descent, kkt_check, lambda_max, CdSettings, LassoProblem};
use reclasso::tuning::{
    default_grid, grad_log_lambda, newton_update, online_evaluate, rolling_validate,
    PenaltyGrid, SplitConfig, UpdateRule,
};
use reclasso_cli::bench::{run_bench, BenchConfig};
use reclasso_cli::experiment::{
    run_experiment, DataSource, EvaluationReport, ExperimentConfig, Method,
};

fn randn(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random regression data with a sparse ground truth.
fn random_design(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let z = DMatrix::from_fn(n, m, |_, _| randn(rng));
    let mut beta = DVector::zeros(m);
    for j in 0..m {
        if rng.random_bool(0.3) {
            beta[j] = 2.0 * randn(rng);
        }
    }
    let y = &z * &beta + DVector::from_fn(n, |_, _| 0.5 * randn(rng));
    (z, y, beta)
}

fn cd_solve(z: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, tol: f64) -> DVector<f64> {
    let p = LassoProblem::new(z.clone(), y.clone(), lambda).unwrap();
    let settings = CdSettings {
        tol,
        max_sweeps: 2_000_000,
    };
    coordinate_descent(&p, None, settings).unwrap().phi
}

fn verdict(criterion: u32, what: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} ({what}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({what}): {detail}");
}

/// The desk-scale evaluation shared by criteria 5 and 8: 25 replications
/// of the 10-exogenous-series, 12-lag, 250-observation configuration with
/// every method enabled.
fn shared_experiment() -> &'static EvaluationReport {
    static REPORT: OnceLock<EvaluationReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let cfg = ExperimentConfig {
            source: DataSource::Simulate(SimConfig::new(10, 12, 12, 250)),
            p: 12,
            s: 12,
            grid_size: 50,
            eta: 0.1,
            methods: Method::ALL.to_vec(),
            reps: 25,
            seed: 1729,
            train_frac: None,
            normalize: false,
        };
        run_experiment(&cfg).expect("desk-scale evaluation runs")
    })
}

fn summary_of(report: &EvaluationReport, method: Method) -> f64 {
    report
        .methods
        .iter()
        .find(|s| s.method == method)
        .unwrap_or_else(|| panic!("summary for {method:?}"))
        .relative_msfe
}

#[test]
fn criterion_1_sequential_updates_match_the_direct_solver() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let trials = 200;
    let mut checked_states = 0usize;
    let mut worst = 0.0f64;

    for trial in 0..trials {
        // Trial 0 pins the size caps; the rest sample below them, skewed
        // toward small designs so the oracle stays fast.
        let (n_init, m, updates) = if trial == 0 {
            (200, 150, 50)
        } else {
            let r: f64 = rng.random();
            let m = 5 + (r * r * 115.0) as usize;
            let n_init = rng.random_range(20..=180);
            let updates = rng.random_range(10..=50);
            (n_init, m, updates)
        };
        let (z0, y0, beta) = random_design(&mut rng, n_init, m);
        let lambda = rng.random_range(0.15..0.7) * lambda_max(&z0, &y0);
        let mut model = ActiveModel::fit(&z0, &y0, lambda).unwrap();

        let mut rows: Vec<DVector<f64>> =
            (0..n_init).map(|i| z0.row(i).transpose()).collect();
        let mut targets: Vec<f64> = y0.iter().copied().collect();

        for step in 0..updates {
            let znew = DVector::from_fn(m, |_, _| randn(&mut rng));
            let ynew = znew.dot(&beta) + 0.5 * randn(&mut rng);
            model.update(ynew, &znew, lambda).unwrap();
            rows.push(znew);
            targets.push(ynew);

            let zfull = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
            let yfull = DVector::from_vec(targets.clone());
            let oracle = cd_solve(&zfull, &yfull, lambda, 1e-12);
            let diff = (model.phi_dense() - &oracle).amax();
            assert!(
                diff <= 1e-6,
                "trial {trial} step {step} (n={} m={m}): {diff} from oracle",
                rows.len()
            );
            worst = worst.max(diff);

            let prob = LassoProblem::new(zfull, yfull, lambda).unwrap();
            let violations = kkt_check(&prob, &model.phi_dense(), 1e-6);
            assert!(
                violations.is_empty(),
                "trial {trial} step {step}: optimality violations {violations:?}"
            );
            checked_states += 1;
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        "sequential updates match the direct solver",
        elapsed < 120.0,
        &format!(
            "{trials} trials, {checked_states} states within 1e-6 (worst {worst:.2e}), \
             optimality at 1e-6, {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_2_penalty_path_matches_the_direct_solver_across_the_grid() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let problems = 50;
    let grid_n = 50;
    let mut worst = 0.0f64;

    for trial in 0..problems {
        let n = rng.random_range(20..=80);
        let m = rng.random_range(3..=25);
        let (z, y, _) = random_design(&mut rng, n, m);
        let grid = PenaltyGrid::log_spaced(lambda_max(&z, &y), grid_n).unwrap();

        // Start exactly at the top of the grid (the all-zero boundary)
        // and walk down, checking the endpoint against the oracle at
        // every stop.
        let mut model = ActiveModel::fit(&z, &y, grid.values()[0]).unwrap();
        for &target in grid.values() {
            model.lambda_path(target).unwrap();
            let oracle = cd_solve(&z, &y, target, 1e-12);
            let diff = (model.phi_dense() - &oracle).amax();
            assert!(
                diff <= 1e-6,
                "trial {trial} (n={n} m={m}) at penalty {target}: {diff} from oracle"
            );
            worst = worst.max(diff);
        }
    }

    verdict(
        2,
        "penalty path matches the direct solver across the grid",
        true,
        &format!(
            "{problems} problems x {grid_n}-point grid within 1e-6 (worst {worst:.2e}), \
             {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_penalty_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let h = 1e-5f64;
    let needed = 100;
    let mut accepted = 0usize;
    let mut tried = 0usize;
    let mut worst_rel = 0.0f64;
    let mut newton_checked = 0usize;

    while accepted < needed {
        tried += 1;
        assert!(tried < 50 * needed, "too many degenerate samples");
        let n = rng.random_range(30..=70);
        let m = rng.random_range(4..=12);
        let (z, y, beta) = random_design(&mut rng, n, m);
        let lambda = rng.random_range(0.2..0.6) * lambda_max(&z, &y);
        let model = match ActiveModel::fit(&z, &y, lambda) {
            Ok(model) => model,
            Err(_) => continue,
        };
        if model.active().is_empty() {
            continue;
        }
        let znew = DVector::from_fn(m, |_, _| randn(&mut rng));
        let ynew = znew.dot(&beta) + 0.5 * randn(&mut rng);

        // Oracle: central difference of the one-step error in the log
        // penalty. Support/sign solutions at the perturbed penalties come
        // from the independent solver; states where the active set moves
        // inside the stencil sit on a transition and are resampled.
        let supports: Vec<Vec<usize>> = [lambda * (-h).exp(), lambda * h.exp()]
            .iter()
            .map(|&l| {
                let phi = cd_solve(&z, &y, l, 1e-10);
                (0..m).filter(|&j| phi[j] != 0.0).collect()
            })
            .collect();
        if supports[0] != supports[1] || supports[0] != model.active().to_vec() {
            continue;
        }

        let err_at = |l: f64| -> f64 {
            // Exact coefficients on the (fixed) support, polished by a
            // linear solve so the stencil noise stays far below h^2.
            let phi = cd_solve(&z, &y, l, 1e-10);
            let active: Vec<usize> = (0..m).filter(|&j| phi[j] != 0.0).collect();
            let za = DMatrix::from_fn(n, active.len(), |i, c| z[(i, active[c])]);
            let gram = za.transpose() * &za;
            let mut rhs = za.transpose() * &y;
            for (c, &j) in active.iter().enumerate() {
                rhs[c] -= l * phi[j].signum();
            }
            let exact = gram.lu().solve(&rhs).expect("active Gram invertible");
            let fit: f64 = active
                .iter()
                .enumerate()
                .map(|(c, &j)| znew[j] * exact[c])
                .sum();
            (fit - ynew) * (fit - ynew)
        };
        let g_fd = (err_at(lambda * h.exp()) - err_at(lambda * (-h).exp())) / (2.0 * h);
        if g_fd.abs() < 1e-2 {
            continue;
        }

        let g = grad_log_lambda(&model, &znew, ynew);
        let rel = (g - g_fd).abs() / g_fd.abs();
        assert!(
            rel <= 1e-4,
            "state {accepted}: gradient {g} vs finite difference {g_fd} (rel {rel:.2e})"
        );
        worst_rel = worst_rel.max(rel);

        // Newton consistency: the update's log step must equal the ratio
        // of the separately assembled gradient and curvature factors.
        let step = newton_update(&model, &znew, ynew, lambda);
        if !step.skipped {
            let z_a = DVector::from_iterator(
                model.active().len(),
                model.active().iter().map(|&j| znew[j]),
            );
            let sens = model.gram_inverse().bilinear(&z_a, &model.sign_vector());
            let grad = -2.0 * lambda * sens * (model.predict(&znew) - ynew);
            let sigma = model
                .gram_inverse()
                .mul_vec(&(model.zty_active() - model.sign_vector() * (2.0 * lambda)));
            let hess = -2.0 * lambda * sens * (z_a.dot(&sigma) - ynew);
            let ratio = grad / hess;
            if ratio.abs() <= 1.0 {
                let logstep = (step.lambda / lambda).ln();
                assert!(
                    (logstep - ratio).abs() <= 1e-10,
                    "state {accepted}: newton step {logstep} vs ratio {ratio}"
                );
                newton_checked += 1;
            }
        }
        accepted += 1;
    }

    verdict(
        3,
        "penalty gradient matches finite differences",
        true,
        &format!(
            "{accepted} states within 1e-4 relative (worst {worst_rel:.2e}, \
             {tried} sampled), newton ratio identity on {newton_checked} states at 1e-10"
        ),
    );
}

#[test]
fn criterion_4_warm_validation_curve_matches_from_scratch_refits() {
    let start = Instant::now();
    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 404;
    let (series, _) = simulate_arx(&sim).unwrap();
    let split = SplitConfig::thirds(series.len());
    let design = build_lag_design(&series, 12, 12).unwrap();
    let grid = default_grid(&design, 50).unwrap();

    let warm = rolling_validate(&series, 12, 12, &grid, &split).unwrap();

    // Oracle: for every grid penalty, refit from scratch before each
    // validation step and score the same one-step forecasts.
    let width = split.t2() - split.t1();
    let mut naive = vec![0.0f64; grid.len()];
    for t in split.t1()..split.t2() {
        let (zt, yt) = design.rows_before_time(t);
        let row = design.row_for_time(t);
        let actual = design.response_at_time(t);
        for (i, &lambda) in grid.values().iter().enumerate() {
            let phi = cd_solve(&zt, &yt, lambda, 1e-10);
            let resid = actual - row.dot(&phi);
            naive[i] += resid * resid / width as f64;
        }
    }

    let mut worst = 0.0f64;
    for (i, &lambda) in grid.values().iter().enumerate() {
        let diff = (warm.msfe[i] - naive[i]).abs();
        assert!(
            diff <= 1e-6 * naive[i].max(1.0),
            "grid point {i} (penalty {lambda}): warm {} vs refit {} (diff {diff:.2e})",
            warm.msfe[i],
            naive[i]
        );
        worst = worst.max(diff);
    }

    verdict(
        4,
        "warm validation curve matches from-scratch refits",
        true,
        &format!(
            "50-point curve within 1e-6 (worst {worst:.2e}), selected penalty {:.4}, {:.0}s",
            warm.selected,
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_method_ordering_at_desk_scale() {
    let start = Instant::now();
    let report = shared_experiment();

    let gradient = summary_of(report, Method::Gradient);
    let newton = summary_of(report, Method::Newton);
    let rolling = summary_of(report, Method::RollingWindow);
    let mean = summary_of(report, Method::Mean);
    let walk = summary_of(report, Method::RandomWalk);
    let aic = summary_of(report, Method::Aic);
    let bic = summary_of(report, Method::Bic);
    let static_rel = summary_of(report, Method::Static);

    let detail = format!(
        "relative MSFE: static {static_rel:.4}, gradient {gradient:.4}, newton {newton:.4}, \
         rolling-window {rolling:.4}, mean {mean:.4}, random-walk {walk:.4}, \
         aic {aic:.4}, bic {bic:.4} ({:.0}s)",
        start.elapsed().as_secs_f64()
    );

    let online_beat_static = gradient < 1.0 && newton < 1.0;
    let online_beat_rolling = gradient < rolling && newton < rolling;
    let rolling_beats_baselines =
        rolling < mean && rolling < walk && rolling < aic && rolling < bic;
    let ic_poor = aic > 2.0 && bic > 2.0;

    // Advisory only: the expected band for the adaptive rules.
    let in_band = (0.95..=1.00).contains(&gradient) && (0.95..=1.00).contains(&newton);
    println!(
        "criterion 5 advisory: adaptive rules in [0.95, 1.00]: {}",
        if in_band { "yes" } else { "no" }
    );

    verdict(
        5,
        "method ordering at desk scale",
        static_rel == 1.0
            && online_beat_static
            && online_beat_rolling
            && rolling_beats_baselines
            && ic_poor,
        &detail,
    );
}

#[test]
fn criterion_6_online_updates_run_at_least_twice_as_fast() {
    let start = Instant::now();
    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 606;
    let mut cfg = BenchConfig::new(sim);
    cfg.iterations = 100;
    cfg.warmup = 3;
    cfg.window = 76;
    let report = run_bench(&cfg).unwrap();
    let timing = &report.timing;

    let rolling_mean = timing.rows[0].mean_ms;
    let gradient_mean = timing.rows[1].mean_ms;
    let newton_mean = timing.rows[2].mean_ms;

    verdict(
        6,
        "online updates run at least twice as fast",
        timing.speedup_gradient >= 2.0 && timing.speedup_newton >= 2.0,
        &format!(
            "means over {} iterations of a {}-step window: rolling {rolling_mean:.1}ms, \
             gradient {gradient_mean:.1}ms ({:.1}x), newton {newton_mean:.1}ms ({:.1}x); {:.0}s",
            timing.iterations,
            timing.window,
            timing.speedup_gradient,
            timing.speedup_newton,
            start.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_7_reports_are_byte_identical_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "evaluate", "--seed", "42", "--k", "6", "--t-len", "160", "--p", "6", "--s", "6",
        "--grid-size", "20", "--reps", "2",
    ];
    let mut outputs = Vec::new();
    for run in 0..2 {
        let json = dir.path().join(format!("report{run}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_reclasso"))
            .args(args)
            .arg("--json")
            .arg(&json)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push((std::fs::read(&json).unwrap(), out.stdout));
    }

    let json_identical = outputs[0].0 == outputs[1].0;
    let stdout_identical = outputs[0].1 == outputs[1].1;
    verdict(
        7,
        "reports are byte-identical under a fixed seed",
        json_identical && stdout_identical,
        &format!(
            "two runs of `evaluate --seed 42`: {} JSON bytes equal, stdout equal: {}",
            outputs[0].0.len(),
            stdout_identical
        ),
    );
}

#[test]
fn criterion_8_penalties_stay_positive_and_errors_precede_updates() {
    // Every penalty recorded across the desk-scale evaluation must be
    // positive, and each trajectory's first penalty must equal the
    // validated starting value — the forecast error is recorded before
    // the rule moves the penalty.
    let report = shared_experiment();
    let mut lambda_points = 0usize;
    for rep in &report.reps {
        for result in &rep.results {
            let mut first_lambda = None;
            for point in &result.trajectory {
                if let Some(l) = point.lambda {
                    assert!(
                        l > 0.0,
                        "rep {} {:?} t={}: penalty {l} not positive",
                        rep.rep,
                        result.method,
                        point.t
                    );
                    first_lambda.get_or_insert(l);
                    lambda_points += 1;
                }
            }
            if matches!(
                result.method,
                Method::Static | Method::Gradient | Method::Newton
            ) {
                assert_eq!(
                    first_lambda,
                    Some(rep.lambda_selected),
                    "rep {} {:?}: first recorded penalty is not the validated one",
                    rep.rep,
                    result.method
                );
            }
        }
    }

    // Same invariants on the benchmark configuration's evaluation span,
    // plus the strongest ordering witness: a zero learning rate must
    // reproduce the static run bit for bit (the recorded error cannot
    // depend on the update that follows it).
    let mut sim = SimConfig::new(10, 12, 12, 250);
    sim.seed = 606;
    let (series, _) = simulate_arx(&sim).unwrap();
    let split = SplitConfig::thirds(series.len());
    let design = build_lag_design(&series, 12, 12).unwrap();
    let grid = default_grid(&design, 50).unwrap();
    let lambda0 = rolling_validate(&series, 12, 12, &grid, &split)
        .unwrap()
        .selected;

    let frozen = online_evaluate(
        &series,
        12,
        12,
        UpdateRule::Gradient { eta: 0.0 },
        lambda0,
        &split,
    )
    .unwrap();
    let static_run =
        online_evaluate(&series, 12, 12, UpdateRule::Static, lambda0, &split).unwrap();
    assert_eq!(frozen.entries().len(), static_run.entries().len());
    for (a, b) in frozen.entries().iter().zip(static_run.entries()) {
        assert!(a.lambda > 0.0 && b.lambda > 0.0);
        assert_eq!(
            a.squared_error.to_bits(),
            b.squared_error.to_bits(),
            "t={}: frozen-rate error differs from static",
            a.t
        );
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    }
    for rule in [UpdateRule::Gradient { eta: 0.1 }, UpdateRule::Newton] {
        let traj = online_evaluate(&series, 12, 12, rule, lambda0, &split).unwrap();
        assert_eq!(traj.entries()[0].lambda, lambda0);
        for e in traj.entries() {
            assert!(e.lambda > 0.0);
        }
    }

    verdict(
        8,
        "penalties stay positive and errors precede updates",
        true,
        &format!(
            "{lambda_points} recorded penalties positive; first penalties equal the \
             validated start; zero-rate run is bit-identical to static over {} steps",
            static_run.entries().len()
        ),
    );
}
