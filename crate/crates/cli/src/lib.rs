//! Command-line harness around the `reclasso` library: synthetic panel
//! generation, penalty tuning, forecasting-method evaluation, and timing
//! benchmarks, with CSV ingestion for real data.

pub mod args;
pub mod bench;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;

use std::fs::File;

use args::{BenchArgs, Cli, Command, DataArgs, EvaluateArgs, SimArgs, SimulateArgs, TuneArgs};
use error::CliError;
use experiment::{DataSource, ExperimentConfig, Method, TuneConfig};
use ingest::{LoadOptions, LoadedData};

/// Runs one parsed invocation to completion.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Tune(a) => run_tune_cmd(a),
        Command::Evaluate(a) => run_evaluate_cmd(a),
        Command::Bench(a) => run_bench_cmd(a),
    }
}

/// Resolves `--data`/simulation flags into a data source, along with the
/// effective normalization switch (on by default only for loaded files).
fn source_from(
    data: &DataArgs,
    sim: &SimArgs,
    p: usize,
    s: usize,
    seed: u64,
) -> Result<(DataSource, bool), CliError> {
    match &data.data {
        Some(path) => {
            let LoadedData {
                series,
                target_name,
                ..
            } = ingest::load_csv(
                path,
                &LoadOptions {
                    target: data.target.clone(),
                    quarterly: data.quarterly,
                },
            )?;
            let label = format!("{} (target: {target_name})", path.display());
            Ok((
                DataSource::Loaded { series, label },
                data.normalize.unwrap_or(true),
            ))
        }
        None => {
            if data.target.is_some() {
                return Err(CliError::Usage(
                    "--target only applies to a --data file".to_owned(),
                ));
            }
            if data.quarterly {
                return Err(CliError::Usage(
                    "--quarterly only applies to a --data file".to_owned(),
                ));
            }
            Ok((
                DataSource::Simulate(sim.to_config(p, s, seed)),
                data.normalize.unwrap_or(false),
            ))
        }
    }
}

fn run_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = a.sim.to_config(a.p, a.s, a.seed);
    let (series, _) = reclasso::datagen::simulate_arx(&cfg)?;
    let exo_names = ingest::default_exo_names(series.k());
    match &a.out {
        Some(path) => {
            let file = File::create(path)?;
            ingest::write_csv(file, &series, "y", &exo_names)?;
            println!(
                "wrote {} observations of {} series to {}",
                series.len(),
                1 + series.k(),
                path.display()
            );
        }
        None => {
            let stdout = std::io::stdout();
            ingest::write_csv(stdout.lock(), &series, "y", &exo_names)?;
        }
    }
    Ok(())
}

fn run_tune_cmd(a: TuneArgs) -> Result<(), CliError> {
    let (source, normalize) = source_from(&a.data, &a.sim, a.p, a.s, a.seed)?;
    let report = experiment::run_tune(&TuneConfig {
        source,
        p: a.p,
        s: a.s,
        grid_size: a.grid_size,
        seed: a.seed,
        train_frac: a.train_frac,
        normalize,
    })?;
    print!("{}", report::tune_table(&report));
    if let Some(path) = &a.json {
        report::write_json(path, &report)?;
    }
    if let Some(path) = &a.csv {
        report::write_tune_csv(File::create(path)?, &report)?;
    }
    Ok(())
}

fn run_evaluate_cmd(a: EvaluateArgs) -> Result<(), CliError> {
    let mut methods: Vec<Method> = if a.rule.is_empty() {
        vec![
            Method::Static,
            Method::RollingWindow,
            Method::Gradient,
            Method::Newton,
        ]
    } else {
        a.rule.iter().map(|r| r.method()).collect()
    };
    if a.baselines {
        methods.extend([Method::Mean, Method::RandomWalk, Method::Aic, Method::Bic]);
    }
    let (source, normalize) = source_from(&a.data, &a.sim, a.p, a.s, a.seed)?;
    let report = experiment::run_experiment(&ExperimentConfig {
        source,
        p: a.p,
        s: a.s,
        grid_size: a.grid_size,
        eta: a.eta,
        methods,
        reps: a.reps,
        seed: a.seed,
        train_frac: a.train_frac,
        normalize,
    })?;
    print!("{}", report::evaluation_table(&report));
    if let Some(path) = &a.json {
        report::write_json(path, &report)?;
    }
    if let Some(path) = &a.csv {
        report::write_evaluation_csv(File::create(path)?, &report)?;
    }
    Ok(())
}

fn run_bench_cmd(a: BenchArgs) -> Result<(), CliError> {
    let report = bench::run_bench(&bench::BenchConfig {
        sim: a.sim.to_config(a.p, a.s, a.seed),
        grid_size: a.grid_size,
        eta: a.eta,
        window: a.window,
        iterations: a.iters,
        warmup: a.warmup,
    })?;
    print!("{}", report::bench_table(&report));
    if let Some(path) = &a.json {
        report::write_json(path, &report)?;
    }
    if let Some(path) = &a.csv {
        report::write_bench_csv(File::create(path)?, &report)?;
    }
    Ok(())
}
