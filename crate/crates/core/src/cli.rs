//! Command-line front end: `run` executes one method from a JSON config and
//! writes trajectory/convergence/cost CSVs, `compare` runs several methods on
//! the same problem and writes a comparison table.
//!
//! Exit codes: 0 on success/convergence, 1 on configuration or solver errors,
//! 2 on clean non-convergence (result files are still written).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use crate::config::{ExperimentConfig, MethodName};
use crate::error::{Error, Result};
use crate::metrics::{convergence_report, RunCost, TableRow};
use crate::output;
use crate::pint::{parareal, ppic, PinTConfig, PinTResult};
use crate::steady::{
    sequential_steady_state, tpeec_steady_state, SteadyStateConfig, SteadyStateResult,
};
use crate::system::{make_partition, DynamicalSystem};

#[derive(Debug, Parser)]
#[command(
    name = "parasteady",
    about = "Periodic steady-state solvers for small DAE systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one method and write trajectory, convergence and cost CSVs.
    Run {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the worker count for the fine solves.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the configured method.
        #[arg(long, value_enum)]
        method: Option<MethodName>,
    },
    /// Run every configured method on the same problem and write a
    /// comparison table.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Result of one method run.
#[derive(Debug, Clone)]
pub enum MethodOutcome {
    ParallelInTime(PinTResult),
    Steady(SteadyStateResult),
}

impl MethodOutcome {
    pub fn converged(&self) -> bool {
        match self {
            MethodOutcome::ParallelInTime(r) => r.converged,
            MethodOutcome::Steady(r) => r.converged,
        }
    }

    fn run_cost(&self) -> RunCost<'_> {
        match self {
            MethodOutcome::ParallelInTime(r) => RunCost::ParallelInTime(r),
            MethodOutcome::Steady(r) => RunCost::Steady(r),
        }
    }
}

/// Execute one method on the configured model and window.
pub fn run_method(
    sys: &dyn DynamicalSystem,
    method: MethodName,
    cfg: &ExperimentConfig,
) -> Result<MethodOutcome> {
    let zero_state = DVector::zeros(sys.dimension());
    match method {
        MethodName::Sequential | MethodName::Tpeec => {
            let mut steady_cfg = SteadyStateConfig::new(
                cfg.period()?,
                cfg.fine_dt()?,
                cfg.epsilon()?,
                cfg.max_periods()?,
            );
            steady_cfg.t_start = cfg.t_start();
            steady_cfg.observable = cfg.observable.clone();
            let result = if method == MethodName::Sequential {
                sequential_steady_state(sys, &zero_state, &steady_cfg)?
            } else {
                tpeec_steady_state(sys, &zero_state, &steady_cfg)?
            };
            Ok(MethodOutcome::Steady(result))
        }
        MethodName::Parareal | MethodName::Ppic => {
            let t_start = cfg.t_start();
            let t_end = if method == MethodName::Ppic {
                t_start + cfg.period()?
            } else {
                cfg.t_end()?
            };
            let n = cfg.subintervals(t_end - t_start)?;
            let part = make_partition(t_start, t_end, n)?;
            let pint_cfg = PinTConfig::new(
                cfg.fine_dt()?,
                cfg.coarse_dt()?,
                cfg.tol()?,
                cfg.max_iter()?,
            );
            let result = if method == MethodName::Parareal {
                parareal(sys, &part, &zero_state, &pint_cfg)?
            } else {
                ppic(sys, &part, &zero_state, &pint_cfg)?
            };
            Ok(MethodOutcome::ParallelInTime(result))
        }
    }
}

fn with_workers<T: Send>(workers: Option<usize>, op: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
            Ok(pool.install(op))
        }
        _ => Ok(op()),
    }
}

fn write_run_outputs(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    method: MethodName,
    outcome: &MethodOutcome,
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let (cost, _row) = convergence_report(method.as_str(), outcome.run_cost(), None);
    output::write_cost_csv(
        &out_dir.join(cfg.outputs.cost_file()),
        method.as_str(),
        &cost,
    )?;
    match outcome {
        MethodOutcome::ParallelInTime(result) => {
            output::write_pint_convergence_csv(
                &out_dir.join(cfg.outputs.convergence_file()),
                result,
            )?;
            if let Some(traj) = &result.final_trajectory {
                output::write_trajectory_csv(&out_dir.join(cfg.outputs.trajectory_file()), traj)?;
            }
        }
        MethodOutcome::Steady(result) => {
            output::write_steady_convergence_csv(
                &out_dir.join(cfg.outputs.convergence_file()),
                result,
            )?;
            output::write_trajectory_csv(
                &out_dir.join(cfg.outputs.trajectory_file()),
                &result.final_period_trajectory,
            )?;
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text).map_err(|e| {
        Error::InvalidArgument(format!(
            "config {} line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn execute_run(
    config: &Path,
    out: &Path,
    workers: Option<usize>,
    method_override: Option<MethodName>,
) -> Result<u8> {
    let cfg = load_config(config)?;
    let method = method_override.or(cfg.method).ok_or_else(|| {
        Error::InvalidArgument("no method configured (set \"method\" or pass --method)".into())
    })?;
    let sys = cfg.build_system()?;
    let workers = workers.or(cfg.workers);
    let started = std::time::Instant::now();
    let outcome = with_workers(workers, || run_method(sys.as_ref(), method, &cfg))??;
    // Wall-clock time is informational only; every reported cost is in steps.
    let elapsed = started.elapsed();
    write_run_outputs(out, &cfg, method, &outcome)
        .map_err(|e| Error::InvalidArgument(format!("writing outputs: {e}")))?;

    match &outcome {
        MethodOutcome::ParallelInTime(r) => println!(
            "{}: converged={} iterations={} effective_steps={} ({:.3} s)",
            method.as_str(),
            r.converged,
            r.iterations_used,
            r.effective_steps,
            elapsed.as_secs_f64()
        ),
        MethodOutcome::Steady(r) => println!(
            "{}: converged={} periods={} total_steps={} corrections={} ({:.3} s)",
            method.as_str(),
            r.converged,
            r.periods_run,
            r.total_steps,
            r.corrections_applied,
            elapsed.as_secs_f64()
        ),
    }
    Ok(if outcome.converged() { 0 } else { 2 })
}

fn execute_compare(config: &Path, out: &Path, workers: Option<usize>) -> Result<u8> {
    let cfg = load_config(config)?;
    let methods = cfg
        .methods
        .clone()
        .ok_or_else(|| Error::InvalidArgument("compare needs a \"methods\" list".into()))?;
    if methods.len() < 2 {
        return Err(Error::InvalidArgument(
            "compare needs at least two methods".into(),
        ));
    }
    let sys = cfg.build_system()?;
    let workers = workers.or(cfg.workers);

    let outcomes: Vec<(MethodName, MethodOutcome)> = with_workers(workers, || {
        methods
            .iter()
            .map(|&m| run_method(sys.as_ref(), m, &cfg).map(|o| (m, o)))
            .collect::<Result<Vec<_>>>()
    })??;

    let baseline = outcomes.iter().find_map(|(m, o)| match (m, o) {
        (MethodName::Sequential, MethodOutcome::Steady(r)) => Some(r.clone()),
        _ => None,
    });
    let rows: Vec<TableRow> = outcomes
        .iter()
        .map(|(m, o)| convergence_report(m.as_str(), o.run_cost(), baseline.as_ref()).1)
        .collect();

    fs::create_dir_all(out)
        .and_then(|()| {
            output::write_comparison_csv(&out.join(cfg.outputs.comparison_file()), &rows)
        })
        .map_err(|e| Error::InvalidArgument(format!("writing outputs: {e}")))?;

    for row in &rows {
        let solves = row
            .solves
            .map_or_else(|| "not applicable".to_string(), |v| v.to_string());
        println!(
            "{}: solves={} converged={}",
            row.method, solves, row.converged
        );
    }
    Ok(0)
}

/// Parse the command line and execute; returns the process exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            out,
            workers,
            method,
        } => execute_run(config, out, *workers, *method),
        Command::Compare {
            config,
            out,
            workers,
        } => execute_compare(config, out, *workers),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(1)
        }
    }
}
