//! Cost accounting in effective time steps.
//!
//! The cost unit is nonlinear time-step solves, not wall-clock time: a
//! parallel-in-time iteration pays for its sequential coarse sweep plus the
//! fine steps of a single subinterval, so `I_t` iterations over `N`
//! subintervals with `N_p` fine steps each cost `I_t * (N + N_p)` effective
//! steps. Wall-clock numbers are reported nowhere; step counts are exact and
//! machine-independent.

use crate::error::{Error, Result};
use crate::pint::PinTResult;
use crate::steady::SteadyStateResult;

/// Cost summary of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub effective_steps: u64,
    pub iterations: u64,
    pub subintervals: u64,
    pub fine_steps_per_subinterval: u64,
    /// Step count of the sequential baseline, when one is given.
    pub sequential_steps: Option<u64>,
    /// `sequential_steps / effective_steps`, when a baseline is given.
    pub speedup: Option<f64>,
}

/// One row of a method-comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub method: String,
    /// Solves spent; `None` marks a method that did not converge
    /// ("not applicable").
    pub solves: Option<u64>,
    pub converged: bool,
    pub speedup: Option<f64>,
}

/// Effective time steps `iterations * (subintervals + fine_steps_per_subinterval)`.
pub fn effective_steps(
    iterations: u64,
    subintervals: u64,
    fine_steps_per_subinterval: u64,
) -> Result<u64> {
    if iterations == 0 || subintervals == 0 || fine_steps_per_subinterval == 0 {
        return Err(Error::InvalidArgument(
            "effective-step inputs must all be at least 1".into(),
        ));
    }
    Ok(iterations * (subintervals + fine_steps_per_subinterval))
}

/// Ratio of sequential to effective steps.
pub fn speedup_estimate(sequential_steps: u64, effective_steps: u64) -> Result<f64> {
    if sequential_steps == 0 || effective_steps == 0 {
        return Err(Error::InvalidArgument(
            "step counts must be at least 1".into(),
        ));
    }
    Ok(sequential_steps as f64 / effective_steps as f64)
}

/// A run whose cost is being reported.
#[derive(Debug, Clone, Copy)]
pub enum RunCost<'a> {
    ParallelInTime(&'a PinTResult),
    Steady(&'a SteadyStateResult),
}

impl RunCost<'_> {
    fn solves(&self) -> u64 {
        match self {
            RunCost::ParallelInTime(r) => r.effective_steps,
            RunCost::Steady(r) => r.total_steps,
        }
    }

    fn converged(&self) -> bool {
        match self {
            RunCost::ParallelInTime(r) => r.converged,
            RunCost::Steady(r) => r.converged,
        }
    }
}

/// Assemble the cost report and a comparison-table row for a run, optionally
/// against a sequential baseline.
pub fn convergence_report(
    method: &str,
    run: RunCost<'_>,
    baseline: Option<&SteadyStateResult>,
) -> (CostReport, TableRow) {
    let sequential_steps = baseline.map(|b| b.total_steps);
    let solves = run.solves();
    let speedup = sequential_steps
        .filter(|&seq| seq > 0 && solves > 0)
        .map(|seq| seq as f64 / solves as f64);
    let cost = match run {
        RunCost::ParallelInTime(r) => CostReport {
            effective_steps: r.effective_steps,
            iterations: r.iterations_used as u64,
            subintervals: r.subintervals as u64,
            fine_steps_per_subinterval: r.fine_steps_per_subinterval as u64,
            sequential_steps,
            speedup,
        },
        RunCost::Steady(r) => CostReport {
            effective_steps: r.total_steps,
            iterations: r.periods_run as u64,
            subintervals: 0,
            fine_steps_per_subinterval: r.steps_per_period as u64,
            sequential_steps,
            speedup,
        },
    };
    let converged = run.converged();
    let row = TableRow {
        method: method.to_string(),
        solves: converged.then_some(solves),
        converged,
        speedup: if converged { speedup } else { None },
    };
    (cost, row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{rl_circuit, RLCircuitParams};
    use crate::pint::{ppic, PinTConfig};
    use crate::propagate::step_count;
    use crate::system::make_partition;
    use nalgebra::dvector;

    #[test]
    fn effective_steps_operating_points() {
        // 12 * (80 + 84) and 4 * (154 + 160).
        assert_eq!(effective_steps(12, 80, 84).unwrap(), 1968);
        assert_eq!(effective_steps(4, 154, 160).unwrap(), 1256);
        assert_eq!(effective_steps(1, 1, 1).unwrap(), 2);
    }

    #[test]
    fn effective_steps_rejects_zero_inputs() {
        assert!(effective_steps(0, 80, 84).is_err());
        assert!(effective_steps(12, 0, 84).is_err());
        assert!(effective_steps(12, 80, 0).is_err());
    }

    #[test]
    fn speedup_operating_points() {
        let s1 = speedup_estimate(56160, 1968).unwrap();
        assert!((s1 - 28.5366).abs() < 1e-3);
        let s2 = speedup_estimate(25920, 1256).unwrap();
        assert!((s2 - 20.6369).abs() < 1e-3);
        assert_eq!(speedup_estimate(100, 100).unwrap(), 1.0);
        assert!(speedup_estimate(0, 1).is_err());
    }

    #[test]
    fn formula_matches_brute_force_tally_of_a_real_run() {
        // Tally every nonlinear solve the iteration pays for sequentially:
        // per iteration, N one-step coarse solves plus the fine steps of one
        // subinterval (the rest run in parallel).
        let sys = rl_circuit(RLCircuitParams::default()).unwrap();
        let n = 3;
        let part = make_partition(0.0, 0.02, n).unwrap();
        let fine_dt = 2.5e-4;
        let coarse_dt = 0.02 / n as f64;
        let cfg = PinTConfig::new(fine_dt, coarse_dt, 1e-6, 40);
        let result = ppic(&sys, &part, &dvector![0.0], &cfg).unwrap();
        assert!(result.converged);

        let points = part.sync_points();
        let mut tally = 0u64;
        for _iteration in 0..result.iterations_used {
            let coarse_sweep: u64 = (1..=n)
                .map(|j| step_count(points[j - 1], points[j], coarse_dt) as u64)
                .sum();
            let one_subinterval = step_count(points[0], points[1], fine_dt) as u64;
            tally += coarse_sweep + one_subinterval;
        }
        assert_eq!(result.effective_steps, tally);
        assert_eq!(
            result.effective_steps,
            effective_steps(
                result.iterations_used as u64,
                n as u64,
                result.fine_steps_per_subinterval as u64
            )
            .unwrap()
        );
    }

    #[test]
    fn report_for_parallel_run_with_baseline() {
        let sys = rl_circuit(RLCircuitParams::default()).unwrap();
        let part = make_partition(0.0, 0.02, 4).unwrap();
        let cfg = PinTConfig::new(1e-4, 5e-3, 1e-6, 40);
        let result = ppic(&sys, &part, &dvector![0.0], &cfg).unwrap();
        let baseline = crate::steady::sequential_steady_state(
            &sys,
            &dvector![0.0],
            &crate::steady::SteadyStateConfig::new(0.02, 1e-4, 1e-3, 100),
        )
        .unwrap();

        let (cost, row) =
            convergence_report("ppic", RunCost::ParallelInTime(&result), Some(&baseline));
        assert_eq!(cost.effective_steps, result.effective_steps);
        assert_eq!(cost.sequential_steps, Some(baseline.total_steps));
        let speedup = cost.speedup.unwrap();
        assert!(
            (speedup - baseline.total_steps as f64 / result.effective_steps as f64).abs() < 1e-12
        );
        assert!(row.converged);
        assert_eq!(row.solves, Some(result.effective_steps));
    }

    #[test]
    fn report_without_baseline_leaves_speedup_empty() {
        let sys = rl_circuit(RLCircuitParams::default()).unwrap();
        let part = make_partition(0.0, 0.02, 4).unwrap();
        let cfg = PinTConfig::new(1e-4, 5e-3, 1e-6, 40);
        let result = ppic(&sys, &part, &dvector![0.0], &cfg).unwrap();
        let (cost, row) = convergence_report("ppic", RunCost::ParallelInTime(&result), None);
        assert_eq!(cost.speedup, None);
        assert_eq!(cost.sequential_steps, None);
        assert_eq!(row.speedup, None);
    }

    #[test]
    fn non_converged_run_is_reported_not_applicable() {
        let sys = rl_circuit(RLCircuitParams::default()).unwrap();
        // Mismatched correction period: tpeec does not converge.
        let cfg = crate::steady::SteadyStateConfig::new(0.027, 1e-4, 1e-3, 40);
        let tpeec = crate::steady::tpeec_steady_state(&sys, &dvector![0.0], &cfg).unwrap();
        assert!(!tpeec.converged);
        let (_, row) = convergence_report("tpeec", RunCost::Steady(&tpeec), None);
        assert_eq!(row.solves, None);
        assert!(!row.converged);
    }

    #[test]
    fn steady_report_mirrors_table_arithmetic() {
        // 7919 solves against a 56160-step baseline gives the 7.09 speedup.
        let speedup = speedup_estimate(56160, 7919).unwrap();
        assert!((speedup - 7.0918).abs() < 1e-3);
    }
}
