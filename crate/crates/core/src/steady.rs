//! Sequential steady-state detection and the simplified TP-EEC correction.
//!
//! [`sequential_steady_state`] marches period by period and declares the
//! steady state reached at the first period `k` whose relative periodicity
//! error of a designated observable `O`,
//!
//! ```text
//! err(k) = |O(t0 + (k-1) T) - O(t0 + k T)| / |O(t0 + k T)|
//! ```
//!
//! drops below a tolerance.
//!
//! [`tpeec_steady_state`] is the same march with a state correction at every
//! half period: the running state is reduced by the average of the current
//! value and the value half a period earlier. For solutions whose periodic
//! regime is half-wave symmetric this cancels the slow transient almost
//! entirely; for other problems it can stall or diverge, which a divergence
//! guard turns into a clean `converged = false` outcome.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::propagate::Trajectory;
use crate::stepper::{implicit_euler_step, newton_solve};
use crate::system::{DynamicalSystem, NewtonConfig, StateVector};

/// Settings shared by the sequential and TP-EEC steady-state drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateConfig {
    /// Start of the first period.
    pub t_start: f64,
    /// Period length `T`.
    pub period: f64,
    /// Requested time step; the actual step is `T / round(T / dt)`.
    pub dt: f64,
    /// Tolerance on the relative periodicity error.
    pub epsilon: f64,
    /// Period budget.
    pub max_periods: usize,
    /// Observable used by the periodicity error; `None` picks the system's
    /// primary observable.
    pub observable: Option<String>,
    pub newton: NewtonConfig,
}

impl SteadyStateConfig {
    pub fn new(period: f64, dt: f64, epsilon: f64, max_periods: usize) -> Self {
        SteadyStateConfig {
            t_start: 0.0,
            period,
            dt,
            epsilon,
            max_periods,
            observable: None,
            newton: NewtonConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        if !(self.dt > 0.0) || self.dt > self.period {
            return Err(Error::InvalidArgument(
                "dt must be positive and no larger than the period".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.max_periods == 0 {
            return Err(Error::InvalidArgument(
                "max_periods must be at least 1".into(),
            ));
        }
        self.newton.validate()
    }
}

/// Knobs of the TP-EEC correction. Everything defaults to on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpeecOptions {
    /// Apply the half-period correction at all; `false` reproduces plain
    /// sequential stepping bit for bit.
    pub corrections_enabled: bool,
    /// Skip a correction whose relative magnitude is already below epsilon, so
    /// the converged continuation runs uncorrected.
    pub skip_small_corrections: bool,
    /// Abort with `converged = false` after three consecutive periods of
    /// growing periodicity error.
    pub divergence_guard: bool,
}

impl Default for TpeecOptions {
    fn default() -> Self {
        TpeecOptions {
            corrections_enabled: true,
            skip_small_corrections: true,
            divergence_guard: true,
        }
    }
}

/// Outcome of a steady-state run.
#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    /// First period that met the tolerance, when one did.
    pub k_star: Option<usize>,
    /// Periodicity error per completed period.
    pub err_history: Vec<f64>,
    /// Implicit-Euler solves performed (corrections are state assignments and
    /// do not count).
    pub total_steps: u64,
    pub steps_per_period: usize,
    pub periods_run: usize,
    /// Trajectory of the last completed period.
    pub final_period_trajectory: Trajectory,
    /// Half-period corrections actually applied (TP-EEC only).
    pub corrections_applied: usize,
    pub converged: bool,
}

/// Relative periodicity error `|o_prev - o_curr| / |o_curr|`.
pub fn periodicity_error(o_prev: f64, o_curr: f64) -> Result<f64> {
    if o_curr == 0.0 {
        return Err(Error::DivisionByZero(
            "periodicity error undefined: the observable vanishes at the period boundary".into(),
        ));
    }
    Ok((o_prev - o_curr).abs() / o_curr.abs())
}

/// Sequential time stepping until the periodicity error of the designated
/// observable falls below `epsilon`.
pub fn sequential_steady_state(
    sys: &dyn DynamicalSystem,
    u0: &StateVector,
    cfg: &SteadyStateConfig,
) -> Result<SteadyStateResult> {
    march(sys, u0, cfg, None)
}

/// Time stepping with the simplified TP-EEC half-period correction, default
/// options.
pub fn tpeec_steady_state(
    sys: &dyn DynamicalSystem,
    u0: &StateVector,
    cfg: &SteadyStateConfig,
) -> Result<SteadyStateResult> {
    march(sys, u0, cfg, Some(TpeecOptions::default()))
}

/// Time stepping with the simplified TP-EEC correction and explicit options.
pub fn tpeec_steady_state_with(
    sys: &dyn DynamicalSystem,
    u0: &StateVector,
    cfg: &SteadyStateConfig,
    options: TpeecOptions,
) -> Result<SteadyStateResult> {
    march(sys, u0, cfg, Some(options))
}

fn march(
    sys: &dyn DynamicalSystem,
    u0: &StateVector,
    cfg: &SteadyStateConfig,
    tpeec: Option<TpeecOptions>,
) -> Result<SteadyStateResult> {
    cfg.validate()?;
    if u0.len() != sys.dimension() {
        return Err(Error::InvalidArgument(format!(
            "initial state length {} does not match system dimension {}",
            u0.len(),
            sys.dimension()
        )));
    }
    let observable = cfg
        .observable
        .clone()
        .unwrap_or_else(|| sys.primary_observable());
    if sys.observe(&observable, u0, cfg.t_start).is_none() {
        return Err(Error::InvalidArgument(format!(
            "observable '{observable}' is not exposed by the system"
        )));
    }

    let steps_per_period = (cfg.period / cfg.dt).round().max(1.0) as usize;
    let half_index = if tpeec.is_some() {
        // The correction lands on a step boundary only if T/2 is an integer
        // multiple of dt.
        let half_ratio = cfg.period / 2.0 / cfg.dt;
        if (half_ratio - half_ratio.round()).abs() > 1e-9 * half_ratio.round().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "half a period must be an integer multiple of dt, got T/2/dt = {half_ratio}"
            )));
        }
        steps_per_period / 2
    } else {
        0
    };

    let mut state = u0.clone();
    let mut obs_prev = sys
        .observe(&observable, &state, cfg.t_start)
        .expect("observable checked above");
    // Value half a period back, seeding the first correction.
    let mut half_period_state = state.clone();

    let mut err_history: Vec<f64> = Vec::new();
    let mut total_steps = 0u64;
    let mut corrections_applied = 0usize;
    let mut consecutive_growth = 0usize;
    let mut final_period_trajectory: Option<Trajectory> = None;
    let mut periods_run = 0usize;
    let mut k_star = None;
    let mut converged = false;

    'periods: for k in 1..=cfg.max_periods {
        let period_start = cfg.t_start + ((k - 1) as f64) * cfg.period;
        let period_end = cfg.t_start + (k as f64) * cfg.period;
        let h = (period_end - period_start) / steps_per_period as f64;

        let mut traj = Trajectory::with_names(sys.observable_names());
        traj.push_sample(sys, period_start, &state);
        let mut corrections_this_period = 0usize;
        let mut marched_end: Option<StateVector> = None;

        for i in 1..=steps_per_period {
            let t = if i == steps_per_period {
                period_end
            } else {
                period_start + (i as f64) * h
            };
            let global_step = (k - 1) * steps_per_period + i;
            state = implicit_euler_step(sys, &state, t, h, &cfg.newton)
                .map_err(|e| e.at_step(global_step, t))?
                .0;
            total_steps += 1;
            if i == steps_per_period {
                // Periodicity error is measured on the marched value, before
                // any end-of-period correction touches the state.
                marched_end = Some(state.clone());
            }

            if let Some(opts) = tpeec {
                if i == half_index || i == steps_per_period {
                    // Reduce the solution by the average of the current value
                    // and the value half a period ago; for a half-wave
                    // symmetric steady state the average is the transient and
                    // the reduction removes most of it. Algebraic components
                    // are re-solved before the skip rule measures the net
                    // change.
                    let average = (&half_period_state + &state) / 2.0;
                    let mut proposed = &state - &average;
                    restore_algebraic_consistency(sys, &mut proposed, t, &cfg.newton)?;
                    let change_rel = (&proposed - &state).norm() / (1.0 + state.norm());
                    let apply = opts.corrections_enabled
                        && (!opts.skip_small_corrections || change_rel > cfg.epsilon);
                    if apply {
                        state = proposed;
                        corrections_applied += 1;
                        corrections_this_period += 1;
                    }
                    half_period_state = state.clone();
                }
            }
            traj.push_sample(sys, t, &state);
        }

        let marched_end = marched_end.expect("at least one step per period");
        let obs_curr = sys
            .observe(&observable, &marched_end, period_end)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("observable '{observable}' disappeared"))
            })?;
        let err = periodicity_error(obs_prev, obs_curr)?;
        let grew = err_history.last().is_some_and(|prev| err > *prev);
        err_history.push(err);
        obs_prev = obs_curr;
        final_period_trajectory = Some(traj);
        periods_run = k;

        // With the skip rule active, a period only counts as steady when it
        // ran without corrections (the uncorrected continuation).
        let quiescent = match tpeec {
            Some(opts) => corrections_this_period == 0 || !opts.skip_small_corrections,
            None => true,
        };
        if err <= cfg.epsilon && quiescent {
            k_star = Some(k);
            converged = true;
            break 'periods;
        }

        if let Some(opts) = tpeec {
            if opts.divergence_guard {
                consecutive_growth = if grew { consecutive_growth + 1 } else { 0 };
                if consecutive_growth >= 3 {
                    break 'periods;
                }
            }
        }
    }

    Ok(SteadyStateResult {
        k_star,
        err_history,
        total_steps,
        steps_per_period,
        periods_run,
        final_period_trajectory: final_period_trajectory.expect("at least one period"),
        corrections_applied,
        converged,
    })
}

/// After a correction, states of a singular-mass system may violate the
/// algebraic rows. Re-solve those rows for the matching state components while
/// the differential components stay fixed.
#[allow(clippy::needless_borrows_for_generic_args)] // jacobian borrows residual
fn restore_algebraic_consistency(
    sys: &dyn DynamicalSystem,
    state: &mut StateVector,
    t: f64,
    newton: &NewtonConfig,
) -> Result<()> {
    let mass = sys.mass();
    let algebraic: Vec<usize> = (0..mass.nrows())
        .filter(|&i| mass.row(i).iter().all(|&x| x == 0.0))
        .collect();
    if algebraic.is_empty() {
        return Ok(());
    }

    let source = sys.source(t);
    let full = state.clone();
    let residual = |y: &StateVector| {
        let mut u = full.clone();
        for (slot, &idx) in algebraic.iter().enumerate() {
            u[idx] = y[slot];
        }
        let r = sys.stiffness(&u, t) * &u - &source;
        DVector::from_iterator(algebraic.len(), algebraic.iter().map(|&i| r[i]))
    };
    let jacobian = |y: &StateVector| crate::stepper::fd_jacobian(&residual, y, newton.fd_epsilon);
    let y0 = DVector::from_iterator(algebraic.len(), algebraic.iter().map(|&i| state[i]));
    let (y, _) = newton_solve(&residual, &jacobian, &y0, newton)?;
    for (slot, &idx) in algebraic.iter().enumerate() {
        state[idx] = y[slot];
    }
    Ok(())
}
