//! Propagators: march a system across an interval with equal implicit-Euler
//! steps, optionally recording the trajectory and observables.
//!
//! Both the fine and the coarse propagator of the parallel-in-time solvers are
//! this same routine, configured with different step sizes. A coarse propagator
//! with `step_size` equal to the subinterval length performs exactly one step.

use crate::error::{Error, Result};
use crate::stepper::implicit_euler_step;
use crate::system::{DynamicalSystem, NewtonConfig, StateVector};

/// Step size and solver settings for a propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSpec {
    /// Upper bound on the step size; actual steps are equalized to land on the
    /// interval end exactly.
    pub step_size: f64,
    pub newton: NewtonConfig,
    pub record_trajectory: bool,
}

impl PropagatorSpec {
    pub fn new(step_size: f64) -> Self {
        PropagatorSpec {
            step_size,
            newton: NewtonConfig::default(),
            record_trajectory: false,
        }
    }

    pub fn recording(step_size: f64) -> Self {
        PropagatorSpec {
            record_trajectory: true,
            ..PropagatorSpec::new(step_size)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "propagator step size must be positive and finite, got {}",
                self.step_size
            )));
        }
        self.newton.validate()
    }
}

/// Sampled solution: times, states and one series per named observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVector>,
    observable_names: Vec<String>,
    observables: Vec<Vec<f64>>,
}

impl Trajectory {
    pub(crate) fn with_names(observable_names: Vec<String>) -> Self {
        let observables = vec![Vec::new(); observable_names.len()];
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            observable_names,
            observables,
        }
    }

    pub(crate) fn push_sample(&mut self, sys: &dyn DynamicalSystem, t: f64, u: &StateVector) {
        self.times.push(t);
        self.states.push(u.clone());
        for (name, series) in self.observable_names.iter().zip(&mut self.observables) {
            series.push(sys.observe(name, u, t).unwrap_or(f64::NAN));
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn observable_names(&self) -> &[String] {
        &self.observable_names
    }

    /// Series of a named observable, aligned with [`Trajectory::times`].
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observable_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.observables[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of steps recorded (samples minus the initial one).
    pub fn steps_taken(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// Append a continuation that starts where this trajectory ends; the
    /// duplicate first sample of `other` is dropped.
    pub fn append_continuation(&mut self, other: &Trajectory) {
        debug_assert_eq!(self.observable_names, other.observable_names);
        if other.is_empty() {
            return;
        }
        let skip = usize::from(!self.is_empty());
        self.times.extend_from_slice(&other.times[skip..]);
        self.states.extend_from_slice(&other.states[skip..]);
        for (series, other_series) in self.observables.iter_mut().zip(&other.observables) {
            series.extend_from_slice(&other_series[skip..]);
        }
    }
}

/// Result of a propagation: the end state, the recorded trajectory (when
/// requested) and the number of steps taken.
#[derive(Debug, Clone)]
pub struct PropagateOutcome {
    pub end_state: StateVector,
    pub trajectory: Option<Trajectory>,
    pub steps: usize,
}

/// Number of equal steps used to cross `[t_from, t_to]` with steps no larger
/// (up to a 1e-9 relative slack) than `step_size`.
pub fn step_count(t_from: f64, t_to: f64, step_size: f64) -> usize {
    let ratio = (t_to - t_from) / step_size;
    (ratio - 1e-9).ceil().max(1.0) as usize
}

/// March from `u_from` at `t_from` to `t_to`.
///
/// The interval is crossed in `step_count` equal steps; intermediate times are
/// assigned as `t_from + i * h` and the final time is set to `t_to` exactly,
/// so synchronization points of a partition are always hit bit-exactly.
pub fn propagate(
    sys: &dyn DynamicalSystem,
    t_from: f64,
    t_to: f64,
    u_from: &StateVector,
    spec: &PropagatorSpec,
) -> Result<PropagateOutcome> {
    spec.validate()?;
    if !(t_to > t_from) {
        return Err(Error::InvalidArgument(format!(
            "propagation window is empty: t_to ({t_to}) must exceed t_from ({t_from})"
        )));
    }
    let steps = step_count(t_from, t_to, spec.step_size);
    let h = (t_to - t_from) / steps as f64;

    let mut trajectory = spec
        .record_trajectory
        .then(|| Trajectory::with_names(sys.observable_names()));
    if let Some(traj) = trajectory.as_mut() {
        traj.push_sample(sys, t_from, u_from);
    }

    let mut u = u_from.clone();
    for i in 1..=steps {
        let t_next = if i == steps {
            t_to
        } else {
            t_from + (i as f64) * h
        };
        let (next, _report) = implicit_euler_step(sys, &u, t_next, h, &spec.newton)
            .map_err(|e| e.at_step(i, t_next))?;
        u = next;
        if let Some(traj) = trajectory.as_mut() {
            traj.push_sample(sys, t_next, &u);
        }
    }

    Ok(PropagateOutcome {
        end_state: u,
        trajectory,
        steps,
    })
}
