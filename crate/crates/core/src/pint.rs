//! Parallel-in-time iterations.
//!
//! [`parareal`] solves an initial-value problem on a partitioned window by
//! combining a cheap sequential coarse sweep with fine solves that run
//! concurrently over the subintervals:
//!
//! ```text
//! U_0^(k) = u0
//! U_j^(k) = F(T_j, T_{j-1}, U_{j-1}^(k-1))
//!         + G(T_j, T_{j-1}, U_{j-1}^(k)) - G(T_j, T_{j-1}, U_{j-1}^(k-1))
//! ```
//!
//! [`ppic`] is the time-periodic variant: the window is one period, and each
//! iteration re-seeds the period's initial value with the previous iteration's
//! end value, `U_0^(k) = U_N^(k-1)`. The two updates are otherwise identical.
//!
//! The correction is computed as `fine + (coarse_new - coarse_old)`, with the
//! difference formed first: once two consecutive iterates agree bitwise, the
//! coarse terms cancel exactly and the iterate reproduces the sequential fine
//! solution bit for bit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::propagate::{propagate, PropagateOutcome, PropagatorSpec, Trajectory};
use crate::system::{DynamicalSystem, StateVector, TimePartition};

/// Configuration for [`parareal`] and [`ppic`].
#[derive(Debug, Clone, PartialEq)]
pub struct PinTConfig {
    /// Fine propagator (small step).
    pub fine: PropagatorSpec,
    /// Coarse propagator; with `step_size` equal to the subinterval length it
    /// performs exactly one step per subinterval.
    pub coarse: PropagatorSpec,
    /// Stopping tolerance on the jump norm between consecutive iterates.
    pub tol: f64,
    /// Iteration budget.
    pub max_iter: usize,
    /// Retain the concatenated fine trajectory of every iteration, not just
    /// the last one.
    pub keep_iteration_trajectories: bool,
}

impl PinTConfig {
    pub fn new(fine_dt: f64, coarse_dt: f64, tol: f64, max_iter: usize) -> Self {
        PinTConfig {
            fine: PropagatorSpec::recording(fine_dt),
            coarse: PropagatorSpec::new(coarse_dt),
            tol,
            max_iter,
            keep_iteration_trajectories: false,
        }
    }

    fn validate(&self) -> Result<()> {
        self.fine.validate()?;
        self.coarse.validate()?;
        if self.fine.step_size > self.coarse.step_size {
            return Err(Error::InvalidArgument(format!(
                "fine step ({}) must not exceed the coarse step ({})",
                self.fine.step_size, self.coarse.step_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(
                "stopping tolerance must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iteration history of a parallel-in-time run.
#[derive(Debug, Clone)]
pub struct PinTResult {
    /// Synchronization-point values per iterate: `sync_values[0]` is the
    /// initial array, `sync_values[k]` the iterate after iteration `k`.
    pub sync_values: Vec<Vec<StateVector>>,
    /// Jump norm per iteration (length `iterations_used`).
    pub jump_norms: Vec<f64>,
    /// Largest trajectory discontinuity at interior synchronization points,
    /// per iteration (relative, same scaling as the jump norm).
    pub sync_discontinuities: Vec<f64>,
    pub iterations_used: usize,
    pub subintervals: usize,
    /// Fine steps per subinterval (`N_p`).
    pub fine_steps_per_subinterval: usize,
    /// Sequentialized cost `iterations * (N + N_p)`.
    pub effective_steps: u64,
    /// Concatenated fine trajectory of the last iteration, when the fine
    /// propagator records.
    pub final_trajectory: Option<Trajectory>,
    /// All per-iteration trajectories, kept only on request.
    pub iteration_trajectories: Option<Vec<Trajectory>>,
    pub converged: bool,
}

/// How an iteration re-seeds the initial value `U_0^(k)`.
#[derive(Debug, Clone)]
pub enum InitialUpdate {
    /// Time-periodic rule `U_0^(k) = U_N^(k-1)`.
    PeriodicEndValue,
    /// Fixed initial value, which turns the iteration into classical Parareal.
    Fixed(StateVector),
}

/// Relative-absolute hybrid of the maximum difference norm:
/// `max_j ||curr_j - prev_j|| / (1 + max_j ||curr_j||)`.
pub fn jump_norm(prev: &[StateVector], curr: &[StateVector]) -> Result<f64> {
    if prev.len() != curr.len() {
        return Err(Error::InvalidArgument(format!(
            "iterates have different lengths: {} vs {}",
            prev.len(),
            curr.len()
        )));
    }
    let mut max_diff = 0.0f64;
    let mut max_curr = 0.0f64;
    for (p, c) in prev.iter().zip(curr) {
        if p.len() != c.len() {
            return Err(Error::InvalidArgument(format!(
                "state dimensions differ: {} vs {}",
                p.len(),
                c.len()
            )));
        }
        max_diff = max_diff.max((c - p).norm());
        max_curr = max_curr.max(c.norm());
    }
    Ok(max_diff / (1.0 + max_curr))
}

fn hybrid(diff: f64, scale: f64) -> f64 {
    diff / (1.0 + scale)
}

/// `fine + (coarse_new - coarse_old)`, difference first.
fn corrected(
    fine: &StateVector,
    coarse_new: &StateVector,
    coarse_old: &StateVector,
) -> StateVector {
    fine + (coarse_new - coarse_old)
}

fn check_inputs(sys: &dyn DynamicalSystem, u0: &StateVector, cfg: &PinTConfig) -> Result<()> {
    cfg.validate()?;
    if u0.len() != sys.dimension() {
        return Err(Error::InvalidArgument(format!(
            "initial state length {} does not match system dimension {}",
            u0.len(),
            sys.dimension()
        )));
    }
    Ok(())
}

/// Fine solves of one iteration: independent over subintervals, run through
/// rayon and collected by subinterval index so the result does not depend on
/// scheduling or worker count.
fn fine_solves(
    sys: &dyn DynamicalSystem,
    points: &[f64],
    starts: &[StateVector],
    spec: &PropagatorSpec,
) -> Result<Vec<PropagateOutcome>> {
    let n = points.len() - 1;
    (0..n)
        .into_par_iter()
        .map(|j| propagate(sys, points[j], points[j + 1], &starts[j], spec))
        .collect()
}

fn concatenate(fine: &[PropagateOutcome]) -> Option<Trajectory> {
    let mut combined: Option<Trajectory> = None;
    for outcome in fine {
        let piece = outcome.trajectory.as_ref()?;
        match combined.as_mut() {
            Some(t) => t.append_continuation(piece),
            None => combined = Some(piece.clone()),
        }
    }
    combined
}

/// Largest relative discontinuity between the end of one fine piece and the
/// start of the next, over interior synchronization points.
fn max_discontinuity(piece_starts: &[StateVector], fine: &[PropagateOutcome]) -> f64 {
    let n = fine.len();
    let mut max_diff = 0.0f64;
    let mut max_scale = 0.0f64;
    for j in 1..n {
        max_diff = max_diff.max((&piece_starts[j] - &fine[j - 1].end_state).norm());
        max_scale = max_scale.max(piece_starts[j].norm());
    }
    hybrid(max_diff, max_scale)
}

/// Classical Parareal on the partitioned window, starting from `u0`.
///
/// Iteration 0 is a pure coarse sweep; each subsequent iteration runs the fine
/// solves concurrently and corrects them through a sequential coarse sweep.
/// Non-convergence within `max_iter` is reported through `converged`, not as
/// an error.
pub fn parareal(
    sys: &dyn DynamicalSystem,
    part: &TimePartition,
    u0: &StateVector,
    cfg: &PinTConfig,
) -> Result<PinTResult> {
    check_inputs(sys, u0, cfg)?;
    let points = part.sync_points();
    let n = part.subintervals();
    let coarse_spec = PropagatorSpec {
        record_trajectory: false,
        ..cfg.coarse.clone()
    };

    // Iteration 0: coarse sweep. Its per-subinterval values double as the
    // G(.., U^(k-1)) terms of the first correction.
    let mut u_prev: Vec<StateVector> = Vec::with_capacity(n + 1);
    u_prev.push(u0.clone());
    let mut coarse_old: Vec<StateVector> = Vec::with_capacity(n);
    for j in 1..=n {
        let g = propagate(sys, points[j - 1], points[j], &u_prev[j - 1], &coarse_spec)?.end_state;
        coarse_old.push(g.clone());
        u_prev.push(g);
    }

    let mut sync_values = vec![u_prev.clone()];
    let mut jump_norms = Vec::new();
    let mut sync_discontinuities = Vec::new();
    let mut iteration_trajectories = cfg.keep_iteration_trajectories.then(Vec::new);
    let mut final_trajectory = None;
    let mut fine_steps = 0usize;
    let mut converged = false;
    let mut iterations_used = 0;

    for _k in 1..=cfg.max_iter {
        let fine = fine_solves(sys, points, &u_prev[..n], &cfg.fine)?;
        fine_steps = fine.iter().map(|o| o.steps).max().unwrap_or(0);

        let mut u_curr: Vec<StateVector> = Vec::with_capacity(n + 1);
        u_curr.push(u0.clone());
        let mut coarse_new: Vec<StateVector> = Vec::with_capacity(n);
        for j in 1..=n {
            let g =
                propagate(sys, points[j - 1], points[j], &u_curr[j - 1], &coarse_spec)?.end_state;
            u_curr.push(corrected(&fine[j - 1].end_state, &g, &coarse_old[j - 1]));
            coarse_new.push(g);
        }

        let jump = jump_norm(&u_prev, &u_curr)?;
        sync_discontinuities.push(max_discontinuity(&u_prev[..n], &fine));
        jump_norms.push(jump);
        iterations_used += 1;

        if let Some(traj) = concatenate(&fine) {
            if let Some(all) = iteration_trajectories.as_mut() {
                all.push(traj.clone());
            }
            final_trajectory = Some(traj);
        }

        sync_values.push(u_curr.clone());
        u_prev = u_curr;
        coarse_old = coarse_new;

        if jump <= cfg.tol {
            converged = true;
            break;
        }
    }

    let effective_steps = iterations_used as u64 * (n as u64 + fine_steps as u64);
    Ok(PinTResult {
        sync_values,
        jump_norms,
        sync_discontinuities,
        iterations_used,
        subintervals: n,
        fine_steps_per_subinterval: fine_steps,
        effective_steps,
        final_trajectory,
        iteration_trajectories,
        converged,
    })
}

/// Periodic Parareal with initial-value coarse problem on one period.
///
/// `part` must span exactly one period of the driving terms. The iteration is
/// seeded with `u_guess` as the end value of a virtual iteration 0 and with
/// zero coarse and fine values, and always runs at least one full iteration.
pub fn ppic(
    sys: &dyn DynamicalSystem,
    part: &TimePartition,
    u_guess: &StateVector,
    cfg: &PinTConfig,
) -> Result<PinTResult> {
    ppic_with_update(sys, part, u_guess, cfg, InitialUpdate::PeriodicEndValue)
}

/// The PP-IC loop with a configurable initial-value rule.
///
/// With [`InitialUpdate::Fixed`] the update formula degenerates to classical
/// Parareal: the first iteration reproduces [`parareal`]'s coarse sweep and
/// every later iterate matches the corresponding Parareal iterate bitwise.
pub fn ppic_with_update(
    sys: &dyn DynamicalSystem,
    part: &TimePartition,
    u_guess: &StateVector,
    cfg: &PinTConfig,
    update: InitialUpdate,
) -> Result<PinTResult> {
    check_inputs(sys, u_guess, cfg)?;
    if let InitialUpdate::Fixed(u0) = &update {
        if u0.len() != sys.dimension() {
            return Err(Error::InvalidArgument(
                "fixed initial value has the wrong dimension".into(),
            ));
        }
    }
    let points = part.sync_points();
    let n = part.subintervals();
    let m = sys.dimension();
    let coarse_spec = PropagatorSpec {
        record_trajectory: false,
        ..cfg.coarse.clone()
    };

    // Initialization: end value from the guess, zero coarse and fine values.
    // Interior entries of the iterate are undefined at this point; they are
    // stored as zeros and excluded from the first stopping check.
    let zero = StateVector::zeros(m);
    let mut coarse_old: Vec<StateVector> = vec![zero.clone(); n];
    let mut fine_old: Vec<StateVector> = vec![zero.clone(); n];
    let mut u_prev: Vec<StateVector> = vec![zero; n + 1];
    u_prev[n] = u_guess.clone();

    let mut sync_values = vec![u_prev.clone()];
    let mut jump_norms = Vec::new();
    let mut sync_discontinuities = Vec::new();
    let mut iteration_trajectories = cfg.keep_iteration_trajectories.then(Vec::new);
    let mut final_trajectory = None;
    let mut fine_steps = 0usize;
    let mut converged = false;
    let mut iterations_used = 0;

    for k in 1..=cfg.max_iter {
        let u0_k = match &update {
            InitialUpdate::PeriodicEndValue => u_prev[n].clone(),
            InitialUpdate::Fixed(u0) => u0.clone(),
        };

        // Coarse sweep with correction, sequential in j.
        let mut u_curr: Vec<StateVector> = Vec::with_capacity(n + 1);
        u_curr.push(u0_k);
        let mut coarse_new: Vec<StateVector> = Vec::with_capacity(n);
        for j in 1..=n {
            let g =
                propagate(sys, points[j - 1], points[j], &u_curr[j - 1], &coarse_spec)?.end_state;
            u_curr.push(corrected(&fine_old[j - 1], &g, &coarse_old[j - 1]));
            coarse_new.push(g);
        }

        // Fine solves from the current iterate, concurrent over subintervals.
        let fine = fine_solves(sys, points, &u_curr[..n], &cfg.fine)?;
        fine_steps = fine.iter().map(|o| o.steps).max().unwrap_or(0);

        // Stopping check: after the first iteration only the end value of the
        // previous iterate exists, so the jump uses that component alone.
        let jump = if k == 1 {
            hybrid((&u_curr[n] - &u_prev[n]).norm(), u_curr[n].norm())
        } else {
            jump_norm(&u_prev, &u_curr)?
        };
        sync_discontinuities.push(max_discontinuity(&u_curr[..n], &fine));
        jump_norms.push(jump);
        iterations_used += 1;

        if let Some(traj) = concatenate(&fine) {
            if let Some(all) = iteration_trajectories.as_mut() {
                all.push(traj.clone());
            }
            final_trajectory = Some(traj);
        }

        sync_values.push(u_curr.clone());
        fine_old = fine.into_iter().map(|o| o.end_state).collect();
        coarse_old = coarse_new;
        u_prev = u_curr;

        if jump <= cfg.tol {
            converged = true;
            break;
        }
    }

    let effective_steps = iterations_used as u64 * (n as u64 + fine_steps as u64);
    Ok(PinTResult {
        sync_values,
        jump_norms,
        sync_discontinuities,
        iterations_used,
        subintervals: n,
        fine_steps_per_subinterval: fine_steps,
        effective_steps,
        final_trajectory,
        iteration_trajectories,
        converged,
    })
}
