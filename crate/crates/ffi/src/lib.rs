//! C ABI for the periodic steady-state solvers.
//!
//! The interface follows the usual opaque-handle pattern: constructors
//! allocate a handle and hand it back through an out-parameter, every call
//! returns a [`PsStatus`], and the matching `*_free` function releases the
//! handle. Handles are immutable after construction and safe to share across
//! threads for read access. On any non-OK status a human-readable message is
//! stored thread-locally and can be fetched with [`ps_last_error_message`].
//!
//! The generated header lives at `include/parasteady.h`.

// Pointer contracts are uniform across the API (see the module docs and the
// generated header); C-style flat argument lists are deliberate.
#![allow(clippy::missing_safety_doc)]
#![allow(clippy::too_many_arguments)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DVector;
use parasteady::error::Error;
use parasteady::models::{
    index1_dae, rl_circuit, toy_machine, Index1DaeParams, RLCircuitParams, ToyMachineParams,
};
use parasteady::pint::{parareal, ppic, PinTConfig, PinTResult};
use parasteady::propagate::Trajectory;
use parasteady::steady::{
    sequential_steady_state, tpeec_steady_state, SteadyStateConfig, SteadyStateResult,
};
use parasteady::system::{make_partition, validate_system, DynamicalSystem, StateVector};

/// Status code returned by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Singular = 3,
    NoConvergence = 4,
    NonFinite = 5,
    DivisionByZero = 6,
    Panic = 7,
}

/// Opaque handle to a dynamical system.
pub struct PsSystem {
    inner: Box<dyn DynamicalSystem>,
}

/// Opaque handle to a Parareal/PP-IC result.
pub struct PsPintResult {
    inner: PinTResult,
}

/// Opaque handle to a steady-state result.
pub struct PsSteadyResult {
    inner: SteadyStateResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: PsStatus, message: &str) -> PsStatus {
    set_error(message);
    status
}

fn status_of(error: &Error) -> PsStatus {
    match error {
        Error::InvalidArgument(_) => PsStatus::InvalidArgument,
        Error::Singular(_) => PsStatus::Singular,
        Error::NoConvergence { .. } => PsStatus::NoConvergence,
        Error::NonFinite(_) => PsStatus::NonFinite,
        Error::DivisionByZero(_) => PsStatus::DivisionByZero,
        Error::AtStep { source, .. } => status_of(source),
    }
}

fn from_error(error: &Error) -> PsStatus {
    fail(status_of(error), &error.to_string())
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> PsStatus {
    if out.is_null() {
        return fail(PsStatus::NullPointer, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    PsStatus::Ok
}

/// Initial state from a caller buffer; a null pointer means the zero state.
unsafe fn state_or_zero(
    ptr: *const f64,
    len: usize,
    dimension: usize,
) -> Result<StateVector, PsStatus> {
    if ptr.is_null() {
        return Ok(DVector::zeros(dimension));
    }
    if len != dimension {
        return Err(fail(
            PsStatus::InvalidArgument,
            &format!("state buffer has length {len}, system dimension is {dimension}"),
        ));
    }
    let slice = std::slice::from_raw_parts(ptr, len);
    Ok(DVector::from_column_slice(slice))
}

fn guarded<T>(op: impl FnOnce() -> Result<T, PsStatus>) -> Result<T, PsStatus> {
    match catch_unwind(AssertUnwindSafe(op)) {
        Ok(result) => result,
        Err(_) => Err(fail(PsStatus::Panic, "internal panic")),
    }
}

/// Copy the message of the last failed call on this thread into `buffer`
/// (truncating if needed, always NUL-terminated when `capacity > 0`) and
/// return the full message length in bytes, excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn ps_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Build the linear RL-circuit model (state: inductor current).
#[no_mangle]
pub unsafe extern "C" fn ps_rl_circuit_new(
    inductance: f64,
    resistance: f64,
    source_amplitude: f64,
    source_frequency: f64,
    out: *mut *mut PsSystem,
) -> PsStatus {
    match rl_circuit(RLCircuitParams {
        inductance,
        resistance,
        source_amplitude,
        source_frequency,
    }) {
        Ok(sys) => give(
            out,
            PsSystem {
                inner: Box::new(sys),
            },
        ),
        Err(e) => from_error(&e),
    }
}

/// Build the three-state machine surrogate (state: flux-like, angle, speed).
/// With `has_prescribed_speed` the mechanical rows follow the prescription.
#[no_mangle]
pub unsafe extern "C" fn ps_toy_machine_new(
    sigma_mass: f64,
    nu0: f64,
    sat_alpha: f64,
    inertia: f64,
    friction: f64,
    torque_coeff: f64,
    source_amplitude: f64,
    source_frequency: f64,
    has_prescribed_speed: bool,
    prescribed_speed: f64,
    out: *mut *mut PsSystem,
) -> PsStatus {
    match toy_machine(ToyMachineParams {
        sigma_mass,
        nu0,
        sat_alpha,
        inertia,
        friction,
        torque_coeff,
        source_amplitude,
        source_frequency,
        prescribed_speed: has_prescribed_speed.then_some(prescribed_speed),
    }) {
        Ok(sys) => give(
            out,
            PsSystem {
                inner: Box::new(sys),
            },
        ),
        Err(e) => from_error(&e),
    }
}

/// Build the two-state linear index-1 DAE (singular mass matrix).
#[no_mangle]
pub unsafe extern "C" fn ps_index1_dae_new(
    decay: f64,
    coupling: f64,
    constraint_x: f64,
    constraint_y: f64,
    source_amplitude: f64,
    source_frequency: f64,
    out: *mut *mut PsSystem,
) -> PsStatus {
    match index1_dae(Index1DaeParams {
        decay,
        coupling,
        constraint_x,
        constraint_y,
        source_amplitude,
        source_frequency,
    }) {
        Ok(sys) => give(
            out,
            PsSystem {
                inner: Box::new(sys),
            },
        ),
        Err(e) => from_error(&e),
    }
}

#[no_mangle]
pub unsafe extern "C" fn ps_system_free(sys: *mut PsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of state components; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ps_system_dimension(sys: *const PsSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.dimension())
}

/// Probe the system at the zero state: checks shapes, finiteness and that the
/// iteration matrix factorizes for the given step size.
#[no_mangle]
pub unsafe extern "C" fn ps_system_validate(sys: *const PsSystem, t: f64, dt: f64) -> PsStatus {
    let Some(sys) = sys.as_ref() else {
        return fail(PsStatus::NullPointer, "system handle is null");
    };
    let probe = DVector::zeros(sys.inner.dimension());
    let report = validate_system(sys.inner.as_ref(), &probe, t, dt);
    if report.is_ok() {
        PsStatus::Ok
    } else {
        fail(PsStatus::InvalidArgument, &report.to_string())
    }
}

unsafe fn run_pint(
    sys: *const PsSystem,
    t_start: f64,
    t_end: f64,
    subintervals: usize,
    initial: *const f64,
    initial_len: usize,
    fine_dt: f64,
    coarse_dt: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut PsPintResult,
    periodic: bool,
) -> PsStatus {
    let Some(sys) = sys.as_ref() else {
        return fail(PsStatus::NullPointer, "system handle is null");
    };
    let result = guarded(|| {
        let u0 = state_or_zero(initial, initial_len, sys.inner.dimension())?;
        let part = make_partition(t_start, t_end, subintervals).map_err(|e| from_error(&e))?;
        let cfg = PinTConfig::new(fine_dt, coarse_dt, tol, max_iter);
        let run = if periodic {
            ppic(sys.inner.as_ref(), &part, &u0, &cfg)
        } else {
            parareal(sys.inner.as_ref(), &part, &u0, &cfg)
        };
        run.map_err(|e| from_error(&e))
    });
    match result {
        Ok(inner) => give(out, PsPintResult { inner }),
        Err(status) => status,
    }
}

/// Classical Parareal on `[t_start, t_end]` split into `subintervals`.
/// `u0` may be null for a zero initial state. Non-convergence within
/// `max_iter` is reported through `ps_pint_converged`, not as a status.
#[no_mangle]
pub unsafe extern "C" fn ps_parareal(
    sys: *const PsSystem,
    t_start: f64,
    t_end: f64,
    subintervals: usize,
    u0: *const f64,
    u0_len: usize,
    fine_dt: f64,
    coarse_dt: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut PsPintResult,
) -> PsStatus {
    run_pint(
        sys,
        t_start,
        t_end,
        subintervals,
        u0,
        u0_len,
        fine_dt,
        coarse_dt,
        tol,
        max_iter,
        out,
        false,
    )
}

/// Periodic Parareal with initial-value coarse problem on one period
/// `[t_start, t_start + period]`. `u_guess` may be null for a zero guess.
#[no_mangle]
pub unsafe extern "C" fn ps_ppic(
    sys: *const PsSystem,
    t_start: f64,
    period: f64,
    subintervals: usize,
    u_guess: *const f64,
    u_guess_len: usize,
    fine_dt: f64,
    coarse_dt: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut PsPintResult,
) -> PsStatus {
    run_pint(
        sys,
        t_start,
        t_start + period,
        subintervals,
        u_guess,
        u_guess_len,
        fine_dt,
        coarse_dt,
        tol,
        max_iter,
        out,
        true,
    )
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_result_free(result: *mut PsPintResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_converged(result: *const PsPintResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.converged)
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_iterations(result: *const PsPintResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.iterations_used)
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_subintervals(result: *const PsPintResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.subintervals)
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_fine_steps_per_subinterval(result: *const PsPintResult) -> usize {
    result
        .as_ref()
        .map_or(0, |r| r.inner.fine_steps_per_subinterval)
}

/// Sequentialized cost `iterations * (subintervals + fine steps per subinterval)`.
#[no_mangle]
pub unsafe extern "C" fn ps_pint_effective_steps(result: *const PsPintResult) -> u64 {
    result.as_ref().map_or(0, |r| r.inner.effective_steps)
}

/// Jump norm of iteration `index` (0-based, `ps_pint_iterations` entries).
#[no_mangle]
pub unsafe extern "C" fn ps_pint_jump_norm(
    result: *const PsPintResult,
    index: usize,
    out: *mut f64,
) -> PsStatus {
    let Some(result) = result.as_ref() else {
        return fail(PsStatus::NullPointer, "result handle is null");
    };
    if out.is_null() {
        return fail(PsStatus::NullPointer, "output pointer is null");
    }
    match result.inner.jump_norms.get(index) {
        Some(&v) => {
            *out = v;
            PsStatus::Ok
        }
        None => fail(
            PsStatus::InvalidArgument,
            &format!(
                "iteration index {index} out of range ({} iterations)",
                result.inner.jump_norms.len()
            ),
        ),
    }
}

/// Copy the end-of-window value of the final iterate into `buffer`.
#[no_mangle]
pub unsafe extern "C" fn ps_pint_final_state(
    result: *const PsPintResult,
    buffer: *mut f64,
    length: usize,
) -> PsStatus {
    let Some(result) = result.as_ref() else {
        return fail(PsStatus::NullPointer, "result handle is null");
    };
    let last = result
        .inner
        .sync_values
        .last()
        .and_then(|values| values.last());
    let Some(state) = last else {
        return fail(PsStatus::InvalidArgument, "result holds no iterate");
    };
    copy_state(state, buffer, length)
}

#[no_mangle]
pub unsafe extern "C" fn ps_pint_trajectory_len(result: *const PsPintResult) -> usize {
    result
        .as_ref()
        .and_then(|r| r.inner.final_trajectory.as_ref())
        .map_or(0, Trajectory::len)
}

/// Fetch sample `index` of the final trajectory: its time and, when `state`
/// is non-null, the state vector.
#[no_mangle]
pub unsafe extern "C" fn ps_pint_trajectory_sample(
    result: *const PsPintResult,
    index: usize,
    time: *mut f64,
    state: *mut f64,
    state_len: usize,
) -> PsStatus {
    let Some(result) = result.as_ref() else {
        return fail(PsStatus::NullPointer, "result handle is null");
    };
    let Some(traj) = result.inner.final_trajectory.as_ref() else {
        return fail(PsStatus::InvalidArgument, "no trajectory was recorded");
    };
    trajectory_sample(traj, index, time, state, state_len)
}

unsafe fn run_steady(
    sys: *const PsSystem,
    u0: *const f64,
    u0_len: usize,
    t_start: f64,
    period: f64,
    dt: f64,
    epsilon: f64,
    max_periods: usize,
    observable: *const c_char,
    out: *mut *mut PsSteadyResult,
    with_correction: bool,
) -> PsStatus {
    let Some(sys) = sys.as_ref() else {
        return fail(PsStatus::NullPointer, "system handle is null");
    };
    let observable = if observable.is_null() {
        None
    } else {
        match CStr::from_ptr(observable).to_str() {
            Ok(name) => Some(name.to_string()),
            Err(_) => {
                return fail(PsStatus::InvalidArgument, "observable name is not UTF-8");
            }
        }
    };
    let result = guarded(|| {
        let u0 = state_or_zero(u0, u0_len, sys.inner.dimension())?;
        let mut cfg = SteadyStateConfig::new(period, dt, epsilon, max_periods);
        cfg.t_start = t_start;
        cfg.observable = observable;
        let run = if with_correction {
            tpeec_steady_state(sys.inner.as_ref(), &u0, &cfg)
        } else {
            sequential_steady_state(sys.inner.as_ref(), &u0, &cfg)
        };
        run.map_err(|e| from_error(&e))
    });
    match result {
        Ok(inner) => give(out, PsSteadyResult { inner }),
        Err(status) => status,
    }
}

/// Sequential time stepping until the periodicity error of the observable
/// (null: the system's primary observable) drops below `epsilon`.
#[no_mangle]
pub unsafe extern "C" fn ps_sequential_steady_state(
    sys: *const PsSystem,
    u0: *const f64,
    u0_len: usize,
    t_start: f64,
    period: f64,
    dt: f64,
    epsilon: f64,
    max_periods: usize,
    observable: *const c_char,
    out: *mut *mut PsSteadyResult,
) -> PsStatus {
    run_steady(
        sys,
        u0,
        u0_len,
        t_start,
        period,
        dt,
        epsilon,
        max_periods,
        observable,
        out,
        false,
    )
}

/// Sequential stepping with the simplified TP-EEC half-period correction.
#[no_mangle]
pub unsafe extern "C" fn ps_tpeec_steady_state(
    sys: *const PsSystem,
    u0: *const f64,
    u0_len: usize,
    t_start: f64,
    period: f64,
    dt: f64,
    epsilon: f64,
    max_periods: usize,
    observable: *const c_char,
    out: *mut *mut PsSteadyResult,
) -> PsStatus {
    run_steady(
        sys,
        u0,
        u0_len,
        t_start,
        period,
        dt,
        epsilon,
        max_periods,
        observable,
        out,
        true,
    )
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_result_free(result: *mut PsSteadyResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_converged(result: *const PsSteadyResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.converged)
}

/// First period that met the tolerance; 0 when none did.
#[no_mangle]
pub unsafe extern "C" fn ps_steady_k_star(result: *const PsSteadyResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.k_star.unwrap_or(0))
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_periods(result: *const PsSteadyResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.periods_run)
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_total_steps(result: *const PsSteadyResult) -> u64 {
    result.as_ref().map_or(0, |r| r.inner.total_steps)
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_steps_per_period(result: *const PsSteadyResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.steps_per_period)
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_corrections_applied(result: *const PsSteadyResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.corrections_applied)
}

/// Periodicity error of period `index` (0-based, `ps_steady_periods` entries).
#[no_mangle]
pub unsafe extern "C" fn ps_steady_err(
    result: *const PsSteadyResult,
    index: usize,
    out: *mut f64,
) -> PsStatus {
    let Some(result) = result.as_ref() else {
        return fail(PsStatus::NullPointer, "result handle is null");
    };
    if out.is_null() {
        return fail(PsStatus::NullPointer, "output pointer is null");
    }
    match result.inner.err_history.get(index) {
        Some(&v) => {
            *out = v;
            PsStatus::Ok
        }
        None => fail(
            PsStatus::InvalidArgument,
            &format!(
                "period index {index} out of range ({} periods)",
                result.inner.err_history.len()
            ),
        ),
    }
}

#[no_mangle]
pub unsafe extern "C" fn ps_steady_trajectory_len(result: *const PsSteadyResult) -> usize {
    result
        .as_ref()
        .map_or(0, |r| r.inner.final_period_trajectory.len())
}

/// Fetch sample `index` of the final-period trajectory.
#[no_mangle]
pub unsafe extern "C" fn ps_steady_trajectory_sample(
    result: *const PsSteadyResult,
    index: usize,
    time: *mut f64,
    state: *mut f64,
    state_len: usize,
) -> PsStatus {
    let Some(result) = result.as_ref() else {
        return fail(PsStatus::NullPointer, "result handle is null");
    };
    trajectory_sample(
        &result.inner.final_period_trajectory,
        index,
        time,
        state,
        state_len,
    )
}

/// Effective time steps `iterations * (subintervals + fine_steps_per_subinterval)`.
#[no_mangle]
pub unsafe extern "C" fn ps_effective_steps(
    iterations: u64,
    subintervals: u64,
    fine_steps_per_subinterval: u64,
    out: *mut u64,
) -> PsStatus {
    if out.is_null() {
        return fail(PsStatus::NullPointer, "output pointer is null");
    }
    match parasteady::metrics::effective_steps(iterations, subintervals, fine_steps_per_subinterval)
    {
        Ok(v) => {
            *out = v;
            PsStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

/// Ratio of sequential to effective steps.
#[no_mangle]
pub unsafe extern "C" fn ps_speedup_estimate(
    sequential_steps: u64,
    effective_steps: u64,
    out: *mut f64,
) -> PsStatus {
    if out.is_null() {
        return fail(PsStatus::NullPointer, "output pointer is null");
    }
    match parasteady::metrics::speedup_estimate(sequential_steps, effective_steps) {
        Ok(v) => {
            *out = v;
            PsStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

unsafe fn copy_state(state: &StateVector, buffer: *mut f64, length: usize) -> PsStatus {
    if buffer.is_null() {
        return fail(PsStatus::NullPointer, "state buffer is null");
    }
    if length != state.len() {
        return fail(
            PsStatus::InvalidArgument,
            &format!(
                "buffer length {length} does not match state length {}",
                state.len()
            ),
        );
    }
    std::ptr::copy_nonoverlapping(state.as_ptr(), buffer, length);
    PsStatus::Ok
}

unsafe fn trajectory_sample(
    traj: &Trajectory,
    index: usize,
    time: *mut f64,
    state: *mut f64,
    state_len: usize,
) -> PsStatus {
    if index >= traj.len() {
        return fail(
            PsStatus::InvalidArgument,
            &format!("sample index {index} out of range ({} samples)", traj.len()),
        );
    }
    if !time.is_null() {
        *time = traj.times()[index];
    }
    if !state.is_null() {
        return copy_state(&traj.states()[index], state, state_len);
    }
    PsStatus::Ok
}
