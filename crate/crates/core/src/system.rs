//! Problem abstraction and time partitioning.
//!
//! Every solver in this crate works on systems of the form
//!
//! ```text
//! M du/dt + K(u, t) u = f(t)
//! ```
//!
//! with a constant mass matrix `M`, a state-dependent matrix `K` and a source
//! `f`. `M` may be singular as long as `(M/dt + K(u, t))` stays invertible for
//! every step size a solver uses (index-1 condition); violations surface as
//! runtime errors, never as undefined behaviour.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense state vector of a [`DynamicalSystem`].
///
/// All entries must stay finite; the length is fixed by the system it belongs to.
pub type StateVector = DVector<f64>;

/// A semi-discrete DAE system `M du/dt + K(u, t) u = f(t)` with named scalar
/// observables.
///
/// Implementations must be pure: evaluating `stiffness`, `source` or an
/// observable twice with identical inputs has to produce bitwise-identical
/// results. This is what makes the parallel-in-time solvers deterministic and
/// lets them run evaluations concurrently from several workers.
pub trait DynamicalSystem: Send + Sync {
    /// Number of state components `m`.
    fn dimension(&self) -> usize;

    /// The constant mass matrix `M` (`m x m`).
    fn mass(&self) -> &DMatrix<f64>;

    /// The matrix `K(u, t)` (`m x m`).
    fn stiffness(&self, u: &StateVector, t: f64) -> DMatrix<f64>;

    /// The source term `f(t)` (length `m`).
    fn source(&self, t: f64) -> DVector<f64>;

    /// Optional analytic Jacobian of `u -> K(u, t) u`.
    ///
    /// When `None` (the default) the stepper falls back to a forward-difference
    /// approximation of the residual Jacobian.
    fn stiffness_jacobian(&self, _u: &StateVector, _t: f64) -> Option<DMatrix<f64>> {
        None
    }

    /// Names of the scalar observables this system exposes.
    fn observable_names(&self) -> Vec<String>;

    /// Name of the observable used for periodicity checks (e.g. torque).
    fn primary_observable(&self) -> String;

    /// Evaluate a named observable; `None` if the name is unknown.
    fn observe(&self, name: &str, u: &StateVector, t: f64) -> Option<f64>;
}

/// A window `[t_start, t_end]` split into `N` subintervals by synchronization
/// points `T_0 < T_1 < ... < T_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    t_start: f64,
    t_end: f64,
    sync_points: Vec<f64>,
}

impl TimePartition {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// The synchronization points, including both endpoints.
    pub fn sync_points(&self) -> &[f64] {
        &self.sync_points
    }

    /// Number of subintervals `N`.
    pub fn subintervals(&self) -> usize {
        self.sync_points.len() - 1
    }
}

/// Build a uniform partition of `[t_start, t_end]` into `n` subintervals.
///
/// Interior points are assigned as `t_start + j * (t_end - t_start) / n`; the
/// endpoints are taken verbatim from the inputs so periodicity comparisons at
/// the window boundaries are exact.
pub fn make_partition(t_start: f64, t_end: f64, n: usize) -> Result<TimePartition> {
    if !(t_start.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidArgument(
            "partition endpoints must be finite".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "partition needs at least one subinterval".into(),
        ));
    }
    if t_end <= t_start {
        return Err(Error::InvalidArgument(format!(
            "partition window is empty: t_end ({t_end}) must exceed t_start ({t_start})"
        )));
    }
    let length = t_end - t_start;
    let mut sync_points = Vec::with_capacity(n + 1);
    sync_points.push(t_start);
    for j in 1..n {
        sync_points.push(t_start + (j as f64) * length / (n as f64));
    }
    sync_points.push(t_end);
    Ok(TimePartition {
        t_start,
        t_end,
        sync_points,
    })
}

/// Settings for the Newton iteration inside the implicit-Euler stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute tolerance on the residual norm.
    pub abs_tol: f64,
    /// Tolerance on the Newton step norm relative to the iterate norm.
    pub rel_tol: f64,
    /// Maximum number of Newton updates per step.
    pub max_iter: usize,
    /// Perturbation used by the forward-difference Jacobian.
    pub fd_epsilon: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_iter: 25,
            fd_epsilon: 1e-7,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.fd_epsilon > 0.0) {
            return Err(Error::InvalidArgument(
                "Newton tolerances and fd_epsilon must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "Newton max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of [`validate_system`]: a list of findings, empty when the system
/// looks well posed.
#[derive(Debug, Clone, Default)]
pub struct SystemReport {
    pub findings: Vec<String>,
}

impl SystemReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }
}

impl std::fmt::Display for SystemReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.findings.join("; "))
        }
    }
}

/// Probe a system at `(probe, t)`: checks matrix shapes, finiteness of `K`,
/// `f` and the observables, and that the iteration matrix `(M/dt + K)` admits
/// an LU factorization. Findings are reported, not raised.
pub fn validate_system(
    sys: &dyn DynamicalSystem,
    probe: &StateVector,
    t: f64,
    dt: f64,
) -> SystemReport {
    let mut report = SystemReport::default();
    let m = sys.dimension();
    if probe.len() != m {
        report.findings.push(format!(
            "probe length {} does not match system dimension {}",
            probe.len(),
            m
        ));
        return report;
    }
    if dt <= 0.0 || !dt.is_finite() {
        report
            .findings
            .push(format!("step size must be positive and finite, got {dt}"));
        return report;
    }

    let mass = sys.mass();
    if mass.nrows() != m || mass.ncols() != m {
        report.findings.push(format!(
            "mass matrix is {}x{}, expected {}x{}",
            mass.nrows(),
            mass.ncols(),
            m,
            m
        ));
        return report;
    }
    if mass.iter().any(|x| !x.is_finite()) {
        report.findings.push("non-finite mass matrix".into());
    }

    let stiffness = sys.stiffness(probe, t);
    if stiffness.nrows() != m || stiffness.ncols() != m {
        report.findings.push(format!(
            "stiffness matrix is {}x{}, expected {}x{}",
            stiffness.nrows(),
            stiffness.ncols(),
            m,
            m
        ));
        return report;
    }
    if stiffness.iter().any(|x| !x.is_finite()) {
        report.findings.push("non-finite stiffness matrix".into());
    }

    let source = sys.source(t);
    if source.len() != m {
        report.findings.push(format!(
            "source vector has length {}, expected {}",
            source.len(),
            m
        ));
    } else if source.iter().any(|x| !x.is_finite()) {
        report.findings.push("non-finite source".into());
    }

    if report.findings.iter().all(|f| !f.contains("non-finite")) {
        let iteration_matrix = mass / dt + &stiffness;
        if crate::stepper::dense_solve(&iteration_matrix, &DVector::zeros(m)).is_err() {
            report
                .findings
                .push("singular iteration matrix (M/dt + K)".into());
        }
    }

    for name in sys.observable_names() {
        match sys.observe(&name, probe, t) {
            Some(v) if v.is_finite() => {}
            Some(_) => report
                .findings
                .push(format!("non-finite observable '{name}'")),
            None => report
                .findings
                .push(format!("observable '{name}' not evaluable")),
        }
    }
    if sys.observe(&sys.primary_observable(), probe, t).is_none() {
        report.findings.push(format!(
            "primary observable '{}' is not exposed by the system",
            sys.primary_observable()
        ));
    }

    report
}
