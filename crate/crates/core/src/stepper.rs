//! One implicit-Euler step via Newton's method.
//!
//! The step from `u_prev` to `u_next` over `dt` solves
//!
//! ```text
//! (M/dt + K(u_next, t_next)) u_next = f(t_next) + (M/dt) u_prev
//! ```
//!
//! with a fully implicit right-hand side. The Jacobian of the residual is
//! approximated by forward differences unless the system supplies an analytic
//! one, and the linear solves use dense LU with partial pivoting. Dimensions
//! here are tiny, so robustness wins over speed everywhere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::{DynamicalSystem, NewtonConfig, StateVector};

/// Relative pivot threshold below which LU declares the matrix singular.
const PIVOT_THRESHOLD: f64 = 1e-14;

/// What a single nonlinear solve cost and how it ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Newton updates performed.
    pub newton_iterations: usize,
    /// Residual norm at the accepted iterate.
    pub final_residual_norm: f64,
    /// Linear systems factorized and solved.
    pub linear_solves: usize,
}

/// Solve `A x = b` by LU decomposition with partial pivoting.
///
/// Deterministic: ties in pivot selection always keep the first candidate. A
/// pivot whose magnitude falls below `1e-14` times the largest initial column
/// norm is treated as singular.
pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side length {} does not match matrix size {}",
            b.len(),
            n
        )));
    }

    let max_column_norm = (0..n).map(|j| a.column(j).norm()).fold(0.0f64, f64::max);
    let threshold = PIVOT_THRESHOLD * max_column_norm;

    let mut lu = a.clone();
    let mut x = b.clone();

    for k in 0..n {
        // Partial pivoting: first row with the largest magnitude in column k.
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag <= threshold {
            return Err(Error::Singular(format!(
                "pivot {pivot_mag:.3e} at column {k} below threshold {threshold:.3e}"
            )));
        }
        if pivot_row != k {
            lu.swap_rows(pivot_row, k);
            x.swap_rows(pivot_row, k);
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                lu[(i, j)] -= factor * lu[(k, j)];
            }
            x[i] -= factor * x[k];
        }
    }

    for k in (0..n).rev() {
        let mut sum = x[k];
        for j in (k + 1)..n {
            sum -= lu[(k, j)] * x[j];
        }
        x[k] = sum / lu[(k, k)];
    }
    Ok(x)
}

/// Forward-difference Jacobian of `residual` at `u`: column `j` is
/// `(F(u + eps e_j) - F(u)) / eps`.
pub fn fd_jacobian<F>(residual: F, u: &StateVector, eps: f64) -> DMatrix<f64>
where
    F: Fn(&StateVector) -> DVector<f64>,
{
    let base = residual(u);
    let m = base.len();
    let n = u.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut perturbed = u.clone();
    for j in 0..n {
        let saved = perturbed[j];
        perturbed[j] = saved + eps;
        let shifted = residual(&perturbed);
        perturbed[j] = saved;
        for i in 0..m {
            jac[(i, j)] = (shifted[i] - base[i]) / eps;
        }
    }
    jac
}

/// Damping-free Newton iteration `u <- u - J(u)^{-1} F(u)`.
///
/// Stops when the residual norm drops below `abs_tol` or the step norm below
/// `rel_tol * ||u||`, whichever comes first.
pub fn newton_solve<F, J>(
    residual: F,
    jacobian: J,
    u0: &StateVector,
    cfg: &NewtonConfig,
) -> Result<(StateVector, StepReport)>
where
    F: Fn(&StateVector) -> DVector<f64>,
    J: Fn(&StateVector) -> DMatrix<f64>,
{
    cfg.validate()?;
    let mut u = u0.clone();
    let mut f = residual(&u);
    if f.len() != u.len() {
        return Err(Error::InvalidArgument(format!(
            "residual length {} does not match iterate length {}",
            f.len(),
            u.len()
        )));
    }
    ensure_finite(&f, "Newton residual")?;

    let mut iterations = 0;
    let mut linear_solves = 0;
    loop {
        let residual_norm = f.norm();
        if residual_norm <= cfg.abs_tol {
            return Ok((
                u,
                StepReport {
                    newton_iterations: iterations,
                    final_residual_norm: residual_norm,
                    linear_solves,
                },
            ));
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual_norm,
                last_iterate: u.iter().copied().collect(),
            });
        }

        let jac = jacobian(&u);
        let step = dense_solve(&jac, &(-&f))?;
        linear_solves += 1;
        iterations += 1;
        u += &step;
        ensure_finite(&u, "Newton iterate")?;
        f = residual(&u);
        ensure_finite(&f, "Newton residual")?;

        if step.norm() <= cfg.rel_tol * u.norm() {
            return Ok((
                u,
                StepReport {
                    newton_iterations: iterations,
                    final_residual_norm: f.norm(),
                    linear_solves,
                },
            ));
        }
    }
}

/// Advance `u_prev` to `t_next` by one implicit-Euler step of size `dt`.
#[allow(clippy::needless_borrows_for_generic_args)] // jacobian borrows residual
pub fn implicit_euler_step(
    sys: &dyn DynamicalSystem,
    u_prev: &StateVector,
    t_next: f64,
    dt: f64,
    cfg: &NewtonConfig,
) -> Result<(StateVector, StepReport)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    if u_prev.len() != sys.dimension() {
        return Err(Error::InvalidArgument(format!(
            "state length {} does not match system dimension {}",
            u_prev.len(),
            sys.dimension()
        )));
    }
    ensure_finite(u_prev, "previous state")?;

    let mass_over_dt = sys.mass() / dt;
    let rhs = sys.source(t_next) + &mass_over_dt * u_prev;
    let residual = |u: &StateVector| (&mass_over_dt + sys.stiffness(u, t_next)) * u - &rhs;
    let jacobian = |u: &StateVector| match sys.stiffness_jacobian(u, t_next) {
        Some(jac_k) => &mass_over_dt + jac_k,
        None => fd_jacobian(&residual, u, cfg.fd_epsilon),
    };
    newton_solve(&residual, &jacobian, u_prev, cfg)
}

fn ensure_finite(v: &DVector<f64>, what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{what} contains NaN or infinity")));
    }
    Ok(())
}
