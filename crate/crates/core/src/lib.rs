//! Time-periodic steady-state solvers for small nonlinear index-1 DAE
//! systems of the form `M du/dt + K(u, t) u = f(t)`.
//!
//! The crate provides four solution drivers on top of a shared implicit-Euler
//! stepper:
//!
//! * sequential time stepping with periodicity detection
//!   ([`steady::sequential_steady_state`]),
//! * classical Parareal for initial-value windows ([`pint::parareal`]),
//! * periodic Parareal with initial-value coarse problem, which iterates on
//!   one period directly ([`pint::ppic`]),
//! * the simplified TP-EEC half-period correction
//!   ([`steady::tpeec_steady_state`]).
//!
//! Costs are accounted in effective time steps ([`metrics`]), the unit that
//! stays meaningful when fine solves run in parallel. Everything is
//! deterministic: identical inputs produce bitwise-identical results at any
//! worker count.

// Negated comparisons like `!(x > 0.0)` are used on purpose: they also catch
// NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod metrics;
pub mod models;
pub mod output;
pub mod pint;
pub mod propagate;
pub mod steady;
pub mod stepper;
pub mod system;

pub use error::{Error, Result};
pub use pint::{parareal, ppic, PinTConfig, PinTResult};
pub use propagate::{propagate, PropagatorSpec, Trajectory};
pub use steady::{
    sequential_steady_state, tpeec_steady_state, SteadyStateConfig, SteadyStateResult,
};
pub use stepper::{implicit_euler_step, StepReport};
pub use system::{
    make_partition, validate_system, DynamicalSystem, NewtonConfig, StateVector, TimePartition,
};

// run code from the README
#[cfg(doctest)]
mod test_readme {
    macro_rules! external_doc_test {
        ($x:expr) => {
            #[doc = $x]
            extern "C" {}
        };
    }
    external_doc_test!(include_str!("../../../README.md"));
}
