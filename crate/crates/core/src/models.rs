//! Desk-scale model systems.
//!
//! Three instances exercise the solver stack: a linear RL circuit driven by a
//! sinusoidal current source, a nonlinear three-state machine surrogate with
//! saturation and a torque-driven mechanical pair, and a two-state linear
//! index-1 DAE with a singular mass matrix.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{DynamicalSystem, StateVector};

const TAU: f64 = std::f64::consts::TAU;

/// Parameters of the RL circuit: a current source `i_s(t) = A sin(2 pi f t)`
/// feeding a parallel R-L pair; the state is the inductor current.
///
/// `L di/dt + R i = R A sin(2 pi f t)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RLCircuitParams {
    pub inductance: f64,
    pub resistance: f64,
    pub source_amplitude: f64,
    pub source_frequency: f64,
}

impl Default for RLCircuitParams {
    fn default() -> Self {
        // Time constant L/R = 0.01 s, half the 50 Hz period: a visible
        // multi-period transient.
        RLCircuitParams {
            inductance: 0.01,
            resistance: 1.0,
            source_amplitude: 1.0,
            source_frequency: 50.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RLCircuit {
    params: RLCircuitParams,
    mass: DMatrix<f64>,
    omega: f64,
}

/// Build the RL circuit model.
pub fn rl_circuit(params: RLCircuitParams) -> Result<RLCircuit> {
    if !(params.inductance > 0.0
        && params.resistance > 0.0
        && params.source_amplitude > 0.0
        && params.source_frequency > 0.0)
    {
        return Err(Error::InvalidArgument(
            "RL circuit parameters must all be positive".into(),
        ));
    }
    Ok(RLCircuit {
        mass: DMatrix::from_element(1, 1, params.inductance),
        omega: TAU * params.source_frequency,
        params,
    })
}

impl DynamicalSystem for RLCircuit {
    fn dimension(&self) -> usize {
        1
    }

    fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    fn stiffness(&self, _u: &StateVector, _t: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.params.resistance)
    }

    fn stiffness_jacobian(&self, _u: &StateVector, _t: f64) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, self.params.resistance))
    }

    fn source(&self, t: f64) -> DVector<f64> {
        DVector::from_element(
            1,
            self.params.resistance * self.params.source_amplitude * (self.omega * t).sin(),
        )
    }

    fn observable_names(&self) -> Vec<String> {
        vec!["current".into(), "source".into()]
    }

    fn primary_observable(&self) -> String {
        "current".into()
    }

    fn observe(&self, name: &str, u: &StateVector, t: f64) -> Option<f64> {
        match name {
            "current" => Some(u[0]),
            "source" => Some(self.params.source_amplitude * (self.omega * t).sin()),
            _ => None,
        }
    }
}

/// Parameters of the three-state machine surrogate with state `[a, angle,
/// speed]`.
///
/// The magnetic state obeys `m_sigma da/dt + nu(a) a = j sin(2 pi f t)` with a
/// saturating coefficient `nu(a) = nu0 (1 + alpha a^2)`; the mechanical pair
/// obeys `d(angle)/dt = speed` and
/// `inertia d(speed)/dt + friction * speed = torque(a)` with
/// `torque(a) = c_T a^2`.
///
/// With `prescribed_speed` set, the mechanical rows are replaced by algebraic
/// prescriptions `angle = speed * t`, `speed = const`, mirroring operation at
/// a fixed operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyMachineParams {
    pub sigma_mass: f64,
    pub nu0: f64,
    pub sat_alpha: f64,
    pub inertia: f64,
    pub friction: f64,
    pub torque_coeff: f64,
    pub source_amplitude: f64,
    pub source_frequency: f64,
    pub prescribed_speed: Option<f64>,
}

impl Default for ToyMachineParams {
    fn default() -> Self {
        // Chosen so Newton needs a couple of iterations per step.
        ToyMachineParams {
            sigma_mass: 0.05,
            nu0: 1.0,
            sat_alpha: 0.5,
            inertia: 1e-3,
            friction: 0.01,
            torque_coeff: 1.0,
            source_amplitude: 1.0,
            source_frequency: 50.0,
            prescribed_speed: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyMachine {
    params: ToyMachineParams,
    mass: DMatrix<f64>,
    omega: f64,
}

/// Build the machine surrogate.
pub fn toy_machine(params: ToyMachineParams) -> Result<ToyMachine> {
    if !(params.sigma_mass > 0.0 && params.nu0 > 0.0 && params.inertia > 0.0) {
        return Err(Error::InvalidArgument(
            "sigma_mass, nu0 and inertia must be positive".into(),
        ));
    }
    if !(params.sat_alpha >= 0.0 && params.friction >= 0.0 && params.torque_coeff >= 0.0) {
        return Err(Error::InvalidArgument(
            "sat_alpha, friction and torque_coeff must be non-negative".into(),
        ));
    }
    if !(params.source_frequency > 0.0) || !params.source_amplitude.is_finite() {
        return Err(Error::InvalidArgument(
            "source frequency must be positive and the amplitude finite".into(),
        ));
    }
    if let Some(speed) = params.prescribed_speed {
        if !speed.is_finite() {
            return Err(Error::InvalidArgument(
                "prescribed speed must be finite".into(),
            ));
        }
    }
    let mass = if params.prescribed_speed.is_some() {
        // Mechanical rows become algebraic prescriptions.
        DMatrix::from_diagonal(&DVector::from_vec(vec![params.sigma_mass, 0.0, 0.0]))
    } else {
        DMatrix::from_diagonal(&DVector::from_vec(vec![
            params.sigma_mass,
            1.0,
            params.inertia,
        ]))
    };
    Ok(ToyMachine {
        mass,
        omega: TAU * params.source_frequency,
        params,
    })
}

impl ToyMachine {
    fn saturation(&self, a: f64) -> f64 {
        self.params.nu0 * (1.0 + self.params.sat_alpha * a * a)
    }
}

impl DynamicalSystem for ToyMachine {
    fn dimension(&self) -> usize {
        3
    }

    fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    fn stiffness(&self, u: &StateVector, _t: f64) -> DMatrix<f64> {
        let nu = self.saturation(u[0]);
        let mut k = DMatrix::zeros(3, 3);
        k[(0, 0)] = nu;
        if self.params.prescribed_speed.is_some() {
            k[(1, 1)] = 1.0;
            k[(2, 2)] = 1.0;
        } else {
            // d(angle)/dt = speed and inertia d(speed)/dt + friction*speed = torque(a):
            // the torque enters through the lower-left block so that K u carries
            // -c_T a^2 into the speed row.
            k[(1, 2)] = -1.0;
            k[(2, 0)] = -self.params.torque_coeff * u[0];
            k[(2, 2)] = self.params.friction;
        }
        k
    }

    fn stiffness_jacobian(&self, u: &StateVector, _t: f64) -> Option<DMatrix<f64>> {
        // d/du of K(u) u: the saturation row contributes nu0 (1 + 3 alpha a^2),
        // the torque row -2 c_T a.
        let a = u[0];
        let d_nu_a = self.params.nu0 * (1.0 + 3.0 * self.params.sat_alpha * a * a);
        let mut jac = DMatrix::zeros(3, 3);
        jac[(0, 0)] = d_nu_a;
        if self.params.prescribed_speed.is_some() {
            jac[(1, 1)] = 1.0;
            jac[(2, 2)] = 1.0;
        } else {
            jac[(1, 2)] = -1.0;
            jac[(2, 0)] = -2.0 * self.params.torque_coeff * a;
            jac[(2, 2)] = self.params.friction;
        }
        Some(jac)
    }

    fn source(&self, t: f64) -> DVector<f64> {
        let excitation = self.params.source_amplitude * (self.omega * t).sin();
        match self.params.prescribed_speed {
            Some(speed) => DVector::from_vec(vec![excitation, speed * t, speed]),
            None => DVector::from_vec(vec![excitation, 0.0, 0.0]),
        }
    }

    fn observable_names(&self) -> Vec<String> {
        vec!["torque".into(), "angle".into(), "speed".into()]
    }

    fn primary_observable(&self) -> String {
        "torque".into()
    }

    fn observe(&self, name: &str, u: &StateVector, _t: f64) -> Option<f64> {
        match name {
            "torque" => Some(self.params.torque_coeff * u[0] * u[0]),
            "angle" => Some(u[1]),
            "speed" => Some(u[2]),
            _ => None,
        }
    }
}

/// Parameters of the two-state linear index-1 DAE
///
/// ```text
/// x' + decay * x + coupling * y = A sin(2 pi f t)
/// constraint_x * x + constraint_y * y = 0
/// ```
///
/// with mass matrix `diag(1, 0)`. The defaults reduce to
/// `x' + x/2 = sin(2 pi 50 t)` after eliminating `y = -x/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Index1DaeParams {
    pub decay: f64,
    pub coupling: f64,
    pub constraint_x: f64,
    pub constraint_y: f64,
    pub source_amplitude: f64,
    pub source_frequency: f64,
}

impl Default for Index1DaeParams {
    fn default() -> Self {
        Index1DaeParams {
            decay: 1.0,
            coupling: 1.0,
            constraint_x: 1.0,
            constraint_y: 2.0,
            source_amplitude: 1.0,
            source_frequency: 50.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Index1Dae {
    params: Index1DaeParams,
    mass: DMatrix<f64>,
    omega: f64,
}

/// Build the index-1 DAE model.
pub fn index1_dae(params: Index1DaeParams) -> Result<Index1Dae> {
    if params.constraint_y == 0.0 {
        return Err(Error::InvalidArgument(
            "algebraic row must have a nonzero coefficient on the algebraic state".into(),
        ));
    }
    // (M/dt + K) has determinant constraint_y/dt + (decay*constraint_y -
    // coupling*constraint_x); forbid a sign change over dt > 0.
    let constant_term = params.decay * params.constraint_y - params.coupling * params.constraint_x;
    if params.constraint_y * constant_term < 0.0 {
        return Err(Error::InvalidArgument(
            "coefficients make (M/dt + K) singular for some dt > 0".into(),
        ));
    }
    if !(params.source_frequency > 0.0) || !params.source_amplitude.is_finite() {
        return Err(Error::InvalidArgument(
            "source frequency must be positive and the amplitude finite".into(),
        ));
    }
    Ok(Index1Dae {
        mass: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
        omega: TAU * params.source_frequency,
        params,
    })
}

impl DynamicalSystem for Index1Dae {
    fn dimension(&self) -> usize {
        2
    }

    fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    fn stiffness(&self, _u: &StateVector, _t: f64) -> DMatrix<f64> {
        let p = &self.params;
        DMatrix::from_row_slice(2, 2, &[p.decay, p.coupling, p.constraint_x, p.constraint_y])
    }

    fn stiffness_jacobian(&self, u: &StateVector, t: f64) -> Option<DMatrix<f64>> {
        Some(self.stiffness(u, t))
    }

    fn source(&self, t: f64) -> DVector<f64> {
        DVector::from_vec(vec![
            self.params.source_amplitude * (self.omega * t).sin(),
            0.0,
        ])
    }

    fn observable_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into(), "constraint".into()]
    }

    fn primary_observable(&self) -> String {
        "x".into()
    }

    fn observe(&self, name: &str, u: &StateVector, _t: f64) -> Option<f64> {
        match name {
            "x" => Some(u[0]),
            "y" => Some(u[1]),
            "constraint" => Some(self.params.constraint_x * u[0] + self.params.constraint_y * u[1]),
            _ => None,
        }
    }
}
