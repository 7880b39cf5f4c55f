//! JSON experiment configuration.
//!
//! One document describes one experiment: a model, a time window, solver
//! settings and output file names. Unknown keys are rejected so typos fail
//! fast. All times are seconds, frequencies hertz.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::{
    index1_dae, rl_circuit, toy_machine, Index1DaeParams, RLCircuitParams, ToyMachineParams,
};
use crate::system::DynamicalSystem;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// Method for `run`; `compare` uses `methods` instead.
    #[serde(default)]
    pub method: Option<MethodName>,
    /// Methods for `compare` (at least two).
    #[serde(default)]
    pub methods: Option<Vec<MethodName>>,
    pub window: WindowConfig,
    /// Fine step; doubles as the sequential/TP-EEC step.
    #[serde(default)]
    pub fine_dt: Option<f64>,
    /// Coarse step; equals the subinterval length, so it fixes the number of
    /// subintervals.
    #[serde(default)]
    pub coarse_dt: Option<f64>,
    /// Jump-norm tolerance of the parallel-in-time iterations.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Periodicity-error tolerance of the steady-state drivers.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub max_periods: Option<usize>,
    /// Worker threads for the fine solves; 0 or absent picks the default.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Observable driving the periodicity error; defaults to the model's
    /// primary observable.
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    RlCircuit(RLCircuitParams),
    ToyMachine(ToyMachineParams),
    Index1Dae(Index1DaeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum MethodName {
    Sequential,
    Parareal,
    Ppic,
    Tpeec,
}

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Sequential => "sequential",
            MethodName::Parareal => "parareal",
            MethodName::Ppic => "ppic",
            MethodName::Tpeec => "tpeec",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default)]
    pub t_start: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Period length; required by ppic, sequential and tpeec.
    #[serde(default)]
    pub period: Option<f64>,
    /// Period budget for the steady-state drivers (alias of `max_periods`).
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub trajectory: Option<String>,
    #[serde(default)]
    pub convergence: Option<String>,
    #[serde(default)]
    pub cost: Option<String>,
    #[serde(default)]
    pub comparison: Option<String>,
}

impl OutputsConfig {
    pub fn trajectory_file(&self) -> &str {
        self.trajectory.as_deref().unwrap_or("trajectory.csv")
    }
    pub fn convergence_file(&self) -> &str {
        self.convergence.as_deref().unwrap_or("convergence.csv")
    }
    pub fn cost_file(&self) -> &str {
        self.cost.as_deref().unwrap_or("cost.csv")
    }
    pub fn comparison_file(&self) -> &str {
        self.comparison.as_deref().unwrap_or("comparison.csv")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn build_system(&self) -> Result<Box<dyn DynamicalSystem>> {
        Ok(match self.model {
            ModelConfig::RlCircuit(p) => Box::new(rl_circuit(p)?),
            ModelConfig::ToyMachine(p) => Box::new(toy_machine(p)?),
            ModelConfig::Index1Dae(p) => Box::new(index1_dae(p)?),
        })
    }

    pub fn t_start(&self) -> f64 {
        self.window.t_start.unwrap_or(0.0)
    }

    /// Window end for the initial-value methods.
    pub fn t_end(&self) -> Result<f64> {
        match (self.window.t_end, self.window.period) {
            (Some(t_end), _) => Ok(t_end),
            (None, Some(period)) => Ok(self.t_start() + period),
            (None, None) => Err(Error::InvalidArgument(
                "window needs either t_end or period".into(),
            )),
        }
    }

    /// Period length for the periodic methods.
    pub fn period(&self) -> Result<f64> {
        match (self.window.period, self.window.t_end) {
            (Some(period), _) => Ok(period),
            (None, Some(t_end)) => {
                let period = t_end - self.t_start();
                if period > 0.0 {
                    Ok(period)
                } else {
                    Err(Error::InvalidArgument("window is empty".into()))
                }
            }
            (None, None) => Err(Error::InvalidArgument(
                "window needs either period or t_end".into(),
            )),
        }
    }

    pub fn max_periods(&self) -> Result<usize> {
        self.window
            .count
            .or(self.max_periods)
            .ok_or_else(|| Error::InvalidArgument("max_periods (or window.count) missing".into()))
    }

    pub fn fine_dt(&self) -> Result<f64> {
        self.fine_dt
            .ok_or_else(|| Error::InvalidArgument("fine_dt missing".into()))
    }

    pub fn coarse_dt(&self) -> Result<f64> {
        self.coarse_dt
            .ok_or_else(|| Error::InvalidArgument("coarse_dt missing".into()))
    }

    pub fn tol(&self) -> Result<f64> {
        self.tol
            .ok_or_else(|| Error::InvalidArgument("tol missing".into()))
    }

    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon
            .ok_or_else(|| Error::InvalidArgument("epsilon missing".into()))
    }

    pub fn max_iter(&self) -> Result<usize> {
        self.max_iter
            .ok_or_else(|| Error::InvalidArgument("max_iter missing".into()))
    }

    /// Subinterval count implied by the coarse step: the window must be an
    /// integer multiple of `coarse_dt` (one coarse step per subinterval).
    pub fn subintervals(&self, window_length: f64) -> Result<usize> {
        let coarse_dt = self.coarse_dt()?;
        if !(coarse_dt > 0.0) {
            return Err(Error::InvalidArgument("coarse_dt must be positive".into()));
        }
        let ratio = window_length / coarse_dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::InvalidArgument(format!(
                "window must be an integer multiple of coarse_dt, got ratio {ratio}"
            )));
        }
        Ok(n as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_ppic_config() {
        let text = r#"{
            "model": {"type": "rl_circuit", "inductance": 0.01},
            "method": "ppic",
            "window": {"t_start": 0.0, "period": 0.02},
            "fine_dt": 1e-5,
            "coarse_dt": 5e-3,
            "tol": 1e-8,
            "max_iter": 50,
            "workers": 2
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(matches!(cfg.method, Some(MethodName::Ppic)));
        assert_eq!(cfg.period().unwrap(), 0.02);
        assert_eq!(cfg.subintervals(0.02).unwrap(), 4);
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.dimension(), 1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "model": {"type": "rl_circuit"},
            "window": {"period": 0.02},
            "fine_dtt": 1e-5
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
        let text = r#"{
            "model": {"type": "rl_circuit", "inductances": 0.01},
            "window": {"period": 0.02}
        }"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn model_defaults_fill_in() {
        let text = r#"{
            "model": {"type": "toy_machine", "prescribed_speed": 100.0},
            "window": {"period": 0.02}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.dimension(), 3);
        assert_eq!(sys.primary_observable(), "torque");
    }

    #[test]
    fn window_validation() {
        let text = r#"{
            "model": {"type": "rl_circuit"},
            "window": {"t_start": 0.0}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(cfg.t_end().is_err());
        assert!(cfg.period().is_err());
    }

    #[test]
    fn subinterval_count_requires_divisibility() {
        let text = r#"{
            "model": {"type": "rl_circuit"},
            "window": {"period": 0.02},
            "coarse_dt": 3e-3
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert!(cfg.subintervals(0.02).is_err());
    }
}
