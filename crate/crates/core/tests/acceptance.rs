//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them).

use nalgebra::{dvector, DVector};
use parasteady::config::ExperimentConfig;
use parasteady::metrics::{effective_steps, speedup_estimate};
use parasteady::models::{
    index1_dae, rl_circuit, toy_machine, Index1DaeParams, RLCircuitParams, ToyMachineParams,
};
use parasteady::pint::{parareal, ppic, ppic_with_update, InitialUpdate, PinTConfig};
use parasteady::propagate::{propagate, PropagatorSpec};
use parasteady::steady::{sequential_steady_state, tpeec_steady_state, SteadyStateConfig};
use parasteady::system::{make_partition, DynamicalSystem, StateVector, TimePartition};

const PERIOD_50HZ: f64 = 0.02;

fn bits(v: &StateVector) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Apply the fine propagator across every subinterval in sequence (the same
/// grid the parallel-in-time iterations use).
fn period_map(
    sys: &dyn DynamicalSystem,
    part: &TimePartition,
    spec: &PropagatorSpec,
    from: &StateVector,
) -> StateVector {
    let points = part.sync_points();
    let mut u = from.clone();
    for j in 1..points.len() {
        u = propagate(sys, points[j - 1], points[j], &u, spec)
            .unwrap()
            .end_state;
    }
    u
}

/// Iterate the period map until it is bitwise stationary.
fn periodic_fixed_point(
    sys: &dyn DynamicalSystem,
    part: &TimePartition,
    spec: &PropagatorSpec,
) -> StateVector {
    let mut w = DVector::zeros(sys.dimension());
    for _ in 0..500 {
        let next = period_map(sys, part, spec, &w);
        let stationary = bits(&next) == bits(&w);
        w = next;
        if stationary {
            return w;
        }
    }
    panic!("period map did not become stationary");
}

#[test]
fn criterion_01_effective_step_and_speedup_arithmetic() {
    let op1 = effective_steps(12, 80, 84).unwrap();
    let op2 = effective_steps(4, 154, 160).unwrap();
    assert_eq!(op1, 1968);
    assert_eq!(op2, 1256);
    let s1 = speedup_estimate(56160, op1).unwrap();
    let s2 = speedup_estimate(25920, op2).unwrap();
    assert!((28.0..=29.0).contains(&s1), "speedup {s1}");
    assert!((20.0..=21.0).contains(&s2), "speedup {s2}");
    println!("criterion 01 PASS: effective steps {op1}/{op2}, speedups {s1:.2}/{s2:.2}");
}

#[test]
fn criterion_02_parareal_finite_termination() {
    let sys = rl_circuit(RLCircuitParams::default()).unwrap();
    let n = 4;
    let part = make_partition(0.0, PERIOD_50HZ, n).unwrap();
    let mut cfg = PinTConfig::new(1e-5, 5e-3, 1e-15, n);
    cfg.fine.record_trajectory = false;
    let result = parareal(&sys, &part, &dvector![0.0], &cfg).unwrap();
    assert_eq!(result.iterations_used, n);

    let points = part.sync_points();
    let mut reference = vec![dvector![0.0]];
    for j in 1..=n {
        reference.push(
            propagate(&sys, points[j - 1], points[j], &reference[j - 1], &cfg.fine)
                .unwrap()
                .end_state,
        );
    }
    let after_n = &result.sync_values[n];
    let mut worst = 0.0f64;
    for j in 0..=n {
        let rel = (&after_n[j] - &reference[j]).norm() / (1.0 + reference[j].norm());
        worst = worst.max(rel);
        assert!(rel <= 1e-10, "sync point {j}: relative deviation {rel}");
    }
    println!("criterion 02 PASS: after {n} iterations max deviation {worst:.2e} (<= 1e-10)");
}

#[test]
fn criterion_03_coarse_equals_fine_exactness() {
    // (model, partition, shared fine/coarse step)
    let rl = rl_circuit(RLCircuitParams::default()).unwrap();
    let machine = toy_machine(ToyMachineParams {
        prescribed_speed: Some(0.5),
        ..ToyMachineParams::default()
    })
    .unwrap();
    let dae = index1_dae(Index1DaeParams {
        decay: 26.0,
        ..Index1DaeParams::default()
    })
    .unwrap();
    let cases: [(&str, &dyn DynamicalSystem, f64); 3] = [
        ("rl_circuit", &rl, 1e-3),
        ("toy_machine", &machine, 2.5e-3),
        ("index1_dae", &dae, 2.5e-3),
    ];

    for (name, sys, step) in cases {
        let part = make_partition(0.0, PERIOD_50HZ, 4).unwrap();
        let cfg = PinTConfig::new(step, step, 1e-14, 3);

        let zero = DVector::zeros(sys.dimension());
        let para = parareal(sys, &part, &zero, &cfg).unwrap();
        assert!(para.converged, "{name}: parareal did not converge");
        assert_eq!(para.iterations_used, 1, "{name}");
        assert!(
            para.jump_norms[0] <= 1e-14,
            "{name}: {}",
            para.jump_norms[0]
        );

        // PP-IC from the fixed point of the discrete period map.
        let seed = periodic_fixed_point(sys, &part, &cfg.fine);
        let pp = ppic(sys, &part, &seed, &cfg).unwrap();
        assert!(pp.converged, "{name}: ppic did not converge");
        assert_eq!(pp.iterations_used, 1, "{name}");
        assert!(pp.jump_norms[0] <= 1e-14, "{name}: {}", pp.jump_norms[0]);
        println!(
            "criterion 03 PASS ({name}): parareal jump {:.2e}, ppic jump {:.2e} after 1 iteration",
            para.jump_norms[0], pp.jump_norms[0]
        );
    }
}

#[test]
fn criterion_04_ppic_steady_state_waveform() {
    let params = RLCircuitParams::default();
    let sys = rl_circuit(params).unwrap();
    let part = make_partition(0.0, PERIOD_50HZ, 4).unwrap();
    let omega = 2.0 * std::f64::consts::PI * params.source_frequency;
    let tan = omega * params.inductance / params.resistance;
    let amp = params.source_amplitude / (1.0 + tan * tan).sqrt();
    let lag = tan.atan();

    let mut report = Vec::new();
    for (fine_dt, bound) in [(1e-5, 1e-3), (1e-6, 1e-4)] {
        let cfg = PinTConfig::new(fine_dt, 5e-3, 1e-8, 80);
        let result = ppic(&sys, &part, &dvector![0.0], &cfg).unwrap();
        assert!(result.converged, "PP-IC did not converge at dt {fine_dt}");

        let traj = result.final_trajectory.as_ref().unwrap();
        let max_err = traj
            .times()
            .iter()
            .zip(traj.states())
            .map(|(&t, u)| (u[0] - amp * (omega * t - lag).sin()).abs())
            .fold(0.0f64, f64::max);
        let rel = max_err / (1.0 + amp);
        assert!(
            rel <= bound,
            "dt {fine_dt}: steady-state deviation {rel} above {bound}"
        );
        assert!(
            result.sync_discontinuities[1] <= 0.5 * result.sync_discontinuities[0],
            "dt {fine_dt}: jumps {:?} did not halve",
            &result.sync_discontinuities[..2]
        );
        report.push(format!("dt {fine_dt}: deviation {rel:.2e} <= {bound}"));
    }
    println!("criterion 04 PASS: {}", report.join("; "));
}

#[test]
fn criterion_05_ppic_beats_sequential_on_the_machine() {
    let params = ToyMachineParams {
        prescribed_speed: Some(0.5),
        ..ToyMachineParams::default()
    };
    let sys = toy_machine(params).unwrap();
    let fine_dt = 1e-5;
    let tolerance = 1e-3;

    let n = 16;
    let part = make_partition(0.0, PERIOD_50HZ, n).unwrap();
    let cfg = PinTConfig::new(fine_dt, PERIOD_50HZ / n as f64, tolerance, 200);
    let pp = ppic(&sys, &part, &DVector::zeros(3), &cfg).unwrap();
    assert!(pp.converged, "PP-IC did not converge");

    let steady_cfg = SteadyStateConfig::new(PERIOD_50HZ, fine_dt, tolerance, 400);
    let seq = sequential_steady_state(&sys, &DVector::zeros(3), &steady_cfg).unwrap();
    assert!(seq.converged, "sequential did not converge");

    let ratio = seq.total_steps as f64 / pp.effective_steps as f64;
    assert!(
        pp.effective_steps < seq.total_steps && ratio >= 2.0,
        "effective {} vs sequential {} (ratio {ratio:.2})",
        pp.effective_steps,
        seq.total_steps
    );
    println!(
        "criterion 05 PASS: PP-IC {} effective steps vs {} sequential (ratio {ratio:.1})",
        pp.effective_steps, seq.total_steps
    );
}

#[test]
fn criterion_06_tpeec_acceleration_and_failure_mode() {
    // Slow transient: time constant 0.1 s against a 0.02 s period.
    let sys = rl_circuit(RLCircuitParams {
        inductance: 0.1,
        ..RLCircuitParams::default()
    })
    .unwrap();
    let cfg = SteadyStateConfig::new(PERIOD_50HZ, 1e-4, 1e-3, 300);
    let seq = sequential_steady_state(&sys, &dvector![0.0], &cfg).unwrap();
    let eec = tpeec_steady_state(&sys, &dvector![0.0], &cfg).unwrap();
    assert!(seq.converged && eec.converged);
    assert!(
        eec.total_steps < seq.total_steps,
        "tpeec {} vs sequential {}",
        eec.total_steps,
        seq.total_steps
    );

    // Correcting with a period incommensurate with the source diverges.
    let mismatched = rl_circuit(RLCircuitParams::default()).unwrap();
    let bad_cfg = SteadyStateConfig::new(0.027, 1e-4, 1e-3, 60);
    let diverged = tpeec_steady_state(&mismatched, &dvector![0.0], &bad_cfg).unwrap();
    assert!(!diverged.converged, "mismatched period must not converge");
    println!(
        "criterion 06 PASS: tpeec {} solves vs sequential {} ({}x); mismatched period converged={}",
        eec.total_steps,
        seq.total_steps,
        seq.total_steps / eec.total_steps,
        diverged.converged
    );
}

#[test]
fn criterion_07_implicit_euler_first_order() {
    let params = RLCircuitParams::default();
    let sys = rl_circuit(params).unwrap();
    let omega = 2.0 * std::f64::consts::PI * params.source_frequency;
    let tan = omega * params.inductance / params.resistance;
    let amp = params.source_amplitude / (1.0 + tan * tan).sqrt();
    let lag = tan.atan();
    let tau = params.inductance / params.resistance;
    let exact = |t: f64| amp * (omega * t - lag).sin() + amp * lag.sin() * (-t / tau).exp();

    let mut errors = Vec::new();
    for &dt in &[4e-4, 2e-4, 1e-4] {
        let out = propagate(
            &sys,
            0.0,
            PERIOD_50HZ,
            &dvector![0.0],
            &PropagatorSpec::recording(dt),
        )
        .unwrap();
        let traj = out.trajectory.unwrap();
        let err = traj
            .times()
            .iter()
            .zip(traj.states())
            .map(|(&t, u)| (u[0] - exact(t)).abs())
            .fold(0.0f64, f64::max);
        errors.push(err);
    }
    let mut orders = Vec::new();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (0.9..=1.1).contains(&order),
            "observed order {order}, errors {errors:?}"
        );
        orders.push(order);
    }
    println!("criterion 07 PASS: observed orders {orders:.2?} within [0.9, 1.1]");
}

#[test]
fn criterion_08_worker_count_determinism() {
    let text = r#"{
        "model": {"type": "toy_machine", "prescribed_speed": 0.5},
        "method": "ppic",
        "window": {"period": 0.02},
        "fine_dt": 1e-4,
        "coarse_dt": 2.5e-3,
        "tol": 1e-6,
        "max_iter": 60
    }"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let sys = cfg.build_system().unwrap();
    let part = make_partition(0.0, 0.02, 8).unwrap();
    let pint_cfg = PinTConfig::new(1e-4, 2.5e-3, 1e-6, 60);

    let dir = tempfile::tempdir().unwrap();
    let mut outputs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for workers in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let result =
            pool.install(|| ppic(sys.as_ref(), &part, &DVector::zeros(3), &pint_cfg).unwrap());
        assert!(result.converged);
        let traj_path = dir.path().join(format!("traj_{workers}.csv"));
        let conv_path = dir.path().join(format!("conv_{workers}.csv"));
        parasteady::output::write_trajectory_csv(
            &traj_path,
            result.final_trajectory.as_ref().unwrap(),
        )
        .unwrap();
        parasteady::output::write_pint_convergence_csv(&conv_path, &result).unwrap();
        outputs.push((
            std::fs::read(&traj_path).unwrap(),
            std::fs::read(&conv_path).unwrap(),
        ));
    }
    assert!(
        outputs.windows(2).all(|w| w[0] == w[1]),
        "CSV bytes differ across worker counts"
    );
    println!("criterion 08 PASS: identical results and CSV bytes for 1, 2 and 8 workers");
}

#[test]
fn criterion_09_index1_dae_constraint() {
    let p = Index1DaeParams::default();
    let sys = index1_dae(p).unwrap();
    let report = parasteady::validate_system(&sys, &DVector::zeros(2), 0.0, 1e-4);
    assert!(report.is_ok(), "{report}");

    let out = propagate(
        &sys,
        0.0,
        3.0 * PERIOD_50HZ,
        &dvector![0.3, 0.1], // deliberately inconsistent start
        &PropagatorSpec::recording(1e-4),
    )
    .unwrap();
    let traj = out.trajectory.unwrap();
    let mut worst = 0.0f64;
    for u in traj.states().iter().skip(1) {
        let residual = (p.constraint_x * u[0] + p.constraint_y * u[1]).abs();
        worst = worst.max(residual);
        assert!(residual <= 1e-10, "constraint residual {residual}");
    }
    println!(
        "criterion 09 PASS: worst algebraic residual {worst:.2e} over {} steps",
        traj.steps_taken()
    );
}

#[test]
fn criterion_10_ppic_parareal_kinship() {
    let rl = rl_circuit(RLCircuitParams::default()).unwrap();
    let machine = toy_machine(ToyMachineParams {
        prescribed_speed: Some(0.5),
        ..ToyMachineParams::default()
    })
    .unwrap();
    let dae = index1_dae(Index1DaeParams::default()).unwrap();
    let cases: [(&str, &dyn DynamicalSystem); 3] = [
        ("rl_circuit", &rl),
        ("toy_machine", &machine),
        ("index1_dae", &dae),
    ];

    for (name, sys) in cases {
        let part = make_partition(0.0, PERIOD_50HZ, 4).unwrap();
        let u0 = DVector::zeros(sys.dimension());
        let mut cfg = PinTConfig::new(2.5e-4, 5e-3, 1e-30, 4);
        cfg.fine.record_trajectory = false;
        let reference = parareal(sys, &part, &u0, &cfg).unwrap();

        let mut shifted = cfg.clone();
        shifted.max_iter = cfg.max_iter + 1;
        let fixed =
            ppic_with_update(sys, &part, &u0, &shifted, InitialUpdate::Fixed(u0.clone())).unwrap();

        for k in 0..=cfg.max_iter {
            let a = &reference.sync_values[k];
            let b = &fixed.sync_values[k + 1];
            for j in 0..a.len() {
                assert_eq!(
                    bits(&a[j]),
                    bits(&b[j]),
                    "{name}: iterate {k}, sync point {j}"
                );
            }
        }
        for k in 0..reference.jump_norms.len() {
            assert_eq!(
                reference.jump_norms[k].to_bits(),
                fixed.jump_norms[k + 1].to_bits(),
                "{name}: jump {k}"
            );
        }
        println!(
            "criterion 10 PASS ({name}): fixed-initial-value PP-IC reproduces Parareal bitwise"
        );
    }
}
