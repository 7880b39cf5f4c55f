#ifndef PARASTEADY_H
#define PARASTEADY_H

/* Generated by cbindgen from parasteady-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every API call.
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_SINGULAR = 3,
  PS_STATUS_NO_CONVERGENCE = 4,
  PS_STATUS_NON_FINITE = 5,
  PS_STATUS_DIVISION_BY_ZERO = 6,
  PS_STATUS_PANIC = 7,
} PsStatus;

// Opaque handle to a Parareal/PP-IC result.
typedef struct PsPintResult PsPintResult;

// Opaque handle to a steady-state result.
typedef struct PsSteadyResult PsSteadyResult;

// Opaque handle to a dynamical system.
typedef struct PsSystem PsSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the message of the last failed call on this thread into `buffer`
// (truncating if needed, always NUL-terminated when `capacity > 0`) and
// return the full message length in bytes, excluding the NUL.
size_t ps_last_error_message(char *buffer, size_t capacity);

// Build the linear RL-circuit model (state: inductor current).
enum PsStatus ps_rl_circuit_new(double inductance,
                                double resistance,
                                double source_amplitude,
                                double source_frequency,
                                struct PsSystem **out);

// Build the three-state machine surrogate (state: flux-like, angle, speed).
// With `has_prescribed_speed` the mechanical rows follow the prescription.
enum PsStatus ps_toy_machine_new(double sigma_mass,
                                 double nu0,
                                 double sat_alpha,
                                 double inertia,
                                 double friction,
                                 double torque_coeff,
                                 double source_amplitude,
                                 double source_frequency,
                                 bool has_prescribed_speed,
                                 double prescribed_speed,
                                 struct PsSystem **out);

// Build the two-state linear index-1 DAE (singular mass matrix).
enum PsStatus ps_index1_dae_new(double decay,
                                double coupling,
                                double constraint_x,
                                double constraint_y,
                                double source_amplitude,
                                double source_frequency,
                                struct PsSystem **out);

void ps_system_free(struct PsSystem *sys);

// Number of state components; 0 for a null handle.
size_t ps_system_dimension(const struct PsSystem *sys);

// Probe the system at the zero state: checks shapes, finiteness and that the
// iteration matrix factorizes for the given step size.
enum PsStatus ps_system_validate(const struct PsSystem *sys, double t, double dt);

// Classical Parareal on `[t_start, t_end]` split into `subintervals`.
// `u0` may be null for a zero initial state. Non-convergence within
// `max_iter` is reported through `ps_pint_converged`, not as a status.
enum PsStatus ps_parareal(const struct PsSystem *sys,
                          double t_start,
                          double t_end,
                          size_t subintervals,
                          const double *u0,
                          size_t u0_len,
                          double fine_dt,
                          double coarse_dt,
                          double tol,
                          size_t max_iter,
                          struct PsPintResult **out);

// Periodic Parareal with initial-value coarse problem on one period
// `[t_start, t_start + period]`. `u_guess` may be null for a zero guess.
enum PsStatus ps_ppic(const struct PsSystem *sys,
                      double t_start,
                      double period,
                      size_t subintervals,
                      const double *u_guess,
                      size_t u_guess_len,
                      double fine_dt,
                      double coarse_dt,
                      double tol,
                      size_t max_iter,
                      struct PsPintResult **out);

void ps_pint_result_free(struct PsPintResult *result);

bool ps_pint_converged(const struct PsPintResult *result);

size_t ps_pint_iterations(const struct PsPintResult *result);

size_t ps_pint_subintervals(const struct PsPintResult *result);

size_t ps_pint_fine_steps_per_subinterval(const struct PsPintResult *result);

// Sequentialized cost `iterations * (subintervals + fine steps per subinterval)`.
uint64_t ps_pint_effective_steps(const struct PsPintResult *result);

// Jump norm of iteration `index` (0-based, `ps_pint_iterations` entries).
enum PsStatus ps_pint_jump_norm(const struct PsPintResult *result, size_t index, double *out);

// Copy the end-of-window value of the final iterate into `buffer`.
enum PsStatus ps_pint_final_state(const struct PsPintResult *result, double *buffer, size_t length);

size_t ps_pint_trajectory_len(const struct PsPintResult *result);

// Fetch sample `index` of the final trajectory: its time and, when `state`
// is non-null, the state vector.
enum PsStatus ps_pint_trajectory_sample(const struct PsPintResult *result,
                                        size_t index,
                                        double *time,
                                        double *state,
                                        size_t state_len);

// Sequential time stepping until the periodicity error of the observable
// (null: the system's primary observable) drops below `epsilon`.
enum PsStatus ps_sequential_steady_state(const struct PsSystem *sys,
                                         const double *u0,
                                         size_t u0_len,
                                         double t_start,
                                         double period,
                                         double dt,
                                         double epsilon,
                                         size_t max_periods,
                                         const char *observable,
                                         struct PsSteadyResult **out);

// Sequential stepping with the simplified TP-EEC half-period correction.
enum PsStatus ps_tpeec_steady_state(const struct PsSystem *sys,
                                    const double *u0,
                                    size_t u0_len,
                                    double t_start,
                                    double period,
                                    double dt,
                                    double epsilon,
                                    size_t max_periods,
                                    const char *observable,
                                    struct PsSteadyResult **out);

void ps_steady_result_free(struct PsSteadyResult *result);

bool ps_steady_converged(const struct PsSteadyResult *result);

// First period that met the tolerance; 0 when none did.
size_t ps_steady_k_star(const struct PsSteadyResult *result);

size_t ps_steady_periods(const struct PsSteadyResult *result);

uint64_t ps_steady_total_steps(const struct PsSteadyResult *result);

size_t ps_steady_steps_per_period(const struct PsSteadyResult *result);

size_t ps_steady_corrections_applied(const struct PsSteadyResult *result);

// Periodicity error of period `index` (0-based, `ps_steady_periods` entries).
enum PsStatus ps_steady_err(const struct PsSteadyResult *result, size_t index, double *out);

size_t ps_steady_trajectory_len(const struct PsSteadyResult *result);

// Fetch sample `index` of the final-period trajectory.
enum PsStatus ps_steady_trajectory_sample(const struct PsSteadyResult *result,
                                          size_t index,
                                          double *time,
                                          double *state,
                                          size_t state_len);

// Effective time steps `iterations * (subintervals + fine_steps_per_subinterval)`.
enum PsStatus ps_effective_steps(uint64_t iterations,
                                 uint64_t subintervals,
                                 uint64_t fine_steps_per_subinterval,
                                 uint64_t *out);

// Ratio of sequential to effective steps.
enum PsStatus ps_speedup_estimate(uint64_t sequential_steps, uint64_t effective_steps, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARASTEADY_H */
