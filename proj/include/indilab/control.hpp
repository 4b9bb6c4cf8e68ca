#pragma once

// Controller family over an arbitrary number of controlled channels:
//  - exact model inversion (NDI),
//  - incremental inversion against a full effectiveness matrix (G0 form) or
//    a diagonal blending gain (gbar form),
//  - time-delay control (TDC), algebraically identical to the gbar form but
//    implemented literally through its delay estimate,
//  - velocity-form PI / PID steps plus the gain maps that make them
//    reproduce the incremental laws step for step.
//
// All laws are pure per-step functions over ControllerMemory, which holds
// the previous sample pair and the previously applied control. Increment
// arithmetic is ordered identically across the laws: inc = a*edot + a*(b*e)
// per channel. Keep it that way — the cross-family agreement tests assert
// near-bit-level equality and exist precisely to pin this ordering.

#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "indilab/dynamics.hpp"
#include "indilab/errors.hpp"

namespace indilab::control {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace detail {

inline void require_size(const VectorXd& v, Eigen::Index n, const char* name) {
  if (v.size() != n) {
    std::ostringstream os;
    os << name << ": expected dimension " << n << ", got " << v.size();
    throw ConfigError(os.str());
  }
}

inline void require_finite(const VectorXd& v, const char* name) {
  if (!v.allFinite()) throw ConfigError(std::string(name) + ": non-finite entries");
}

/// Solves A x = b, refusing ill-conditioned systems with a diagnostic.
inline VectorXd solve_checked(const MatrixXd& A, const VectorXd& b,
                              const char* what) {
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || !std::isfinite(smax / smin) || smax / smin > 1e12) {
    const double cond = smin > 0.0 ? smax / smin : INFINITY;
    std::ostringstream os;
    os << what << ": effectiveness matrix is numerically singular"
       << " (condition estimate " << cond << ")";
    throw InversionError(os.str(), cond);
  }
  return svd.solve(b);
}

}  // namespace detail

// ============================================================================
// gain containers
// ============================================================================

/// Per-channel gains of the desired error dynamics. First order:
/// edot + kp*e = 0. Second order (kd set): eddot + kd*edot + kp*e = 0.
/// Stability of those target dynamics requires every gain positive, which is
/// enforced here once instead of in every consumer.
struct DesiredErrorDynamics {
  VectorXd kp;  // [1/s]
  VectorXd kd;  // [1/s], empty for first-order dynamics

  explicit DesiredErrorDynamics(VectorXd kp_in, VectorXd kd_in = VectorXd())
      : kp(std::move(kp_in)), kd(std::move(kd_in)) {
    if (kp.size() == 0) throw ConfigError("error dynamics: kp is empty");
    detail::require_finite(kp, "kp");
    if ((kp.array() <= 0.0).any())
      throw ConfigError("error dynamics: kp must be positive (Hurwitz)");
    if (kd.size() != 0) {
      detail::require_size(kd, kp.size(), "kd");
      detail::require_finite(kd, "kd");
      if ((kd.array() <= 0.0).any())
        throw ConfigError("error dynamics: kd must be positive (Hurwitz)");
    }
  }

  Eigen::Index channels() const { return kp.size(); }
  bool second_order() const { return kd.size() != 0; }
};

/// Diagonal control-effectiveness estimate gbar used by the incremental
/// laws. Two construction forms: a single scalar times identity, or one
/// entry per channel. Entries must be nonzero (sign carries the control
/// direction and may legitimately be negative).
struct EffectorBlendingGain {
  VectorXd diag;  // [rad/s^2 per rad] effective gain per channel

  static EffectorBlendingGain uniform(double value, Eigen::Index n) {
    return EffectorBlendingGain(VectorXd::Constant(n, value));
  }
  static EffectorBlendingGain per_axis(VectorXd values) {
    return EffectorBlendingGain(std::move(values));
  }

  explicit EffectorBlendingGain(VectorXd values) : diag(std::move(values)) {
    if (diag.size() == 0) throw ConfigError("blending gain: empty");
    detail::require_finite(diag, "blending gain");
    if ((diag.array() == 0.0).any())
      throw ConfigError("blending gain: entries must be nonzero");
  }

  Eigen::Index channels() const { return diag.size(); }
};

/// Velocity-form PI/PID gains, one set per channel. Td empty selects PI.
/// delta_dc is the absolute-form offset; it cancels in the velocity form
/// and is carried only so exported gain tables are complete.
struct PidGains {
  VectorXd K;         // proportional gain [rad per rad/s]
  VectorXd Ti;        // integral time [s]
  VectorXd Td;        // derivative time [s], empty for PI
  VectorXd delta_dc;  // absolute-form offset [rad]
  double ts = 0.0;    // sample time the gains were designed for [s]

  PidGains(VectorXd K_in, VectorXd Ti_in, VectorXd Td_in, VectorXd dc_in,
           double ts_in)
      : K(std::move(K_in)), Ti(std::move(Ti_in)), Td(std::move(Td_in)),
        delta_dc(std::move(dc_in)), ts(ts_in) {
    if (K.size() == 0) throw ConfigError("pid gains: K is empty");
    detail::require_finite(K, "K");
    detail::require_size(Ti, K.size(), "Ti");
    detail::require_finite(Ti, "Ti");
    if ((K.array() == 0.0).any()) throw ConfigError("pid gains: K must be nonzero");
    if ((Ti.array() == 0.0).any()) throw ConfigError("pid gains: Ti must be nonzero");
    if (Td.size() != 0) {
      detail::require_size(Td, K.size(), "Td");
      detail::require_finite(Td, "Td");
    }
    if (delta_dc.size() == 0) delta_dc = VectorXd::Zero(K.size());
    detail::require_size(delta_dc, K.size(), "delta_dc");
    if (!(std::isfinite(ts) && ts > 0.0))
      throw ConfigError("pid gains: sample time must be positive");
  }

  Eigen::Index channels() const { return K.size(); }
  bool has_derivative() const { return Td.size() != 0; }
};

// ============================================================================
// controller memory
// ============================================================================

/// Backward finite difference (x_now - x_prev) / ts.
inline VectorXd finite_diff(const VectorXd& x_now, const VectorXd& x_prev,
                            double ts) {
  if (!(std::isfinite(ts) && ts > 0.0))
    throw ConfigError("finite_diff: sample time must be positive");
  detail::require_size(x_prev, x_now.size(), "finite_diff previous sample");
  return (x_now - x_prev) / ts;
}

/// Sample memory shared by the incremental laws. Fields named with suffix 0
/// denote the stored (one-sample-delayed) quantities the laws consume:
/// the applied control, the error sample with its finite-difference
/// derivatives, and the acceleration signal of the controlled channels.
///
/// Initialization convention (first observe() call): the first measured
/// error is stored with zero derivatives, so no law produces a spurious
/// derivative kick on its first step, and the incremental families all start
/// from the same state. delta0 starts at the trim/initial deflection set by
/// set_initial().
struct ControllerMemory {
  VectorXd delta0;      // previously applied control [rad]
  VectorXd e0;          // stored error sample [rad/s]
  VectorXd edot0;       // fd error derivative [rad/s^2]
  VectorXd eddot0;      // fd second derivative [rad/s^3]
  VectorXd omega_dot0;  // acceleration signal of the controlled channels [rad/s^2]
  bool initialized = false;

  /// Sets the control the first increment builds on (actuator trim).
  void set_initial(const VectorXd& delta_trim) {
    delta0 = delta_trim;
    if (initialized) detail::require_size(e0, delta0.size(), "memory error state");
  }

  /// Folds one error sample into the memory, computing finite-difference
  /// derivatives against the previously stored sample.
  void observe(const VectorXd& e_now, double ts) {
    detail::require_finite(e_now, "error sample");
    if (!initialized) {
      if (delta0.size() == 0) delta0 = VectorXd::Zero(e_now.size());
      detail::require_size(delta0, e_now.size(), "memory initial control");
      e0 = e_now;
      edot0 = VectorXd::Zero(e_now.size());
      eddot0 = VectorXd::Zero(e_now.size());
      omega_dot0 = VectorXd::Zero(e_now.size());
      initialized = true;
      return;
    }
    detail::require_size(e_now, e0.size(), "error sample");
    VectorXd edot_new = finite_diff(e_now, e0, ts);
    eddot0 = finite_diff(edot_new, edot0, ts);
    edot0 = edot_new;
    e0 = e_now;
  }

  /// Grounds the next increment on the control actually applied to the
  /// plant (e.g. measured actuator output). With actuator dynamics in the
  /// loop this is what keeps the incremental laws well-posed; see sim.hpp.
  void ground_on(const VectorXd& delta_applied) {
    detail::require_size(delta_applied, delta0.size(), "applied control");
    delta0 = delta_applied;
  }

  void require_ready(const char* law) const {
    if (!initialized)
      throw ConfigError(std::string(law) + ": controller memory not initialized");
  }
};

// ============================================================================
// virtual control and exact inversion
// ============================================================================

/// First-order virtual control nu = ydot_d + kp .* e. Driving the output
/// derivative to nu realizes edot = -kp .* e.
inline VectorXd virtual_control(const DesiredErrorDynamics& dyn,
                                const VectorXd& e, const VectorXd& ydot_d) {
  detail::require_size(e, dyn.channels(), "error");
  detail::require_size(ydot_d, dyn.channels(), "reference derivative");
  return ydot_d + dyn.kp.cwiseProduct(e);
}

/// Exact rotational inversion: delta = G(omega)^-1 (nu - f(omega)).
/// Throws InversionError with a condition estimate if G is not invertible.
inline Vector3d ndi_control(const dynamics::RotationalModel& model,
                            const Vector3d& omega, const Vector3d& nu) {
  const Vector3d rhs = nu - model.f(omega);
  return detail::solve_checked(model.G(), rhs, "ndi_control");
}

// ============================================================================
// incremental laws
// ============================================================================

/// Incremental inversion against the full effectiveness matrix:
/// delta = delta0 + G0^-1 (nu - omega_dot0).
inline VectorXd indi_control_g0(const ControllerMemory& mem, const VectorXd& nu,
                                const MatrixXd& G0) {
  mem.require_ready("indi_control_g0");
  detail::require_size(nu, mem.delta0.size(), "nu");
  if (G0.rows() != mem.delta0.size() || G0.cols() != mem.delta0.size())
    throw ConfigError("indi_control_g0: G0 dimension mismatch");
  return mem.delta0 + detail::solve_checked(G0, nu - mem.omega_dot0,
                                            "indi_control_g0");
}

/// Incremental inversion against the diagonal blending gain:
/// delta = delta0 + gbar^-1 (nu - omega_dot0), element-wise division.
inline VectorXd indi_control_gbar(const ControllerMemory& mem,
                                  const VectorXd& nu,
                                  const EffectorBlendingGain& gbar) {
  mem.require_ready("indi_control_gbar");
  detail::require_size(nu, mem.delta0.size(), "nu");
  detail::require_size(gbar.diag, mem.delta0.size(), "gbar");
  return mem.delta0 + (nu - mem.omega_dot0).cwiseQuotient(gbar.diag);
}

/// Delay estimate of the unknown dynamics: Hbar = omega_dot0 - gbar*delta0.
/// This reconstructs everything the plant did at the stored sample except
/// the modeled control contribution.
inline VectorXd time_delay_estimate(const ControllerMemory& mem,
                                    const EffectorBlendingGain& gbar) {
  mem.require_ready("time_delay_estimate");
  detail::require_size(gbar.diag, mem.delta0.size(), "gbar");
  return mem.omega_dot0 - gbar.diag.cwiseProduct(mem.delta0);
}

/// Time-delay control, implemented literally through its estimate:
/// delta = gbar^-1 (nu - Hbar). Algebraically identical to
/// indi_control_gbar; kept as a separate route on purpose, and the tests
/// hold the two together to 1e-15.
inline VectorXd tdc_control(const ControllerMemory& mem, const VectorXd& nu,
                            const EffectorBlendingGain& gbar) {
  mem.require_ready("tdc_control");
  detail::require_size(nu, mem.delta0.size(), "nu");
  const VectorXd hbar = time_delay_estimate(mem, gbar);
  return (nu - hbar).cwiseQuotient(gbar.diag);
}

// ============================================================================
// discrete steps: INDI and velocity-form PI/PID
// ============================================================================

/// Sampled incremental inversion consuming the stored error sample:
/// delta = delta0 + [ edot0/gbar + (kp.*e0)/gbar ].
/// Term order is load-bearing; see file header.
inline VectorXd indi_discrete_step(ControllerMemory& mem,
                                   const DesiredErrorDynamics& dyn,
                                   const EffectorBlendingGain& gbar) {
  mem.require_ready("indi_discrete_step");
  detail::require_size(dyn.kp, mem.delta0.size(), "kp");
  detail::require_size(gbar.diag, mem.delta0.size(), "gbar");
  const VectorXd inc = mem.edot0.cwiseQuotient(gbar.diag) +
                       dyn.kp.cwiseProduct(mem.e0).cwiseQuotient(gbar.diag);
  VectorXd delta = mem.delta0 + inc;
  mem.delta0 = delta;
  return delta;
}

/// Velocity-form PI: delta = delta0 + [ (K*ts).*edot0 + (K*ts).*(e0/Ti) ].
inline VectorXd incremental_pi_step(ControllerMemory& mem,
                                    const PidGains& gains) {
  mem.require_ready("incremental_pi_step");
  detail::require_size(gains.K, mem.delta0.size(), "K");
  const VectorXd kts = gains.K * gains.ts;
  const VectorXd inc = kts.cwiseProduct(mem.edot0) +
                       kts.cwiseProduct(mem.e0.cwiseQuotient(gains.Ti));
  VectorXd delta = mem.delta0 + inc;
  mem.delta0 = delta;
  return delta;
}

/// Velocity-form PID: adds the second-difference term (K*ts).*(Td.*eddot0)
/// in front of the PI increment, preserving the shared term order.
inline VectorXd incremental_pid_step(ControllerMemory& mem,
                                     const PidGains& gains) {
  mem.require_ready("incremental_pid_step");
  if (!gains.has_derivative())
    throw ConfigError("incremental_pid_step: gains carry no derivative time");
  detail::require_size(gains.K, mem.delta0.size(), "K");
  const VectorXd kts = gains.K * gains.ts;
  const VectorXd inc = kts.cwiseProduct(gains.Td.cwiseProduct(mem.eddot0)) +
                       kts.cwiseProduct(mem.edot0) +
                       kts.cwiseProduct(mem.e0.cwiseQuotient(gains.Ti));
  VectorXd delta = mem.delta0 + inc;
  mem.delta0 = delta;
  return delta;
}

// ============================================================================
// gain maps
// ============================================================================

/// First-order map. A PI controller with
///   K = (gbar * ts)^-1,  Ti = 1/kp
/// stepped in velocity form reproduces the sampled incremental inversion
/// exactly (same increments, same memory), so PI gains can be read off an
/// INDI design. delta_dc is zero: it cancels in velocity form.
inline PidGains map_indi_to_pi(const DesiredErrorDynamics& dyn,
                               const EffectorBlendingGain& gbar, double ts) {
  if (!(std::isfinite(ts) && ts > 0.0))
    throw ConfigError("map_indi_to_pi: sample time must be positive");
  if (dyn.second_order())
    throw ConfigError("map_indi_to_pi: use map_indi_to_pid for second-order dynamics");
  detail::require_size(gbar.diag, dyn.channels(), "gbar");
  const VectorXd K = (gbar.diag * ts).cwiseInverse();
  const VectorXd Ti = dyn.kp.cwiseInverse();
  return PidGains(K, Ti, VectorXd(), VectorXd::Zero(dyn.channels()), ts);
}

/// Second-order map. For target dynamics eddot + kd*edot + kp*e = 0:
///   K = kd / (gbar * ts),  Ti = kd / kp,  Td = 1 / kd.
/// Requires kd; the degenerate kd -> inf limit is not represented.
inline PidGains map_indi_to_pid(const DesiredErrorDynamics& dyn,
                                const EffectorBlendingGain& gbar, double ts) {
  if (!(std::isfinite(ts) && ts > 0.0))
    throw ConfigError("map_indi_to_pid: sample time must be positive");
  if (!dyn.second_order())
    throw ConfigError("map_indi_to_pid: second-order dynamics (kd) required");
  detail::require_size(gbar.diag, dyn.channels(), "gbar");
  const VectorXd K = dyn.kd.cwiseQuotient(gbar.diag * ts);
  const VectorXd Ti = dyn.kd.cwiseQuotient(dyn.kp);
  const VectorXd Td = dyn.kd.cwiseInverse();
  return PidGains(K, Ti, Td, VectorXd::Zero(dyn.channels()), ts);
}

}  // namespace indilab::control
