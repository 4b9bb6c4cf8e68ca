#pragma once

// Plant models: rigid-body rotational dynamics, a pitch-plane (longitudinal)
// supersonic airframe, and a first-order fin actuator with an exact discrete
// update. Everything here is a pure value type plus free evaluation
// functions; integration and closed-loop wiring live in sim.hpp.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "indilab/errors.hpp"

namespace indilab::dynamics {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// ============================================================================
// Rigid-body rotational model
// ============================================================================

/// Body-axis rotational dynamics
///
///   omega_dot = I^-1 ( M_a(omega) + M_c * delta - omega x I omega )
///             = f(omega) + G * delta
///
/// The inertia tensor is restricted to the x-z plane-of-symmetry pattern
///
///   [ Ixx   0   Ixz ]
///   [  0   Iyy   0  ]
///   [ Ixz   0   Izz ]
///
/// which covers conventional airframes. Off-pattern products of inertia are
/// rejected at construction rather than silently accepted.
class RotationalModel {
 public:
  using AeroMomentFn = std::function<Vector3d(const Vector3d&)>;

  /// @param inertia               inertia tensor [kg m^2], x-z symmetric
  /// @param control_effectiveness moment per unit deflection, column j is the
  ///                              moment of effector j [N m / rad]
  /// @param aero_moment           state-dependent aerodynamic moment [N m];
  ///                              defaults to zero
  RotationalModel(const Matrix3d& inertia,
                  const Matrix3d& control_effectiveness,
                  AeroMomentFn aero_moment = nullptr)
      : inertia_(inertia),
        control_effectiveness_(control_effectiveness),
        aero_moment_(std::move(aero_moment)) {
    validate_inertia(inertia);
    if (!control_effectiveness.allFinite())
      throw ModelError("control effectiveness matrix has non-finite entries");
    inertia_inv_ = inertia.inverse();
    g_matrix_ = inertia_inv_ * control_effectiveness_;
  }

  const Matrix3d& inertia() const { return inertia_; }
  const Matrix3d& inertia_inverse() const { return inertia_inv_; }
  const Matrix3d& control_effectiveness() const { return control_effectiveness_; }

  /// Control effectiveness in acceleration units: G = I^-1 * M_c
  /// [rad/s^2 per rad]. State-independent for this model.
  const Matrix3d& G() const { return g_matrix_; }

  /// Aerodynamic moment at the given body rates [N m].
  Vector3d aero_moment(const Vector3d& omega) const {
    return aero_moment_ ? aero_moment_(omega) : Vector3d::Zero();
  }

  /// Drift term f(omega) = I^-1 (M_a(omega) - omega x I omega) [rad/s^2].
  Vector3d f(const Vector3d& omega) const {
    const Vector3d gyro = omega.cross(inertia_ * omega);
    return inertia_inv_ * (aero_moment(omega) - gyro);
  }

  /// Builds a linear rate-damping aero moment M_a = D * omega.
  static AeroMomentFn linear_damping(const Matrix3d& D) {
    return [D](const Vector3d& w) -> Vector3d { return D * w; };
  }

  /// Dimensional helper: moments from nondimensional coefficients,
  /// M = qbar*S * (b*Cl, cbar*Cm, b*Cn).
  static Vector3d moments_from_coefficients(double qbar_S, double span_b,
                                            double chord_cbar, double Cl,
                                            double Cm, double Cn) {
    return qbar_S * Vector3d(span_b * Cl, chord_cbar * Cm, span_b * Cn);
  }

 private:
  static void validate_inertia(const Matrix3d& I) {
    if (!I.allFinite()) throw ModelError("inertia tensor has non-finite entries");
    if (I(0, 1) != 0.0 || I(1, 0) != 0.0 || I(1, 2) != 0.0 || I(2, 1) != 0.0)
      throw ModelError(
          "inertia products Ixy/Iyz must be zero (x-z symmetric airframe)");
    if (I(0, 2) != I(2, 0))
      throw ModelError("inertia tensor must be symmetric (Ixz mismatch)");
    // positive definiteness for the allowed sparsity pattern
    const double det_xz = I(0, 0) * I(2, 2) - I(0, 2) * I(2, 0);
    if (!(I(0, 0) > 0.0) || !(I(1, 1) > 0.0) || !(det_xz > 0.0))
      throw ModelError("inertia tensor is not positive definite");
  }

  Matrix3d inertia_;                // [kg m^2]
  Matrix3d inertia_inv_;            // [1 / kg m^2]
  Matrix3d control_effectiveness_;  // [N m / rad]
  Matrix3d g_matrix_;               // [rad/s^2 / rad]
  AeroMomentFn aero_moment_;        // omega [rad/s] -> M_a [N m]
};

/// omega_dot = f(omega) + G * delta  [rad/s^2]
inline Vector3d rot_dynamics(const RotationalModel& model,
                             const Vector3d& omega, const Vector3d& delta) {
  return model.f(omega) + model.G() * delta;
}

// ============================================================================
// Longitudinal (pitch-plane) supersonic airframe
// ============================================================================

/// Nondimensional force/moment coefficients and fin effectiveness slopes at
/// one flight condition.
struct LongCoeffs {
  double Cz;  // normal force coefficient [-]
  double Cm;  // pitch moment coefficient [-]
  double bz;  // fin force slope dCz/ddelta [1/rad]
  double bm;  // fin moment slope dCm/ddelta [1/rad]
};

/// Validity envelope of the polynomial aero fit.
inline constexpr double kAlphaEnvelope = 10.0 * M_PI / 180.0;  // [rad]
inline constexpr double kMachMin = 1.8;                        // [-]
inline constexpr double kMachMax = 2.6;                        // [-]

/// Polynomial aero fit, valid for |alpha| <= 10 deg and Mach 1.8..2.6:
///
///   Cz = phi_z1(alpha) + phi_z2(alpha) * M      Cm likewise
///   phi_z1 = -288.7 a^3 + 50.32 a|a| - 23.89 a
///   phi_z2 = -13.53 a|a| + 4.185 a
///   phi_m1 =  303.1 a^3 - 246.3 a|a| - 37.56 a
///   phi_m2 =  71.51 a|a| + 10.01 a
///   bz     =  1.6238 M - 6.7240
///   bm     =  12.0393 M - 48.2246
///
/// Envelope checking is the caller's policy (see LongitudinalModel); this
/// function only rejects non-finite inputs.
inline LongCoeffs eval_long_coeffs(double alpha, double mach) {
  if (!std::isfinite(alpha) || !std::isfinite(mach))
    throw ModelError("eval_long_coeffs: non-finite alpha or mach");
  const double a = alpha;
  const double aa = a * std::abs(a);
  const double a3 = a * a * a;
  const double phi_z1 = -288.7 * a3 + 50.32 * aa - 23.89 * a;
  const double phi_z2 = -13.53 * aa + 4.185 * a;
  const double phi_m1 = 303.1 * a3 - 246.3 * aa - 37.56 * a;
  const double phi_m2 = 71.51 * aa + 10.01 * a;
  LongCoeffs c;
  c.Cz = phi_z1 + phi_z2 * mach;
  c.Cm = phi_m1 + phi_m2 * mach;
  c.bz = 1.6238 * mach - 6.7240;
  c.bm = 12.0393 * mach - 48.2246;
  return c;
}

enum class EnvelopeMode { Off, Warn, Strict };

/// Short-period pitch dynamics with a single tail fin,
/// state x = (alpha, q):
///
///   alpha_dot = q + C1 * (Cz(alpha, M) + bz(M) * u)
///   q_dot     =     C2 * (Cm(alpha, M) + bm(M) * u)
///
///   C1 = qbar S / (m V_T)        [1/s]
///   C2 = qbar S d / Iyy          [1/s^2]
///
/// The controlled output is the pitch rate q; its control effectiveness is
/// g2 = C2 * bm(M), constant at fixed Mach.
class LongitudinalModel {
 public:
  /// All parameters must be strictly positive; Mach is checked against the
  /// aero fit envelope according to `envelope`.
  LongitudinalModel(double qbar, double S, double d, double mass, double VT,
                    double Iyy, double mach,
                    EnvelopeMode envelope = EnvelopeMode::Warn)
      : qbar_(qbar), S_(S), d_(d), mass_(mass), VT_(VT), Iyy_(Iyy),
        mach_(mach), envelope_(envelope) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(qbar) || !positive(S) || !positive(d) || !positive(mass) ||
        !positive(VT) || !positive(Iyy) || !positive(mach))
      throw ModelError("longitudinal model parameters must be positive and finite");
    if (envelope_ == EnvelopeMode::Strict && !mach_in_envelope())
      throw ModelError("mach " + std::to_string(mach) +
                       " outside aero fit envelope [1.8, 2.6]");
    C1_ = qbar_ * S_ / (mass_ * VT_);
    C2_ = qbar_ * S_ * d_ / Iyy_;
  }

  double qbar() const { return qbar_; }    // dynamic pressure [Pa]
  double S() const { return S_; }          // reference area [m^2]
  double d() const { return d_; }          // reference length [m]
  double mass() const { return mass_; }    // [kg]
  double VT() const { return VT_; }        // true airspeed [m/s]
  double Iyy() const { return Iyy_; }      // pitch inertia [kg m^2]
  double mach() const { return mach_; }    // [-]
  EnvelopeMode envelope_mode() const { return envelope_; }

  double C1() const { return C1_; }  // [1/s]
  double C2() const { return C2_; }  // [1/s^2]

  bool mach_in_envelope() const { return mach_ >= kMachMin && mach_ <= kMachMax; }
  bool alpha_in_envelope(double alpha) const {
    return std::abs(alpha) <= kAlphaEnvelope;
  }

  LongCoeffs coeffs(double alpha) const { return eval_long_coeffs(alpha, mach_); }

  /// Drift of the alpha channel: C1 * Cz(alpha) [rad/s]
  double f1(double alpha) const { return C1_ * coeffs(alpha).Cz; }
  /// Drift of the pitch-rate channel: C2 * Cm(alpha) [rad/s^2]
  double f2(double alpha) const { return C2_ * coeffs(alpha).Cm; }
  /// Fin effectiveness on alpha_dot: C1 * bz [rad/s per rad]
  double g1() const { return C1_ * coeffs(0.0).bz; }
  /// Fin effectiveness on q_dot: C2 * bm [rad/s^2 per rad]
  double g2() const { return C2_ * coeffs(0.0).bm; }

 private:
  double qbar_, S_, d_, mass_, VT_, Iyy_, mach_;
  EnvelopeMode envelope_;
  double C1_, C2_;
};

/// x = (alpha [rad], q [rad/s]), u = fin deflection [rad].
/// Returns (alpha_dot, q_dot).
inline Vector2d long_dynamics(const LongitudinalModel& model, const Vector2d& x,
                              double u) {
  if (!x.allFinite() || !std::isfinite(u))
    throw ModelError("long_dynamics: non-finite state or input");
  const LongCoeffs c = model.coeffs(x[0]);
  return Vector2d(x[1] + model.C1() * (c.Cz + c.bz * u),
                  model.C2() * (c.Cm + c.bm * u));
}

// ============================================================================
// First-order fin actuator
// ============================================================================

/// First-order lag K_a / (tau_a s + 1) with optional symmetric position and
/// rate limits (both disabled by default).
///
/// The unconstrained response to a command held constant over a step has the
/// closed form used by `actuator_step`, so the discrete update is exact for
/// any dt: stepping n times by dt equals stepping once by n*dt to rounding.
struct ActuatorState {
  double deflection = 0.0;  // current output [rad]
  double gain = 1.0;        // static gain K_a [-]
  double tau = 0.01;        // time constant tau_a [s]
  std::optional<double> position_limit;  // |deflection| bound [rad]
  std::optional<double> rate_limit;      // |deflection rate| bound [rad/s]
};

/// Unconstrained output at time `s` after the current instant, with the
/// command held at `cmd`:  K_a*cmd + (deflection - K_a*cmd) * exp(-s/tau).
/// Used both for the committed update and to sample the continuous actuator
/// trajectory inside an integrator step (ignores limits).
inline double actuator_output_at(const ActuatorState& st, double cmd, double s) {
  const double target = st.gain * cmd;
  return target + (st.deflection - target) * std::exp(-s / st.tau);
}

/// Advances the actuator by dt under a zero-order-held command. Exact
/// exponential update; when limits are set, the step is clamped afterwards
/// (limits make the semigroup property approximate by design).
inline ActuatorState actuator_step(const ActuatorState& st, double cmd,
                                   double dt) {
  if (!std::isfinite(cmd) || !std::isfinite(dt) || dt < 0.0 || st.tau <= 0.0)
    throw ModelError("actuator_step: invalid command, dt, or time constant");
  ActuatorState out = st;
  double next = actuator_output_at(st, cmd, dt);
  if (st.rate_limit) {
    const double max_move = *st.rate_limit * dt;
    const double move = next - st.deflection;
    if (move > max_move) next = st.deflection + max_move;
    if (move < -max_move) next = st.deflection - max_move;
  }
  if (st.position_limit) {
    if (next > *st.position_limit) next = *st.position_limit;
    if (next < -*st.position_limit) next = -*st.position_limit;
  }
  out.deflection = next;
  return out;
}

}  // namespace indilab::dynamics
