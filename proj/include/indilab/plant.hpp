#pragma once

// Plant abstraction the simulator drives. Two views of the same system live
// side by side:
//
//   * the truth dynamics, optionally distorted by drift/effectiveness scale
//     factors (what actually gets integrated), and
//   * the nominal model in output coordinates (what the exact-inversion
//     controller is allowed to know).
//
// The incremental controllers only ever see the nominal control effectiveness
// through a diagonal estimate taken at the initial state; that is the point
// of the whole exercise.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indilab/dynamics.hpp"
#include "indilab/errors.hpp"

namespace indilab::sim {

using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

class Plant {
 public:
  virtual ~Plant() = default;

  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index output_dim() const = 0;

  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> input_names() const = 0;
  virtual std::vector<std::string> output_names() const = 0;

  /// Truth dynamics xdot(x, delta), scale factors applied.
  virtual VectorXd deriv_truth(const VectorXd& x, const VectorXd& delta) const = 0;

  /// Controlled outputs y(x).
  virtual VectorXd output(const VectorXd& x) const = 0;

  /// Time derivative of the controlled outputs along the truth dynamics.
  virtual VectorXd output_deriv_truth(const VectorXd& x,
                                      const VectorXd& delta) const = 0;

  /// Nominal (undistorted) drift of the outputs, ydot = f_out + G_out delta.
  virtual VectorXd f_nominal_out(const VectorXd& x) const = 0;

  /// Nominal control effectiveness in output coordinates.
  virtual MatrixXd G_nominal_out(const VectorXd& x) const = 0;

  /// Appends a description for every envelope limit the state violates.
  virtual void envelope_violations(const VectorXd& x, double t,
                                   std::vector<std::string>& out) const {
    (void)x;
    (void)t;
    (void)out;
  }
};

/// Rigid-body rotational dynamics; the controlled output is the body rate
/// vector itself, so output coordinates coincide with the state.
class RotationalPlant final : public Plant {
 public:
  RotationalPlant(dynamics::RotationalModel model, double scale_f = 1.0,
                  double scale_g = 1.0)
      : model_(std::move(model)), scale_f_(scale_f), scale_g_(scale_g) {
    if (!std::isfinite(scale_f) || !std::isfinite(scale_g))
      throw ConfigError("plant scale factors must be finite");
  }

  const dynamics::RotationalModel& model() const { return model_; }

  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index input_dim() const override { return 3; }
  Eigen::Index output_dim() const override { return 3; }

  std::vector<std::string> state_names() const override { return {"p", "q", "r"}; }
  std::vector<std::string> input_names() const override {
    return {"dp", "dq", "dr"};
  }
  std::vector<std::string> output_names() const override { return {"p", "q", "r"}; }

  VectorXd deriv_truth(const VectorXd& x, const VectorXd& delta) const override {
    const Vector3d omega = x.head<3>();
    const Vector3d d = delta.head<3>();
    return scale_f_ * model_.f(omega) + scale_g_ * (model_.G() * d);
  }

  VectorXd output(const VectorXd& x) const override { return x; }

  VectorXd output_deriv_truth(const VectorXd& x,
                              const VectorXd& delta) const override {
    return deriv_truth(x, delta);
  }

  VectorXd f_nominal_out(const VectorXd& x) const override {
    return model_.f(x.head<3>());
  }

  MatrixXd G_nominal_out(const VectorXd& x) const override {
    (void)x;
    return model_.G();
  }

 private:
  dynamics::RotationalModel model_;
  double scale_f_;
  double scale_g_;
};

/// Pitch-plane airframe, state (alpha, q); the controlled output is the
/// pitch rate q. The drift scale factor distorts only the aerodynamic force
/// and moment contributions — the kinematic coupling of q into alphadot is
/// not an uncertain quantity.
class LongitudinalPlant final : public Plant {
 public:
  LongitudinalPlant(dynamics::LongitudinalModel model, double scale_f = 1.0,
                    double scale_g = 1.0,
                    dynamics::EnvelopeMode mode = dynamics::EnvelopeMode::Warn)
      : model_(std::move(model)), scale_f_(scale_f), scale_g_(scale_g),
        envelope_mode_(mode) {
    if (!std::isfinite(scale_f) || !std::isfinite(scale_g))
      throw ConfigError("plant scale factors must be finite");
  }

  const dynamics::LongitudinalModel& model() const { return model_; }

  Eigen::Index state_dim() const override { return 2; }
  Eigen::Index input_dim() const override { return 1; }
  Eigen::Index output_dim() const override { return 1; }

  std::vector<std::string> state_names() const override { return {"alpha", "q"}; }
  std::vector<std::string> input_names() const override { return {"fin"}; }
  std::vector<std::string> output_names() const override { return {"q"}; }

  VectorXd deriv_truth(const VectorXd& x, const VectorXd& delta) const override {
    const double alpha = x[0], q = x[1], u = delta[0];
    if (envelope_mode_ == dynamics::EnvelopeMode::Strict &&
        !model_.alpha_in_envelope(alpha))
      throw ModelError("incidence left the validity envelope under strict checking");
    VectorXd xd(2);
    xd[0] = q + scale_f_ * model_.f1(alpha) + scale_g_ * model_.g1() * u;
    xd[1] = scale_f_ * model_.f2(alpha) + scale_g_ * model_.g2() * u;
    return xd;
  }

  VectorXd output(const VectorXd& x) const override {
    VectorXd y(1);
    y[0] = x[1];
    return y;
  }

  VectorXd output_deriv_truth(const VectorXd& x,
                              const VectorXd& delta) const override {
    VectorXd yd(1);
    yd[0] = scale_f_ * model_.f2(x[0]) + scale_g_ * model_.g2() * delta[0];
    return yd;
  }

  VectorXd f_nominal_out(const VectorXd& x) const override {
    VectorXd f(1);
    f[0] = model_.f2(x[0]);
    return f;
  }

  MatrixXd G_nominal_out(const VectorXd& x) const override {
    (void)x;
    MatrixXd G(1, 1);
    G(0, 0) = model_.g2();
    return G;
  }

  void envelope_violations(const VectorXd& x, double t,
                           std::vector<std::string>& out) const override {
    if (envelope_mode_ == dynamics::EnvelopeMode::Off) return;
    if (!model_.alpha_in_envelope(x[0])) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "t=%.6g: |alpha|=%.6g rad exceeds limit",
                    t, std::abs(x[0]));
      out.emplace_back(buf);
    }
  }

 private:
  dynamics::LongitudinalModel model_;
  double scale_f_;
  double scale_g_;
  dynamics::EnvelopeMode envelope_mode_;
};

}  // namespace indilab::sim
